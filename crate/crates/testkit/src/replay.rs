//! Naive event-replay oracle: the plan is replayed as literal mutations on
//! string-keyed risk maps. Shares no code with the engine beyond the plain
//! data types it reads.

use std::collections::{HashMap, HashSet};

use itrisk::{ActionKind, IntegrationPlan, ProductModel};

fn iface_key(a: &str, b: &str) -> String {
    if a <= b {
        format!("i:{a}|{b}")
    } else {
        format!("i:{b}|{a}")
    }
}

fn total(open: &HashMap<String, f64>) -> f64 {
    let mut keys: Vec<&String> = open.keys().collect();
    keys.sort();
    keys.iter().map(|k| open[*k]).sum()
}

/// Per-tick risk values, or `None` when the plan is not replayable.
pub fn replay(model: &ProductModel, plan: &IntegrationPlan) -> Option<Vec<f64>> {
    let weight_of_module: HashMap<&str, f64> = model
        .modules
        .iter()
        .map(|m| (m.id.as_str(), m.fault_probability * m.fault_impact))
        .collect();
    let weight_of_iface: HashMap<String, f64> = model
        .interfaces
        .iter()
        .map(|i| {
            (
                iface_key(&i.endpoint_a, &i.endpoint_b),
                i.fault_probability * i.fault_impact,
            )
        })
        .collect();
    let residual_weight = model.residual.fault_probability * model.residual.fault_impact;

    // open risk per key; cleared keys are removed
    let mut open: HashMap<String, f64> = HashMap::new();
    let mut ever_opened: HashSet<String> = HashSet::new();
    // assembly id -> keys it owns; and names usable as interface endpoints
    let mut contents: HashMap<String, HashSet<String>> = HashMap::new();
    let mut names: HashMap<String, HashSet<String>> = HashMap::new();
    let mut placed: HashSet<String> = HashSet::new();
    let mut available: HashSet<String> = HashSet::new();
    let mut out = Vec::new();

    for (ci, cycle) in plan.cycles.iter().enumerate() {
        for m in &cycle.available_modules {
            let w = *weight_of_module.get(m.as_str())?;
            if !available.insert(m.clone()) {
                return None;
            }
            open.insert(format!("m:{m}"), w);
        }
        for a in &cycle.carried_assemblies {
            let key = format!("r:{a}#{ci}");
            contents.get_mut(a)?.insert(key.clone());
            open.insert(key, residual_weight);
        }
        out.push(total(&open));

        for action in &cycle.actions {
            for _ in 1..action.duration {
                out.push(total(&open));
            }
            let target = action.target_assembly.clone();
            match action.kind {
                ActionKind::Integrate => {
                    contents.entry(target.clone()).or_default();
                    names
                        .entry(target.clone())
                        .or_default()
                        .insert(target.clone());
                    for other in &action.merge {
                        if other == &target {
                            return None;
                        }
                        let c = contents.remove(other)?;
                        let n = names.remove(other)?;
                        contents.get_mut(&target).unwrap().extend(c);
                        names.get_mut(&target).unwrap().extend(n);
                    }
                    for m in &action.added_modules {
                        if !available.contains(m) || !placed.insert(m.clone()) {
                            return None;
                        }
                        contents.get_mut(&target).unwrap().insert(format!("m:{m}"));
                        names.get_mut(&target).unwrap().insert(m.clone());
                    }
                    for pair in &action.introduced_interfaces {
                        let (a, b) = pair.endpoints();
                        let n = &names[&target];
                        if !n.contains(a) || !n.contains(b) {
                            return None;
                        }
                        let key = iface_key(a, b);
                        if !ever_opened.insert(key.clone()) {
                            return None;
                        }
                        let w = weight_of_iface
                            .get(&key)
                            .copied()
                            .unwrap_or(residual_weight);
                        contents.get_mut(&target).unwrap().insert(key.clone());
                        open.insert(key, w);
                    }
                }
                ActionKind::Test => {
                    let keys = contents.get(&target)?;
                    let eff = action.effectiveness.unwrap_or(1.0);
                    for k in keys {
                        if eff >= 1.0 {
                            open.remove(k);
                        } else if let Some(v) = open.get_mut(k) {
                            *v *= 1.0 - eff;
                        }
                    }
                }
            }
            out.push(total(&open));
        }
    }
    if out.is_empty() {
        None
    } else {
        Some(out)
    }
}
