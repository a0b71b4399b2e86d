use std::collections::{BTreeMap, BTreeSet};

use crate::model::{validate_model, Assembly, ProductModel};
use crate::riskengine::{simulate, ActionKind, IntegrationPlan};
use crate::validation::ValidationReport;

/// Check module coverage, references, precedence and the stop criterion.
///
/// Structural problems are errors. A plan whose tests are all fully
/// effective but which still ends with open risk gets a `stop-criterion`
/// warning carrying the open amount.
pub fn validate_plan(model: &ProductModel, plan: &IntegrationPlan) -> ValidationReport {
    let mut report = validate_model(model);
    if report.has_errors() {
        return report;
    }
    if plan.cycles.is_empty() {
        report.error("empty-plan", "cycles", "plan has no cycles");
        return report;
    }

    let all = model.module_ids();
    let mut available: BTreeSet<String> = BTreeSet::new();
    let mut placed: BTreeMap<String, String> = BTreeMap::new();
    let mut assemblies: BTreeMap<String, Assembly> = BTreeMap::new();
    let mut interfaces = BTreeSet::new();
    let mut action_ids = BTreeSet::new();

    for (ci, cycle) in plan.cycles.iter().enumerate() {
        for (j, id) in cycle.available_modules.iter().enumerate() {
            let loc = format!("cycles[{ci}].available[{j}]");
            if !all.contains(id) {
                report.error("unknown-module", loc, format!("unknown module '{id}'"));
            } else if !available.insert(id.clone()) {
                report.error(
                    "duplicate-availability",
                    loc,
                    format!("module '{id}' is made available in more than one cycle"),
                );
            }
        }
        for (j, id) in cycle.carried_assemblies.iter().enumerate() {
            if !assemblies.contains_key(id) {
                report.error(
                    "unknown-assembly",
                    format!("cycles[{ci}].carry_in[{j}]"),
                    format!("carried assembly '{id}' does not exist"),
                );
            }
        }

        for (ai, action) in cycle.actions.iter().enumerate() {
            let loc = format!("cycles[{ci}].actions[{ai}]");
            if !action_ids.insert(action.id.clone()) {
                report.warning(
                    "duplicate-action-id",
                    &loc,
                    format!("action id '{}' is reused", action.id),
                );
            }
            if action.duration == 0 {
                report.error(
                    "invalid-duration",
                    &loc,
                    "duration must be at least one tick",
                );
            }
            if !(action.cost >= 0.0 && action.cost.is_finite()) {
                report.error(
                    "invalid-cost",
                    &loc,
                    format!("cost {} must be >= 0", action.cost),
                );
            }
            let target = &action.target_assembly;
            match action.kind {
                ActionKind::Test => {
                    let eff = action.effectiveness();
                    if !(eff > 0.0 && eff <= 1.0) {
                        report.error(
                            "invalid-effectiveness",
                            &loc,
                            format!("effectiveness {eff} outside (0, 1]"),
                        );
                    }
                    if !action.added_modules.is_empty()
                        || !action.merge.is_empty()
                        || !action.introduced_interfaces.is_empty()
                    {
                        report.error(
                            "invalid-action",
                            &loc,
                            "test actions cannot add modules, merge assemblies or introduce interfaces",
                        );
                    }
                    match assemblies.get(target) {
                        None => report.error(
                            "unknown-assembly",
                            &loc,
                            format!("test '{}' targets unknown assembly '{target}'", action.id),
                        ),
                        Some(a) if a.is_empty() => report.warning(
                            "empty-assembly",
                            &loc,
                            format!("test '{}' targets empty assembly '{target}'", action.id),
                        ),
                        Some(_) => {}
                    }
                }
                ActionKind::Integrate => {
                    if action.effectiveness.is_some() {
                        report.warning(
                            "ignored-effectiveness",
                            &loc,
                            "effectiveness only applies to test actions",
                        );
                    }
                    let existed = assemblies.contains_key(target);
                    let mut assembly = assemblies
                        .remove(target)
                        .unwrap_or_else(|| Assembly::new(target.clone()));
                    let mut merged = 0;
                    for other in &action.merge {
                        match assemblies.remove(other) {
                            Some(b) if other != target => {
                                merged += 1;
                                for m in &b.members {
                                    placed.insert(m.clone(), target.clone());
                                }
                                assembly.members.extend(b.members);
                                assembly.internal_interfaces.extend(b.internal_interfaces);
                                assembly.residuals.extend(b.residuals);
                                assembly.absorbed.extend(b.absorbed);
                                assembly.absorbed.insert(b.id);
                            }
                            _ => report.error(
                                "unknown-assembly",
                                &loc,
                                format!("cannot merge assembly '{other}' into '{target}'"),
                            ),
                        }
                    }
                    for id in &action.added_modules {
                        if !all.contains(id) {
                            report.error("unknown-module", &loc, format!("unknown module '{id}'"));
                        } else if !available.contains(id) {
                            report.error(
                                "unavailable-module",
                                &loc,
                                format!("module '{id}' is integrated before it is available"),
                            );
                        } else if let Some(owner) = placed.get(id) {
                            report.error(
                                "already-integrated",
                                &loc,
                                format!("module '{id}' already belongs to assembly '{owner}'"),
                            );
                        } else {
                            placed.insert(id.clone(), target.clone());
                            assembly.members.insert(id.clone());
                        }
                    }
                    let assemblies_joined = merged + usize::from(existed);
                    if action.added_modules.is_empty() && assemblies_joined < 2 {
                        report.error(
                            "empty-integration",
                            &loc,
                            format!(
                                "integration '{}' must add a module or merge two assemblies",
                                action.id
                            ),
                        );
                    }
                    if action.introduced_interfaces.is_empty() {
                        report.error(
                            "no-interface",
                            &loc,
                            format!("integration '{}' declares no interface", action.id),
                        );
                    }
                    for pair in &action.introduced_interfaces {
                        let (a, b) = pair.endpoints();
                        if pair.is_degenerate()
                            || !assembly.admits_endpoint(a)
                            || !assembly.admits_endpoint(b)
                        {
                            report.error(
                                "interface-endpoint",
                                &loc,
                                format!("interface {pair} is not inside assembly '{target}'"),
                            );
                            continue;
                        }
                        if !interfaces.insert(pair.clone()) {
                            report.error(
                                "duplicate-interface",
                                &loc,
                                format!("interface {pair} introduced twice"),
                            );
                        }
                        if model.interface(pair).is_none() {
                            report.warning(
                                "uncataloged-interface",
                                &loc,
                                format!("interface {pair} is not in the model catalog; the residual risk entry is assumed"),
                            );
                        }
                    }
                    for id in &action.added_modules {
                        for pred in model.predecessors(id) {
                            if !assembly.members.contains(pred) {
                                report.error(
                                    "precedence",
                                    &loc,
                                    format!(
                                        "precedence {pred} -> {id} violated: '{id}' joins assembly '{target}' without '{pred}'"
                                    ),
                                );
                            }
                        }
                    }
                    assemblies.insert(target.clone(), assembly);
                }
            }
        }
    }

    for m in &model.modules {
        if !available.contains(&m.id) {
            report.error(
                "uncovered-module",
                "cycles",
                format!("module '{}' is never made available", m.id),
            );
        } else if !placed.contains_key(&m.id) && model.modules.len() > 1 {
            report.warning(
                "never-integrated",
                "cycles",
                format!("module '{}' is never integrated", m.id),
            );
        }
    }

    if report.has_errors() {
        return report;
    }
    match simulate::<f64>(model, plan) {
        Err(e) => report.error("replay", "plan", e.to_string()),
        Ok(sim) => {
            for w in &sim.warnings {
                report.warning("replay", "plan", w.clone());
            }
            if plan.fully_effective() && sim.kpis.remaining_risk > 0.0 {
                let open: Vec<String> = sim
                    .open_at_end
                    .iter()
                    .map(|h| h.location.to_string())
                    .collect();
                report.warning(
                    "stop-criterion",
                    "plan",
                    format!(
                        "open risk {} remains after the last action ({})",
                        sim.kpis.remaining_risk,
                        open.join(", ")
                    ),
                );
            }
        }
    }
    report
}
