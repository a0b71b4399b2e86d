use std::collections::BTreeSet;

use crate::model::{validate_model, InterfacePair, ProductModel};
use crate::riskengine::{DesignCycle, IntegrationPlan, PlanAction};

use super::StrategyError;

/// Modules joining the assembly in one integration action.
pub type Step = BTreeSet<String>;

/// Id of the assembly chain grown by generated plans.
pub const ASSEMBLY_ID: &str = "A1";

#[derive(Debug, Clone, PartialEq)]
pub struct BuiltPlan {
    pub plan: IntegrationPlan,
    pub warnings: Vec<String>,
}

/// One design cycle before it is turned into plan actions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct CycleSpec {
    pub available: Step,
    pub steps: Vec<Step>,
}

/// Cataloged interfaces a step introduces: both endpoints inside
/// `members ∪ step`, at least one endpoint in `step`. Catalog order.
pub fn step_interfaces(model: &ProductModel, members: &Step, step: &Step) -> Vec<InterfacePair> {
    let inside = |id: &str| members.contains(id) || step.contains(id);
    model
        .interfaces
        .iter()
        .filter(|i| {
            inside(&i.endpoint_a)
                && inside(&i.endpoint_b)
                && (step.contains(&i.endpoint_a) || step.contains(&i.endpoint_b))
        })
        .map(|i| i.pair())
        .collect()
}

/// First `(pred, module)` whose predecessor is neither integrated nor in the step.
pub(crate) fn precedence_violation(
    model: &ProductModel,
    members: &Step,
    step: &Step,
) -> Option<(String, String)> {
    for m in step {
        for p in model.predecessors(m) {
            if !members.contains(p) && !step.contains(p) {
                return Some((p.to_string(), m.clone()));
            }
        }
    }
    None
}

pub(crate) fn step_is_feasible(model: &ProductModel, members: &Step, step: &Step) -> bool {
    precedence_violation(model, members, step).is_none()
        && !step_interfaces(model, members, step).is_empty()
}

fn model_order(model: &ProductModel, set: &Step) -> Vec<String> {
    model
        .modules
        .iter()
        .filter(|m| set.contains(&m.id))
        .map(|m| m.id.clone())
        .collect()
}

/// Turn cycle specs into a plan. Performs no feasibility checking.
pub(crate) fn assemble(model: &ProductModel, cycles: &[CycleSpec]) -> IntegrationPlan {
    let mut members = Step::new();
    let mut n = 0;
    let mut out = Vec::with_capacity(cycles.len());
    for (ci, spec) in cycles.iter().enumerate() {
        let mut actions = Vec::with_capacity(spec.steps.len() * 2);
        let carried = if members.is_empty() {
            vec![]
        } else {
            vec![ASSEMBLY_ID.to_string()]
        };
        for step in &spec.steps {
            n += 1;
            let interfaces = step_interfaces(model, &members, step);
            actions.push(PlanAction {
                introduced_interfaces: interfaces,
                ..PlanAction::integrate(format!("I{n}"), ASSEMBLY_ID, &[], &[])
            });
            actions.last_mut().unwrap().added_modules = model_order(model, step);
            actions.push(PlanAction::test(format!("T{n}"), ASSEMBLY_ID));
            members.extend(step.iter().cloned());
        }
        out.push(DesignCycle {
            label: format!("k{}", ci + 1),
            available_modules: model_order(model, &spec.available),
            carried_assemblies: carried,
            actions,
        });
    }
    IntegrationPlan {
        label: None,
        cycles: out,
    }
}

/// Lexicographically smallest feasible step of minimal size drawn from `pool`.
pub(crate) fn smallest_feasible_step(
    model: &ProductModel,
    members: &Step,
    pool: &Step,
) -> Option<Step> {
    let ids: Vec<&String> = pool.iter().collect();
    (1..=ids.len()).find_map(|size| {
        combinations(ids.len(), size)
            .map(|idx| idx.iter().map(|&i| ids[i].clone()).collect::<Step>())
            .find(|step| step_is_feasible(model, members, step))
    })
}

/// Index combinations of `k` out of `n` in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut state: Option<Vec<usize>> = if k <= n { Some((0..k).collect()) } else { None };
    std::iter::from_fn(move || {
        let current = state.clone()?;
        let mut next = current.clone();
        let mut i = k;
        loop {
            if i == 0 {
                state = None;
                break;
            }
            i -= 1;
            if next[i] < n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                state = Some(next);
                break;
            }
        }
        Some(current)
    })
}

/// Deterministic order for one cycle: repeatedly integrate the smallest
/// feasible step (ties by module id) until no step is feasible.
pub fn canonical_order(model: &ProductModel, integrated: &Step, pool: &Step) -> Vec<Step> {
    let mut members = integrated.clone();
    let mut pool = pool.clone();
    let mut order = Vec::new();
    while let Some(step) = smallest_feasible_step(model, &members, &pool) {
        for m in &step {
            pool.remove(m);
        }
        members.extend(step.iter().cloned());
        order.push(step);
    }
    order
}

/// Parse `"DSP2,DAQ2,FFT/DSP4,CFAR2,PDP2"` into blocks.
pub fn parse_partition(text: &str) -> Result<Vec<Vec<String>>, StrategyError> {
    text.split('/')
        .enumerate()
        .map(|(i, block)| {
            let ids: Vec<String> = block
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect();
            if ids.is_empty() {
                Err(StrategyError::PartitionSyntax(format!(
                    "block {} is empty",
                    i + 1
                )))
            } else {
                Ok(ids)
            }
        })
        .collect()
}

fn check_partition(
    model: &ProductModel,
    partition: &[Vec<String>],
) -> Result<Vec<Step>, StrategyError> {
    let report = validate_model(model);
    if report.has_errors() {
        return Err(StrategyError::InvalidModel(report));
    }
    let all = model.module_ids();
    let mut seen = Step::new();
    let mut blocks = Vec::with_capacity(partition.len());
    for (i, block) in partition.iter().enumerate() {
        if block.is_empty() {
            return Err(StrategyError::EmptyBlock(i + 1));
        }
        let mut set = Step::new();
        for id in block {
            if !all.contains(id) {
                return Err(StrategyError::UnknownModule(id.clone()));
            }
            if !seen.insert(id.clone()) || !set.insert(id.clone()) {
                return Err(StrategyError::PartitionOverlap(id.clone()));
            }
        }
        blocks.push(set);
    }
    let missing: Vec<String> = model_order(model, &all.difference(&seen).cloned().collect());
    if !missing.is_empty() {
        return Err(StrategyError::PartitionIncomplete(missing));
    }
    Ok(blocks)
}

/// One design cycle per partition block. Cycle `n ≥ 2` carries the assembly
/// built so far. Without explicit `orders`, each cycle uses
/// [`canonical_order`]; modules a cycle cannot integrate stay pending and
/// may join in a later cycle.
pub fn build_adaptive_plan(
    model: &ProductModel,
    partition: &[Vec<String>],
    orders: Option<&[Vec<Vec<String>>]>,
) -> Result<BuiltPlan, StrategyError> {
    let blocks = check_partition(model, partition)?;
    if let Some(orders) = orders {
        if orders.len() != blocks.len() {
            return Err(StrategyError::OrderCount {
                expected: blocks.len(),
                got: orders.len(),
            });
        }
    }
    let mut members = Step::new();
    let mut pending = Step::new();
    let mut specs = Vec::with_capacity(blocks.len());
    for (ci, block) in blocks.iter().enumerate() {
        let mut pool: Step = pending.union(block).cloned().collect();
        let steps = match orders {
            None => canonical_order(model, &members, &pool),
            Some(orders) => {
                let mut steps = Vec::new();
                for raw in &orders[ci] {
                    let step: Step = raw.iter().cloned().collect();
                    if step.is_empty() {
                        return Err(StrategyError::StepModule {
                            cycle: ci + 1,
                            module: String::new(),
                            reason: "empty step".into(),
                        });
                    }
                    for m in &step {
                        if !pool.contains(m) {
                            let reason = if members.contains(m) {
                                "already integrated"
                            } else if model.module(m).is_none() {
                                "unknown module"
                            } else {
                                "not available in this cycle"
                            };
                            return Err(StrategyError::StepModule {
                                cycle: ci + 1,
                                module: m.clone(),
                                reason: reason.into(),
                            });
                        }
                    }
                    if let Some((pred, module)) = precedence_violation(model, &members, &step) {
                        return Err(StrategyError::Precedence {
                            cycle: ci + 1,
                            pred,
                            module,
                        });
                    }
                    if step_interfaces(model, &members, &step).is_empty() {
                        return Err(StrategyError::NoInterface {
                            cycle: ci + 1,
                            step: model_order(model, &step),
                        });
                    }
                    for m in &step {
                        pool.remove(m);
                    }
                    members.extend(step.iter().cloned());
                    steps.push(step);
                }
                steps
            }
        };
        if orders.is_none() {
            for step in &steps {
                for m in step {
                    pool.remove(m);
                }
                members.extend(step.iter().cloned());
            }
        }
        pending = pool;
        specs.push(CycleSpec {
            available: block.clone(),
            steps,
        });
    }
    let mut warnings = Vec::new();
    if !pending.is_empty() {
        let left = model_order(model, &pending);
        if model.modules.len() == 1 {
            warnings.push(format!(
                "nothing to integrate: single module '{}' is only made available",
                left[0]
            ));
        } else if orders.is_some() {
            return Err(StrategyError::Uncovered(left));
        } else {
            return Err(StrategyError::Stuck(left));
        }
    }
    Ok(BuiltPlan {
        plan: assemble(model, &specs),
        warnings,
    })
}

/// Single-cycle plan with every module available up front, one
/// integrate/test pair per step of `order`.
pub fn build_conventional_plan(
    model: &ProductModel,
    order: &[Vec<String>],
) -> Result<BuiltPlan, StrategyError> {
    let all = vec![model
        .modules
        .iter()
        .map(|m| m.id.clone())
        .collect::<Vec<_>>()];
    build_adaptive_plan(model, &all, Some(&[order.to_vec()]))
}
