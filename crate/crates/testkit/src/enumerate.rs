//! Brute-force plan enumeration for the single-chain plan family.
//!
//! Risk is tracked analytically: with fully effective tests, after each
//! test only the available-but-unintegrated modules stay open, so the
//! profile follows from counts alone and no replay is needed.

use std::collections::BTreeSet;

use itrisk::ProductModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Goal {
    AverageRisk,
    MaxRisk,
    Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Enumeration {
    /// Complete plans visited.
    pub leaves: u64,
    /// Best objective value, if any plan integrates everything.
    pub best: Option<f64>,
}

struct Ctx<'a> {
    model: &'a ProductModel,
    goal: Goal,
    leaves: u64,
    best: Option<f64>,
}

fn weight(model: &ProductModel, id: &str) -> f64 {
    let m = model.modules.iter().find(|m| m.id == id).unwrap();
    m.fault_probability * m.fault_impact
}

fn ok_step(model: &ProductModel, members: &BTreeSet<String>, step: &BTreeSet<String>) -> bool {
    let has = |x: &String| members.contains(x) || step.contains(x);
    let ordered = model
        .precedence
        .iter()
        .all(|(p, m)| !step.contains(m) || has(p));
    let linked = model.interfaces.iter().any(|i| {
        has(&i.endpoint_a)
            && has(&i.endpoint_b)
            && (step.contains(&i.endpoint_a) || step.contains(&i.endpoint_b))
    });
    ordered && linked
}

fn new_interface_weight(
    model: &ProductModel,
    members: &BTreeSet<String>,
    step: &BTreeSet<String>,
) -> f64 {
    model
        .interfaces
        .iter()
        .filter(|i| {
            let has = |x: &String| members.contains(x) || step.contains(x);
            has(&i.endpoint_a)
                && has(&i.endpoint_b)
                && (step.contains(&i.endpoint_a) || step.contains(&i.endpoint_b))
        })
        .map(|i| i.fault_probability * i.fault_impact)
        .sum()
}

fn nonempty_subsets(items: &BTreeSet<String>) -> Vec<BTreeSet<String>> {
    let v: Vec<&String> = items.iter().collect();
    (1u32..1 << v.len())
        .map(|mask| {
            v.iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, s)| (*s).clone())
                .collect()
        })
        .collect()
}

/// Every assignment of modules to exactly `k` labelled non-empty blocks.
fn ordered_partitions(ids: &[String], k: usize) -> Vec<Vec<BTreeSet<String>>> {
    let mut out = Vec::new();
    let total = (k as u64).pow(ids.len() as u32);
    for code in 0..total {
        let mut blocks = vec![BTreeSet::new(); k];
        let mut c = code;
        for id in ids {
            blocks[(c % k as u64) as usize].insert(id.clone());
            c /= k as u64;
        }
        if blocks.iter().all(|b| !b.is_empty()) {
            out.push(blocks);
        }
    }
    out
}

struct Trace {
    samples: Vec<f64>,
}

impl Ctx<'_> {
    fn finish(&mut self, trace: &Trace) {
        self.leaves += 1;
        let phi = trace.samples.len() as f64;
        let area: f64 = trace.samples.iter().sum();
        let value = match self.goal {
            Goal::AverageRisk => area / phi,
            Goal::MaxRisk => trace.samples.iter().cloned().fold(f64::MIN, f64::max),
            Goal::Duration => phi,
        };
        if self.best.is_none_or(|b| value < b) {
            self.best = Some(value);
        }
    }

    /// `waiting`: available but not integrated. `residuals`: open residual count.
    #[allow(clippy::too_many_arguments)]
    fn walk(
        &mut self,
        blocks: &[BTreeSet<String>],
        cycle: usize,
        members: &BTreeSet<String>,
        waiting: &BTreeSet<String>,
        residuals: u32,
        trace: &mut Trace,
    ) {
        let last = cycle + 1 == blocks.len();
        if last && waiting.is_empty() {
            self.finish(trace);
        }
        if !last {
            self.open_cycle(blocks, cycle + 1, members, waiting, residuals, trace);
        }
        for step in nonempty_subsets(waiting) {
            if !ok_step(self.model, members, &step) {
                continue;
            }
            let open_before = *trace.samples.last().unwrap();
            let faces = new_interface_weight(self.model, members, &step);
            let next_members: BTreeSet<String> = members.union(&step).cloned().collect();
            let next_waiting: BTreeSet<String> = waiting.difference(&step).cloned().collect();
            let after_test: f64 = next_waiting.iter().map(|m| weight(self.model, m)).sum();
            trace.samples.push(open_before + faces);
            trace.samples.push(after_test);
            self.walk(blocks, cycle, &next_members, &next_waiting, 0, trace);
            trace.samples.truncate(trace.samples.len() - 2);
        }
    }

    fn open_cycle(
        &mut self,
        blocks: &[BTreeSet<String>],
        cycle: usize,
        members: &BTreeSet<String>,
        waiting: &BTreeSet<String>,
        residuals: u32,
        trace: &mut Trace,
    ) {
        let residual = self.model.residual.fault_probability * self.model.residual.fault_impact;
        let residuals = residuals + u32::from(!members.is_empty());
        let waiting: BTreeSet<String> = waiting.union(&blocks[cycle]).cloned().collect();
        let open: f64 = waiting.iter().map(|m| weight(self.model, m)).sum::<f64>()
            + residual * residuals as f64;
        trace.samples.push(open);
        self.walk(blocks, cycle, members, &waiting, residuals, trace);
        trace.samples.pop();
    }
}

/// Enumerate every plan with `1..=max_cycles` availability blocks and any
/// precedence- and interface-feasible step sequence; modules may wait for a
/// later cycle. All tests are fully effective.
pub fn enumerate(model: &ProductModel, max_cycles: usize, goal: Goal) -> Enumeration {
    let ids: Vec<String> = model.modules.iter().map(|m| m.id.clone()).collect();
    let mut ctx = Ctx {
        model,
        goal,
        leaves: 0,
        best: None,
    };
    // a lone module has nothing to integrate: the plan is its availability tick
    if let [only] = ids.as_slice() {
        ctx.finish(&Trace {
            samples: vec![weight(model, only)],
        });
        return Enumeration {
            leaves: ctx.leaves,
            best: ctx.best,
        };
    }
    for k in 1..=max_cycles.min(ids.len()) {
        for blocks in ordered_partitions(&ids, k) {
            let mut trace = Trace {
                samples: Vec::new(),
            };
            ctx.open_cycle(
                &blocks,
                0,
                &BTreeSet::new(),
                &BTreeSet::new(),
                0,
                &mut trace,
            );
        }
    }
    Enumeration {
        leaves: ctx.leaves,
        best: ctx.best,
    }
}
