//! Plan search.
//!
//! Exhaustive mode walks every ordered partition of the modules into at
//! most `max_cycles` availability blocks together with every
//! precedence-respecting sequence of integration steps, and keeps the global
//! argmin. Greedy mode grows one plan step by step, each time taking the
//! feasible step (optionally preceded by a cycle break) with the smallest
//! total risk area so far; modules not yet integrated are counted as
//! available in the current cycle while scoring.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::model::{validate_model, ProductModel};
use crate::riskengine::{simulate, IntegrationPlan, KpiReport};
use crate::scalar::Scalar;

use super::build::{assemble, combinations, step_is_feasible, CycleSpec, Step};
use super::{ObjectiveKind, StrategyError, StrategyObjective};

/// Largest model the exhaustive search accepts.
pub const EXHAUSTIVE_MODULE_LIMIT: usize = 8;

const LEADERBOARD_SIZE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    Exhaustive,
    Greedy,
}

impl fmt::Display for SearchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SearchMode::Exhaustive => "exhaustive",
            SearchMode::Greedy => "greedy",
        })
    }
}

impl FromStr for SearchMode {
    type Err = StrategyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exhaustive" => Ok(SearchMode::Exhaustive),
            "greedy" => Ok(SearchMode::Greedy),
            other => Err(StrategyError::InvalidArgument(format!(
                "unknown search mode '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate<S> {
    /// Canonical identity, e.g. `{DAQ2,DSP2,FFT} DAQ2+DSP2 > FFT / …`.
    pub key: String,
    pub plan: IntegrationPlan,
    pub kpis: KpiReport<S>,
    pub score: S,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizeOutcome<S> {
    pub mode: SearchMode,
    pub objective: StrategyObjective,
    pub max_cycles: usize,
    /// Complete plans scored (exhaustive) or candidate steps scored (greedy).
    pub explored: u64,
    pub best: Candidate<S>,
    /// Best distinct plans, ascending by score then key.
    pub leaderboard: Vec<Candidate<S>>,
}

fn set_text(set: &Step, sep: &str) -> String {
    set.iter().cloned().collect::<Vec<_>>().join(sep)
}

pub(crate) fn plan_key(specs: &[CycleSpec]) -> String {
    specs
        .iter()
        .map(|c| {
            let steps: Vec<String> = c.steps.iter().map(|s| set_text(s, "+")).collect();
            let block = format!("{{{}}}", set_text(&c.available, ","));
            if steps.is_empty() {
                block
            } else {
                format!("{block} {}", steps.join(" > "))
            }
        })
        .collect::<Vec<_>>()
        .join(" / ")
}

fn rank<S: Scalar>(a: &Candidate<S>, b: &Candidate<S>) -> Ordering {
    a.score
        .partial_cmp(&b.score)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.key.cmp(&b.key))
}

struct Entry<S> {
    cand: Candidate<S>,
    estimate: f64,
}

struct Board<S> {
    explored: u64,
    top: Vec<Entry<S>>,
}

impl<S: Scalar> Board<S> {
    fn new() -> Self {
        Self {
            explored: 0,
            top: Vec::new(),
        }
    }

    fn offer(&mut self, cand: Candidate<S>, estimate: f64) {
        if self.top.len() == LEADERBOARD_SIZE
            && rank(&cand, &self.top.last().unwrap().cand) != Ordering::Less
        {
            return;
        }
        let pos = self
            .top
            .binary_search_by(|e| rank(&e.cand, &cand))
            .unwrap_or_else(|p| p);
        self.top.insert(pos, Entry { cand, estimate });
        self.top.truncate(LEADERBOARD_SIZE);
    }

    fn worst(&self) -> Option<&Entry<S>> {
        (self.top.len() == LEADERBOARD_SIZE).then(|| self.top.last().unwrap())
    }

    fn merge(mut self, other: Board<S>) -> Self {
        self.explored += other.explored;
        for e in other.top {
            self.offer(e.cand, e.estimate);
        }
        self
    }
}

fn score<S: Scalar>(
    model: &ProductModel,
    objective: &StrategyObjective,
    specs: &[CycleSpec],
) -> Option<Candidate<S>> {
    let plan = assemble(model, specs);
    let sim = simulate::<S>(model, &plan).ok()?;
    Some(Candidate {
        key: plan_key(specs),
        score: objective.evaluate(&sim.kpis),
        kpis: sim.kpis,
        plan,
    })
}

/// The model packed into bitmasks over the sorted module ids.
struct Packed {
    ids: Vec<String>,
    weight: Vec<f64>,
    preds: Vec<u32>,
    faces: Vec<(u32, f64)>,
    residual: f64,
}

impl Packed {
    fn new(model: &ProductModel) -> Self {
        let ids: Vec<String> = model.module_ids().into_iter().collect();
        let bit = |id: &str| 1u32 << ids.iter().position(|m| m == id).expect("validated model");
        let mut weight = vec![0.0; ids.len()];
        let mut preds = vec![0u32; ids.len()];
        for m in &model.modules {
            let i = bit(&m.id).trailing_zeros() as usize;
            weight[i] = m.fault_probability * m.fault_impact;
        }
        for (from, to) in &model.precedence {
            preds[bit(to).trailing_zeros() as usize] |= bit(from);
        }
        let faces = model
            .interfaces
            .iter()
            .map(|i| {
                (
                    bit(&i.endpoint_a) | bit(&i.endpoint_b),
                    i.fault_probability * i.fault_impact,
                )
            })
            .collect();
        Self {
            weight,
            preds,
            faces,
            residual: model.residual.fault_probability * model.residual.fault_impact,
            ids,
        }
    }

    fn open(&self, mask: u32) -> f64 {
        bits(mask).map(|i| self.weight[i]).sum()
    }

    /// Interface weight a step introduces, or `None` when it is infeasible.
    fn step(&self, members: u32, step: u32) -> Option<f64> {
        let inside = members | step;
        if bits(step).any(|i| self.preds[i] & !inside != 0) {
            return None;
        }
        let mut any = false;
        let mut w = 0.0;
        for &(ends, fw) in &self.faces {
            if ends & !inside == 0 && ends & step != 0 {
                any = true;
                w += fw;
            }
        }
        any.then_some(w)
    }

    fn set(&self, mask: u32) -> Step {
        bits(mask).map(|i| self.ids[i].clone()).collect()
    }
}

/// Every probability and impact is a multiple of 2^-12 below 256, so each
/// weight fits in 40 bits and every risk sum of a small plan is exact in f64.
fn dyadic_weights(model: &ProductModel) -> bool {
    let ok = |x: f64| {
        let y = x * 4096.0;
        y.fract() == 0.0 && y.abs() < (1u64 << 20) as f64
    };
    let r = &model.residual;
    ok(r.fault_probability)
        && ok(r.fault_impact)
        && model
            .modules
            .iter()
            .all(|m| ok(m.fault_probability) && ok(m.fault_impact))
        && model
            .interfaces
            .iter()
            .all(|i| ok(i.fault_probability) && ok(i.fault_impact))
}

fn bits(mask: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |i| mask & (1 << i) != 0)
}

/// Non-empty subsets of `mask`.
fn submasks(mask: u32) -> impl Iterator<Item = u32> {
    let mut sub = mask;
    std::iter::from_fn(move || {
        if sub == 0 {
            return None;
        }
        let cur = sub;
        sub = (sub - 1) & mask;
        Some(cur)
    })
}

/// Running f64 replay of the partial plan. It only decides which leaves
/// are clearly outside the leaderboard; anything that might qualify is
/// scored by the real engine, so results never depend on it.
#[derive(Clone, Copy)]
struct Trace {
    area: f64,
    peak: f64,
    phi: u64,
    level: f64,
    residuals: u32,
}

impl Trace {
    fn tick(mut self, level: f64) -> Self {
        self.area += level;
        self.peak = self.peak.max(level);
        self.phi += 1;
        self.level = level;
        self
    }

    fn score(&self, objective: &StrategyObjective) -> f64 {
        objective.evaluate(&KpiReport {
            phi: self.phi,
            cost: 0.0,
            remaining_risk: self.level,
            total_risk_area: self.area,
            average_risk: self.area / self.phi as f64,
            max_risk: self.peak,
        })
    }
}

struct Exhaustive<'a> {
    model: &'a ProductModel,
    objective: &'a StrategyObjective,
    max_cycles: usize,
    packed: Packed,
    /// Estimates are exact: base objective and dyadic weights.
    exact: bool,
    prune: bool,
}

/// Cycle under construction: available block and integration steps.
type MaskSpec = (u32, Vec<u32>);

impl Exhaustive<'_> {
    /// Whether a leaf could enter the board. With exact estimates the
    /// estimate orders plans like the engine does and ties fall to the key;
    /// otherwise only clearly worse leaves are skipped.
    fn may_qualify<S: Scalar>(&self, board: &Board<S>, estimate: f64, specs: &[MaskSpec]) -> bool {
        let Some(worst) = board.worst().filter(|_| self.prune) else {
            return true;
        };
        if self.exact {
            match estimate.partial_cmp(&worst.estimate) {
                Some(Ordering::Less) => true,
                Some(Ordering::Equal) => plan_key(&self.specs(specs)) < worst.cand.key,
                _ => false,
            }
        } else {
            let w = worst.cand.score.to_real();
            estimate <= w + 1e-9 * w.abs().max(1.0)
        }
    }

    fn specs(&self, masks: &[MaskSpec]) -> Vec<CycleSpec> {
        masks
            .iter()
            .map(|(block, steps)| CycleSpec {
                available: self.packed.set(*block),
                steps: steps.iter().map(|&s| self.packed.set(s)).collect(),
            })
            .collect()
    }

    fn start_cycle<S: Scalar>(
        &self,
        specs: &mut Vec<MaskSpec>,
        members: u32,
        pending: u32,
        unassigned: u32,
        trace: Trace,
        board: &mut Board<S>,
    ) {
        if specs.len() + 1 == self.max_cycles {
            self.open_block(
                specs, members, pending, unassigned, unassigned, trace, board,
            );
        } else {
            for block in submasks(unassigned) {
                self.open_block(specs, members, pending, unassigned, block, trace, board);
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn open_block<S: Scalar>(
        &self,
        specs: &mut Vec<MaskSpec>,
        members: u32,
        pending: u32,
        unassigned: u32,
        block: u32,
        trace: Trace,
        board: &mut Board<S>,
    ) {
        let pool = pending | block;
        let residuals = trace.residuals + u32::from(members != 0);
        let mut trace =
            trace.tick(self.packed.open(pool) + self.packed.residual * residuals as f64);
        trace.residuals = residuals;
        specs.push((block, Vec::new()));
        self.within_cycle(specs, members, pool, unassigned & !block, trace, board);
        specs.pop();
    }

    fn within_cycle<S: Scalar>(
        &self,
        specs: &mut Vec<MaskSpec>,
        members: u32,
        pool: u32,
        unassigned: u32,
        trace: Trace,
        board: &mut Board<S>,
    ) {
        if unassigned == 0 {
            if pool == 0 {
                board.explored += 1;
                let estimate = trace.score(self.objective);
                if self.may_qualify(board, estimate, specs) {
                    let specs = self.specs(specs);
                    if let Some(c) = score(self.model, self.objective, &specs) {
                        board.offer(c, estimate);
                    }
                }
            }
        } else if specs.len() < self.max_cycles {
            self.start_cycle(specs, members, pool, unassigned, trace, board);
        }
        for step in submasks(pool) {
            let Some(faces) = self.packed.step(members, step) else {
                continue;
            };
            let rest = pool & !step;
            let mut next = trace.tick(trace.level + faces).tick(self.packed.open(rest));
            next.residuals = 0;
            specs.last_mut().unwrap().1.push(step);
            self.within_cycle(specs, members | step, rest, unassigned, next, board);
            specs.last_mut().unwrap().1.pop();
        }
    }

    fn run<S: Scalar>(&self) -> Board<S> {
        let all = (1u32 << self.packed.ids.len()) - 1;
        let blocks: Vec<u32> = if self.max_cycles == 1 {
            vec![all]
        } else {
            submasks(all).collect()
        };
        let start = Trace {
            area: 0.0,
            peak: 0.0,
            phi: 0,
            level: 0.0,
            residuals: 0,
        };
        // one board per worker so pruning sees a well-filled board; the
        // result does not depend on how blocks are split
        let chunk = blocks.len().div_ceil(rayon::current_num_threads()).max(1);
        blocks
            .par_chunks(chunk)
            .map(|chunk| {
                let mut board = Board::new();
                let mut specs = Vec::new();
                for &block in chunk {
                    self.open_block(&mut specs, 0, 0, all, block, start, &mut board);
                }
                board
            })
            .reduce(Board::new, Board::merge)
    }
}

/// All feasible steps of the smallest size that has any, lexicographic.
fn smallest_feasible_steps(model: &ProductModel, members: &Step, pool: &Step) -> Vec<Step> {
    let ids: Vec<&String> = pool.iter().collect();
    for size in 1..=ids.len() {
        let found: Vec<Step> = combinations(ids.len(), size)
            .map(|idx| idx.iter().map(|&i| ids[i].clone()).collect::<Step>())
            .filter(|s| step_is_feasible(model, members, s))
            .collect();
        if !found.is_empty() {
            return found;
        }
    }
    Vec::new()
}

fn greedy<S: Scalar>(
    model: &ProductModel,
    objective: &StrategyObjective,
    max_cycles: usize,
) -> Result<(Candidate<S>, u64), StrategyError> {
    let mut closed: Vec<CycleSpec> = Vec::new();
    let mut steps: Vec<Step> = Vec::new();
    let mut in_cycle = Step::new();
    let mut members = Step::new();
    let mut remaining = model.module_ids();
    let mut explored = 0u64;

    while !remaining.is_empty() {
        let options = smallest_feasible_steps(model, &members, &remaining);
        if options.is_empty() {
            if model.modules.len() == 1 {
                break;
            }
            return Err(StrategyError::Stuck(remaining.into_iter().collect()));
        }
        let can_break = !steps.is_empty() && closed.len() + 1 < max_cycles;
        let mut best: Option<(S, bool, Step)> = None;
        for step in options {
            for brk in [false, true] {
                if brk && !can_break {
                    continue;
                }
                let mut specs = closed.clone();
                if brk {
                    specs.push(CycleSpec {
                        available: in_cycle.clone(),
                        steps: steps.clone(),
                    });
                    specs.push(CycleSpec {
                        available: remaining.clone(),
                        steps: vec![step.clone()],
                    });
                } else {
                    let mut s = steps.clone();
                    s.push(step.clone());
                    specs.push(CycleSpec {
                        available: in_cycle.union(&remaining).cloned().collect(),
                        steps: s,
                    });
                }
                explored += 1;
                let plan = assemble(model, &specs);
                let total = simulate::<S>(model, &plan)?.kpis.total_risk_area;
                let better = match &best {
                    None => true,
                    Some((b, _, _)) => total < *b,
                };
                if better {
                    best = Some((total, brk, step.clone()));
                }
            }
        }
        let (_, brk, step) = best.expect("at least one option scored");
        if brk {
            closed.push(CycleSpec {
                available: std::mem::take(&mut in_cycle),
                steps: std::mem::take(&mut steps),
            });
        }
        for m in &step {
            remaining.remove(m);
            in_cycle.insert(m.clone());
        }
        members.extend(step.iter().cloned());
        steps.push(step);
    }
    in_cycle.extend(remaining);
    closed.push(CycleSpec {
        available: in_cycle,
        steps,
    });
    let cand = score(model, objective, &closed).ok_or(StrategyError::NoFeasiblePlan)?;
    Ok((cand, explored))
}

/// Search for the plan minimizing `objective` with at most `max_cycles`
/// design cycles.
pub fn optimize<S: Scalar>(
    model: &ProductModel,
    objective: &StrategyObjective,
    max_cycles: usize,
    mode: SearchMode,
) -> Result<OptimizeOutcome<S>, StrategyError> {
    let report = validate_model(model);
    if report.has_errors() {
        return Err(StrategyError::InvalidModel(report));
    }
    objective.check()?;
    if max_cycles == 0 {
        return Err(StrategyError::InvalidArgument(
            "max_cycles must be at least 1".into(),
        ));
    }
    if model.modules.is_empty() {
        return Err(StrategyError::NoFeasiblePlan);
    }
    let outcome = |explored, leaderboard: Vec<Candidate<S>>| OptimizeOutcome {
        mode,
        objective: objective.clone(),
        max_cycles,
        explored,
        best: leaderboard[0].clone(),
        leaderboard,
    };
    if model.modules.len() == 1 {
        let spec = [CycleSpec {
            available: model.module_ids(),
            steps: Vec::new(),
        }];
        let cand = score(model, objective, &spec).ok_or(StrategyError::NoFeasiblePlan)?;
        return Ok(outcome(1, vec![cand]));
    }
    match mode {
        SearchMode::Exhaustive => {
            if model.modules.len() > EXHAUSTIVE_MODULE_LIMIT {
                return Err(StrategyError::TooManyModules {
                    count: model.modules.len(),
                    limit: EXHAUSTIVE_MODULE_LIMIT,
                });
            }
            let board = Exhaustive {
                model,
                objective,
                max_cycles,
                packed: Packed::new(model),
                exact: objective.kind != ObjectiveKind::Weighted && dyadic_weights(model),
                prune: true,
            }
            .run::<S>();
            if board.top.is_empty() {
                return Err(StrategyError::NoFeasiblePlan);
            }
            Ok(outcome(
                board.explored,
                board.top.into_iter().map(|e| e.cand).collect(),
            ))
        }
        SearchMode::Greedy => {
            let (cand, explored) = greedy::<S>(model, objective, max_cycles)?;
            Ok(outcome(explored, vec![cand]))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{InterfaceDef, ModuleDef};
    use crate::riskengine::scheme_two_plan;
    use crate::strategy::validate_plan;

    fn obj(kind: ObjectiveKind) -> StrategyObjective {
        StrategyObjective::new(kind)
    }

    fn boards(
        model: &ProductModel,
        objective: &StrategyObjective,
    ) -> [(u64, Vec<Candidate<f64>>); 2] {
        [true, false].map(|prune| {
            let b = Exhaustive {
                model,
                objective,
                max_cycles: 2,
                packed: Packed::new(model),
                exact: objective.kind != ObjectiveKind::Weighted && dyadic_weights(model),
                prune,
            }
            .run::<f64>();
            (b.explored, b.top.into_iter().map(|e| e.cand).collect())
        })
    }

    #[test]
    fn pruning_keeps_the_full_leaderboard() {
        let mds = ProductModel::mds();
        let mut tenths = mds.clone();
        for m in &mut tenths.modules {
            m.fault_probability = 0.1;
            m.fault_impact = 10.0 / 3.0;
        }
        assert!(dyadic_weights(&mds) && !dyadic_weights(&tenths));
        let weighted = StrategyObjective::weighted(vec![
            (ObjectiveKind::AverageRisk, 1.0),
            (ObjectiveKind::Duration, 0.1),
        ]);
        for model in [&mds, &tenths] {
            for o in [
                obj(ObjectiveKind::AverageRisk),
                obj(ObjectiveKind::MaxRisk),
                obj(ObjectiveKind::Duration),
                weighted.clone(),
            ] {
                let [pruned, full] = boards(model, &o);
                assert_eq!(pruned, full, "{o}");
            }
        }
    }

    #[test]
    fn mds_exhaustive_max_risk_is_at_most_five() {
        let model = ProductModel::mds();
        let out = optimize::<f64>(
            &model,
            &obj(ObjectiveKind::MaxRisk),
            2,
            SearchMode::Exhaustive,
        )
        .unwrap();
        assert!(out.best.score <= 5.0, "{}", out.best.score);
        assert!(out.best.plan.cycles.len() <= 2);
        assert!(!validate_plan(&model, &out.best.plan).has_errors());
        assert!(out
            .leaderboard
            .windows(2)
            .all(|w| rank(&w[0], &w[1]) != Ordering::Greater));
    }

    #[test]
    fn scheme_two_is_in_the_search_space() {
        let model = ProductModel::mds();
        let specs = [
            CycleSpec {
                available: ["DAQ2", "DSP2", "FFT"].map(String::from).into(),
                steps: vec![
                    ["DAQ2", "DSP2"].map(String::from).into(),
                    ["FFT"].map(String::from).into(),
                ],
            },
            CycleSpec {
                available: ["CFAR2", "DSP4", "PDP2"].map(String::from).into(),
                steps: vec![
                    ["CFAR2", "DSP4"].map(String::from).into(),
                    ["PDP2"].map(String::from).into(),
                ],
            },
        ];
        assert_eq!(assemble(&model, &specs).cycles, scheme_two_plan().cycles);
        assert_eq!(
            plan_key(&specs),
            "{DAQ2,DSP2,FFT} DAQ2+DSP2 > FFT / {CFAR2,DSP4,PDP2} CFAR2+DSP4 > PDP2"
        );
    }

    #[test]
    fn single_module_is_trivial() {
        let model = ProductModel {
            modules: vec![ModuleDef::new("M")],
            ..ProductModel::default()
        };
        for mode in [SearchMode::Exhaustive, SearchMode::Greedy] {
            let out = optimize::<f64>(&model, &obj(ObjectiveKind::AverageRisk), 3, mode).unwrap();
            assert_eq!(out.best.plan.cycles.len(), 1);
            assert!(out.best.plan.cycles[0].actions.is_empty());
            assert_eq!(out.best.kpis.phi, 1);
        }
    }

    #[test]
    fn exhaustive_refuses_large_models() {
        let model = ProductModel {
            modules: (0..9).map(|i| ModuleDef::new(format!("M{i}"))).collect(),
            interfaces: (1..9)
                .map(|i| InterfaceDef::new("M0", format!("M{i}")))
                .collect(),
            ..ProductModel::default()
        };
        let err = optimize::<f64>(
            &model,
            &obj(ObjectiveKind::Duration),
            2,
            SearchMode::Exhaustive,
        )
        .unwrap_err();
        assert!(err.to_string().contains("greedy"));
        let greedy = optimize::<f64>(&model, &obj(ObjectiveKind::Duration), 2, SearchMode::Greedy);
        assert!(greedy.is_ok());
    }

    #[test]
    fn greedy_never_beats_exhaustive_on_mds() {
        let model = ProductModel::mds();
        for kind in ObjectiveKind::BASE {
            for cycles in 1..=3 {
                let ex =
                    optimize::<f64>(&model, &obj(kind), cycles, SearchMode::Exhaustive).unwrap();
                let gr = optimize::<f64>(&model, &obj(kind), cycles, SearchMode::Greedy).unwrap();
                assert!(gr.best.score >= ex.best.score, "{kind} {cycles}");
                assert!(gr.best.plan.cycles.len() <= cycles);
            }
        }
    }

    #[test]
    fn zero_cycles_is_an_argument_error() {
        let err = optimize::<f64>(
            &ProductModel::mds(),
            &obj(ObjectiveKind::Duration),
            0,
            SearchMode::Greedy,
        )
        .unwrap_err();
        assert!(matches!(err, StrategyError::InvalidArgument(_)));
    }

    #[test]
    fn deterministic_across_runs() {
        let model = ProductModel::mds();
        let a = optimize::<f64>(
            &model,
            &obj(ObjectiveKind::AverageRisk),
            2,
            SearchMode::Exhaustive,
        )
        .unwrap();
        let b = optimize::<f64>(
            &model,
            &obj(ObjectiveKind::AverageRisk),
            2,
            SearchMode::Exhaustive,
        )
        .unwrap();
        assert_eq!(a, b);
    }
}
