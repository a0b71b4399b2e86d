//! Discrete-time replay of an integration plan.
//!
//! Each design cycle starts with one availability tick that opens a
//! hypothesis per newly available module and one residual hypothesis per
//! carried-in assembly. Integrate actions open one hypothesis per
//! introduced interface at their completion tick; test actions clear every
//! open hypothesis inside their target assembly at their completion tick.
//! The profile holds the total open risk after each tick.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Assembly, FaultHypothesis, InterfacePair, Location, ProductModel};
use crate::scalar::Scalar;

fn unit() -> f64 {
    1.0
}

fn one_tick() -> u32 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionKind {
    Integrate,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanAction {
    #[serde(rename = "type")]
    pub kind: ActionKind,
    pub id: String,
    #[serde(rename = "assembly")]
    pub target_assembly: String,
    #[serde(rename = "add", default, skip_serializing_if = "Vec::is_empty")]
    pub added_modules: Vec<String>,
    /// Other assemblies folded into the target by an integrate action.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub merge: Vec<String>,
    #[serde(rename = "interfaces", default, skip_serializing_if = "Vec::is_empty")]
    pub introduced_interfaces: Vec<InterfacePair>,
    #[serde(default = "one_tick")]
    pub duration: u32,
    #[serde(default = "unit")]
    pub cost: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effectiveness: Option<f64>,
}

impl PlanAction {
    pub fn integrate(
        id: impl Into<String>,
        assembly: impl Into<String>,
        add: &[&str],
        interfaces: &[(&str, &str)],
    ) -> Self {
        Self {
            kind: ActionKind::Integrate,
            id: id.into(),
            target_assembly: assembly.into(),
            added_modules: add.iter().map(|s| s.to_string()).collect(),
            merge: Vec::new(),
            introduced_interfaces: interfaces
                .iter()
                .map(|(a, b)| InterfacePair::new(a, b))
                .collect(),
            duration: 1,
            cost: 1.0,
            effectiveness: None,
        }
    }

    pub fn test(id: impl Into<String>, assembly: impl Into<String>) -> Self {
        Self {
            kind: ActionKind::Test,
            id: id.into(),
            target_assembly: assembly.into(),
            added_modules: Vec::new(),
            merge: Vec::new(),
            introduced_interfaces: Vec::new(),
            duration: 1,
            cost: 1.0,
            effectiveness: Some(1.0),
        }
    }

    pub fn effectiveness(&self) -> f64 {
        self.effectiveness.unwrap_or(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignCycle {
    pub label: String,
    #[serde(rename = "available", default)]
    pub available_modules: Vec<String>,
    #[serde(rename = "carry_in", default)]
    pub carried_assemblies: Vec<String>,
    #[serde(default)]
    pub actions: Vec<PlanAction>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IntegrationPlan {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub cycles: Vec<DesignCycle>,
}

impl IntegrationPlan {
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    pub fn actions(&self) -> impl Iterator<Item = &PlanAction> {
        self.cycles.iter().flat_map(|c| c.actions.iter())
    }

    /// Total number of ticks the plan occupies.
    pub fn duration(&self) -> u64 {
        self.cycles
            .iter()
            .map(|c| 1 + c.actions.iter().map(|a| a.duration as u64).sum::<u64>())
            .sum()
    }

    pub fn total_cost(&self) -> f64 {
        self.actions().map(|a| a.cost).sum()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// Every effectiveness equals 1, so tests fully clear.
    pub fn fully_effective(&self) -> bool {
        self.actions()
            .filter(|a| a.kind == ActionKind::Test)
            .all(|a| a.effectiveness() >= 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RiskProfile<S> {
    /// `(tick, risk)` with ticks consecutive from 1.
    pub samples: Vec<(u64, S)>,
}

impl<S: Scalar> RiskProfile<S> {
    pub fn from_values(values: impl IntoIterator<Item = S>) -> Self {
        Self {
            samples: values
                .into_iter()
                .enumerate()
                .map(|(i, v)| (i as u64 + 1, v))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn values(&self) -> Vec<S> {
        self.samples.iter().map(|(_, r)| *r).collect()
    }

    pub fn at(&self, tick: u64) -> Option<S> {
        self.samples
            .get(tick.checked_sub(1)? as usize)
            .map(|(_, r)| *r)
    }

    pub fn max(&self) -> S {
        self.samples
            .iter()
            .fold(S::zero(), |acc, (_, r)| acc.max_of(*r))
    }

    pub fn area(&self) -> S {
        self.samples.iter().fold(S::zero(), |acc, (_, r)| acc + *r)
    }

    pub fn last(&self) -> S {
        self.samples.last().map(|(_, r)| *r).unwrap_or_else(S::zero)
    }

    /// Multiply every sample by `factor`.
    pub fn scaled(&self, factor: S) -> Self {
        Self {
            samples: self
                .samples
                .iter()
                .map(|(t, r)| (*t, *r * factor))
                .collect(),
        }
    }

    /// `tick,risk` CSV with six decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tick,risk\n");
        for (t, r) in &self.samples {
            let _ = writeln!(out, "{t},{:.6}", r.to_real());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpiReport<S> {
    pub phi: u64,
    pub cost: S,
    pub remaining_risk: S,
    pub total_risk_area: S,
    pub average_risk: S,
    pub max_risk: S,
}

/// KPIs for a replayed profile: duration, cost, remaining risk, area under
/// the profile (unit-tick rectangle sum) and average risk over the duration.
pub fn kpis<S: Scalar>(profile: &RiskProfile<S>, plan: &IntegrationPlan) -> KpiReport<S> {
    kpis_with_cost(profile, plan.actions().map(|a| S::from_real(a.cost)))
}

fn kpis_with_cost<S: Scalar>(
    profile: &RiskProfile<S>,
    costs: impl Iterator<Item = S>,
) -> KpiReport<S> {
    let phi = profile.len() as u64;
    let total_risk_area = profile.area();
    let average_risk = if phi == 0 {
        S::zero()
    } else {
        total_risk_area / S::from_count(phi)
    };
    KpiReport {
        phi,
        cost: costs.fold(S::zero(), |a, c| a + c),
        remaining_risk: profile.last(),
        total_risk_area,
        average_risk,
        max_risk: profile.max(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Availability,
    Integrate,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event<S> {
    pub tick: u64,
    pub cycle: String,
    pub kind: EventKind,
    /// Action id; `None` for availability events.
    pub action: Option<String>,
    pub opened: Vec<Location>,
    pub reduced: Vec<Location>,
    pub risk_after: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation<S> {
    pub profile: RiskProfile<S>,
    pub kpis: KpiReport<S>,
    /// Cumulative KPIs at the end of each cycle, labelled by cycle.
    pub cycle_kpis: Vec<(String, KpiReport<S>)>,
    pub events: Vec<Event<S>>,
    pub warnings: Vec<String>,
    /// Hypotheses still open after the last tick.
    pub open_at_end: Vec<FaultHypothesis<S>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("plan has no cycles; a replay needs at least one tick")]
    EmptyPlan,
    #[error("{at}: unknown module '{id}'")]
    UnknownModule { at: String, id: String },
    #[error("{at}: unknown assembly '{id}'")]
    UnknownAssembly { at: String, id: String },
    #[error("{at}: module '{id}' made available more than once")]
    DuplicateAvailability { at: String, id: String },
    #[error("{at}: module '{id}' is not available yet")]
    ModuleUnavailable { at: String, id: String },
    #[error("{at}: module '{id}' is already integrated into assembly '{assembly}'")]
    AlreadyIntegrated {
        at: String,
        id: String,
        assembly: String,
    },
    #[error("{at}: interface {pair} has an endpoint outside assembly '{assembly}'")]
    InterfaceOutsideAssembly {
        at: String,
        pair: String,
        assembly: String,
    },
    #[error("{at}: interface {pair} introduced twice")]
    DuplicateInterface { at: String, pair: String },
    #[error("{at}: {reason}")]
    InvalidAction { at: String, reason: String },
}

struct Replay<'m, S> {
    model: &'m ProductModel,
    hyps: BTreeMap<Location, FaultHypothesis<S>>,
    assemblies: BTreeMap<String, Assembly>,
    owner: BTreeMap<String, String>,
    available: BTreeSet<String>,
    tick: u64,
    samples: Vec<(u64, S)>,
    events: Vec<Event<S>>,
    warnings: Vec<String>,
}

impl<'m, S: Scalar> Replay<'m, S> {
    fn total(&self) -> S {
        self.hyps.values().fold(S::zero(), |acc, h| acc + h.risk())
    }

    fn sample(&mut self) -> S {
        let risk = self.total();
        self.samples.push((self.tick, risk));
        risk
    }

    fn open(&mut self, location: Location, probability: f64, impact: f64) {
        let h = FaultHypothesis::open(
            location.clone(),
            S::from_real(probability),
            S::from_real(impact),
        );
        self.hyps.insert(location, h);
    }

    fn availability(&mut self, index: usize, cycle: &DesignCycle) -> Result<(), SimError> {
        self.tick += 1;
        let mut opened = Vec::new();
        for (j, id) in cycle.available_modules.iter().enumerate() {
            let at = format!("cycles[{index}].available[{j}]");
            let module = self
                .model
                .module(id)
                .ok_or_else(|| SimError::UnknownModule {
                    at: at.clone(),
                    id: id.clone(),
                })?;
            if !self.available.insert(id.clone()) {
                return Err(SimError::DuplicateAvailability { at, id: id.clone() });
            }
            let loc = Location::Module { id: id.clone() };
            self.open(loc.clone(), module.fault_probability, module.fault_impact);
            opened.push(loc);
        }
        for (j, id) in cycle.carried_assemblies.iter().enumerate() {
            let at = format!("cycles[{index}].carry_in[{j}]");
            if !self.assemblies.contains_key(id) {
                return Err(SimError::UnknownAssembly { at, id: id.clone() });
            }
            let loc = Location::Residual {
                assembly: id.clone(),
                cycle: index,
            };
            let residual = self.model.residual;
            self.open(
                loc.clone(),
                residual.fault_probability,
                residual.fault_impact,
            );
            self.assemblies
                .get_mut(id)
                .unwrap()
                .residuals
                .insert(loc.clone());
            opened.push(loc);
        }
        let risk_after = self.sample();
        self.events.push(Event {
            tick: self.tick,
            cycle: cycle.label.clone(),
            kind: EventKind::Availability,
            action: None,
            opened,
            reduced: Vec::new(),
            risk_after,
        });
        Ok(())
    }

    fn action(
        &mut self,
        at: &str,
        cycle: &DesignCycle,
        action: &PlanAction,
    ) -> Result<(), SimError> {
        if action.duration == 0 {
            return Err(SimError::InvalidAction {
                at: at.to_string(),
                reason: format!("action '{}' has zero duration", action.id),
            });
        }
        for _ in 1..action.duration {
            self.tick += 1;
            self.sample();
        }
        self.tick += 1;
        let (kind, opened, reduced) = match action.kind {
            ActionKind::Integrate => (
                EventKind::Integrate,
                self.integrate(at, action)?,
                Vec::new(),
            ),
            ActionKind::Test => (EventKind::Test, Vec::new(), self.test(at, action)?),
        };
        let risk_after = self.sample();
        self.events.push(Event {
            tick: self.tick,
            cycle: cycle.label.clone(),
            kind,
            action: Some(action.id.clone()),
            opened,
            reduced,
            risk_after,
        });
        Ok(())
    }

    fn integrate(&mut self, at: &str, action: &PlanAction) -> Result<Vec<Location>, SimError> {
        let target = action.target_assembly.clone();
        let mut assembly = self
            .assemblies
            .remove(&target)
            .unwrap_or_else(|| Assembly::new(target.clone()));
        for other in &action.merge {
            if other == &target {
                return Err(SimError::InvalidAction {
                    at: at.to_string(),
                    reason: format!("assembly '{target}' cannot merge into itself"),
                });
            }
            let absorbed =
                self.assemblies
                    .remove(other)
                    .ok_or_else(|| SimError::UnknownAssembly {
                        at: at.to_string(),
                        id: other.clone(),
                    })?;
            for m in &absorbed.members {
                self.owner.insert(m.clone(), target.clone());
            }
            assembly.members.extend(absorbed.members);
            assembly
                .internal_interfaces
                .extend(absorbed.internal_interfaces);
            assembly.residuals.extend(absorbed.residuals);
            assembly.absorbed.extend(absorbed.absorbed);
            assembly.absorbed.insert(absorbed.id);
        }
        for id in &action.added_modules {
            if self.model.module(id).is_none() {
                return Err(SimError::UnknownModule {
                    at: at.to_string(),
                    id: id.clone(),
                });
            }
            if !self.available.contains(id) {
                return Err(SimError::ModuleUnavailable {
                    at: at.to_string(),
                    id: id.clone(),
                });
            }
            if let Some(owner) = self.owner.get(id) {
                return Err(SimError::AlreadyIntegrated {
                    at: at.to_string(),
                    id: id.clone(),
                    assembly: owner.clone(),
                });
            }
            self.owner.insert(id.clone(), target.clone());
            assembly.members.insert(id.clone());
        }
        let mut opened = Vec::new();
        for pair in &action.introduced_interfaces {
            let (a, b) = pair.endpoints();
            if pair.is_degenerate() || !assembly.admits_endpoint(a) || !assembly.admits_endpoint(b)
            {
                return Err(SimError::InterfaceOutsideAssembly {
                    at: at.to_string(),
                    pair: pair.to_string(),
                    assembly: target.clone(),
                });
            }
            let loc = Location::Interface { pair: pair.clone() };
            if self.hyps.contains_key(&loc) {
                return Err(SimError::DuplicateInterface {
                    at: at.to_string(),
                    pair: pair.to_string(),
                });
            }
            let (p, i) = self
                .model
                .interface(pair)
                .map(|d| (d.fault_probability, d.fault_impact))
                .unwrap_or((
                    self.model.residual.fault_probability,
                    self.model.residual.fault_impact,
                ));
            self.open(loc.clone(), p, i);
            assembly.internal_interfaces.insert(pair.clone());
            opened.push(loc);
        }
        self.assemblies.insert(target, assembly);
        Ok(opened)
    }

    fn test(&mut self, at: &str, action: &PlanAction) -> Result<Vec<Location>, SimError> {
        let eff = action.effectiveness();
        if !(eff > 0.0 && eff <= 1.0) {
            return Err(SimError::InvalidAction {
                at: at.to_string(),
                reason: format!("effectiveness {eff} outside (0, 1]"),
            });
        }
        let assembly = self
            .assemblies
            .get(&action.target_assembly)
            .ok_or_else(|| SimError::UnknownAssembly {
                at: at.to_string(),
                id: action.target_assembly.clone(),
            })?;
        if assembly.is_empty() {
            self.warnings.push(format!(
                "{at}: test '{}' targets empty assembly '{}'; no effect",
                action.id, action.target_assembly
            ));
            return Ok(Vec::new());
        }
        let eff = S::from_real(eff);
        let mut reduced = Vec::new();
        for (loc, h) in self.hyps.iter_mut() {
            if h.is_open() && assembly.contains(loc) {
                h.apply_test(eff);
                reduced.push(loc.clone());
            }
        }
        Ok(reduced)
    }
}

/// Replay `plan` against `model`, producing the per-tick risk profile, the
/// KPIs and the event log.
pub fn simulate<S: Scalar>(
    model: &ProductModel,
    plan: &IntegrationPlan,
) -> Result<Simulation<S>, SimError> {
    if plan.cycles.is_empty() {
        return Err(SimError::EmptyPlan);
    }
    let mut replay = Replay::<S> {
        model,
        hyps: BTreeMap::new(),
        assemblies: BTreeMap::new(),
        owner: BTreeMap::new(),
        available: BTreeSet::new(),
        tick: 0,
        samples: Vec::new(),
        events: Vec::new(),
        warnings: Vec::new(),
    };
    let mut cycle_kpis = Vec::with_capacity(plan.cycles.len());
    let mut costs: Vec<S> = Vec::new();
    for (ci, cycle) in plan.cycles.iter().enumerate() {
        replay.availability(ci, cycle)?;
        for (ai, action) in cycle.actions.iter().enumerate() {
            let at = format!("cycles[{ci}].actions[{ai}]");
            replay.action(&at, cycle, action)?;
            costs.push(S::from_real(action.cost));
        }
        let so_far = RiskProfile {
            samples: replay.samples.clone(),
        };
        cycle_kpis.push((
            cycle.label.clone(),
            kpis_with_cost(&so_far, costs.iter().copied()),
        ));
    }
    let profile = RiskProfile {
        samples: replay.samples,
    };
    let kpis = kpis_with_cost(&profile, costs.into_iter());
    let open_at_end = replay.hyps.into_values().filter(|h| h.is_open()).collect();
    Ok(Simulation {
        profile,
        kpis,
        cycle_kpis,
        events: replay.events,
        warnings: replay.warnings,
        open_at_end,
    })
}

/// The single-cycle conventional MDS plan: all six modules available up
/// front, four integrate/test pairs growing one assembly.
pub fn scheme_one_plan() -> IntegrationPlan {
    IntegrationPlan {
        label: Some("scheme1".into()),
        cycles: vec![DesignCycle {
            label: "k1".into(),
            available_modules: ["DAQ2", "FFT", "CFAR2", "PDP2", "DSP2", "DSP4"]
                .map(String::from)
                .to_vec(),
            carried_assemblies: vec![],
            actions: vec![
                PlanAction::integrate("I1", "A1", &["DAQ2", "DSP2"], &[("DAQ2", "DSP2")]),
                PlanAction::test("T1", "A1"),
                PlanAction::integrate("I2", "A1", &["FFT"], &[("FFT", "DSP2")]),
                PlanAction::test("T2", "A1"),
                PlanAction::integrate("I3", "A1", &["CFAR2", "DSP4"], &[("CFAR2", "DSP4")]),
                PlanAction::test("T3", "A1"),
                PlanAction::integrate("I4", "A1", &["PDP2"], &[("PDP2", "DSP4")]),
                PlanAction::test("T4", "A1"),
            ],
        }],
    }
}

/// The two-cycle adaptive MDS plan: the acquisition/FFT path on the first
/// board, then the CFAR/PDP path on the second board onto the carried
/// assembly.
pub fn scheme_two_plan() -> IntegrationPlan {
    IntegrationPlan {
        label: Some("scheme2".into()),
        cycles: vec![
            DesignCycle {
                label: "k1".into(),
                available_modules: ["DAQ2", "FFT", "DSP2"].map(String::from).to_vec(),
                carried_assemblies: vec![],
                actions: vec![
                    PlanAction::integrate("I1", "A1", &["DAQ2", "DSP2"], &[("DAQ2", "DSP2")]),
                    PlanAction::test("T1", "A1"),
                    PlanAction::integrate("I2", "A1", &["FFT"], &[("FFT", "DSP2")]),
                    PlanAction::test("T2", "A1"),
                ],
            },
            DesignCycle {
                label: "k2".into(),
                available_modules: ["CFAR2", "PDP2", "DSP4"].map(String::from).to_vec(),
                carried_assemblies: vec!["A1".into()],
                actions: vec![
                    PlanAction::integrate("I3", "A1", &["CFAR2", "DSP4"], &[("CFAR2", "DSP4")]),
                    PlanAction::test("T3", "A1"),
                    PlanAction::integrate("I4", "A1", &["PDP2"], &[("PDP2", "DSP4")]),
                    PlanAction::test("T4", "A1"),
                ],
            },
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Exact;

    fn values(sim: &Simulation<f64>) -> Vec<f64> {
        sim.profile.values()
    }

    #[test]
    fn scheme_one_profile() {
        let sim = simulate::<f64>(&ProductModel::mds(), &scheme_one_plan()).unwrap();
        assert_eq!(values(&sim), vec![6., 7., 4., 5., 3., 4., 1., 2., 0.]);
        assert_eq!(sim.kpis.phi, 9);
        assert_eq!(sim.kpis.max_risk, 7.0);
        assert_eq!(sim.kpis.remaining_risk, 0.0);
        assert_eq!(sim.kpis.cost, 8.0);
        assert_eq!(sim.kpis.total_risk_area, 32.0);
        assert!(sim.warnings.is_empty());
        assert!(sim.open_at_end.is_empty());
    }

    #[test]
    fn scheme_two_profile_and_checkpoints() {
        let sim = simulate::<f64>(&ProductModel::mds(), &scheme_two_plan()).unwrap();
        assert_eq!(values(&sim), vec![3., 4., 1., 2., 0., 4., 5., 1., 2., 0.]);
        assert_eq!(sim.profile.at(3), Some(1.0));
        assert_eq!(sim.profile.at(5), Some(0.0));
        let t3 = sim
            .events
            .iter()
            .find(|e| e.action.as_deref() == Some("T3"))
            .unwrap();
        assert_eq!(t3.risk_after, 1.0);
        assert_eq!(sim.kpis.phi, 10);
        assert_eq!(sim.kpis.total_risk_area, 22.0);
        assert_eq!(sim.kpis.average_risk, 2.2);
    }

    #[test]
    fn cycle_kpis_accumulate() {
        let sim = simulate::<Exact>(&ProductModel::mds(), &scheme_two_plan()).unwrap();
        let (label, first) = &sim.cycle_kpis[0];
        assert_eq!(label, "k1");
        assert_eq!(first.phi, 5);
        assert_eq!(first.total_risk_area, Exact::from_integer(10));
        let (_, second) = &sim.cycle_kpis[1];
        assert_eq!(second, &sim.kpis);
        assert_eq!(second.phi, first.phi + 5);
        assert_eq!(sim.kpis.average_risk, Exact::new(11, 5));
    }

    #[test]
    fn exact_average_times_duration_is_area() {
        let sim = simulate::<Exact>(&ProductModel::mds(), &scheme_one_plan()).unwrap();
        assert_eq!(sim.kpis.average_risk, Exact::new(32, 9));
        assert_eq!(
            sim.kpis.average_risk * Exact::from_integer(9),
            sim.kpis.total_risk_area
        );
    }

    #[test]
    fn empty_plan_is_rejected() {
        let err = simulate::<f64>(&ProductModel::mds(), &IntegrationPlan::default()).unwrap_err();
        assert_eq!(err, SimError::EmptyPlan);
    }

    #[test]
    fn all_zero_profile_kpis() {
        let profile = RiskProfile::from_values([0.0f64; 5]);
        let k = kpis(&profile, &IntegrationPlan::default());
        assert_eq!(k.phi, 5);
        assert_eq!(k.total_risk_area, 0.0);
        assert_eq!(k.average_risk, 0.0);
    }

    #[test]
    fn kpis_from_profile_match_simulation() {
        let plan = scheme_one_plan();
        let sim = simulate::<f64>(&ProductModel::mds(), &plan).unwrap();
        assert_eq!(kpis(&sim.profile, &plan), sim.kpis);
    }

    #[test]
    fn unknown_module_names_the_id() {
        let mut plan = scheme_one_plan();
        plan.cycles[0].actions[2].added_modules = vec!["FFTX".into()];
        let err = simulate::<f64>(&ProductModel::mds(), &plan).unwrap_err();
        assert!(matches!(&err, SimError::UnknownModule { id, .. } if id == "FFTX"));
        assert!(err.to_string().contains("FFTX"));
    }

    #[test]
    fn test_on_unknown_assembly_is_reference_error() {
        let mut plan = scheme_one_plan();
        plan.cycles[0].actions[1].target_assembly = "B".into();
        let err = simulate::<f64>(&ProductModel::mds(), &plan).unwrap_err();
        assert!(matches!(err, SimError::UnknownAssembly { .. }));
    }

    #[test]
    fn carrying_unknown_assembly_fails() {
        let mut plan = scheme_two_plan();
        plan.cycles[1].carried_assemblies = vec!["Z".into()];
        let err = simulate::<f64>(&ProductModel::mds(), &plan).unwrap_err();
        assert!(matches!(err, SimError::UnknownAssembly { id, .. } if id == "Z"));
    }

    #[test]
    fn duration_stretches_profile_without_changing_values() {
        let mut plan = scheme_one_plan();
        plan.cycles[0].actions[0].duration = 3;
        let sim = simulate::<f64>(&ProductModel::mds(), &plan).unwrap();
        assert_eq!(
            values(&sim),
            vec![6., 6., 6., 7., 4., 5., 3., 4., 1., 2., 0.]
        );
    }

    #[test]
    fn duplicate_test_leaves_later_risk_unchanged() {
        let mut plan = scheme_one_plan();
        let dup = plan.cycles[0].actions[1].clone();
        plan.cycles[0].actions.insert(2, dup);
        let sim = simulate::<f64>(&ProductModel::mds(), &plan).unwrap();
        assert_eq!(values(&sim), vec![6., 7., 4., 4., 5., 3., 4., 1., 2., 0.]);
        assert_eq!(sim.kpis.cost, 9.0);
    }

    #[test]
    fn partial_test_leaves_scaled_risk() {
        let mut plan = scheme_one_plan();
        plan.cycles[0].actions[1].effectiveness = Some(0.5);
        let sim = simulate::<Exact>(&ProductModel::mds(), &plan).unwrap();
        // DAQ2, DSP2 and their interface halve: 7 -> 4 + 3/2
        assert_eq!(sim.profile.at(3), Some(Exact::new(11, 2)));
    }

    #[test]
    fn interface_outside_assembly_is_rejected() {
        let mut plan = scheme_one_plan();
        plan.cycles[0].actions[0].introduced_interfaces = vec![InterfacePair::new("DAQ2", "FFT")];
        let err = simulate::<f64>(&ProductModel::mds(), &plan).unwrap_err();
        assert!(matches!(err, SimError::InterfaceOutsideAssembly { .. }));
    }

    #[test]
    fn merge_folds_assemblies() {
        let model = ProductModel::mds();
        let plan = IntegrationPlan {
            label: None,
            cycles: vec![DesignCycle {
                label: "k1".into(),
                available_modules: model.modules.iter().map(|m| m.id.clone()).collect(),
                carried_assemblies: vec![],
                actions: vec![
                    PlanAction::integrate("I1", "A", &["DAQ2", "DSP2"], &[("DAQ2", "DSP2")]),
                    PlanAction::integrate("I2", "B", &["CFAR2", "DSP4"], &[("CFAR2", "DSP4")]),
                    PlanAction {
                        merge: vec!["B".into()],
                        ..PlanAction::integrate(
                            "I3",
                            "A",
                            &["FFT"],
                            &[("FFT", "DSP2"), ("FFT", "B")],
                        )
                    },
                    PlanAction::test("T1", "A"),
                ],
            }],
        };
        let sim = simulate::<f64>(&model, &plan).unwrap();
        // 6, +1, +1, +2, then only PDP2 stays open
        assert_eq!(values(&sim), vec![6., 7., 8., 10., 1.]);
    }

    #[test]
    fn event_log_records_openings() {
        let sim = simulate::<f64>(&ProductModel::mds(), &scheme_two_plan()).unwrap();
        let avail2 = &sim.events[5];
        assert_eq!(avail2.kind, EventKind::Availability);
        assert_eq!(avail2.tick, 6);
        assert!(avail2.opened.contains(&Location::Residual {
            assembly: "A1".into(),
            cycle: 1
        }));
        assert_eq!(sim.events.len(), 10);
    }

    #[test]
    fn csv_has_six_decimals() {
        let sim = simulate::<f64>(&ProductModel::mds(), &scheme_one_plan()).unwrap();
        let csv = sim.profile.to_csv();
        assert!(csv.starts_with("tick,risk\n1,6.000000\n2,7.000000\n"));
        assert!(csv.ends_with("9,0.000000\n"));
    }

    #[test]
    fn plan_json_round_trips() {
        let plan = scheme_two_plan();
        let back = IntegrationPlan::from_json(&plan.to_json_pretty()).unwrap();
        assert_eq!(back, plan);
    }

    #[test]
    fn plan_json_defaults() {
        let plan = IntegrationPlan::from_json(
            r#"{"cycles":[{"label":"k1","available":["A","B"],"actions":[
                {"type":"integrate","id":"I1","assembly":"X","add":["A","B"],"interfaces":[["A","B"]]},
                {"type":"test","id":"T1","assembly":"X"}]}]}"#,
        )
        .unwrap();
        let a = &plan.cycles[0].actions[0];
        assert_eq!((a.duration, a.cost), (1, 1.0));
        assert_eq!(plan.cycles[0].actions[1].effectiveness(), 1.0);
    }
}
