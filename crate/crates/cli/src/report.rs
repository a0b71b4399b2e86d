//! JSON report shapes. Risk figures are rounded to six decimals before
//! they are stored so the text is stable and re-parses to the same value.

use std::collections::BTreeMap;

use itrisk::strategy::{Candidate, ComparisonReport, KpiDelta, OptimizeOutcome};
use itrisk::testset::{CoverReport, ReuseDelta};
use itrisk::{Event, IntegrationPlan, KpiReport, RiskProfile, Simulation};
use serde::{Deserialize, Serialize};

use crate::io::round6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpiRow {
    pub label: String,
    pub phi: u64,
    pub cost: f64,
    pub remaining_risk: f64,
    pub total_risk_area: f64,
    pub average_risk: f64,
    pub max_risk: f64,
}

impl KpiRow {
    pub fn new(label: &str, k: &KpiReport<f64>) -> Self {
        Self {
            label: label.to_string(),
            phi: k.phi,
            cost: round6(k.cost),
            remaining_risk: round6(k.remaining_risk),
            total_risk_area: round6(k.total_risk_area),
            average_risk: round6(k.average_risk),
            max_risk: round6(k.max_risk),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub tick: u64,
    pub risk: f64,
}

pub fn points(p: &RiskProfile<f64>) -> Vec<ProfilePoint> {
    p.samples
        .iter()
        .map(|&(tick, risk)| ProfilePoint {
            tick,
            risk: round6(risk),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRow {
    pub tick: u64,
    pub cycle: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<String>,
    pub opened: Vec<String>,
    pub reduced: Vec<String>,
    pub risk_after: f64,
}

impl From<&Event<f64>> for EventRow {
    fn from(e: &Event<f64>) -> Self {
        let kind = serde_json::to_value(e.kind)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default();
        Self {
            tick: e.tick,
            cycle: e.cycle.clone(),
            kind,
            action: e.action.clone(),
            opened: e.opened.iter().map(|l| l.to_string()).collect(),
            reduced: e.reduced.iter().map(|l| l.to_string()).collect(),
            risk_after: round6(e.risk_after),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub label: String,
    pub kpis: KpiRow,
    /// Cumulative KPIs at the end of each design cycle.
    pub cycles: Vec<KpiRow>,
    pub profile: Vec<ProfilePoint>,
    pub events: Vec<EventRow>,
    pub warnings: Vec<String>,
    pub open_at_end: Vec<String>,
}

impl SimulationReport {
    pub fn new(label: &str, sim: &Simulation<f64>, warnings: Vec<String>) -> Self {
        Self {
            label: label.to_string(),
            kpis: KpiRow::new(label, &sim.kpis),
            cycles: sim
                .cycle_kpis
                .iter()
                .map(|(l, k)| KpiRow::new(l, k))
                .collect(),
            profile: points(&sim.profile),
            events: sim.events.iter().map(EventRow::from).collect(),
            warnings,
            open_at_end: sim
                .open_at_end
                .iter()
                .map(|h| h.location.to_string())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub label: String,
    pub phi: i64,
    pub cost: f64,
    pub total_risk_area: f64,
    pub average_risk: f64,
    pub max_risk: f64,
}

impl From<&KpiDelta<f64>> for DeltaRow {
    fn from(d: &KpiDelta<f64>) -> Self {
        Self {
            label: d.label.clone(),
            phi: d.phi,
            cost: round6(d.cost),
            total_risk_area: round6(d.total_risk_area),
            average_risk: round6(d.average_risk),
            max_risk: round6(d.max_risk),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonJson {
    pub baseline: String,
    pub plans: Vec<KpiRow>,
    pub deltas: Vec<DeltaRow>,
    pub winners: BTreeMap<String, String>,
    pub profiles: BTreeMap<String, Vec<ProfilePoint>>,
}

impl ComparisonJson {
    pub fn new(r: &ComparisonReport<f64>, profiles: &[(String, RiskProfile<f64>)]) -> Self {
        Self {
            baseline: r.baseline.clone(),
            plans: r
                .plans
                .iter()
                .map(|p| KpiRow::new(&p.label, &p.kpis))
                .collect(),
            deltas: r.deltas.iter().map(DeltaRow::from).collect(),
            winners: r.winners.clone(),
            profiles: profiles
                .iter()
                .map(|(l, p)| (l.clone(), points(p)))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRow {
    pub key: String,
    pub score: f64,
    pub kpis: KpiRow,
    pub plan: IntegrationPlan,
}

impl From<&Candidate<f64>> for CandidateRow {
    fn from(c: &Candidate<f64>) -> Self {
        Self {
            key: c.key.clone(),
            score: round6(c.score),
            kpis: KpiRow::new(&c.key, &c.kpis),
            plan: c.plan.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeJson {
    pub mode: String,
    pub objective: String,
    pub max_cycles: usize,
    pub explored: u64,
    pub best: CandidateRow,
    pub leaderboard: Vec<CandidateRow>,
}

impl From<&OptimizeOutcome<f64>> for OptimizeJson {
    fn from(o: &OptimizeOutcome<f64>) -> Self {
        Self {
            mode: o.mode.to_string(),
            objective: o.objective.to_string(),
            max_cycles: o.max_cycles,
            explored: o.explored,
            best: CandidateRow::from(&o.best),
            leaderboard: o.leaderboard.iter().map(CandidateRow::from).collect(),
        }
    }
}

pub type ReuseJson = ReuseDelta;
pub type CoverJson = CoverReport;
