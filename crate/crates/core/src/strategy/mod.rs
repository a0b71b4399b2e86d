//! Building, validating, comparing and searching over integration plans.
//!
//! Generated plans grow a single assembly chain: every integration step is
//! followed by exactly one test, and each later design cycle carries the
//! assembly built so far.

mod build;
mod compare;
mod optimize;
mod validate;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::riskengine::KpiReport;
use crate::scalar::Scalar;
use crate::validation::ValidationReport;

pub use build::{
    build_adaptive_plan, build_conventional_plan, canonical_order, parse_partition,
    step_interfaces, BuiltPlan, Step, ASSEMBLY_ID,
};
pub use compare::{compare, ComparisonReport, KpiDelta, PlanKpis};
pub use optimize::{optimize, Candidate, OptimizeOutcome, SearchMode, EXHAUSTIVE_MODULE_LIMIT};
pub use validate::validate_plan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    AverageRisk,
    MaxRisk,
    Duration,
    Weighted,
}

impl ObjectiveKind {
    pub const BASE: [ObjectiveKind; 3] = [
        ObjectiveKind::AverageRisk,
        ObjectiveKind::MaxRisk,
        ObjectiveKind::Duration,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ObjectiveKind::AverageRisk => "average_risk",
            ObjectiveKind::MaxRisk => "max_risk",
            ObjectiveKind::Duration => "duration",
            ObjectiveKind::Weighted => "weighted",
        }
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ObjectiveKind {
    type Err = StrategyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "avg-risk" | "average_risk" | "average-risk" => Ok(ObjectiveKind::AverageRisk),
            "max-risk" | "max_risk" => Ok(ObjectiveKind::MaxRisk),
            "duration" => Ok(ObjectiveKind::Duration),
            "weighted" => Ok(ObjectiveKind::Weighted),
            other => Err(StrategyError::InvalidObjective(format!(
                "unknown objective '{other}'"
            ))),
        }
    }
}

/// What a plan search or comparison minimizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyObjective {
    pub kind: ObjectiveKind,
    /// Weights over the base kinds; only read for [`ObjectiveKind::Weighted`].
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub weights: BTreeMap<ObjectiveKind, f64>,
}

impl StrategyObjective {
    pub fn new(kind: ObjectiveKind) -> Self {
        Self {
            kind,
            weights: BTreeMap::new(),
        }
    }

    pub fn weighted(weights: impl IntoIterator<Item = (ObjectiveKind, f64)>) -> Self {
        Self {
            kind: ObjectiveKind::Weighted,
            weights: weights.into_iter().collect(),
        }
    }

    pub fn check(&self) -> Result<(), StrategyError> {
        if self.kind != ObjectiveKind::Weighted {
            return Ok(());
        }
        if self.weights.contains_key(&ObjectiveKind::Weighted) {
            return Err(StrategyError::InvalidObjective(
                "weights may only name base objectives".into(),
            ));
        }
        if self.weights.values().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(StrategyError::InvalidObjective(
                "weights must be finite and nonnegative".into(),
            ));
        }
        if !self.weights.values().any(|w| *w > 0.0) {
            return Err(StrategyError::InvalidObjective(
                "at least one weight must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn evaluate<S: Scalar>(&self, k: &KpiReport<S>) -> S {
        match self.kind {
            ObjectiveKind::AverageRisk => k.average_risk,
            ObjectiveKind::MaxRisk => k.max_risk,
            ObjectiveKind::Duration => S::from_count(k.phi),
            ObjectiveKind::Weighted => self
                .weights
                .iter()
                .filter(|(_, w)| **w > 0.0)
                .fold(S::zero(), |acc, (kind, w)| {
                    acc + S::from_real(*w) * StrategyObjective::new(*kind).evaluate(k)
                }),
        }
    }
}

impl fmt::Display for StrategyObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.kind != ObjectiveKind::Weighted {
            return write!(f, "{}", self.kind);
        }
        let parts: Vec<String> = self
            .weights
            .iter()
            .map(|(k, w)| format!("{k}={w}"))
            .collect();
        write!(f, "weighted({})", parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StrategyError {
    #[error("model is invalid:\n{0}")]
    InvalidModel(ValidationReport),
    #[error("plan '{label}' is invalid:\n{report}")]
    InvalidPlan {
        label: String,
        report: ValidationReport,
    },
    #[error("unknown module '{0}'")]
    UnknownModule(String),
    #[error("module '{0}' appears in more than one partition block")]
    PartitionOverlap(String),
    #[error("partition does not cover modules: {}", .0.join(", "))]
    PartitionIncomplete(Vec<String>),
    #[error("partition block {0} is empty")]
    EmptyBlock(usize),
    #[error("expected {expected} per-cycle orders, got {got}")]
    OrderCount { expected: usize, got: usize },
    #[error("cycle {cycle}: module '{module}' cannot be integrated here ({reason})")]
    StepModule {
        cycle: usize,
        module: String,
        reason: String,
    },
    #[error("cycle {cycle}: precedence {pred} -> {module} violated: '{module}' joins before its data source '{pred}'")]
    Precedence {
        cycle: usize,
        pred: String,
        module: String,
    },
    #[error("cycle {cycle}: step {{{}}} introduces no cataloged interface", .step.join(","))]
    NoInterface { cycle: usize, step: Vec<String> },
    #[error("modules never integrated: {}", .0.join(", "))]
    Uncovered(Vec<String>),
    #[error("no feasible integration step for modules: {}", .0.join(", "))]
    Stuck(Vec<String>),
    #[error("invalid partition syntax: {0}")]
    PartitionSyntax(String),
    #[error("invalid objective: {0}")]
    InvalidObjective(String),
    #[error("need at least two plans to compare, got {0}")]
    TooFewPlans(usize),
    #[error("duplicate plan label '{0}'")]
    DuplicateLabel(String),
    #[error("exhaustive search supports at most {limit} modules, model has {count}; use greedy mode instead")]
    TooManyModules { count: usize, limit: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no feasible plan exists for this model")]
    NoFeasiblePlan,
    #[error("simulation failed: {0}")]
    Simulation(#[from] crate::riskengine::SimError),
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(avg: f64, max: f64, phi: u64) -> KpiReport<f64> {
        KpiReport {
            phi,
            cost: 0.0,
            remaining_risk: 0.0,
            total_risk_area: avg * phi as f64,
            average_risk: avg,
            max_risk: max,
        }
    }

    #[test]
    fn base_objectives_pick_fields() {
        let k = report(2.2, 5.0, 10);
        assert_eq!(
            StrategyObjective::new(ObjectiveKind::AverageRisk).evaluate(&k),
            2.2
        );
        assert_eq!(
            StrategyObjective::new(ObjectiveKind::MaxRisk).evaluate(&k),
            5.0
        );
        assert_eq!(
            StrategyObjective::new(ObjectiveKind::Duration).evaluate(&k),
            10.0
        );
    }

    #[test]
    fn weighted_objective_sums() {
        let k = report(2.0, 5.0, 10);
        let o = StrategyObjective::weighted([
            (ObjectiveKind::AverageRisk, 1.0),
            (ObjectiveKind::Duration, 0.5),
        ]);
        o.check().unwrap();
        assert_eq!(o.evaluate(&k), 7.0);
    }

    #[test]
    fn weights_are_checked() {
        assert!(StrategyObjective::weighted([]).check().is_err());
        assert!(StrategyObjective::weighted([(ObjectiveKind::MaxRisk, 0.0)])
            .check()
            .is_err());
        assert!(
            StrategyObjective::weighted([(ObjectiveKind::MaxRisk, -1.0)])
                .check()
                .is_err()
        );
        assert!(StrategyObjective::new(ObjectiveKind::Duration)
            .check()
            .is_ok());
    }

    #[test]
    fn objective_names_parse() {
        assert_eq!(
            "avg-risk".parse::<ObjectiveKind>().unwrap(),
            ObjectiveKind::AverageRisk
        );
        assert_eq!(
            "max-risk".parse::<ObjectiveKind>().unwrap(),
            ObjectiveKind::MaxRisk
        );
        assert_eq!(
            "duration".parse::<ObjectiveKind>().unwrap(),
            ObjectiveKind::Duration
        );
        assert!("speed".parse::<ObjectiveKind>().is_err());
    }
}
