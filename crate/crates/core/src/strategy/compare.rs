use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::model::ProductModel;
use crate::riskengine::{simulate, IntegrationPlan, KpiReport};
use crate::scalar::Scalar;

use super::{validate_plan, ObjectiveKind, StrategyError, StrategyObjective};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanKpis<S> {
    pub label: String,
    pub kpis: KpiReport<S>,
}

/// Field-wise `plan − baseline`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KpiDelta<S> {
    pub label: String,
    pub phi: i64,
    pub cost: S,
    pub total_risk_area: S,
    pub average_risk: S,
    pub max_risk: S,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport<S> {
    /// Sorted by label.
    pub plans: Vec<PlanKpis<S>>,
    /// Label of the first plan; deltas are taken against it.
    pub baseline: String,
    pub deltas: Vec<KpiDelta<S>>,
    /// Winning label per objective name.
    pub winners: BTreeMap<String, String>,
}

impl<S: Scalar> ComparisonReport<S> {
    /// Lowest objective value; ties go to the earliest label.
    pub fn winner_for(&self, objective: &StrategyObjective) -> &str {
        let mut best = &self.plans[0];
        for p in &self.plans[1..] {
            if objective
                .evaluate(&p.kpis)
                .partial_cmp(&objective.evaluate(&best.kpis))
                == Some(Ordering::Less)
            {
                best = p;
            }
        }
        &best.label
    }

    pub fn get(&self, label: &str) -> Option<&KpiReport<S>> {
        self.plans
            .iter()
            .find(|p| p.label == label)
            .map(|p| &p.kpis)
    }
}

pub(crate) fn delta<S: Scalar>(
    label: &str,
    base: &KpiReport<S>,
    other: &KpiReport<S>,
) -> KpiDelta<S> {
    KpiDelta {
        label: label.to_string(),
        phi: other.phi as i64 - base.phi as i64,
        cost: other.cost - base.cost,
        total_risk_area: other.total_risk_area - base.total_risk_area,
        average_risk: other.average_risk - base.average_risk,
        max_risk: other.max_risk - base.max_risk,
    }
}

/// KPI table, deltas against the first label, and the winner for each base
/// objective plus any `extra` objectives. Plans without a label are named
/// `plan1`, `plan2`, … by position.
pub fn compare<S: Scalar>(
    model: &ProductModel,
    plans: &[IntegrationPlan],
    extra: &[StrategyObjective],
) -> Result<ComparisonReport<S>, StrategyError> {
    if plans.len() < 2 {
        return Err(StrategyError::TooFewPlans(plans.len()));
    }
    for o in extra {
        o.check()?;
    }
    let mut labelled: Vec<(String, &IntegrationPlan)> = plans
        .iter()
        .enumerate()
        .map(|(i, p)| {
            (
                p.label.clone().unwrap_or_else(|| format!("plan{}", i + 1)),
                p,
            )
        })
        .collect();
    let mut seen = BTreeSet::new();
    for (label, _) in &labelled {
        if !seen.insert(label.clone()) {
            return Err(StrategyError::DuplicateLabel(label.clone()));
        }
    }
    labelled.sort_by(|a, b| a.0.cmp(&b.0));

    let mut rows = Vec::with_capacity(labelled.len());
    for (label, plan) in &labelled {
        let report = validate_plan(model, plan);
        if report.has_errors() {
            return Err(StrategyError::InvalidPlan {
                label: label.clone(),
                report,
            });
        }
        let sim = simulate::<S>(model, plan)?;
        rows.push(PlanKpis {
            label: label.clone(),
            kpis: sim.kpis,
        });
    }
    let base = rows[0].kpis.clone();
    let deltas = rows[1..]
        .iter()
        .map(|r| delta(&r.label, &base, &r.kpis))
        .collect();
    let mut report = ComparisonReport {
        baseline: rows[0].label.clone(),
        plans: rows,
        deltas,
        winners: BTreeMap::new(),
    };
    let objectives: Vec<StrategyObjective> = ObjectiveKind::BASE
        .iter()
        .map(|k| StrategyObjective::new(*k))
        .chain(extra.iter().cloned())
        .collect();
    for o in objectives {
        let w = report.winner_for(&o).to_string();
        report.winners.insert(o.to_string(), w);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riskengine::{scheme_one_plan, scheme_two_plan};

    #[test]
    fn adaptive_wins_risk_conventional_wins_duration() {
        let model = ProductModel::mds();
        let r = compare::<f64>(&model, &[scheme_two_plan(), scheme_one_plan()], &[]).unwrap();
        assert_eq!(r.baseline, "scheme1");
        assert_eq!(r.winners["average_risk"], "scheme2");
        assert_eq!(r.winners["max_risk"], "scheme2");
        assert_eq!(r.winners["duration"], "scheme1");
        let d = &r.deltas[0];
        assert_eq!(d.label, "scheme2");
        assert_eq!(d.phi, 1);
        assert_eq!(d.max_risk, -2.0);
        assert_eq!(d.total_risk_area, -10.0);
        assert_eq!(d.cost, 0.0);
    }

    #[test]
    fn identical_plans_tie_to_first_label() {
        let model = ProductModel::mds();
        let a = scheme_one_plan().with_label("b-copy");
        let b = scheme_one_plan().with_label("a-copy");
        let r = compare::<f64>(&model, &[a, b], &[]).unwrap();
        assert!(r.winners.values().all(|w| w == "a-copy"));
        let d = &r.deltas[0];
        assert_eq!(
            (d.phi, d.cost, d.max_risk, d.average_risk),
            (0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn needs_two_plans() {
        let err = compare::<f64>(&ProductModel::mds(), &[scheme_one_plan()], &[]).unwrap_err();
        assert_eq!(err, StrategyError::TooFewPlans(1));
    }

    #[test]
    fn duplicate_labels_rejected() {
        let err = compare::<f64>(
            &ProductModel::mds(),
            &[scheme_one_plan(), scheme_one_plan()],
            &[],
        )
        .unwrap_err();
        assert_eq!(err, StrategyError::DuplicateLabel("scheme1".into()));
    }

    #[test]
    fn weighted_extra_objective_gets_a_winner() {
        let o = StrategyObjective::weighted([(ObjectiveKind::Duration, 1.0)]);
        let r = compare::<f64>(
            &ProductModel::mds(),
            &[scheme_one_plan(), scheme_two_plan()],
            std::slice::from_ref(&o),
        )
        .unwrap();
        assert_eq!(r.winners[&o.to_string()], "scheme1");
    }

    #[test]
    fn invalid_plan_is_refused() {
        let mut bad = scheme_two_plan();
        bad.cycles[0].actions[0].added_modules.push("GHOST".into());
        let err = compare::<f64>(&ProductModel::mds(), &[scheme_one_plan(), bad], &[]).unwrap_err();
        assert!(matches!(err, StrategyError::InvalidPlan { ref label, .. } if label == "scheme2"));
    }
}
