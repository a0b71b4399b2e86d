use itrisk::strategy::{
    optimize, validate_plan, ObjectiveKind, SearchMode, StrategyError, StrategyObjective,
};
use itrisk::{simulate, ProductModel};
use itrisk_testkit::corpus;
use itrisk_testkit::enumerate::{enumerate, Goal};

fn goal(kind: ObjectiveKind) -> Goal {
    match kind {
        ObjectiveKind::AverageRisk => Goal::AverageRisk,
        ObjectiveKind::MaxRisk => Goal::MaxRisk,
        ObjectiveKind::Duration => Goal::Duration,
        ObjectiveKind::Weighted => unreachable!(),
    }
}

fn small_models() -> Vec<ProductModel> {
    corpus::models(0x0071_3135, 40, 2..=5)
}

#[test]
fn exhaustive_matches_independent_enumeration() {
    let mut solved = 0;
    for (i, model) in small_models().iter().enumerate() {
        let max_cycles = if model.modules.len() <= 4 { 3 } else { 2 };
        for kind in ObjectiveKind::BASE {
            let oracle = enumerate(model, max_cycles, goal(kind));
            let got = optimize::<f64>(
                model,
                &StrategyObjective::new(kind),
                max_cycles,
                SearchMode::Exhaustive,
            );
            match (oracle.best, got) {
                (Some(best), Ok(out)) => {
                    solved += 1;
                    assert_eq!(out.best.score, best, "model {i} {kind:?}");
                    assert_eq!(out.explored, oracle.leaves, "model {i} {kind:?}");
                    let sim = simulate::<f64>(model, &out.best.plan).unwrap();
                    assert_eq!(sim.kpis, out.best.kpis);
                    assert!(!validate_plan(model, &out.best.plan).has_errors());
                }
                (None, Err(StrategyError::NoFeasiblePlan)) => {}
                (o, g) => panic!("model {i} {kind:?}: oracle {o:?} vs optimizer {g:?}"),
            }
        }
    }
    assert!(solved >= 60, "only {solved} solvable instances");
}

#[test]
fn greedy_is_never_better_than_exhaustive() {
    for (i, model) in small_models().iter().enumerate() {
        for kind in ObjectiveKind::BASE {
            let obj = StrategyObjective::new(kind);
            let (Ok(ex), Ok(gr)) = (
                optimize::<f64>(model, &obj, 2, SearchMode::Exhaustive),
                optimize::<f64>(model, &obj, 2, SearchMode::Greedy),
            ) else {
                continue;
            };
            assert!(gr.best.score >= ex.best.score, "model {i} {kind:?}");
            assert!(
                !validate_plan(model, &gr.best.plan).has_errors(),
                "model {i}"
            );
        }
    }
}

#[test]
fn leaderboard_is_sorted_and_distinct() {
    let model = ProductModel::mds();
    let out = optimize::<f64>(
        &model,
        &StrategyObjective::new(ObjectiveKind::AverageRisk),
        2,
        SearchMode::Exhaustive,
    )
    .unwrap();
    let scores: Vec<f64> = out.leaderboard.iter().map(|c| c.score).collect();
    assert!(scores.windows(2).all(|w| w[0] <= w[1]));
    let keys: std::collections::BTreeSet<&String> =
        out.leaderboard.iter().map(|c| &c.key).collect();
    assert_eq!(keys.len(), out.leaderboard.len());
    assert_eq!(out.leaderboard[0], out.best);
}
