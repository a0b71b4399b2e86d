use itrisk::{simulate, ActionKind, Exact, IntegrationPlan, PlanAction, Scalar};
use itrisk_testkit::{corpus, replay::replay};

const SEED: u64 = 0x5eed_0001;

#[test]
fn engine_matches_naive_replay_on_corpus() {
    let cases = corpus::corpus(SEED, 200, 6);
    let mut multi_assembly = 0;
    let mut merged = 0;
    let mut partial = 0;
    for (i, (model, plan)) in cases.iter().enumerate() {
        let expected =
            replay(model, plan).unwrap_or_else(|| panic!("case {i}: oracle rejects plan"));
        let sim = simulate::<f64>(model, plan).unwrap_or_else(|e| panic!("case {i}: {e}"));
        assert_eq!(sim.profile.values(), expected, "case {i}");
        let ticks: Vec<u64> = sim.profile.samples.iter().map(|s| s.0).collect();
        assert_eq!(
            ticks,
            (1..=expected.len() as u64).collect::<Vec<_>>(),
            "case {i}"
        );

        let acts: Vec<&PlanAction> = plan.actions().collect();
        if acts.iter().any(|a| !a.merge.is_empty()) {
            merged += 1;
        }
        if acts
            .iter()
            .any(|a| a.kind == ActionKind::Test && a.effectiveness() < 1.0)
        {
            partial += 1;
        }
        let targets: std::collections::BTreeSet<&String> =
            acts.iter().map(|a| &a.target_assembly).collect();
        if targets.len() > 1 {
            multi_assembly += 1;
        }
    }
    // the corpus has to exercise the interesting paths
    assert!(merged >= 10, "only {merged} plans merge");
    assert!(partial >= 20, "only {partial} plans use partial tests");
    assert!(
        multi_assembly >= 20,
        "only {multi_assembly} plans use several assemblies"
    );
}

#[test]
fn exact_and_float_agree_on_dyadic_corpus() {
    for (i, (model, plan)) in corpus::corpus(SEED, 200, 6).iter().enumerate() {
        let f = simulate::<f64>(model, plan).unwrap();
        let q = simulate::<Exact>(model, plan).unwrap();
        let back: Vec<f64> = q.profile.values().iter().map(|v| v.to_real()).collect();
        assert_eq!(back, f.profile.values(), "case {i}");
    }
}

#[test]
fn average_times_duration_is_area() {
    for (model, plan) in corpus::corpus(SEED, 200, 6) {
        let k = simulate::<Exact>(&model, &plan).unwrap().kpis;
        assert_eq!(k.average_risk * Exact::from_count(k.phi), k.total_risk_area);
        assert_eq!(k.phi, plan.duration());
    }
}

/// Re-running a fully effective test right after itself changes nothing.
#[test]
fn repeated_full_test_is_idempotent() {
    let mut checked = 0;
    for (i, (model, plan)) in corpus::corpus(SEED, 200, 6).into_iter().enumerate() {
        let mut doubled = plan.clone();
        for cycle in &mut doubled.cycles {
            let mut out = Vec::new();
            for a in cycle.actions.drain(..) {
                let again = (a.kind == ActionKind::Test && a.effectiveness() >= 1.0).then(|| {
                    let mut b = a.clone();
                    b.id.push_str("-again");
                    b.duration = 1;
                    b
                });
                out.push(a);
                if let Some(b) = again {
                    checked += 1;
                    out.push(b);
                }
            }
            cycle.actions = out;
        }
        let once = simulate::<f64>(&model, &plan).unwrap();
        let twice = simulate::<f64>(&model, &doubled).unwrap();
        let mut repeat_ticks = std::collections::BTreeSet::new();
        for pair in twice.events.windows(2) {
            if pair[1]
                .action
                .as_deref()
                .is_some_and(|a| a.ends_with("-again"))
            {
                assert_eq!(
                    pair[1].risk_after, pair[0].risk_after,
                    "case {i}: repeat changed risk"
                );
                repeat_ticks.insert(pair[1].tick);
            }
        }
        let rest: Vec<f64> = twice
            .profile
            .samples
            .iter()
            .filter(|(t, _)| !repeat_ticks.contains(t))
            .map(|s| s.1)
            .collect();
        assert_eq!(rest, once.profile.values(), "case {i}");
    }
    assert!(checked > 100);
}

fn ranked(plans: &[IntegrationPlan], model: &itrisk::ProductModel) -> Vec<(Exact, Exact, usize)> {
    let mut v: Vec<(Exact, Exact, usize)> = plans
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let k = simulate::<Exact>(model, p).unwrap().kpis;
            (k.average_risk, k.max_risk, i)
        })
        .collect();
    v.sort();
    v
}

/// Scaling every impact by c > 0 scales every profile by c, so the argmin
/// over any set of plans is unchanged.
#[test]
fn impact_scaling_preserves_profiles_and_argmin() {
    let cases = corpus::corpus(SEED, 200, 6);
    for (i, (model, plan)) in cases.iter().enumerate() {
        for c in [0.5, 2.0, 8.0] {
            let scaled = model.scale_impacts(c);
            let a = simulate::<Exact>(model, plan).unwrap().profile;
            let b = simulate::<Exact>(&scaled, plan).unwrap().profile;
            assert_eq!(a.scaled(Exact::from_real(c)), b, "case {i} c={c}");
        }
    }
    // argmin over groups of plans sharing a model
    let mut rng = corpus::rng(SEED ^ 7);
    for _ in 0..40 {
        let n = rand::Rng::gen_range(&mut rng, 2..=6);
        let model = corpus::random_model(&mut rng, n);
        let plans: Vec<IntegrationPlan> = (0..5)
            .map(|_| corpus::random_plan(&mut rng, &model))
            .collect();
        let base: Vec<usize> = ranked(&plans, &model).iter().map(|r| r.2).collect();
        for c in [0.25, 4.0] {
            let scaled: Vec<usize> = ranked(&plans, &model.scale_impacts(c))
                .iter()
                .map(|r| r.2)
                .collect();
            assert_eq!(base, scaled);
        }
    }
}
