//! Seeded random models and plans. All weights are dyadic so f64 sums are
//! exact and results can be compared with `==`.

use std::collections::BTreeSet;

use itrisk::{
    DesignCycle, IntegrationPlan, InterfaceDef, InterfacePair, ModuleDef, PlanAction, ProductModel,
    ResidualDef,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const PROBABILITIES: [f64; 4] = [0.25, 0.5, 0.75, 1.0];
pub const IMPACTS: [f64; 4] = [0.5, 1.0, 2.0, 4.0];
pub const EFFECTIVENESS: [f64; 3] = [0.5, 0.75, 1.0];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn pick<R: Rng>(rng: &mut R, xs: &[f64]) -> f64 {
    *xs.choose(rng).unwrap()
}

/// `n` modules `M1..Mn`, a random spanning tree of interfaces plus extras,
/// and a sparse precedence DAG that only points from lower to higher index.
pub fn random_model<R: Rng>(rng: &mut R, n: usize) -> ProductModel {
    let ids: Vec<String> = (1..=n).map(|i| format!("M{i}")).collect();
    let modules = ids
        .iter()
        .map(|id| {
            ModuleDef::new(id.clone()).with_risk(pick(rng, &PROBABILITIES), pick(rng, &IMPACTS))
        })
        .collect();
    let mut pairs = BTreeSet::new();
    for j in 1..n {
        let i = rng.gen_range(0..j);
        pairs.insert((i, j));
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.2) {
                pairs.insert((i, j));
            }
        }
    }
    let interfaces = pairs
        .iter()
        .map(|&(i, j)| {
            let mut d = InterfaceDef::new(ids[i].clone(), ids[j].clone());
            d.fault_probability = pick(rng, &PROBABILITIES);
            d.fault_impact = pick(rng, &IMPACTS);
            d
        })
        .collect();
    let mut precedence = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.15) {
                precedence.push((ids[i].clone(), ids[j].clone()));
            }
        }
    }
    ProductModel {
        modules,
        interfaces,
        precedence,
        residual: ResidualDef {
            fault_probability: pick(rng, &PROBABILITIES),
            fault_impact: pick(rng, &IMPACTS),
        },
    }
}

struct Asm {
    id: String,
    names: BTreeSet<String>,
}

/// A replayable plan exercising several assemblies, merges, multi-tick
/// actions, partial tests and uncataloged interfaces. Precedence is not
/// respected on purpose; the replay does not enforce it.
pub fn random_plan<R: Rng>(rng: &mut R, model: &ProductModel) -> IntegrationPlan {
    let mut ids: Vec<String> = model.modules.iter().map(|m| m.id.clone()).collect();
    ids.shuffle(rng);
    let n_cycles = rng.gen_range(1..=ids.len().min(3));
    let mut cuts: Vec<usize> = (1..ids.len()).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(n_cycles - 1).collect();
    cuts.sort_unstable();
    cuts.push(ids.len());

    let mut assemblies: Vec<Asm> = Vec::new();
    let mut introduced: BTreeSet<InterfacePair> = BTreeSet::new();
    let mut pool: Vec<String> = Vec::new();
    let mut cycles = Vec::new();
    let mut next_asm = 1;
    let mut next_action = 1;
    let mut start = 0;

    for (ci, &end) in cuts.iter().enumerate() {
        let mut block = ids[start..end].to_vec();
        start = end;
        pool.append(&mut block.clone());
        block.sort();
        let carry: Vec<String> = assemblies.iter().map(|a| a.id.clone()).collect();
        let mut actions = Vec::new();
        let steps = rng.gen_range(1..=5);
        for _ in 0..steps {
            let mut action = match rng.gen_range(0..10) {
                0..=5 if !pool.is_empty() => {
                    let take = rng.gen_range(1..=pool.len().min(2));
                    pool.shuffle(rng);
                    let added: Vec<String> = pool.drain(..take).collect();
                    let idx = if assemblies.is_empty() || rng.gen_bool(0.3) {
                        assemblies.push(Asm {
                            id: format!("A{next_asm}"),
                            names: BTreeSet::from([format!("A{next_asm}")]),
                        });
                        next_asm += 1;
                        assemblies.len() - 1
                    } else {
                        rng.gen_range(0..assemblies.len())
                    };
                    let asm = &mut assemblies[idx];
                    let fresh: BTreeSet<String> = added.iter().cloned().collect();
                    asm.names.extend(fresh.iter().cloned());
                    let mut faces = crossing(model, &asm.names, &fresh, &introduced);
                    if rng.gen_bool(0.15) {
                        let old: Vec<&String> =
                            asm.names.iter().filter(|n| !fresh.contains(*n)).collect();
                        let a = &added[0];
                        if let Some(b) = old.choose(rng) {
                            let p = InterfacePair::new(a, b);
                            if !introduced.contains(&p) && !faces.contains(&p) {
                                faces.push(p);
                            }
                        }
                    }
                    introduced.extend(faces.iter().cloned());
                    let mut act =
                        PlanAction::integrate(format!("I{next_action}"), asm.id.clone(), &[], &[]);
                    act.added_modules = added;
                    act.introduced_interfaces = faces;
                    act
                }
                6..=7 if assemblies.len() >= 2 => {
                    assemblies.shuffle(rng);
                    let other = assemblies.pop().unwrap();
                    let asm = assemblies.last_mut().unwrap();
                    let other_names = other.names.clone();
                    asm.names.extend(other.names);
                    let faces = crossing(model, &asm.names, &other_names, &introduced);
                    introduced.extend(faces.iter().cloned());
                    let mut act =
                        PlanAction::integrate(format!("I{next_action}"), asm.id.clone(), &[], &[]);
                    act.merge = vec![other.id];
                    act.introduced_interfaces = faces;
                    act
                }
                _ if !assemblies.is_empty() => {
                    let asm = assemblies.choose(rng).unwrap();
                    let mut act = PlanAction::test(format!("T{next_action}"), asm.id.clone());
                    if rng.gen_bool(0.4) {
                        act.effectiveness = Some(pick(rng, &EFFECTIVENESS));
                    }
                    act
                }
                _ => continue,
            };
            next_action += 1;
            action.duration = if rng.gen_bool(0.25) {
                rng.gen_range(2..=3)
            } else {
                1
            };
            action.cost = pick(rng, &[0.5, 1.0, 2.0]);
            actions.push(action);
        }
        if rng.gen_bool(0.5) {
            for asm in &assemblies {
                actions.push(PlanAction::test(format!("T{next_action}"), asm.id.clone()));
                next_action += 1;
            }
        }
        cycles.push(DesignCycle {
            label: format!("k{}", ci + 1),
            available_modules: block,
            carried_assemblies: carry,
            actions,
        });
    }
    IntegrationPlan {
        label: None,
        cycles,
    }
}

/// Cataloged interfaces with both ends in `names`, one end in `fresh`, not yet used.
fn crossing(
    model: &ProductModel,
    names: &BTreeSet<String>,
    fresh: &BTreeSet<String>,
    used: &BTreeSet<InterfacePair>,
) -> Vec<InterfacePair> {
    model
        .interfaces
        .iter()
        .filter(|i| names.contains(&i.endpoint_a) && names.contains(&i.endpoint_b))
        .filter(|i| fresh.contains(&i.endpoint_a) || fresh.contains(&i.endpoint_b))
        .map(|i| i.pair())
        .filter(|p| !used.contains(p))
        .collect()
}

/// `count` model/plan pairs with 1..=`max_modules` modules.
pub fn corpus(seed: u64, count: usize, max_modules: usize) -> Vec<(ProductModel, IntegrationPlan)> {
    let mut rng = rng(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(1..=max_modules);
            let model = random_model(&mut rng, n);
            let plan = random_plan(&mut rng, &model);
            (model, plan)
        })
        .collect()
}

/// `count` models only, sizes in `sizes`.
pub fn models(
    seed: u64,
    count: usize,
    sizes: std::ops::RangeInclusive<usize>,
) -> Vec<ProductModel> {
    let mut rng = rng(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(sizes.clone());
            random_model(&mut rng, n)
        })
        .collect()
}
