//! Set-cover and set-arithmetic oracles plus random test registries.

use std::collections::{BTreeMap, BTreeSet};

use itrisk::testset::{TestCase, TestSetRegistry};
use rand::seq::SliceRandom;
use rand::Rng;

/// Size of the smallest sub-family covering `need`, by trying every subset.
pub fn optimum_cover_size(need: &BTreeSet<String>, sets: &[BTreeSet<String>]) -> Option<usize> {
    assert!(
        sets.len() <= 20,
        "exhaustive cover oracle is for small instances"
    );
    let mut best: Option<usize> = None;
    for mask in 0u32..1 << sets.len() {
        let size = mask.count_ones() as usize;
        if best.is_some_and(|b| size >= b) {
            continue;
        }
        let mut got = BTreeSet::new();
        for (i, s) in sets.iter().enumerate() {
            if mask >> i & 1 == 1 {
                got.extend(s.iter().cloned());
            }
        }
        if need.is_subset(&got) {
            best = Some(size);
        }
    }
    best
}

/// Cases visible at `version` (introduced at or before it).
pub fn visible<'a>(reg: &'a TestSetRegistry, version: &str) -> Vec<&'a TestCase> {
    let pos = |v: &str| reg.versions.iter().position(|x| x == v).unwrap();
    reg.cases
        .iter()
        .filter(|c| pos(&c.introduced_in) <= pos(version))
        .collect()
}

/// Naive reuse computation: loops and explicit membership tests only.
pub fn naive_reuse(
    reg: &TestSetRegistry,
    from: &str,
    to: &str,
) -> (BTreeSet<String>, BTreeSet<String>) {
    let target: Vec<String> = reg
        .requirements
        .get(to)
        .map(|s| s.iter().cloned().collect())
        .unwrap_or_default();
    let cases = visible(reg, from);
    let mut reusable = BTreeSet::new();
    for c in &cases {
        let mut fits = true;
        for t in &c.tags {
            if !target.iter().any(|x| x == t) {
                fits = false;
            }
        }
        if fits {
            reusable.insert(c.id.clone());
        }
    }
    let mut uncovered = BTreeSet::new();
    for t in &target {
        if !cases.iter().any(|c| c.tags.iter().any(|x| x == t)) {
            uncovered.insert(t.clone());
        }
    }
    (reusable, uncovered)
}

/// Random registry with `versions` versions, growing requirement sets drawn
/// from `tags` tags, and `cases` cases. Every tag a case carries is required
/// somewhere.
pub fn random_registry<R: Rng>(
    rng: &mut R,
    versions: usize,
    tags: usize,
    cases: usize,
) -> TestSetRegistry {
    let names: Vec<String> = (0..versions).map(|i| format!("v{}", i + 1)).collect();
    let pool: Vec<String> = (0..tags).map(|i| format!("t{i:02}")).collect();
    let mut requirements = BTreeMap::new();
    let mut current: BTreeSet<String> = BTreeSet::new();
    for v in &names {
        for t in &pool {
            if rng.gen_bool(0.5) {
                current.insert(t.clone());
            }
        }
        if current.is_empty() {
            current.insert(pool.choose(rng).unwrap().clone());
        }
        if rng.gen_bool(0.2) && current.len() > 1 {
            let drop = current.iter().next().unwrap().clone();
            current.remove(&drop);
        }
        requirements.insert(v.clone(), current.clone());
    }
    let required: Vec<String> = requirements
        .values()
        .flatten()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let cases = (0..cases)
        .map(|i| {
            let k = rng.gen_range(1..=3.min(required.len()));
            let tags: BTreeSet<String> = required.choose_multiple(rng, k).cloned().collect();
            TestCase {
                id: format!("TC{i:02}"),
                tags,
                introduced_in: names.choose(rng).unwrap().clone(),
            }
        })
        .collect();
    TestSetRegistry {
        versions: names,
        requirements,
        cases,
    }
}
