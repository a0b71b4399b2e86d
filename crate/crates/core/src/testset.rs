//! Versioned, tag-covered test cases: reuse across upgrades and small covers.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest candidate pool for which the greedy cover is checked against an
/// exhaustive minimum-cardinality search.
pub const EXACT_COVER_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub id: String,
    pub tags: BTreeSet<String>,
    pub introduced_in: String,
}

impl TestCase {
    pub fn new(id: &str, tags: &[&str], introduced_in: &str) -> Self {
        Self {
            id: id.into(),
            tags: tags.iter().map(|t| t.to_string()).collect(),
            introduced_in: introduced_in.into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestSetRegistry {
    pub versions: Vec<String>,
    #[serde(default)]
    pub requirements: BTreeMap<String, BTreeSet<String>>,
    #[serde(default)]
    pub cases: Vec<TestCase>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TestSetError {
    #[error("unknown version '{0}'")]
    UnknownVersion(String),
    #[error("version '{from}' does not precede '{to}'")]
    VersionOrder { from: String, to: String },
    #[error("duplicate version '{0}'")]
    DuplicateVersion(String),
    #[error("duplicate test case id '{0}'")]
    DuplicateCase(String),
    #[error("case '{case}' is introduced in unknown version '{version}'")]
    CaseVersion { case: String, version: String },
    #[error("case '{case}' carries tag '{tag}' that no version requires")]
    OrphanTag { case: String, tag: String },
    #[error("requirements given for unknown version '{0}'")]
    RequirementVersion(String),
    #[error("coverage gap at version '{version}': no case covers {}", .missing.iter().cloned().collect::<Vec<_>>().join(", "))]
    CoverageGap {
        version: String,
        missing: BTreeSet<String>,
    },
    #[error("invalid registry JSON: {0}")]
    Json(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReuseDelta {
    pub from: String,
    pub to: String,
    pub reusable: BTreeSet<String>,
    pub uncovered_tags: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Overlap {
    pub a: String,
    pub b: String,
    pub shared: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverReport {
    pub version: String,
    /// Chosen cases in pick order.
    pub cases: Vec<String>,
    /// Plain greedy pick sequence before any exact refinement.
    pub greedy: Vec<String>,
    /// True when the size was confirmed minimal by exhaustive search.
    pub proven_minimal: bool,
    /// Pairs of chosen cases sharing a required tag.
    pub overlaps: Vec<Overlap>,
}

impl TestSetRegistry {
    pub fn from_json(text: &str) -> Result<Self, TestSetError> {
        let reg: Self =
            serde_json::from_str(text).map_err(|e| TestSetError::Json(e.to_string()))?;
        reg.check()?;
        Ok(reg)
    }

    pub fn check(&self) -> Result<(), TestSetError> {
        let mut seen = BTreeSet::new();
        for v in &self.versions {
            if !seen.insert(v) {
                return Err(TestSetError::DuplicateVersion(v.clone()));
            }
        }
        if let Some(v) = self.requirements.keys().find(|v| !seen.contains(v)) {
            return Err(TestSetError::RequirementVersion(v.clone()));
        }
        let required: BTreeSet<&String> = self.requirements.values().flatten().collect();
        let mut ids = BTreeSet::new();
        for c in &self.cases {
            if !ids.insert(&c.id) {
                return Err(TestSetError::DuplicateCase(c.id.clone()));
            }
            if !seen.contains(&c.introduced_in) {
                return Err(TestSetError::CaseVersion {
                    case: c.id.clone(),
                    version: c.introduced_in.clone(),
                });
            }
            if let Some(t) = c.tags.iter().find(|t| !required.contains(t)) {
                return Err(TestSetError::OrphanTag {
                    case: c.id.clone(),
                    tag: t.clone(),
                });
            }
        }
        Ok(())
    }

    fn index(&self, version: &str) -> Result<usize, TestSetError> {
        self.versions
            .iter()
            .position(|v| v == version)
            .ok_or_else(|| TestSetError::UnknownVersion(version.into()))
    }

    pub fn requirements_of(&self, version: &str) -> Result<BTreeSet<String>, TestSetError> {
        self.index(version)?;
        Ok(self.requirements.get(version).cloned().unwrap_or_default())
    }

    /// Cases introduced at or before `version`.
    pub fn cases_up_to(&self, version: &str) -> Result<Vec<&TestCase>, TestSetError> {
        let k = self.index(version)?;
        let mut out = Vec::new();
        for c in &self.cases {
            if self.index(&c.introduced_in)? <= k {
                out.push(c);
            }
        }
        Ok(out)
    }
}

/// Which existing cases carry over from `from` to `to`, and which of the
/// new requirements nothing exercises yet.
pub fn reuse_delta(
    reg: &TestSetRegistry,
    from: &str,
    to: &str,
) -> Result<ReuseDelta, TestSetError> {
    if reg.index(from)? > reg.index(to)? {
        return Err(TestSetError::VersionOrder {
            from: from.into(),
            to: to.into(),
        });
    }
    let target = reg.requirements_of(to)?;
    let existing = reg.cases_up_to(from)?;
    let reusable = existing
        .iter()
        .filter(|c| c.tags.is_subset(&target))
        .map(|c| c.id.clone())
        .collect();
    let exercised: BTreeSet<&String> = existing.iter().flat_map(|c| &c.tags).collect();
    let uncovered_tags = target
        .iter()
        .filter(|t| !exercised.contains(t))
        .cloned()
        .collect();
    Ok(ReuseDelta {
        from: from.into(),
        to: to.into(),
        reusable,
        uncovered_tags,
    })
}

fn candidates<'a>(
    reg: &'a TestSetRegistry,
    version: &str,
) -> Result<(BTreeSet<String>, Vec<&'a TestCase>), TestSetError> {
    let need = reg.requirements_of(version)?;
    let mut pool = reg.cases_up_to(version)?;
    pool.retain(|c| !c.tags.is_disjoint(&need));
    pool.sort_by(|a, b| a.id.cmp(&b.id));
    let have: BTreeSet<&String> = pool.iter().flat_map(|c| &c.tags).collect();
    let missing: BTreeSet<String> = need.iter().filter(|t| !have.contains(t)).cloned().collect();
    if !missing.is_empty() {
        return Err(TestSetError::CoverageGap {
            version: version.into(),
            missing,
        });
    }
    Ok((need, pool))
}

/// Largest-gain-first picks; ties go to the smaller id.
fn greedy_over(need: &BTreeSet<String>, pool: &[&TestCase]) -> Vec<String> {
    let mut open = need.clone();
    let mut used = vec![false; pool.len()];
    let mut picks = Vec::new();
    while !open.is_empty() {
        let mut best: Option<(usize, usize)> = None;
        for (i, c) in pool.iter().enumerate() {
            if used[i] {
                continue;
            }
            let gain = c.tags.iter().filter(|t| open.contains(*t)).count();
            if gain > 0 && best.is_none_or(|(_, g)| gain > g) {
                best = Some((i, gain));
            }
        }
        let Some((i, _)) = best else { break };
        used[i] = true;
        for t in &pool[i].tags {
            open.remove(t);
        }
        picks.push(pool[i].id.clone());
    }
    picks
}

pub fn greedy_cover(reg: &TestSetRegistry, version: &str) -> Result<Vec<String>, TestSetError> {
    let (need, pool) = candidates(reg, version)?;
    Ok(greedy_over(&need, &pool))
}

/// First cover of exactly `k` cases in lexicographic index order.
fn cover_of_size(masks: &[u64], full: u64, k: usize) -> Option<Vec<usize>> {
    fn go(
        masks: &[u64],
        full: u64,
        start: usize,
        left: usize,
        acc: u64,
        pick: &mut Vec<usize>,
    ) -> bool {
        if left == 0 {
            return acc == full;
        }
        for i in start..=masks.len() - left {
            pick.push(i);
            if go(masks, full, i + 1, left - 1, acc | masks[i], pick) {
                return true;
            }
            pick.pop();
        }
        false
    }
    let mut pick = Vec::with_capacity(k);
    go(masks, full, 0, k, 0, &mut pick).then_some(pick)
}

pub fn cover_report(reg: &TestSetRegistry, version: &str) -> Result<CoverReport, TestSetError> {
    let (need, pool) = candidates(reg, version)?;
    let greedy = greedy_over(&need, &pool);
    let mut cases = greedy.clone();
    let exact = pool.len() <= EXACT_COVER_LIMIT && need.len() <= 64;
    if exact && greedy.len() > 1 {
        let bit: BTreeMap<&String, u32> = need.iter().zip(0..).collect();
        let masks: Vec<u64> = pool
            .iter()
            .map(|c| {
                c.tags
                    .iter()
                    .filter_map(|t| bit.get(t))
                    .fold(0, |m, b| m | 1 << b)
            })
            .collect();
        let full = if need.len() == 64 {
            u64::MAX
        } else {
            (1u64 << need.len()) - 1
        };
        if let Some(pick) = (1..greedy.len()).find_map(|k| cover_of_size(&masks, full, k)) {
            let chosen: Vec<&TestCase> = pick.iter().map(|&i| pool[i]).collect();
            cases = greedy_over(&need, &chosen);
        }
    }
    let by_id: BTreeMap<&str, &TestCase> = pool.iter().map(|c| (c.id.as_str(), *c)).collect();
    let mut overlaps = Vec::new();
    for (i, a) in cases.iter().enumerate() {
        for b in &cases[i + 1..] {
            let shared: BTreeSet<String> = by_id[a.as_str()]
                .tags
                .intersection(&by_id[b.as_str()].tags)
                .filter(|t| need.contains(*t))
                .cloned()
                .collect();
            if !shared.is_empty() {
                overlaps.push(Overlap {
                    a: a.clone(),
                    b: b.clone(),
                    shared,
                });
            }
        }
    }
    Ok(CoverReport {
        version: version.into(),
        cases,
        greedy,
        proven_minimal: exact,
        overlaps,
    })
}

/// Smallest set of cases covering every requirement of `version`, in pick
/// order. Greedy, then tightened by exhaustive search on small pools.
pub fn minimal_cover(reg: &TestSetRegistry, version: &str) -> Result<Vec<String>, TestSetError> {
    cover_report(reg, version).map(|r| r.cases)
}
