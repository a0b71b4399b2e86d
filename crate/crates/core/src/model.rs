//! Product structure and fault-hypothesis state.
//!
//! A [`ProductModel`] declares the modules under development, the catalog of
//! interfaces that may be introduced while integrating them, and the
//! data-flow precedence between modules. During a replay every potential
//! fault is tracked as a [`FaultHypothesis`] whose risk is
//! `probability × impact` while it is open.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;
use crate::validation::ValidationReport;

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleDef {
    pub id: String,
    #[serde(default)]
    pub name: String,
    #[serde(rename = "p", default = "unit")]
    pub fault_probability: f64,
    #[serde(rename = "impact", default = "unit")]
    pub fault_impact: f64,
}

impl ModuleDef {
    pub fn new(id: impl Into<String>) -> Self {
        let id = id.into();
        Self {
            name: id.clone(),
            id,
            fault_probability: 1.0,
            fault_impact: 1.0,
        }
    }

    pub fn with_risk(mut self, probability: f64, impact: f64) -> Self {
        self.fault_probability = probability;
        self.fault_impact = impact;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterfaceDef {
    #[serde(rename = "a")]
    pub endpoint_a: String,
    #[serde(rename = "b")]
    pub endpoint_b: String,
    #[serde(rename = "p", default = "unit")]
    pub fault_probability: f64,
    #[serde(rename = "impact", default = "unit")]
    pub fault_impact: f64,
}

impl InterfaceDef {
    pub fn new(a: impl Into<String>, b: impl Into<String>) -> Self {
        Self {
            endpoint_a: a.into(),
            endpoint_b: b.into(),
            fault_probability: 1.0,
            fault_impact: 1.0,
        }
    }

    pub fn pair(&self) -> InterfacePair {
        InterfacePair::new(&self.endpoint_a, &self.endpoint_b)
    }
}

/// Risk carried by an assembly inherited from an earlier design cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualDef {
    #[serde(rename = "p", default = "unit")]
    pub fault_probability: f64,
    #[serde(rename = "impact", default = "unit")]
    pub fault_impact: f64,
}

impl Default for ResidualDef {
    fn default() -> Self {
        Self {
            fault_probability: 1.0,
            fault_impact: 1.0,
        }
    }
}

/// Unordered pair of endpoint ids. `(a, b)` and `(b, a)` compare equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[String; 2]", into = "[String; 2]")]
pub struct InterfacePair {
    lo: String,
    hi: String,
}

impl InterfacePair {
    pub fn new(a: impl AsRef<str>, b: impl AsRef<str>) -> Self {
        let (a, b) = (a.as_ref(), b.as_ref());
        if a <= b {
            Self {
                lo: a.to_string(),
                hi: b.to_string(),
            }
        } else {
            Self {
                lo: b.to_string(),
                hi: a.to_string(),
            }
        }
    }

    pub fn endpoints(&self) -> (&str, &str) {
        (&self.lo, &self.hi)
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn touches(&self, id: &str) -> bool {
        self.lo == id || self.hi == id
    }
}

impl From<[String; 2]> for InterfacePair {
    fn from([a, b]: [String; 2]) -> Self {
        Self::new(a, b)
    }
}

impl From<InterfacePair> for [String; 2] {
    fn from(p: InterfacePair) -> Self {
        [p.lo, p.hi]
    }
}

impl fmt::Display for InterfacePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ProductModel {
    pub modules: Vec<ModuleDef>,
    #[serde(default)]
    pub interfaces: Vec<InterfaceDef>,
    #[serde(default)]
    pub precedence: Vec<(String, String)>,
    #[serde(default)]
    pub residual: ResidualDef,
}

impl ProductModel {
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn module(&self, id: &str) -> Option<&ModuleDef> {
        self.modules.iter().find(|m| m.id == id)
    }

    pub fn module_ids(&self) -> BTreeSet<String> {
        self.modules.iter().map(|m| m.id.clone()).collect()
    }

    pub fn interface(&self, pair: &InterfacePair) -> Option<&InterfaceDef> {
        self.interfaces.iter().find(|i| &i.pair() == pair)
    }

    /// Direct data-flow predecessors of `id`.
    pub fn predecessors<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.precedence
            .iter()
            .filter(move |(_, to)| to == id)
            .map(|(from, _)| from.as_str())
    }

    /// Multiply every impact (modules, interfaces, residual) by `factor`.
    pub fn scale_impacts(&self, factor: f64) -> Self {
        let mut scaled = self.clone();
        for m in &mut scaled.modules {
            m.fault_impact *= factor;
        }
        for i in &mut scaled.interfaces {
            i.fault_impact *= factor;
        }
        scaled.residual.fault_impact *= factor;
        scaled
    }

    /// The six-module sonar detection chain used as the worked example:
    /// two DSP boards and the acquisition → FFT → CA-CFAR → post-detection
    /// data path.
    pub fn mds() -> Self {
        let names = [
            ("DAQ2", "Data acquisition"),
            ("FFT", "4K complex FFT"),
            ("CFAR2", "CA-CFAR detector"),
            ("PDP2", "Post detection processing"),
            ("DSP2", "DSP board 2"),
            ("DSP4", "DSP board 4"),
        ];
        Self {
            modules: names
                .iter()
                .map(|(id, name)| ModuleDef {
                    name: name.to_string(),
                    ..ModuleDef::new(*id)
                })
                .collect(),
            interfaces: vec![
                InterfaceDef::new("DAQ2", "DSP2"),
                InterfaceDef::new("FFT", "DSP2"),
                InterfaceDef::new("CFAR2", "DSP4"),
                InterfaceDef::new("PDP2", "DSP4"),
            ],
            precedence: vec![
                ("DAQ2".into(), "FFT".into()),
                ("FFT".into(), "CFAR2".into()),
                ("CFAR2".into(), "PDP2".into()),
            ],
            residual: ResidualDef::default(),
        }
    }
}

/// Where a potential fault lives.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Location {
    Module {
        id: String,
    },
    Interface {
        pair: InterfacePair,
    },
    /// Residual of an assembly carried into a later cycle. `cycle` is the
    /// zero-based index of the cycle that carried it in.
    Residual {
        assembly: String,
        cycle: usize,
    },
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Module { id } => write!(f, "module {id}"),
            Location::Interface { pair } => write!(f, "interface {pair}"),
            Location::Residual { assembly, cycle } => {
                write!(f, "residual {assembly}@{}", cycle + 1)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HypothesisState {
    Open,
    Cleared,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaultHypothesis<S> {
    pub location: Location,
    pub probability: S,
    pub impact: S,
    state: HypothesisState,
}

impl<S: Scalar> FaultHypothesis<S> {
    pub fn open(location: Location, probability: S, impact: S) -> Self {
        Self {
            location,
            probability,
            impact,
            state: HypothesisState::Open,
        }
    }

    pub fn state(&self) -> HypothesisState {
        self.state
    }

    pub fn is_open(&self) -> bool {
        self.state == HypothesisState::Open
    }

    pub fn risk(&self) -> S {
        risk_of(self)
    }

    /// Apply a test of the given effectiveness. Full effectiveness clears
    /// the hypothesis; partial effectiveness scales the remaining
    /// probability by `1 - effectiveness`. A cleared hypothesis stays cleared.
    pub fn apply_test(&mut self, effectiveness: S) {
        if !self.is_open() {
            return;
        }
        if effectiveness >= S::one() {
            self.state = HypothesisState::Cleared;
        } else {
            self.probability = self.probability * (S::one() - effectiveness);
        }
    }
}

pub fn risk_of<S: Scalar>(h: &FaultHypothesis<S>) -> S {
    match h.state {
        HypothesisState::Open => h.probability * h.impact,
        HypothesisState::Cleared => S::zero(),
    }
}

/// A set of integrated modules together with the interfaces introduced
/// between them.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Assembly {
    pub id: String,
    pub members: BTreeSet<String>,
    pub internal_interfaces: BTreeSet<InterfacePair>,
    /// Residual locations owned by this assembly (its own carried residuals
    /// plus those of assemblies merged into it).
    pub residuals: BTreeSet<Location>,
    /// Ids of assemblies merged into this one.
    pub absorbed: BTreeSet<String>,
}

impl Assembly {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            ..Self::default()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty() && self.residuals.is_empty()
    }

    /// True when `endpoint` may terminate an interface inside this assembly.
    pub fn admits_endpoint(&self, endpoint: &str) -> bool {
        endpoint == self.id || self.members.contains(endpoint) || self.absorbed.contains(endpoint)
    }

    pub fn contains(&self, location: &Location) -> bool {
        match location {
            Location::Module { id } => self.members.contains(id),
            Location::Interface { pair } => self.internal_interfaces.contains(pair),
            Location::Residual { .. } => self.residuals.contains(location),
        }
    }
}

pub fn validate_model(m: &ProductModel) -> ValidationReport {
    let mut report = ValidationReport::new();
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, module) in m.modules.iter().enumerate() {
        let loc = format!("modules[{i}]");
        if module.id.is_empty() {
            report.error("empty-id", &loc, "module id is empty");
        }
        if let Some(first) = seen.insert(&module.id, i) {
            report.error(
                "duplicate-id",
                &loc,
                format!(
                    "module id '{}' already declared at modules[{first}]",
                    module.id
                ),
            );
        }
        check_risk_fields(
            &mut report,
            &loc,
            module.fault_probability,
            module.fault_impact,
        );
    }

    let mut pairs: BTreeMap<InterfacePair, usize> = BTreeMap::new();
    for (i, iface) in m.interfaces.iter().enumerate() {
        let loc = format!("interfaces[{i}]");
        for endpoint in [&iface.endpoint_a, &iface.endpoint_b] {
            if !seen.contains_key(endpoint.as_str()) {
                report.error(
                    "unresolved-endpoint",
                    &loc,
                    format!("interface endpoint '{endpoint}' is not a declared module"),
                );
            }
        }
        let pair = iface.pair();
        if pair.is_degenerate() {
            report.error(
                "degenerate-interface",
                &loc,
                format!(
                    "interface endpoints must differ, got '{}' twice",
                    iface.endpoint_a
                ),
            );
        }
        if let Some(first) = pairs.insert(pair.clone(), i) {
            report.error(
                "duplicate-interface",
                &loc,
                format!("interface {pair} already declared at interfaces[{first}]"),
            );
        }
        check_risk_fields(
            &mut report,
            &loc,
            iface.fault_probability,
            iface.fault_impact,
        );
    }

    check_risk_fields(
        &mut report,
        "residual",
        m.residual.fault_probability,
        m.residual.fault_impact,
    );

    for (i, (from, to)) in m.precedence.iter().enumerate() {
        let loc = format!("precedence[{i}]");
        for endpoint in [from, to] {
            if !seen.contains_key(endpoint.as_str()) {
                report.error(
                    "unresolved-endpoint",
                    &loc,
                    format!("precedence endpoint '{endpoint}' is not a declared module"),
                );
            }
        }
    }
    if let Some(cycle) = find_cycle(&m.precedence) {
        report.error(
            "cycle",
            "precedence",
            format!("precedence graph has a cycle: {}", cycle.join(" -> ")),
        );
    }
    report
}

fn check_risk_fields(report: &mut ValidationReport, loc: &str, p: f64, impact: f64) {
    if !(p > 0.0 && p <= 1.0) {
        report.error(
            "probability-range",
            loc,
            format!("fault probability {p} outside (0, 1]"),
        );
    }
    if !(impact > 0.0 && impact.is_finite()) {
        report.error(
            "impact-range",
            loc,
            format!("fault impact {impact} must be > 0"),
        );
    }
}

/// Returns one directed cycle (first node repeated at the end) if any.
fn find_cycle(edges: &[(String, String)]) -> Option<Vec<String>> {
    let mut adj: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (a, b) in edges {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default();
    }
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let mut mark: BTreeMap<&str, Mark> = adj.keys().map(|k| (*k, Mark::New)).collect();
    // start from nodes in the order the edges mention them
    let mut nodes: Vec<&str> = Vec::new();
    for (a, b) in edges {
        for n in [a.as_str(), b.as_str()] {
            if !nodes.contains(&n) {
                nodes.push(n);
            }
        }
    }
    for start in nodes {
        if mark[start] != Mark::New {
            continue;
        }
        // iterative DFS keeping the active path
        let mut stack: Vec<(&str, usize)> = vec![(start, 0)];
        mark.insert(start, Mark::Active);
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            let succ = &adj[node];
            if *next < succ.len() {
                let child = succ[*next];
                *next += 1;
                match mark[child] {
                    Mark::New => {
                        mark.insert(child, Mark::Active);
                        stack.push((child, 0));
                    }
                    Mark::Active => {
                        let pos = stack.iter().position(|(n, _)| *n == child).unwrap();
                        let mut cycle: Vec<String> =
                            stack[pos..].iter().map(|(n, _)| n.to_string()).collect();
                        cycle.push(child.to_string());
                        return Some(cycle);
                    }
                    Mark::Done => {}
                }
            } else {
                mark.insert(node, Mark::Done);
                stack.pop();
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Exact;

    #[test]
    fn unit_hypothesis_is_one_risk_unit() {
        let h = FaultHypothesis::open(Location::Module { id: "DAQ2".into() }, 1.0, 1.0);
        assert_eq!(risk_of(&h), 1.0);
    }

    #[test]
    fn risk_is_probability_times_impact() {
        let h = FaultHypothesis::open(
            Location::Module { id: "X".into() },
            Exact::new(3, 10),
            Exact::from_integer(2),
        );
        assert_eq!(risk_of(&h), Exact::new(6, 10));
        let hf = FaultHypothesis::open(Location::Module { id: "X".into() }, 0.3f64, 2.0);
        assert!((risk_of(&hf) - 0.6).abs() < 1e-12);
    }

    #[test]
    fn cleared_hypothesis_has_zero_risk_and_stays_cleared() {
        let mut h = FaultHypothesis::open(Location::Module { id: "X".into() }, 1.0, 1.0);
        h.apply_test(1.0);
        assert_eq!(h.state(), HypothesisState::Cleared);
        assert_eq!(risk_of(&h), 0.0);
        h.apply_test(0.5);
        assert_eq!(h.state(), HypothesisState::Cleared);
        assert_eq!(h.risk(), 0.0);
    }

    #[test]
    fn partial_test_scales_remaining_risk() {
        let mut h = FaultHypothesis::open(
            Location::Module { id: "X".into() },
            Exact::from_integer(1),
            Exact::from_integer(4),
        );
        h.apply_test(Exact::new(3, 4));
        assert!(h.is_open());
        assert_eq!(h.risk(), Exact::from_integer(1));
    }

    #[test]
    fn interface_pair_is_unordered() {
        assert_eq!(InterfacePair::new("a", "b"), InterfacePair::new("b", "a"));
        let json = serde_json::to_string(&InterfacePair::new("z", "a")).unwrap();
        assert_eq!(json, r#"["a","z"]"#);
    }

    #[test]
    fn mds_model_is_valid() {
        assert!(validate_model(&ProductModel::mds()).is_empty());
    }

    #[test]
    fn self_loop_is_a_cycle() {
        let mut m = ProductModel::mds();
        m.precedence.push(("FFT".into(), "FFT".into()));
        let r = validate_model(&m);
        assert!(r.has_code("cycle"), "{r}");
    }

    #[test]
    fn longer_cycle_is_reported_with_path() {
        let mut m = ProductModel::mds();
        m.precedence.push(("PDP2".into(), "DAQ2".into()));
        let r = validate_model(&m);
        let issue = r.issues.iter().find(|i| i.code == "cycle").unwrap();
        assert!(
            issue
                .message
                .contains("DAQ2 -> FFT -> CFAR2 -> PDP2 -> DAQ2"),
            "{issue}"
        );
    }

    #[test]
    fn undeclared_interface_endpoint_is_reported() {
        let mut m = ProductModel::mds();
        m.interfaces.push(InterfaceDef::new("DSP2", "X"));
        let r = validate_model(&m);
        let issue = r
            .issues
            .iter()
            .find(|i| i.code == "unresolved-endpoint")
            .unwrap();
        assert_eq!(issue.location, "interfaces[4]");
        assert!(issue.message.contains("'X'"));
    }

    #[test]
    fn duplicate_ids_and_reversed_interfaces_are_errors() {
        let mut m = ProductModel::mds();
        m.modules.push(ModuleDef::new("FFT"));
        m.interfaces.push(InterfaceDef::new("DSP2", "DAQ2"));
        let r = validate_model(&m);
        assert!(r.has_code("duplicate-id"));
        assert!(r.has_code("duplicate-interface"));
    }

    #[test]
    fn risk_field_ranges_are_checked() {
        let mut m = ProductModel::mds();
        m.modules[0].fault_probability = 0.0;
        m.modules[1].fault_impact = -1.0;
        m.interfaces[0].fault_probability = 1.5;
        let r = validate_model(&m);
        assert_eq!(
            r.issues
                .iter()
                .filter(|i| i.code == "probability-range")
                .count(),
            2
        );
        assert!(r.has_code("impact-range"));
    }

    #[test]
    fn json_defaults_to_unit_risk() {
        let m = ProductModel::from_json(
            r#"{"modules":[{"id":"A"},{"id":"B","p":0.5,"impact":2}],
                "interfaces":[{"a":"A","b":"B"}],
                "precedence":[["A","B"]]}"#,
        )
        .unwrap();
        assert_eq!(m.modules[0].fault_probability, 1.0);
        assert_eq!(m.modules[0].fault_impact, 1.0);
        assert_eq!(m.modules[1].fault_impact, 2.0);
        assert_eq!(m.interfaces[0].fault_probability, 1.0);
        assert_eq!(m.residual, ResidualDef::default());
        assert!(validate_model(&m).is_empty());
    }

    #[test]
    fn validation_is_pure() {
        let mut m = ProductModel::mds();
        m.precedence.push(("A".into(), "A".into()));
        assert_eq!(validate_model(&m), validate_model(&m));
    }
}
