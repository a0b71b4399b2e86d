//! Integration-and-test risk planning for staged embedded-system development.
//!
//! The crate replays integration plans as a discrete-time fault-hypothesis
//! burn-down ([`riskengine`]), builds, validates, compares and searches over
//! plans ([`strategy`]), reproduces DSP resource-budget arithmetic
//! ([`budget`]) and manages reusable tagged test sets ([`testset`]).
//!
//! Risk arithmetic is generic over a [`Scalar`]; `f64` is the everyday
//! choice and [`Exact`] (a 64-bit rational) gives drift-free results for
//! invariant checks. Budget arithmetic is generic over
//! [`num_traits::Float`].

pub mod budget;
pub mod model;
pub mod riskengine;
pub mod scalar;
pub mod strategy;
pub mod testset;
pub mod validation;

pub use model::{
    risk_of, Assembly, FaultHypothesis, HypothesisState, InterfaceDef, InterfacePair, Location,
    ModuleDef, ProductModel, ResidualDef,
};
pub use riskengine::{
    kpis, simulate, ActionKind, DesignCycle, Event, EventKind, IntegrationPlan, KpiReport,
    PlanAction, RiskProfile, SimError, Simulation,
};
pub use scalar::Scalar;
pub use validation::{Issue, Severity, ValidationReport};

/// Exact rational scalar for drift-free risk arithmetic.
pub type Exact = num_rational::Rational64;

pub type RiskProfileF64 = RiskProfile<f64>;
pub type RiskProfileF32 = RiskProfile<f32>;
pub type RiskProfileExact = RiskProfile<Exact>;
pub type KpiReportF64 = KpiReport<f64>;
pub type KpiReportF32 = KpiReport<f32>;
pub type KpiReportExact = KpiReport<Exact>;
pub type SimulationF64 = Simulation<f64>;
pub type SimulationExact = Simulation<Exact>;
pub type BudgetReportF64 = budget::BudgetReport<f64>;
