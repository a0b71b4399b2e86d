//! Oracles and seeded corpora shared by the itrisk test suites. Nothing in
//! here calls the code under test to compute an expected value.

pub mod corpus;
pub mod cover;
pub mod enumerate;
pub mod replay;
