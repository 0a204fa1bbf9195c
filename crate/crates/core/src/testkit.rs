//! Shared fixtures for unit tests.

use crate::kb::KnowledgeBase;

pub const REFERENCE_FEATURES: &str = include_str!("../tests/data/reference_features.csv");
pub const REFERENCE_RUNTIMES: &str = include_str!("../tests/data/reference_runtimes.csv");

/// The four-solver, five-instance runtime table with T = 1800 s.
pub fn reference_kb() -> KnowledgeBase {
    KnowledgeBase::from_readers(REFERENCE_FEATURES.as_bytes(), REFERENCE_RUNTIMES.as_bytes(), 1_800_000).unwrap()
}
