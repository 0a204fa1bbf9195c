//! Lazy k-NN schedule construction.
//!
//! For a query instance the k nearest training instances are retrieved, the
//! smallest solver subset covering the most of them is selected, and the
//! time budget is split into equal slots handed out per solved neighbor,
//! with the slots of uncovered neighbors going to the backup solver.

mod neighbors;
mod schedule;
mod subportfolio;

pub(crate) use neighbors::ScaledIndex;
pub use neighbors::{nearest_neighbors, Neighborhood};
pub use schedule::{
    build_schedule, schedule_for_neighborhood, EntryDocument, Schedule, ScheduleDocument, ScheduleEntry,
};
pub(crate) use subportfolio::{coverage, Cover};
pub use subportfolio::{max_solved, select_subportfolio, SubPortfolio};

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::kb::{KnowledgeBase, SolverId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SunnyConfig {
    pub k: usize,
    pub timeout_ms: u64,
    pub backup: SolverId,
    pub portfolio: Vec<SolverId>,
}

impl SunnyConfig {
    /// Config over every solver of `kb`, with its timeout.
    pub fn for_kb(kb: &KnowledgeBase, k: usize, backup: SolverId) -> Self {
        Self { k, timeout_ms: kb.timeout_ms(), backup, portfolio: kb.solvers().to_vec() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        if self.timeout_ms == 0 {
            return Err(Error::InvalidConfig("timeout must be positive".into()));
        }
        if self.portfolio.is_empty() {
            return Err(Error::InvalidConfig("portfolio is empty".into()));
        }
        let mut seen = HashSet::new();
        for s in &self.portfolio {
            if !seen.insert(s) {
                return Err(Error::InvalidConfig(format!("solver `{s}` listed twice in portfolio")));
            }
        }
        if !seen.contains(&self.backup) {
            return Err(Error::InvalidConfig(format!("backup solver `{}` is not in the portfolio", self.backup)));
        }
        Ok(())
    }

    /// Portfolio as solver indices of `kb`.
    pub(crate) fn portfolio_indices(&self, kb: &KnowledgeBase) -> Result<Vec<usize>> {
        self.portfolio.iter().map(|s| kb.solver_index(s.as_str())).collect()
    }
}
