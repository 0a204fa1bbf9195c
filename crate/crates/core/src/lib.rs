//! Lazy solver-portfolio scheduling.
//!
//! Given a knowledge base of solved instances (feature vectors plus
//! per-solver runtimes), [`sunny`] builds a time-sliced solver schedule for
//! a new instance from its nearest neighbors. [`eval`] replays schedules
//! against known runtimes under repeated k-fold cross-validation and
//! compares against the usual baselines, and [`runner`] executes a schedule
//! against real solver processes.

pub mod error;
pub mod eval;
pub mod kb;
pub mod runner;
pub mod sunny;
pub mod synth;
pub mod time;

#[cfg(test)]
mod testkit;

pub use error::{Error, Result};
pub use kb::{InstanceId, KnowledgeBase, ScaledVector, ScalingParams, SolverId};
pub use sunny::{build_schedule, Schedule, ScheduleEntry, SunnyConfig};
