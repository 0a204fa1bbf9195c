//! Simulation-based evaluation: portfolio composition, cross-validation
//! folds, schedule replay against known runtimes, and PSI/AST reporting for
//! SUNNY and the VBS, SBS, KNN, and EQU baselines.

mod compose;
mod folds;
mod report;
mod run;
mod simulate;
mod sweep;

pub use compose::{compose_portfolio, elect_backup, PortfolioSpec, MAX_COMPOSE_SOLVERS};
pub use folds::{make_folds, FoldPlan};
pub use report::{
    combined_csv, comparison_csv, Cell, EvaluationReport, Metrics, RepeatDocument, ReportDocument, SubPortfolioStats,
};
pub use run::{evaluate, knn_choice, run_baseline, run_sunny_eval, Approach, EvalSettings};
pub use simulate::{simulate_at, simulate_schedule, SimulationOutcome};
pub use sweep::{sweep_k, SweepRow, SweepTable};
