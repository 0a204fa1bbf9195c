//! Cross-validated evaluation of SUNNY and the baselines.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use rayon::prelude::*;

use super::compose::elect_backup;
use super::folds::FoldPlan;
use super::report::{Cell, EvaluationReport, Metrics, SubPortfolioStats};
use super::simulate::{simulate_at, SimulationOutcome};
use crate::error::{Error, Result};
use crate::kb::{KnowledgeBase, ScalingParams, SolverId};
use crate::sunny::{schedule_for_neighborhood, Neighborhood, ScaledIndex, Schedule, SunnyConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Approach {
    Sunny,
    /// Virtual best solver.
    Vbs,
    /// Single best solver.
    Sbs,
    /// Best solver of the neighborhood, alone for the whole budget.
    Knn,
    /// Equal time for every portfolio solver.
    Equ,
}

impl Approach {
    pub const ALL: [Approach; 5] = [Approach::Sunny, Approach::Vbs, Approach::Sbs, Approach::Knn, Approach::Equ];

    pub fn label(self) -> &'static str {
        match self {
            Approach::Sunny => "SUNNY",
            Approach::Vbs => "VBS",
            Approach::Sbs => "SBS",
            Approach::Knn => "KNN",
            Approach::Equ => "EQU",
        }
    }
}

impl fmt::Display for Approach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Approach {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Approach::ALL
            .into_iter()
            .find(|a| a.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown approach `{s}`")))
    }
}

/// Parameters shared by every approach.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalSettings {
    pub k: usize,
    pub timeout_ms: u64,
    pub portfolio: Vec<SolverId>,
    /// Elected per training set when absent.
    pub backup: Option<SolverId>,
    /// Worker threads for cells; 1 runs sequentially.
    pub jobs: usize,
}

impl EvalSettings {
    pub fn new(kb: &KnowledgeBase, k: usize) -> Self {
        Self { k, timeout_ms: kb.timeout_ms(), portfolio: kb.solvers().to_vec(), backup: None, jobs: 1 }
    }
}

struct CellResult {
    outcomes: Vec<SimulationOutcome>,
    subportfolio_sizes: Vec<usize>,
}

pub fn run_sunny_eval(kb: &KnowledgeBase, settings: &EvalSettings, plan: &FoldPlan) -> Result<EvaluationReport> {
    evaluate(Approach::Sunny, kb, settings, plan)
}

pub fn run_baseline(
    kind: Approach,
    kb: &KnowledgeBase,
    settings: &EvalSettings,
    plan: &FoldPlan,
) -> Result<EvaluationReport> {
    evaluate(kind, kb, settings, plan)
}

/// Evaluates one approach over every (repeat, fold) cell of `plan`.
pub fn evaluate(
    approach: Approach,
    kb: &KnowledgeBase,
    settings: &EvalSettings,
    plan: &FoldPlan,
) -> Result<EvaluationReport> {
    if settings.portfolio.is_empty() {
        return Err(Error::InvalidConfig("portfolio is empty".into()));
    }
    for s in &settings.portfolio {
        kb.solver_index(s.as_str())?;
    }
    let cells: Vec<(usize, usize)> = plan.cells().collect();
    let run = |&(r, f): &(usize, usize)| run_cell(approach, kb, settings, plan, r, f);
    let results: Vec<Result<CellResult>> = if settings.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(settings.jobs)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
        pool.install(|| cells.par_iter().map(run).collect())
    } else {
        cells.iter().map(run).collect()
    };

    let mut out = Vec::with_capacity(cells.len());
    let mut sizes = Vec::new();
    for (&(repeat, fold), res) in cells.iter().zip(results) {
        let res = res?;
        sizes.extend_from_slice(&res.subportfolio_sizes);
        out.push(Cell {
            repeat,
            fold,
            instances: res.outcomes.len(),
            solved: res.outcomes.iter().filter(|o| o.solved).count(),
            metrics: Metrics::from_outcomes(&res.outcomes),
        });
    }
    Ok(EvaluationReport {
        approach: approach.label().to_owned(),
        timeout_ms: settings.timeout_ms,
        cells: out,
        subportfolio: (approach == Approach::Sunny).then(|| SubPortfolioStats::from_sizes(&sizes)),
    })
}

fn run_cell(
    approach: Approach,
    kb: &KnowledgeBase,
    settings: &EvalSettings,
    plan: &FoldPlan,
    repeat: usize,
    fold: usize,
) -> Result<CellResult> {
    let training = kb.restrict(&plan.training(repeat, fold));
    let test = plan.test(repeat, fold);
    let budget = settings.timeout_ms;
    let portfolio: Vec<usize> =
        settings.portfolio.iter().map(|s| kb.solver_index(s.as_str())).collect::<Result<_>>()?;
    let mut sizes = Vec::new();

    let outcomes = match approach {
        Approach::Vbs => test
            .iter()
            .map(|&i| {
                let best = portfolio
                    .iter()
                    .map(|&s| kb.runtime(i, s))
                    .filter(|r| r.solved_within(budget))
                    .map(|r| r.time_ms)
                    .min();
                SimulationOutcome {
                    instance: kb.instances()[i].clone(),
                    solved: best.is_some(),
                    time_ms: Ratio::from_integer(best.unwrap_or(budget)),
                }
            })
            .collect(),
        Approach::Sbs => {
            let best = elect_backup(&training, &settings.portfolio)?;
            let schedule = Schedule::single(best, budget);
            test.iter().map(|&i| simulate_at(&schedule, i, kb, 0)).collect::<Result<_>>()?
        }
        Approach::Equ => {
            let mut order: Vec<(u64, SolverId)> = settings
                .portfolio
                .iter()
                .map(|s| Ok((training.solver_totals(training.solver_index(s.as_str())?, budget).1, s.clone())))
                .collect::<Result<_>>()?;
            order.sort();
            let schedule = Schedule::equal_split(order.into_iter().map(|(_, s)| s).collect(), budget);
            test.iter().map(|&i| simulate_at(&schedule, i, kb, 0)).collect::<Result<_>>()?
        }
        Approach::Sunny | Approach::Knn => {
            let params = ScalingParams::fit_all(&training)?;
            let index = ScaledIndex::new(&training, &params)?;
            let backup = match &settings.backup {
                Some(b) => b.clone(),
                None => elect_backup(&training, &settings.portfolio)?,
            };
            let config =
                SunnyConfig { k: settings.k, timeout_ms: budget, backup, portfolio: settings.portfolio.clone() };
            config.validate()?;
            let mut outcomes = Vec::with_capacity(test.len());
            for &i in test {
                let query = params.apply(kb.features(i))?;
                let neighbors = index.query(&query, settings.k)?;
                let schedule = if approach == Approach::Sunny {
                    let s = schedule_for_neighborhood(&neighbors, &config, &training)?;
                    sizes.push(s.subportfolio.len());
                    s
                } else {
                    Schedule::single(knn_choice(&neighbors, &config, &training)?, budget)
                };
                outcomes.push(simulate_at(&schedule, i, kb, kb.feature_cost_ms(i))?);
            }
            outcomes
        }
    };
    Ok(CellResult { outcomes, subportfolio_sizes: sizes })
}

/// Portfolio solver solving the most neighbors; ties by lower total
/// neighborhood runtime, then name.
pub fn knn_choice(neighbors: &Neighborhood, config: &SunnyConfig, kb: &KnowledgeBase) -> Result<SolverId> {
    let members = neighbors.members.iter().map(|m| kb.instance_index(m.as_str())).collect::<Result<Vec<_>>>()?;
    let mut best: Option<(usize, u64, &SolverId)> = None;
    for id in &config.portfolio {
        let s = kb.solver_index(id.as_str())?;
        let solved = members.iter().filter(|&&i| kb.runtime(i, s).solved_within(config.timeout_ms)).count();
        let total: u64 = members.iter().map(|&i| kb.runtime(i, s).effective_ms(config.timeout_ms)).sum();
        let better = match best {
            None => true,
            Some((bs, bt, bid)) => solved > bs || (solved == bs && (total < bt || (total == bt && id < bid))),
        };
        if better {
            best = Some((solved, total, id));
        }
    }
    best.map(|(.., id)| id.clone()).ok_or_else(|| Error::InvalidConfig("empty portfolio".into()))
}
