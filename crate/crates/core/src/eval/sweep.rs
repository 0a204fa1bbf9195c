//! Grid of SUNNY evaluations over portfolio size and neighborhood size.

use std::fmt::Write as _;

use super::compose::compose_portfolio;
use super::folds::FoldPlan;
use super::run::{run_sunny_eval, EvalSettings};
use crate::error::{Error, Result};
use crate::kb::KnowledgeBase;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub m: usize,
    pub k: usize,
    pub psi: f64,
    pub ast: f64,
    pub avg_subportfolio_size: f64,
    pub max_subportfolio_size: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,k,psi,ast,avg_subpf_size,max_subpf_size\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{:.6},{:.6},{:.6},{}",
                r.m, r.k, r.psi, r.ast, r.avg_subportfolio_size, r.max_subportfolio_size
            );
        }
        out
    }
}

/// For each portfolio size `m` the composed portfolio is evaluated at every
/// `k`. `base` supplies the timeout, backup, and worker count; its
/// portfolio is replaced. A size equal to the solver count uses every solver.
pub fn sweep_k(
    kb: &KnowledgeBase,
    m_range: &[usize],
    k_range: &[usize],
    plan: &FoldPlan,
    base: &EvalSettings,
) -> Result<SweepTable> {
    if m_range.is_empty() || k_range.is_empty() {
        return Err(Error::InvalidConfig("sweep ranges must be non-empty".into()));
    }
    let mut table = SweepTable::default();
    for &m in m_range {
        let portfolio = if m == kb.num_solvers() { kb.solvers().to_vec() } else { compose_portfolio(kb, m)?.solvers };
        for &k in k_range {
            let settings = EvalSettings { k, portfolio: portfolio.clone(), ..base.clone() };
            let report = run_sunny_eval(kb, &settings, plan)?;
            let overall = report.overall();
            let stats = report.subportfolio.expect("SUNNY reports carry sub-portfolio stats");
            table.rows.push(SweepRow {
                m,
                k,
                psi: overall.psi,
                ast: overall.ast,
                avg_subportfolio_size: stats.mean,
                max_subportfolio_size: stats.max,
            });
        }
    }
    Ok(table)
}
