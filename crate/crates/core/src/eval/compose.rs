//! Fixed portfolio composition and backup-solver election.

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::kb::{KnowledgeBase, SolverId};
use crate::sunny::{coverage, Cover};
use crate::time::ExactMs;

/// Largest solver count for which exact subset search is allowed.
pub const MAX_COMPOSE_SOLVERS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PortfolioSpec {
    pub size: usize,
    /// Sorted by name.
    pub solvers: Vec<SolverId>,
    /// Instances of the knowledge base solved by at least one member.
    pub potential_solved: usize,
    /// Mean effective runtime over every (member, instance) pair.
    pub avg_time_ms: ExactMs,
}

/// The size-`m` solver subset solving the most knowledge-base instances;
/// ties go to the lower average runtime, then the smaller name list.
pub fn compose_portfolio(kb: &KnowledgeBase, m: usize) -> Result<PortfolioSpec> {
    let n = kb.num_solvers();
    if n > MAX_COMPOSE_SOLVERS {
        return Err(Error::InvalidConfig(format!(
            "{n} solvers exceed the exact composition limit of {MAX_COMPOSE_SOLVERS}"
        )));
    }
    if m < 2 || m > n {
        return Err(Error::InvalidConfig(format!("portfolio size {m} outside 2..={n}")));
    }
    let all: Vec<usize> = (0..kb.num_instances()).collect();
    let budget = kb.timeout_ms();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| kb.solvers()[a].cmp(&kb.solvers()[b]));
    let stats: Vec<(Cover, u64)> = order.iter().map(|&s| coverage(kb, &all, s, budget)).collect();

    let mut suffix = vec![Cover::empty(all.len()); n + 1];
    for p in (0..n).rev() {
        suffix[p] = suffix[p + 1].union(&stats[p].0);
    }

    struct Search<'a> {
        stats: &'a [(Cover, u64)],
        suffix: &'a [Cover],
        m: usize,
        chosen: Vec<usize>,
        // (covered, total, positions)
        best: Option<(usize, u64, Vec<usize>)>,
    }

    impl Search<'_> {
        fn better(&self, covered: usize, total: u64) -> bool {
            match &self.best {
                None => true,
                Some((c, t, names)) => covered > *c || (covered == *c && (total, &self.chosen) < (*t, names)),
            }
        }

        fn run(&mut self, start: usize, cover: &Cover, total: u64) {
            if self.chosen.len() == self.m {
                let covered = cover.count();
                if self.better(covered, total) {
                    self.best = Some((covered, total, self.chosen.clone()));
                }
                return;
            }
            let need = self.m - self.chosen.len();
            for p in start..=self.stats.len() - need {
                if let Some((best, ..)) = &self.best {
                    if cover.union(&self.suffix[p]).count() < *best {
                        break;
                    }
                }
                self.chosen.push(p);
                self.run(p + 1, &cover.union(&self.stats[p].0), total + self.stats[p].1);
                self.chosen.pop();
            }
        }
    }

    let mut search = Search { stats: &stats, suffix: &suffix, m, chosen: Vec::with_capacity(m), best: None };
    search.run(0, &Cover::empty(all.len()), 0);
    let (covered, total, chosen) = search.best.expect("m <= n guarantees a subset");
    Ok(PortfolioSpec {
        size: m,
        solvers: chosen.iter().map(|&p| kb.solvers()[order[p]].clone()).collect(),
        potential_solved: covered,
        avg_time_ms: Ratio::new(total, (m * all.len()).max(1) as u64),
    })
}

/// The portfolio member solving the most instances of `kb` within its
/// timeout; ties go to the lower total runtime, then the smaller name.
pub fn elect_backup(kb: &KnowledgeBase, portfolio: &[SolverId]) -> Result<SolverId> {
    let mut best: Option<(usize, u64, &SolverId)> = None;
    for id in portfolio {
        let (solved, total) = kb.solver_totals(kb.solver_index(id.as_str())?, kb.timeout_ms());
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
