use num_rational::Ratio;

use super::{Neighborhood, SunnyConfig};
use crate::error::{Error, Result};
use crate::kb::{KnowledgeBase, SolverId};
use crate::time::ExactMs;

/// Solvers chosen for one neighborhood.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubPortfolio {
    /// Sorted by name.
    pub solvers: Vec<SolverId>,
    /// Neighbors solved by at least one member.
    pub solved_count: usize,
    /// Mean effective runtime over every (member, neighbor) pair; zero for
    /// the empty set.
    pub avg_time_ms: ExactMs,
}

/// Bitset over neighborhood positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Cover(Vec<u64>);

impl Cover {
    pub(crate) fn empty(bits: usize) -> Self {
        Self(vec![0; bits.div_ceil(64)])
    }

    pub(crate) fn set(&mut self, bit: usize) {
        self.0[bit / 64] |= 1 << (bit % 64);
    }

    pub(crate) fn union(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a | b).collect())
    }

    pub(crate) fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// Per-solver coverage and total effective runtime over a set of instances.
pub(crate) fn coverage(kb: &KnowledgeBase, instances: &[usize], solver: usize, budget_ms: u64) -> (Cover, u64) {
    let mut cover = Cover::empty(instances.len());
    let mut total = 0;
    for (bit, &i) in instances.iter().enumerate() {
        let r = kb.runtime(i, solver);
        if r.solved_within(budget_ms) {
            cover.set(bit);
        }
        total += r.effective_ms(budget_ms);
    }
    (cover, total)
}

/// Finds the best subset of candidates, each given as (cover, total runtime),
/// assumed listed in ascending name order.
///
/// Order of preference: most covered, fewest members, lowest total runtime,
/// then lexicographically smallest name list. Subsets are searched by
/// increasing size; the search stops at the first size that reaches full
/// coverage, and branches that cannot reach it even with every remaining
/// candidate are cut.
pub(crate) fn best_subset(candidates: &[(Cover, u64)], bits: usize) -> Vec<usize> {
    // a solver covering nothing never belongs to a minimal subset
    let useful: Vec<usize> = (0..candidates.len()).filter(|&c| candidates[c].0.count() > 0).collect();
    let mut suffix = vec![Cover::empty(bits); useful.len() + 1];
    for p in (0..useful.len()).rev() {
        suffix[p] = suffix[p + 1].union(&candidates[useful[p]].0);
    }
    let target = suffix[0].count();
    if target == 0 {
        return Vec::new();
    }

    struct Search<'a> {
        candidates: &'a [(Cover, u64)],
        useful: &'a [usize],
        suffix: &'a [Cover],
        target: usize,
        size: usize,
        chosen: Vec<usize>,
        best: Option<(u64, Vec<usize>)>,
    }

    impl Search<'_> {
        fn run(&mut self, start: usize, cover: &Cover, total: u64) {
            if self.chosen.len() == self.size {
                if cover.count() == self.target {
                    // chosen grows in name order, so index lists compare like name lists
                    let better = match &self.best {
                        None => true,
                        Some((t, names)) => (total, &self.chosen) < (*t, names),
                    };
                    if better {
                        self.best = Some((total, self.chosen.clone()));
                    }
                }
                return;
            }
            let need = self.size - self.chosen.len();
            for p in start..=self.useful.len() - need {
                if cover.union(&self.suffix[p]).count() < self.target {
                    break;
                }
                let (c, t) = &self.candidates[self.useful[p]];
                self.chosen.push(self.useful[p]);
                self.run(p + 1, &cover.union(c), total + t);
                self.chosen.pop();
            }
        }
    }

    for size in 1..=useful.len() {
        let mut search = Search {
            candidates,
            useful: &useful,
            suffix: &suffix,
            target,
            size,
            chosen: Vec::with_capacity(size),
            best: None,
        };
        search.run(0, &Cover::empty(bits), 0);
        if let Some((_, chosen)) = search.best {
            return chosen;
        }
    }
    unreachable!("the full useful set always reaches the target")
}

/// Portfolio solver indices sorted by name.
pub(crate) fn sorted_by_name(kb: &KnowledgeBase, solvers: &[usize]) -> Vec<usize> {
    let mut sorted = solvers.to_vec();
    sorted.sort_by(|&a, &b| kb.solvers()[a].cmp(&kb.solvers()[b]));
    sorted
}

pub(crate) fn select_indices(
    kb: &KnowledgeBase,
    neighbors: &[usize],
    portfolio: &[usize],
    budget_ms: u64,
) -> (Vec<usize>, usize, ExactMs) {
    let portfolio = sorted_by_name(kb, portfolio);
    let stats: Vec<(Cover, u64)> = portfolio.iter().map(|&s| coverage(kb, neighbors, s, budget_ms)).collect();
    let picked = best_subset(&stats, neighbors.len());
    let mut cover = Cover::empty(neighbors.len());
    let mut total = 0;
    for &p in &picked {
        cover = cover.union(&stats[p].0);
        total += stats[p].1;
    }
    let pairs = (picked.len() * neighbors.len()) as u64;
    let avg = if pairs == 0 { Ratio::from_integer(0) } else { Ratio::new(total, pairs) };
    (picked.into_iter().map(|p| portfolio[p]).collect(), cover.count(), avg)
}

/// Smallest subset of the portfolio solving the most neighbors.
pub fn select_subportfolio(neighbors: &Neighborhood, config: &SunnyConfig, kb: &KnowledgeBase) -> Result<SubPortfolio> {
    if neighbors.is_empty() {
        return Err(Error::InvalidConfig("empty neighborhood".into()));
    }
    config.validate()?;
    let members = neighbors.indices(kb)?;
    let portfolio = config.portfolio_indices(kb)?;
    let (solvers, solved_count, avg_time_ms) = select_indices(kb, &members, &portfolio, config.timeout_ms);
    Ok(SubPortfolio {
        solvers: solvers.into_iter().map(|s| kb.solvers()[s].clone()).collect(),
        solved_count,
        avg_time_ms,
    })
}

/// Number of neighbors solved within `budget_ms` by at least one of `solvers`.
pub fn max_solved(solvers: &[SolverId], neighbors: &Neighborhood, kb: &KnowledgeBase, budget_ms: u64) -> Result<usize> {
    let members = neighbors.indices(kb)?;
    let solvers = solvers.iter().map(|s| kb.solver_index(s.as_str())).collect::<Result<Vec<_>>>()?;
    Ok(members.iter().filter(|&&i| solvers.iter().any(|&s| kb.runtime(i, s).solved_within(budget_ms))).count())
}
