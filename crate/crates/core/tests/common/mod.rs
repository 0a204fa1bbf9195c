//! Random knowledge bases and brute-force oracles shared by the test targets.
#![allow(dead_code)]

use std::cmp::Ordering;
use std::path::PathBuf;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sunny::kb::{FeatureRow, KnowledgeBase, RuntimeRecord, SolverId};

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn reference_kb() -> KnowledgeBase {
    KnowledgeBase::load(&data_path("reference_features.csv"), &data_path("reference_runtimes.csv"), 1_800_000).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shape of a random knowledge base.
#[derive(Debug, Clone, Copy)]
pub struct RandomKb {
    pub solvers: usize,
    pub instances: usize,
    pub dims: usize,
    pub timeout_ms: u64,
    pub solve_probability: f64,
    /// Features on a small integer grid, so distance ties are common.
    pub grid: bool,
}

/// Every runtime is an even number of milliseconds so halving stays exact.
/// The timeout must be a multiple of 32 ms.
pub fn random_kb(shape: RandomKb, rng: &mut ChaCha8Rng) -> KnowledgeBase {
    assert_eq!(shape.timeout_ms % 32, 0);
    let solvers: Vec<SolverId> = (0..shape.solvers).map(|s| SolverId::new(format!("s{s}"))).collect();
    let mut rows = Vec::new();
    let mut recs = Vec::new();
    for i in 0..shape.instances {
        let id = format!("p{i:03}");
        let values = (0..shape.dims)
            .map(|_| if shape.grid { rng.random_range(0..4) as f64 } else { rng.random_range(-5.0..5.0) })
            .collect();
        rows.push(FeatureRow { instance: id.clone().into(), values, cost_ms: 0 });
        for s in &solvers {
            let solved = rng.random_bool(shape.solve_probability);
            // few distinct levels, so runtime ties are common
            let time_ms =
                if solved { 2 * rng.random_range(0..8u64) * (shape.timeout_ms / 16) } else { shape.timeout_ms };
            recs.push(RuntimeRecord { instance: id.clone().into(), solver: s.clone(), time_ms, solved });
        }
    }
    let names = (0..shape.dims).map(|d| format!("f{d}")).collect();
    KnowledgeBase::from_parts(shape.timeout_ms, names, solvers, rows, recs).unwrap()
}

/// Same instances and features with every runtime and the timeout scaled.
pub fn scale_kb(kb: &KnowledgeBase, c: Ratio<u64>) -> KnowledgeBase {
    let scale = |ms: u64| {
        let v = Ratio::from_integer(ms) * c;
        assert!(v.is_integer(), "scaling must stay on whole milliseconds");
        v.to_integer()
    };
    let rows = (0..kb.num_instances())
        .map(|i| FeatureRow { instance: kb.instances()[i].clone(), values: kb.features(i).to_vec(), cost_ms: 0 })
        .collect();
    let mut recs = Vec::new();
    for i in 0..kb.num_instances() {
        for s in 0..kb.num_solvers() {
            let r = kb.runtime(i, s);
            recs.push(RuntimeRecord {
                instance: kb.instances()[i].clone(),
                solver: kb.solvers()[s].clone(),
                time_ms: scale(r.time_ms),
                solved: r.solved,
            });
        }
    }
    KnowledgeBase::from_parts(scale(kb.timeout_ms()), kb.feature_names().to_vec(), kb.solvers().to_vec(), rows, recs)
        .unwrap()
}

/// Exhaustive sub-portfolio search over all 2^n subsets.
///
/// Returns (sorted names, solved count, average time) of the subset that
/// maximizes solved count, then minimizes size, average time, and the
/// sorted name list.
pub fn exhaustive_subportfolio(
    kb: &KnowledgeBase,
    neighbors: &[usize],
    portfolio: &[SolverId],
    budget_ms: u64,
) -> (Vec<SolverId>, usize, Ratio<u64>) {
    let n = portfolio.len();
    let k = neighbors.len() as u64;
    let mut best: Option<(Vec<SolverId>, usize, u64)> = None;
    for mask in 0u32..(1 << n) {
        let mut members: Vec<SolverId> =
            (0..n).filter(|b| mask & (1 << b) != 0).map(|b| portfolio[b].clone()).collect();
        members.sort();
        let idx: Vec<usize> = members.iter().map(|s| kb.solver_index(s.as_str()).unwrap()).collect();
        let solved = neighbors
            .iter()
            .filter(|&&i| {
                idx.iter().any(|&s| {
                    let r = kb.runtime(i, s);
                    r.solved && r.time_ms < budget_ms
                })
            })
            .count();
        let total: u64 = neighbors
            .iter()
            .flat_map(|&i| idx.iter().map(move |&s| (i, s)))
            .map(|(i, s)| {
                let r = kb.runtime(i, s);
                if r.solved && r.time_ms < budget_ms {
                    r.time_ms
                } else {
                    budget_ms
                }
            })
            .sum();
        let better = match &best {
            None => true,
            Some((bm, bs, bt)) => {
                let by_avg = || {
                    // total / (|S| k) compared by cross multiplication
                    let lhs = total as u128 * (bm.len() as u128 * k as u128);
                    let rhs = *bt as u128 * (members.len() as u128 * k as u128);
                    lhs.cmp(&rhs)
                };
                match solved.cmp(bs).reverse() {
                    Ordering::Less => true,
                    Ordering::Greater => false,
                    Ordering::Equal => match members.len().cmp(&bm.len()) {
                        Ordering::Less => true,
                        Ordering::Greater => false,
                        Ordering::Equal => match by_avg() {
                            Ordering::Less => true,
                            Ordering::Greater => false,
                            Ordering::Equal => members < *bm,
                        },
                    },
                }
            }
        };
        if better {
            best = Some((members, solved, total));
        }
    }
    let (members, solved, total) = best.unwrap();
    let avg = if members.is_empty() { Ratio::from_integer(0) } else { Ratio::new(total, members.len() as u64 * k) };
    (members, solved, avg)
}

/// Brute-force k-NN: scaled distance to every instance, full sort.
pub fn brute_force_neighbors(points: &[(String, Vec<f64>)], query: &[f64], k: usize) -> Vec<String> {
    let mut all: Vec<(f64, &String)> = points
        .iter()
        .map(|(id, p)| (p.iter().zip(query).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt(), id))
        .collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(b.1)));
    all.into_iter().take(k).map(|(_, id)| id.clone()).collect()
}
