//! Synthetic knowledge bases with planted clusters.
//!
//! Instance `i` belongs to cluster `i % clusters`. Each cluster has a random
//! center in [-1, 1] on every informative feature; instances add uniform
//! noise in [-noise, noise]. Cluster `c` has one fast solver,
//! `c % solvers`, which solves its instances in under a tenth of the
//! timeout. Every other solver times out with probability
//! `timeout_probability` and otherwise solves slowly, in [T/2, T).
//! Constant features come last and are never informative.

use rand::{Rng, RngCore};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kb::{FeatureRow, KnowledgeBase, RuntimeRecord, SolverId};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticParams {
    pub clusters: usize,
    pub instances: usize,
    pub solvers: usize,
    /// Total feature columns, constant ones included.
    pub features: usize,
    pub constant_features: usize,
    pub noise: f64,
    pub timeout_ms: u64,
    pub timeout_probability: f64,
    /// Feature extraction cost drawn from [0, max]; 0 omits the column.
    pub max_feature_cost_ms: u64,
    pub seed: u64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        Self {
            clusters: 4,
            instances: 200,
            solvers: 4,
            features: 8,
            constant_features: 0,
            noise: 0.15,
            timeout_ms: 1_800_000,
            timeout_probability: 0.7,
            max_feature_cost_ms: 0,
            seed: 0,
        }
    }
}

fn seeded(seed: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(b"syntheti");
    ChaCha8Rng::from_seed(key)
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

pub fn generate(p: &SyntheticParams) -> Result<KnowledgeBase> {
    if p.clusters == 0 || p.instances == 0 || p.solvers == 0 {
        return Err(Error::InvalidConfig("clusters, instances, and solvers must be positive".into()));
    }
    if p.constant_features > p.features {
        return Err(Error::InvalidConfig("more constant features than features".into()));
    }
    if !(p.noise >= 0.0 && p.noise.is_finite()) || !(0.0..=1.0).contains(&p.timeout_probability) {
        return Err(Error::InvalidConfig("noise must be >= 0 and timeout probability in [0, 1]".into()));
    }
    if p.timeout_ms < 20 {
        return Err(Error::InvalidConfig("timeout must be at least 20 ms".into()));
    }
    let informative = p.features - p.constant_features;
    let mut rng = seeded(p.seed);

    let centers: Vec<Vec<f64>> =
        (0..p.clusters).map(|_| (0..informative).map(|_| rng.random_range(-1.0..=1.0)).collect()).collect();
    let constants: Vec<f64> = (0..p.constant_features).map(|j| j as f64 + 0.5).collect();
    let solvers: Vec<SolverId> = (0..p.solvers).map(|s| SolverId::new(format!("s{:02}", s + 1))).collect();
    let t = p.timeout_ms;

    let mut rows = Vec::with_capacity(p.instances);
    let mut records = Vec::with_capacity(p.instances * p.solvers);
    for i in 0..p.instances {
        let cluster = i % p.clusters;
        let id = format!("i{:05}", i + 1);
        let mut values: Vec<f64> = centers[cluster]
            .iter()
            .map(|c| {
                let jitter = if p.noise > 0.0 { rng.random_range(-p.noise..=p.noise) } else { 0.0 };
                round6(c + jitter)
            })
            .collect();
        values.extend_from_slice(&constants);
        let cost_ms = if p.max_feature_cost_ms > 0 { rng.random_range(0..=p.max_feature_cost_ms) } else { 0 };
        rows.push(FeatureRow { instance: id.clone().into(), values, cost_ms });

        let fast = cluster % p.solvers;
        for (s, solver) in solvers.iter().enumerate() {
            // one draw per cell keeps the stream aligned whatever the branch
            let draw = rng.next_u64();
            let (time_ms, solved) = if s == fast {
                (1 + draw % (t / 10 - 1), true)
            } else if (draw >> 11) as f64 / (1u64 << 53) as f64 <= p.timeout_probability {
                (t, false)
            } else {
                (t / 2 + (draw % (t - t / 2)), true)
            };
            records.push(RuntimeRecord { instance: id.clone().into(), solver: solver.clone(), time_ms, solved });
        }
    }
    let names = (1..=p.features).map(|j| format!("f{j}")).collect();
    KnowledgeBase::from_parts(t, names, solvers, rows, records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::ScalingParams;

    #[test]
    fn constants_are_dropped_by_scaling() {
        let p = SyntheticParams { features: 10, constant_features: 3, instances: 60, seed: 5, ..Default::default() };
        let kb = generate(&p).unwrap();
        let params = ScalingParams::fit_all(&kb).unwrap();
        assert_eq!(params.retained().len(), 7);
        assert_eq!(params.retained(), &[0, 1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn deterministic_output() {
        let p = SyntheticParams { max_feature_cost_ms: 3_000, seed: 42, ..Default::default() };
        let a = generate(&p).unwrap();
        let b = generate(&p).unwrap();
        assert_eq!(a.to_features_csv(), b.to_features_csv());
        assert_eq!(a.to_runtimes_csv(), b.to_runtimes_csv());
        let c = generate(&SyntheticParams { seed: 43, ..p }).unwrap();
        assert_ne!(a.to_runtimes_csv(), c.to_runtimes_csv());
    }

    #[test]
    fn planted_solver_is_fast_on_its_cluster() {
        let p = SyntheticParams { clusters: 3, solvers: 5, instances: 90, seed: 1, ..Default::default() };
        let kb = generate(&p).unwrap();
        for i in 0..kb.num_instances() {
            let r = kb.runtime(i, i % 3);
            assert!(r.solved && r.time_ms < p.timeout_ms / 10);
            for s in 0..5 {
                let r = kb.runtime(i, s);
                assert!(!r.solved || r.time_ms < p.timeout_ms);
            }
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(generate(&SyntheticParams { clusters: 0, ..Default::default() }).is_err());
        assert!(generate(&SyntheticParams { constant_features: 9, ..Default::default() }).is_err());
        assert!(generate(&SyntheticParams { timeout_probability: 1.5, ..Default::default() }).is_err());
    }
}
