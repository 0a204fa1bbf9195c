//! Repeated k-fold partitioning.
//!
//! For each repeat the instances are put in ascending id order and shuffled
//! with a Fisher-Yates pass driven by ChaCha8. The generator key is 32 bytes:
//! the seed as little-endian u64, the zero-based repeat index as
//! little-endian u64, then 16 zero bytes. Going from the last position `i`
//! down to 1, the swap partner is `(next_u64() * (i + 1)) >> 64` computed in
//! 128 bits. The shuffled list is then cut into contiguous folds, the first
//! `n % folds` of them one instance larger.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kb::{InstanceId, KnowledgeBase};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub repeats: usize,
    pub folds: usize,
    pub seed: u64,
    // repeat -> fold -> ascending instance indices
    assignment: Vec<Vec<Vec<usize>>>,
}

impl FoldPlan {
    /// Test instances of one cell, as knowledge-base indices.
    pub fn test(&self, repeat: usize, fold: usize) -> &[usize] {
        &self.assignment[repeat][fold]
    }

    /// Union of every other fold of the repeat, ascending.
    pub fn training(&self, repeat: usize, fold: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.assignment[repeat]
            .iter()
            .enumerate()
            .filter(|&(f, _)| f != fold)
            .flat_map(|(_, ids)| ids.iter().copied())
            .collect();
        out.sort_unstable();
        out
    }

    pub fn test_ids(&self, kb: &KnowledgeBase, repeat: usize, fold: usize) -> Vec<InstanceId> {
        self.test(repeat, fold).iter().map(|&i| kb.instances()[i].clone()).collect()
    }

    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.repeats).flat_map(move |r| (0..self.folds).map(move |f| (r, f)))
    }
}

fn shuffle_key(seed: u64, repeat: usize) -> [u8; 32] {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(repeat as u64).to_le_bytes());
    key
}

pub fn make_folds(kb: &KnowledgeBase, repeats: usize, folds: usize, seed: u64) -> Result<FoldPlan> {
    let n = kb.num_instances();
    if repeats == 0 {
        return Err(Error::InvalidConfig("repeats must be at least 1".into()));
    }
    if folds < 2 {
        return Err(Error::InvalidConfig("folds must be at least 2".into()));
    }
    if folds > n {
        return Err(Error::TooManyFolds { folds, instances: n });
    }
    let mut canonical: Vec<usize> = (0..n).collect();
    canonical.sort_by(|&a, &b| kb.instances()[a].cmp(&kb.instances()[b]));

    let assignment = (0..repeats)
        .map(|r| {
            let mut order = canonical.clone();
            let mut rng = ChaCha8Rng::from_seed(shuffle_key(seed, r));
            for i in (1..n).rev() {
                let j = ((rng.next_u64() as u128 * (i as u128 + 1)) >> 64) as usize;
                order.swap(i, j);
            }
            let (base, extra) = (n / folds, n % folds);
            let mut start = 0;
            (0..folds)
                .map(|f| {
                    let len = base + usize::from(f < extra);
                    let mut fold = order[start..start + len].to_vec();
                    start += len;
                    fold.sort_unstable();
                    fold
                })
                .collect()
        })
        .collect();

    Ok(FoldPlan { repeats, folds, seed, assignment })
}
