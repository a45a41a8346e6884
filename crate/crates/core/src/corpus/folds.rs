use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Fraction of each training split held out for development.
pub const DEV_FRACTION: f64 = 0.1;

/// Assignment of instance indices to `k` folds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub assignment: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldSplit {
    pub train: Vec<usize>,
    pub dev: Vec<usize>,
    pub test: Vec<usize>,
}

/// Seeded shuffle, then round-robin assignment.
pub fn make_folds(n: usize, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::invalid(format!("need at least 2 folds, got {k}")));
    }
    if k > n {
        return Err(Error::invalid(format!("{k} folds requested for {n} instances")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut assignment = vec![0; n];
    for (pos, &idx) in order.iter().enumerate() {
        assignment[idx] = pos % k;
    }
    Ok(FoldPlan { k, seed, assignment })
}

impl FoldPlan {
    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignment {
            sizes[f] += 1;
        }
        sizes
    }

    /// Test = fold `fold`; the remaining instances are split into train and a
    /// seeded dev sample of [`DEV_FRACTION`] (at least one when possible).
    pub fn split(&self, fold: usize) -> FoldSplit {
        let test: Vec<usize> = (0..self.assignment.len()).filter(|&i| self.assignment[i] == fold).collect();
        let mut rest: Vec<usize> = (0..self.assignment.len()).filter(|&i| self.assignment[i] != fold).collect();
        let n_dev = if rest.len() >= 2 {
            ((rest.len() as f64 * DEV_FRACTION).round() as usize).max(1)
        } else {
            0
        };
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(fold as u64 + 1)));
        rest.shuffle(&mut rng);
        let mut dev = rest.split_off(rest.len() - n_dev);
        rest.sort_unstable();
        dev.sort_unstable();
        FoldSplit { train: rest, dev, test }
    }
}
