//! Seeded randomness shared by every simulated measurement.
//!
//! [`RandomSource`] stands in for both quantum measurement randomness and the
//! network's random verifier selection. Substreams for independent trials come
//! from [`RandomSource::split`], which hashes `seed ‖ index` with SHA-256 and
//! takes the first eight bytes (big-endian) as the child seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent child stream keyed by `index`. Does not advance `self`.
    pub fn split(&self, index: u64) -> RandomSource {
        RandomSource::new(split_seed(self.seed, index))
    }

    /// Uniform draw on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn fair_bit(&mut self) -> bool {
        self.rng.random::<bool>()
    }

    /// Uniform integer in `0..n`. `n` must be nonzero.
    pub fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Samples an index with probability proportional to `weights`.
    ///
    /// Rounding residue at the top of the cumulative sum falls to the last
    /// index with positive weight, so a zero-weight outcome is never returned.
    pub fn sample_weighted(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        let target = self.uniform() * total;
        let mut acc = 0.0;
        let mut last_positive = 0;
        for (i, &w) in weights.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            last_positive = i;
            acc += w;
            if target < acc {
                return i;
            }
        }
        last_positive
    }
}

/// `seed ‖ index` hashed with SHA-256; the leading eight bytes form the child seed.
pub fn split_seed(seed: u64, index: u64) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_be_bytes());
    hasher.update(index.to_be_bytes());
    let digest = hasher.finalize();
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    u64::from_be_bytes(head)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_seeds_equal_streams() {
        let mut a = RandomSource::new(42);
        let mut b = RandomSource::new(42);
        let xs: Vec<f64> = (0..16).map(|_| a.uniform()).collect();
        let ys: Vec<f64> = (0..16).map(|_| b.uniform()).collect();
        assert_eq!(xs, ys);
    }

    #[test]
    fn split_is_stable_and_distinct() {
        let root = RandomSource::new(7);
        assert_eq!(root.split(3).seed(), root.split(3).seed());
        assert_ne!(root.split(3).seed(), root.split(4).seed());
        assert_ne!(root.split(0).seed(), 7);
    }

    #[test]
    fn weighted_sampling_skips_zero_weights() {
        let mut rng = RandomSource::new(1);
        for _ in 0..1000 {
            let i = rng.sample_weighted(&[0.0, 0.5, 0.0, 0.5, 0.0]);
            assert!(i == 1 || i == 3);
        }
    }
}
