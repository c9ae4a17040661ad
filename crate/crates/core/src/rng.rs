//! Seeded random streams shared by the generators and randomized checks.

use rand::{Rng, SeedableRng};
pub use rand_xoshiro::SplitMix64;

/// A reproducible stream for `seed`.
pub fn seeded(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}

/// Uniform draw from `[lo, hi)`.
pub fn uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// A vector of `n` positive weights summing to `mass`.
pub fn simplex_point(rng: &mut impl Rng, n: usize, mass: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| uniform(rng, 0.05, 1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v * mass / s).collect()
}

/// A row-stochastic `rows × cols` matrix with strictly positive entries.
pub fn stochastic(rng: &mut impl Rng, rows: usize, cols: usize) -> ndarray::Array2<f64> {
    let mut m = ndarray::Array2::zeros((rows, cols));
    for r in 0..rows {
        for (c, v) in simplex_point(rng, cols, 1.0).into_iter().enumerate() {
            m[[r, c]] = v;
        }
    }
    m
}
