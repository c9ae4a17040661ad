use ndarray::Array1;

use super::dominance::dominates_values;
use crate::error::{Error, Result};
use crate::measures::VectorMeasure;

const MAX_ATOMS: usize = 16;
const MASS_TOL: f64 = 1e-9;

/// Atoms `A ⊆ X` and `B ⊆ Y` with `μ(A) = ν(B)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetPair {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

impl SubsetPair {
    fn disjoint(&self) -> bool {
        self.a.iter().all(|x| !self.b.contains(x))
    }

    fn covered(&self) -> usize {
        let mut all: Vec<usize> = self.a.iter().chain(&self.b).copied().collect();
        all.sort_unstable();
        all.dedup();
        all.len()
    }
}

/// Result of a strong-domination scan.
#[derive(Debug, Clone, PartialEq)]
pub struct StrongOutcome {
    pub strong: bool,
    /// `μ(X) = ν(Y)` componentwise.
    pub totals_match: bool,
    /// Number of mass-matched pairs tested for dominance.
    pub checked: usize,
    /// Every failing pair; disjoint pairs first, then by atoms covered.
    pub failures: Vec<SubsetPair>,
}

impl StrongOutcome {
    pub fn witness(&self) -> Option<&SubsetPair> {
        self.failures.first()
    }
}

fn subset_sums(m: &VectorMeasure) -> Vec<(u32, Array1<f64>)> {
    let n = m.len();
    let d = m.dim();
    let mut sums: Vec<Array1<f64>> = vec![Array1::zeros(d); 1 << n];
    for mask in 1usize..(1 << n) {
        let low = mask.trailing_zeros() as usize;
        sums[mask] = &sums[mask & (mask - 1)] + &m.values().row(low);
    }
    sums.into_iter()
        .enumerate()
        .skip(1)
        .map(|(k, s)| (k as u32, s))
        .collect()
}

fn atoms(mask: u32) -> Vec<usize> {
    (0..32).filter(|&i| mask & (1 << i) != 0).collect()
}

/// `μ` strongly dominates `ν`: equal totals, and `μ|_A ≻ ν|_B` whenever
/// `μ(A) = ν(B)`.
pub fn strong_dominates(mu: &VectorMeasure, nu: &VectorMeasure) -> Result<StrongOutcome> {
    if mu.dim() != nu.dim() {
        return Err(Error::dim("μ and ν have different dimensions"));
    }
    if mu.len() > MAX_ATOMS || nu.len() > MAX_ATOMS {
        return Err(Error::SizeGuard(format!(
            "subset scan limited to {MAX_ATOMS} atoms per side"
        )));
    }
    let scale = mu.totals().iter().chain(nu.totals().iter()).fold(1.0f64, |a, v| a.max(v.abs()));
    let tol = MASS_TOL * scale;
    let totals_match = mu
        .totals()
        .iter()
        .zip(nu.totals().iter())
        .all(|(a, b)| (a - b).abs() <= tol);

    let left = subset_sums(mu);
    let mut right = subset_sums(nu);
    right.sort_by(|p, q| p.1[0].total_cmp(&q.1[0]).then(p.0.cmp(&q.0)));
    let keys: Vec<f64> = right.iter().map(|(_, s)| s[0]).collect();

    let mut failures = Vec::new();
    let mut checked = 0;
    for (amask, asum) in &left {
        let lo = keys.partition_point(|&k| k < asum[0] - tol);
        let hi = keys.partition_point(|&k| k <= asum[0] + tol);
        let mut hits: Vec<u32> = right[lo..hi]
            .iter()
            .filter(|(_, bsum)| bsum.iter().zip(asum).all(|(a, b)| (a - b).abs() <= tol))
            .map(|(b, _)| *b)
            .collect();
        if hits.is_empty() {
            continue;
        }
        hits.sort_unstable();
        let a = atoms(*amask);
        let restricted = mu.restrict(&a)?;
        for bmask in hits {
            let b = atoms(bmask);
            let target = nu.values().select(ndarray::Axis(0), &b);
            checked += 1;
            if !dominates_values(&restricted, &target)?.dominates {
                failures.push(SubsetPair { a: a.clone(), b });
            }
        }
    }
    failures.sort_by_key(|p| (!p.disjoint(), std::cmp::Reverse(p.covered())));
    Ok(StrongOutcome {
        strong: totals_match && failures.is_empty(),
        totals_match,
        checked,
        failures,
    })
}
