use ndarray::Array2;

use super::dominance::{dominates_values, DominanceCert};
use crate::error::{Error, Result};
use crate::measures::VectorMeasure;

const MAX_PARTITIONS: u128 = 100_000;

fn bell(n: usize) -> u128 {
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = vec![*row.last().expect("nonempty")];
        for v in &row {
            let s = next.last().expect("nonempty").saturating_add(*v);
            next.push(s);
        }
        row = next;
    }
    row[0]
}

/// Partitions of `{0,…,m−1}` into at most `n` nonempty blocks.
///
/// Enumerated as restricted growth strings, so each partition appears once.
pub fn set_partitions(m: usize, n: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    if m == 0 {
        return out;
    }
    let mut a = vec![0usize; m];
    loop {
        let blocks = a.iter().copied().max().unwrap_or(0) + 1;
        let mut parts = vec![Vec::new(); blocks];
        for (y, &b) in a.iter().enumerate() {
            parts[b].push(y);
        }
        out.push(parts);
        // next restricted growth string with max label < n
        let mut i = m;
        loop {
            if i == 1 {
                return out;
            }
            i -= 1;
            let prefix_max = a[..i].iter().copied().max().unwrap_or(0);
            if a[i] <= prefix_max && a[i] + 1 < n {
                a[i] += 1;
                a[i + 1..].iter_mut().for_each(|v| *v = 0);
                break;
            }
        }
    }
}

/// Result of testing `μ ≻ₙ ν`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionOutcome {
    pub holds: bool,
    pub checked: usize,
    /// On success every checked partition; on failure the failing one.
    pub cert: DominanceCert,
    /// Farkas pair for the failing block image.
    pub farkas: Option<DominanceCert>,
}

impl PartitionOutcome {
    pub fn witness(&self) -> Option<&Vec<Vec<usize>>> {
        match (&self.cert, self.holds) {
            (DominanceCert::PartitionFamily(f), false) => f.first(),
            _ => None,
        }
    }
}

/// `μ ≻ₙ ν`: every image of `ν` under a partition into `≤ n` blocks is
/// dominated by `μ`.
pub fn dominates_n(mu: &VectorMeasure, nu: &VectorMeasure, n: usize) -> Result<PartitionOutcome> {
    let m = nu.len();
    if n == 0 || n > m {
        return Err(Error::invalid(format!("need 1 ≤ n ≤ |Y| = {m}, got {n}")));
    }
    if mu.dim() != nu.dim() {
        return Err(Error::dim("μ and ν have different dimensions"));
    }
    if bell(m) > MAX_PARTITIONS {
        return Err(Error::SizeGuard(format!(
            "Bell({m}) = {} partitions exceeds {MAX_PARTITIONS}",
            bell(m)
        )));
    }
    let parts = set_partitions(m, n);
    for (k, blocks) in parts.iter().enumerate() {
        let image = Array2::from_shape_fn((blocks.len(), mu.dim()), |(b, c)| {
            blocks[b].iter().map(|&y| nu.values()[[y, c]]).sum()
        });
        let r = dominates_values(mu, &image)?;
        if !r.dominates {
            return Ok(PartitionOutcome {
                holds: false,
                checked: k + 1,
                cert: DominanceCert::PartitionFamily(vec![blocks.clone()]),
                farkas: Some(r.cert),
            });
        }
    }
    Ok(PartitionOutcome {
        holds: true,
        checked: parts.len(),
        cert: DominanceCert::PartitionFamily(parts),
        farkas: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_numbers() {
        let b: Vec<u128> = (0..8).map(bell).collect();
        assert_eq!(b, vec![1, 1, 2, 5, 15, 52, 203, 877]);
    }

    #[test]
    fn partition_counts_match_stirling() {
        // S(5,1)+S(5,2)+S(5,3) = 1 + 15 + 25
        assert_eq!(set_partitions(5, 3).len(), 41);
        assert_eq!(set_partitions(6, 6).len() as u128, bell(6));
        assert_eq!(set_partitions(4, 1), vec![vec![vec![0, 1, 2, 3]]]);
    }

    #[test]
    fn blocks_cover_once() {
        for p in set_partitions(5, 5) {
            let mut all: Vec<usize> = p.iter().flatten().copied().collect();
            all.sort_unstable();
            assert_eq!(all, vec![0, 1, 2, 3, 4]);
            assert!(p.iter().all(|b| !b.is_empty()));
        }
    }
}
