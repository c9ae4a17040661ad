use ndarray::Array2;

use super::dominance::{dominates_values, DominanceCert};
use crate::error::{Error, Result};
use crate::lp::{self, LpProblem, RowKind, Sense};
use crate::measures::VectorMeasure;

const MAX_ATOMS: usize = 20;
const MASS_TOL: f64 = 1e-9;

/// How splittings of `X` are allowed to act on atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RangeMode {
    /// Fractional `g₁,…,gₙ ≥ 0` with `Σgᵢ ≡ 1`.
    Relaxed,
    /// Each atom goes to exactly one block.
    AtomicExact,
}

/// Membership of `(s₁,…,sₙ)` (rows of `s`) in the range of `μ`.
///
/// Returns the splitting weights `g` (`|X| × n`) when `s` is reachable.
pub fn multi_range(mu: &VectorMeasure, s: &Array2<f64>, mode: RangeMode) -> Result<Option<Array2<f64>>> {
    if s.ncols() != mu.dim() {
        return Err(Error::dim(format!("targets have {} components, μ has {}", s.ncols(), mu.dim())));
    }
    if s.nrows() == 0 {
        return Err(Error::invalid("need at least one block"));
    }
    match mode {
        RangeMode::Relaxed => Ok(match dominates_values(mu, s)?.cert {
            DominanceCert::Kernel(k) => Some(k.matrix().clone()),
            _ => None,
        }),
        RangeMode::AtomicExact => atomic(mu, s),
    }
}

fn atomic(mu: &VectorMeasure, s: &Array2<f64>) -> Result<Option<Array2<f64>>> {
    let atoms: Vec<usize> = (0..mu.len())
        .filter(|&x| mu.values().row(x).iter().any(|&v| v != 0.0))
        .collect();
    if atoms.len() > MAX_ATOMS {
        return Err(Error::SizeGuard(format!(
            "{} atoms exceed the exact enumeration limit {MAX_ATOMS}",
            atoms.len()
        )));
    }
    let (n, d) = s.dim();
    let tol = MASS_TOL * s.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let mut sums = Array2::<f64>::zeros((n, d));
    let mut assign = vec![0usize; atoms.len()];
    let found = search(mu, s, &atoms, 0, &mut sums, &mut assign, tol);
    Ok(found.then(|| {
        let mut g = Array2::zeros((mu.len(), n));
        for (k, &x) in atoms.iter().enumerate() {
            g[[x, assign[k]]] = 1.0;
        }
        for x in 0..mu.len() {
            if !atoms.contains(&x) {
                g[[x, 0]] = 1.0;
            }
        }
        g
    }))
}

fn search(
    mu: &VectorMeasure,
    s: &Array2<f64>,
    atoms: &[usize],
    k: usize,
    sums: &mut Array2<f64>,
    assign: &mut [usize],
    tol: f64,
) -> bool {
    if k == atoms.len() {
        return sums.iter().zip(s).all(|(a, b)| (a - b).abs() <= tol);
    }
    let row = mu.values().row(atoms[k]);
    for b in 0..s.nrows() {
        let fits = (0..s.ncols()).all(|c| sums[[b, c]] + row[c] <= s[[b, c]] + tol);
        if !fits {
            continue;
        }
        sums.row_mut(b).scaled_add(1.0, &row);
        assign[k] = b;
        if search(mu, s, atoms, k + 1, sums, assign, tol) {
            return true;
        }
        sums.row_mut(b).scaled_add(-1.0, &row);
    }
    false
}

/// For `d = 2`: the interval of second components `b` such that `(a, b)`
/// is the first block of a relaxed two-block splitting of `μ`.
pub fn range_slice(mu: &VectorMeasure, a: f64) -> Result<Option<(f64, f64)>> {
    if mu.dim() != 2 {
        return Err(Error::dim("slices are defined for two components"));
    }
    let v = mu.values();
    let extreme = |sense| -> Result<Option<f64>> {
        let mut p = LpProblem::new(sense, v.column(1).to_vec());
        for j in 0..mu.len() {
            p.set_bounds(j, 0.0, 1.0);
        }
        let coeffs = (0..mu.len())
            .filter(|&x| v[[x, 0]] != 0.0)
            .map(|x| (x, v[[x, 0]]))
            .collect();
        p.add_row(coeffs, RowKind::Eq, a);
        let sol = lp::solve(&p)?;
        Ok(sol.is_optimal().then_some(sol.value))
    };
    Ok(match (extreme(Sense::Min)?, extreme(Sense::Max)?) {
        (Some(lo), Some(hi)) => Some((lo, hi)),
        _ => None,
    })
}
