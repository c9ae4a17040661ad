use ndarray::Array2;

use super::{check_cost, ensure_gap, scatter, support, DualExtras, OtResult};
use crate::error::{Error, Result};
use crate::lp::{self, LpProblem, RowKind, Sense};
use crate::measures::{ScalarMeasure, TransportPlan};

/// Transport exactly `m` units with marginals bounded by `μ` and `ν`.
///
/// The row multipliers come out nonpositive: `ψ, φ ≤ 0` and a free `λ`
/// with `ψ(x) + φ(y) + λ ≤ c(x,y)`, so that
/// `value = ∫ψ dμ + ∫φ dν + λ m`.
pub fn solve_partial(mu: &ScalarMeasure, nu: &ScalarMeasure, c: &Array2<f64>, m: f64) -> Result<OtResult> {
    let (nx, ny) = (mu.weights().len(), nu.weights().len());
    check_cost(c, nx, ny)?;
    let cap = mu.mass().min(nu.mass());
    if !(m.is_finite() && m >= 0.0 && m <= cap + 1e-12) {
        return Err(Error::invalid(format!("mass {m} outside [0, {cap}]")));
    }
    let m = m.min(cap);
    let rows = support(mu.weights());
    let cols = support(nu.weights());
    let w = cols.len();

    let mut p = LpProblem::new(Sense::Min, Vec::new());
    for &x in &rows {
        for &y in &cols {
            p.add_var(c[[x, y]], 0.0, f64::INFINITY);
        }
    }
    for (i, &x) in rows.iter().enumerate() {
        p.add_row((0..w).map(|j| (i * w + j, 1.0)).collect(), RowKind::Le, mu.weights()[x]);
    }
    for (j, &y) in cols.iter().enumerate() {
        p.add_row((0..rows.len()).map(|i| (i * w + j, 1.0)).collect(), RowKind::Le, nu.weights()[y]);
    }
    p.add_row((0..rows.len() * w).map(|k| (k, 1.0)).collect(), RowKind::Eq, m);

    let sol = lp::solve(&p)?.into_optimal()?;
    let lambda = sol.dual[rows.len() + w];
    let mut psi = vec![0.0; nx];
    let mut phi = vec![0.0; ny];
    for (k, &x) in rows.iter().enumerate() {
        psi[x] = sol.dual[k];
    }
    for (k, &y) in cols.iter().enumerate() {
        phi[y] = sol.dual[rows.len() + k];
    }
    // atoms without mass carry the least restrictive nonpositive potential
    for x in 0..nx {
        if mu.weights()[x] == 0.0 {
            psi[x] = (0..ny)
                .map(|y| c[[x, y]] - phi[y] - lambda)
                .fold(0.0, f64::min);
        }
    }
    for y in 0..ny {
        if nu.weights()[y] == 0.0 {
            phi[y] = (0..nx)
                .map(|x| c[[x, y]] - psi[x] - lambda)
                .fold(0.0, f64::min);
        }
    }
    let dual_value = mu.integrate(&psi) + nu.integrate(&phi) + lambda * m;
    ensure_gap(sol.value, dual_value)?;
    let plan = scatter(&rows, &cols, &sol.primal, nx, ny);
    Ok(OtResult {
        value: sol.value,
        dual_value,
        plan: TransportPlan::new(mu.space().clone(), nu.space().clone(), plan)?,
        psi,
        phi,
        extras: DualExtras {
            lambda: Some(lambda),
            xi: None,
        },
        pivots: sol.diagnostics.pivots,
    })
}
