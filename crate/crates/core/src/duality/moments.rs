use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::lp::{self, LpProblem, LpStatus, RowKind, Sense};
use crate::scalar_ot::Feasibility;

/// Find `μ ≥ 0` on the atoms with `Σₓ Mᵢ(x) μ(x) = mᵢ` for every row `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentProblem {
    /// `k × |X|`, row `i` samples the moment function `Mᵢ`.
    pub m_matrix: Array2<f64>,
    pub target: Array1<f64>,
}

impl MomentProblem {
    pub fn new(m_matrix: Array2<f64>, target: Array1<f64>) -> Result<Self> {
        if m_matrix.nrows() != target.len() {
            return Err(Error::dim(format!(
                "{} moment functions but {} targets",
                m_matrix.nrows(),
                target.len()
            )));
        }
        if m_matrix.ncols() == 0 {
            return Err(Error::invalid("moment problem needs at least one atom"));
        }
        if m_matrix.iter().chain(&target).any(|v| !v.is_finite()) {
            return Err(Error::invalid("moment data has a non-finite entry"));
        }
        Ok(Self { m_matrix, target })
    }

    /// Polynomial moments `1, x, …, x^degree` sampled at `points`.
    pub fn polynomial(points: &[f64], target: Array1<f64>) -> Result<Self> {
        let k = target.len();
        let m = Array2::from_shape_fn((k, points.len()), |(i, j)| points[j].powi(i as i32));
        Self::new(m, target)
    }

    /// Largest `|Mμ − m|` entry.
    pub fn residual(&self, mu: &[f64]) -> f64 {
        let r = self.m_matrix.dot(&Array1::from(mu.to_vec())) - &self.target;
        r.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// `(min_x αᵀM(x), αᵀm)`.
    pub fn certificate_check(&self, alpha: &[f64]) -> (f64, f64) {
        let a = Array1::from(alpha.to_vec());
        let low = a.dot(&self.m_matrix).iter().copied().fold(f64::INFINITY, f64::min);
        (low, a.dot(&self.target))
    }
}

/// Solve the moment problem, or return `α` with `αᵀM ≥ 0` on every atom and
/// `αᵀm < 0`.
///
/// A primal answer that fails validation is replaced by a direct search for
/// `α` over the box `[−1, 1]ᵏ`.
pub fn moment_feasible(p: &MomentProblem) -> Result<Feasibility<Vec<f64>, Vec<f64>>> {
    let (k, n) = p.m_matrix.dim();
    let mut lp = LpProblem::new(Sense::Min, vec![0.0; n]);
    for i in 0..k {
        let coeffs = (0..n)
            .filter(|&j| p.m_matrix[[i, j]] != 0.0)
            .map(|j| (j, p.m_matrix[[i, j]]))
            .collect();
        lp.add_row(coeffs, RowKind::Eq, p.target[i]);
    }
    let sol = lp::solve(&lp)?;
    match sol.status {
        LpStatus::Optimal => {
            let mu: Vec<f64> = sol.primal.iter().map(|v| v.max(0.0)).collect();
            let scale = 1.0 + p.target.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if p.residual(&mu) <= 1e-9 * scale {
                return Ok(Feasibility::Feasible(mu));
            }
        }
        LpStatus::Infeasible => {
            let y = sol.farkas.expect("certificate present").y;
            let norm = y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let alpha: Vec<f64> = y.iter().map(|v| v / norm).collect();
            if valid(p, &alpha) {
                return Ok(Feasibility::Infeasible(alpha));
            }
        }
        LpStatus::Unbounded => return Err(Error::NumericalBreakdown("moment LP unbounded".into())),
    }
    let alpha = cone_search(p)?;
    if valid(p, &alpha) {
        return Ok(Feasibility::Infeasible(alpha));
    }
    Err(Error::NumericalBreakdown(
        "moment vector lies within solver tolerance of the cone boundary".into(),
    ))
}

fn valid(p: &MomentProblem, alpha: &[f64]) -> bool {
    let (low, integral) = p.certificate_check(alpha);
    low >= -1e-12 && integral < -1e-9
}

/// `min αᵀm` over `αᵀM(x) ≥ 0` for every atom and `|αᵢ| ≤ 1`, read off
/// the duals of `min ‖s‖₁` subject to `Mμ + s = m`, `μ ≥ 0`.
fn cone_search(p: &MomentProblem) -> Result<Vec<f64>> {
    let (k, n) = p.m_matrix.dim();
    let mut obj = vec![0.0; n];
    obj.extend(std::iter::repeat_n(1.0, 2 * k));
    let mut lp = LpProblem::new(Sense::Min, obj);
    for i in 0..k {
        let mut coeffs: Vec<(usize, f64)> = (0..n)
            .filter(|&j| p.m_matrix[[i, j]] != 0.0)
            .map(|j| (j, p.m_matrix[[i, j]]))
            .collect();
        coeffs.push((n + 2 * i, 1.0));
        coeffs.push((n + 2 * i + 1, -1.0));
        lp.add_row(coeffs, RowKind::Eq, p.target[i]);
    }
    let sol = lp::solve(&lp)?.into_optimal()?;
    Ok(sol.dual.iter().map(|y| -y).collect())
}
