use ndarray::{Array2, Array3};

use super::Feasibility;
use crate::error::{Error, Result};
use crate::lp::{self, LpProblem, LpStatus, RowKind, Sense};
use crate::measures::ScalarMeasure;

const MAX_CELLS: usize = 1_000_000;

/// Optimal coupling of several marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiResult {
    pub value: f64,
    pub dual_value: f64,
    pub shape: Vec<usize>,
    /// Plan over the product space in row-major order.
    pub plan: Vec<f64>,
    /// One potential per marginal with `Σᵢ ψᵢ(xᵢ) ≤ c(x₁,…,x_k)`.
    pub potentials: Vec<Vec<f64>>,
}

impl MultiResult {
    /// Marginal of the plan on factor `axis`.
    pub fn marginal(&self, axis: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.shape[axis]];
        for (idx, &v) in self.plan.iter().enumerate() {
            out[unravel(idx, &self.shape)[axis]] += v;
        }
        out
    }
}

fn unravel(mut idx: usize, shape: &[usize]) -> Vec<usize> {
    let mut out = vec![0; shape.len()];
    for k in (0..shape.len()).rev() {
        out[k] = idx % shape[k];
        idx /= shape[k];
    }
    out
}

/// `min ∫c dπ` over plans on `X₁ × … × X_k` with the given marginals.
///
/// `cost` is indexed row-major over the product of the marginal spaces.
pub fn solve_multimarginal(marginals: &[ScalarMeasure], cost: &[f64]) -> Result<MultiResult> {
    if marginals.is_empty() {
        return Err(Error::invalid("need at least one marginal"));
    }
    let shape: Vec<usize> = marginals.iter().map(|m| m.weights().len()).collect();
    let cells = shape
        .iter()
        .try_fold(1usize, |acc, &s| acc.checked_mul(s))
        .filter(|&c| c <= MAX_CELLS)
        .ok_or_else(|| Error::SizeGuard(format!("product space {shape:?} exceeds {MAX_CELLS} cells")))?;
    if cost.len() != cells {
        return Err(Error::dim(format!("cost has {} entries for {cells} cells", cost.len())));
    }
    let total = marginals[0].mass();
    if marginals.iter().any(|m| (m.mass() - total).abs() > 1e-9) {
        return Err(Error::invalid("marginals have different total masses"));
    }
    let mut p = LpProblem::new(Sense::Min, cost.to_vec());
    let mut row_of = Vec::new();
    let mut offset = 0;
    for m in marginals {
        row_of.push(offset);
        for &w in m.weights() {
            p.add_row(Vec::new(), RowKind::Eq, w);
        }
        offset += m.weights().len();
    }
    for idx in 0..cells {
        for (k, &i) in unravel(idx, &shape).iter().enumerate() {
            p.rows[row_of[k] + i].coeffs.push((idx, 1.0));
        }
    }
    let sol = lp::solve(&p)?.into_optimal()?;
    let potentials: Vec<Vec<f64>> = (0..shape.len())
        .map(|k| sol.dual[row_of[k]..row_of[k] + shape[k]].to_vec())
        .collect();
    let dual_value = marginals
        .iter()
        .zip(&potentials)
        .map(|(m, psi)| m.integrate(psi))
        .sum();
    super::ensure_gap(sol.value, dual_value)?;
    Ok(MultiResult {
        value: sol.value,
        dual_value,
        shape,
        plan: sol.primal,
        potentials,
    })
}

/// A plan on `X × Y × Z`.
pub type GluePlan = Array3<f64>;

/// Functions `ψ(x,y)`, `φ(y,z)` and optionally `ξ(x,z)` whose sum is
/// nonnegative everywhere while their integral against the data is negative.
#[derive(Debug, Clone, PartialEq)]
pub struct GlueCert {
    pub psi: Array2<f64>,
    pub phi: Array2<f64>,
    pub xi: Option<Array2<f64>>,
    pub integral: f64,
}

impl GlueCert {
    /// Smallest value of `ψ(x,y) + φ(y,z) + ξ(x,z)` over the triple product.
    pub fn min_sum(&self) -> f64 {
        let (nx, ny) = self.psi.dim();
        let nz = self.phi.ncols();
        let mut best = f64::INFINITY;
        for x in 0..nx {
            for y in 0..ny {
                for z in 0..nz {
                    let s = self.psi[[x, y]]
                        + self.phi[[y, z]]
                        + self.xi.as_ref().map_or(0.0, |xi| xi[[x, z]]);
                    best = best.min(s);
                }
            }
        }
        best
    }
}

/// Find `π` on `X × Y × Z` with marginal `μ` on `X × Y`, `ν` on `Y × Z`
/// and, when given, `λ` on `X × Z`.
pub fn glue_feasible(
    mu: &Array2<f64>,
    nu: &Array2<f64>,
    lambda: Option<&Array2<f64>>,
) -> Result<Feasibility<GluePlan, GlueCert>> {
    let (nx, ny) = mu.dim();
    let nz = nu.ncols();
    if nu.nrows() != ny {
        return Err(Error::dim("μ and ν disagree on the size of Y"));
    }
    if let Some(l) = lambda {
        if l.dim() != (nx, nz) {
            return Err(Error::dim("λ must live on X × Z"));
        }
    }
    for v in mu.iter().chain(nu.iter()).chain(lambda.into_iter().flatten()) {
        if !v.is_finite() || *v < 0.0 {
            return Err(Error::invalid("glue data must be nonnegative and finite"));
        }
    }
    let var = |x: usize, y: usize, z: usize| (x * ny + y) * nz + z;
    let mut p = LpProblem::feasibility(nx * ny * nz);
    for x in 0..nx {
        for y in 0..ny {
            p.add_row((0..nz).map(|z| (var(x, y, z), 1.0)).collect(), RowKind::Eq, mu[[x, y]]);
        }
    }
    for y in 0..ny {
        for z in 0..nz {
            p.add_row((0..nx).map(|x| (var(x, y, z), 1.0)).collect(), RowKind::Eq, nu[[y, z]]);
        }
    }
    if let Some(l) = lambda {
        for x in 0..nx {
            for z in 0..nz {
                p.add_row((0..ny).map(|y| (var(x, y, z), 1.0)).collect(), RowKind::Eq, l[[x, z]]);
            }
        }
    }
    let sol = lp::solve(&p)?;
    match sol.status {
        LpStatus::Optimal => {
            let plan = Array3::from_shape_vec((nx, ny, nz), sol.primal.iter().map(|v| v.max(0.0)).collect())
                .expect("shape matches variable count");
            Ok(Feasibility::Feasible(plan))
        }
        LpStatus::Infeasible => {
            let y = sol.farkas.expect("certificate present").y;
            let psi = Array2::from_shape_vec((nx, ny), y[..nx * ny].to_vec()).expect("shape");
            let phi = Array2::from_shape_vec((ny, nz), y[nx * ny..nx * ny + ny * nz].to_vec()).expect("shape");
            let xi = lambda.map(|_| {
                Array2::from_shape_vec((nx, nz), y[nx * ny + ny * nz..].to_vec()).expect("shape")
            });
            let integral = (&psi * mu).sum()
                + (&phi * nu).sum()
                + xi.as_ref().zip(lambda).map_or(0.0, |(a, b)| (a * b).sum());
            let cert = GlueCert {
                psi,
                phi,
                xi,
                integral,
            };
            if cert.min_sum() < -1e-9 || integral >= -1e-9 {
                return Err(Error::NumericalBreakdown("glue certificate failed validation".into()));
            }
            Ok(Feasibility::Infeasible(cert))
        }
        LpStatus::Unbounded => Err(Error::NumericalBreakdown("feasibility LP unbounded".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar_ot::solve_ot;
    use ndarray::array;

    #[test]
    fn two_marginals_match_classical() {
        let a = ScalarMeasure::from_weights(vec![0.2, 0.8]).unwrap();
        let b = ScalarMeasure::from_weights(vec![0.5, 0.5]).unwrap();
        let c = array![[1.0, 2.0], [0.5, 3.0]];
        let m = solve_multimarginal(&[a.clone(), b.clone()], c.as_slice().unwrap()).unwrap();
        let s = solve_ot(&a, &b, &c).unwrap();
        assert!((m.value - s.value).abs() < 1e-12);
    }

    #[test]
    fn pairwise_metric_cost_on_equal_marginals() {
        let a = ScalarMeasure::from_weights(vec![0.3, 0.3, 0.4]).unwrap();
        let d = |i: usize, j: usize| (i as f64 - j as f64).abs();
        let mut cost = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    cost.push(d(i, j) + d(j, k) + d(i, k));
                }
            }
        }
        let m = solve_multimarginal(&[a.clone(), a.clone(), a], &cost).unwrap();
        assert!(m.value.abs() < 1e-12);
    }

    #[test]
    fn glue_product_measures() {
        let u = Array2::from_elem((2, 2), 0.25);
        let g = glue_feasible(&u, &u, None).unwrap().feasible().unwrap();
        assert!((g.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn glue_mismatched_middle() {
        let mu = array![[0.5, 0.0], [0.5, 0.0]];
        let nu = array![[0.25, 0.25], [0.25, 0.25]];
        let cert = glue_feasible(&mu, &nu, None).unwrap().certificate().unwrap();
        assert!(cert.integral < 0.0 && cert.min_sum() >= -1e-12);
    }
}
