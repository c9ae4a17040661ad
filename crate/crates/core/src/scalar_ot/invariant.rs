use ndarray::Array2;

use super::{check_cost, ensure_gap, scatter, support, DualExtras, OtResult};
use crate::error::{Error, Result};
use crate::lp::{self, LpProblem, LpStatus, RowKind, Sense};
use crate::measures::{ScalarMeasure, TransportPlan};

/// Both sides of the invariant-marginal problem.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantReport {
    /// Optimal plan with `ψ(x) + φ(y) − φ(Ty) ≤ c(x,y)` potentials.
    pub result: OtResult,
    /// `Y`-marginal of the optimal plan.
    pub target: Vec<f64>,
    /// Status of `sup ∫ψ dμ` over `ψ(x) + φ(y) + φ(Ty) ≤ c(x,y)`.
    pub additive_status: LpStatus,
    /// Its value when finite.
    pub additive_value: Option<f64>,
}

/// `min ∫c dπ` over plans with `X`-marginal `μ` and `T`-invariant `Y`-marginal.
///
/// The plan constraint `∫φ(y) dπ = ∫φ(Ty) dπ` makes the dual family
/// `ψ(x) + φ(y) − φ(Ty) ≤ c(x,y)`. The additive family with `+φ(Ty)` is
/// solved as well and reported alongside.
pub fn solve_invariant(mu: &ScalarMeasure, map: &[usize], c: &Array2<f64>) -> Result<InvariantReport> {
    let nx = mu.weights().len();
    let ny = map.len();
    check_cost(c, nx, ny)?;
    if let Some((y, _)) = map.iter().enumerate().find(|(_, &t)| t >= ny) {
        return Err(Error::invalid(format!("map sends {y} outside Y")));
    }
    let rows = support(mu.weights());
    let mut p = LpProblem::new(Sense::Min, Vec::new());
    for &x in &rows {
        for y in 0..ny {
            p.add_var(c[[x, y]], 0.0, f64::INFINITY);
        }
    }
    for (i, &x) in rows.iter().enumerate() {
        p.add_row((0..ny).map(|y| (i * ny + y, 1.0)).collect(), RowKind::Eq, mu.weights()[x]);
    }
    for yp in 0..ny {
        let mut coeffs = Vec::new();
        for i in 0..rows.len() {
            for y in 0..ny {
                let v = f64::from(u8::from(y == yp)) - f64::from(u8::from(map[y] == yp));
                if v != 0.0 {
                    coeffs.push((i * ny + y, v));
                }
            }
        }
        p.add_row(coeffs, RowKind::Eq, 0.0);
    }
    let sol = lp::solve(&p)?.into_optimal()?;
    let phi = sol.dual[rows.len()..].to_vec();
    let mut psi = vec![0.0; nx];
    for (k, &x) in rows.iter().enumerate() {
        psi[x] = sol.dual[k];
    }
    for x in 0..nx {
        if mu.weights()[x] == 0.0 {
            psi[x] = (0..ny)
                .map(|y| c[[x, y]] - phi[y] + phi[map[y]])
                .fold(f64::INFINITY, f64::min);
        }
    }
    let dual_value = mu.integrate(&psi);
    ensure_gap(sol.value, dual_value)?;
    let plan = scatter(&rows, &(0..ny).collect::<Vec<_>>(), &sol.primal, nx, ny);
    let plan = TransportPlan::new(mu.space().clone(), crate::measures::FiniteSpace::indexed(ny), plan)?;
    let target = plan.col_sums();

    let mut add = LpProblem::new(Sense::Max, Vec::new());
    for &w in mu.weights() {
        let j = add.add_var(w, 0.0, 0.0);
        add.set_free(j);
    }
    for _ in 0..ny {
        let j = add.add_var(0.0, 0.0, 0.0);
        add.set_free(j);
    }
    for x in 0..nx {
        for y in 0..ny {
            let mut coeffs = vec![(x, 1.0), (nx + y, 1.0)];
            if map[y] == y {
                coeffs[1].1 = 2.0;
            } else {
                coeffs.push((nx + map[y], 1.0));
            }
            add.add_row(coeffs, RowKind::Le, c[[x, y]]);
        }
    }
    let add_sol = lp::solve(&add)?;
    Ok(InvariantReport {
        result: OtResult {
            value: sol.value,
            dual_value,
            plan,
            psi,
            phi,
            extras: DualExtras::default(),
            pivots: sol.diagnostics.pivots,
        },
        target,
        additive_status: add_sol.status,
        additive_value: add_sol.is_optimal().then_some(add_sol.value),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn identity_map_keeps_mu() {
        let mu = ScalarMeasure::from_weights(vec![0.3, 0.7]).unwrap();
        let c = array![[0.0, 1.0], [1.0, 0.0]];
        let r = solve_invariant(&mu, &[0, 1], &c).unwrap();
        assert!(r.result.value.abs() < 1e-12);
    }

    #[test]
    fn cycle_forces_uniform() {
        let mu = ScalarMeasure::from_weights(vec![1.0, 0.0, 0.0]).unwrap();
        let c = array![[0.0, 1.0, 2.0], [1.0, 0.0, 1.0], [2.0, 1.0, 0.0]];
        let r = solve_invariant(&mu, &[1, 2, 0], &c).unwrap();
        for v in &r.target {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }
        assert!((r.result.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn additive_family_is_unbounded() {
        let mu = ScalarMeasure::from_weights(vec![0.5, 0.5]).unwrap();
        let c = array![[0.0, 1.0], [1.0, 0.0]];
        let r = solve_invariant(&mu, &[1, 0], &c).unwrap();
        assert_eq!(r.additive_status, LpStatus::Unbounded);
    }
}
