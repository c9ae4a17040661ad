use ndarray::Array2;

use super::{check_cost, ensure_gap, extend_potentials, scatter, support, DualExtras, OtResult};
use crate::error::{Error, Result};
use crate::lp::{self, FarkasCert, LpProblem, RowKind, Sense};
use crate::measures::{ScalarMeasure, TransportPlan};

/// Kantorovich problem `min ∫c dπ` over `Π(μ, ν)`.
///
/// Unequal masses yield [`Error::Infeasible`] carrying multipliers
/// `(ψ, φ)` indexed by `X` then `Y`.
pub fn solve_ot(mu: &ScalarMeasure, nu: &ScalarMeasure, c: &Array2<f64>) -> Result<OtResult> {
    let (n, m) = (mu.weights().len(), nu.weights().len());
    check_cost(c, n, m)?;
    let rows = support(mu.weights());
    let cols = support(nu.weights());
    let w = cols.len();

    let mut p = LpProblem::new(Sense::Min, Vec::with_capacity(rows.len() * w));
    for &x in &rows {
        for &y in &cols {
            p.add_var(c[[x, y]], 0.0, f64::INFINITY);
        }
    }
    for (i, &x) in rows.iter().enumerate() {
        p.add_row((0..w).map(|j| (i * w + j, 1.0)).collect(), RowKind::Eq, mu.weights()[x]);
    }
    for (j, &y) in cols.iter().enumerate() {
        p.add_row(
            (0..rows.len()).map(|i| (i * w + j, 1.0)).collect(),
            RowKind::Eq,
            nu.weights()[y],
        );
    }
    if rows.is_empty() || cols.is_empty() {
        if (mu.mass() - nu.mass()).abs() > 1e-9 {
            return Err(mass_certificate(mu, nu));
        }
        let (psi, phi) = extend_potentials(c, &[], &[], &[], &[]);
        return Ok(OtResult {
            value: 0.0,
            dual_value: 0.0,
            plan: TransportPlan::new(mu.space().clone(), nu.space().clone(), Array2::zeros((n, m)))?,
            psi,
            phi,
            extras: DualExtras::default(),
            pivots: 0,
        });
    }
    let sol = lp::solve(&p)?;
    if sol.is_infeasible() {
        return Err(mass_certificate(mu, nu));
    }
    let sol = sol.into_optimal()?;
    let (psi, phi) = extend_potentials(c, &rows, &cols, &sol.dual[..rows.len()], &sol.dual[rows.len()..]);
    let plan = scatter(&rows, &cols, &sol.primal, n, m);
    let dual_value = mu.integrate(&psi) + nu.integrate(&phi);
    ensure_gap(sol.value, dual_value)?;
    Ok(OtResult {
        value: sol.value,
        dual_value,
        plan: TransportPlan::new(mu.space().clone(), nu.space().clone(), plan)?,
        psi,
        phi,
        extras: DualExtras::default(),
        pivots: sol.diagnostics.pivots,
    })
}

/// Separating multipliers `ψ ≡ s, φ ≡ −s` for unequal total masses.
fn mass_certificate(mu: &ScalarMeasure, nu: &ScalarMeasure) -> Error {
    let s = if mu.mass() > nu.mass() { -1.0 } else { 1.0 };
    let mut y = vec![s; mu.weights().len()];
    y.extend(std::iter::repeat_n(-s, nu.weights().len()));
    let margin = -(s * mu.mass() - s * nu.mass());
    Error::Infeasible(Box::new(FarkasCert { y, margin }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn identical_marginals_cost_zero() {
        let mu = ScalarMeasure::from_weights(vec![0.2, 0.3, 0.5]).unwrap();
        let c = array![[0.0, 1.0, 2.0], [1.0, 0.0, 1.0], [2.0, 1.0, 0.0]];
        let r = solve_ot(&mu, &mu, &c).unwrap();
        assert!(r.value.abs() < 1e-12);
        for x in 0..3 {
            assert!((r.plan.matrix()[[x, x]] - mu.weights()[x]).abs() < 1e-12);
        }
    }

    #[test]
    fn forced_plan() {
        let mu = ScalarMeasure::from_weights(vec![1.0, 0.0]).unwrap();
        let nu = ScalarMeasure::from_weights(vec![0.0, 1.0]).unwrap();
        let c = array![[4.0, 7.5], [1.0, 2.0]];
        let r = solve_ot(&mu, &nu, &c).unwrap();
        assert_eq!(r.value, 7.5);
        assert!(super::super::dual_violation(&c, &r.psi, &r.phi) <= 1e-12);
    }

    #[test]
    fn mass_mismatch_is_certified() {
        let mu = ScalarMeasure::from_weights(vec![1.0, 1.0]).unwrap();
        let nu = ScalarMeasure::from_weights(vec![0.5, 1.0]).unwrap();
        match solve_ot(&mu, &nu, &array![[0.0, 1.0], [1.0, 0.0]]) {
            Err(Error::Infeasible(cert)) => {
                let dot: f64 = cert.y[..2].iter().zip(mu.weights()).map(|(a, b)| a * b).sum::<f64>()
                    + cert.y[2..].iter().zip(nu.weights()).map(|(a, b)| a * b).sum::<f64>();
                assert!(dot < -1e-9);
                for x in 0..2 {
                    for y in 0..2 {
                        assert!(cert.y[x] + cert.y[2 + y] >= 0.0);
                    }
                }
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }
}
