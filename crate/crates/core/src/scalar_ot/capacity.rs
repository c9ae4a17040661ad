use ndarray::Array2;

use super::{check_cost, ensure_gap, extend_potentials, scatter, support, DualExtras, Feasibility, OtResult};
use crate::error::{Error, Result};
use crate::lp::{self, LpProblem, LpStatus, RowKind, Sense};
use crate::measures::{ScalarMeasure, TransportPlan};

/// Potentials `(ψ, φ)` with
/// `∫[ψ(x)+φ(y)]₊ dπ̄ − ∫ψ dμ − ∫φ dν = violation < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct KellererCert {
    pub psi: Vec<f64>,
    pub phi: Vec<f64>,
    pub violation: f64,
}

impl KellererCert {
    /// Recompute the violated quantity.
    pub fn evaluate(&self, mu: &ScalarMeasure, nu: &ScalarMeasure, cap: &TransportPlan) -> f64 {
        let pos: f64 = cap
            .matrix()
            .indexed_iter()
            .map(|((x, y), &v)| (self.psi[x] + self.phi[y]).max(0.0) * v)
            .sum();
        pos - mu.integrate(&self.psi) - nu.integrate(&self.phi)
    }
}

/// `max ∫c dπ` over plans in `Π(μ, ν)` dominated by `π̄` entrywise.
///
/// The dual is `inf ∫ψ dμ + ∫φ dν + ∫[c − ψ − φ]₊ dπ̄`; the positive
/// part is returned as `extras.xi`.
pub fn solve_capacity(
    mu: &ScalarMeasure,
    nu: &ScalarMeasure,
    c: &Array2<f64>,
    cap: &TransportPlan,
) -> Result<Feasibility<OtResult, KellererCert>> {
    let (nx, ny) = (mu.weights().len(), nu.weights().len());
    check_cost(c, nx, ny)?;
    if cap.matrix().dim() != (nx, ny) {
        return Err(Error::dim("capacity plan shape differs from the cost"));
    }
    let rows = support(mu.weights());
    let cols = support(nu.weights());
    let w = cols.len();
    let bar = cap.matrix();

    let mut p = LpProblem::new(Sense::Max, Vec::new());
    for &x in &rows {
        for &y in &cols {
            p.add_var(c[[x, y]], 0.0, bar[[x, y]]);
        }
    }
    for (i, &x) in rows.iter().enumerate() {
        p.add_row((0..w).map(|j| (i * w + j, 1.0)).collect(), RowKind::Eq, mu.weights()[x]);
    }
    for (j, &y) in cols.iter().enumerate() {
        p.add_row((0..rows.len()).map(|i| (i * w + j, 1.0)).collect(), RowKind::Eq, nu.weights()[y]);
    }
    let sol = lp::solve(&p)?;
    if sol.status == LpStatus::Infeasible {
        let f = sol.farkas.expect("certificate present");
        let mut psi = vec![0.0; nx];
        let mut phi = vec![0.0; ny];
        for (k, &x) in rows.iter().enumerate() {
            psi[x] = -f.y[k];
        }
        for (k, &y) in cols.iter().enumerate() {
            phi[y] = -f.y[rows.len() + k];
        }
        let mut cert = KellererCert {
            psi,
            phi,
            violation: 0.0,
        };
        cert.violation = cert.evaluate(mu, nu, cap);
        if cert.violation >= -1e-9 {
            return Err(Error::NumericalBreakdown(
                "capacity certificate does not separate".into(),
            ));
        }
        return Ok(Feasibility::Infeasible(cert));
    }
    let sol = sol.into_optimal()?;
    let (psi, phi) = if rows.is_empty() || cols.is_empty() {
        (vec![0.0; nx], vec![0.0; ny])
    } else {
        // inverted cost keeps the c-transform on the infimum side
        let neg = c.mapv(|v| -v);
        let ps: Vec<f64> = sol.dual[..rows.len()].iter().map(|v| -v).collect();
        let ph: Vec<f64> = sol.dual[rows.len()..].iter().map(|v| -v).collect();
        let (a, b) = extend_potentials(&neg, &rows, &cols, &ps, &ph);
        (a.iter().map(|v| -v).collect(), b.iter().map(|v| -v).collect())
    };
    let xi = Array2::from_shape_fn((nx, ny), |(x, y)| (c[[x, y]] - psi[x] - phi[y]).max(0.0));
    let dual_value = mu.integrate(&psi) + nu.integrate(&phi) + (&xi * bar).sum();
    ensure_gap(sol.value, dual_value)?;
    let plan = scatter(&rows, &cols, &sol.primal, nx, ny);
    Ok(Feasibility::Feasible(OtResult {
        value: sol.value,
        dual_value,
        plan: TransportPlan::new(mu.space().clone(), nu.space().clone(), plan)?,
        psi,
        phi,
        extras: DualExtras {
            lambda: None,
            xi: Some(xi),
        },
        pivots: sol.diagnostics.pivots,
    }))
}

/// `min ∫c dπ` under the same capacity, by negating the cost.
pub fn solve_capacity_min(
    mu: &ScalarMeasure,
    nu: &ScalarMeasure,
    c: &Array2<f64>,
    cap: &TransportPlan,
) -> Result<Feasibility<OtResult, KellererCert>> {
    let neg = c.mapv(|v| -v);
    Ok(match solve_capacity(mu, nu, &neg, cap)? {
        Feasibility::Feasible(mut r) => {
            r.value = -r.value;
            r.dual_value = -r.dual_value;
            r.psi.iter_mut().for_each(|v| *v = -*v);
            r.phi.iter_mut().for_each(|v| *v = -*v);
            r.extras.xi = r.extras.xi.map(|x| -x);
            Feasibility::Feasible(r)
        }
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar_ot::solve_ot;
    use ndarray::array;

    #[test]
    fn forced_by_capacity() {
        let mu = ScalarMeasure::from_weights(vec![0.5, 0.5]).unwrap();
        let bar = TransportPlan::from_matrix(array![[0.3, 0.2], [0.2, 0.3]]).unwrap();
        let c = array![[1.0, 5.0], [2.0, 3.0]];
        let r = solve_capacity(&mu, &mu, &c, &bar).unwrap().feasible().unwrap();
        for (a, b) in r.plan.matrix().iter().zip(bar.matrix()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(r.gap() < 1e-9);
    }

    #[test]
    fn slack_capacity_is_classical_max() {
        let mu = ScalarMeasure::from_weights(vec![0.4, 0.6]).unwrap();
        let nu = ScalarMeasure::from_weights(vec![0.7, 0.3]).unwrap();
        let c = array![[1.0, 5.0], [2.0, 3.0]];
        let bar = TransportPlan::from_matrix(Array2::from_elem((2, 2), 100.0)).unwrap();
        let r = solve_capacity(&mu, &nu, &c, &bar).unwrap().feasible().unwrap();
        let neg = c.mapv(|v| -v);
        let classical = solve_ot(&mu, &nu, &neg).unwrap();
        assert!((r.value + classical.value).abs() < 1e-12);
    }

    #[test]
    fn tight_capacity_gives_kellerer_certificate() {
        let mu = ScalarMeasure::from_weights(vec![0.5, 0.5]).unwrap();
        let bar = TransportPlan::from_matrix(array![[0.1, 0.1], [0.1, 0.1]]).unwrap();
        let c = array![[0.0, 1.0], [1.0, 0.0]];
        let cert = solve_capacity(&mu, &mu, &c, &bar).unwrap().certificate().unwrap();
        assert!(cert.evaluate(&mu, &mu, &bar) < -1e-9);
    }
}
