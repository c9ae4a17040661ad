use ndarray::Array2;

use super::{check_cost, Feasibility};
use crate::error::{Error, Result};
use crate::lp::{self, LpProblem, LpStatus, RowKind, Sense};
use crate::measures::{ScalarMeasure, TransportPlan};

/// Multipliers `(ψ, φ, ξ ≥ 0)` with `ψ(x) + φ(y) + ξ(x,y)(c(x,y) − D) ≥ 0`
/// everywhere and `∫ψ dμ + ∫φ dν < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalCert {
    pub psi: Vec<f64>,
    pub phi: Vec<f64>,
    pub xi: Array2<f64>,
    pub integral: f64,
}

impl LocalCert {
    /// Smallest value of the pointwise combination.
    pub fn min_combination(&self, c: &Array2<f64>, radius: f64) -> f64 {
        c.indexed_iter()
            .map(|((x, y), &v)| self.psi[x] + self.phi[y] + self.xi[[x, y]] * (v - radius))
            .fold(f64::INFINITY, f64::min)
    }
}

/// A plan in `Π(μ, ν)` supported on `{c ≤ D}`, or a certificate.
pub fn local_constraint_feasible(
    mu: &ScalarMeasure,
    nu: &ScalarMeasure,
    c: &Array2<f64>,
    radius: f64,
) -> Result<Feasibility<TransportPlan, LocalCert>> {
    let (nx, ny) = (mu.weights().len(), nu.weights().len());
    check_cost(c, nx, ny)?;
    if !(radius >= 0.0) {
        return Err(Error::invalid("radius must be nonnegative"));
    }
    let edges: Vec<(usize, usize)> = c
        .indexed_iter()
        .filter(|(_, &v)| v <= radius)
        .map(|(e, _)| e)
        .collect();
    let mut p = LpProblem::feasibility(edges.len());
    for &w in mu.weights() {
        p.add_row(Vec::new(), RowKind::Eq, w);
    }
    for &w in nu.weights() {
        p.add_row(Vec::new(), RowKind::Eq, w);
    }
    for (k, &(x, y)) in edges.iter().enumerate() {
        p.rows[x].coeffs.push((k, 1.0));
        p.rows[nx + y].coeffs.push((k, 1.0));
    }
    let sol = lp::solve(&p)?;
    match sol.status {
        LpStatus::Optimal => {
            let mut plan = Array2::zeros((nx, ny));
            for (k, &(x, y)) in edges.iter().enumerate() {
                plan[[x, y]] = sol.primal[k].max(0.0);
            }
            Ok(Feasibility::Feasible(TransportPlan::new(
                mu.space().clone(),
                nu.space().clone(),
                plan,
            )?))
        }
        LpStatus::Infeasible => {
            let y = sol.farkas.expect("certificate present").y;
            let psi = y[..nx].to_vec();
            let phi = y[nx..].to_vec();
            let xi = Array2::from_shape_fn((nx, ny), |(x, yy)| {
                let gap = c[[x, yy]] - radius;
                if gap > 0.0 {
                    (-(psi[x] + phi[yy])).max(0.0) / gap
                } else {
                    0.0
                }
            });
            let integral = mu.integrate(&psi) + nu.integrate(&phi);
            let cert = LocalCert {
                psi,
                phi,
                xi,
                integral,
            };
            if integral >= -1e-9 || cert.min_combination(c, radius) < -1e-9 {
                return Err(Error::NumericalBreakdown("local certificate failed validation".into()));
            }
            Ok(Feasibility::Infeasible(cert))
        }
        LpStatus::Unbounded => Err(Error::NumericalBreakdown("feasibility LP unbounded".into())),
    }
}

/// One linear condition `Σ coeffs·γ (kind) bound` on plans.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaConstraint {
    pub coeffs: Array2<f64>,
    pub kind: RowKind,
    pub bound: f64,
}

/// Potentials `(ψ, φ)` with `∫ψ dμ + ∫φ dν > sup_{γ∈Γ} ∫[ψ(x)+φ(y)] dγ`.
#[derive(Debug, Clone, PartialEq)]
pub struct StrassenCert {
    pub psi: Vec<f64>,
    pub phi: Vec<f64>,
    pub lhs: f64,
    pub sup: f64,
}

fn gamma_rows(p: &mut LpProblem, gamma: &[GammaConstraint], ny: usize) {
    for g in gamma {
        let coeffs = g
            .coeffs
            .indexed_iter()
            .filter(|(_, &v)| v != 0.0)
            .map(|((x, y), &v)| (x * ny + y, v))
            .collect();
        p.add_row(coeffs, g.kind, g.bound);
    }
}

/// `sup ∫f dγ` over nonnegative `γ` of mass `mass` satisfying `Γ`;
/// `−∞` when that set is empty.
pub fn strassen_sup(mass: f64, gamma: &[GammaConstraint], f: &Array2<f64>) -> Result<f64> {
    let (nx, ny) = f.dim();
    let mut p = LpProblem::new(Sense::Max, f.iter().copied().collect());
    p.add_row((0..nx * ny).map(|k| (k, 1.0)).collect(), RowKind::Eq, mass);
    gamma_rows(&mut p, gamma, ny);
    let sol = lp::solve(&p)?;
    Ok(match sol.status {
        LpStatus::Optimal => sol.value,
        LpStatus::Infeasible => f64::NEG_INFINITY,
        LpStatus::Unbounded => f64::INFINITY,
    })
}

/// A plan in `Π(μ, ν) ∩ Γ`, or a Strassen certificate.
pub fn strassen_feasible(
    mu: &ScalarMeasure,
    nu: &ScalarMeasure,
    gamma: &[GammaConstraint],
) -> Result<Feasibility<TransportPlan, StrassenCert>> {
    let (nx, ny) = (mu.weights().len(), nu.weights().len());
    if gamma.iter().any(|g| g.coeffs.dim() != (nx, ny)) {
        return Err(Error::dim("Γ constraint shape differs from X × Y"));
    }
    let mut p = LpProblem::feasibility(nx * ny);
    for (x, &w) in mu.weights().iter().enumerate() {
        p.add_row((0..ny).map(|y| (x * ny + y, 1.0)).collect(), RowKind::Eq, w);
    }
    for (y, &w) in nu.weights().iter().enumerate() {
        p.add_row((0..nx).map(|x| (x * ny + y, 1.0)).collect(), RowKind::Eq, w);
    }
    gamma_rows(&mut p, gamma, ny);
    let sol = lp::solve(&p)?;
    match sol.status {
        LpStatus::Optimal => {
            let plan = Array2::from_shape_vec((nx, ny), sol.primal.iter().map(|v| v.max(0.0)).collect())
                .expect("shape");
            Ok(Feasibility::Feasible(TransportPlan::new(
                mu.space().clone(),
                nu.space().clone(),
                plan,
            )?))
        }
        LpStatus::Infeasible => {
            let y = sol.farkas.expect("certificate present").y;
            let psi: Vec<f64> = y[..nx].iter().map(|v| -v).collect();
            let phi: Vec<f64> = y[nx..nx + ny].iter().map(|v| -v).collect();
            let lhs = mu.integrate(&psi) + nu.integrate(&phi);
            let f = Array2::from_shape_fn((nx, ny), |(x, yy)| psi[x] + phi[yy]);
            let sup = strassen_sup(mu.mass(), gamma, &f)?;
            if !(lhs > sup + 1e-9) {
                return Err(Error::NumericalBreakdown(format!(
                    "Strassen certificate does not separate ({lhs} vs {sup})"
                )));
            }
            Ok(Feasibility::Infeasible(StrassenCert { psi, phi, lhs, sup }))
        }
        LpStatus::Unbounded => Err(Error::NumericalBreakdown("feasibility LP unbounded".into())),
    }
}
