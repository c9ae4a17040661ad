use ndarray::Array2;

use crate::error::{Error, Result};
use crate::lp::{self, LpProblem, LpStatus, RowKind, Sense};
use crate::measures::{ScalarMeasure, TransportPlan};
use crate::scalar_ot::{check_cost, ensure_gap, support, Feasibility};

/// Optimal martingale-constrained plan with its multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleResult {
    pub value: f64,
    pub dual_value: f64,
    pub plan: TransportPlan,
    /// `ψ(x) + φ(y) + ⟨ζ(y), f(x) − g(y)⟩ ≤ c(x,y)`.
    pub psi: Vec<f64>,
    pub phi: Vec<f64>,
    pub zeta: Array2<f64>,
    pub pivots: usize,
}

impl MartingaleResult {
    pub fn gap(&self) -> f64 {
        (self.value - self.dual_value).abs()
    }
}

/// Multipliers with `ψ(x) + φ(y) + ⟨ζ(y), f(x) − g(y)⟩ ≥ 0` everywhere
/// and `∫ψ d|μ| + ∫φ d|ν| = integral < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleCert {
    pub psi: Vec<f64>,
    pub phi: Vec<f64>,
    pub zeta: Array2<f64>,
    pub integral: f64,
}

fn combo(psi: &[f64], phi: &[f64], zeta: &Array2<f64>, f: &Array2<f64>, g: &Array2<f64>, x: usize, y: usize) -> f64 {
    psi[x] + phi[y] + zeta.row(y).dot(&(&f.row(x) - &g.row(y)))
}

impl MartingaleCert {
    /// Smallest value of the pointwise combination.
    pub fn min_combination(&self, f: &Array2<f64>, g: &Array2<f64>) -> f64 {
        let mut low = f64::INFINITY;
        for x in 0..self.psi.len() {
            for y in 0..self.phi.len() {
                low = low.min(combo(&self.psi, &self.phi, &self.zeta, f, g, x, y));
            }
        }
        low
    }
}

/// `min ∫c dπ` over `π ∈ Π(|μ|, |ν|)` with `Σ_x π(x,y)(f(x) − g(y)) = 0` for every `y`.
pub fn martingale_polytope(
    mu: &ScalarMeasure,
    nu: &ScalarMeasure,
    f: &Array2<f64>,
    g: &Array2<f64>,
    c: &Array2<f64>,
) -> Result<Feasibility<MartingaleResult, MartingaleCert>> {
    let (nx, ny) = (mu.weights().len(), nu.weights().len());
    check_cost(c, nx, ny)?;
    if f.nrows() != nx || g.nrows() != ny || f.ncols() != g.ncols() {
        return Err(Error::dim("f must be |X| × d and g must be |Y| × d"));
    }
    if f.iter().chain(g.iter()).any(|v| !v.is_finite()) {
        return Err(Error::invalid("f and g must be finite"));
    }
    let d = f.ncols();
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
        p.add_row((0..w).map(|j| (i * w + j, 1.0)).collect(), RowKind::Eq, mu.weights()[x]);
    }
    for (j, &y) in cols.iter().enumerate() {
        p.add_row((0..rows.len()).map(|i| (i * w + j, 1.0)).collect(), RowKind::Eq, nu.weights()[y]);
    }
    let mart_start = rows.len() + w;
    let mut mart_rows = Vec::new();
    for (j, &y) in cols.iter().enumerate() {
        for k in 0..d {
            let coeffs: Vec<(usize, f64)> = rows
                .iter()
                .enumerate()
                .map(|(i, &x)| (i * w + j, f[[x, k]] - g[[y, k]]))
                .filter(|&(_, v)| v != 0.0)
                .collect();
            if !coeffs.is_empty() {
                p.add_row(coeffs, RowKind::Eq, 0.0);
                mart_rows.push((y, k));
            }
        }
    }
    let sol = lp::solve(&p)?;
    let unpack = |mult: &[f64]| {
        let mut psi = vec![f64::NAN; nx];
        let mut phi = vec![f64::NAN; ny];
        let mut zeta = Array2::zeros((ny, d));
        for (i, &x) in rows.iter().enumerate() {
            psi[x] = mult[i];
        }
        for (j, &y) in cols.iter().enumerate() {
            phi[y] = mult[rows.len() + j];
        }
        for (r, &(y, k)) in mart_rows.iter().enumerate() {
            zeta[[y, k]] = mult[mart_start + r];
        }
        (psi, phi, zeta)
    };
    // `side` is +1 to extend a certificate and −1 to extend dual potentials
    let extend = |psi: &mut Vec<f64>, phi: &mut Vec<f64>, zeta: &Array2<f64>, side: f64| {
        let base = |x: usize, y: usize| if side < 0.0 { c[[x, y]] } else { 0.0 };
        for x in 0..nx {
            if psi[x].is_nan() {
                let vals = cols.iter().map(|&y| {
                    side * (base(x, y) - phi[y] - zeta.row(y).dot(&(&f.row(x) - &g.row(y))))
                });
                let v = vals.fold(f64::NEG_INFINITY, f64::max);
                psi[x] = if v.is_finite() { side * v } else { 0.0 };
            }
        }
        for y in 0..ny {
            if phi[y].is_nan() {
                let v = (0..nx)
                    .map(|x| side * (base(x, y) - psi[x]))
                    .fold(f64::NEG_INFINITY, f64::max);
                phi[y] = if v.is_finite() { side * v } else { 0.0 };
            }
        }
    };
    match sol.status {
        LpStatus::Optimal => {
            let (mut psi, mut phi, zeta) = unpack(&sol.dual);
            extend(&mut psi, &mut phi, &zeta, -1.0);
            let dual_value = mu.integrate(&psi) + nu.integrate(&phi);
            ensure_gap(sol.value, dual_value)?;
            let plan = crate::scalar_ot::scatter(&rows, &cols, &sol.primal, nx, ny);
            Ok(Feasibility::Feasible(MartingaleResult {
                value: sol.value,
                dual_value,
                plan: TransportPlan::new(mu.space().clone(), nu.space().clone(), plan)?,
                psi,
                phi,
                zeta,
                pivots: sol.diagnostics.pivots,
            }))
        }
        LpStatus::Infeasible => {
            let y = sol.farkas.expect("certificate present").y;
            let (mut psi, mut phi, zeta) = unpack(&y);
            extend(&mut psi, &mut phi, &zeta, 1.0);
            let integral = mu.integrate(&psi) + nu.integrate(&phi);
            let cert = MartingaleCert {
                psi,
                phi,
                zeta,
                integral,
            };
            if integral >= -1e-9 || cert.min_combination(f, g) < -1e-9 {
                return Err(Error::NumericalBreakdown("martingale certificate failed validation".into()));
            }
            Ok(Feasibility::Infeasible(cert))
        }
        LpStatus::Unbounded => Err(Error::NumericalBreakdown("martingale LP unbounded".into())),
    }
}
