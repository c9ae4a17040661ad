//! Scalar Kantorovich transport and its constrained variants.
//!
//! Every solver builds an explicit LP, reads the transport plan from the
//! primal and the potentials from the row multipliers, and checks the dual
//! objective against the primal value before returning.

mod capacity;
mod feasibility;
mod invariant;
mod multi;
mod partial;
mod plain;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::measures::TransportPlan;

pub use capacity::{solve_capacity, solve_capacity_min, KellererCert};
pub use feasibility::{
    local_constraint_feasible, strassen_feasible, strassen_sup, GammaConstraint, LocalCert,
    StrassenCert,
};
pub use invariant::{solve_invariant, InvariantReport};
pub use multi::{glue_feasible, solve_multimarginal, GlueCert, GluePlan, MultiResult};
pub use partial::solve_partial;
pub use plain::solve_ot;

/// Either a feasible object or a certificate that none exists.
#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility<T, C> {
    Feasible(T),
    Infeasible(C),
}

impl<T, C> Feasibility<T, C> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }

    pub fn feasible(self) -> Option<T> {
        match self {
            Feasibility::Feasible(t) => Some(t),
            Feasibility::Infeasible(_) => None,
        }
    }

    pub fn certificate(self) -> Option<C> {
        match self {
            Feasibility::Feasible(_) => None,
            Feasibility::Infeasible(c) => Some(c),
        }
    }
}

/// Variant-specific dual variables.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DualExtras {
    /// Multiplier of the total-mass row (partial transport).
    pub lambda: Option<f64>,
    /// Capacity multipliers `[c − ψ − φ]₊`.
    pub xi: Option<Array2<f64>>,
}

/// Optimal plan, value and potentials of a transport problem.
#[derive(Debug, Clone, PartialEq)]
pub struct OtResult {
    pub value: f64,
    pub dual_value: f64,
    pub plan: TransportPlan,
    pub psi: Vec<f64>,
    pub phi: Vec<f64>,
    pub extras: DualExtras,
    pub pivots: usize,
}

impl OtResult {
    pub fn gap(&self) -> f64 {
        (self.value - self.dual_value).abs()
    }
}

pub(crate) fn check_cost(c: &Array2<f64>, n: usize, m: usize) -> Result<()> {
    if c.dim() != (n, m) {
        return Err(Error::dim(format!(
            "cost is {}x{}, expected {n}x{m}",
            c.nrows(),
            c.ncols()
        )));
    }
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("cost has a non-finite entry"));
    }
    Ok(())
}

pub(crate) fn support(w: &[f64]) -> Vec<usize> {
    (0..w.len()).filter(|&i| w[i] > 0.0).collect()
}

/// Extend potentials from the supports to every atom by c-transforms.
pub(crate) fn extend_potentials(
    c: &Array2<f64>,
    rows: &[usize],
    cols: &[usize],
    psi_s: &[f64],
    phi_s: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let (n, m) = c.dim();
    let mut phi = vec![f64::NAN; m];
    for (k, &y) in cols.iter().enumerate() {
        phi[y] = phi_s[k];
    }
    let mut psi = vec![f64::NAN; n];
    for (k, &x) in rows.iter().enumerate() {
        psi[x] = psi_s[k];
    }
    for x in 0..n {
        if psi[x].is_nan() {
            psi[x] = cols
                .iter()
                .map(|&y| c[[x, y]] - phi[y])
                .fold(f64::INFINITY, f64::min);
            if !psi[x].is_finite() {
                psi[x] = 0.0;
            }
        }
    }
    for y in 0..m {
        if phi[y].is_nan() {
            phi[y] = (0..n)
                .map(|x| c[[x, y]] - psi[x])
                .fold(f64::INFINITY, f64::min);
        }
    }
    (psi, phi)
}

/// Scatter a compact plan back to the full `X × Y` grid.
pub(crate) fn scatter(rows: &[usize], cols: &[usize], x: &[f64], n: usize, m: usize) -> Array2<f64> {
    let mut a = Array2::zeros((n, m));
    let w = cols.len();
    for (i, &r) in rows.iter().enumerate() {
        for (j, &s) in cols.iter().enumerate() {
            a[[r, s]] = x[i * w + j].max(0.0);
        }
    }
    a
}

/// Largest violation of `ψ(x) + φ(y) ≤ c(x,y)`.
pub fn dual_violation(c: &Array2<f64>, psi: &[f64], phi: &[f64]) -> f64 {
    c.indexed_iter()
        .map(|((x, y), &v)| psi[x] + phi[y] - v)
        .fold(0.0, f64::max)
}

/// Largest `|(slack)·π|` over the cells of a plan.
pub fn slackness_residual(c: &Array2<f64>, psi: &[f64], phi: &[f64], plan: &Array2<f64>) -> f64 {
    c.indexed_iter()
        .map(|((x, y), &v)| ((v - psi[x] - phi[y]) * plan[[x, y]]).abs())
        .fold(0.0, f64::max)
}

pub(crate) fn ensure_gap(value: f64, dual: f64) -> Result<()> {
    if (value - dual).abs() > 1e-7 * (1.0 + value.abs()) {
        return Err(Error::NumericalBreakdown(format!(
            "duality gap {:.3e} exceeds tolerance",
            (value - dual).abs()
        )));
    }
    Ok(())
}
