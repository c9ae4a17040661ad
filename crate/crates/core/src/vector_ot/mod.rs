//! Transport of ℝᵈ-valued measures.
//!
//! A plan `π ≥ 0` on `X × Y` transports `μ` to `ν` along the density `η`
//! when `Σ_y ηᵢ(x) π(x,y) = μᵢ(x)` and `Σ_x ηᵢ(x) π(x,y) = νᵢ(y)` for every
//! component `i`. The set of such plans is nonempty exactly when some Markov
//! kernel maps `μ` onto `ν`.

mod blackwell;
mod dominance;
mod map;
mod martingale;
mod partitions;
mod range;
mod refine;
mod strong;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::lp::{self, LpProblem, LpSolution, LpStatus, RowKind, Sense};
use crate::measures::{TransportPlan, VectorMeasure};
use crate::scalar_ot::Feasibility;

pub use blackwell::{blackwell_check, BlackwellReport, ConvexSample, JensenWitness};
pub use dominance::{dominates, dominates_values, DominanceCert, DominanceResult};
pub use map::{extract_map, MapExtraction};
pub use martingale::{martingale_polytope, MartingaleResult};
pub use partitions::{dominates_n, set_partitions, PartitionOutcome};
pub use range::{multi_range, range_slice, RangeMode};
pub use refine::{
    dual_refinement_study, grid_measure, min_dual_spread, RefinementPoint, RefinementReport,
    RefinementSpec, Trend,
};
pub use strong::{strong_dominates, StrongOutcome, SubsetPair};

/// Data of a vector transport problem.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorOtProblem {
    pub mu: VectorMeasure,
    pub nu: VectorMeasure,
    /// Density used in the plan constraints; `None` means `μ`'s own.
    pub eta: Option<Array2<f64>>,
    pub cost: Array2<f64>,
}

impl VectorOtProblem {
    pub fn new(mu: VectorMeasure, nu: VectorMeasure, cost: Array2<f64>) -> Result<Self> {
        if mu.dim() != nu.dim() {
            return Err(Error::dim(format!(
                "μ has {} components, ν has {}",
                mu.dim(),
                nu.dim()
            )));
        }
        crate::scalar_ot::check_cost(&cost, mu.len(), nu.len())?;
        Ok(Self {
            mu,
            nu,
            eta: None,
            cost,
        })
    }

    pub fn with_density(mut self, eta: Array2<f64>) -> Result<Self> {
        if eta.dim() != self.mu.values().dim() {
            return Err(Error::dim("density must be |X| × d"));
        }
        if eta.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid("density entries must be finite and nonnegative"));
        }
        self.eta = Some(eta);
        Ok(self)
    }

    pub fn density(&self) -> &Array2<f64> {
        self.eta.as_ref().unwrap_or_else(|| self.mu.density())
    }

    /// A field `f` with `⟨f(x), η(x)⟩ = 1` on every atom of positive weight.
    ///
    /// Fails when some such atom has a vanishing density.
    pub fn normalizer(&self) -> Result<Array2<f64>> {
        normalizer(self.density(), self.mu.ref_weights())
    }
}

pub(crate) fn normalizer(eta: &Array2<f64>, weights: &[f64]) -> Result<Array2<f64>> {
    let mut f = Array2::zeros(eta.raw_dim());
    for (x, row) in eta.rows().into_iter().enumerate() {
        let nrm: f64 = row.iter().map(|v| v * v).sum();
        if nrm == 0.0 {
            if weights[x] > 0.0 {
                return Err(Error::invalid(format!(
                    "density vanishes at atom {x}, so no f with ⟨f, η⟩ = 1 exists"
                )));
            }
            continue;
        }
        f.row_mut(x).assign(&(&row / nrm));
    }
    Ok(f)
}

/// Optimal vector plan and generalized Kantorovich potentials.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorOtResult {
    pub value: f64,
    pub dual_value: f64,
    pub plan: TransportPlan,
    /// `Ψ` on `X` with `Ψ(x) + ⟨φ(y), η(x)⟩ ≤ c(x,y)`.
    pub psi: Vec<f64>,
    /// `φ` on `Y`, one ℝᵈ vector per atom.
    pub phi: Array2<f64>,
    pub pivots: usize,
}

impl VectorOtResult {
    pub fn gap(&self) -> f64 {
        (self.value - self.dual_value).abs()
    }
}

/// The plan LP with bookkeeping to map rows and columns back.
pub(crate) struct PlanLp {
    pub lp: LpProblem,
    pub xs: Vec<usize>,
    pub ys: Vec<usize>,
    /// `(x, component)` of each `X` row; component `None` for the collapsed row.
    pub x_rows: Vec<(usize, Option<usize>)>,
    pub d: usize,
    pub n: usize,
    pub m: usize,
}

impl PlanLp {
    pub fn var(&self, i: usize, j: usize) -> usize {
        i * self.ys.len() + j
    }

    pub fn y_row(&self, j: usize, comp: usize) -> usize {
        self.x_rows.len() + j * self.d + comp
    }

    pub fn plan(&self, sol: &LpSolution) -> Array2<f64> {
        let mut a = Array2::zeros((self.n, self.m));
        for (i, &x) in self.xs.iter().enumerate() {
            for (j, &y) in self.ys.iter().enumerate() {
                a[[x, y]] = sol.primal[self.var(i, j)].max(0.0);
            }
        }
        a
    }

    /// Multipliers as `(Ψ on X, φ on Y)` from a row vector.
    pub fn potentials(&self, row_mult: &[f64], eta: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
        let mut psi = vec![0.0; self.n];
        for (r, &(x, comp)) in self.x_rows.iter().enumerate() {
            psi[x] += match comp {
                None => row_mult[r],
                Some(i) => row_mult[r] * eta[[x, i]],
            };
        }
        let mut phi = Array2::zeros((self.m, self.d));
        for (j, &y) in self.ys.iter().enumerate() {
            for i in 0..self.d {
                phi[[y, i]] = row_mult[self.y_row(j, i)];
            }
        }
        (psi, phi)
    }
}

/// Build the plan LP for `μ` against raw target values `ν` (`|Y| × d`).
pub(crate) fn build_plan_lp(
    mu: &VectorMeasure,
    eta: Option<&Array2<f64>>,
    nu: &Array2<f64>,
    cost: Option<&Array2<f64>>,
) -> Result<PlanLp> {
    let d = mu.dim();
    if nu.ncols() != d {
        return Err(Error::dim(format!("target has {} components, μ has {d}", nu.ncols())));
    }
    if nu.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("target values must be finite"));
    }
    let (n, m) = (mu.len(), nu.nrows());
    if let Some(c) = cost {
        crate::scalar_ot::check_cost(c, n, m)?;
    }
    let own = eta.is_none();
    let dens = eta.unwrap_or_else(|| mu.density());
    let xs: Vec<usize> = if own {
        (0..n).filter(|&x| mu.ref_weights()[x] > 0.0).collect()
    } else {
        (0..n).filter(|&x| dens.row(x).iter().any(|&v| v > 0.0)).collect()
    };
    let ys: Vec<usize> = (0..m).filter(|&y| nu.row(y).iter().any(|&v| v != 0.0)).collect();
    let w = ys.len();
    let mut p = LpProblem::new(Sense::Min, Vec::with_capacity(xs.len() * w));
    for &x in &xs {
        for &y in &ys {
            p.add_var(cost.map_or(0.0, |c| c[[x, y]]), 0.0, f64::INFINITY);
        }
    }
    let mut x_rows = Vec::new();
    for (i, &x) in xs.iter().enumerate() {
        let cols = (0..w).map(|j| i * w + j);
        if own {
            p.add_row(cols.map(|k| (k, 1.0)).collect(), RowKind::Eq, mu.ref_weights()[x]);
            x_rows.push((x, None));
        } else {
            for comp in 0..d {
                let e = dens[[x, comp]];
                let rhs = mu.values()[[x, comp]];
                if e == 0.0 && rhs == 0.0 {
                    continue;
                }
                let coeffs = if e == 0.0 {
                    Vec::new()
                } else {
                    cols.clone().map(|k| (k, e)).collect()
                };
                p.add_row(coeffs, RowKind::Eq, rhs);
                x_rows.push((x, Some(comp)));
            }
        }
    }
    // atoms outside the support must still be reproduced
    if !own {
        for x in 0..n {
            if !xs.contains(&x) && mu.values().row(x).iter().any(|&v| v > 0.0) {
                for comp in 0..d {
                    p.add_row(Vec::new(), RowKind::Eq, mu.values()[[x, comp]]);
                    x_rows.push((x, Some(comp)));
                }
            }
        }
    }
    for &y in &ys {
        for comp in 0..d {
            let coeffs = xs
                .iter()
                .enumerate()
                .filter(|(_, &x)| dens[[x, comp]] != 0.0)
                .map(|(i, &x)| (i * w + ys.iter().position(|&t| t == y).unwrap(), dens[[x, comp]]))
                .collect();
            p.add_row(coeffs, RowKind::Eq, nu[[y, comp]]);
        }
    }
    Ok(PlanLp {
        lp: p,
        xs,
        ys,
        x_rows,
        d,
        n,
        m,
    })
}

/// Complete a Farkas or optimal multiplier pair on atoms dropped from the LP.
///
/// With `sign = 1` the result keeps `Ψ(x) + ⟨φ(y), η(x)⟩ ≥ 0` (certificate);
/// with `sign = -1` it keeps `Ψ(x) + ⟨φ(y), η(x)⟩ ≤ c(x,y)` (dual feasibility).
pub(crate) fn complete_dropped(
    lp: &PlanLp,
    eta: &Array2<f64>,
    psi: &[f64],
    phi: &mut Array2<f64>,
    cost: Option<&Array2<f64>>,
    sign: f64,
) {
    let mins: Vec<f64> = lp
        .xs
        .iter()
        .map(|&x| eta.row(x).sum())
        .collect();
    let floor = mins.iter().copied().fold(f64::INFINITY, f64::min);
    if !floor.is_finite() || floor <= 0.0 {
        return;
    }
    for y in 0..lp.m {
        if lp.ys.contains(&y) {
            continue;
        }
        let need = lp
            .xs
            .iter()
            .map(|&x| {
                let c = cost.map_or(0.0, |c| c[[x, y]]);
                if sign > 0.0 {
                    (-psi[x]).max(0.0)
                } else {
                    (psi[x] - c).max(0.0)
                }
            })
            .fold(0.0, f64::max);
        let t = sign * need / floor;
        phi.row_mut(y).fill(t);
    }
}

/// Generalized Kantorovich problem `min ∫c dπ` over `Π(μ, ν, η)`.
pub fn solve_vector_ot(p: &VectorOtProblem) -> Result<Feasibility<VectorOtResult, DominanceCert>> {
    p.normalizer()?;
    let eta = p.density().clone();
    let built = build_plan_lp(&p.mu, p.eta.as_ref(), p.nu.values(), Some(&p.cost))?;
    let sol = lp::solve(&built.lp)?;
    match sol.status {
        LpStatus::Infeasible => {
            let y = &sol.farkas.as_ref().expect("certificate present").y;
            Ok(Feasibility::Infeasible(dominance::farkas_cert(&built, &p.mu, &eta, y)))
        }
        LpStatus::Unbounded => Err(Error::NumericalBreakdown("transport LP unbounded".into())),
        LpStatus::Optimal => {
            let (mut psi, mut phi) = built.potentials(&sol.dual, &eta);
            complete_dropped(&built, &eta, &psi, &mut phi, Some(&p.cost), -1.0);
            for x in 0..built.n {
                if !built.xs.contains(&x) {
                    psi[x] = (0..built.m)
                        .map(|y| p.cost[[x, y]] - phi.row(y).dot(&eta.row(x)))
                        .fold(f64::INFINITY, f64::min);
                }
            }
            let dual_value = dual_objective(&p.mu, p.eta.as_ref(), &psi, &sol, &built, p.nu.values(), &phi);
            crate::scalar_ot::ensure_gap(sol.value, dual_value)?;
            let plan = TransportPlan::new(p.mu.space().clone(), p.nu.space().clone(), built.plan(&sol))?
                .with_density(eta);
            Ok(Feasibility::Feasible(VectorOtResult {
                value: sol.value,
                dual_value,
                plan,
                psi,
                phi,
                pivots: sol.diagnostics.pivots,
            }))
        }
    }
}

fn dual_objective(
    mu: &VectorMeasure,
    eta: Option<&Array2<f64>>,
    psi: &[f64],
    sol: &LpSolution,
    built: &PlanLp,
    nu: &Array2<f64>,
    phi: &Array2<f64>,
) -> f64 {
    let x_part: f64 = if eta.is_none() {
        psi.iter().zip(mu.ref_weights()).map(|(a, b)| a * b).sum()
    } else {
        built
            .x_rows
            .iter()
            .enumerate()
            .map(|(r, &(x, comp))| sol.dual[r] * mu.values()[[x, comp.unwrap_or(0)]])
            .sum()
    };
    x_part + (phi * nu).sum()
}

/// Largest violation of `Ψ(x) + ⟨φ(y), η(x)⟩ ≤ c(x,y)`.
pub fn vector_dual_violation(c: &Array2<f64>, eta: &Array2<f64>, psi: &[f64], phi: &Array2<f64>) -> f64 {
    c.indexed_iter()
        .map(|((x, y), &v)| psi[x] + phi.row(y).dot(&eta.row(x)) - v)
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests;
