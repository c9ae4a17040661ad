//! Linear programming with dual extraction and Farkas certificates.
//!
//! Problems are stated with `≤`, `≥` and `=` rows and per-variable bounds.
//! [`solve`] runs a two-phase revised simplex with Bland's rule, so repeated
//! solves of the same problem return bit-identical answers.

mod factor;
mod simplex;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::tol;

pub use simplex::SolveOptions;

/// Row relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Le,
    Ge,
    Eq,
}

/// Optimization direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Min,
    Max,
}

impl Sense {
    fn sign(self) -> f64 {
        match self {
            Sense::Min => 1.0,
            Sense::Max => -1.0,
        }
    }
}

/// A sparse constraint row `Σ coeffs · x  (kind)  rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub kind: RowKind,
    pub rhs: f64,
}

/// Objective, rows and bounds of a linear program.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LpProblem {
    /// `n` variables in `[0, ∞)` with the given objective.
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            sense,
            objective,
            rows: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    /// Pure feasibility problem over `n` nonnegative variables.
    pub fn feasibility(n: usize) -> Self {
        Self::new(Sense::Min, vec![0.0; n])
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Append a variable and return its index.
    pub fn add_var(&mut self, cost: f64, lower: f64, upper: f64) -> usize {
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.objective.len() - 1
    }

    /// Append a row and return its index.
    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, kind: RowKind, rhs: f64) -> usize {
        self.rows.push(Row { coeffs, kind, rhs });
        self.rows.len() - 1
    }

    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        self.lower[j] = lower;
        self.upper[j] = upper;
    }

    pub fn set_free(&mut self, j: usize) {
        self.set_bounds(j, f64::NEG_INFINITY, f64::INFINITY);
    }

    /// Build from a dense matrix, one kind per row.
    pub fn from_dense(
        sense: Sense,
        objective: Vec<f64>,
        a: &Array2<f64>,
        kinds: &[RowKind],
        b: &[f64],
    ) -> Result<Self> {
        if a.ncols() != objective.len() || a.nrows() != b.len() || kinds.len() != b.len() {
            return Err(Error::dim("LP data shapes disagree"));
        }
        let mut p = Self::new(sense, objective);
        for (i, row) in a.rows().into_iter().enumerate() {
            let coeffs = row
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(j, v)| (j, *v))
                .collect();
            p.add_row(coeffs, kinds[i], b[i]);
        }
        Ok(p)
    }

    /// Dense copy of the constraint matrix.
    pub fn dense_matrix(&self) -> Array2<f64> {
        let mut a = Array2::zeros((self.rows.len(), self.num_vars()));
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, v) in &r.coeffs {
                a[[i, j]] += v;
            }
        }
        a
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::dim("bounds do not match the objective"));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("objective has a non-finite entry"));
        }
        for j in 0..n {
            if self.lower[j].is_nan() || self.upper[j].is_nan() || self.lower[j] == f64::INFINITY
                || self.upper[j] == f64::NEG_INFINITY
            {
                return Err(Error::invalid(format!("variable {j} has invalid bounds")));
            }
            if self.lower[j] > self.upper[j] {
                return Err(Error::invalid(format!(
                    "variable {j} has lower bound above upper bound"
                )));
            }
        }
        for (i, r) in self.rows.iter().enumerate() {
            if !r.rhs.is_finite() {
                return Err(Error::invalid(format!("row {i} has a non-finite rhs")));
            }
            for &(j, v) in &r.coeffs {
                if j >= n {
                    return Err(Error::dim(format!("row {i} references variable {j} of {n}")));
                }
                if !v.is_finite() {
                    return Err(Error::invalid(format!("row {i} has a non-finite coefficient")));
                }
            }
        }
        Ok(())
    }

    /// `Aᵀ y`.
    pub fn transpose_mul(&self, y: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.num_vars()];
        for (r, &yi) in self.rows.iter().zip(y) {
            if yi != 0.0 {
                for &(j, v) in &r.coeffs {
                    z[j] += v * yi;
                }
            }
        }
        z
    }

    /// Row activities `A x`.
    pub fn activities(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.coeffs.iter().map(|&(j, v)| v * x[j]).sum())
            .collect()
    }

    /// Largest violation of rows and bounds by `x`.
    pub fn primal_residual(&self, x: &[f64]) -> f64 {
        let act = self.activities(x);
        let rows = self.rows.iter().zip(&act).map(|(r, &a)| match r.kind {
            RowKind::Le => (a - r.rhs).max(0.0),
            RowKind::Ge => (r.rhs - a).max(0.0),
            RowKind::Eq => (a - r.rhs).abs(),
        });
        let bounds = x
            .iter()
            .enumerate()
            .map(|(j, &v)| (self.lower[j] - v).max(v - self.upper[j]).max(0.0));
        rows.chain(bounds).fold(0.0, f64::max)
    }
}

/// Solver outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Proof of infeasibility: row multipliers `y` such that no point of the
/// variable box can satisfy the aggregated row `(Aᵀy)ᵀx ≤ yᵀb`.
///
/// Signs follow the rows: `y ≥ 0` on `≤` rows, `y ≤ 0` on `≥` rows, free on
/// equalities. `margin = min_box (Aᵀy)ᵀx − yᵀb` is strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct FarkasCert {
    pub y: Vec<f64>,
    pub margin: f64,
}

impl FarkasCert {
    /// Recompute the margin of `y` against `p`, or `None` if `y` breaks a
    /// sign condition or the box minimum is unbounded.
    pub fn margin_for(p: &LpProblem, y: &[f64]) -> Option<f64> {
        let sign_tol = 1e-12;
        for (r, &yi) in p.rows.iter().zip(y) {
            let ok = match r.kind {
                RowKind::Le => yi >= -sign_tol,
                RowKind::Ge => yi <= sign_tol,
                RowKind::Eq => true,
            };
            if !ok {
                return None;
            }
        }
        let z = p.transpose_mul(y);
        let scale = y.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
        let mut min_box = 0.0;
        for (j, &zj) in z.iter().enumerate() {
            if zj.abs() <= 1e-11 * scale {
                continue;
            }
            let bound = if zj > 0.0 { p.lower[j] } else { p.upper[j] };
            if !bound.is_finite() {
                return None;
            }
            min_box += zj * bound;
        }
        let yb: f64 = p.rows.iter().zip(y).map(|(r, yi)| r.rhs * yi).sum();
        Some(min_box - yb)
    }

    /// Check the certificate against `p`.
    pub fn verify(&self, p: &LpProblem) -> bool {
        Self::margin_for(p, &self.y).is_some_and(|m| m > tol::FARKAS)
    }
}

/// Solution of an [`LpProblem`].
///
/// For optimal problems `dual` holds one multiplier per row with
/// `value = bᵀy + Σ_j d_j·bound_j`, where `d = c − Aᵀy` are the reduced
/// costs and `bound_j` is the bound at which `x_j` rests.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub value: f64,
    pub primal: Vec<f64>,
    pub dual: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub farkas: Option<FarkasCert>,
    pub ray: Option<Vec<f64>>,
    pub diagnostics: Diagnostics,
}

/// Residuals and counters gathered by the solver.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub pivots: usize,
    pub dual_value: f64,
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub slackness: f64,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    pub fn is_infeasible(&self) -> bool {
        self.status == LpStatus::Infeasible
    }

    /// Turn a non-optimal status into an error.
    pub fn into_optimal(self) -> Result<Self> {
        match self.status {
            LpStatus::Optimal => Ok(self),
            LpStatus::Infeasible => Err(Error::Infeasible(Box::new(
                self.farkas.expect("infeasible solutions carry a certificate"),
            ))),
            LpStatus::Unbounded => Err(Error::NumericalBreakdown(
                "problem is unbounded".to_string(),
            )),
        }
    }
}

/// Solve with default options.
pub fn solve(p: &LpProblem) -> Result<LpSolution> {
    simplex::solve(p, &SolveOptions::default())
}

/// Solve and return a basic optimal point.
///
/// The simplex method always ends on a vertex of the feasible polyhedron, so
/// the primal point has at most `#rows` entries strictly inside their bounds.
pub fn solve_vertex(p: &LpProblem) -> Result<LpSolution> {
    simplex::solve(p, &SolveOptions::default())
}

/// Solve with explicit options.
pub fn solve_with(p: &LpProblem, opts: &SolveOptions) -> Result<LpSolution> {
    simplex::solve(p, opts)
}

/// Dual objective `bᵀy + Σ_j d_j·bound_j`, and the worst dual sign violation.
pub fn dual_objective(p: &LpProblem, y: &[f64]) -> (f64, f64) {
    let s = p.sense.sign();
    let z = p.transpose_mul(y);
    let mut viol: f64 = 0.0;
    for (r, &yi) in p.rows.iter().zip(y) {
        let yi = s * yi;
        viol = viol.max(match r.kind {
            RowKind::Le => yi.max(0.0),
            RowKind::Ge => (-yi).max(0.0),
            RowKind::Eq => 0.0,
        });
    }
    let mut val: f64 = p.rows.iter().zip(y).map(|(r, yi)| r.rhs * yi).sum();
    for j in 0..p.num_vars() {
        let d = p.objective[j] - z[j];
        let dm = s * d;
        let (lo, hi) = (p.lower[j], p.upper[j]);
        if dm >= 0.0 {
            if lo.is_finite() {
                val += d * lo;
            } else {
                viol = viol.max(dm);
            }
        } else if hi.is_finite() {
            val += d * hi;
        } else {
            viol = viol.max(-dm);
        }
    }
    (val, viol)
}

#[cfg(test)]
mod tests;
