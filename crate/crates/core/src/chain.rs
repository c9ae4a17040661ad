//! Multi-hop transport: min-plus reduced costs and chains of plans
//! through intermediate measures with a prescribed average.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::lp::{self, FarkasCert, LpProblem, LpStatus, RowKind, Sense};
use crate::measures::ScalarMeasure;
use crate::scalar_ot::{solve_ot, Feasibility};

fn square(c: &Array2<f64>) -> Result<usize> {
    let (n, m) = c.dim();
    if n != m || n == 0 {
        return Err(Error::dim(format!("cost must be square and nonempty, got {n}x{m}")));
    }
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("cost has a non-finite entry"));
    }
    Ok(n)
}

/// One min-plus step `min_z a(x,z) + c(z,y) − f(z)`, with the argmin.
fn step(a: &Array2<f64>, c: &Array2<f64>, f: &[f64]) -> (Array2<f64>, Array2<usize>) {
    let n = c.nrows();
    let mut out = Array2::from_elem((n, n), f64::INFINITY);
    let mut arg = Array2::zeros((n, n));
    for x in 0..n {
        for z in 0..n {
            let base = a[[x, z]] - f[z];
            for y in 0..n {
                let v = base + c[[z, y]];
                if v < out[[x, y]] {
                    out[[x, y]] = v;
                    arg[[x, y]] = z;
                }
            }
        }
    }
    (out, arg)
}

/// `c_{0,n}`: cheapest route from `x` to `y` with `n` intermediate stops.
pub fn reduced_cost(c: &Array2<f64>, n: usize) -> Result<Array2<f64>> {
    let size = square(c)?;
    weighted_reduced_cost(c, &vec![0.0; size], n)
}

/// `c_{f,n}`: as [`reduced_cost`] with a fine `f(z)` charged at every stop.
pub fn weighted_reduced_cost(c: &Array2<f64>, f: &[f64], n: usize) -> Result<Array2<f64>> {
    let size = square(c)?;
    if f.len() != size {
        return Err(Error::dim("fine must have one entry per point"));
    }
    let mut acc = c.clone();
    for _ in 0..n {
        acc = step(&acc, c, f).0;
    }
    Ok(acc)
}

/// A cheapest stop sequence `x = z₀, z₁, …, zₙ, zₙ₊₁ = y` for `c_{f,n}`.
///
/// Ties go to the smallest index.
pub fn reduced_path(c: &Array2<f64>, f: &[f64], n: usize, x: usize, y: usize) -> Result<Vec<usize>> {
    let size = square(c)?;
    if f.len() != size || x >= size || y >= size {
        return Err(Error::dim("fine or endpoints out of range"));
    }
    let mut tables = vec![c.clone()];
    let mut args = Vec::with_capacity(n);
    for _ in 0..n {
        let (next, arg) = step(tables.last().expect("nonempty"), c, f);
        tables.push(next);
        args.push(arg);
    }
    let mut path = vec![y];
    let mut end = y;
    for arg in args.iter().rev() {
        end = arg[[x, end]];
        path.push(end);
    }
    path.push(x);
    path.reverse();
    Ok(path)
}

/// Data of a chain transport problem on one finite space.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainProblem {
    pub cost: Array2<f64>,
    pub mu: ScalarMeasure,
    pub nu: ScalarMeasure,
    /// Average of the intermediate measures.
    pub lambda: ScalarMeasure,
    pub hops: usize,
}

impl ChainProblem {
    pub fn new(cost: Array2<f64>, mu: ScalarMeasure, nu: ScalarMeasure, lambda: ScalarMeasure, hops: usize) -> Result<Self> {
        let size = square(&cost)?;
        for (name, m) in [("μ", &mu), ("ν", &nu), ("λ", &lambda)] {
            if m.weights().len() != size {
                return Err(Error::dim(format!("{name} does not live on the cost's space")));
            }
        }
        if hops == 0 {
            return Err(Error::invalid("chains need at least one intermediate measure"));
        }
        let mass = mu.mass();
        if (nu.mass() - mass).abs() > 1e-9 * mass.max(1.0) || (lambda.mass() - mass).abs() > 1e-9 * mass.max(1.0) {
            return Err(Error::invalid("μ, ν and λ must have equal mass"));
        }
        Ok(Self {
            cost,
            mu,
            nu,
            lambda,
            hops,
        })
    }
}

/// Optimal chain of plans and the fine recovered from its dual.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainResult {
    pub value: f64,
    /// `π₀, …, πₙ` with `π₀` leaving `μ` and `πₙ` arriving at `ν`.
    pub plans: Vec<Array2<f64>>,
    /// Multiplier of the averaging constraint.
    pub fine: Vec<f64>,
    /// `(c_{f,n})_#(μ,ν) + n∫f dλ` evaluated independently.
    pub dual_bound: f64,
    pub pivots: usize,
}

impl ChainResult {
    pub fn theorem_gap(&self) -> f64 {
        (self.value - self.dual_bound).abs()
    }

    /// Intermediate measures `ρ₁, …, ρₙ`.
    pub fn intermediates(&self) -> Vec<Vec<f64>> {
        self.plans[1..]
            .iter()
            .map(|p| p.sum_axis(ndarray::Axis(1)).to_vec())
            .collect()
    }
}

fn chain_lp(p: &ChainProblem, with_average: bool) -> (LpProblem, usize) {
    let n = p.cost.nrows();
    let hops = p.hops;
    let var = |i: usize, x: usize, y: usize| (i * n + x) * n + y;
    let mut obj = Vec::with_capacity((hops + 1) * n * n);
    for _ in 0..=hops {
        obj.extend(p.cost.iter().copied());
    }
    let mut lp = LpProblem::new(Sense::Min, obj);
    for x in 0..n {
        lp.add_row((0..n).map(|y| (var(0, x, y), 1.0)).collect(), RowKind::Eq, p.mu.weights()[x]);
    }
    for y in 0..n {
        lp.add_row((0..n).map(|x| (var(hops, x, y), 1.0)).collect(), RowKind::Eq, p.nu.weights()[y]);
    }
    // second marginal of πᵢ₋₁ equals first marginal of πᵢ
    for i in 1..=hops {
        for z in 0..n {
            let mut coeffs: Vec<(usize, f64)> = (0..n).map(|x| (var(i - 1, x, z), 1.0)).collect();
            coeffs.extend((0..n).map(|y| (var(i, z, y), -1.0)));
            lp.add_row(coeffs, RowKind::Eq, 0.0);
        }
    }
    let avg_start = lp.num_rows();
    if with_average {
        for x in 0..n {
            let coeffs = (1..=hops).flat_map(|i| (0..n).map(move |y| (var(i, x, y), 1.0))).collect();
            lp.add_row(coeffs, RowKind::Eq, hops as f64 * p.lambda.weights()[x]);
        }
    }
    (lp, avg_start)
}

fn unpack_plans(primal: &[f64], n: usize, hops: usize) -> Vec<Array2<f64>> {
    (0..=hops)
        .map(|i| {
            Array2::from_shape_vec((n, n), primal[i * n * n..(i + 1) * n * n].iter().map(|v| v.max(0.0)).collect())
                .expect("shape")
        })
        .collect()
}

/// Cheapest chain `μ = ρ₀ → ρ₁ → … → ρₙ → ρₙ₊₁ = ν` with `Σᵢρᵢ = nλ`.
pub fn chain_ot(p: &ChainProblem) -> Result<Feasibility<ChainResult, FarkasCert>> {
    let n = p.cost.nrows();
    let (lp, avg) = chain_lp(p, true);
    let sol = lp::solve(&lp)?;
    match sol.status {
        LpStatus::Infeasible => return Ok(Feasibility::Infeasible(sol.farkas.expect("certificate present"))),
        LpStatus::Unbounded => return Err(Error::NumericalBreakdown("chain LP unbounded".into())),
        LpStatus::Optimal => {}
    }
    let fine = sol.dual[avg..avg + n].to_vec();
    let reduced = weighted_reduced_cost(&p.cost, &fine, p.hops)?;
    let inner = solve_ot(&p.mu, &p.nu, &reduced)?.value;
    let dual_bound = inner + p.hops as f64 * p.lambda.integrate(&fine);
    if (sol.value - dual_bound).abs() > 1e-6 * (1.0 + sol.value.abs()) {
        return Err(Error::NumericalBreakdown(format!(
            "chain value {} and dual bound {dual_bound} disagree",
            sol.value
        )));
    }
    Ok(Feasibility::Feasible(ChainResult {
        value: sol.value,
        plans: unpack_plans(&sol.primal, n, p.hops),
        fine,
        dual_bound,
        pivots: sol.diagnostics.pivots,
    }))
}

/// Cheapest chain with `n` intermediate measures of any average.
pub fn chain_free_medium(mu: &ScalarMeasure, nu: &ScalarMeasure, c: &Array2<f64>, hops: usize) -> Result<f64> {
    let p = ChainProblem::new(c.clone(), mu.clone(), nu.clone(), mu.clone(), hops)?;
    let (lp, _) = chain_lp(&p, false);
    Ok(lp::solve(&lp)?.into_optimal()?.value)
}
