use ndarray::Array2;

use super::{build_plan_lp, solve_vector_ot, PlanLp, VectorOtProblem};
use crate::error::{Error, Result};
use crate::lp::{self, LpProblem, RowKind, Sense};
use crate::measures::{FiniteSpace, TransportPlan, VectorMeasure};
use crate::scalar_ot::Feasibility;

/// A family of problems on midpoint grids of `[0,1]`.
pub struct RefinementSpec<'a> {
    /// `η(x) ∈ ℝᵈ`, with Lebesgue reference weights `1/N`.
    pub density: &'a dyn Fn(f64) -> Vec<f64>,
    /// Target values, `|Y| × d`.
    pub targets: Array2<f64>,
    /// `c(x, y)` for grid point `x` and target atom `y`.
    pub cost: &'a dyn Fn(f64, usize) -> f64,
    pub grids: Vec<usize>,
    /// Move an undominated `d = 2`, `|Y| = 2` target to the nearest point
    /// of the grid's dominance boundary instead of failing.
    pub snap: bool,
}

/// One resolution of a refinement study.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementPoint {
    pub n: usize,
    pub value: f64,
    pub dual_value: f64,
    /// `min max_{i,y,y'} |φᵢ(y) − φᵢ(y')|` over optimal duals.
    pub q: f64,
    pub plan: TransportPlan,
    /// Targets actually solved at this resolution.
    pub targets: Array2<f64>,
}

/// Growth pattern of `q_N` across the grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trend {
    /// The last two values differ by less than 10%.
    Bounded,
    /// Strictly increasing and not bounded.
    Diverging,
    Unclear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementReport {
    pub points: Vec<RefinementPoint>,
    pub trend: Trend,
}

/// `μ` on the midpoint grid `xᵢ = (i − ½)/N` with weights `1/N`.
pub fn grid_measure(n: usize, density: &dyn Fn(f64) -> Vec<f64>) -> Result<VectorMeasure> {
    if n == 0 {
        return Err(Error::invalid("grid needs at least one point"));
    }
    let space = FiniteSpace::midpoint_grid(n);
    let xs = space.line_coords().expect("grid has coordinates");
    let rows: Vec<Vec<f64>> = xs.iter().map(|&x| density(x)).collect();
    let d = rows[0].len();
    if d == 0 || rows.iter().any(|r| r.len() != d) {
        return Err(Error::dim("density must return the same nonzero length everywhere"));
    }
    let eta = Array2::from_shape_fn((n, d), |(i, c)| rows[i][c]);
    VectorMeasure::from_density(space, eta, vec![1.0 / n as f64; n])
}

/// Smallest spread of `φ` among dual solutions reaching `value`.
pub fn min_dual_spread(p: &VectorOtProblem, value: f64) -> Result<f64> {
    let built = build_plan_lp(&p.mu, p.eta.as_ref(), p.nu.values(), Some(&p.cost))?;
    spread_lp(&built, p, value)
}

fn spread_lp(built: &PlanLp, p: &VectorOtProblem, value: f64) -> Result<f64> {
    if p.eta.is_some() {
        return Err(Error::invalid("spread study uses the measure's own density"));
    }
    let eta = p.mu.density();
    let (ny, d) = (built.ys.len(), built.d);
    let mut q = LpProblem::new(Sense::Min, Vec::new());
    let psi: Vec<usize> = built
        .xs
        .iter()
        .map(|_| {
            let j = q.add_var(0.0, 0.0, 0.0);
            q.set_free(j);
            j
        })
        .collect();
    let phi: Vec<usize> = (0..ny * d)
        .map(|_| {
            let j = q.add_var(0.0, 0.0, 0.0);
            q.set_free(j);
            j
        })
        .collect();
    let t = q.add_var(1.0, 0.0, f64::INFINITY);
    for (i, &x) in built.xs.iter().enumerate() {
        for (j, &y) in built.ys.iter().enumerate() {
            let mut coeffs = vec![(psi[i], 1.0)];
            for c in 0..d {
                if eta[[x, c]] != 0.0 {
                    coeffs.push((phi[j * d + c], eta[[x, c]]));
                }
            }
            q.add_row(coeffs, RowKind::Le, p.cost[[x, y]]);
        }
    }
    let mut obj: Vec<(usize, f64)> = built
        .xs
        .iter()
        .enumerate()
        .map(|(i, &x)| (psi[i], p.mu.ref_weights()[x]))
        .collect();
    for (j, &y) in built.ys.iter().enumerate() {
        for c in 0..d {
            obj.push((phi[j * d + c], p.nu.values()[[y, c]]));
        }
    }
    let slack = 1e-10 * (1.0 + value.abs());
    q.add_row(obj, RowKind::Ge, value - slack);
    for c in 0..d {
        for j in 0..ny {
            for k in j + 1..ny {
                let (a, b) = (phi[j * d + c], phi[k * d + c]);
                q.add_row(vec![(a, 1.0), (b, -1.0), (t, -1.0)], RowKind::Le, 0.0);
                q.add_row(vec![(a, -1.0), (b, 1.0), (t, -1.0)], RowKind::Le, 0.0);
            }
        }
    }
    Ok(lp::solve(&q)?.into_optimal()?.value)
}

/// Solve the family at every grid size and track `q_N`.
pub fn dual_refinement_study(spec: &RefinementSpec) -> Result<RefinementReport> {
    let mut points = Vec::with_capacity(spec.grids.len());
    for &n in &spec.grids {
        let mu = grid_measure(n, spec.density)?;
        let m = spec.targets.nrows();
        let targets = if spec.snap {
            snap_targets(&mu, &spec.targets)?
        } else {
            spec.targets.clone()
        };
        let nu = VectorMeasure::new(FiniteSpace::indexed(m), targets.clone())?;
        let xs = mu.space().line_coords().expect("grid has coordinates");
        let cost = Array2::from_shape_fn((n, m), |(i, y)| (spec.cost)(xs[i], y));
        let p = VectorOtProblem::new(mu, nu, cost)?;
        let r = match solve_vector_ot(&p)? {
            Feasibility::Feasible(r) => r,
            Feasibility::Infeasible(_) => {
                return Err(Error::invalid(format!("targets are not dominated at N = {n}")))
            }
        };
        let q = min_dual_spread(&p, r.value)?;
        points.push(RefinementPoint {
            n,
            value: r.value,
            dual_value: r.dual_value,
            q,
            plan: r.plan,
            targets,
        });
    }
    let trend = classify(&points);
    Ok(RefinementReport { points, trend })
}

fn snap_targets(mu: &VectorMeasure, t: &Array2<f64>) -> Result<Array2<f64>> {
    if t.dim() != (2, 2) || super::dominates_values(mu, t)?.dominates {
        return Ok(t.clone());
    }
    let (a, b) = (t[[0, 0]], t[[0, 1]]);
    let Some((lo, hi)) = super::range_slice(mu, a)? else {
        return Err(Error::invalid(format!("no splitting of μ has first component {a}")));
    };
    let totals = mu.totals();
    let b = b.clamp(lo, hi);
    Ok(ndarray::array![[a, b], [totals[0] - a, totals[1] - b]])
}

fn classify(points: &[RefinementPoint]) -> Trend {
    let qs: Vec<f64> = points.iter().map(|p| p.q).collect();
    match qs.as_slice() {
        [.., a, b] if (b - a).abs() < 0.1 * a.abs().max(1e-12) => Trend::Bounded,
        [_, _, ..] if qs.windows(2).all(|w| w[1] > w[0]) => Trend::Diverging,
        _ => Trend::Unclear,
    }
}
