use ndarray::{array, Array2};

use crate::chain::{chain_free_medium, chain_ot, reduced_cost, ChainProblem};
use crate::duality::{moment_feasible, MomentProblem};
use crate::error::{Error, Result};
use crate::measures::{FiniteSpace, ScalarMeasure, VectorMeasure};
use crate::rng::{seeded, simplex_point, uniform};
use crate::scalar_ot::solve_ot;
use crate::vector_ot::{
    blackwell_check, dominates_values, dual_refinement_study, grid_measure, range_slice, strong_dominates,
    RefinementSpec,
};

/// One golden comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ItemResult {
    pub group: &'static str,
    pub name: String,
    pub measured: f64,
    pub expected: f64,
    pub tol: f64,
    pub pass: bool,
}

impl ItemResult {
    fn close(group: &'static str, name: impl Into<String>, measured: f64, expected: f64, tol: f64) -> Self {
        Self {
            group,
            name: name.into(),
            measured,
            expected,
            tol,
            pass: (measured - expected).abs() <= tol,
        }
    }

    fn flag(group: &'static str, name: impl Into<String>, ok: bool) -> Self {
        Self {
            group,
            name: name.into(),
            measured: f64::from(u8::from(ok)),
            expected: 1.0,
            tol: 0.0,
            pass: ok,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "[{}] {}/{}: measured {:.6e}, expected {:.6e}, tol {:.1e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.group,
            self.name,
            self.measured,
            self.expected,
            self.tol
        )
    }
}

type Item = fn(Option<f64>) -> Result<Vec<ItemResult>>;

/// Golden items as `(group, runner)`.
pub const ITEMS: [(&str, Item); 8] = [
    ("dominance", discrete_region),
    ("semi_discrete", semi_discrete_region),
    ("refinement", refinement),
    ("strong", strong_counterexample),
    ("moment", moment_boundary),
    ("chain", chain_identity),
    ("chain", chain_duality),
    ("blackwell", blackwell_pairs),
];

fn comps(c: &[Vec<f64>]) -> Result<VectorMeasure> {
    VectorMeasure::from_components(FiniteSpace::indexed(c[0].len()), c)
}

fn two_point(a: f64, b: f64) -> Array2<f64> {
    array![[a, b], [1.0 - a, 1.0 - b]]
}

fn discrete_region(_: Option<f64>) -> Result<Vec<ItemResult>> {
    let mu = comps(&[vec![1.0, 0.0], vec![0.5, 0.5]])?;
    let mut wrong = 0;
    for i in 0..=20 {
        for j in 0..=20 {
            let (a, b) = (i as f64 / 20.0, j as f64 / 20.0);
            let inside = 2.0 * b >= a - 1e-9 && 2.0 * b <= a + 1.0 + 1e-9;
            if dominates_values(&mu, &two_point(a, b))?.dominates != inside {
                wrong += 1;
            }
        }
    }
    Ok(vec![ItemResult::close("dominance", "region_mismatches", f64::from(wrong), 0.0, 0.0)])
}

fn semi_discrete_region(tol: Option<f64>) -> Result<Vec<ItemResult>> {
    let n = 200;
    let mu = grid_measure(n, &|x| vec![1.0, 2.0 * x])?;
    let mut worst: f64 = 0.0;
    for k in 1..=9 {
        let a = k as f64 / 10.0;
        let (lo, hi) = range_slice(&mu, a)?.unwrap_or((f64::NAN, f64::NAN));
        worst = worst.max((lo - a * a).abs()).max((hi - (2.0 * a - a * a)).abs());
    }
    let worst = if worst.is_nan() { f64::INFINITY } else { worst };
    Ok(vec![ItemResult::close(
        "semi_discrete",
        "boundary_deviation",
        worst,
        0.0,
        tol.unwrap_or(2.0 / n as f64),
    )])
}

fn refinement(tol: Option<f64>) -> Result<Vec<ItemResult>> {
    let sqrt_cost = |x: f64, y: usize| if y == 1 { (x - 0.5).max(0.0).sqrt() } else { 0.0 };
    let lip_cost = |x: f64, y: usize| if y == 1 { (x - 0.5).max(0.0) } else { 0.0 };
    let targets = array![[0.5, 0.25], [0.5, 0.75]];
    let run = |cost: &dyn Fn(f64, usize) -> f64| {
        dual_refinement_study(&RefinementSpec {
            density: &|x| vec![1.0, 2.0 * x],
            targets: targets.clone(),
            cost,
            grids: vec![25, 100, 400],
            snap: true,
        })
    };
    let sq = run(&sqrt_cost)?;
    let last = sq.points.last().expect("three grids");
    let mass: f64 = (0..last.n)
        .filter(|&i| (i as f64 + 0.5) / last.n as f64 <= 0.5)
        .map(|i| last.plan.matrix()[[i, 0]])
        .sum();
    let qs: Vec<f64> = sq.points.iter().map(|p| p.q).collect();
    let lip = run(&lip_cost)?;
    let (q100, q400) = (lip.points[1].q, lip.points[2].q);
    Ok(vec![
        ItemResult::close("refinement", "split_mass_N400", mass, 0.5, tol.unwrap_or(1.0 / 400.0)),
        ItemResult::flag("refinement", "sqrt_cost_q_increasing", qs.windows(2).all(|w| w[1] > w[0])),
        ItemResult::close(
            "refinement",
            "lipschitz_q_relative_change",
            (q400 - q100).abs() / q100.abs().max(1e-300),
            0.0,
            tol.unwrap_or(0.1),
        ),
    ])
}

fn strong_counterexample(_: Option<f64>) -> Result<Vec<ItemResult>> {
    let mu = comps(&[vec![2.0, 0.0, 2.0, 0.0], vec![1.0, 2.0, 0.0, 1.0]])?;
    let s = strong_dominates(&mu, &mu)?;
    let dom = crate::vector_ot::dominates(&mu, &mu)?.dominates;
    let witness = s
        .witness()
        .is_some_and(|w| w.a == [0, 3] && w.b == [1, 2]);
    Ok(vec![
        ItemResult::flag("strong", "self_dominates", dom),
        ItemResult::flag("strong", "not_strong_with_witness_ad_bc", !s.strong && witness),
    ])
}

/// Grid of the moment example: 512 points on `[−2, 2]`.
pub fn moment_grid() -> Vec<f64> {
    (0..512).map(|i| -2.0 + 4.0 * i as f64 / 511.0).collect()
}

/// Smallest `m₃` for which `(1, m₂, m₃)` is a moment vector on the grid,
/// located by bisection on the solver's verdicts. A point the solver cannot
/// classify lies on the boundary up to tolerance and ends the search.
pub fn moment_flip(m2: f64) -> Result<f64> {
    let grid = moment_grid();
    let (mut lo, mut hi) = (m2 * m2 - 0.01, m2 * m2 + 0.01);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        let p = MomentProblem::polynomial(&grid, array![1.0, m2, mid])?;
        match moment_feasible(&p) {
            Ok(f) if f.is_feasible() => hi = mid,
            Ok(_) => lo = mid,
            Err(Error::NumericalBreakdown(_)) => return Ok(mid),
            Err(e) => return Err(e),
        }
    }
    Ok(hi)
}

fn moment_boundary(tol: Option<f64>) -> Result<Vec<ItemResult>> {
    let h = 4.0 / 511.0;
    let band = h * h / 4.0;
    let mut worst: f64 = 0.0;
    for k in -4..=4 {
        let m2 = 0.2 * k as f64;
        let flip = moment_flip(m2)?;
        let excess = (m2 * m2 - flip).max(flip - (m2 * m2 + band)).max(0.0);
        worst = worst.max(excess);
    }
    Ok(vec![ItemResult::close("moment", "flip_outside_band", worst, 0.0, tol.unwrap_or(1e-8))])
}

fn chain_identity(tol: Option<f64>) -> Result<Vec<ItemResult>> {
    let pts = 32;
    let mut out = Vec::new();
    for p in 1..=3 {
        let c = Array2::from_shape_fn((pts, pts), |(i, j)| (i as f64 - j as f64).abs().powi(p));
        let scale = c.iter().fold(0.0f64, |a, v| a.max(*v));
        let mut worst: f64 = 0.0;
        for n in 1..=4usize {
            let r = reduced_cost(&c, n)?;
            let factor = ((n + 1) as f64).powi(1 - p);
            for ((i, j), v) in r.indexed_iter() {
                if i.abs_diff(j) % (n + 1) == 0 {
                    worst = worst.max((v - factor * c[[i, j]]).abs());
                }
            }
        }
        out.push(ItemResult::close(
            "chain",
            format!("power_identity_p{p}"),
            worst,
            0.0,
            tol.unwrap_or(1e-12 * scale),
        ));
    }
    Ok(out)
}

fn chain_duality(tol: Option<f64>) -> Result<Vec<ItemResult>> {
    let mut theorem: f64 = 0.0;
    let mut free: f64 = 0.0;
    for seed in 0..10u64 {
        let mut r = seeded(seed);
        let n = 3 + (seed as usize % 4);
        let pts: Vec<f64> = (0..n).map(|_| uniform(&mut r, 0.0, 1.0)).collect();
        let c = Array2::from_shape_fn((n, n), |(i, j)| (pts[i] - pts[j]).powi(2));
        let mu = ScalarMeasure::from_weights(simplex_point(&mut r, n, 1.0))?;
        let nu = ScalarMeasure::from_weights(simplex_point(&mut r, n, 1.0))?;
        let lambda = ScalarMeasure::from_weights(simplex_point(&mut r, n, 1.0))?;
        let hops = 1 + seed as usize % 3;
        let p = ChainProblem::new(c.clone(), mu.clone(), nu.clone(), lambda, hops)?;
        if let Some(res) = chain_ot(&p)?.feasible() {
            theorem = theorem.max(res.theorem_gap() / (1.0 + res.value.abs()));
        }
        let v = chain_free_medium(&mu, &nu, &c, hops)?;
        let w = solve_ot(&mu, &nu, &reduced_cost(&c, hops)?)?.value;
        free = free.max((v - w).abs());
    }
    Ok(vec![
        ItemResult::close("chain", "fine_duality_gap", theorem, 0.0, tol.unwrap_or(1e-6)),
        ItemResult::close("chain", "free_medium_gap", free, 0.0, tol.unwrap_or(1e-7)),
    ])
}

fn blackwell_pairs(tol: Option<f64>) -> Result<Vec<ItemResult>> {
    let mu = comps(&[vec![1.0, 0.0], vec![0.5, 0.5]])?;
    let inside = VectorMeasure::new(FiniteSpace::indexed(2), two_point(0.6, 0.5))?;
    let outside = VectorMeasure::new(FiniteSpace::indexed(2), two_point(0.0, 0.9))?;
    let good = blackwell_check(&mu, &inside, 64, 7)?;
    let bad = blackwell_check(&mu, &outside, 64, 7)?;
    let t = tol.unwrap_or(1e-8);
    Ok(vec![
        ItemResult::flag("blackwell", "dominated_pair_passes", good.passes(t)),
        ItemResult::flag(
            "blackwell",
            "failing_pair_has_witness",
            bad.agree() && !bad.plan_feasible && bad.witness.is_some_and(|w| w.gap < 0.0),
        ),
    ])
}

/// Run the golden suite, optionally filtered by group and with a common
/// tolerance override, on up to `jobs` threads.
pub fn verify(only: Option<&str>, tol: Option<f64>, jobs: usize) -> Vec<ItemResult> {
    let selected: Vec<(&str, Item)> = ITEMS
        .iter()
        .copied()
        .filter(|(g, _)| only.is_none_or(|o| o.split(',').any(|s| s.trim() == *g)))
        .collect();
    let jobs = jobs.max(1).min(selected.len().max(1));
    let mut slots: Vec<Vec<ItemResult>> = vec![Vec::new(); selected.len()];
    std::thread::scope(|scope| {
        for (w, chunk) in slots.chunks_mut(selected.len().div_ceil(jobs).max(1)).enumerate() {
            let base = w * selected.len().div_ceil(jobs).max(1);
            let selected = &selected;
            scope.spawn(move || {
                for (k, slot) in chunk.iter_mut().enumerate() {
                    let (group, item) = selected[base + k];
                    *slot = item(tol).unwrap_or_else(|e| {
                        vec![ItemResult {
                            group: static_group(group),
                            name: format!("error: {e}"),
                            measured: f64::NAN,
                            expected: 0.0,
                            tol: 0.0,
                            pass: false,
                        }]
                    });
                }
            });
        }
    });
    slots.into_iter().flatten().collect()
}

fn static_group(g: &str) -> &'static str {
    ITEMS.iter().map(|(s, _)| *s).find(|s| *s == g).unwrap_or("unknown")
}

/// Group names accepted by `only`.
pub fn groups() -> Vec<&'static str> {
    let mut g: Vec<&'static str> = ITEMS.iter().map(|(s, _)| *s).collect();
    g.dedup();
    g
}
