//! Two-phase revised simplex on the standard form `A x = b, x ≥ 0, b ≥ 0`.

use super::factor::{BasisFactor, SparseCol};
use super::{dual_objective, Diagnostics, FarkasCert, LpProblem, LpSolution, LpStatus, RowKind};
use crate::error::{Error, Result};
use crate::tol;

/// Tuning knobs for [`super::solve_with`].
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Reduced costs below `-optimality` make a column eligible to enter.
    pub optimality: f64,
    /// Smallest admissible pivot element.
    pub pivot: f64,
    /// Eta updates between refactorizations.
    pub refactor_every: usize,
    /// Print every pivot to stderr.
    pub verbose: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            optimality: 1e-10,
            pivot: 1e-9,
            refactor_every: 64,
            verbose: false,
        }
    }
}

/// How an original variable maps onto standard-form columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = offset + sign·x'`.
    Shift { col: usize, offset: f64, sign: f64 },
    /// `x = x⁺ − x⁻`.
    Split { pos: usize, neg: usize },
    /// Removed by presolve at this value.
    Fixed(f64),
}

struct Standard {
    m: usize,
    cols: Vec<SparseCol>,
    cost: Vec<f64>,
    b: Vec<f64>,
    /// Sign applied to each standard row so that `b ≥ 0`.
    row_sign: Vec<f64>,
    /// Original row index of each standard row (`None` for bound rows).
    origin: Vec<Option<usize>>,
    vars: Vec<VarMap>,
    /// First artificial column.
    n_real: usize,
    /// Initial basis, one column per row.
    basis: Vec<usize>,
}

enum Presolved {
    Ready(Standard),
    Infeasible(FarkasCert),
    Unbounded(Vec<f64>),
}

fn presolve(p: &LpProblem) -> Presolved {
    let n = p.num_vars();
    let s = p.sense.sign();
    let mut used = vec![false; n];
    for r in &p.rows {
        for &(j, v) in &r.coeffs {
            if v != 0.0 {
                used[j] = true;
            }
        }
    }
    let mut vars = Vec::with_capacity(n);
    let mut cols: Vec<SparseCol> = Vec::new();
    let mut cost = Vec::new();
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for j in 0..n {
        let (lo, hi, c) = (p.lower[j], p.upper[j], s * p.objective[j]);
        if lo == hi {
            vars.push(VarMap::Fixed(lo));
            continue;
        }
        if !used[j] {
            let v = if c > 0.0 {
                lo
            } else if c < 0.0 {
                hi
            } else if lo.is_finite() {
                lo
            } else if hi.is_finite() {
                hi
            } else {
                0.0
            };
            if !v.is_finite() {
                let mut ray = vec![0.0; n];
                ray[j] = if c > 0.0 { -1.0 } else { 1.0 };
                return Presolved::Unbounded(ray);
            }
            vars.push(VarMap::Fixed(v));
            continue;
        }
        if lo.is_finite() {
            let col = cols.len();
            cols.push(Vec::new());
            cost.push(c);
            if hi.is_finite() {
                bound_rows.push((col, hi - lo));
            }
            vars.push(VarMap::Shift {
                col,
                offset: lo,
                sign: 1.0,
            });
        } else if hi.is_finite() {
            let col = cols.len();
            cols.push(Vec::new());
            cost.push(-c);
            vars.push(VarMap::Shift {
                col,
                offset: hi,
                sign: -1.0,
            });
        } else {
            let pos = cols.len();
            cols.push(Vec::new());
            cols.push(Vec::new());
            cost.push(c);
            cost.push(-c);
            vars.push(VarMap::Split { pos, neg: pos + 1 });
        }
    }

    let mut b = Vec::new();
    let mut origin = Vec::new();
    let mut slack_sign = Vec::new();
    for (i, r) in p.rows.iter().enumerate() {
        let mut rhs = r.rhs;
        let mut entries: Vec<(usize, f64)> = Vec::new();
        for &(j, v) in &r.coeffs {
            if v == 0.0 {
                continue;
            }
            match vars[j] {
                VarMap::Fixed(x) => rhs -= v * x,
                VarMap::Shift { col, offset, sign } => {
                    rhs -= v * offset;
                    entries.push((col, sign * v));
                }
                VarMap::Split { pos, neg } => {
                    entries.push((pos, v));
                    entries.push((neg, -v));
                }
            }
        }
        entries.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, f64)> = Vec::new();
        for (c, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == c => last.1 += v,
                _ => merged.push((c, v)),
            }
        }
        merged.retain(|e| e.1 != 0.0);
        if merged.is_empty() {
            let scale = 1e-9 * (1.0 + r.rhs.abs());
            let violated = match r.kind {
                RowKind::Le => rhs < -scale,
                RowKind::Ge => rhs > scale,
                RowKind::Eq => rhs.abs() > scale,
            };
            if violated {
                let mut y = vec![0.0; p.num_rows()];
                y[i] = if rhs < 0.0 { 1.0 } else { -1.0 };
                let margin = FarkasCert::margin_for(p, &y).unwrap_or(0.0);
                return Presolved::Infeasible(FarkasCert { y, margin });
            }
            continue;
        }
        let row = b.len();
        for (c, v) in merged {
            cols[c].push((row, v));
        }
        b.push(rhs);
        origin.push(Some(i));
        slack_sign.push(match r.kind {
            RowKind::Le => Some(1.0),
            RowKind::Ge => Some(-1.0),
            RowKind::Eq => None,
        });
    }
    for (col, ub) in bound_rows {
        let row = b.len();
        cols[col].push((row, 1.0));
        b.push(ub);
        origin.push(None);
        slack_sign.push(Some(1.0));
    }
    let m = b.len();
    for (row, ss) in slack_sign.iter().enumerate() {
        if let Some(sg) = ss {
            cols.push(vec![(row, *sg)]);
            cost.push(0.0);
        }
    }
    let mut row_sign = vec![1.0; m];
    for (i, bi) in b.iter_mut().enumerate() {
        if *bi < 0.0 {
            row_sign[i] = -1.0;
            *bi = -*bi;
        }
    }
    for col in cols.iter_mut() {
        for e in col.iter_mut() {
            e.1 *= row_sign[e.0];
        }
    }
    let n_real = cols.len();
    let mut basis = vec![usize::MAX; m];
    for (j, col) in cols.iter().enumerate() {
        if col.len() == 1 && col[0].1 == 1.0 && basis[col[0].0] == usize::MAX {
            basis[col[0].0] = j;
        }
    }
    for (r, slot) in basis.iter_mut().enumerate() {
        if *slot == usize::MAX {
            *slot = cols.len();
            cols.push(vec![(r, 1.0)]);
            cost.push(0.0);
        }
    }
    Presolved::Ready(Standard {
        m,
        cols,
        cost,
        b,
        row_sign,
        origin,
        vars,
        n_real,
        basis,
    })
}

struct Engine<'a> {
    sf: &'a Standard,
    opts: &'a SolveOptions,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    factor: BasisFactor,
    xb: Vec<f64>,
    pivots: usize,
    limit: usize,
}

enum PhaseEnd {
    Optimal,
    Unbounded(usize, Vec<f64>),
}

impl<'a> Engine<'a> {
    fn new(sf: &'a Standard, opts: &'a SolveOptions) -> Result<Self> {
        let mut in_basis = vec![false; sf.cols.len()];
        for &j in &sf.basis {
            in_basis[j] = true;
        }
        let refs: Vec<&SparseCol> = sf.basis.iter().map(|&j| &sf.cols[j]).collect();
        let factor = BasisFactor::factor(sf.m, &refs)?;
        let total = sf.m + sf.cols.len();
        let mut e = Self {
            sf,
            opts,
            basis: sf.basis.clone(),
            in_basis,
            factor,
            xb: Vec::new(),
            pivots: 0,
            limit: 10 * total * total,
        };
        e.recompute_xb();
        Ok(e)
    }

    fn refactor(&mut self) -> Result<()> {
        let refs: Vec<&SparseCol> = self.basis.iter().map(|&j| &self.sf.cols[j]).collect();
        self.factor = BasisFactor::factor(self.sf.m, &refs)?;
        self.recompute_xb();
        Ok(())
    }

    fn recompute_xb(&mut self) {
        let mut x = self.sf.b.clone();
        self.factor.ftran(&mut x);
        for v in x.iter_mut() {
            if *v < 0.0 && *v > -1e-11 {
                *v = 0.0;
            }
        }
        self.xb = x;
    }

    fn multipliers(&self, cost: &[f64]) -> Vec<f64> {
        let mut u: Vec<f64> = self.basis.iter().map(|&j| cost[j]).collect();
        self.factor.btran(&mut u);
        u
    }

    fn reduced_cost(&self, cost: &[f64], u: &[f64], j: usize) -> f64 {
        cost[j] - self.sf.cols[j].iter().map(|&(i, v)| u[i] * v).sum::<f64>()
    }

    fn column(&self, j: usize) -> Vec<f64> {
        let mut a = vec![0.0; self.sf.m];
        for &(i, v) in &self.sf.cols[j] {
            a[i] = v;
        }
        self.factor.ftran(&mut a);
        a
    }

    fn pivot(&mut self, pos: usize, q: usize, alpha: &[f64]) -> Result<()> {
        let theta = self.xb[pos] / alpha[pos];
        for (i, x) in self.xb.iter_mut().enumerate() {
            if i != pos {
                *x -= theta * alpha[i];
                if *x < 0.0 && *x > -1e-11 {
                    *x = 0.0;
                }
            }
        }
        self.xb[pos] = theta.max(0.0);
        let leaving = self.basis[pos];
        self.in_basis[leaving] = false;
        self.in_basis[q] = true;
        self.basis[pos] = q;
        self.factor.update(pos, alpha);
        self.pivots += 1;
        if self.opts.verbose {
            eprintln!(
                "pivot {:>6}: enter {q} leave {leaving} at row {pos}, step {theta:.6e}",
                self.pivots
            );
        }
        if self.factor.updates() >= self.opts.refactor_every {
            self.refactor()?;
        }
        if self.pivots > self.limit {
            return Err(Error::NumericalBreakdown(format!(
                "pivot limit {} exceeded",
                self.limit
            )));
        }
        Ok(())
    }

    /// Bland-rule simplex on `cost`; columns `>= allow` never enter.
    ///
    /// With `pin_artificials`, basic artificials leave at step zero whenever
    /// the entering column touches their row.
    fn run(&mut self, cost: &[f64], allow: usize, pin_artificials: bool) -> Result<PhaseEnd> {
        loop {
            let u = self.multipliers(cost);
            let entering = (0..allow).find(|&j| {
                !self.in_basis[j] && self.reduced_cost(cost, &u, j) < -self.opts.optimality
            });
            let Some(q) = entering else {
                return Ok(PhaseEnd::Optimal);
            };
            let alpha = self.column(q);
            let pinned = if pin_artificials {
                (0..self.sf.m).find(|&i| {
                    self.basis[i] >= self.sf.n_real && alpha[i].abs() > self.opts.pivot
                })
            } else {
                None
            };
            let mut best: Option<(f64, usize)> = pinned.map(|i| (0.0, i));
            for (i, &a) in alpha.iter().enumerate() {
                if pinned.is_some() || a <= self.opts.pivot {
                    continue;
                }
                let ratio = self.xb[i].max(0.0) / a;
                best = match best {
                    None => Some((ratio, i)),
                    Some((r, k)) => {
                        let tie = (ratio - r).abs() <= 1e-12 * (1.0 + r.abs());
                        if (tie && self.basis[i] < self.basis[k]) || (!tie && ratio < r) {
                            Some((ratio, i))
                        } else {
                            Some((r, k))
                        }
                    }
                };
            }
            let Some((_, pos)) = best else {
                return Ok(PhaseEnd::Unbounded(q, alpha));
            };
            self.pivot(pos, q, &alpha)?;
        }
    }

    /// Pivot basic artificials out wherever a real column can replace them.
    fn drive_out_artificials(&mut self) -> Result<()> {
        for pos in 0..self.sf.m {
            if self.basis[pos] < self.sf.n_real {
                continue;
            }
            let mut e = vec![0.0; self.sf.m];
            e[pos] = 1.0;
            self.factor.btran(&mut e);
            let cand = (0..self.sf.n_real).find(|&j| {
                !self.in_basis[j]
                    && self.sf.cols[j]
                        .iter()
                        .map(|&(i, v)| e[i] * v)
                        .sum::<f64>()
                        .abs()
                        > 1e-7
            });
            if let Some(q) = cand {
                let alpha = self.column(q);
                self.pivot(pos, q, &alpha)?;
            }
        }
        Ok(())
    }

    fn standard_primal(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.sf.cols.len()];
        for (pos, &j) in self.basis.iter().enumerate() {
            x[j] = self.xb[pos].max(0.0);
        }
        x
    }
}

fn map_primal(sf: &Standard, xs: &[f64], with_offset: bool) -> Vec<f64> {
    sf.vars
        .iter()
        .map(|v| match *v {
            VarMap::Fixed(x) => {
                if with_offset {
                    x
                } else {
                    0.0
                }
            }
            VarMap::Shift { col, offset, sign } => {
                (if with_offset { offset } else { 0.0 }) + sign * xs[col]
            }
            VarMap::Split { pos, neg } => xs[pos] - xs[neg],
        })
        .collect()
}

/// Map standard-row multipliers back to original rows, scaled by `scale`.
fn map_rows(p: &LpProblem, sf: &Standard, u: &[f64], scale: f64) -> Vec<f64> {
    let mut y = vec![0.0; p.num_rows()];
    for (r, o) in sf.origin.iter().enumerate() {
        if let Some(i) = o {
            y[*i] = scale * sf.row_sign[r] * u[r];
        }
    }
    y
}

pub(super) fn solve(p: &LpProblem, opts: &SolveOptions) -> Result<LpSolution> {
    p.validate()?;
    let n = p.num_vars();
    let empty = |status, farkas, ray| LpSolution {
        status,
        value: match status {
            LpStatus::Infeasible => p.sense.sign() * f64::INFINITY,
            _ => -p.sense.sign() * f64::INFINITY,
        },
        primal: Vec::new(),
        dual: Vec::new(),
        reduced_costs: Vec::new(),
        farkas,
        ray,
        diagnostics: Diagnostics::default(),
    };
    let sf = match presolve(p) {
        Presolved::Ready(sf) => sf,
        Presolved::Infeasible(cert) => return finish_infeasible(p, cert.y, 0, empty),
        Presolved::Unbounded(ray) => return Ok(empty(LpStatus::Unbounded, None, Some(ray))),
    };

    let mut engine = Engine::new(&sf, opts)?;
    let has_artificial = sf.basis.iter().any(|&j| j >= sf.n_real);
    if has_artificial {
        let phase1: Vec<f64> = (0..sf.cols.len())
            .map(|j| if j >= sf.n_real { 1.0 } else { 0.0 })
            .collect();
        match engine.run(&phase1, sf.n_real, false)? {
            PhaseEnd::Optimal => {}
            PhaseEnd::Unbounded(..) => {
                return Err(Error::NumericalBreakdown(
                    "phase one reported an unbounded direction".into(),
                ))
            }
        }
        engine.refactor()?;
        let infeas: f64 = engine
            .basis
            .iter()
            .zip(&engine.xb)
            .filter(|(&j, _)| j >= sf.n_real)
            .map(|(_, &x)| x)
            .sum();
        let bscale = sf.b.iter().fold(0.0f64, |a, &v| a.max(v));
        if infeas > tol::FARKAS * (1.0 + bscale) {
            let u = engine.multipliers(&phase1);
            let y = map_rows(p, &sf, &u, -1.0);
            return finish_infeasible(p, y, engine.pivots, empty);
        }
        engine.drive_out_artificials()?;
    }

    let cost: Vec<f64> = sf.cost.clone();
    let end = engine.run(&cost, sf.n_real, true)?;
    engine.refactor()?;
    if let PhaseEnd::Unbounded(q, alpha) = end {
        let mut d = vec![0.0; sf.cols.len()];
        d[q] = 1.0;
        for (pos, &j) in engine.basis.iter().enumerate() {
            d[j] = -alpha[pos];
        }
        let ray = map_primal(&sf, &d, false);
        let mut sol = empty(LpStatus::Unbounded, None, Some(ray));
        sol.diagnostics.pivots = engine.pivots;
        return Ok(sol);
    }

    let xs = engine.standard_primal();
    let x = map_primal(&sf, &xs, true);
    let u = engine.multipliers(&cost);
    let y = map_rows(p, &sf, &u, p.sense.sign());
    let z = p.transpose_mul(&y);
    let d: Vec<f64> = (0..n).map(|j| p.objective[j] - z[j]).collect();
    let value: f64 = p.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    let (dual_value, dual_residual) = dual_objective(p, &y);
    let primal_residual = p.primal_residual(&x);
    let act = p.activities(&x);
    let mut slackness: f64 = 0.0;
    for ((r, a), yi) in p.rows.iter().zip(&act).zip(&y) {
        slackness = slackness.max(((a - r.rhs) * yi).abs());
    }
    for j in 0..n {
        let gap_lo = if p.lower[j].is_finite() { x[j] - p.lower[j] } else { f64::INFINITY };
        let gap_hi = if p.upper[j].is_finite() { p.upper[j] - x[j] } else { f64::INFINITY };
        let dist = gap_lo.min(gap_hi);
        let dist = if dist.is_finite() { dist } else { x[j].abs().max(1.0) };
        slackness = slackness.max((d[j] * dist).abs());
    }
    let gap = (value - dual_value).abs();
    let scale = 1.0 + value.abs();
    let xscale = 1.0 + x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if primal_residual > 1e-6 * xscale || gap > 1e-5 * scale || dual_residual > 1e-5 * scale {
        return Err(Error::NumericalBreakdown(format!(
            "solution failed validation: primal residual {primal_residual:.2e}, \
             dual residual {dual_residual:.2e}, gap {gap:.2e}"
        )));
    }
    Ok(LpSolution {
        status: LpStatus::Optimal,
        value,
        primal: x,
        dual: y,
        reduced_costs: d,
        farkas: None,
        ray: None,
        diagnostics: Diagnostics {
            pivots: engine.pivots,
            dual_value,
            gap,
            primal_residual,
            dual_residual,
            slackness,
        },
    })
}

fn finish_infeasible(
    p: &LpProblem,
    mut y: Vec<f64>,
    pivots: usize,
    empty: impl Fn(LpStatus, Option<FarkasCert>, Option<Vec<f64>>) -> LpSolution,
) -> Result<LpSolution> {
    for (r, yi) in p.rows.iter().zip(y.iter_mut()) {
        let clamp = match r.kind {
            RowKind::Le => *yi < 0.0 && *yi > -1e-10,
            RowKind::Ge => *yi > 0.0 && *yi < 1e-10,
            RowKind::Eq => false,
        };
        if clamp {
            *yi = 0.0;
        }
    }
    let scale = y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale > 0.0 {
        for v in y.iter_mut() {
            *v /= scale;
        }
    }
    match FarkasCert::margin_for(p, &y) {
        Some(margin) if margin > tol::FARKAS => {
            let mut sol = empty(LpStatus::Infeasible, Some(FarkasCert { y, margin }), None);
            sol.diagnostics.pivots = pivots;
            Ok(sol)
        }
        m => Err(Error::NumericalBreakdown(format!(
            "infeasibility certificate failed validation (margin {m:?})"
        ))),
    }
}
