use nalgebra::{DMatrix, DVector};
use ndarray::{Array2, ArrayView1};
use rand::Rng;

use super::dominance::{dominates_values, DominanceCert};
use super::{build_plan_lp, normalizer};
use crate::error::Result;
use crate::lp::{self, LpProblem, RowKind};
use crate::measures::{Kernel, VectorMeasure};
use crate::rng;

/// `g(z) = maxₖ ⟨aₖ, z⟩ + bₖ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexSample {
    pub slopes: Array2<f64>,
    pub offsets: Vec<f64>,
}

impl ConvexSample {
    pub fn eval(&self, z: ArrayView1<f64>) -> f64 {
        self.slopes
            .rows()
            .into_iter()
            .zip(&self.offsets)
            .map(|(a, b)| a.dot(&z) + b)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn random(rng: &mut impl Rng, d: usize) -> Self {
        let k = rng.random_range(2..=6);
        Self {
            slopes: Array2::from_shape_fn((k, d), |_| rng::uniform(rng, -1.0, 1.0)),
            offsets: (0..k).map(|_| rng::uniform(rng, -1.0, 1.0)).collect(),
        }
    }

    /// `∫g(η_μ) d|μ| − ∫g(η_ν) d|ν|`; nonnegative whenever `μ ≻ ν` with `CondDens`.
    pub fn jensen_gap(&self, mu: &VectorMeasure, nu: &VectorMeasure) -> f64 {
        side(self, mu) - side(self, nu)
    }
}

fn side(g: &ConvexSample, m: &VectorMeasure) -> f64 {
    m.ref_weights()
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 0.0)
        .map(|(x, &w)| w * g.eval(m.density().row(x)))
        .sum()
}

/// A convex `g` violating the Jensen inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct JensenWitness {
    pub g: ConvexSample,
    pub gap: f64,
}

/// Outcome of checking the Blackwell equivalences on one pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BlackwellReport {
    /// Condition (3): the plan polytope is nonempty.
    pub plan_feasible: bool,
    /// Condition (4): some kernel maps `μ` to `ν`.
    pub kernel_feasible: bool,
    /// `s*` with `⟨s*, η⟩ ≡ 1` on both sides, when it exists.
    pub cond_dens: Option<Vec<f64>>,
    pub cond_dens_residual: f64,
    /// Condition (1): `Q` on `Y → X` averaging densities.
    pub reversed: Option<Kernel>,
    /// `max |Q|ν| − |μ||`.
    pub reversed_marginal_error: Option<f64>,
    /// `max |Σ_x Q(y,x) η_μ(x) − η_ν(y)|`.
    pub density_average_error: Option<f64>,
    /// Condition (2) over sampled `g`.
    pub samples: usize,
    pub min_jensen_gap: f64,
    pub worst_sample: Option<ConvexSample>,
    /// Convex `g` built from a Farkas pair when `μ ⊁ ν`.
    pub witness: Option<JensenWitness>,
}

impl BlackwellReport {
    pub fn agree(&self) -> bool {
        self.plan_feasible == self.kernel_feasible
    }

    /// Only the implications `1 ⇒ 2 ⇒ 3 ⇔ 4` are available.
    pub fn restricted(&self) -> bool {
        self.cond_dens.is_none()
    }

    pub fn jensen_holds(&self, tol: f64) -> bool {
        self.min_jensen_gap >= -tol
    }

    /// Every checked condition passes within `tol`.
    pub fn passes(&self, tol: f64) -> bool {
        let reversed_ok = match (self.reversed_marginal_error, self.density_average_error) {
            (Some(a), Some(b)) => a <= tol && b <= tol,
            _ => self.restricted() || !self.plan_feasible,
        };
        self.agree() && self.plan_feasible && reversed_ok && self.jensen_holds(tol)
    }
}

/// Solve `⟨s, η_μ(x)⟩ = 1 = ⟨s, η_ν(y)⟩` in the least-squares sense.
pub(crate) fn cond_dens(mu: &VectorMeasure, nu: &VectorMeasure) -> (Vec<f64>, f64) {
    let d = mu.dim();
    let rows: Vec<ArrayView1<f64>> = [mu, nu]
        .iter()
        .flat_map(|m| {
            (0..m.len())
                .filter(|&x| m.ref_weights()[x] > 0.0)
                .map(|x| m.density().row(x))
        })
        .collect();
    if rows.is_empty() {
        return (vec![0.0; d], 0.0);
    }
    let a = DMatrix::from_fn(rows.len(), d, |r, c| rows[r][c]);
    let b = DVector::from_element(rows.len(), 1.0);
    let s = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-12)
        .unwrap_or_else(|_| DVector::zeros(d));
    let resid = (&a * &s - &b).amax();
    (s.iter().copied().collect(), resid)
}

fn kernel_feasible(mu: &VectorMeasure, nu: &VectorMeasure) -> Result<bool> {
    let (n, m, d) = (mu.len(), nu.len(), mu.dim());
    let xs: Vec<usize> = (0..n).filter(|&x| mu.ref_weights()[x] > 0.0).collect();
    let mut p = LpProblem::feasibility(xs.len() * m);
    for i in 0..xs.len() {
        p.add_row((0..m).map(|y| (i * m + y, 1.0)).collect(), RowKind::Eq, 1.0);
    }
    for y in 0..m {
        for c in 0..d {
            let coeffs = xs
                .iter()
                .enumerate()
                .filter(|(_, &x)| mu.values()[[x, c]] != 0.0)
                .map(|(i, &x)| (i * m + y, mu.values()[[x, c]]))
                .collect();
            p.add_row(coeffs, RowKind::Eq, nu.values()[[y, c]]);
        }
    }
    Ok(lp::solve(&p)?.is_optimal())
}

/// Check the Blackwell equivalences for `μ` and `ν` with `samples` random
/// max-affine test functions drawn from `seed`.
pub fn blackwell_check(mu: &VectorMeasure, nu: &VectorMeasure, samples: usize, seed: u64) -> Result<BlackwellReport> {
    normalizer(mu.density(), mu.ref_weights())?;
    let built = build_plan_lp(mu, None, nu.values(), None)?;
    let sol = lp::solve(&built.lp)?;
    let plan_feasible = sol.is_optimal();
    let kernel_feasible = kernel_feasible(mu, nu)?;
    let (s, resid) = cond_dens(mu, nu);
    let cond = (resid <= 1e-9).then_some(s);

    let (mut reversed, mut marg_err, mut avg_err) = (None, None, None);
    if plan_feasible && cond.is_some() {
        let pi = built.plan(&sol);
        let (n, m) = pi.dim();
        let nu_w = nu.ref_weights();
        let q = Array2::from_shape_fn((m, n), |(y, x)| {
            if nu_w[y] > 0.0 {
                pi[[x, y]] / nu_w[y]
            } else {
                1.0 / n as f64
            }
        });
        let q = Kernel::new(nu.space().clone(), mu.space().clone(), q)?;
        let qm = q.matrix();
        let me = (0..n)
            .map(|x| ((0..m).map(|y| qm[[y, x]] * nu_w[y]).sum::<f64>() - mu.ref_weights()[x]).abs())
            .fold(0.0, f64::max);
        let ae = (0..m)
            .filter(|&y| nu_w[y] > 0.0)
            .flat_map(|y| {
                let avg = qm.row(y).dot(mu.density());
                (&avg - &nu.density().row(y)).into_iter().map(f64::abs).collect::<Vec<_>>()
            })
            .fold(0.0, f64::max);
        reversed = Some(q);
        marg_err = Some(me);
        avg_err = Some(ae);
    }

    let mut stream = rng::seeded(seed);
    let mut min_gap = f64::INFINITY;
    let mut worst = None;
    for _ in 0..samples {
        let g = ConvexSample::random(&mut stream, mu.dim());
        let gap = g.jensen_gap(mu, nu);
        if gap < min_gap {
            min_gap = gap;
            worst = Some(g);
        }
    }

    let witness = if plan_feasible {
        None
    } else {
        match dominates_values(mu, nu.values())?.cert {
            DominanceCert::Farkas { phi, .. } => {
                let g = ConvexSample {
                    slopes: phi.mapv(|v| -v),
                    offsets: vec![0.0; phi.nrows()],
                };
                let gap = g.jensen_gap(mu, nu);
                Some(JensenWitness { g, gap })
            }
            _ => None,
        }
    };

    Ok(BlackwellReport {
        plan_feasible,
        kernel_feasible,
        cond_dens: cond,
        cond_dens_residual: resid,
        reversed,
        reversed_marginal_error: marg_err,
        density_average_error: avg_err,
        samples,
        min_jensen_gap: if samples == 0 { 0.0 } else { min_gap },
        worst_sample: worst,
        witness,
    })
}
