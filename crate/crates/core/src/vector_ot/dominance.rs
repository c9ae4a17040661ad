use ndarray::Array2;

use super::{build_plan_lp, complete_dropped, normalizer, PlanLp};
use crate::error::{Error, Result};
use crate::lp::{self, LpStatus};
use crate::measures::{disintegrate, kernel_apply, Axis, Kernel, TransportPlan, VectorMeasure};

/// Evidence for or against `μ ≻ ν`.
#[derive(Debug, Clone, PartialEq)]
pub enum DominanceCert {
    /// `P` with `Pμ = ν`.
    Kernel(Kernel),
    /// `Q` on `Y → X` with `Q ⊗ ν = P ⊗ μ`.
    ReversedKernel(Kernel),
    /// `ψ` on `X`, `φ` on `Y` (rows in ℝᵈ) with `⟨ψ(x)+φ(y), η(x)⟩ ≥ 0`
    /// and `∫ψ dμ + ∫φ dν < 0`.
    Farkas { psi: Array2<f64>, phi: Array2<f64> },
    /// Blocks of a partition of `Y`, each a list of atoms.
    PartitionFamily(Vec<Vec<Vec<usize>>>),
}

impl DominanceCert {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Kernel(_) => "kernel",
            Self::ReversedKernel(_) => "reversedKernel",
            Self::Farkas { .. } => "farkas",
            Self::PartitionFamily(_) => "partitionFamily",
        }
    }

    /// For a Farkas pair: `(min ⟨ψ(x)+φ(y), η(x)⟩, ∫ψ dμ + ∫φ dν)`.
    pub fn farkas_check(&self, mu: &VectorMeasure, nu: &Array2<f64>) -> Option<(f64, f64)> {
        self.farkas_check_density(mu.density(), mu.values(), nu)
    }

    /// As [`farkas_check`](Self::farkas_check) with an explicit density.
    pub fn farkas_check_density(
        &self,
        eta: &Array2<f64>,
        mu: &Array2<f64>,
        nu: &Array2<f64>,
    ) -> Option<(f64, f64)> {
        let Self::Farkas { psi, phi } = self else {
            return None;
        };
        let mut low = f64::INFINITY;
        for x in 0..eta.nrows() {
            for y in 0..phi.nrows() {
                low = low.min((&psi.row(x) + &phi.row(y)).dot(&eta.row(x)));
            }
        }
        let integral = (psi * mu).sum() + (phi * nu).sum();
        Some((low, integral))
    }
}

/// Outcome of a dominance test.
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceResult {
    pub dominates: bool,
    pub cert: DominanceCert,
}

/// `μ ≻ ν`: some Markov kernel carries `μ` onto `ν`.
pub fn dominates(mu: &VectorMeasure, nu: &VectorMeasure) -> Result<DominanceResult> {
    let r = dominates_values(mu, nu.values())?;
    Ok(match r.cert {
        DominanceCert::Kernel(k) => DominanceResult {
            dominates: true,
            cert: DominanceCert::Kernel(Kernel::new(
                mu.space().clone(),
                nu.space().clone(),
                k.matrix().clone(),
            )?),
        },
        cert => DominanceResult {
            dominates: false,
            cert,
        },
    })
}

/// Dominance test against arbitrary real target values (`|Y| × d`).
///
/// Targets with negative entries are never dominated; the answer then
/// carries a Farkas pair.
pub fn dominates_values(mu: &VectorMeasure, nu: &Array2<f64>) -> Result<DominanceResult> {
    let eta = mu.density().clone();
    normalizer(&eta, mu.ref_weights())?;
    let built = build_plan_lp(mu, None, nu, None)?;
    let sol = lp::solve(&built.lp)?;
    match sol.status {
        LpStatus::Optimal => {
            let plan = TransportPlan::new(
                mu.space().clone(),
                crate::measures::FiniteSpace::indexed(nu.nrows()),
                built.plan(&sol),
            )?;
            let (k, _) = disintegrate(&plan, Axis::Source);
            let image = kernel_apply(&k, mu)?;
            let err = (image.values() - nu).iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let scale = nu.iter().fold(1.0f64, |a, v| a.max(v.abs()));
            if err > 1e-9 * scale {
                return Err(Error::NumericalBreakdown(format!(
                    "kernel reproduces ν only to {err:e}"
                )));
            }
            Ok(DominanceResult {
                dominates: true,
                cert: DominanceCert::Kernel(k),
            })
        }
        LpStatus::Infeasible => {
            let y = &sol.farkas.as_ref().expect("certificate present").y;
            Ok(DominanceResult {
                dominates: false,
                cert: farkas_cert(&built, mu, &eta, y),
            })
        }
        LpStatus::Unbounded => Err(Error::NumericalBreakdown("feasibility LP unbounded".into())),
    }
}

/// Lift a row certificate of the plan LP to a vector pair `(ψ, φ)`.
pub(crate) fn farkas_cert(built: &PlanLp, mu: &VectorMeasure, eta: &Array2<f64>, y: &[f64]) -> DominanceCert {
    let (scalar_psi, mut phi) = built.potentials(y, eta);
    complete_dropped(built, eta, &scalar_psi, &mut phi, None, 1.0);
    let mut psi = Array2::zeros(eta.raw_dim());
    if built.x_rows.iter().all(|(_, comp)| comp.is_none()) {
        let f = normalizer(eta, mu.ref_weights()).expect("checked by caller");
        for x in 0..built.n {
            psi.row_mut(x).assign(&(&f.row(x) * scalar_psi[x]));
        }
    } else {
        for (r, &(x, comp)) in built.x_rows.iter().enumerate() {
            psi[[x, comp.expect("component row")]] += y[r];
        }
    }
    DominanceCert::Farkas { psi, phi }
}
