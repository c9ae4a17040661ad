use std::f64::consts::TAU;

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::lp::{self, LpProblem, RowKind, Sense};

/// Verdicts of the two trigonometric moment tests.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigReport {
    pub toeplitz: DMatrix<Complex<f64>>,
    pub eigenvalues: Vec<f64>,
    pub min_eig: f64,
    /// Spectral norm of the Toeplitz matrix.
    pub norm: f64,
    pub psd: bool,
    pub lp_feasible: bool,
    /// Weights on `e^{2πij/G}` when the grid test succeeds.
    pub weights: Option<Vec<f64>>,
}

impl TrigReport {
    pub fn agree(&self) -> bool {
        self.psd == self.lp_feasible
    }

    /// `min_eig / ‖C‖`, zero for the zero matrix.
    pub fn relative_min_eig(&self) -> f64 {
        if self.norm > 0.0 {
            self.min_eig / self.norm
        } else {
            0.0
        }
    }
}

/// Hermitian Toeplitz matrix with `C_{jk} = c_{k−j}` on and above the diagonal.
pub fn toeplitz(c: &[Complex<f64>]) -> Result<DMatrix<Complex<f64>>> {
    let Some(c0) = c.first() else {
        return Err(Error::invalid("need at least c₀"));
    };
    if c.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::invalid("coefficients must be finite"));
    }
    if c0.im.abs() > 1e-12 * (1.0 + c0.re.abs()) {
        return Err(Error::invalid("c₀ must be real"));
    }
    let n = c.len();
    Ok(DMatrix::from_fn(n, n, |j, k| {
        if k >= j {
            c[k - j]
        } else {
            c[j - k].conj()
        }
    }))
}

/// Compare the eigenvalue test with a measure search on `grid` equally
/// spaced points of the circle, where `c_k = Σⱼ wⱼ zⱼᵏ`.
pub fn trig_moment(c: &[Complex<f64>], grid: usize) -> Result<TrigReport> {
    let t = toeplitz(c)?;
    let n = c.len() - 1;
    if grid < 4 * (n + 1) {
        return Err(Error::invalid(format!("grid needs at least {} points", 4 * (n + 1))));
    }
    let mut eigenvalues: Vec<f64> = t.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    let min_eig = eigenvalues[0];
    let norm = eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let psd = min_eig >= -1e-9 * norm;

    let angles: Vec<f64> = (0..grid).map(|j| TAU * j as f64 / grid as f64).collect();
    let mut p = LpProblem::new(Sense::Min, vec![0.0; grid]);
    p.add_row((0..grid).map(|j| (j, 1.0)).collect(), RowKind::Eq, c[0].re);
    for (k, ck) in c.iter().enumerate().skip(1) {
        let cos = angles.iter().enumerate().map(|(j, a)| (j, (k as f64 * a).cos()));
        let sin = angles.iter().enumerate().map(|(j, a)| (j, (k as f64 * a).sin()));
        p.add_row(cos.filter(|(_, v)| v.abs() > 1e-15).collect(), RowKind::Eq, ck.re);
        p.add_row(sin.filter(|(_, v)| v.abs() > 1e-15).collect(), RowKind::Eq, ck.im);
    }
    let sol = lp::solve(&p)?;
    let weights = sol
        .is_optimal()
        .then(|| sol.primal.iter().map(|w| w.max(0.0)).collect());
    Ok(TrigReport {
        toeplitz: t,
        eigenvalues,
        min_eig,
        norm,
        psd,
        lp_feasible: weights.is_some(),
        weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(theta: f64) -> Complex<f64> {
        Complex::from_polar(1.0, theta)
    }

    #[test]
    fn identity_moments() {
        let mut c = vec![Complex::new(0.0, 0.0); 4];
        c[0] = Complex::new(1.0, 0.0);
        let r = trig_moment(&c, 32).unwrap();
        assert_eq!(r.toeplitz, DMatrix::identity(4, 4));
        assert!(r.psd && r.lp_feasible);
    }

    #[test]
    fn point_mass_eigenvector() {
        let n = 3;
        let z = unit(0.7);
        let c: Vec<_> = (0..=n).map(|k| z.powu(k as u32)).collect();
        let t = toeplitz(&c).unwrap();
        let v = DMatrix::from_fn(n + 1, 1, |j, _| z.powu((n - j) as u32));
        let tv = &t * &v;
        for j in 0..=n {
            assert!((tv[j] - v[j] * (n as f64 + 1.0)).norm() < 1e-12);
        }
        let r = trig_moment(&c, 64).unwrap();
        assert!(r.psd && (r.eigenvalues[n] - (n as f64 + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn indefinite_is_rejected() {
        let c = [Complex::new(1.0, 0.0), Complex::new(0.0, 0.6), Complex::new(0.9, 0.0)];
        let r = trig_moment(&c, 64).unwrap();
        assert!(r.relative_min_eig() < -0.01);
        assert!(!r.psd && !r.lp_feasible);
    }

    #[test]
    fn small_grid_is_rejected() {
        assert!(trig_moment(&[Complex::new(1.0, 0.0); 3], 11).is_err());
    }
}
