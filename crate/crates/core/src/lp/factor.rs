//! Dense LU factorization of a simplex basis with product-form updates.

use crate::error::{Error, Result};

/// Sparse column `(row, value)` pairs.
pub(crate) type SparseCol = Vec<(usize, f64)>;

struct Eta {
    pos: usize,
    pivot: f64,
    col: Vec<(usize, f64)>,
}

/// `B = P⁻¹LU` followed by a file of eta updates.
pub(crate) struct BasisFactor {
    m: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    etas: Vec<Eta>,
}

const SINGULAR: f64 = 1e-13;

impl BasisFactor {
    pub(crate) fn factor(m: usize, cols: &[&SparseCol]) -> Result<Self> {
        let mut lu = vec![0.0; m * m];
        for (j, col) in cols.iter().enumerate() {
            for &(i, v) in col.iter() {
                lu[i * m + j] = v;
            }
        }
        let mut perm: Vec<usize> = (0..m).collect();
        for k in 0..m {
            let (p, best) = (k..m)
                .map(|i| (i, lu[i * m + k].abs()))
                .fold((k, -1.0), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
            if best < SINGULAR {
                return Err(Error::NumericalBreakdown(format!(
                    "singular basis at column {k} (pivot {best:.2e})"
                )));
            }
            if p != k {
                for j in 0..m {
                    lu.swap(k * m + j, p * m + j);
                }
                perm.swap(k, p);
            }
            let piv = lu[k * m + k];
            for i in k + 1..m {
                let f = lu[i * m + k] / piv;
                if f == 0.0 {
                    continue;
                }
                lu[i * m + k] = f;
                let (upper, lower) = lu.split_at_mut(i * m);
                let src = &upper[k * m + k + 1..k * m + m];
                let dst = &mut lower[k + 1..m];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d -= f * s;
                }
            }
        }
        Ok(Self {
            m,
            lu,
            perm,
            etas: Vec::new(),
        })
    }

    pub(crate) fn updates(&self) -> usize {
        self.etas.len()
    }

    /// Solve `B x = a` in place.
    pub(crate) fn ftran(&self, a: &mut [f64]) {
        let m = self.m;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| a[p]).collect();
        for i in 0..m {
            let row = &self.lu[i * m..i * m + i];
            let s: f64 = row.iter().zip(&x[..i]).map(|(l, v)| l * v).sum();
            x[i] -= s;
        }
        for i in (0..m).rev() {
            let row = &self.lu[i * m + i + 1..i * m + m];
            let s: f64 = row.iter().zip(&x[i + 1..]).map(|(u, v)| u * v).sum();
            x[i] = (x[i] - s) / self.lu[i * m + i];
        }
        for e in &self.etas {
            let xr = x[e.pos] / e.pivot;
            if xr != 0.0 {
                for &(i, v) in &e.col {
                    x[i] -= v * xr;
                }
            }
            x[e.pos] = xr;
        }
        a.copy_from_slice(&x);
    }

    /// Solve `yᵀ B = cᵀ` in place.
    pub(crate) fn btran(&self, c: &mut [f64]) {
        let m = self.m;
        for e in self.etas.iter().rev() {
            let s: f64 = e.col.iter().map(|&(i, v)| v * c[i]).sum();
            c[e.pos] = (c[e.pos] - s) / e.pivot;
        }
        let mut z = c.to_vec();
        for j in 0..m {
            let s: f64 = (0..j).map(|i| self.lu[i * m + j] * z[i]).sum();
            z[j] = (z[j] - s) / self.lu[j * m + j];
        }
        for j in (0..m).rev() {
            let s: f64 = (j + 1..m).map(|i| self.lu[i * m + j] * z[i]).sum();
            z[j] -= s;
        }
        for (k, &p) in self.perm.iter().enumerate() {
            c[p] = z[k];
        }
    }

    /// Record the replacement of basis position `pos` by a column with `alpha = B⁻¹ a`.
    pub(crate) fn update(&mut self, pos: usize, alpha: &[f64]) {
        let col = alpha
            .iter()
            .enumerate()
            .filter(|&(i, &v)| i != pos && v != 0.0)
            .map(|(i, &v)| (i, v))
            .collect();
        self.etas.push(Eta {
            pos,
            pivot: alpha[pos],
            col,
        });
    }
}
