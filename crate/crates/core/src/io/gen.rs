use nalgebra::Complex;
use ndarray::{Array1, Array2};
use sha2::{Digest, Sha256};

use super::json::canonical;
use super::problem::{GridData, Problem, ProblemFile, VectorData};
use crate::error::{Error, Result};
use crate::rng::{seeded, simplex_point, stochastic, uniform, SplitMix64};

/// Instance dimensions; unused entries are ignored by a kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenSize {
    pub x: usize,
    pub y: usize,
    pub d: usize,
}

impl GenSize {
    /// Parse `"4"`, `"4,3"` or `"4,3,2"` (also with `x` separators).
    pub fn parse(s: &str) -> Result<Self> {
        let parts = s
            .split([',', 'x'])
            .map(|p| p.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::invalid(format!("bad size {s:?}: {e}")))?;
        let (x, y, d) = match parts.as_slice() {
            [x] => (*x, *x, 2),
            [x, y] => (*x, *y, 2),
            [x, y, d] => (*x, *y, *d),
            _ => return Err(Error::invalid(format!("bad size {s:?}"))),
        };
        if x == 0 || y == 0 || d == 0 {
            return Err(Error::invalid("sizes must be positive"));
        }
        Ok(Self { x, y, d })
    }
}

pub const GEN_KINDS: [&str; 9] = [
    "scalar_ot",
    "partial",
    "vector_ot",
    "dominance",
    "chain",
    "game",
    "moment",
    "trig",
    "conjugate",
];

fn uniform_matrix(rng: &mut SplitMix64, rows: usize, cols: usize, lo: f64, hi: f64) -> Array2<f64> {
    let mut m = Array2::zeros((rows, cols));
    m.iter_mut().for_each(|v| *v = uniform(rng, lo, hi));
    m
}

/// Forward construction: `ν = Pᵀμ` for a random values matrix and kernel.
fn dominated_pair(rng: &mut SplitMix64, s: GenSize) -> (VectorData, VectorData) {
    let mu = uniform_matrix(rng, s.x, s.d, 0.05, 1.0);
    let kernel = stochastic(rng, s.x, s.y);
    let nu = kernel.t().dot(&mu);
    (
        VectorData {
            values: mu,
            ref_weights: None,
        },
        VectorData {
            values: nu,
            ref_weights: None,
        },
    )
}

/// A reproducible instance of `kind`; every generated instance is feasible.
pub fn gen(kind: &str, size: GenSize, seed: u64) -> Result<ProblemFile> {
    let mut rng = seeded(seed);
    let r = &mut rng;
    let s = size;
    let problem = match kind {
        "scalar_ot" | "partial" => {
            let mu = simplex_point(r, s.x, 1.0);
            let nu = simplex_point(r, s.y, 1.0);
            let cost = uniform_matrix(r, s.x, s.y, 0.0, 1.0);
            if kind == "partial" {
                let mass = uniform(r, 0.2, 0.9);
                Problem::Partial { mu, nu, cost, mass }
            } else {
                Problem::ScalarOt { mu, nu, cost }
            }
        }
        "vector_ot" | "dominance" => {
            let (mu, nu) = dominated_pair(r, s);
            if kind == "dominance" {
                Problem::Dominance {
                    mu,
                    nu,
                    n: None,
                    strong: false,
                    blackwell: None,
                }
            } else {
                let cost = uniform_matrix(r, s.x, s.y, 0.0, 1.0);
                Problem::VectorOt { mu, nu, cost, eta: None }
            }
        }
        "chain" => {
            let n = s.x;
            let pts: Vec<f64> = (0..n).map(|_| uniform(r, 0.0, 1.0)).collect();
            let cost = Array2::from_shape_fn((n, n), |(i, j)| (pts[i] - pts[j]).powi(2));
            Problem::Chain {
                cost,
                mu: simplex_point(r, n, 1.0),
                nu: simplex_point(r, n, 1.0),
                lambda: Some(simplex_point(r, n, 1.0)),
                hops: s.d.min(3),
            }
        }
        "game" => Problem::Game {
            payoff: uniform_matrix(r, s.x, s.y, -1.0, 1.0),
            lambda: None,
        },
        "moment" => {
            let k = s.d.max(1);
            let pts: Vec<f64> = (0..s.x).map(|i| -1.0 + 2.0 * i as f64 / (s.x.max(2) - 1) as f64).collect();
            let m_matrix = Array2::from_shape_fn((k, s.x), |(i, j)| pts[j].powi(i as i32));
            let w = Array1::from(simplex_point(r, s.x, 1.0));
            let target = m_matrix.dot(&w);
            Problem::Moment { m_matrix, target }
        }
        "trig" => {
            let n = s.d;
            let atoms = s.x;
            let grid = (4 * (n + 1)).max(64);
            let angles: Vec<f64> = (0..atoms).map(|_| uniform(r, 0.0, std::f64::consts::TAU)).collect();
            let w = simplex_point(r, atoms, 1.0);
            let coeffs = (0..=n)
                .map(|k| {
                    angles
                        .iter()
                        .zip(&w)
                        .map(|(a, wi)| Complex::from_polar(*wi, k as f64 * a))
                        .sum()
                })
                .collect();
            Problem::Trig { coeffs, grid }
        }
        "conjugate" => {
            let n = s.x.max(2);
            let grid: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
            let (a, b, k) = (uniform(r, 0.1, 2.0), uniform(r, -0.5, 0.5), uniform(r, 0.0, 1.0));
            let values = grid.iter().map(|x| 0.5 * a * x * x + k * (x - b).abs()).collect();
            Problem::Conjugate {
                f: GridData { grid, values },
                infconv: Vec::new(),
            }
        }
        other => {
            return Err(Error::invalid(format!(
                "cannot generate kind {other:?}, supported: {}",
                GEN_KINDS.join(", ")
            )))
        }
    };
    Ok(ProblemFile {
        problem,
        tol: None,
        seed: Some(seed),
    })
}

/// Hex SHA-256 of the canonical form of a problem file.
pub fn digest(p: &ProblemFile) -> String {
    let bytes = Sha256::digest(canonical(&p.to_value()).as_bytes());
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
