use crate::error::{Error, Result};

/// Real function sampled on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.is_empty() || grid.len() != values.len() {
            return Err(Error::dim("grid and values must be nonempty and of equal length"));
        }
        if grid.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::invalid("grid function has a non-finite entry"));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("grid must be strictly increasing"));
        }
        Ok(Self { grid, values })
    }

    /// Sample `f` on `n` equally spaced points of `[lo, hi]`.
    pub fn sample(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n < 2 || hi <= lo {
            return Err(Error::invalid("need n ≥ 2 points on a proper interval"));
        }
        let grid: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
        let values = grid.iter().map(|&x| f(x)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Largest gap between neighbouring abscissae.
    pub fn spacing(&self) -> f64 {
        self.grid.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    pub fn slopes(&self) -> Vec<f64> {
        self.grid
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, v)| (v[1] - v[0]) / (x[1] - x[0]))
            .collect()
    }

    /// Largest absolute discrete slope.
    pub fn lipschitz(&self) -> f64 {
        self.slopes().iter().fold(0.0, |a, s| a.max(s.abs()))
    }

    /// Smallest divided second difference, `+∞` on fewer than three points.
    pub fn min_second_difference(&self) -> f64 {
        let s = self.slopes();
        s.windows(2)
            .zip(self.grid.windows(3))
            .map(|(s, x)| (s[1] - s[0]) / (x[2] - x[0]))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_convex(&self, tol: f64) -> bool {
        self.min_second_difference() >= -tol
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::dim("functions live on different grids"));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |a, (p, q)| a.max((p - q).abs())))
    }
}

/// A conjugate together with its resolution error bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Conjugate {
    pub function: GridFunction,
    /// Bound on `|f**(x) − f(x)|` at grid points of a convex `f` whose
    /// subgradients lie inside the dual grid.
    pub error_bound: f64,
}

/// `f*(y) = maxₓ yx − f(x)` at every point of `dual`.
pub fn conjugate_on(f: &GridFunction, dual: &[f64]) -> Result<GridFunction> {
    let values = dual
        .iter()
        .map(|&y| {
            f.grid
                .iter()
                .zip(&f.values)
                .map(|(x, v)| y * x - v)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    GridFunction::new(dual.to_vec(), values)
}

/// Conjugate on an equally spaced dual grid spanning the discrete slopes.
pub fn conjugate(f: &GridFunction) -> Result<Conjugate> {
    let slopes = f.slopes();
    let (lo, hi) = slopes
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &s| (a.min(s), b.max(s)));
    let (lo, hi) = if slopes.is_empty() { (-1.0, 1.0) } else { (lo, hi) };
    let (lo, hi) = if hi - lo < 1e-12 { (lo - 1.0, hi + 1.0) } else { (lo, hi) };
    let n = f.len().max(2);
    let dual: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let h = (hi - lo) / (n - 1) as f64;
    let diameter = f.grid[f.len() - 1] - f.grid[0];
    Ok(Conjugate {
        function: conjugate_on(f, &dual)?,
        error_bound: 0.5 * h * diameter,
    })
}

/// Min-plus convolution `(f₁□…□f_k)(x) = min{Σfᵢ(xᵢ) : Σxᵢ = x}`.
pub fn inf_convolution(fs: &[GridFunction]) -> Result<GridFunction> {
    let Some(first) = fs.first() else {
        return Err(Error::invalid("need at least one function"));
    };
    let h = uniform_spacing(first)?;
    let mut acc = first.clone();
    for g in &fs[1..] {
        let hg = uniform_spacing(g)?;
        if (hg - h).abs() > 1e-9 * h && g.len() > 1 && acc.len() > 1 {
            return Err(Error::dim(format!("grid spacings differ: {h} and {hg}")));
        }
        let n = acc.len() + g.len() - 1;
        let start = acc.grid[0] + g.grid[0];
        let mut values = vec![f64::INFINITY; n];
        for (i, a) in acc.values.iter().enumerate() {
            for (j, b) in g.values.iter().enumerate() {
                values[i + j] = values[i + j].min(a + b);
            }
        }
        let grid = (0..n).map(|k| start + k as f64 * h).collect();
        acc = GridFunction::new(grid, values)?;
    }
    Ok(acc)
}

fn uniform_spacing(f: &GridFunction) -> Result<f64> {
    if f.len() < 2 {
        return Ok(0.0);
    }
    let h = (f.grid[f.len() - 1] - f.grid[0]) / (f.len() - 1) as f64;
    if f.grid.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h) {
        return Err(Error::invalid("grid is not equally spaced"));
    }
    Ok(h)
}

/// Both sides of `max_y −f₁*(−y) − f₂*(y) = minₓ f₁(x) + f₂(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FenchelReport {
    pub primal: f64,
    pub dual: f64,
    pub tolerance: f64,
}

impl FenchelReport {
    pub fn gap(&self) -> f64 {
        (self.primal - self.dual).abs()
    }

    pub fn passes(&self) -> bool {
        self.gap() <= self.tolerance
    }
}

/// Fenchel duality for two functions on a common grid.
///
/// The dual grid is symmetric, spans the larger Lipschitz constant and has
/// the primal spacing; the tolerance is `4h(1 + L)`.
pub fn fenchel_check(f1: &GridFunction, f2: &GridFunction) -> Result<FenchelReport> {
    if f1.grid != f2.grid {
        return Err(Error::dim("Fenchel check needs a common grid"));
    }
    let h = f1.spacing();
    let l = f1.lipschitz().max(f2.lipschitz());
    let steps = if h > 0.0 { (l / h).ceil() as usize } else { 0 };
    let dual: Vec<f64> = (0..=2 * steps).map(|k| (k as f64 - steps as f64) * h).collect();
    let c1 = conjugate_on(f1, &dual)?;
    let c2 = conjugate_on(f2, &dual)?;
    let dual_value = c1
        .values
        .iter()
        .rev()
        .zip(&c2.values)
        .map(|(a, b)| -a - b)
        .fold(f64::NEG_INFINITY, f64::max);
    let primal = f1
        .values
        .iter()
        .zip(&f2.values)
        .map(|(a, b)| a + b)
        .fold(f64::INFINITY, f64::min);
    Ok(FenchelReport {
        primal,
        dual: dual_value,
        tolerance: 4.0 * h * (1.0 + l),
    })
}
