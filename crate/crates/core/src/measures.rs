//! Measures, kernels and plans on finite spaces.

use std::collections::HashSet;
use std::sync::Arc;

use ndarray::{Array1, Array2, Axis as NdAxis};

use crate::error::{Error, Result};
use crate::tol;

/// A finite labeled point set, optionally embedded in ℝᵏ.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSpace {
    labels: Vec<String>,
    coords: Option<Vec<Vec<f64>>>,
}

impl FiniteSpace {
    pub fn new(labels: Vec<String>, coords: Option<Vec<Vec<f64>>>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::invalid("a finite space needs at least one point"));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::invalid(format!("duplicate label `{l}`")));
            }
        }
        if let Some(c) = &coords {
            if c.len() != labels.len() {
                return Err(Error::dim(format!(
                    "{} coordinate vectors for {} labels",
                    c.len(),
                    labels.len()
                )));
            }
        }
        Ok(Self { labels, coords })
    }

    /// Points labeled `0..n`.
    pub fn indexed(n: usize) -> Arc<Self> {
        assert!(n > 0, "empty space");
        Arc::new(Self {
            labels: (0..n).map(|i| i.to_string()).collect(),
            coords: None,
        })
    }

    /// Points of a one dimensional grid, labeled by index.
    pub fn line(points: &[f64]) -> Arc<Self> {
        assert!(!points.is_empty(), "empty grid");
        Arc::new(Self {
            labels: (0..points.len()).map(|i| i.to_string()).collect(),
            coords: Some(points.iter().map(|&p| vec![p]).collect()),
        })
    }

    /// Midpoint grid `(i - 1/2)/n` of the unit interval.
    pub fn midpoint_grid(n: usize) -> Arc<Self> {
        let pts: Vec<f64> = (1..=n).map(|i| (i as f64 - 0.5) / n as f64).collect();
        Self::line(&pts)
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn coords(&self) -> Option<&[Vec<f64>]> {
        self.coords.as_deref()
    }

    /// First coordinate of every point, when the space is embedded.
    pub fn line_coords(&self) -> Option<Vec<f64>> {
        self.coords
            .as_ref()
            .map(|c| c.iter().map(|v| v.first().copied().unwrap_or(0.0)).collect())
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

fn same_space(a: &FiniteSpace, b: &FiniteSpace) -> bool {
    a.size() == b.size() && (a.labels == b.labels)
}

fn check_entry(v: f64, what: &str) -> Result<f64> {
    if !v.is_finite() {
        return Err(Error::invalid(format!("{what} is not finite")));
    }
    if v < -tol::READ_CLAMP {
        return Err(Error::invalid(format!("{what} is negative ({v})")));
    }
    Ok(v.max(0.0))
}

/// A nonnegative measure on a finite space.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarMeasure {
    space: Arc<FiniteSpace>,
    weights: Vec<f64>,
}

impl ScalarMeasure {
    pub fn new(space: Arc<FiniteSpace>, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != space.size() {
            return Err(Error::dim(format!(
                "{} weights on a space of {} points",
                weights.len(),
                space.size()
            )));
        }
        let weights = weights
            .iter()
            .enumerate()
            .map(|(i, &w)| check_entry(w, &format!("weight {i}")))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { space, weights })
    }

    /// Measure on an indexed space of matching size.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::invalid("empty weight vector"));
        }
        Self::new(FiniteSpace::indexed(n), weights)
    }

    pub fn uniform(space: Arc<FiniteSpace>, mass: f64) -> Self {
        let n = space.size();
        Self {
            space,
            weights: vec![mass / n as f64; n],
        }
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.weights.len())
            .filter(|&i| self.weights[i] > 0.0)
            .collect()
    }
}

/// An ℝᵈ-valued measure with nonnegative components.
///
/// Stored as per-atom values together with reference weights `|μ|` and the
/// density `η` satisfying `η(x)·|μ|(x) = values(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorMeasure {
    space: Arc<FiniteSpace>,
    values: Array2<f64>,
    ref_weights: Vec<f64>,
    density: Array2<f64>,
}

impl VectorMeasure {
    /// Values given per atom (`|X| × d`), reference weights the component sum.
    pub fn new(space: Arc<FiniteSpace>, values: Array2<f64>) -> Result<Self> {
        let values = Self::checked_values(&space, values)?;
        let ref_weights = values.sum_axis(NdAxis(1)).to_vec();
        Self::assemble(space, values, ref_weights)
    }

    /// Values with user supplied reference weights.
    ///
    /// Every atom with nonzero value must carry positive reference weight,
    /// and atoms of zero reference weight must carry zero value.
    pub fn with_ref_weights(
        space: Arc<FiniteSpace>,
        values: Array2<f64>,
        ref_weights: Vec<f64>,
    ) -> Result<Self> {
        let values = Self::checked_values(&space, values)?;
        if ref_weights.len() != space.size() {
            return Err(Error::dim("reference weights do not match the space"));
        }
        let ref_weights = ref_weights
            .iter()
            .enumerate()
            .map(|(i, &w)| check_entry(w, &format!("refWeights[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        for (x, row) in values.rows().into_iter().enumerate() {
            if ref_weights[x] == 0.0 && row.iter().any(|&v| v > tol::ENTRY) {
                return Err(Error::invalid(format!(
                    "atom {x} has zero reference weight but nonzero value"
                )));
            }
        }
        Self::assemble(space, values, ref_weights)
    }

    /// Measure `η·|μ|` built from a density and reference weights.
    pub fn from_density(
        space: Arc<FiniteSpace>,
        density: Array2<f64>,
        ref_weights: Vec<f64>,
    ) -> Result<Self> {
        if density.nrows() != space.size() || ref_weights.len() != space.size() {
            return Err(Error::dim("density or reference weights do not match the space"));
        }
        let mut values = density.clone();
        for (x, mut row) in values.rows_mut().into_iter().enumerate() {
            row *= ref_weights[x];
        }
        let mut m = Self::with_ref_weights(space, values, ref_weights)?;
        for (x, row) in density.rows().into_iter().enumerate() {
            if m.ref_weights[x] > 0.0 {
                m.density.row_mut(x).assign(&row);
            }
        }
        Ok(m)
    }

    /// Component form `(μ₁, …, μ_d)`, each a weight vector over the atoms.
    pub fn from_components(space: Arc<FiniteSpace>, components: &[Vec<f64>]) -> Result<Self> {
        let d = components.len();
        if d == 0 {
            return Err(Error::invalid("need at least one component"));
        }
        let n = space.size();
        let mut values = Array2::zeros((n, d));
        for (i, comp) in components.iter().enumerate() {
            if comp.len() != n {
                return Err(Error::dim(format!("component {i} has {} entries", comp.len())));
            }
            for (x, &v) in comp.iter().enumerate() {
                values[[x, i]] = v;
            }
        }
        Self::new(space, values)
    }

    fn checked_values(space: &FiniteSpace, mut values: Array2<f64>) -> Result<Array2<f64>> {
        if values.nrows() != space.size() || values.ncols() == 0 {
            return Err(Error::dim(format!(
                "values are {}x{} on a space of {} points",
                values.nrows(),
                values.ncols(),
                space.size()
            )));
        }
        for ((x, i), v) in values.indexed_iter_mut() {
            *v = check_entry(*v, &format!("values[{x}][{i}]"))?;
        }
        Ok(values)
    }

    fn assemble(space: Arc<FiniteSpace>, values: Array2<f64>, ref_weights: Vec<f64>) -> Result<Self> {
        let mut density = Array2::zeros(values.raw_dim());
        for (x, row) in values.rows().into_iter().enumerate() {
            if ref_weights[x] > 0.0 {
                density.row_mut(x).assign(&(&row / ref_weights[x]));
            }
        }
        Ok(Self {
            space,
            values,
            ref_weights,
            density,
        })
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.values.ncols()
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn ref_weights(&self) -> &[f64] {
        &self.ref_weights
    }

    pub fn density(&self) -> &Array2<f64> {
        &self.density
    }

    /// Componentwise total mass.
    pub fn totals(&self) -> Array1<f64> {
        self.values.sum_axis(NdAxis(0))
    }

    /// Component `i` as a weight vector.
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.values.column(i).to_vec()
    }

    /// Reference measure `|μ|`.
    pub fn reference(&self) -> ScalarMeasure {
        ScalarMeasure {
            space: self.space.clone(),
            weights: self.ref_weights.clone(),
        }
    }

    /// Restriction to a subset of atoms, re-indexed on a fresh space.
    pub fn restrict(&self, atoms: &[usize]) -> Result<Self> {
        let labels = atoms
            .iter()
            .map(|&a| self.space.labels()[a].clone())
            .collect();
        let space = Arc::new(FiniteSpace::new(labels, None)?);
        let values = self.values.select(NdAxis(0), atoms);
        let refw = atoms.iter().map(|&a| self.ref_weights[a]).collect();
        Self::with_ref_weights(space, values, refw)
    }

    /// `t·self + (1-t)·other` on a common space.
    pub fn mix(&self, other: &Self, t: f64) -> Result<Self> {
        if self.values.raw_dim() != other.values.raw_dim() {
            return Err(Error::dim("mixing measures of different shape"));
        }
        let values = &self.values * t + &other.values * (1.0 - t);
        let refw = self
            .ref_weights
            .iter()
            .zip(&other.ref_weights)
            .map(|(a, b)| t * a + (1.0 - t) * b)
            .collect();
        Self::with_ref_weights(self.space.clone(), values, refw)
    }
}

/// A row-stochastic transition matrix between finite spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    source: Arc<FiniteSpace>,
    target: Arc<FiniteSpace>,
    rows: Array2<f64>,
}

impl Kernel {
    pub fn new(source: Arc<FiniteSpace>, target: Arc<FiniteSpace>, mut rows: Array2<f64>) -> Result<Self> {
        if rows.nrows() != source.size() || rows.ncols() != target.size() {
            return Err(Error::dim(format!(
                "kernel matrix {}x{} between spaces of size {} and {}",
                rows.nrows(),
                rows.ncols(),
                source.size(),
                target.size()
            )));
        }
        for ((x, y), v) in rows.indexed_iter_mut() {
            if !v.is_finite() || *v < -1e-15 {
                return Err(Error::invalid(format!("kernel entry ({x},{y}) = {v}")));
            }
            *v = v.max(0.0);
        }
        for (x, row) in rows.rows().into_iter().enumerate() {
            let s = row.sum();
            if (s - 1.0).abs() > tol::ENTRY * (row.len() as f64).max(1.0) {
                return Err(Error::invalid(format!("kernel row {x} sums to {s}")));
            }
        }
        Ok(Self { source, target, rows })
    }

    pub fn identity(space: Arc<FiniteSpace>) -> Self {
        let n = space.size();
        Self {
            source: space.clone(),
            target: space,
            rows: Array2::eye(n),
        }
    }

    /// Kernel `P_x = δ_{T x}`.
    pub fn deterministic(source: Arc<FiniteSpace>, target: Arc<FiniteSpace>, map: &[usize]) -> Result<Self> {
        if map.len() != source.size() {
            return Err(Error::dim("map is not total on the source"));
        }
        let mut rows = Array2::zeros((source.size(), target.size()));
        for (x, &y) in map.iter().enumerate() {
            if y >= target.size() {
                return Err(Error::invalid(format!("map sends {x} outside the target")));
            }
            rows[[x, y]] = 1.0;
        }
        Ok(Self { source, target, rows })
    }

    /// Walk `δ_x ↦ l·δ_{x-1} + m·δ_x + r·δ_{x+1}` on a window of `n` sites.
    ///
    /// Mass leaving the window is reflected back onto the boundary site.
    pub fn random_walk(space: Arc<FiniteSpace>, l: f64, m: f64, r: f64) -> Result<Self> {
        let n = space.size();
        let mut rows = Array2::zeros((n, n));
        for x in 0..n {
            rows[[x, x]] += m;
            rows[[x, if x == 0 { 0 } else { x - 1 }]] += l;
            rows[[x, if x + 1 == n { x } else { x + 1 }]] += r;
        }
        Self::new(space.clone(), space, rows)
    }

    pub fn source(&self) -> &Arc<FiniteSpace> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FiniteSpace> {
        &self.target
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.rows
    }
}

/// A nonnegative plan on `X × Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    source: Arc<FiniteSpace>,
    target: Arc<FiniteSpace>,
    matrix: Array2<f64>,
    density_tag: Option<Array2<f64>>,
}

impl TransportPlan {
    pub fn new(source: Arc<FiniteSpace>, target: Arc<FiniteSpace>, mut matrix: Array2<f64>) -> Result<Self> {
        if matrix.nrows() != source.size() || matrix.ncols() != target.size() {
            return Err(Error::dim("plan shape does not match its spaces"));
        }
        for ((x, y), v) in matrix.indexed_iter_mut() {
            *v = check_entry(*v, &format!("plan[{x}][{y}]"))?;
        }
        Ok(Self {
            source,
            target,
            matrix,
            density_tag: None,
        })
    }

    /// Plan on indexed spaces.
    pub fn from_matrix(matrix: Array2<f64>) -> Result<Self> {
        let (n, m) = matrix.dim();
        Self::new(FiniteSpace::indexed(n), FiniteSpace::indexed(m), matrix)
    }

    pub fn with_density(mut self, density: Array2<f64>) -> Self {
        self.density_tag = Some(density);
        self
    }

    pub fn source(&self) -> &Arc<FiniteSpace> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FiniteSpace> {
        &self.target
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn density_tag(&self) -> Option<&Array2<f64>> {
        self.density_tag.as_ref()
    }

    pub fn mass(&self) -> f64 {
        self.matrix.sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.matrix.sum_axis(NdAxis(1)).to_vec()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        self.matrix.sum_axis(NdAxis(0)).to_vec()
    }

    /// `Σ c(x,y) π(x,y)`.
    pub fn cost(&self, c: &Array2<f64>) -> f64 {
        (&self.matrix * c).sum()
    }

    /// Vector marginal on `Y` of `(η, π)`: `Σ_x η(x) π(x,y)`.
    pub fn vector_target_marginal(&self, density: &Array2<f64>) -> Array2<f64> {
        self.matrix.t().dot(density)
    }

    /// Atoms whose row has more than one entry above `eps`.
    pub fn split_rows(&self, eps: f64) -> Vec<usize> {
        self.matrix
            .rows()
            .into_iter()
            .enumerate()
            .filter(|(_, r)| r.iter().filter(|&&v| v > eps).count() > 1)
            .map(|(x, _)| x)
            .collect()
    }
}

/// Side of a plan used for disintegration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Source,
    Target,
}

/// Norm on ℝᵈ used for the variation measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Norm {
    #[default]
    L1,
    L2,
    LInf,
}

impl Norm {
    pub fn apply(self, v: impl Iterator<Item = f64>) -> f64 {
        match self {
            Norm::L1 => v.map(f64::abs).sum(),
            Norm::L2 => v.map(|a| a * a).sum::<f64>().sqrt(),
            Norm::LInf => v.map(f64::abs).fold(0.0, f64::max),
        }
    }
}

/// `T_#μ` for a map given as target indices.
pub fn pushforward(mu: &VectorMeasure, map: &[usize], target: Arc<FiniteSpace>) -> Result<VectorMeasure> {
    if map.len() != mu.len() {
        return Err(Error::dim("map is not total on the source atoms"));
    }
    let mut values = Array2::zeros((target.size(), mu.dim()));
    let mut refw = vec![0.0; target.size()];
    for (x, &y) in map.iter().enumerate() {
        if y >= target.size() {
            return Err(Error::invalid(format!("map sends {x} outside the target")));
        }
        let mut row = values.row_mut(y);
        row += &mu.values.row(x);
        refw[y] += mu.ref_weights[x];
    }
    VectorMeasure::with_ref_weights(target, values, refw)
}

/// `Pμ`, the image of a vector measure under a kernel.
pub fn kernel_apply(p: &Kernel, mu: &VectorMeasure) -> Result<VectorMeasure> {
    if !same_space(&p.source, &mu.space) {
        return Err(Error::dim("kernel source differs from the measure's space"));
    }
    let values = p.rows.t().dot(&mu.values).mapv(|v| v.max(0.0));
    let refw = p
        .rows
        .t()
        .dot(&Array1::from(mu.ref_weights.clone()))
        .mapv(|v| v.max(0.0))
        .to_vec();
    VectorMeasure::with_ref_weights(p.target.clone(), values, refw)
}

/// The kernel `x ↦ ∫ Q_y dP_x(y)`.
pub fn kernel_compose(p: &Kernel, q: &Kernel) -> Result<Kernel> {
    if !same_space(&p.target, &q.source) {
        return Err(Error::dim("kernel spaces do not chain"));
    }
    Ok(Kernel {
        source: p.source.clone(),
        target: q.target.clone(),
        rows: p.rows.dot(&q.rows),
    })
}

/// The plan `P ⊗ |μ|`, tagged with the density of `μ`.
pub fn product(p: &Kernel, mu: &VectorMeasure) -> Result<TransportPlan> {
    if !same_space(&p.source, &mu.space) {
        return Err(Error::dim("kernel source differs from the measure's space"));
    }
    let mut m = p.rows.clone();
    for (x, mut row) in m.rows_mut().into_iter().enumerate() {
        row *= mu.ref_weights[x];
    }
    Ok(TransportPlan {
        source: p.source.clone(),
        target: p.target.clone(),
        matrix: m,
        density_tag: Some(mu.density.clone()),
    })
}

/// `P ⊗ m` for a scalar measure.
pub fn product_scalar(p: &Kernel, m: &ScalarMeasure) -> Result<TransportPlan> {
    if !same_space(&p.source, &m.space) {
        return Err(Error::dim("kernel source differs from the measure's space"));
    }
    let mut mat = p.rows.clone();
    for (x, mut row) in mat.rows_mut().into_iter().enumerate() {
        row *= m.weights[x];
    }
    Ok(TransportPlan {
        source: p.source.clone(),
        target: p.target.clone(),
        matrix: mat,
        density_tag: None,
    })
}

/// Split a plan into its marginal on `axis` and the conditional kernel.
///
/// Atoms of zero marginal get the uniform row.
pub fn disintegrate(pi: &TransportPlan, axis: Axis) -> (Kernel, ScalarMeasure) {
    let (mat, src, dst) = match axis {
        Axis::Source => (pi.matrix.clone(), pi.source.clone(), pi.target.clone()),
        Axis::Target => (
            pi.matrix.t().to_owned(),
            pi.target.clone(),
            pi.source.clone(),
        ),
    };
    let marg = mat.sum_axis(NdAxis(1)).to_vec();
    let k = mat.ncols();
    let mut rows = mat;
    for (x, mut row) in rows.rows_mut().into_iter().enumerate() {
        if marg[x] > 0.0 {
            row /= marg[x];
        } else {
            row.fill(1.0 / k as f64);
        }
    }
    (
        Kernel {
            source: src.clone(),
            target: dst,
            rows,
        },
        ScalarMeasure {
            space: src,
            weights: marg,
        },
    )
}

/// Variation `V(μ)(x) = ‖η(x)‖ |μ|(x)`.
pub fn variation(mu: &VectorMeasure, norm: Norm) -> ScalarMeasure {
    let weights = mu
        .density
        .rows()
        .into_iter()
        .zip(&mu.ref_weights)
        .map(|(row, w)| norm.apply(row.iter().copied()) * w)
        .collect();
    ScalarMeasure {
        space: mu.space.clone(),
        weights,
    }
}

/// The pair `(η/‖η‖, V(μ))` representing the same measure.
pub fn renormalize(mu: &VectorMeasure, norm: Norm) -> Result<VectorMeasure> {
    let v = variation(mu, norm);
    let mut dens = mu.density.clone();
    for (mut row, w) in dens.rows_mut().into_iter().zip(&mu.ref_weights) {
        let n = norm.apply(row.iter().copied());
        if n > 0.0 && *w > 0.0 {
            row /= n;
        }
    }
    VectorMeasure::from_density(mu.space.clone(), dens, v.weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn two() -> Arc<FiniteSpace> {
        FiniteSpace::indexed(2)
    }

    #[test]
    fn identity_pushforward() {
        let mu = VectorMeasure::new(two(), array![[1.0, 2.0], [0.5, 0.0]]).unwrap();
        let out = pushforward(&mu, &[0, 1], two()).unwrap();
        assert_eq!(out.values(), mu.values());
    }

    #[test]
    fn constant_map_sums_rows() {
        let mu = VectorMeasure::new(two(), array![[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let out = pushforward(&mu, &[0, 0], two()).unwrap();
        assert_eq!(out.values(), &array![[1.0, 1.0], [0.0, 0.0]]);
    }

    #[test]
    fn discrete_to_coordinates() {
        // Σ bⱼ δ_{xⱼ} on n atoms pushed onto the atom-indexed vector (b₁,…,bₙ)
        let b = [0.2, 0.5, 0.3];
        let x = FiniteSpace::indexed(3);
        let mu = VectorMeasure::new(x.clone(), Array2::from_shape_vec((3, 1), b.to_vec()).unwrap())
            .unwrap();
        let out = pushforward(&mu, &[0, 1, 2], x).unwrap();
        assert_eq!(out.component(0), b.to_vec());
    }

    #[test]
    fn deterministic_kernel_is_pushforward() {
        let x = FiniteSpace::indexed(3);
        let mu = VectorMeasure::new(x.clone(), array![[1.0, 0.5], [0.0, 2.0], [3.0, 1.0]]).unwrap();
        let map = [1, 1, 0];
        let k = Kernel::deterministic(x.clone(), two(), &map).unwrap();
        let a = kernel_apply(&k, &mu).unwrap();
        let b = pushforward(&mu, &map, two()).unwrap();
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn two_by_two_kernel() {
        let (p, q) = (0.3, 0.8);
        let k = Kernel::new(two(), two(), array![[p, 1.0 - p], [q, 1.0 - q]]).unwrap();
        let mu = VectorMeasure::new(two(), array![[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let out = kernel_apply(&k, &mu).unwrap();
        let want = array![[p, q], [1.0 - p, 1.0 - q]];
        for (a, b) in out.values().iter().zip(want.iter()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn random_walk_rows() {
        let s = FiniteSpace::indexed(5);
        let k = Kernel::random_walk(s.clone(), 0.25, 0.5, 0.25).unwrap();
        assert_eq!(k.matrix()[[2, 1]], 0.25);
        assert_eq!(k.matrix()[[2, 2]], 0.5);
        assert_eq!(k.matrix()[[2, 3]], 0.25);
        let mut w = vec![0.0; 5];
        w[2] = 1.0;
        let mu = VectorMeasure::new(s, Array2::from_shape_vec((5, 1), w).unwrap()).unwrap();
        let out = kernel_apply(&k, &mu).unwrap();
        assert_eq!(out.component(0), vec![0.0, 0.25, 0.5, 0.25, 0.0]);
    }

    #[test]
    fn compose_with_identity() {
        let k = Kernel::new(two(), two(), array![[0.1, 0.9], [0.6, 0.4]]).unwrap();
        let c = kernel_compose(&k, &Kernel::identity(two())).unwrap();
        assert_eq!(c.matrix(), k.matrix());
    }

    #[test]
    fn compose_deterministic() {
        let x = FiniteSpace::indexed(3);
        let p = Kernel::deterministic(x.clone(), x.clone(), &[2, 0, 1]).unwrap();
        let q = Kernel::deterministic(x.clone(), x.clone(), &[1, 1, 0]).unwrap();
        let r = kernel_compose(&p, &q).unwrap();
        let want = Kernel::deterministic(x.clone(), x, &[0, 1, 1]).unwrap();
        assert_eq!(r.matrix(), want.matrix());
    }

    #[test]
    fn product_with_constant_rows() {
        let nu = [0.25, 0.75];
        let k = Kernel::new(two(), two(), array![[nu[0], nu[1]], [nu[0], nu[1]]]).unwrap();
        let mu = VectorMeasure::new(two(), array![[1.0, 1.0], [0.5, 1.5]]).unwrap();
        let plan = product(&k, &mu).unwrap();
        let refw = mu.ref_weights();
        for x in 0..2 {
            for y in 0..2 {
                assert!((plan.matrix()[[x, y]] - refw[x] * nu[y]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn deterministic_product_on_graph() {
        let x = FiniteSpace::indexed(3);
        let k = Kernel::deterministic(x.clone(), two(), &[1, 0, 1]).unwrap();
        let mu = VectorMeasure::new(x, array![[1.0], [2.0], [3.0]]).unwrap();
        let plan = product(&k, &mu).unwrap();
        assert_eq!(plan.matrix(), &array![[0.0, 1.0], [2.0, 0.0], [0.0, 3.0]]);
    }

    #[test]
    fn disintegrate_product_plan() {
        let plan = TransportPlan::from_matrix(array![[0.1, 0.3], [0.15, 0.45]]).unwrap();
        let (k, m) = disintegrate(&plan, Axis::Source);
        for row in k.matrix().rows() {
            assert!((row[0] - 0.25).abs() < 1e-15 && (row[1] - 0.75).abs() < 1e-15);
        }
        assert!((m.weights()[0] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn disintegrate_graph_plan() {
        let plan = TransportPlan::from_matrix(array![[0.0, 2.0], [1.0, 0.0]]).unwrap();
        let (k, _) = disintegrate(&plan, Axis::Source);
        assert_eq!(k.matrix(), &array![[0.0, 1.0], [1.0, 0.0]]);
    }

    #[test]
    fn zero_marginal_rows_are_uniform() {
        let plan = TransportPlan::from_matrix(array![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]).unwrap();
        let (k, _) = disintegrate(&plan, Axis::Source);
        assert!(k.matrix().row(0).iter().all(|&v| (v - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn scalar_variation_is_reference() {
        let mu = VectorMeasure::new(FiniteSpace::indexed(3), array![[1.0], [0.0], [2.5]]).unwrap();
        assert_eq!(variation(&mu, Norm::L1).weights(), mu.ref_weights());
    }

    #[test]
    fn pythagorean_variation() {
        let s = FiniteSpace::indexed(1);
        let mu = VectorMeasure::from_density(s, array![[3.0, 4.0]], vec![1.0]).unwrap();
        assert!((variation(&mu, Norm::L2).weights()[0] - 5.0).abs() < 1e-15);
        assert!((variation(&mu, Norm::LInf).weights()[0] - 4.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(FiniteSpace::new(vec!["a".into(), "a".into()], None).is_err());
        assert!(VectorMeasure::new(two(), array![[1.0, -0.1], [0.0, 0.0]]).is_err());
        let clamped = VectorMeasure::new(two(), array![[1.0, -1e-12], [0.0, 1.0]]).unwrap();
        assert_eq!(clamped.values()[[0, 1]], 0.0);
        assert!(Kernel::new(two(), two(), array![[0.5, 0.4], [0.5, 0.5]]).is_err());
        assert!(
            VectorMeasure::with_ref_weights(two(), array![[1.0, 0.0], [1.0, 0.0]], vec![1.0, 0.0])
                .is_err()
        );
    }
}
