//! Grid-sampled scalar and vector fields and the parameter records shared by
//! the solvers.
//!
//! Storage is row-major: for a 2D grid with sizes `[n0, n1]` the point
//! `(i, j)` lives at `i * n1 + j`. Axis 0 indexes rows, axis 1 columns.
//! Vector fields keep one contiguous buffer per component, component `k`
//! being the quantity associated with axis `k`.

use crate::error::{Error, Result};

/// Uniform 1D or 2D grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    sizes: Vec<usize>,
    spacing: Vec<f64>,
}

impl GridSpec {
    pub fn new(sizes: &[usize], spacing: &[f64]) -> Result<Self> {
        if sizes.is_empty() || sizes.len() > 2 {
            return Err(Error::InvalidGrid(format!(
                "expected 1 or 2 axes, got {}",
                sizes.len()
            )));
        }
        if spacing.len() != sizes.len() {
            return Err(Error::InvalidGrid(format!(
                "{} sizes but {} spacings",
                sizes.len(),
                spacing.len()
            )));
        }
        if let Some(n) = sizes.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidGrid(format!("axis size {n} < 2")));
        }
        if let Some(h) = spacing.iter().find(|h| !(h.is_finite() && **h > 0.0)) {
            return Err(Error::InvalidGrid(format!("spacing {h} is not positive")));
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            spacing: spacing.to_vec(),
        })
    }

    /// `n` points with spacing `h`.
    pub fn line(n: usize, h: f64) -> Result<Self> {
        Self::new(&[n], &[h])
    }

    /// `rows × cols` pixels with unit spacing.
    pub fn image(rows: usize, cols: usize) -> Result<Self> {
        Self::new(&[rows, cols], &[1.0, 1.0])
    }

    pub fn dims(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Measure of one grid cell, the weight of every discrete integral.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Measure of the whole sampled domain.
    pub fn domain_measure(&self) -> f64 {
        self.cell_volume() * self.len() as f64
    }

    /// Distance in the flat buffer between neighbours along `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        self.sizes[axis + 1..].iter().product()
    }

    /// Coordinate of `flat` along `axis`.
    pub fn coord(&self, flat: usize, axis: usize) -> usize {
        (flat / self.stride(axis)) % self.sizes[axis]
    }

    pub(crate) fn check_same(&self, other: &GridSpec, what: &str) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!(
                "{what}: {:?}/{:?} vs {:?}/{:?}",
                self.sizes, self.spacing, other.sizes, other.spacing
            )));
        }
        Ok(())
    }
}

/// Real value per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: &GridSpec) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &GridSpec, c: f64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![c; grid.len()],
        }
    }

    /// Builds a field from a function of the flat index.
    pub fn from_fn(grid: &GridSpec, f: impl FnMut(usize) -> f64) -> Result<Self> {
        Self::new(grid.clone(), (0..grid.len()).map(f).collect())
    }

    /// Skips validation; kernels guarantee the length and finiteness.
    pub(crate) fn from_raw(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Cell-volume weighted inner product.
    pub fn dot(&self, other: &ScalarField) -> Result<f64> {
        self.grid.check_same(&other.grid, "dot")?;
        Ok(self.grid.cell_volume() * dot(&self.values, &other.values))
    }

    /// Cell-volume weighted L2 norm.
    pub fn norm_l2(&self) -> f64 {
        (self.grid.cell_volume() * dot(&self.values, &self.values)).sqrt()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.grid.check_same(&other.grid, "zip_map")?;
        Self::new(
            self.grid.clone(),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn sub(&self, other: &ScalarField) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn add(&self, other: &ScalarField) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    /// Value at `(i, j)` of a 2D field.
    pub fn at2(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.sizes[1] + j]
    }
}

/// A `dims`-vector per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: GridSpec,
    components: Vec<Vec<f64>>,
}

impl VectorField {
    pub fn new(grid: GridSpec, components: Vec<Vec<f64>>) -> Result<Self> {
        if components.len() != grid.dims() {
            return Err(Error::GridMismatch(format!(
                "{} components on a {}D grid",
                components.len(),
                grid.dims()
            )));
        }
        for c in &components {
            if c.len() != grid.len() {
                return Err(Error::GridMismatch(format!(
                    "component of length {} on a grid of {} points",
                    c.len(),
                    grid.len()
                )));
            }
            if let Some(i) = c.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite(i));
            }
        }
        Ok(Self { grid, components })
    }

    pub fn zeros(grid: &GridSpec) -> Self {
        Self {
            grid: grid.clone(),
            components: vec![vec![0.0; grid.len()]; grid.dims()],
        }
    }

    /// The same vector at every point.
    pub fn constant(grid: &GridSpec, v: &[f64]) -> Result<Self> {
        Self::new(
            grid.clone(),
            v.iter().map(|&c| vec![c; grid.len()]).collect(),
        )
    }

    pub(crate) fn from_raw(grid: GridSpec, components: Vec<Vec<f64>>) -> Self {
        debug_assert_eq!(components.len(), grid.dims());
        Self { grid, components }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn component(&self, k: usize) -> &[f64] {
        &self.components[k]
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub fn into_components(self) -> Vec<Vec<f64>> {
        self.components
    }

    /// Euclidean magnitude at each grid point.
    pub fn magnitudes(&self) -> Vec<f64> {
        magnitudes(&self.components)
    }

    /// Largest pointwise magnitude, the discrete L∞ norm.
    pub fn max_magnitude(&self) -> f64 {
        self.magnitudes().into_iter().fold(0.0, f64::max)
    }

    /// Cell-volume weighted sum of magnitudes, the discrete Radon norm.
    pub fn norm_l1(&self) -> f64 {
        self.grid.cell_volume() * self.magnitudes().iter().sum::<f64>()
    }

    pub fn dot(&self, other: &VectorField) -> Result<f64> {
        self.grid.check_same(&other.grid, "dot")?;
        let s: f64 = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| dot(a, b))
            .sum();
        Ok(self.grid.cell_volume() * s)
    }

    pub fn sub(&self, other: &VectorField) -> Result<Self> {
        self.grid.check_same(&other.grid, "sub")?;
        Self::new(
            self.grid.clone(),
            self.components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
                .collect(),
        )
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn magnitudes(components: &[Vec<f64>]) -> Vec<f64> {
    let n = components[0].len();
    match components {
        [c] => c.iter().map(|v| v.abs()).collect(),
        [a, b] => a.iter().zip(b).map(|(x, y)| x.hypot(*y)).collect(),
        _ => (0..n)
            .map(|i| components.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt())
            .collect(),
    }
}

/// Weight of the L∞ term: one number or a positive value per grid point.
#[derive(Debug, Clone, PartialEq)]
pub enum Beta {
    Uniform(f64),
    Map(ScalarField),
}

impl Beta {
    pub fn is_uniform(&self) -> bool {
        matches!(self, Beta::Uniform(_))
    }
}

/// Regularisation weights and iteration controls.
#[derive(Debug, Clone, PartialEq)]
pub struct RegParams {
    pub alpha: f64,
    pub beta: Beta,
    /// Splitting penalty. `None` starts from `alpha` times the smallest grid
    /// spacing and lets the solver rebalance it.
    pub mu: Option<f64>,
    pub max_iters: usize,
    /// Relative change of `u` below which a solve counts as converged.
    pub tol: f64,
}

impl RegParams {
    pub const DEFAULT_MAX_ITERS: usize = 5000;
    pub const DEFAULT_TOL: f64 = 1e-6;

    /// Uniform `beta`, default penalty and stopping controls.
    pub fn new(alpha: f64, beta: f64) -> Self {
        Self {
            alpha,
            beta: Beta::Uniform(beta),
            mu: None,
            max_iters: Self::DEFAULT_MAX_ITERS,
            tol: Self::DEFAULT_TOL,
        }
    }

    pub fn with_beta_map(alpha: f64, beta: ScalarField) -> Self {
        Self {
            beta: Beta::Map(beta),
            ..Self::new(alpha, 1.0)
        }
    }

    pub fn mu(mut self, mu: f64) -> Self {
        self.mu = Some(mu);
        self
    }

    /// Initial penalty on `grid`.
    pub fn effective_mu(&self, grid: &GridSpec) -> f64 {
        self.mu.unwrap_or_else(|| {
            self.alpha * grid.spacing().iter().copied().fold(f64::INFINITY, f64::min)
        })
    }

    pub fn max_iters(mut self, n: usize) -> Self {
        self.max_iters = n;
        self
    }

    pub fn tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} = {v} must be positive")))
            }
        };
        positive("alpha", self.alpha)?;
        if let Some(mu) = self.mu {
            positive("mu", mu)?;
        }
        positive("tol", self.tol)?;
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be positive".into()));
        }
        match &self.beta {
            Beta::Uniform(b) => positive("beta", *b),
            Beta::Map(m) => match m.values().iter().find(|&&b| b <= 0.0) {
                Some(b) => Err(Error::InvalidParameter(format!(
                    "beta map contains non-positive value {b}"
                ))),
                None => Ok(()),
            },
        }
    }
}

/// Iterate history of one solve.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub energy_history: Vec<f64>,
    pub residual_history: Vec<f64>,
    pub converged: bool,
}

impl SolveReport {
    pub(crate) fn push(&mut self, energy: f64, residual: f64) {
        self.iterations += 1;
        self.energy_history.push(energy);
        self.residual_history.push(residual);
    }

    pub fn final_energy(&self) -> Option<f64> {
        self.energy_history.last().copied()
    }
}
