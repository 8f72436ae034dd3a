//! Radial and tensor grids, quadrature, and sampled-function arithmetic.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::special::{compensated_sum, norm, sphere_area, AxialPolynomial, Compensated};
use crate::{Error, Result};

/// Logarithmically spaced radial nodes with weights for `∫_0^∞ f(r) r^{n-1} dr`.
///
/// Weights are the trapezoid rule in `s = ln r` including the Jacobian `r^n`; the
/// ball `[0, r_1]` is absorbed into the first node.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    dim: usize,
    log_step: f64,
}

impl RadialGrid {
    /// `count` geometrically spaced nodes between `r_min` and `r_max` inclusive.
    pub fn log(r_min: f64, r_max: f64, count: usize, dim: usize) -> Result<Self> {
        if !(r_min > 0.0 && r_max > r_min && r_max.is_finite()) {
            return Err(Error::InvalidRange("need 0 < r_min < r_max"));
        }
        if count < 8 {
            return Err(Error::InvalidRange("need at least 8 radial nodes"));
        }
        if dim < 3 {
            return Err(Error::InvalidRange("dimension must be at least 3"));
        }
        let log_min = libm::log(r_min);
        let log_step = (libm::log(r_max) - log_min) / (count - 1) as f64;
        let mut nodes: Vec<f64> = (0..count).map(|k| libm::exp(log_min + k as f64 * log_step)).collect();
        nodes[0] = r_min;
        nodes[count - 1] = r_max;
        let n = dim as i32;
        let mut weights: Vec<f64> = nodes.iter().map(|r| log_step * libm::pow(*r, n as f64)).collect();
        weights[0] *= 0.5;
        weights[count - 1] *= 0.5;
        weights[0] += libm::pow(r_min, n as f64) / dim as f64;
        Ok(RadialGrid { nodes, weights, dim, log_step })
    }

    /// Grid with an exact logarithmic step; `r_max` is rounded up to a whole step.
    pub fn with_log_step(r_min: f64, r_max: f64, log_step: f64, dim: usize) -> Result<Self> {
        if !(log_step > 0.0) || !(r_min > 0.0 && r_max > r_min) {
            return Err(Error::InvalidRange("need 0 < r_min < r_max and a positive step"));
        }
        let steps = libm::ceil(libm::log(r_max / r_min) / log_step - 1e-9) as usize;
        let top = r_min * libm::exp(steps as f64 * log_step);
        RadialGrid::log(r_min, top, steps + 1, dim)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn log_step(&self) -> f64 {
        self.log_step
    }

    pub fn r_min(&self) -> f64 {
        self.nodes[0]
    }

    pub fn r_max(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Index of the last node with radius `≤ r`, if any.
    pub fn last_node_within(&self, r: f64) -> Option<usize> {
        let count = self.nodes.partition_point(|x| *x <= r * (1.0 + 1e-12));
        count.checked_sub(1)
    }

    /// Linear interpolation in `ln r` of nodal values; constant below `r_min`, zero
    /// beyond `r_max`.
    pub fn interpolate(&self, values: &[f64], r: f64) -> f64 {
        if r <= self.nodes[0] {
            return values[0];
        }
        if r > self.r_max() * (1.0 + 1e-12) {
            return 0.0;
        }
        let i = self.nodes.partition_point(|x| *x <= r).min(self.nodes.len() - 1).max(1);
        let (a, b) = (self.nodes[i - 1], self.nodes[i]);
        let theta = (libm::log(r) - libm::log(a)) / (libm::log(b) - libm::log(a));
        values[i - 1] + theta * (values[i] - values[i - 1])
    }
}

/// Make a geometric radial grid; see [`RadialGrid::log`].
pub fn make_log_radial_grid(r_min: f64, r_max: f64, count: usize, dim: usize) -> Result<RadialGrid> {
    RadialGrid::log(r_min, r_max, count, dim)
}

/// Uniform, origin-centered tensor grid `((i - m) h)_{i=0..2m}` on every axis.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorGrid {
    dim: usize,
    spacing: f64,
    half_count: usize,
}

impl TensorGrid {
    pub fn new(dim: usize, spacing: f64, half_width: f64) -> Result<Self> {
        if dim < 3 {
            return Err(Error::InvalidRange("dimension must be at least 3"));
        }
        if !(spacing > 0.0 && half_width >= spacing) {
            return Err(Error::InvalidRange("need 0 < h ≤ L"));
        }
        let half_count = libm::round(half_width / spacing) as usize;
        Ok(TensorGrid { dim, spacing, half_count })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn half_width(&self) -> f64 {
        self.half_count as f64 * self.spacing
    }

    pub fn per_axis(&self) -> usize {
        2 * self.half_count + 1
    }

    pub fn len(&self) -> usize {
        self.per_axis().pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        libm::pow(self.spacing, self.dim as f64)
    }

    pub fn axis_coordinate(&self, i: usize) -> f64 {
        (i as f64 - self.half_count as f64) * self.spacing
    }

    /// Writes the coordinates of node `flat` (last axis fastest) into `out`.
    pub fn point(&self, flat: usize, out: &mut [f64]) {
        let m = self.per_axis();
        let mut rest = flat;
        for a in (0..self.dim).rev() {
            out[a] = self.axis_coordinate(rest % m);
            rest /= m;
        }
    }

    pub fn axis_indices(&self, flat: usize, out: &mut [usize]) {
        let m = self.per_axis();
        let mut rest = flat;
        for a in (0..self.dim).rev() {
            out[a] = rest % m;
            rest /= m;
        }
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let m = self.per_axis();
        idx.iter().fold(0, |acc, i| acc * m + i)
    }

    /// Flat index of the node nearest to `x`, if `x` lies inside the grid's cells.
    pub fn nearest(&self, x: &[f64]) -> Option<usize> {
        let m = self.per_axis();
        let mut flat = 0;
        for v in x.iter().take(self.dim) {
            let i = libm::round(v / self.spacing) + self.half_count as f64;
            if i < 0.0 || i >= m as f64 {
                return None;
            }
            flat = flat * m + i as usize;
        }
        Some(flat)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    Radial(Arc<RadialGrid>),
    Tensor(Arc<TensorGrid>),
}

impl Grid {
    pub fn dim(&self) -> usize {
        match self {
            Grid::Radial(g) => g.dim(),
            Grid::Tensor(g) => g.dim(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Grid::Radial(g) => g.len(),
            Grid::Tensor(g) => g.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        match (self, other) {
            (Grid::Radial(a), Grid::Radial(b)) => Arc::ptr_eq(a, b) || a == b,
            (Grid::Tensor(a), Grid::Tensor(b)) => Arc::ptr_eq(a, b) || a == b,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    Radial,
    General,
}

/// Samples of a scalar function on a grid.
///
/// On a radial grid the function is `u(|x|)·P(x₁/|x|)` with nodal profile `u` and an
/// optional axial polynomial `P` (absent means isotropic).
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Grid,
    values: Vec<f64>,
    angular: Option<AxialPolynomial>,
}

impl SampledFunction {
    pub fn radial(grid: &Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(SampledFunction { grid: Grid::Radial(grid.clone()), values, angular: None })
    }

    pub fn axial(grid: &Arc<RadialGrid>, values: Vec<f64>, angular: AxialPolynomial) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        let angular = if angular.is_one() { None } else { Some(angular) };
        Ok(SampledFunction { grid: Grid::Radial(grid.clone()), values, angular })
    }

    pub fn tensor(grid: &Arc<TensorGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(SampledFunction { grid: Grid::Tensor(grid.clone()), values, angular: None })
    }

    pub fn from_profile(grid: &Arc<RadialGrid>, profile: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|r| profile(*r)).collect();
        SampledFunction { grid: Grid::Radial(grid.clone()), values, angular: None }
    }

    pub fn from_points(grid: &Arc<TensorGrid>, f: impl Fn(&[f64]) -> f64) -> Self {
        let mut x = vec![0.0; grid.dim()];
        let values = (0..grid.len())
            .map(|k| {
                grid.point(k, &mut x);
                f(&x)
            })
            .collect();
        SampledFunction { grid: Grid::Tensor(grid.clone()), values, angular: None }
    }

    /// Same grid and angular factor with new nodal values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.values.len() {
            return Err(Error::GridMismatch);
        }
        Ok(SampledFunction { grid: self.grid.clone(), values, angular: self.angular.clone() })
    }

    pub fn zeros_like(&self) -> Self {
        SampledFunction { grid: self.grid.clone(), values: vec![0.0; self.values.len()], angular: None }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn radial_grid(&self) -> Option<&Arc<RadialGrid>> {
        match &self.grid {
            Grid::Radial(g) => Some(g),
            Grid::Tensor(_) => None,
        }
    }

    pub fn tensor_grid(&self) -> Option<&Arc<TensorGrid>> {
        match &self.grid {
            Grid::Tensor(g) => Some(g),
            Grid::Radial(_) => None,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Angular factor; `None` for isotropic radial functions and tensor samples.
    pub fn angular(&self) -> Option<&AxialPolynomial> {
        self.angular.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn symmetry(&self) -> Symmetry {
        match (&self.grid, &self.angular) {
            (Grid::Radial(_), None) => Symmetry::Radial,
            _ => Symmetry::General,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    /// Isotropic radial profile, or `RequiresRadial`.
    pub fn radial_profile(&self) -> Result<(&Arc<RadialGrid>, &[f64])> {
        match (&self.grid, &self.angular) {
            (Grid::Radial(g), None) => Ok((g, &self.values)),
            _ => Err(Error::RequiresRadial),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        SampledFunction { grid: self.grid.clone(), values: self.values.iter().map(|v| f(*v)).collect(), angular: self.angular.clone() }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// Pointwise `|f|`; defined for isotropic and tensor samples.
    pub fn abs(&self) -> Result<Self> {
        if self.angular.is_some() {
            return Err(Error::RequiresRadial);
        }
        Ok(self.map(f64::abs))
    }

    pub fn product(&self, other: &SampledFunction) -> Result<Self> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch);
        }
        let angular = match (&self.angular, &other.angular) {
            (None, None) => None,
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (Some(a), Some(b)) => Some(a.mul(b)),
        };
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(SampledFunction { grid: self.grid.clone(), values, angular })
    }

    fn combine(&self, other: &SampledFunction, op: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if !self.grid.same_as(&other.grid) || self.angular != other.angular {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| op(*a, *b)).collect();
        Ok(SampledFunction { grid: self.grid.clone(), values, angular: self.angular.clone() })
    }

    pub fn sum(&self, other: &SampledFunction) -> Result<Self> {
        self.combine(other, |a, b| a + b)
    }

    pub fn difference(&self, other: &SampledFunction) -> Result<Self> {
        self.combine(other, |a, b| a - b)
    }

    /// `max |f|` over the grid (and over directions for axial functions).
    pub fn max_abs(&self) -> f64 {
        let m = self.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        match &self.angular {
            Some(p) => m * p.max_abs(),
            None => m,
        }
    }

    /// Value at an arbitrary point: log-linear interpolation of the profile on radial
    /// grids, nearest node on tensor grids (zero outside the grid).
    pub fn value_at(&self, x: &[f64]) -> f64 {
        match &self.grid {
            Grid::Radial(g) => {
                let r = norm(x);
                let u = g.interpolate(&self.values, r);
                match &self.angular {
                    None => u,
                    Some(p) if r > 0.0 => u * p.eval(x[0] / r),
                    Some(p) => u * p.eval(1.0),
                }
            }
            Grid::Tensor(g) => g.nearest(x).map_or(0.0, |k| self.values[k]),
        }
    }
}

/// Quadrature value of `∫ f dx` over the grid's extent.
pub fn integrate(f: &SampledFunction) -> Result<f64> {
    if f.values.iter().any(|v| v.is_nan()) {
        return Err(Error::NanInput);
    }
    match &f.grid {
        Grid::Radial(g) => {
            let n = g.dim();
            let angular = match &f.angular {
                Some(p) => p.sphere_integral(n),
                None => sphere_area(n),
            };
            let radial = compensated_sum(g.weights().iter().zip(&f.values).map(|(w, v)| w * v));
            Ok(angular * radial)
        }
        Grid::Tensor(g) => Ok(g.cell_volume() * compensated_sum(f.values.iter().copied())),
    }
}

/// Relative residual `‖(−Δ_h + V)ψ‖₂ / ‖ψ‖₂` over interior tensor nodes, with the
/// second-order centered Laplacian.
pub fn laplacian_residual(psi: &SampledFunction, v: &SampledFunction) -> Result<f64> {
    let g = psi.tensor_grid().ok_or(Error::RequiresTensor)?;
    if !psi.grid.same_as(&v.grid) {
        return Err(Error::GridMismatch);
    }
    if psi.values.iter().chain(&v.values).any(|x| x.is_nan()) {
        return Err(Error::NanInput);
    }
    let n = g.dim();
    let m = g.per_axis();
    let inv_h2 = 1.0 / (g.spacing() * g.spacing());
    let strides: Vec<usize> = (0..n).map(|a| m.pow((n - 1 - a) as u32)).collect();
    let mut idx = vec![0usize; n];
    let mut res = Compensated::default();
    let mut mass = Compensated::default();
    for k in 0..g.len() {
        g.axis_indices(k, &mut idx);
        if idx.iter().any(|i| *i == 0 || *i == m - 1) {
            continue;
        }
        let centre = psi.values[k];
        let mut lap = 0.0;
        for s in &strides {
            lap += psi.values[k + s] + psi.values[k - s] - 2.0 * centre;
        }
        let r = -lap * inv_h2 + v.values[k] * centre;
        res.add(r * r);
        mass.add(centre * centre);
    }
    if mass.value() == 0.0 {
        return Ok(0.0);
    }
    Ok(libm::sqrt(res.value() / mass.value()))
}
