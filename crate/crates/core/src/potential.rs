//! Potential catalogue, the `V = W + K` splitting, and moments `∫ y^α V ψ`.

use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::greens::a_priori_contraction;
use crate::grid::{Grid, RadialGrid, SampledFunction, TensorGrid};
use crate::lorentz::{quasinorm, LorentzIndex};
use crate::special::{norm, powi, AxialPolynomial, Compensated};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialKind {
    /// `V = -n(n-2) s/(1+|x|²)²` with zero state `(1+|x|²)^{-(n-2)/2}` at `s = 1`.
    InverseDesignRadial,
    /// `V = -n(n+2) s/(1+|x|²)²` with zero state `x₁(1+|x|²)^{-n/2}` at `s = 1`.
    InverseDesignDipole,
    /// Smooth bump `a·exp(1 - 1/(1-(|x|/ρ)²))` supported in `B(0,ρ)`.
    CompactBump,
    CustomSamples,
}

impl PotentialKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "inverse_design_radial" => Ok(PotentialKind::InverseDesignRadial),
            "inverse_design_dipole" => Ok(PotentialKind::InverseDesignDipole),
            "compact_bump" => Ok(PotentialKind::CompactBump),
            "custom_samples" => Ok(PotentialKind::CustomSamples),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PotentialKind::InverseDesignRadial => "inverse_design_radial",
            PotentialKind::InverseDesignDipole => "inverse_design_dipole",
            PotentialKind::CompactBump => "compact_bump",
            PotentialKind::CustomSamples => "custom_samples",
        }
    }
}

/// A potential: a named analytic family with parameters, or a carried sample set.
///
/// Parameters: inverse-design kinds take `[scale]` (default 1); `compact_bump` takes
/// `[amplitude, radius]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    kind: PotentialKind,
    params: Vec<f64>,
    dim: usize,
    samples: Option<SampledFunction>,
}

/// Closed-form zero state `u(|x|)·P_l(x₁/|x|)` of an inverse-design potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormState {
    pub kind: PotentialKind,
    pub dim: usize,
    pub degree: usize,
}

impl ClosedFormState {
    pub fn profile(&self, r: f64) -> f64 {
        let n = self.dim as f64;
        match self.kind {
            PotentialKind::InverseDesignDipole => r * libm::pow(1.0 + r * r, -n / 2.0),
            _ => libm::pow(1.0 + r * r, -(n - 2.0) / 2.0),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let n = self.dim as f64;
        match self.kind {
            PotentialKind::InverseDesignDipole => x[0] * libm::pow(1.0 + r2, -n / 2.0),
            _ => libm::pow(1.0 + r2, -(n - 2.0) / 2.0),
        }
    }

    pub fn sample(&self, grid: &Arc<RadialGrid>) -> SampledFunction {
        let values = grid.nodes().iter().map(|r| self.profile(*r)).collect();
        SampledFunction::axial(grid, values, AxialPolynomial::zonal(self.degree, self.dim)).expect("profile length matches grid")
    }
}

impl PotentialSpec {
    pub fn new(kind: PotentialKind, params: Vec<f64>, dim: usize) -> Result<Self> {
        if dim < 3 {
            return Err(Error::InvalidParameter("dimension must be at least 3"));
        }
        match kind {
            PotentialKind::InverseDesignRadial | PotentialKind::InverseDesignDipole => {
                if params.len() > 1 || params.iter().any(|p| !p.is_finite()) {
                    return Err(Error::InvalidParameter("inverse-design kinds take [scale]"));
                }
            }
            PotentialKind::CompactBump => {
                if params.len() != 2 || !params.iter().all(|p| p.is_finite()) || !(params[1] > 0.0) {
                    return Err(Error::InvalidParameter("compact_bump takes [amplitude, radius > 0]"));
                }
            }
            PotentialKind::CustomSamples => {
                return Err(Error::InvalidParameter("custom samples are built with from_samples"));
            }
        }
        Ok(PotentialSpec { kind, params, dim, samples: None })
    }

    pub fn from_kind(name: &str, params: Vec<f64>, dim: usize) -> Result<Self> {
        PotentialSpec::new(PotentialKind::parse(name)?, params, dim)
    }

    pub fn from_samples(samples: SampledFunction) -> Self {
        let dim = samples.dim();
        PotentialSpec { kind: PotentialKind::CustomSamples, params: Vec::new(), dim, samples: Some(samples) }
    }

    pub fn inverse_design_radial(dim: usize) -> Self {
        PotentialSpec { kind: PotentialKind::InverseDesignRadial, params: vec![1.0], dim, samples: None }
    }

    pub fn inverse_design_dipole(dim: usize) -> Self {
        PotentialSpec { kind: PotentialKind::InverseDesignDipole, params: vec![1.0], dim, samples: None }
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn scale(&self) -> f64 {
        self.params.first().copied().unwrap_or(1.0)
    }

    pub fn is_radial(&self) -> bool {
        match &self.samples {
            Some(s) => s.radial_profile().is_ok(),
            None => true,
        }
    }

    /// Value of an isotropic potential at radius `r`.
    pub fn radial_value(&self, r: f64) -> f64 {
        let n = self.dim as f64;
        match self.kind {
            PotentialKind::InverseDesignRadial => -n * (n - 2.0) * self.scale() / libm::pow(1.0 + r * r, 2.0),
            PotentialKind::InverseDesignDipole => -n * (n + 2.0) * self.scale() / libm::pow(1.0 + r * r, 2.0),
            PotentialKind::CompactBump => {
                let (amp, rho) = (self.params[0], self.params[1]);
                let s = r / rho;
                if s >= 1.0 || amp == 0.0 {
                    0.0
                } else {
                    amp * libm::exp(1.0 - 1.0 / (1.0 - s * s))
                }
            }
            PotentialKind::CustomSamples => {
                let s = self.samples.as_ref().expect("custom samples present");
                s.value_at(&[r])
            }
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::InvalidParameter("point dimension does not match potential"));
        }
        match &self.samples {
            Some(s) => Ok(s.value_at(x)),
            None => Ok(self.radial_value(norm(x))),
        }
    }

    pub fn sample_radial(&self, grid: &Arc<RadialGrid>) -> Result<SampledFunction> {
        if grid.dim() != self.dim {
            return Err(Error::GridMismatch);
        }
        match &self.samples {
            Some(s) => match s.grid() {
                Grid::Radial(g) if g.as_ref() == grid.as_ref() => Ok(s.clone()),
                _ => Err(Error::GridMismatch),
            },
            None => Ok(SampledFunction::from_profile(grid, |r| self.radial_value(r))),
        }
    }

    pub fn sample_tensor(&self, grid: &Arc<TensorGrid>) -> Result<SampledFunction> {
        if grid.dim() != self.dim {
            return Err(Error::GridMismatch);
        }
        Ok(SampledFunction::from_points(grid, |x| match &self.samples {
            Some(s) => s.value_at(x),
            None => self.radial_value(norm(x)),
        }))
    }

    /// Known zero state for unscaled inverse-design kinds.
    pub fn closed_form_state(&self) -> Option<ClosedFormState> {
        let degree = match self.kind {
            PotentialKind::InverseDesignRadial => 0,
            PotentialKind::InverseDesignDipole => 1,
            _ => return None,
        };
        (self.scale() == 1.0).then_some(ClosedFormState { kind: self.kind, dim: self.dim, degree })
    }
}

pub const DEFAULT_BUDGET: usize = 24;
pub const DEFAULT_CONTRACTION_TARGET: f64 = 0.4;
/// Certified decompositions keep the induced contraction strictly below this value.
pub const CONTRACTION_CEILING: f64 = 0.5;

/// `V = W + K` with `K` simple and compactly supported and `W` small in `L^{n/2,1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub w: SampledFunction,
    pub k: SampledFunction,
    pub delta: f64,
    pub measured_w_norm: f64,
    pub contraction_c: f64,
    /// Largest node radius where `K ≠ 0` (0 when `K ≡ 0`).
    pub support_radius: f64,
    pub cutoff_radius: f64,
    pub clamp: f64,
    pub step: f64,
    pub rounds: usize,
    pub levels: usize,
}

impl Decomposition {
    /// Indices of the nodes where `K ≠ 0`.
    pub fn support(&self) -> Vec<usize> {
        self.k.values().iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, _)| i).collect()
    }
}

fn critical_index(dim: usize) -> LorentzIndex {
    LorentzIndex::new(dim as f64 / 2.0, 1.0).expect("valid critical index")
}

/// `‖V‖_{n/2,1}`.
pub fn critical_norm(v: &SampledFunction) -> Result<f64> {
    quasinorm(v, critical_index(v.dim()))
}

/// `min(0.1‖V‖_{n/2,1}, δ*)` where `δ*` makes the induced contraction equal `target`.
pub fn default_delta(v: &SampledFunction, target: f64) -> Result<f64> {
    let n = v.dim();
    let at_target = target / a_priori_contraction(n, 1.0);
    let norm = critical_norm(v)?;
    if norm == 0.0 {
        return Ok(at_target);
    }
    Ok((0.1 * norm).min(at_target))
}

fn node_radii(v: &SampledFunction) -> Result<Vec<f64>> {
    match v.grid() {
        Grid::Radial(g) => {
            v.radial_profile()?;
            Ok(g.nodes().to_vec())
        }
        Grid::Tensor(g) => {
            let mut x = vec![0.0; g.dim()];
            Ok((0..g.len())
                .map(|k| {
                    g.point(k, &mut x);
                    norm(&x)
                })
                .collect())
        }
    }
}

/// Escalates `(R, M, q_s)` (doubling, doubling, halving) until `‖V − K‖_{n/2,1} ≤ δ` and the
/// induced contraction is below [`CONTRACTION_CEILING`].
pub fn decompose(v: &SampledFunction, delta: f64, budget: usize) -> Result<Decomposition> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter("delta must be positive"));
    }
    let n = v.dim();
    let radii = node_radii(v)?;
    let values = v.values();
    let peak = v.max_abs();
    if peak == 0.0 {
        return Ok(Decomposition {
            w: v.zeros_like(),
            k: v.zeros_like(),
            delta,
            measured_w_norm: 0.0,
            contraction_c: 0.0,
            support_radius: 0.0,
            cutoff_radius: 0.0,
            clamp: 0.0,
            step: 0.0,
            rounds: 0,
            levels: 0,
        });
    }
    critical_norm(v)?;
    let support_extent = values.iter().zip(&radii).filter(|(x, _)| **x != 0.0).fold(0.0f64, |acc, (_, r)| acc.max(*r));
    let bulk = values.iter().zip(&radii).filter(|(x, _)| x.abs() >= 0.25 * peak).fold(0.0f64, |acc, (_, r)| acc.max(*r));
    let mut cutoff = bulk.max(radii.iter().cloned().fold(f64::INFINITY, f64::min)).min(support_extent);
    let mut clamp = peak;
    let mut step = peak / 4.0;
    let mut last = (f64::INFINITY, f64::INFINITY);
    for round in 1..=budget {
        let kv: Vec<f64> = values
            .iter()
            .zip(&radii)
            .map(|(x, r)| if *r <= cutoff { step * libm::round(x.clamp(-clamp, clamp) / step) } else { 0.0 })
            .collect();
        let k = v.with_values(kv)?;
        let w = v.difference(&k)?;
        let w_norm = critical_norm(&w)?;
        let contraction = a_priori_contraction(n, w_norm);
        last = (w_norm, contraction);
        if w_norm <= delta && contraction < CONTRACTION_CEILING {
            let mut distinct: Vec<f64> = k.values().iter().copied().filter(|x| *x != 0.0).collect();
            distinct.sort_by(|a, b| a.total_cmp(b));
            distinct.dedup();
            let support_radius = k.values().iter().zip(&radii).filter(|(x, _)| **x != 0.0).fold(0.0f64, |acc, (_, r)| acc.max(*r));
            return Ok(Decomposition {
                w,
                k,
                delta,
                measured_w_norm: w_norm,
                contraction_c: contraction,
                support_radius,
                cutoff_radius: cutoff,
                clamp,
                step,
                rounds: round,
                levels: distinct.len(),
            });
        }
        cutoff = (2.0 * cutoff).min(support_extent);
        clamp *= 2.0;
        step *= 0.5;
    }
    Err(Error::BudgetExhausted { rounds: budget, best_norm: last.0, contraction: last.1 })
}

/// Multi-index `α` of a moment `∫ y^α V ψ dy`.
pub type MultiIndex = Vec<usize>;

/// All multi-indices in `n` variables with `|α| ≤ max_order`, in graded lexicographic order.
pub fn multi_indices(n: usize, max_order: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for order in 0..=max_order {
        let mut current = vec![0usize; n];
        fill(&mut out, &mut current, 0, order);
    }
    fn fill(out: &mut Vec<MultiIndex>, current: &mut Vec<usize>, axis: usize, remaining: usize) {
        if axis == current.len() - 1 {
            current[axis] = remaining;
            out.push(current.clone());
            return;
        }
        for k in (0..=remaining).rev() {
            current[axis] = k;
            fill(out, current, axis + 1, remaining - k);
        }
        current[axis] = 0;
    }
    out
}

/// Moments `M_α = ∫ y^α V(y) ψ(y) dy` for `|α| ≤ max_order`.
pub fn moments(v: &SampledFunction, psi: &SampledFunction, max_order: usize) -> Result<BTreeMap<MultiIndex, f64>> {
    if max_order > 2 {
        return Err(Error::InvalidParameter("moments are defined up to order 2"));
    }
    let product = v.product(psi)?;
    if product.values().iter().any(|x| x.is_nan()) {
        return Err(Error::NanInput);
    }
    let n = v.dim();
    let mut out = BTreeMap::new();
    match product.grid() {
        Grid::Radial(g) => {
            let one = AxialPolynomial::constant(1.0);
            let angular = product.angular().unwrap_or(&one);
            let mut radial = [0.0; 3];
            for (order, slot) in radial.iter_mut().enumerate().take(max_order + 1) {
                let mut acc = Compensated::default();
                for ((r, w), f) in g.nodes().iter().zip(g.weights()).zip(product.values()) {
                    acc.add(w * powi(*r, order) * f);
                }
                *slot = acc.value();
            }
            for alpha in multi_indices(n, max_order) {
                let order: usize = alpha.iter().sum();
                let ang = angular.sphere_moment(n, &alpha);
                out.insert(alpha, if ang == 0.0 { 0.0 } else { radial[order] * ang });
            }
        }
        Grid::Tensor(g) => {
            for alpha in multi_indices(n, max_order) {
                let m = tensor_moment(g, product.values(), &alpha);
                out.insert(alpha, m);
            }
        }
    }
    Ok(out)
}

/// Sums `y^α f(y) h^n`, pairing each node with its mirror image across the first axis
/// along which `α` is odd so that odd moments of reflection-symmetric data cancel exactly.
fn tensor_moment(g: &TensorGrid, f: &[f64], alpha: &[usize]) -> f64 {
    let n = g.dim();
    let m = g.per_axis();
    let centre = m / 2;
    let odd_axis = alpha.iter().position(|a| a % 2 == 1);
    let mut x = vec![0.0; n];
    let mut idx = vec![0usize; n];
    let monomial = |x: &[f64]| -> f64 { x.iter().zip(alpha).map(|(v, a)| powi(*v, *a)).product() };
    let mut acc = Compensated::default();
    for k in 0..g.len() {
        g.point(k, &mut x);
        match odd_axis {
            None => acc.add(monomial(&x) * f[k]),
            Some(axis) => {
                g.axis_indices(k, &mut idx);
                if idx[axis] <= centre {
                    continue;
                }
                let here = monomial(&x) * f[k];
                idx[axis] = 2 * centre - idx[axis];
                let mirror = g.flat_index(&idx);
                x[axis] = -x[axis];
                acc.add(here + monomial(&x) * f[mirror]);
            }
        }
    }
    acc.value() * g.cell_volume()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_log_radial_grid;
    use core::f64::consts::PI;

    fn fine_grid(n: usize) -> Arc<RadialGrid> {
        Arc::new(make_log_radial_grid(1e-4, 1e4, 1601, n).unwrap())
    }

    #[test]
    fn analytic_values_at_origin() {
        let x = [0.0; 3];
        assert_eq!(PotentialSpec::inverse_design_radial(3).evaluate(&x).unwrap(), -3.0);
        assert_eq!(PotentialSpec::inverse_design_dipole(3).evaluate(&x).unwrap(), -15.0);
        let bump = PotentialSpec::from_kind("compact_bump", vec![0.0, 1.0], 3).unwrap();
        assert_eq!(bump.evaluate(&[0.2, 0.0, 0.1]).unwrap(), 0.0);
        assert!(matches!(PotentialSpec::from_kind("square_well", vec![], 3), Err(Error::UnknownKind(_))));
    }

    #[test]
    fn inverse_design_identity_by_finite_differences() {
        // V = Δψ/ψ at a generic point, by a fourth-order central stencil.
        for spec in [PotentialSpec::inverse_design_radial(3), PotentialSpec::inverse_design_dipole(3)] {
            let psi = spec.closed_form_state().unwrap();
            let x = [0.4, -0.3, 0.7];
            let h = 1e-3;
            let mut lap = 0.0;
            for a in 0..3 {
                let shifted = |d: f64| {
                    let mut y = x;
                    y[a] += d;
                    psi.value(&y)
                };
                lap += (-shifted(2.0 * h) + 16.0 * shifted(h) - 30.0 * psi.value(&x) + 16.0 * shifted(-h) - shifted(-2.0 * h))
                    / (12.0 * h * h);
            }
            let v = spec.evaluate(&x).unwrap();
            assert!((lap / psi.value(&x) - v).abs() < 1e-6, "{} vs {v}", lap / psi.value(&x));
        }
    }

    #[test]
    fn zero_potential_decomposes_trivially() {
        let g = fine_grid(3);
        let v = SampledFunction::from_profile(&g, |_| 0.0);
        let d = decompose(&v, 1e-3, 4).unwrap();
        assert!(d.w.is_zero() && d.k.is_zero());
        assert_eq!(d.measured_w_norm, 0.0);
    }

    #[test]
    fn simple_functions_are_fixed_points() {
        let g = Arc::new(make_log_radial_grid(1e-3, 1e2, 201, 3).unwrap());
        let v = SampledFunction::from_profile(&g, |r| if r <= 1.0 { 1.0 } else { 0.0 });
        let d = decompose(&v, 1e-6, 4).unwrap();
        assert_eq!(d.rounds, 1);
        assert!(d.w.is_zero());
        assert_eq!(d.k.values(), v.values());
    }

    #[test]
    fn inverse_design_decomposition_is_certified() {
        let g = fine_grid(3);
        let v = PotentialSpec::inverse_design_radial(3).sample_radial(&g).unwrap();
        let norm = critical_norm(&v).unwrap();
        let delta = 0.1 * norm;
        let d = decompose(&v, delta, DEFAULT_BUDGET).unwrap();
        let remeasured = critical_norm(&v.difference(&d.k).unwrap()).unwrap();
        assert_eq!(remeasured, d.measured_w_norm);
        assert!(d.measured_w_norm <= delta);
        assert!(d.contraction_c < CONTRACTION_CEILING);
        assert!(d.levels as f64 <= 2.0 * d.clamp / d.step);
        for (k, r) in d.k.values().iter().zip(g.nodes()) {
            if *r > d.support_radius {
                assert_eq!(*k, 0.0);
            }
        }
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let g = fine_grid(3);
        let v = PotentialSpec::inverse_design_radial(3).sample_radial(&g).unwrap();
        assert!(matches!(decompose(&v, 1e-6, 3), Err(Error::BudgetExhausted { .. })));
    }

    #[test]
    fn radial_family_moment() {
        let g = fine_grid(3);
        let spec = PotentialSpec::inverse_design_radial(3);
        let v = spec.sample_radial(&g).unwrap();
        let psi = spec.closed_form_state().unwrap().sample(&g);
        let m = moments(&v, &psi, 2).unwrap();
        assert!((m[&vec![0, 0, 0]] / (-4.0 * PI) - 1.0).abs() < 0.02);
        assert_eq!(m[&vec![1, 0, 0]], 0.0);
    }

    #[test]
    fn dipole_family_moments() {
        let g = fine_grid(3);
        let spec = PotentialSpec::inverse_design_dipole(3);
        let v = spec.sample_radial(&g).unwrap();
        let psi = spec.closed_form_state().unwrap().sample(&g);
        let m = moments(&v, &psi, 2).unwrap();
        assert_eq!(m[&vec![0, 0, 0]], 0.0);
        assert!((m[&vec![1, 0, 0]] / (-4.0 * PI) - 1.0).abs() < 0.02);
        assert_eq!(m[&vec![0, 1, 0]], 0.0);
        assert_eq!(m[&vec![1, 1, 0]], 0.0);
    }

    #[test]
    fn zero_state_has_zero_moments() {
        let g = fine_grid(3);
        let v = PotentialSpec::inverse_design_radial(3).sample_radial(&g).unwrap();
        let z = v.zeros_like();
        assert!(moments(&v, &z, 2).unwrap().values().all(|m| *m == 0.0));
    }

    #[test]
    fn odd_tensor_moments_cancel_exactly() {
        let g = Arc::new(TensorGrid::new(3, 0.2, 2.0).unwrap());
        let spec = PotentialSpec::inverse_design_radial(3);
        let v = spec.sample_tensor(&g).unwrap();
        let psi = SampledFunction::from_points(&g, |x| spec.closed_form_state().unwrap().value(x));
        let m = moments(&v, &psi, 2).unwrap();
        for (alpha, value) in &m {
            if alpha.iter().any(|a| a % 2 == 1) {
                assert_eq!(*value, 0.0, "{alpha:?}");
            }
        }
        assert!(m[&vec![0, 0, 0]] < 0.0);
    }

    #[test]
    fn multi_index_enumeration() {
        let all = multi_indices(3, 2);
        assert_eq!(all.len(), 10);
        assert_eq!(all[0], vec![0, 0, 0]);
        assert_eq!(all[1], vec![1, 0, 0]);
    }
}
