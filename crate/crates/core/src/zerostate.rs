//! Zero-energy states from the nullspace of `I + A`, `A = G K` restricted to `supp K`.
//!
//! For isotropic `V` the problem splits into harmonic degrees: a state of degree `l` is
//! `ψ(x) = u(|x|)·P_l(x₁/|x|)` with the zonal harmonic `P_l`, and `u` solves
//! `u(r) = −λ_l ∫ g_l(r, s) K(s) u(s) s^{n-1} ds` with `λ_l = (n-2)ω_{n-1}/(2l+n-2)`.

use alloc::sync::Arc;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::greens::{channel_factor, separated, GreensEvaluator};
use crate::grid::{RadialGrid, SampledFunction};
use crate::potential::Decomposition;
use crate::special::{harmonic_dimension, norm, sphere_area, AxialPolynomial};
use crate::{Error, Result};

/// Channel eigenvalue `λ_l` of the free single-layer map relative to `g_l`.
fn channel_weight(degree: usize, n: usize) -> f64 {
    (n - 2) as f64 * sphere_area(n) * channel_factor(degree, n)
}

/// `A[i, c] = λ_l g_l(t_i, t_c) K(t_c) w_c` for support nodes `i`, `c`.
#[derive(Debug, Clone)]
pub struct CompactOperator {
    pub degree: usize,
    pub support: Vec<usize>,
    pub matrix: DMatrix<f64>,
    extension: DMatrix<f64>,
    grid: Arc<RadialGrid>,
}

impl CompactOperator {
    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// `(A u)` on every grid node for a vector `u` on the support.
    pub fn apply_everywhere(&self, u: &[f64]) -> Vec<f64> {
        let v = nalgebra::DVector::from_column_slice(u);
        (&self.extension * v).iter().copied().collect()
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }
}

/// Builds the degree-`l` operator from the decomposition and the Green series for its `W`.
pub fn assemble(dec: &Decomposition, ev: &GreensEvaluator, degree: usize) -> Result<CompactOperator> {
    if !(dec.contraction_c < 1.0 && ev.c_measured() < 1.0) {
        return Err(Error::ContractionViolated(dec.contraction_c.max(ev.c_measured())));
    }
    if !ev.weight().grid().same_as(dec.w.grid()) || ev.weight().values() != dec.w.values() {
        return Err(Error::GridMismatch);
    }
    let (grid, k) = dec.k.radial_profile()?;
    let n = grid.dim();
    let support = dec.support();
    let columns = ev.channel_columns(degree, &support)?;
    let lambda = channel_weight(degree, n);
    let weights = grid.weights();
    let extension = DMatrix::from_fn(grid.len(), support.len(), |i, c| {
        let node = support[c];
        lambda * columns[c][i] * k[node] * weights[node]
    });
    let matrix = DMatrix::from_fn(support.len(), support.len(), |i, c| extension[(support[i], c)]);
    Ok(CompactOperator { degree, support, matrix, extension, grid: grid.clone() })
}

/// A numerically detected zero state `ψ = u(r)·P_l(x₁/r)`, normalized to `max |ψ| = 1`
/// on `supp K`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroState {
    pub degree: usize,
    pub support: Vec<usize>,
    pub support_values: Vec<f64>,
    /// `ψ` on the whole radial grid.
    pub psi: SampledFunction,
    pub sigma_min: f64,
    /// Dimension of the numerically detected nullspace (counting the `m`-degeneracy).
    pub multiplicity: usize,
}

/// Smallest singular value of `I + A`.
pub fn sigma_min(a: &CompactOperator) -> Result<f64> {
    Ok(spectrum(a)?.0)
}

fn spectrum(a: &CompactOperator) -> Result<(f64, Vec<f64>, usize)> {
    let s = a.support.len();
    if s == 0 {
        return Ok((1.0, Vec::new(), 0));
    }
    let system = DMatrix::identity(s, s) + &a.matrix;
    if system.iter().any(|x| !x.is_finite()) {
        return Err(Error::LinearAlgebra("non-finite operator entries"));
    }
    let svd = system.svd(false, true);
    let v_t = svd.v_t.ok_or(Error::LinearAlgebra("SVD did not return right singular vectors"))?;
    let (index, sigma) =
        svd.singular_values.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, v)| if *v < acc.1 { (i, *v) } else { acc });
    let vector = v_t.row(index).iter().copied().collect();
    Ok((sigma, vector, index))
}

fn count_below(a: &CompactOperator, tol: f64) -> Result<usize> {
    let s = a.support.len();
    if s == 0 {
        return Ok(0);
    }
    let system = DMatrix::identity(s, s) + &a.matrix;
    Ok(system.singular_values().iter().filter(|v| **v <= tol).count())
}

/// Default nullspace tolerance: the square of the logarithmic step.
pub fn default_tolerance(grid: &RadialGrid) -> f64 {
    grid.log_step() * grid.log_step()
}

/// Returns the state when `σ_min(I + A) ≤ tol`.
pub fn solve(a: &CompactOperator, tol: f64) -> Result<Option<ZeroState>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("solver tolerance must be positive"));
    }
    let (sigma, mut u, _) = spectrum(a)?;
    if a.support.is_empty() || sigma > tol {
        return Ok(None);
    }
    let peak = u.iter().fold(0.0f64, |acc, v| if v.abs() > acc.abs() { *v } else { acc });
    for v in u.iter_mut() {
        *v /= peak;
    }
    let mut everywhere = a.apply_everywhere(&u);
    for v in everywhere.iter_mut() {
        *v = -*v;
    }
    // Exact normalization on the support.
    for (c, node) in a.support.iter().enumerate() {
        everywhere[*node] = u[c];
    }
    let n = a.dim();
    let psi = SampledFunction::axial(&a.grid, everywhere, AxialPolynomial::zonal(a.degree, n))?;
    let multiplicity = count_below(a, tol)? * harmonic_dimension(a.degree, n);
    Ok(Some(ZeroState { degree: a.degree, support: a.support.clone(), support_values: u, psi, sigma_min: sigma, multiplicity }))
}

/// `σ_min` per degree and every state detected over degrees `0..=max_degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelScan {
    pub sigma_min: Vec<f64>,
    pub states: Vec<ZeroState>,
}

impl ChannelScan {
    pub fn state(&self, degree: usize) -> Option<&ZeroState> {
        self.states.iter().find(|z| z.degree == degree)
    }

    /// State with the smallest `σ_min`.
    pub fn best(&self) -> Option<&ZeroState> {
        self.states.iter().min_by(|a, b| a.sigma_min.total_cmp(&b.sigma_min))
    }

    /// Total nullspace dimension over the scanned degrees.
    pub fn multiplicity(&self) -> usize {
        self.states.iter().map(|z| z.multiplicity).sum()
    }
}

pub fn scan_channels(dec: &Decomposition, ev: &GreensEvaluator, max_degree: usize, tol: f64) -> Result<ChannelScan> {
    let mut sigmas = Vec::with_capacity(max_degree + 1);
    let mut states = Vec::new();
    for degree in 0..=max_degree {
        let a = assemble(dec, ev, degree)?;
        sigmas.push(sigma_min(&a)?);
        if let Some(state) = solve(&a, tol)? {
            states.push(state);
        }
    }
    Ok(ChannelScan { sigma_min: sigmas, states })
}

/// `ψ` at arbitrary points from `ψ = −(−Δ)^{-1}(Vψ)`, which on the grid is the same
/// discrete identity as `ψ = −∫ G K ψ`.
pub fn extend(z: &ZeroState, dec: &Decomposition, targets: &[Vec<f64>]) -> Result<Vec<f64>> {
    let (grid, u) = (z.psi.radial_grid().ok_or(Error::RequiresRadial)?, z.psi.values());
    let v = dec.w.sum(&dec.k)?;
    let (_, v) = v.radial_profile()?;
    let n = grid.dim();
    let factor = channel_factor(z.degree, n);
    let density: Vec<f64> = grid.weights().iter().zip(v).zip(u).map(|((w, v), u)| w * v * u).collect();
    let zonal = AxialPolynomial::zonal(z.degree, n);
    targets
        .iter()
        .map(|x| {
            if x.len() != n {
                return Err(Error::InvalidParameter("target dimension does not match the state"));
            }
            let r = norm(x);
            let profile: f64 = -factor * grid.nodes().iter().zip(&density).map(|(t, d)| separated(z.degree, n, r, *t) * d).sum::<f64>();
            let angle = if r > 0.0 { zonal.eval(x[0] / r) } else { zonal.eval(1.0) };
            Ok(profile * angle)
        })
        .collect()
}

/// Radial profile `u(r)` at each radius (the angular factor is 1 along the first axis).
pub fn extend_profile(z: &ZeroState, dec: &Decomposition, radii: &[f64]) -> Result<Vec<f64>> {
    let n = z.psi.dim();
    let targets: Vec<Vec<f64>> = radii
        .iter()
        .map(|r| {
            let mut x = alloc::vec![0.0; n];
            x[0] = *r;
            x
        })
        .collect();
    extend(z, dec, &targets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greens::GreensOptions;
    use crate::potential::{decompose, default_delta, PotentialSpec, DEFAULT_BUDGET, DEFAULT_CONTRACTION_TARGET};

    fn pipeline(spec: &PotentialSpec, step: f64, scale: f64) -> (Decomposition, GreensEvaluator) {
        let g = Arc::new(RadialGrid::with_log_step(1e-4, 2e3, step, spec.dim()).unwrap());
        let v = spec.sample_radial(&g).unwrap().scaled(scale);
        let delta = default_delta(&v, DEFAULT_CONTRACTION_TARGET).unwrap();
        let dec = decompose(&v, delta, DEFAULT_BUDGET).unwrap();
        let ev = GreensEvaluator::new(&dec.w, GreensOptions::default()).unwrap();
        (dec, ev)
    }

    fn oracle_error(spec: &PotentialSpec, step: f64) -> (f64, ZeroState) {
        let (dec, ev) = pipeline(spec, step, 1.0);
        let closed = spec.closed_form_state().unwrap();
        let a = assemble(&dec, &ev, closed.degree).unwrap();
        let z = solve(&a, default_tolerance(a.grid())).unwrap().expect("zero state");
        let nodes = a.grid().nodes();
        let exact: Vec<f64> = z.support.iter().map(|i| closed.profile(nodes[*i])).collect();
        let peak = exact.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let err = z.support_values.iter().zip(&exact).map(|(u, e)| (u - e / peak).abs()).fold(0.0f64, f64::max);
        (err, z)
    }

    #[test]
    fn empty_support_has_no_state() {
        let g = Arc::new(RadialGrid::log(1e-3, 10.0, 40, 3).unwrap());
        let v = SampledFunction::from_profile(&g, |_| 0.0);
        let dec = decompose(&v, 0.1, 4).unwrap();
        let ev = GreensEvaluator::new(&dec.w, GreensOptions::default()).unwrap();
        let a = assemble(&dec, &ev, 0).unwrap();
        assert!(a.support.is_empty());
        assert_eq!(sigma_min(&a).unwrap(), 1.0);
        assert!(solve(&a, 0.5).unwrap().is_none());
    }

    #[test]
    fn radial_family_matches_closed_form() {
        let spec = PotentialSpec::inverse_design_radial(3);
        let (err, z) = oracle_error(&spec, 0.1);
        assert!(err < 0.05, "{err}");
        assert!(z.sigma_min < 0.01);
        let (finer, _) = oracle_error(&spec, 0.05);
        assert!(finer <= 0.4 * err, "{finer} vs {err}");
    }

    #[test]
    fn dipole_family_matches_closed_form() {
        let spec = PotentialSpec::inverse_design_dipole(3);
        let (err, z) = oracle_error(&spec, 0.1);
        assert_eq!(z.degree, 1);
        assert_eq!(z.multiplicity, 3);
        assert!(err < 0.05, "{err}");
    }

    #[test]
    fn dipole_potential_also_carries_a_radial_resonance() {
        // ψ = (1 − r²)(1 + r²)^{-3/2} solves the same equation in the l = 0 channel.
        let spec = PotentialSpec::inverse_design_dipole(3);
        let (dec, ev) = pipeline(&spec, 0.1, 1.0);
        let scan = scan_channels(&dec, &ev, 2, default_tolerance(dec.w.radial_grid().unwrap())).unwrap();
        assert_eq!(scan.states.len(), 2);
        assert_eq!(scan.multiplicity(), 4);
        let z = scan.state(0).unwrap();
        let nodes = dec.w.radial_grid().unwrap().nodes();
        for (i, u) in z.support.iter().zip(&z.support_values) {
            let r = nodes[*i];
            let exact = (1.0 - r * r) / libm::pow(1.0 + r * r, 1.5);
            assert!((u - exact).abs() < 0.01, "{r}: {u} vs {exact}");
        }
    }

    #[test]
    fn operator_reproduces_minus_psi() {
        let spec = PotentialSpec::inverse_design_radial(3);
        let (dec, ev) = pipeline(&spec, 0.1, 1.0);
        let a = assemble(&dec, &ev, 0).unwrap();
        let closed = spec.closed_form_state().unwrap();
        let nodes = a.grid().nodes();
        let psi: Vec<f64> = a.support.iter().map(|i| closed.profile(nodes[*i])).collect();
        let applied = a.matrix.clone() * nalgebra::DVector::from_column_slice(&psi);
        let rel = applied.iter().zip(&psi).map(|(x, p)| (x + p).abs()).fold(0.0f64, f64::max);
        assert!(rel < 0.03, "{rel}");
    }

    #[test]
    fn detuning_lifts_the_smallest_singular_value() {
        let spec = PotentialSpec::inverse_design_radial(3);
        let (dec, ev) = pipeline(&spec, 0.1, 1.0);
        let tuned = sigma_min(&assemble(&dec, &ev, 0).unwrap()).unwrap();
        let (dec, ev) = pipeline(&spec, 0.1, 1.1);
        let detuned = sigma_min(&assemble(&dec, &ev, 0).unwrap()).unwrap();
        assert!(detuned > tuned, "{detuned} vs {tuned}");
        assert!(detuned > default_tolerance(dec.w.radial_grid().unwrap()));
    }

    #[test]
    fn extension_reproduces_support_values_and_tail() {
        let spec = PotentialSpec::inverse_design_radial(3);
        let (dec, ev) = pipeline(&spec, 0.1, 1.0);
        let a = assemble(&dec, &ev, 0).unwrap();
        let z = solve(&a, default_tolerance(a.grid())).unwrap().unwrap();
        let nodes = a.grid().nodes();
        let radii: Vec<f64> = z.support.iter().map(|i| nodes[*i]).collect();
        let again = extend_profile(&z, &dec, &radii).unwrap();
        for (u, e) in z.support_values.iter().zip(&again) {
            assert!((u - e).abs() < 1e-3, "{u} {e}");
        }
        let far = extend_profile(&z, &dec, &[10.0, 30.0, 100.0]).unwrap();
        for (r, u) in [10.0, 30.0, 100.0].iter().zip(&far) {
            assert!((u * r - 1.0).abs() < 0.05, "{r}: {}", u * r);
        }
    }
}
