//! Green function of `−Δ + W` as the alternating series `Σ (−1)^j G_j`.
//!
//! `G_0 = κ_n |x − y|^{2-n}` and `G_j(x, y) = ∫ G_0(x, z) W(z) G_{j-1}(z, y) dz`. Isotropic
//! `W` on a radial grid is handled channel by channel; tensor samples use a matrix-free
//! punctured-cell quadrature over the support of `W`.

mod channel;
mod tensor;

use alloc::vec;
use alloc::vec::Vec;

use crate::grid::{Grid, SampledFunction};
use crate::lorentz::{quasinorm, LorentzIndex};
use crate::special::{ball_volume, distance, dot, gegenbauer_index, gegenbauer_values, norm, powi, sphere_area};
use crate::{Error, Result};

pub(crate) use channel::RadialRoute;
pub use channel::{channel_factor, separated, ChannelSweep, PointKernel};
use tensor::TensorRoute;

/// Normalization of the free Green function in dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConstant {
    pub dim: usize,
    /// `κ_n = 1/((n-2) ω_{n-1})`, so that `−Δ(κ_n |x|^{2-n}) = δ`.
    pub kappa: f64,
    /// `n(n-2)|B(0,1)| = 1/κ_n`.
    pub reciprocal: f64,
}

impl KernelConstant {
    pub fn new(dim: usize) -> Self {
        let reciprocal = (dim * (dim - 2)) as f64 * ball_volume(dim);
        KernelConstant { dim, kappa: 1.0 / reciprocal, reciprocal }
    }
}

pub fn kappa(n: usize) -> f64 {
    1.0 / ((n - 2) as f64 * sphere_area(n))
}

/// `‖|x|^{2-n}‖_{n/(n-2),∞} = |B(0,1)|^{(n-2)/n}`.
pub fn kernel_weak_norm(n: usize) -> f64 {
    libm::pow(ball_volume(n), (n as f64 - 2.0) / n as f64)
}

/// `2^{n-1} κ_n ‖a‖_{n/(n-2),∞} ‖W‖_{n/2,1}`.
pub fn a_priori_contraction(n: usize, w_norm: f64) -> f64 {
    powi(2.0, n - 1) * kappa(n) * kernel_weak_norm(n) * w_norm
}

/// Free Green function `κ_n / |x − y|^{n-2}`.
pub fn g0(x: &[f64], y: &[f64], n: usize) -> Result<f64> {
    let d = distance(x, y);
    if d == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    Ok(kappa(n) / powi(d, n - 2))
}

/// Smallest `J` with `C^{J+1}/(1 − C) ≤ tol`.
pub fn series_order(c: f64, tol: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&c) {
        return Err(Error::ContractionViolated(c));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameter("series tolerance must lie in (0, 1)"));
    }
    if c == 0.0 {
        return Ok(0);
    }
    let j = libm::ceil(libm::log(tol * (1.0 - c)) / libm::log(c)) - 1.0;
    Ok(j.max(0.0) as usize)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreensOptions {
    pub series_tol: f64,
    pub max_channels: usize,
    pub probe_radii: usize,
    pub probe_angles: usize,
    /// Multiplier applied to the largest probed `G_1^{|W|}/G_0`.
    pub headroom: f64,
    /// Channels compared against a direct solve in [`GreensEvaluator::resolvent_check`].
    pub resolvent_channels: usize,
}

impl Default for GreensOptions {
    fn default() -> Self {
        GreensOptions { series_tol: 1e-6, max_channels: 256, probe_radii: 36, probe_angles: 15, headroom: 1.05, resolvent_channels: 12 }
    }
}

#[derive(Debug, Clone)]
enum Route {
    Free,
    Radial(RadialRoute),
    Tensor(TensorRoute),
}

impl Route {
    fn new(w: &SampledFunction, kappa: f64) -> Result<Self> {
        if w.is_zero() {
            return Ok(Route::Free);
        }
        match w.grid() {
            Grid::Radial(_) => Ok(Route::Radial(RadialRoute::new(w, kappa)?)),
            Grid::Tensor(_) => Ok(Route::Tensor(TensorRoute::new(w, kappa)?)),
        }
    }
}

/// `G(x, y)` with the truncation half-width `C^{J+1}/(1 − C)·G_0(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenValue {
    pub value: f64,
    pub half_width: f64,
}

/// Both sides of `G = G_0 − ∫ G_0 W G` at one pair, the right side built from direct
/// channel solves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventSample {
    pub series: f64,
    pub identity: f64,
    pub free: f64,
}

impl ResolventSample {
    pub fn relative_gap(&self) -> f64 {
        (self.series - self.identity).abs() / self.free
    }
}

struct Geometry {
    r: f64,
    s: f64,
    cos_gamma: f64,
    free: f64,
}

fn geometry(x: &[f64], y: &[f64], n: usize) -> Result<Geometry> {
    if x.len() != n || y.len() != n {
        return Err(Error::InvalidParameter("point dimension does not match W"));
    }
    let free = g0(x, y, n)?;
    let (r, s) = (norm(x), norm(y));
    let cos_gamma = if r > 0.0 && s > 0.0 { (dot(x, y) / (r * s)).clamp(-1.0, 1.0) } else { 1.0 };
    Ok(Geometry { r, s, cos_gamma, free })
}

const CHANNEL_FLOOR: f64 = 1e-14;

/// Truncated series evaluator with a measured contraction constant.
#[derive(Debug, Clone)]
pub struct GreensEvaluator {
    w: SampledFunction,
    route: Route,
    constant: KernelConstant,
    options: GreensOptions,
    c_measured: f64,
    order: usize,
}

impl GreensEvaluator {
    /// Probes `G_1^{|W|}/G_0` to measure the contraction constant and fixes `J`.
    pub fn new(w: &SampledFunction, options: GreensOptions) -> Result<Self> {
        let constant = KernelConstant::new(w.dim());
        let route = Route::new(w, constant.kappa)?;
        let mut ev = GreensEvaluator { w: w.clone(), route, constant, options, c_measured: 0.0, order: 0 };
        let (sup, step_ratio) = ev.probe()?;
        let c = sup * ev.options.headroom;
        if c >= 1.0 {
            return Err(Error::ContractionViolated(c));
        }
        if step_ratio > 1.0 {
            return Err(Error::ContractionViolated(step_ratio));
        }
        ev.c_measured = c;
        ev.order = series_order(c, ev.options.series_tol)?;
        Ok(ev)
    }

    /// Evaluator with a caller-supplied contraction constant (no probing).
    pub fn with_contraction(w: &SampledFunction, c: f64, options: GreensOptions) -> Result<Self> {
        let constant = KernelConstant::new(w.dim());
        let route = Route::new(w, constant.kappa)?;
        let order = series_order(c, options.series_tol)?;
        Ok(GreensEvaluator { w: w.clone(), route, constant, options, c_measured: c, order })
    }

    pub fn weight(&self) -> &SampledFunction {
        &self.w
    }

    pub fn dim(&self) -> usize {
        self.constant.dim
    }

    pub fn constant(&self) -> KernelConstant {
        self.constant
    }

    pub fn options(&self) -> &GreensOptions {
        &self.options
    }

    /// Truncation order `J`.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn c_measured(&self) -> f64 {
        self.c_measured
    }

    /// `C^{J+1}/(1 − C)`.
    pub fn tail_bound(&self) -> f64 {
        let c = self.c_measured;
        powi(c, self.order + 1) / (1.0 - c)
    }

    fn terms(&self, x: &[f64], y: &[f64], max_j: usize, absolute: bool) -> Result<Vec<f64>> {
        let n = self.dim();
        let geo = geometry(x, y, n)?;
        let mut out = vec![0.0; max_j + 1];
        out[0] = geo.free;
        if max_j == 0 {
            return Ok(out);
        }
        match &self.route {
            Route::Free => {}
            Route::Radial(route) => {
                let floor = CHANNEL_FLOOR * self.constant.kappa / powi(geo.r + geo.s, n - 2);
                let table = route.coefficients(geo.r, geo.s, max_j, self.options.max_channels, floor, absolute);
                out[1..].copy_from_slice(&route.resum(&table, geo.cos_gamma));
            }
            Route::Tensor(route) => {
                out = route.orders(x, y, max_j, absolute);
            }
        }
        Ok(out)
    }

    /// `G_0(x,y), …, G_max_j(x,y)`.
    pub fn order_terms(&self, x: &[f64], y: &[f64], max_j: usize) -> Result<Vec<f64>> {
        self.terms(x, y, max_j, false)
    }

    /// The same orders with `|W|` in place of `W`.
    pub fn majorant_terms(&self, x: &[f64], y: &[f64], max_j: usize) -> Result<Vec<f64>> {
        self.terms(x, y, max_j, true)
    }

    pub fn evaluate(&self, x: &[f64], y: &[f64]) -> Result<GreenValue> {
        let terms = self.order_terms(x, y, self.order)?;
        let value = terms.iter().enumerate().map(|(j, g)| if j % 2 == 0 { *g } else { -*g }).sum();
        Ok(GreenValue { value, half_width: self.tail_bound() * terms[0] })
    }

    /// `g_l(t_i, t_c)` on every node for each requested support column `c`, where
    /// `G(x, y) = Σ_l C_l^ν(cos γ) g_l(|x|, |y|)`.
    pub fn channel_columns(&self, degree: usize, columns: &[usize]) -> Result<Vec<Vec<f64>>> {
        let route = match &self.route {
            Route::Radial(route) => route,
            Route::Tensor(_) => return Err(Error::RequiresRadial),
            Route::Free => {
                let g = self.w.radial_grid().ok_or(Error::RequiresRadial)?;
                let n = g.dim();
                let k = self.constant.kappa;
                return Ok(columns
                    .iter()
                    .map(|c| {
                        let tc = g.nodes()[*c];
                        g.nodes().iter().map(|t| k * separated(degree, n, *t, tc)).collect()
                    })
                    .collect());
            }
        };
        let sweep = ChannelSweep::new(route.grid(), degree);
        Ok(columns.iter().map(|c| route.column(degree, &sweep, *c, self.order)).collect())
    }

    /// Compares the truncated series with `G_0 − ∫ G_0 W G`, where `G` in the low channels
    /// comes from dense solves of `(I + T_l W) g = G_0`.
    pub fn resolvent_check(&self, pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<Vec<ResolventSample>> {
        let n = self.dim();
        let mut samples = Vec::with_capacity(pairs.len());
        let mut geos = Vec::with_capacity(pairs.len());
        for (x, y) in pairs {
            let geo = geometry(x, y, n)?;
            samples.push(ResolventSample { series: self.evaluate(x, y)?.value, identity: 0.0, free: geo.free });
            geos.push(geo);
        }
        let route = match &self.route {
            Route::Radial(route) => route,
            Route::Free => {
                for s in samples.iter_mut() {
                    s.identity = s.free;
                }
                return Ok(samples);
            }
            Route::Tensor(_) => return Err(Error::RequiresRadial),
        };
        let channels = self.options.resolvent_channels;
        let nu = gegenbauer_index(n);
        let nodes = route.grid().nodes();
        let kappa = self.constant.kappa;
        let tables: Vec<_> = geos.iter().map(|g| route.coefficients(g.r, g.s, self.order.max(1), channels, 0.0, false)).collect();
        let mut gaps = vec![0.0; pairs.len()];
        for l in 0..channels {
            let lu = route.resolvent_matrix(l).lu();
            let factor = channel_factor(l, n);
            for (p, geo) in geos.iter().enumerate() {
                let seed = nalgebra::DVector::from_iterator(nodes.len(), nodes.iter().map(|t| kappa * separated(l, n, *t, geo.s)));
                let direct = lu.solve(&seed).ok_or(Error::LinearAlgebra("singular channel resolvent"))?;
                let correction: f64 =
                    nodes.iter().zip(route.weighted(false)).zip(direct.iter()).map(|((t, w), g)| separated(l, n, geo.r, *t) * w * g).sum();
                let series: f64 = tables[p]
                    .get(l)
                    .map_or(0.0, |row| row.iter().take(self.order).enumerate().map(|(j, h)| if j % 2 == 0 { -h } else { *h }).sum());
                let mut c = vec![0.0; l + 1];
                gegenbauer_values(nu, geo.cos_gamma, &mut c);
                gaps[p] += c[l] * (series + factor * correction);
            }
        }
        for (s, gap) in samples.iter_mut().zip(gaps) {
            s.identity = s.series - gap;
        }
        Ok(samples)
    }

    /// Largest probed `G_1^{|W|}/G_0` and largest `G_2^{|W|}/G_1^{|W|}`.
    fn probe(&self) -> Result<(f64, f64)> {
        match &self.route {
            Route::Free => Ok((0.0, 0.0)),
            Route::Radial(route) => Ok(self.probe_radial(route)),
            Route::Tensor(route) => Ok(self.probe_tensor(route)),
        }
    }

    fn probe_radial(&self, route: &RadialRoute) -> (f64, f64) {
        let n = self.dim();
        let grid = route.grid();
        let extent = grid.nodes().iter().zip(route.weighted(true)).filter(|(_, w)| **w != 0.0).fold(0.0f64, |acc, (r, _)| acc.max(*r));
        let lo = libm::log(grid.r_min());
        let hi = libm::log(grid.r_max().min(4.0 * extent)).max(lo + 1.0);
        let count = self.options.probe_radii.max(2);
        let radii: Vec<f64> = (0..count).map(|i| libm::exp(lo + (hi - lo) * i as f64 / (count - 1) as f64)).collect();
        let angles = self.options.probe_angles.max(2);
        let gammas: Vec<f64> = (0..angles).map(|k| core::f64::consts::PI * k as f64 / (angles - 1) as f64).collect();
        let ratio_at = |r: f64, s: f64, gamma: f64, max_j: usize| -> (f64, f64) {
            let c = libm::cos(gamma);
            let d2 = r * r + s * s - 2.0 * r * s * c;
            if d2 <= 0.0 {
                return (0.0, 0.0);
            }
            let free = self.constant.kappa / libm::pow(d2, (n as f64 - 2.0) / 2.0);
            let floor = CHANNEL_FLOOR * self.constant.kappa / powi(r + s, n - 2);
            let table = route.coefficients(r, s, max_j, self.options.max_channels, floor, true);
            let g = route.resum(&table, c);
            let first = g[0] / free;
            let second = if max_j > 1 && g[0] > 1e-300 { g[1] / g[0] } else { 0.0 };
            (first, second)
        };
        let mut best = (0.0, radii[0], radii[0], 0.0);
        let mut step_ratio = 0.0f64;
        for (i, r) in radii.iter().enumerate() {
            for s in &radii[i..] {
                let c_values: Vec<f64> = gammas.iter().map(|g| libm::cos(*g)).collect();
                let floor = CHANNEL_FLOOR * self.constant.kappa / powi(r + s, n - 2);
                let table = route.coefficients(*r, *s, 2, self.options.max_channels, floor, true);
                for (gamma, c) in gammas.iter().zip(&c_values) {
                    let d2 = r * r + s * s - 2.0 * r * s * c;
                    if d2 <= 1e-24 * r * s {
                        continue;
                    }
                    let free = self.constant.kappa / libm::pow(d2, (n as f64 - 2.0) / 2.0);
                    let g = route.resum(&table, *c);
                    let ratio = g[0] / free;
                    if ratio > best.0 {
                        best = (ratio, *r, *s, *gamma);
                    }
                    if g[0] > 1e-300 {
                        step_ratio = step_ratio.max(g[1] / g[0]);
                    }
                }
            }
        }
        // Pattern search in (ln r, ln s, γ) around the best probe.
        let (mut value, mut lr, mut ls, mut gamma) = (best.0, libm::log(best.1), libm::log(best.2), best.3);
        let mut steps = [(hi - lo) / (count - 1) as f64, (hi - lo) / (count - 1) as f64, gammas[1]];
        for _ in 0..8 {
            let mut improved = true;
            while improved {
                improved = false;
                for axis in 0..3 {
                    for sign in [-1.0, 1.0] {
                        let mut cand = [lr, ls, gamma];
                        cand[axis] += sign * steps[axis];
                        cand[0] = cand[0].clamp(lo, hi);
                        cand[1] = cand[1].clamp(lo, hi);
                        cand[2] = cand[2].clamp(0.0, core::f64::consts::PI);
                        let (v, _) = ratio_at(libm::exp(cand[0]), libm::exp(cand[1]), cand[2], 1);
                        if v > value {
                            value = v;
                            [lr, ls, gamma] = cand;
                            improved = true;
                        }
                    }
                }
            }
            for s in steps.iter_mut() {
                *s *= 0.5;
            }
        }
        let (_, second) = ratio_at(libm::exp(lr), libm::exp(ls), gamma, 2);
        (value, step_ratio.max(second))
    }

    fn probe_tensor(&self, route: &TensorRoute) -> (f64, f64) {
        let n = self.dim();
        let extent = route.max_radius().max(route.spacing());
        let count = self.options.probe_radii.clamp(2, 12);
        let lo = libm::log(route.spacing());
        let hi = libm::log(1.5 * extent).max(lo + 0.5);
        let mut directions: Vec<Vec<f64>> = Vec::new();
        for axis in 0..2 {
            for sign in [1.0, -1.0] {
                let mut e = vec![0.0; n];
                e[axis] = sign;
                directions.push(e);
            }
        }
        directions.push(vec![1.0 / libm::sqrt(n as f64); n]);
        let mut skew = vec![0.0; n];
        skew[0] = core::f64::consts::FRAC_1_SQRT_2;
        skew[1] = -core::f64::consts::FRAC_1_SQRT_2;
        directions.push(skew);
        let mut points = Vec::new();
        for i in 0..count {
            let r = libm::exp(lo + (hi - lo) * i as f64 / (count - 1) as f64);
            for d in &directions {
                points.push(d.iter().map(|c| c * r).collect::<Vec<f64>>());
            }
        }
        let mut best = (0.0, 0, 0);
        for (b, y) in points.iter().enumerate() {
            let path = route.trajectory(y, 0, true);
            for (a, x) in points.iter().enumerate().take(b) {
                let free = self.constant.kappa / powi(distance(x, y), n - 2);
                let ratio = route.close(x, &path[0], true) / free;
                if ratio > best.0 {
                    best = (ratio, a, b);
                }
            }
        }
        let terms = route.orders(&points[best.1], &points[best.2], 2, true);
        let step = if terms[1] > 1e-300 { terms[2] / terms[1] } else { 0.0 };
        (best.0, step)
    }
}

/// `(Σ_{j≤J} (−1)^j G_j(x, y), half_width)`, asserting `|G| ≤ G_0/(1 − C)`.
pub fn greens(ev: &GreensEvaluator, x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let v = ev.evaluate(x, y)?;
    let free = g0(x, y, ev.dim())?;
    let bound = free / (1.0 - ev.c_measured());
    if v.value.abs() > bound * (1.0 + 1e-9) {
        return Err(Error::ContractionViolated(v.value.abs() / free));
    }
    Ok((v.value, v.half_width))
}

/// `G_j(x, y)` for weight `W`.
pub fn kernel_order(w: &SampledFunction, j: usize, x: &[f64], y: &[f64]) -> Result<f64> {
    let ev = GreensEvaluator::with_contraction(w, 0.0, GreensOptions::default())?;
    Ok(ev.order_terms(x, y, j)?[j])
}

/// `(∫ |x−z|^{2-n} |W(z)| |z−y|^{2-n} dz, ‖a‖_{n/(n-2),∞} ‖W‖_{n/2,1} 2^{n-1}/|x−y|^{n-2})`.
pub fn gwg_bound(w: &SampledFunction, x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let n = w.dim();
    let free = g0(x, y, n)?;
    let w_abs = w.abs()?;
    let w_norm = quasinorm(&w_abs, LorentzIndex::new(n as f64 / 2.0, 1.0)?)?;
    let k = kappa(n);
    let rhs = kernel_weak_norm(n) * w_norm * powi(2.0, n - 1) * free / k;
    let ev = GreensEvaluator::with_contraction(&w_abs, 0.0, GreensOptions::default())?;
    let lhs = ev.order_terms(x, y, 1)?[1] / (k * k);
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{RadialGrid, TensorGrid};
    use alloc::sync::Arc;
    use core::f64::consts::PI;

    fn indicator_grid(count: usize, n: usize) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::log(1e-3, 1e3, count, n).unwrap())
    }

    fn ball(grid: &Arc<RadialGrid>, value: f64) -> SampledFunction {
        SampledFunction::from_profile(grid, |r| {
            if (r - 1.0).abs() < 1e-12 {
                0.5 * value
            } else if r < 1.0 {
                value
            } else {
                0.0
            }
        })
    }

    #[test]
    fn free_green_function_values() {
        assert!((g0(&[1.0, 0.0, 0.0], &[0.0; 3], 3).unwrap() - 0.079_577_471_545_947_67).abs() < 1e-15);
        let x = [1.0, 0.0, 0.0, 0.0, 0.0];
        assert!((g0(&x, &[0.0; 5], 5).unwrap() - 1.0 / (8.0 * PI * PI)).abs() < 1e-15);
        assert_eq!(g0(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], 3), Err(Error::CoincidentPoints));
        let k = KernelConstant::new(4);
        assert!((k.kappa * k.reciprocal - 1.0).abs() < 1e-14);
        assert!((k.kappa - kappa(4)).abs() < 1e-16);
    }

    #[test]
    fn series_order_from_geometric_tail() {
        assert_eq!(series_order(0.4, 1e-6).unwrap(), 15);
        assert_eq!(series_order(0.0, 1e-6).unwrap(), 0);
        assert!(series_order(1.0, 1e-6).is_err());
    }

    #[test]
    fn zero_weight_gives_free_green_function() {
        let g = indicator_grid(101, 3);
        let w = SampledFunction::from_profile(&g, |_| 0.0);
        let ev = GreensEvaluator::new(&w, GreensOptions::default()).unwrap();
        assert_eq!(ev.order(), 0);
        let x = [0.3, 0.1, 0.0];
        let y = [-1.0, 0.5, 0.2];
        let (v, hw) = greens(&ev, &x, &y).unwrap();
        assert_eq!(v, g0(&x, &y, 3).unwrap());
        assert_eq!(hw, 0.0);
        assert_eq!(kernel_order(&w, 2, &x, &y).unwrap(), 0.0);
        assert_eq!(gwg_bound(&w, &x, &y).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn channel_first_order_matches_closed_form_for_a_separated_pair() {
        // For |x|, |y| > 1 and W = 1_{B(0,1)}, the l = 0 channel alone is the monopole.
        // Check against direct angular integration of G_1 at y = 0.
        let g = indicator_grid(1201, 3);
        let w = ball(&g, 1.0);
        let x = [3.0, 0.0, 0.0];
        let y = [0.0, 0.0, 0.0];
        // G_1(x, 0) = κ² ∫_{B1} |x-z|^{-1} |z|^{-1} dz = κ² 4π ∫_0^1 (1/3) t dt = κ² 2π/3.
        let k = kappa(3);
        let expected = k * k * 2.0 * PI / 3.0;
        let got = kernel_order(&w, 1, &x, &y).unwrap();
        assert!((got - expected).abs() < 1e-4 * expected, "{got} {expected}");
    }

    #[test]
    fn measured_contraction_below_a_priori_bound() {
        let g = indicator_grid(601, 3);
        let w = ball(&g, 0.2);
        let ev = GreensEvaluator::new(&w, GreensOptions::default()).unwrap();
        let w_norm = quasinorm(&w, LorentzIndex::new(1.5, 1.0).unwrap()).unwrap();
        let prior = a_priori_contraction(3, w_norm);
        assert!(ev.c_measured() > 0.0);
        assert!(ev.c_measured() <= prior * 1.05, "{} vs {}", ev.c_measured(), prior);
        assert!(ev.order() > 0);
    }

    #[test]
    fn large_weight_violates_contraction() {
        let g = indicator_grid(201, 3);
        let w = ball(&g, 40.0);
        assert!(matches!(GreensEvaluator::new(&w, GreensOptions::default()), Err(Error::ContractionViolated(_))));
    }

    #[test]
    fn tensor_route_agrees_with_channel_route() {
        let tg = Arc::new(TensorGrid::new(3, 0.1, 1.2).unwrap());
        let wt = SampledFunction::from_points(&tg, |x| if norm(x) <= 1.0 { -1.0 } else { 0.0 });
        let rg = indicator_grid(1201, 3);
        let wr = ball(&rg, -1.0);
        let x = [2.0, 0.5, 0.0];
        let y = [-1.5, 0.0, 1.0];
        let a = kernel_order(&wt, 1, &x, &y).unwrap();
        let b = kernel_order(&wr, 1, &x, &y).unwrap();
        assert!((a - b).abs() < 0.02 * b.abs(), "{a} {b}");
    }

    #[test]
    fn evaluator_is_symmetric() {
        let g = indicator_grid(401, 3);
        let w = ball(&g, -0.3);
        let ev = GreensEvaluator::new(&w, GreensOptions::default()).unwrap();
        let x = [0.4, 0.2, -0.1];
        let y = [0.9, -0.3, 0.5];
        let a = ev.evaluate(&x, &y).unwrap().value;
        let b = ev.evaluate(&y, &x).unwrap().value;
        assert!((a - b).abs() < 1e-10 * a.abs());
    }

    #[test]
    fn resolvent_identity_with_direct_solves() {
        let g = indicator_grid(301, 3);
        let w = ball(&g, -0.3);
        let ev = GreensEvaluator::new(&w, GreensOptions::default()).unwrap();
        let pairs = vec![(vec![0.4, 0.2, -0.1], vec![0.9, -0.3, 0.5]), (vec![2.0, 0.0, 0.0], vec![0.0, 0.3, 0.0])];
        for s in ev.resolvent_check(&pairs).unwrap() {
            assert!(s.relative_gap() < 1e-3, "{s:?}");
        }
    }
}
