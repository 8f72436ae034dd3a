//! Behaviour of zero states at infinity: the `|x|^{n-2}ψ` limit, decay exponents, the
//! moment classification, the truncated multipole expansion of `|x − y|^{2-n}`, and the
//! tail contraction operator.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::greens::{channel_factor, separated};
use crate::grid::{Grid, SampledFunction};
use crate::potential::{moments, Decomposition, MultiIndex};
use crate::special::{binomial, distance, dot, norm, powi, AxialPolynomial};
use crate::{Error, Result};

/// Samples of `ψ` on spheres `|x| = r` along the `3^n − 1` stencil directions
/// (axes, face and body diagonals).
#[derive(Debug, Clone, PartialEq)]
pub struct TailSamples {
    dim: usize,
    radii: Vec<f64>,
    values: Vec<Vec<f64>>,
}

/// Unit vectors of the `{-1, 0, 1}^n \ {0}` stencil.
pub fn stencil_directions(n: usize) -> Vec<Vec<f64>> {
    let total = powi(3.0, n) as usize;
    let mut out = Vec::with_capacity(total - 1);
    for code in 0..total {
        let mut c = code;
        let v: Vec<f64> = (0..n)
            .map(|_| {
                let digit = c % 3;
                c /= 3;
                digit as f64 - 1.0
            })
            .collect();
        let len = norm(&v);
        if len > 0.0 {
            out.push(v.iter().map(|x| x / len).collect());
        }
    }
    out
}

/// `count` logarithmically spaced radii in `[lo, hi]`.
pub fn log_radii(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (libm::log(lo), libm::log(hi));
    (0..count).map(|i| libm::exp(a + (b - a) * i as f64 / (count.max(2) - 1) as f64)).collect()
}

impl TailSamples {
    pub fn from_fn(n: usize, radii: &[f64], f: impl Fn(&[f64]) -> f64) -> Self {
        let dirs = stencil_directions(n);
        let values = radii
            .iter()
            .map(|r| {
                dirs.iter()
                    .map(|d| {
                        let x: Vec<f64> = d.iter().map(|c| c * r).collect();
                        f(&x)
                    })
                    .collect()
            })
            .collect();
        TailSamples { dim: n, radii: radii.to_vec(), values }
    }

    /// Stencil samples of a sampled function; radial grids use their own nodes in `[lo, hi]`.
    pub fn from_sampled(psi: &SampledFunction, lo: f64, hi: f64, count: usize) -> Self {
        let radii = match psi.grid() {
            Grid::Radial(g) => g.nodes().iter().copied().filter(|r| *r >= lo && *r <= hi).collect(),
            Grid::Tensor(_) => log_radii(lo, hi, count),
        };
        TailSamples::from_fn(psi.dim(), &radii, |x| psi.value_at(x))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn psi_max(&self) -> Vec<f64> {
        self.values.iter().map(|row| row.iter().fold(0.0f64, |m, v| m.max(v.abs()))).collect()
    }

    pub fn psi_avg(&self) -> Vec<f64> {
        self.values.iter().map(|row| row.iter().sum::<f64>() / row.len() as f64).collect()
    }

    /// `r^{n-2}⟨ψ⟩_{|x|=r}`.
    pub fn scaled_avg(&self) -> Vec<f64> {
        self.radii.iter().zip(self.psi_avg()).map(|(r, a)| powi(*r, self.dim - 2) * a).collect()
    }
}

/// Least-squares fit `A(r) ≈ a + b/r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitFit {
    pub a: f64,
    pub b: f64,
    pub rms_residual: f64,
    pub points: usize,
}

/// Straight line `y = intercept + slope·x` by least squares.
fn line_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateFit);
    }
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok((my - slope * mx, slope, r_squared))
}

/// `A = lim r^{n-2}⟨ψ⟩` from the model `A + b/r` over the outer half-decade.
pub fn limit_extract(tail: &TailSamples) -> Result<LimitFit> {
    let radii = tail.radii();
    if radii.len() < 8 {
        return Err(Error::InsufficientTail(radii.len()));
    }
    let r_max = radii.iter().fold(0.0f64, |m, r| m.max(*r));
    let r_min = radii.iter().fold(f64::INFINITY, |m, r| m.min(*r));
    if r_max < 10.0 * r_min * (1.0 - 1e-12) {
        return Err(Error::InsufficientTail(radii.len()));
    }
    let start = r_max / libm::sqrt(10.0);
    let scaled = tail.scaled_avg();
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        radii.iter().zip(&scaled).filter(|(r, _)| **r >= start * (1.0 - 1e-12)).map(|(r, a)| (1.0 / r, *a)).unzip();
    if xs.len() < 3 {
        return Err(Error::InsufficientTail(xs.len()));
    }
    let (a, b, _) = line_fit(&xs, &ys)?;
    let rms = libm::sqrt(xs.iter().zip(&ys).map(|(x, y)| (a + b * x - y) * (a + b * x - y)).sum::<f64>() / xs.len() as f64);
    Ok(LimitFit { a, b, rms_residual: rms, points: xs.len() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub alpha: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// `−d log max_{|x|=r}|ψ| / d log r` over `[r_max/4, 0.9 r_max]`.
pub fn decay_exponent(tail: &TailSamples) -> Result<DecayFit> {
    let radii = tail.radii();
    let r_max = radii.iter().fold(0.0f64, |m, r| m.max(*r));
    let peaks = tail.psi_max();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (r, p) in radii.iter().zip(&peaks) {
        if *r >= 0.25 * r_max && *r <= 0.9 * r_max * (1.0 + 1e-12) {
            if !(*p > 1e-300) || !p.is_finite() {
                return Err(Error::DegenerateFit);
            }
            xs.push(libm::log(*r));
            ys.push(libm::log(*p));
        }
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientTail(xs.len()));
    }
    let (_, slope, r_squared) = line_fit(&xs, &ys)?;
    Ok(DecayFit { alpha: -slope, r_squared, points: xs.len() })
}

/// `∫ |f|^p` over a radial grid with the ratio of the outermost decade's contribution to
/// the previous decade's.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailIntegral {
    pub value: f64,
    pub last_decade_ratio: f64,
}

impl TailIntegral {
    /// The last decade contributes at most half of the one before.
    pub fn converged(&self) -> bool {
        self.last_decade_ratio <= 0.5
    }
}

pub fn tail_integral(f: &SampledFunction, p: f64) -> Result<TailIntegral> {
    let g = f.radial_grid().ok_or(Error::RequiresRadial)?;
    let n = g.dim();
    let angular = AxialPolynomial::constant(1.0);
    let ang = f.angular().unwrap_or(&angular);
    // ∫_{S^{n-1}} |P|^p by the angular midpoint rule.
    let sphere = if ang.is_one() {
        crate::special::sphere_area(n)
    } else {
        const CELLS: usize = 4096;
        let dphi = core::f64::consts::PI / CELLS as f64;
        (0..CELLS)
            .map(|j| {
                let phi = (j as f64 + 0.5) * dphi;
                libm::pow(ang.eval(libm::cos(phi)).abs(), p) * libm::pow(libm::sin(phi), n as f64 - 2.0)
            })
            .sum::<f64>()
            * dphi
            * crate::special::sphere_area(n - 1)
    };
    let r_max = g.r_max();
    let mut total = 0.0;
    let mut last = 0.0;
    let mut previous = 0.0;
    for ((r, w), v) in g.nodes().iter().zip(g.weights()).zip(f.values()) {
        let term = w * libm::pow(v.abs(), p);
        if term.is_nan() {
            return Err(Error::NanInput);
        }
        total += term;
        if *r > r_max / 10.0 {
            last += term;
        } else if *r > r_max / 100.0 {
            previous += term;
        }
    }
    let ratio = if previous > 0.0 {
        last / previous
    } else if last > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    Ok(TailIntegral { value: sphere * total, last_decade_ratio: ratio })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    Resonance,
    Eigenfunction,
}

impl StateKind {
    pub fn name(&self) -> &'static str {
        match self {
            StateKind::Resonance => "resonance",
            StateKind::Eigenfunction => "eigenfunction",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub kind: StateKind,
    /// `α` with `ψ ∈ B_α`, one of `n−2, n−1, n, n+1`.
    pub decay_class: usize,
    pub a_limit: f64,
    pub limit_fit: LimitFit,
    pub decay: DecayFit,
    pub moments: BTreeMap<MultiIndex, f64>,
    pub moment_tol: f64,
    pub l2: TailIntegral,
}

/// `10 h² ∫|Vψ|`, with `h` the radial log step or the tensor spacing.
pub fn default_moment_tol(v: &SampledFunction, psi: &SampledFunction) -> Result<f64> {
    let product = v.product(psi)?;
    let (h, mass) = match product.grid() {
        Grid::Radial(g) => {
            let n = g.dim();
            let one = AxialPolynomial::constant(1.0);
            let ang = product.angular().unwrap_or(&one).sphere_abs_integral(n);
            let radial: f64 = g.weights().iter().zip(product.values()).map(|(w, f)| w * f.abs()).sum();
            (g.log_step(), ang * radial)
        }
        Grid::Tensor(g) => (g.spacing(), g.cell_volume() * product.values().iter().map(|f| f.abs()).sum::<f64>()),
    };
    Ok(10.0 * h * h * mass)
}

/// Moment class: `n−2` if `M_0 ≠ 0`, else `n−1` if a first moment is nonzero, else `n` if
/// a second moment is nonzero, else `n+1`.
pub fn moment_class(n: usize, moments: &BTreeMap<MultiIndex, f64>, tol: f64) -> usize {
    let order_nonzero = |order: usize| moments.iter().any(|(a, m)| a.iter().sum::<usize>() == order && m.abs() > tol);
    (0..=2).find(|o| order_nonzero(*o)).map_or(n + 1, |o| n - 2 + o)
}

/// Resonance/eigenfunction tag, decay class and tail diagnostics of `ψ`.
pub fn classify(psi: &SampledFunction, v: &SampledFunction, moment_tol: f64, tail: &TailSamples) -> Result<Classification> {
    let n = psi.dim();
    let moments = moments(v, psi, 2)?;
    let m0 = moments.get(&vec![0; n]).copied().unwrap_or(0.0);
    let kind = if n <= 4 && m0.abs() > moment_tol { StateKind::Resonance } else { StateKind::Eigenfunction };
    let decay_class = moment_class(n, &moments, moment_tol);
    let limit_fit = limit_extract(tail)?;
    let decay = decay_exponent(tail)?;
    let gap = decay.alpha - decay_class as f64;
    let inconsistent = if decay_class <= n { gap.abs() > 0.3 } else { gap < -0.3 };
    if inconsistent {
        return Err(Error::InconsistentClassification { moment_class: decay_class as f64, fitted: decay.alpha });
    }
    let l2 = match psi.grid() {
        Grid::Radial(_) => tail_integral(psi, 2.0)?,
        Grid::Tensor(g) => {
            let value = g.cell_volume() * psi.values().iter().map(|x| x * x).sum::<f64>();
            TailIntegral { value, last_decade_ratio: f64::NAN }
        }
    };
    Ok(Classification { kind, decay_class, a_limit: limit_fit.a, limit_fit, decay, moments, moment_tol, l2 })
}

/// Truncated expansion `|x − y|^{2-n} ≈ |x|^{2-n} Σ_{k+l≤N} c_{kl} u^{k+l} t^{k-l}` with
/// `u = |y|/|x|` and `t` the cosine of the angle between `x` and `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultipoleExpansion {
    pub order: usize,
    pub dim: usize,
    /// Taylor coefficients of `(1 + s)^{-(n-2)/2}`.
    pub d: Vec<f64>,
    /// `c[k][l] = d_k binom(k, l) (−2)^{k−l}` for `l ≤ k ≤ N`.
    pub c: Vec<Vec<f64>>,
}

pub fn multipole_coeffs(order: usize, n: usize) -> Result<MultipoleExpansion> {
    if order > 2 {
        return Err(Error::InvalidParameter("expansion order must be 0, 1 or 2"));
    }
    if n < 3 {
        return Err(Error::InvalidRange("dimension must be at least 3"));
    }
    let m = (n as f64 - 2.0) / 2.0;
    let d: Vec<f64> = (0..=order).map(|k| powi(-1.0, k) * binomial(m + k as f64 - 1.0, k)).collect();
    let c = (0..=order).map(|k| (0..=k).map(|l| d[k] * binomial(k as f64, l) * powi(-2.0, k - l)).collect()).collect();
    Ok(MultipoleExpansion { order, dim: n, d, c })
}

impl MultipoleExpansion {
    /// `Σ_{k+l≤N} c_{kl} u^{k+l} t^{k-l}`.
    pub fn series(&self, u: f64, t: f64) -> f64 {
        let mut acc = 0.0;
        for (k, row) in self.c.iter().enumerate() {
            for (l, c) in row.iter().enumerate() {
                if k + l <= self.order {
                    acc += c * powi(u, k + l) * powi(t, k - l);
                }
            }
        }
        acc
    }

    /// Truncated approximation of `|x − y|^{2-n}`.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        let rx = norm(x);
        let ry = norm(y);
        let t = if ry > 0.0 { dot(x, y) / (rx * ry) } else { 0.0 };
        self.series(ry / rx, t) / powi(rx, self.dim - 2)
    }

    /// `∫ (truncated kernel)(x, y) V(y)ψ(y) dy` expressed through the moments `M_α`.
    pub fn far_field(&self, x: &[f64], moments: &BTreeMap<MultiIndex, f64>) -> f64 {
        let n = self.dim;
        let rx = norm(x);
        let get = |alpha: &[usize]| moments.get(alpha).copied().unwrap_or(0.0);
        let unit = |i: usize, j: Option<usize>| {
            let mut a = vec![0usize; n];
            a[i] += 1;
            if let Some(j) = j {
                a[j] += 1;
            }
            a
        };
        let mut acc = get(&vec![0; n]);
        if self.order >= 1 {
            let first: f64 = (0..n).map(|i| x[i] * get(&unit(i, None))).sum();
            acc += self.c[1][0] * first / (rx * rx);
        }
        if self.order >= 2 {
            let trace: f64 = (0..n).map(|i| get(&unit(i, Some(i)))).sum();
            let mut quad = 0.0;
            for i in 0..n {
                for j in 0..n {
                    quad += x[i] * x[j] * get(&unit(i, Some(j)));
                }
            }
            acc += self.c[1][1] * trace / (rx * rx) + self.c[2][0] * quad / powi(rx, 4);
        }
        acc / powi(rx, n - 2)
    }
}

/// Frozen `κ_B(n, N)` for `n = 3..=8`, `N = 0..=2`: twice the sup found by
/// [`calibrate_kappa_b`] on the default sweep.
pub const KAPPA_B: [[f64; 3]; 6] =
    [[1.01, 1.01, 1.01], [4.0, 6.0, 8.0], [7.61, 17.6, 31.6], [15.8, 50.0, 113.0], [32.0, 131.0, 354.0], [64.4, 325.0, 1030.0]];

pub fn kappa_b(n: usize, order: usize) -> Result<f64> {
    if !(3..=8).contains(&n) || order > 2 {
        return Err(Error::InvalidParameter("κ_B is tabulated for n = 3..8 and N = 0..2"));
    }
    Ok(KAPPA_B[n - 3][order])
}

/// Normalized truncation error `|1 − |x−y|^{n-2}·approx| / (u^{N+1} + u^{N+n-2})` at `|x| = 1`.
fn normalized_error(e: &MultipoleExpansion, u: f64, t: f64) -> f64 {
    let n = e.dim;
    let base = 1.0 + u * u - 2.0 * u * t;
    if base <= 0.0 {
        return 0.0;
    }
    let scale = libm::pow(base, (n as f64 - 2.0) / 2.0);
    (1.0 - scale * e.series(u, t)).abs() / (powi(u, e.order + 1) + powi(u, e.order + n - 2))
}

/// Sup of the normalized truncation error over `u = |y|/|x| ∈ [1e-3, 1e3]` (log-spaced)
/// and cosines in `[−1, 1]`.
pub fn calibrate_kappa_b(n: usize, order: usize, u_count: usize, t_count: usize) -> Result<f64> {
    let e = multipole_coeffs(order, n)?;
    let mut sup = 0.0f64;
    for u in log_radii(1e-3, 1e3, u_count) {
        for j in 0..t_count {
            let t = -1.0 + 2.0 * j as f64 / (t_count - 1) as f64;
            sup = sup.max(normalized_error(&e, u, t));
        }
    }
    Ok(sup)
}

/// `(|truncation error|, κ_B |x−y|^{2-n} (u^{N+1} + u^{N+n-2}))`.
pub fn expansion_error(x: &[f64], y: &[f64], order: usize, n: usize) -> Result<(f64, f64)> {
    if x.len() != n || y.len() != n {
        return Err(Error::InvalidParameter("point dimension does not match n"));
    }
    let d = distance(x, y);
    let rx = norm(x);
    if rx == 0.0 || d == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    let e = multipole_coeffs(order, n)?;
    let exact = 1.0 / powi(d, n - 2);
    let lhs = (exact - e.eval(x, y)).abs();
    let u = norm(y) / rx;
    let rhs = kappa_b(n, order)? * exact * (powi(u, order + 1) + powi(u, order + n - 2));
    Ok((lhs, rhs))
}

/// Largest `‖Sφ‖_{B_α}/‖φ‖_{B_α}` over random probes `φ = |x|^{-α} Σ_m β_m P_m(x₁/|x|)`,
/// where `S` is the tail operator with `W` restricted to `|y| ≥ R` and the degree-`≤ N`
/// multipole part of the kernel subtracted on `|y| > |x|`.
pub fn contraction_estimate(dec: &Decomposition, alpha: f64, order: usize, cutoff: f64, probe_count: usize, seed: u64) -> Result<f64> {
    let (grid, w) = dec.w.radial_profile()?;
    let n = grid.dim();
    if dec.w.is_zero() {
        return Ok(0.0);
    }
    const SCAN: usize = 257;
    let cosines: Vec<f64> = (0..SCAN).map(|i| -1.0 + 2.0 * i as f64 / (SCAN - 1) as f64).collect();
    let max_degree = order + 2;
    let zonal: Vec<AxialPolynomial> = (0..=max_degree).map(|m| AxialPolynomial::zonal(m, n)).collect();
    let tail: Vec<usize> = (0..grid.len()).filter(|i| grid.nodes()[*i] >= cutoff).collect();
    if tail.is_empty() {
        return Ok(0.0);
    }
    let nodes = grid.nodes();
    // S applied to t^{-α} in each channel, on tail nodes.
    let responses: Vec<Vec<f64>> = (0..=max_degree)
        .map(|m| {
            let factor = channel_factor(m, n);
            tail.iter()
                .map(|&i| {
                    let r = nodes[i];
                    tail.iter()
                        .map(|&k| {
                            let t = nodes[k];
                            let kernel = if m <= order {
                                if t > r {
                                    powi(t, m) / powi(r, m + n - 2) - powi(r, m) / powi(t, m + n - 2)
                                } else {
                                    0.0
                                }
                            } else {
                                -separated(m, n, r, t)
                            };
                            factor * kernel * w[k] * grid.weights()[k] * libm::pow(t, -alpha)
                        })
                        .sum()
                })
                .collect()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..probe_count {
        let beta: Vec<f64> = (0..=max_degree).map(|_| rng.random_range(-1.0..1.0)).collect();
        let angular: Vec<Vec<f64>> = cosines.iter().map(|c| zonal.iter().map(|p| p.eval(*c)).collect()).collect();
        let input = angular.iter().map(|pm| pm.iter().zip(&beta).map(|(p, b)| p * b).sum::<f64>().abs()).fold(0.0f64, f64::max);
        if input == 0.0 {
            continue;
        }
        let mut output = 0.0f64;
        for (slot, &i) in tail.iter().enumerate() {
            let weight = libm::pow(nodes[i], alpha);
            for pm in &angular {
                let value: f64 = (0..=max_degree).map(|m| beta[m] * pm[m] * responses[m][slot]).sum();
                output = output.max(weight * value.abs());
            }
        }
        worst = worst.max(output / input);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencil_has_all_neighbours() {
        assert_eq!(stencil_directions(3).len(), 26);
        assert_eq!(stencil_directions(4).len(), 80);
        for d in stencil_directions(3) {
            assert!((norm(&d) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn exact_power_law_gives_unit_limit() {
        let radii = log_radii(10.0, 1000.0, 40);
        let tail = TailSamples::from_fn(3, &radii, |x| 1.0 / norm(x));
        let fit = limit_extract(&tail).unwrap();
        assert!((fit.a - 1.0).abs() < 1e-12);
        let decay = decay_exponent(&tail).unwrap();
        assert!((decay.alpha - 1.0).abs() < 1e-12);
    }

    #[test]
    fn analytic_tails() {
        let radii = log_radii(10.0, 1000.0, 60);
        let radial = TailSamples::from_fn(3, &radii, |x| 1.0 / libm::sqrt(1.0 + dot(x, x)));
        assert!((limit_extract(&radial).unwrap().a - 1.0).abs() < 0.01);
        let dipole = TailSamples::from_fn(3, &radii, |x| x[0] * libm::pow(1.0 + dot(x, x), -1.5));
        assert!(limit_extract(&dipole).unwrap().a.abs() < 1e-6);
        assert!((decay_exponent(&dipole).unwrap().alpha - 2.0).abs() < 0.1);
        let four = TailSamples::from_fn(4, &radii, |x| 1.0 / (1.0 + dot(x, x)));
        assert!((decay_exponent(&four).unwrap().alpha - 2.0).abs() < 0.1);
        let square = TailSamples::from_fn(3, &radii, |x| 1.0 / dot(x, x));
        let fit = decay_exponent(&square).unwrap();
        assert!((fit.alpha - 2.0).abs() < 1e-12 && (fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn short_tails_are_rejected() {
        let tail = TailSamples::from_fn(3, &log_radii(10.0, 100.0, 5), |x| 1.0 / norm(x));
        assert_eq!(limit_extract(&tail), Err(Error::InsufficientTail(5)));
        let flat = TailSamples::from_fn(3, &log_radii(10.0, 1000.0, 10), |_| 0.0);
        assert_eq!(decay_exponent(&flat), Err(Error::DegenerateFit));
    }

    #[test]
    fn coefficient_tables() {
        let e = multipole_coeffs(2, 3).unwrap();
        assert_eq!(e.d, vec![1.0, -0.5, 0.375]);
        assert_eq!(e.c[0][0], 1.0);
        assert_eq!(e.c[1][0], 1.0);
        assert_eq!(e.c[1][1], -0.5);
        let e = multipole_coeffs(2, 4).unwrap();
        assert_eq!(e.d, vec![1.0, -1.0, 1.0]);
        assert_eq!((e.c[1][0], e.c[1][1], e.c[2][0], e.c[2][1], e.c[2][2]), (2.0, -1.0, 4.0, -4.0, 1.0));
        assert!(multipole_coeffs(3, 3).is_err());
    }

    #[test]
    fn expansion_error_example() {
        let (lhs, _) = expansion_error(&[10.0, 0.0, 0.0], &[1.0, 0.0, 0.0], 1, 3).unwrap();
        assert!((lhs - (1.0 / 9.0 - 0.11)).abs() < 1e-15);
        let (lhs, rhs) = expansion_error(&[2.0, 1.0, 0.0], &[0.0; 3], 0, 3).unwrap();
        assert_eq!(lhs, 0.0);
        assert_eq!(rhs, 0.0);
        assert!(expansion_error(&[0.0; 3], &[1.0, 0.0, 0.0], 1, 3).is_err());
        assert!(expansion_error(&[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0], 1, 3).is_err());
    }

    #[test]
    fn moment_classes() {
        let mut m = BTreeMap::new();
        m.insert(vec![0, 0, 0], 0.0);
        m.insert(vec![1, 0, 0], -1.0);
        assert_eq!(moment_class(3, &m, 1e-6), 2);
        m.insert(vec![0, 0, 0], 2.0);
        assert_eq!(moment_class(3, &m, 1e-6), 1);
        let zero: BTreeMap<MultiIndex, f64> = BTreeMap::new();
        assert_eq!(moment_class(3, &zero, 1e-6), 4);
    }
}
