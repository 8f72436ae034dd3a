//! Spherical-harmonic channels of radial integral operators.
//!
//! For isotropic `W`, `|x - y|^{2-n} = Σ_l r_<^l / r_>^{l+n-2} C_l^ν(cos γ)` splits every
//! single-layer map into one radial operator per degree `l`, with kernel
//! `r_<^l / r_>^{l+n-2} / (2l + n - 2)` against `t^{n-1} dt`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::grid::{RadialGrid, SampledFunction};
use crate::special::{gegenbauer_at_one, gegenbauer_index, gegenbauer_values};
use crate::{Error, Result};

/// `r_<^l / r_>^{l+n-2}`.
pub fn separated(l: usize, n: usize, r: f64, t: f64) -> f64 {
    let (lo, hi) = if r <= t { (r, t) } else { (t, r) };
    libm::pow(lo / hi, l as f64) / libm::pow(hi, n as f64 - 2.0)
}

/// Eigenvalue factor `1/(2l + n - 2)` of channel `l`.
pub fn channel_factor(l: usize, n: usize) -> f64 {
    1.0 / (2 * l + n - 2) as f64
}

/// O(M) application of the channel operator on the grid nodes.
#[derive(Debug, Clone)]
pub struct ChannelSweep {
    degree: usize,
    dim: usize,
    step_ratio: Vec<f64>,
    step_pow: Vec<f64>,
    inv_base: Vec<f64>,
}

impl ChannelSweep {
    pub fn new(grid: &RadialGrid, degree: usize) -> Self {
        let r = grid.nodes();
        let n = grid.dim();
        let step_ratio: Vec<f64> = r.windows(2).map(|p| p[0] / p[1]).collect();
        let step_pow = step_ratio.iter().map(|q| libm::pow(*q, degree as f64)).collect();
        let inv_base = r.iter().map(|x| libm::pow(*x, 2.0 - n as f64)).collect();
        ChannelSweep { degree, dim: n, step_ratio, step_pow, inv_base }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn factor(&self) -> f64 {
        channel_factor(self.degree, self.dim)
    }

    pub fn advance(&mut self) {
        self.degree += 1;
        for (p, q) in self.step_pow.iter_mut().zip(&self.step_ratio) {
            *p *= q;
        }
    }

    /// `out_i = Σ_k g_l(r_i, t_k) a_k` where `a` already carries the quadrature weights.
    pub fn apply_weighted(&self, a: &[f64], out: &mut [f64]) {
        let m = a.len();
        let factor = self.factor();
        let mut lower = 0.0;
        for i in 0..m {
            lower = if i == 0 { a[0] } else { lower * self.step_pow[i - 1] + a[i] };
            out[i] = lower * self.inv_base[i];
        }
        let mut upper = 0.0;
        for i in (0..m.saturating_sub(1)).rev() {
            upper = self.step_pow[i] * (upper + a[i + 1] * self.inv_base[i + 1]);
            out[i] += upper;
        }
        for v in out.iter_mut() {
            *v *= factor;
        }
    }
}

/// `t_k ↦ r_<^l / r_>^{l+n-2}` for a fixed off-grid radius, advanced degree by degree.
#[derive(Debug, Clone)]
pub struct PointKernel {
    ratio: Vec<f64>,
    values: Vec<f64>,
}

impl PointKernel {
    pub fn new(grid: &RadialGrid, r: f64) -> Self {
        let n = grid.dim() as f64;
        let mut ratio = Vec::with_capacity(grid.len());
        let mut values = Vec::with_capacity(grid.len());
        for t in grid.nodes() {
            let (lo, hi) = if r <= *t { (r, *t) } else { (*t, r) };
            ratio.push(lo / hi);
            values.push(libm::pow(hi, 2.0 - n));
        }
        PointKernel { ratio, values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn advance(&mut self) {
        for (v, q) in self.values.iter_mut().zip(&self.ratio) {
            *v *= q;
            if *v < 1e-300 {
                *v = 0.0;
            }
        }
    }

    pub fn dot(&self, a: &[f64]) -> f64 {
        self.values.iter().zip(a).map(|(k, x)| k * x).sum()
    }
}

/// Dense matrix `g_l(t_i, t_k)` without quadrature weights.
#[cfg(test)]
pub fn dense_kernel(grid: &RadialGrid, degree: usize) -> Vec<Vec<f64>> {
    let n = grid.dim();
    let r = grid.nodes();
    let factor = channel_factor(degree, n);
    r.iter().map(|ri| r.iter().map(|tk| factor * separated(degree, n, *ri, *tk)).collect()).collect()
}

/// `Σ_{j=0}^{order} (-1)^j (T W)^j seed` for one channel, given `W` already multiplied by
/// the quadrature weights.
pub fn neumann_apply(sweep: &ChannelSweep, weighted_w: &[f64], seed: &[f64], order: usize) -> Vec<f64> {
    let m = seed.len();
    let mut total = seed.to_vec();
    let mut term = seed.to_vec();
    let mut buffer = vec![0.0; m];
    let mut scratch = vec![0.0; m];
    for j in 1..=order {
        for k in 0..m {
            scratch[k] = weighted_w[k] * term[k];
        }
        sweep.apply_weighted(&scratch, &mut buffer);
        core::mem::swap(&mut term, &mut buffer);
        let sign = if j % 2 == 1 { -1.0 } else { 1.0 };
        for k in 0..m {
            total[k] += sign * term[k];
        }
    }
    total
}

/// Isotropic `W` on a radial grid, split into channels.
#[derive(Debug, Clone)]
pub(crate) struct RadialRoute {
    grid: Arc<RadialGrid>,
    kappa: f64,
    signed: Vec<f64>,
    absolute: Vec<f64>,
}

/// Per-channel coefficients `h_{j,l}(r, s)` for `j = 1..=max_j`, indexed `[l][j - 1]`.
pub(crate) type Coefficients = Vec<Vec<f64>>;

impl RadialRoute {
    pub(crate) fn new(w: &SampledFunction, kappa: f64) -> Result<Self> {
        let grid = w.radial_grid().ok_or(Error::RequiresRadial)?.clone();
        let scale = match w.angular() {
            None => 1.0,
            Some(p) if p.degree() == 0 => p.coeffs()[0],
            Some(_) => return Err(Error::RequiresRadial),
        };
        let signed: Vec<f64> = w.values().iter().zip(grid.weights()).map(|(v, q)| scale * v * q).collect();
        let absolute = signed.iter().map(|x| x.abs()).collect();
        Ok(RadialRoute { grid, kappa, signed, absolute })
    }

    pub(crate) fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub(crate) fn weighted(&self, absolute: bool) -> &[f64] {
        if absolute {
            &self.absolute
        } else {
            &self.signed
        }
    }

    /// Coefficients of `G_1..G_max_j` at radii `(r, s)`, stopping once three consecutive
    /// channels fall below `floor` (or at `max_channels`).
    pub(crate) fn coefficients(&self, r: f64, s: f64, max_j: usize, max_channels: usize, floor: f64, absolute: bool) -> Coefficients {
        let n = self.grid.dim();
        let m = self.grid.len();
        let nu = gegenbauer_index(n);
        let weights = self.weighted(absolute);
        let mut kr = PointKernel::new(&self.grid, r);
        let mut ks = PointKernel::new(&self.grid, s);
        let mut sweep = ChannelSweep::new(&self.grid, 0);
        let mut v = vec![0.0; m];
        let mut scratch = vec![0.0; m];
        let mut out = Vec::new();
        let mut quiet = 0;
        for l in 0..max_channels {
            let factor = channel_factor(l, n);
            for (vk, sk) in v.iter_mut().zip(ks.values()) {
                *vk = self.kappa * sk;
            }
            let mut row = vec![0.0; max_j];
            for j in 1..=max_j {
                for k in 0..m {
                    scratch[k] = weights[k] * v[k];
                }
                row[j - 1] = factor * kr.dot(&scratch);
                if j < max_j {
                    sweep.apply_weighted(&scratch, &mut v);
                }
            }
            let bound: f64 = row.iter().map(|h| h.abs()).sum::<f64>() * gegenbauer_at_one(l, nu);
            out.push(row);
            if bound < floor {
                quiet += 1;
                if quiet >= 3 {
                    break;
                }
            } else {
                quiet = 0;
            }
            kr.advance();
            ks.advance();
            sweep.advance();
        }
        out
    }

    /// `Σ_l C_l^ν(cos γ) h_{j,l}` for every order in the table.
    pub(crate) fn resum(&self, table: &Coefficients, cos_gamma: f64) -> Vec<f64> {
        let n = self.grid.dim();
        let max_j = table.first().map_or(0, |row| row.len());
        let mut c = vec![0.0; table.len()];
        gegenbauer_values(gegenbauer_index(n), cos_gamma, &mut c);
        let mut out = vec![0.0; max_j];
        for (row, cl) in table.iter().zip(&c) {
            for (o, h) in out.iter_mut().zip(row) {
                *o += cl * h;
            }
        }
        out
    }

    /// `g_l(·, t_c)` on every node: the channel coefficient of the truncated series.
    pub(crate) fn column(&self, degree: usize, sweep: &ChannelSweep, c: usize, order: usize) -> Vec<f64> {
        let n = self.grid.dim();
        let tc = self.grid.nodes()[c];
        let seed: Vec<f64> = self.grid.nodes().iter().map(|t| self.kappa * separated(degree, n, *t, tc)).collect();
        neumann_apply(sweep, &self.signed, &seed, order)
    }

    /// Dense `I + T_l W` on the grid, for direct resolvent solves.
    pub(crate) fn resolvent_matrix(&self, degree: usize) -> DMatrix<f64> {
        let n = self.grid.dim();
        let r = self.grid.nodes();
        let factor = channel_factor(degree, n);
        DMatrix::from_fn(r.len(), r.len(), |i, k| {
            let delta = if i == k { 1.0 } else { 0.0 };
            delta + factor * separated(degree, n, r[i], r[k]) * self.signed[k]
        })
    }
}
