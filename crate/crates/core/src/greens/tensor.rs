//! Matrix-free single-layer maps on uniform tensor grids.

use alloc::vec;
use alloc::vec::Vec;

use crate::grid::SampledFunction;
use crate::special::{ball_volume, distance, powi, sphere_area};
use crate::{Error, Result};

/// Nonzero cells of `W` with the punctured-cell kernel.
#[derive(Debug, Clone)]
pub(crate) struct TensorRoute {
    dim: usize,
    kappa: f64,
    points: Vec<f64>,
    values: Vec<f64>,
    cell: f64,
    puncture_radius: f64,
    core: f64,
}

impl TensorRoute {
    pub(crate) fn new(w: &SampledFunction, kappa: f64) -> Result<Self> {
        let g = w.tensor_grid().ok_or(Error::RequiresTensor)?;
        let n = g.dim();
        let mut points = Vec::new();
        let mut values = Vec::new();
        let mut x = vec![0.0; n];
        for (k, v) in w.values().iter().enumerate() {
            if *v != 0.0 {
                g.point(k, &mut x);
                points.extend_from_slice(&x);
                values.push(*v);
            }
        }
        let cell = g.cell_volume();
        let puncture_radius = libm::pow(cell / ball_volume(n), 1.0 / n as f64);
        // Ball average of |u|^{2-n} over B(0, ρ) with |B(0, ρ)| = h^n.
        let core = kappa * sphere_area(n) * puncture_radius * puncture_radius / (2.0 * cell);
        Ok(TensorRoute { dim: n, kappa, points, values, cell, puncture_radius, core })
    }

    pub(crate) fn support_len(&self) -> usize {
        self.values.len()
    }

    pub(crate) fn point(&self, k: usize) -> &[f64] {
        &self.points[k * self.dim..(k + 1) * self.dim]
    }

    pub(crate) fn max_radius(&self) -> f64 {
        (0..self.support_len()).map(|k| crate::special::norm(self.point(k))).fold(0.0, f64::max)
    }

    pub(crate) fn spacing(&self) -> f64 {
        libm::pow(self.cell, 1.0 / self.dim as f64)
    }

    /// `g0(x, z_k)` with the cell around `z_k` replaced by its ball average.
    fn kernel(&self, x: &[f64], k: usize) -> f64 {
        let d = distance(x, self.point(k));
        if d < self.puncture_radius {
            self.core
        } else {
            self.kappa / powi(d, self.dim - 2)
        }
    }

    fn weight(&self, k: usize, absolute: bool) -> f64 {
        let w = self.values[k] * self.cell;
        if absolute {
            w.abs()
        } else {
            w
        }
    }

    /// `v_0(z_k) = g0(z_k, y)` followed by `v_j = ∫ g0(·, z) W(z) v_{j-1}(z) dz` on the support.
    pub(crate) fn trajectory(&self, y: &[f64], depth: usize, absolute: bool) -> Vec<Vec<f64>> {
        let s = self.support_len();
        let mut out = Vec::with_capacity(depth + 1);
        out.push((0..s).map(|k| self.kernel(y, k)).collect::<Vec<f64>>());
        for _ in 0..depth {
            let prev = out.last().expect("trajectory seeded");
            let weighted: Vec<f64> = (0..s).map(|k| self.weight(k, absolute) * prev[k]).collect();
            let next = (0..s)
                .map(|i| {
                    let zi = self.point(i);
                    (0..s).map(|k| self.kernel(zi, k) * weighted[k]).sum()
                })
                .collect();
            out.push(next);
        }
        out
    }

    /// `∫ g0(x, z) W(z) v(z) dz`.
    pub(crate) fn close(&self, x: &[f64], v: &[f64], absolute: bool) -> f64 {
        (0..self.support_len()).map(|k| self.kernel(x, k) * self.weight(k, absolute) * v[k]).sum()
    }

    /// `G_0(x,y), …, G_max_j(x,y)`.
    pub(crate) fn orders(&self, x: &[f64], y: &[f64], max_j: usize, absolute: bool) -> Vec<f64> {
        let d = distance(x, y);
        let mut out = vec![self.kappa / powi(d, self.dim - 2)];
        if max_j == 0 {
            return out;
        }
        let path = self.trajectory(y, max_j - 1, absolute);
        for v in &path {
            out.push(self.close(x, v, absolute));
        }
        out
    }
}
