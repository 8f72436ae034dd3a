//! Special functions and small numerical helpers.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

/// Surface area `ω_{n-1}` of the unit sphere in ℝⁿ.
pub fn sphere_area(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    2.0 * libm::pow(PI, h) / libm::tgamma(h)
}

/// Volume `|B(0,1)|` of the unit ball in ℝⁿ.
pub fn ball_volume(n: usize) -> f64 {
    sphere_area(n) / n as f64
}

/// Generalized binomial coefficient `binom(a, k)` for real `a`.
pub fn binomial(a: f64, k: usize) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc *= (a - i as f64) / (i + 1) as f64;
    }
    acc
}

/// Dimension of the space of degree-`l` spherical harmonics on `S^{n-1}`.
pub fn harmonic_dimension(l: usize, n: usize) -> usize {
    let choose = |top: usize, bottom: usize| -> usize {
        if top < bottom {
            return 0;
        }
        let mut acc: u128 = 1;
        for i in 0..bottom {
            acc = acc * (top - i) as u128 / (i + 1) as u128;
        }
        acc as usize
    };
    let lower = if l >= 2 { choose(l + n - 3, n - 1) } else { 0 };
    choose(l + n - 1, n - 1) - lower
}

/// Gegenbauer index `ν = (n-2)/2` attached to dimension `n`.
pub fn gegenbauer_index(n: usize) -> f64 {
    (n as f64 - 2.0) / 2.0
}

/// Values `C_0^ν(t), …, C_{l_max}^ν(t)` written into `out`.
pub fn gegenbauer_values(nu: f64, t: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() == 1 {
        return;
    }
    out[1] = 2.0 * nu * t;
    for l in 2..out.len() {
        let lf = l as f64;
        out[l] = (2.0 * t * (lf + nu - 1.0) * out[l - 1] - (lf + 2.0 * nu - 2.0) * out[l - 2]) / lf;
    }
}

/// `C_l^ν(1) = binom(l + 2ν - 1, l)`.
pub fn gegenbauer_at_one(l: usize, nu: f64) -> f64 {
    binomial(l as f64 + 2.0 * nu - 1.0, l)
}

/// Integral of the monomial `θ^β` over the unit sphere `S^{n-1}`, where `β.len() ≤ n`
/// and missing exponents are zero.
pub fn sphere_monomial(n: usize, beta: &[usize]) -> f64 {
    debug_assert!(beta.len() <= n);
    if beta.iter().any(|b| b % 2 == 1) {
        return 0.0;
    }
    let total: usize = beta.iter().sum();
    let mut num = 1.0;
    for i in 0..n {
        let b = beta.get(i).copied().unwrap_or(0) as f64;
        num *= libm::tgamma((b + 1.0) / 2.0);
    }
    2.0 * num / libm::tgamma((total as f64 + n as f64) / 2.0)
}

/// Polynomial in `θ₁ = x₁/|x|`, the angular factor of axially symmetric functions.
#[derive(Debug, Clone, PartialEq)]
pub struct AxialPolynomial {
    coeffs: Vec<f64>,
}

impl AxialPolynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs[coeffs.len() - 1] == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        AxialPolynomial { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        AxialPolynomial { coeffs: vec![c] }
    }

    /// Zonal harmonic `C_l^ν(θ₁)/C_l^ν(1)` of degree `l` about the first axis.
    pub fn zonal(l: usize, n: usize) -> Self {
        let nu = gegenbauer_index(n);
        let mut prev = vec![1.0];
        let mut cur = vec![0.0, 2.0 * nu];
        if l == 0 {
            return AxialPolynomial::new(prev);
        }
        for k in 2..=l {
            let kf = k as f64;
            let mut next = vec![0.0; k + 1];
            for (i, c) in cur.iter().enumerate() {
                next[i + 1] += 2.0 * (kf + nu - 1.0) * c / kf;
            }
            for (i, c) in prev.iter().enumerate() {
                next[i] -= (kf + 2.0 * nu - 2.0) * c / kf;
            }
            prev = core::mem::replace(&mut cur, next);
        }
        let norm = gegenbauer_at_one(l, nu);
        AxialPolynomial::new(cur.into_iter().map(|c| c / norm).collect())
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 1.0
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    pub fn mul(&self, other: &AxialPolynomial) -> AxialPolynomial {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        AxialPolynomial::new(out)
    }

    /// `∫_{S^{n-1}} θ^β P(θ₁) dσ(θ)`.
    pub fn sphere_moment(&self, n: usize, beta: &[usize]) -> f64 {
        let mut shifted: Vec<usize> = vec![0; n];
        shifted[..beta.len()].copy_from_slice(beta);
        let base = shifted[0];
        let mut acc = 0.0;
        for (k, c) in self.coeffs.iter().enumerate() {
            if *c == 0.0 {
                continue;
            }
            shifted[0] = base + k;
            acc += c * sphere_monomial(n, &shifted);
        }
        acc
    }

    pub fn sphere_integral(&self, n: usize) -> f64 {
        self.sphere_moment(n, &[])
    }

    /// `∫_{S^{n-1}} |P(θ₁)| dσ` by the midpoint rule in the polar angle.
    pub fn sphere_abs_integral(&self, n: usize) -> f64 {
        const CELLS: usize = 4096;
        let dphi = PI / CELLS as f64;
        let mut acc = 0.0;
        for j in 0..CELLS {
            let phi = (j as f64 + 0.5) * dphi;
            acc += self.eval(libm::cos(phi)).abs() * libm::pow(libm::sin(phi), n as f64 - 2.0);
        }
        acc * dphi * sphere_area(n - 1)
    }

    /// `max_{t ∈ [-1,1]} |P(t)|` by a dense scan.
    pub fn max_abs(&self) -> f64 {
        if self.coeffs.len() == 1 {
            return self.coeffs[0].abs();
        }
        const SCAN: usize = 4096;
        (0..=SCAN).map(|i| self.eval(-1.0 + 2.0 * i as f64 / SCAN as f64).abs()).fold(0.0, f64::max)
    }
}

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(items: I) -> f64 {
    let mut acc = Compensated::default();
    for x in items {
        acc.add(x);
    }
    acc.value()
}

/// Five-point Gauss-Legendre rule on `[-1, 1]`.
pub const GAUSS_LEGENDRE_5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_08),
    (0.906_179_845_938_664, 0.236_926_885_056_189_08),
];

/// Euclidean norm of a point.
pub fn norm(x: &[f64]) -> f64 {
    libm::sqrt(x.iter().map(|v| v * v).sum())
}

pub fn distance(x: &[f64], y: &[f64]) -> f64 {
    libm::sqrt(x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum())
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// `x^k` for a non-negative integer `k` by repeated multiplication.
pub fn powi(x: f64, k: usize) -> f64 {
    let mut acc = 1.0;
    for _ in 0..k {
        acc *= x;
    }
    acc
}
