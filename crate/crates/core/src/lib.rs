//! Zero-energy states of `-Δ + V` on ℝⁿ (n ≥ 3) for potentials in the Lorentz
//! class `L^{n/2,1}`.
//!
//! The crate is `no_std` (with `alloc`). It covers sampled functions on radial and
//! tensor grids, Lorentz quasinorms, the `V = W + K` splitting, the Neumann series
//! Green function of `-Δ + W`, the compact nullspace problem on the support of `K`,
//! and tail analysis of the resulting states.
#![no_std]
// `!(x > 0.0)` is the NaN-rejecting form used for argument checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod asymptotics;
pub mod error;
pub mod greens;
pub mod grid;
pub mod lorentz;
pub mod potential;
pub mod special;
pub mod zerostate;

pub use error::{Error, Result};
