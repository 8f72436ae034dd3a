use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zeromode_core::grid::{integrate, RadialGrid, SampledFunction, TensorGrid};
use zeromode_core::lorentz::{holder_product_bound, interpolation_membership, quasinorm, LorentzIndex};
use zeromode_core::special::ball_volume;
use zeromode_core::Error;

fn cube() -> Arc<TensorGrid> {
    Arc::new(TensorGrid::new(3, 0.25, 1.0).unwrap())
}

/// Random simple function: a few level sets with values in [1, 30], some cells left empty.
fn simple_function(grid: &Arc<TensorGrid>, seed: u64) -> SampledFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let levels: Vec<f64> = (0..4).map(|_| rng.random_range(1.0..30.0)).collect();
    let values = (0..grid.len())
        .map(|_| {
            let pick = rng.random_range(0..levels.len() + 1);
            if pick == levels.len() {
                0.0
            } else {
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                sign * levels[pick]
            }
        })
        .collect();
    SampledFunction::tensor(grid, values).unwrap()
}

fn index_strategy() -> impl Strategy<Value = (f64, f64)> {
    (1.1f64..6.0, prop_oneof![Just(f64::INFINITY), 0.5f64..8.0])
}

fn inv(q: f64) -> f64 {
    if q.is_infinite() {
        0.0
    } else {
        1.0 / q
    }
}

fn index_from_inverse(ip: f64, iq: f64) -> LorentzIndex {
    let q = if iq == 0.0 { f64::INFINITY } else { 1.0 / iq };
    LorentzIndex::new(1.0 / ip, q).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 100,
        rng_seed: RngSeed::Fixed(20_231),
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn holder_product_inequality(seed in any::<u64>(), (p1, q1) in index_strategy(), (p2, q2) in index_strategy()) {
        let g = cube();
        let f = simple_function(&g, seed);
        let h = simple_function(&g, seed ^ 0x9e37_79b9_7f4a_7c15);
        let i1 = LorentzIndex::new(p1, q1).unwrap();
        let i2 = LorentzIndex::new(p2, q2).unwrap();
        let out = index_from_inverse(1.0 / p1 + 1.0 / p2, inv(q1) + inv(q2));
        let (lhs, rhs) = holder_product_bound(&f, &h, i1, i2, out).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12), "lhs {lhs} rhs {rhs}");
    }

    #[test]
    fn quasi_triangle_inequality(seed in any::<u64>(), (p, q) in index_strategy()) {
        let g = cube();
        let f = simple_function(&g, seed);
        let h = simple_function(&g, seed.wrapping_add(1));
        let idx = LorentzIndex::new(p, q).unwrap();
        let lhs = quasinorm(&f.sum(&h).unwrap(), idx).unwrap();
        let rhs = quasinorm(&f, idx).unwrap() + quasinorm(&h, idx).unwrap();
        let constant = libm::pow(2.0, 1.0 / p) * libm::pow(2.0, ((1.0 - q) * inv(q)).max(0.0));
        prop_assert!(lhs <= constant * rhs * (1.0 + 1e-12), "lhs {lhs} rhs {rhs}");
    }

    #[test]
    fn homogeneity(seed in any::<u64>(), (p, q) in index_strategy(), c in -50.0f64..50.0) {
        let g = cube();
        let f = simple_function(&g, seed);
        let idx = LorentzIndex::new(p, q).unwrap();
        let lhs = quasinorm(&f.scaled(c), idx).unwrap();
        let rhs = c.abs() * quasinorm(&f, idx).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
    }

    #[test]
    fn diagonal_index_is_lebesgue_norm(seed in any::<u64>(), p in 1.0f64..6.0) {
        let g = cube();
        let f = simple_function(&g, seed);
        let direct = libm::pow(integrate(&f.map(|v| libm::pow(v.abs(), p))).unwrap(), 1.0 / p);
        let lorentz = quasinorm(&f, LorentzIndex::new(p, p).unwrap()).unwrap();
        prop_assert!((lorentz / direct - 1.0).abs() < 1e-10, "{lorentz} vs {direct}");
    }

    #[test]
    fn second_index_inclusion(seed in any::<u64>(), p in 1.1f64..6.0, q1 in 0.5f64..4.0, dq in 0.1f64..4.0) {
        let g = cube();
        let f = simple_function(&g, seed);
        let small = quasinorm(&f, LorentzIndex::new(p, q1).unwrap()).unwrap();
        let large = quasinorm(&f, LorentzIndex::new(p, q1 + dq).unwrap()).unwrap();
        let weak = quasinorm(&f, LorentzIndex::weak(p).unwrap()).unwrap();
        prop_assert!(small.is_finite() && large.is_finite() && weak.is_finite());
        // L^{p,q1} ⊂ L^{p,q2} ⊂ L^{p,∞} with the classical embedding constants.
        let embed = |qa: f64, qb: f64| libm::pow(qa / p, 1.0 / qa - inv(qb));
        prop_assert!(large <= embed(q1, q1 + dq) * small * (1.0 + 1e-9));
        prop_assert!(weak <= embed(q1, f64::INFINITY) * small * (1.0 + 1e-9));
    }
}

fn profile_grid() -> Arc<RadialGrid> {
    Arc::new(RadialGrid::log(1e-4, 1e4, 2001, 3).unwrap())
}

#[test]
fn kernel_weak_norm_constant() {
    let a = SampledFunction::from_profile(&profile_grid(), |r| 1.0 / r);
    let v = quasinorm(&a, LorentzIndex::weak(3.0).unwrap()).unwrap();
    let exact = libm::cbrt(4.0 * PI / 3.0);
    assert!((v / exact - 1.0).abs() < 0.01, "{v} vs {exact}");
    assert!((exact - 1.6119).abs() < 1e-4);
}

#[test]
fn indicator_lebesgue_constants() {
    let g = Arc::new(TensorGrid::new(3, 0.02, 1.1).unwrap());
    let ball = SampledFunction::from_points(&g, |x| if x.iter().map(|c| c * c).sum::<f64>() < 1.0 { 1.0 } else { 0.0 });
    for p in [1.0, 1.5, 2.0, 3.0] {
        let v = quasinorm(&ball, LorentzIndex::new(p, p).unwrap()).unwrap();
        let exact = libm::pow(ball_volume(3), 1.0 / p);
        assert!((v / exact - 1.0).abs() < 0.01, "p = {p}: {v} vs {exact}");
    }
}

#[test]
fn dilation_scaling_on_power_laws() {
    let g = profile_grid();
    for (p, q) in [(1.5, 1.0), (3.0, f64::INFINITY), (2.0, 2.0)] {
        let idx = LorentzIndex::new(p, q).unwrap();
        let profile = |r: f64| 1.0_f64.min(libm::pow(r, -4.0));
        let base = quasinorm(&SampledFunction::from_profile(&g, profile), idx).unwrap();
        for lambda in [0.5, 2.0, 7.0] {
            let dilated = SampledFunction::from_profile(&g, |r| profile(r / lambda));
            let v = quasinorm(&dilated, idx).unwrap();
            let expected = libm::pow(lambda, 3.0 / p) * base;
            assert!((v / expected - 1.0).abs() < 0.01, "({p},{q}) λ={lambda}: {v} vs {expected}");
        }
    }
}

#[test]
fn l3_of_kernel_diverges_but_weak_norm_is_finite() {
    let a = SampledFunction::from_profile(&profile_grid(), |r| 1.0 / r);
    assert!(matches!(quasinorm(&a, LorentzIndex::new(3.0, 3.0).unwrap()), Err(Error::DivergentNorm(_))));
    assert!(quasinorm(&a, LorentzIndex::weak(3.0).unwrap()).unwrap().is_finite());
}

#[test]
fn interpolation_finiteness() {
    // f = r^{-1} on r < 1 and r^{-2} beyond: in L^{2,∞} ∩ L^{3,∞}, hence in every L^{p,q} between.
    let g = profile_grid();
    let f = SampledFunction::from_profile(&g, |r| if r < 1.0 { 1.0 / r } else { 1.0 / (r * r) });
    for (p, q) in [(2.5, 1.0), (2.5, 0.5), (2.2, 4.0)] {
        let out = interpolation_membership(&f, 2.0, 3.0, p, q).unwrap();
        assert!(out.endpoints_finite());
        assert!(out.value.is_finite() && out.value > 0.0);
    }
}

#[test]
fn weak_l1_and_l1_ladder() {
    use zeromode_core::asymptotics::tail_integral;
    let g = Arc::new(RadialGrid::log(1e-3, 1e5, 2401, 3).unwrap());
    // Decay r^{-n}: finite weak-L^1 quasinorm, logarithmically divergent L^1 tail.
    let weak = SampledFunction::from_profile(&g, |r| 1.0 / (1.0 + r * r * r));
    assert!(quasinorm(&weak, LorentzIndex::weak(1.0).unwrap()).unwrap().is_finite());
    assert!(!tail_integral(&weak, 1.0).unwrap().converged());
    // Decay r^{-(n+1)}: integrable.
    let strong = SampledFunction::from_profile(&g, |r| 1.0 / (1.0 + r * r * r * r));
    let tail = tail_integral(&strong, 1.0).unwrap();
    assert!(tail.converged() && tail.value.is_finite());
    assert!(quasinorm(&strong, LorentzIndex::new(1.0, 1.0).unwrap()).unwrap().is_finite());
}
