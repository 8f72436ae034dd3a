use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

use zeromode_core::asymptotics::{classify, default_moment_tol, StateKind, TailSamples};
use zeromode_core::greens::{kappa, GreensEvaluator, GreensOptions};
use zeromode_core::grid::{laplacian_residual, RadialGrid, SampledFunction, TensorGrid};
use zeromode_core::potential::{decompose, default_delta, Decomposition, PotentialSpec, DEFAULT_BUDGET, DEFAULT_CONTRACTION_TARGET};
use zeromode_core::zerostate::{assemble, default_tolerance, extend, solve, ZeroState};
use zeromode_core::Error;

struct Run {
    v: SampledFunction,
    dec: Decomposition,
    state: ZeroState,
    elapsed: Duration,
}

fn run(spec: &PotentialSpec, step: f64, degree: usize) -> Run {
    let start = Instant::now();
    let g = Arc::new(RadialGrid::with_log_step(1e-4, 2e3, step, spec.dim()).unwrap());
    let v = spec.sample_radial(&g).unwrap();
    let delta = default_delta(&v, DEFAULT_CONTRACTION_TARGET).unwrap();
    let dec = decompose(&v, delta, DEFAULT_BUDGET).unwrap();
    let ev = GreensEvaluator::new(&dec.w, GreensOptions::default()).unwrap();
    let a = assemble(&dec, &ev, degree).unwrap();
    let state = solve(&a, default_tolerance(a.grid())).unwrap().expect("zero state");
    Run { v, dec, state, elapsed: start.elapsed() }
}

fn tail(state: &ZeroState) -> TailSamples {
    TailSamples::from_sampled(&state.psi, 30.0, 1e3, 0)
}

/// `(max relative deviation on supp K, amplitude of the closed form at the state's peak)`.
fn oracle_error(spec: &PotentialSpec, r: &Run) -> (f64, f64) {
    let closed = spec.closed_form_state().unwrap();
    let nodes = r.state.psi.radial_grid().unwrap().nodes();
    let exact: Vec<f64> = r.state.support.iter().map(|i| closed.profile(nodes[*i])).collect();
    let peak = exact.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let err = r.state.support_values.iter().zip(&exact).map(|(u, e)| (u - e / peak).abs()).fold(0.0f64, f64::max);
    (err, peak)
}

#[test]
fn limit_identity_for_resonances() {
    for n in [3, 4] {
        let r = run(&PotentialSpec::inverse_design_radial(n), 0.1, 0);
        assert!(r.elapsed < Duration::from_secs(120));
        let tol = default_moment_tol(&r.v, &r.state.psi).unwrap();
        let c = classify(&r.state.psi, &r.v, tol, &tail(&r.state)).unwrap();
        let m0 = c.moments[&vec![0; n]];
        let predicted = -kappa(n) * m0;
        assert!((c.a_limit / predicted - 1.0).abs() <= 0.02, "n={n}: A {} vs {predicted}", c.a_limit);
        assert!((c.a_limit - 1.0).abs() <= 0.02, "n={n}: A {}", c.a_limit);
        assert!((predicted - 1.0).abs() <= 0.02, "n={n}: −κM₀ {predicted}");
        assert_eq!(c.kind, StateKind::Resonance);
        assert_eq!(c.decay_class, n - 2);
    }
}

#[test]
fn resonance_eigenfunction_dichotomy() {
    let spec = PotentialSpec::inverse_design_radial(3);
    let r = run(&spec, 0.1, 0);
    let tol = default_moment_tol(&r.v, &r.state.psi).unwrap();
    let c = classify(&r.state.psi, &r.v, tol, &tail(&r.state)).unwrap();
    assert_eq!(c.kind, StateKind::Resonance);
    assert!((c.moments[&vec![0, 0, 0]].abs() / (4.0 * PI) - 1.0).abs() <= 0.02);
    assert!((c.decay.alpha - 1.0).abs() <= 0.1);
    assert!(!c.l2.converged());
    assert!(c.moments[&vec![0, 0, 0]].abs() > tol && c.decay.alpha < 2.0 - 0.15);

    let spec = PotentialSpec::inverse_design_dipole(3);
    let r = run(&spec, 0.1, 1);
    let (_, amplitude) = oracle_error(&spec, &r);
    let tol = default_moment_tol(&r.v, &r.state.psi).unwrap();
    let c = classify(&r.state.psi, &r.v, tol, &tail(&r.state)).unwrap();
    assert_eq!(c.kind, StateKind::Eigenfunction);
    assert_eq!(c.decay_class, 2);
    assert!(c.moments[&vec![0, 0, 0]].abs() <= tol);
    // The state is normalized to peak 1; the closed form peaks at `amplitude`.
    let first = c.moments[&vec![1, 0, 0]] * amplitude;
    assert!((first / (-4.0 * PI) - 1.0).abs() <= 0.02, "first moment {first}");
    assert!((c.decay.alpha - 2.0).abs() <= 0.1);
    assert!(c.l2.converged() && c.l2.value.is_finite());
    assert!(c.decay.alpha >= 2.0 - 0.15);
    // Decay at rate n−1 but not n: only M₀ vanishes.
    assert!(c.moments[&vec![1, 0, 0]].abs() > tol);
}

#[test]
fn high_dimensional_states_are_eigenfunctions() {
    let r = run(&PotentialSpec::inverse_design_radial(5), 0.1, 0);
    assert!(r.elapsed < Duration::from_secs(300));
    let tol = default_moment_tol(&r.v, &r.state.psi).unwrap();
    let c = classify(&r.state.psi, &r.v, tol, &tail(&r.state)).unwrap();
    assert_eq!(c.kind, StateKind::Eigenfunction);
    assert!(c.l2.converged() && c.l2.value.is_finite(), "{:?}", c.l2);
    assert!((c.decay.alpha - 3.0).abs() <= 0.1);
}

#[test]
fn solver_reproduces_closed_forms_and_converges() {
    for (spec, degree) in [(PotentialSpec::inverse_design_radial(3), 0), (PotentialSpec::inverse_design_dipole(3), 1)] {
        let coarse = run(&spec, 0.1, degree);
        let fine = run(&spec, 0.05, degree);
        let (e1, _) = oracle_error(&spec, &coarse);
        let (e2, _) = oracle_error(&spec, &fine);
        assert!(e1 <= 0.05, "{:?}: {e1}", spec.kind());
        assert!(e2 <= 0.4 * e1, "{:?}: {e2} vs {e1}", spec.kind());
    }
}

#[test]
fn extended_states_satisfy_the_equation_on_a_tensor_grid() {
    for (spec, degree) in [(PotentialSpec::inverse_design_radial(3), 0), (PotentialSpec::inverse_design_dipole(3), 1)] {
        let r = run(&spec, 0.05, degree);
        let tg = Arc::new(TensorGrid::new(3, 0.1, 2.0).unwrap());
        let mut x = vec![0.0; 3];
        let targets: Vec<Vec<f64>> = (0..tg.len())
            .map(|k| {
                tg.point(k, &mut x);
                x.clone()
            })
            .collect();
        let psi = SampledFunction::tensor(&tg, extend(&r.state, &r.dec, &targets).unwrap()).unwrap();
        let v = spec.sample_tensor(&tg).unwrap();
        let vmax = v.max_abs();
        let residual = laplacian_residual(&psi, &v).unwrap();
        assert!(residual <= 10.0 * 0.01 * vmax * vmax, "{:?}: {residual}", spec.kind());
    }
}

#[test]
fn detuned_potential_has_no_zero_state() {
    let spec = PotentialSpec::inverse_design_radial(3);
    let g = Arc::new(RadialGrid::with_log_step(1e-4, 2e3, 0.1, 3).unwrap());
    let v = spec.sample_radial(&g).unwrap().scaled(1.1);
    let dec = decompose(&v, default_delta(&v, DEFAULT_CONTRACTION_TARGET).unwrap(), DEFAULT_BUDGET).unwrap();
    let ev = GreensEvaluator::new(&dec.w, GreensOptions::default()).unwrap();
    let a = assemble(&dec, &ev, 0).unwrap();
    assert!(solve(&a, default_tolerance(a.grid())).unwrap().is_none());
}

#[test]
fn decomposition_certifies_both_oracles() {
    for spec in [PotentialSpec::inverse_design_radial(3), PotentialSpec::inverse_design_dipole(3)] {
        let g = Arc::new(RadialGrid::with_log_step(1e-4, 2e3, 0.1, 3).unwrap());
        let v = spec.sample_radial(&g).unwrap();
        let delta = default_delta(&v, DEFAULT_CONTRACTION_TARGET).unwrap();
        let dec = decompose(&v, delta, DEFAULT_BUDGET).unwrap();
        assert!(dec.measured_w_norm <= delta);
        assert!(dec.contraction_c <= DEFAULT_CONTRACTION_TARGET + 1e-12, "{}", dec.contraction_c);
        assert!(dec.rounds <= DEFAULT_BUDGET);
    }
    let g = Arc::new(RadialGrid::with_log_step(1e-3, 1e2, 0.1, 3).unwrap());
    let step = SampledFunction::from_profile(&g, |r| {
        if r <= 1.0 {
            -2.0
        } else if r <= 2.0 {
            -0.5
        } else {
            0.0
        }
    });
    let dec = decompose(&step, 1e-6, DEFAULT_BUDGET).unwrap();
    assert!(dec.w.values().iter().all(|w| *w == 0.0));
    assert_eq!(dec.k.values(), step.values());
}

#[test]
fn empty_potential_has_no_zero_state() {
    let g = Arc::new(RadialGrid::with_log_step(1e-3, 1e2, 0.1, 3).unwrap());
    let v = SampledFunction::from_profile(&g, |_| 0.0);
    let dec = decompose(&v, 0.1, DEFAULT_BUDGET).unwrap();
    let ev = GreensEvaluator::new(&dec.w, GreensOptions::default()).unwrap();
    let a = assemble(&dec, &ev, 0).unwrap();
    assert!(solve(&a, default_tolerance(a.grid())).unwrap().is_none());
}

#[test]
fn oversized_remainder_violates_contraction() {
    let g = Arc::new(RadialGrid::with_log_step(1e-3, 1e2, 0.1, 3).unwrap());
    let w = SampledFunction::from_profile(&g, |r| if r <= 1.0 { -40.0 } else { 0.0 });
    assert!(matches!(GreensEvaluator::new(&w, GreensOptions::default()), Err(Error::ContractionViolated(_))));
}

#[test]
fn moment_and_decay_invariants_across_corpus() {
    let corpus = [
        (PotentialSpec::inverse_design_radial(3), 0),
        (PotentialSpec::inverse_design_dipole(3), 1),
        (PotentialSpec::inverse_design_dipole(3), 0),
        (PotentialSpec::inverse_design_radial(4), 0),
        (PotentialSpec::inverse_design_radial(5), 0),
    ];
    for (spec, degree) in corpus {
        let n = spec.dim();
        let r = run(&spec, 0.1, degree);
        let tol = default_moment_tol(&r.v, &r.state.psi).unwrap();
        let c = classify(&r.state.psi, &r.v, tol, &tail(&r.state)).unwrap();
        let m0 = c.moments[&vec![0; n]].abs();
        let alpha = c.decay.alpha;
        let label = format!("{:?} degree {degree}", spec.kind());
        assert_eq!(m0 <= tol, alpha >= (n - 1) as f64 - 0.15, "{label}: M0 {m0} tol {tol} alpha {alpha}");
        if alpha >= n as f64 - 0.15 {
            let first = (0..n).map(|k| {
                let mut e = vec![0; n];
                e[k] = 1;
                c.moments[&e].abs()
            });
            assert!(m0 <= tol && first.into_iter().all(|m| m <= tol), "{label}");
        }
    }
}
