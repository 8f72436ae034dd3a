//! decompose → greens → solve → extend → classify.

use std::sync::Arc;
use std::time::Instant;

use zeromode_core::asymptotics::{classify, default_moment_tol, Classification, TailSamples};
use zeromode_core::greens::GreensEvaluator;
use zeromode_core::grid::{laplacian_residual, RadialGrid, SampledFunction, TensorGrid};
use zeromode_core::potential::{decompose, default_delta, Decomposition, PotentialSpec};
use zeromode_core::zerostate::{default_tolerance, extend, scan_channels, ChannelScan, ZeroState};

use crate::config::RunConfig;
use crate::RunError;

/// Wall-clock seconds per stage, in execution order.
#[derive(Debug, Clone, Default)]
pub struct Timings {
    pub stages: Vec<(&'static str, f64)>,
}

impl Timings {
    fn time<T>(&mut self, stage: &'static str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.stages.push((stage, start.elapsed().as_secs_f64()));
        out
    }

    pub fn total(&self) -> f64 {
        self.stages.iter().map(|(_, t)| t).sum()
    }
}

/// Sampled potential and its certified splitting.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub spec: PotentialSpec,
    pub grid: Arc<RadialGrid>,
    pub v: SampledFunction,
    pub delta: f64,
    pub decomposition: Decomposition,
}

pub fn prepare(cfg: &RunConfig, timings: &mut Timings) -> Result<Prepared, RunError> {
    let spec = cfg.potential_spec()?;
    let grid = Arc::new(RadialGrid::with_log_step(cfg.grid.r_min, cfg.grid.r_max, cfg.grid.log_step, cfg.dim)?);
    let v = spec.sample_radial(&grid)?;
    let delta = match cfg.decomposition.delta {
        Some(d) => d,
        None => default_delta(&v, cfg.decomposition.contraction_target)?,
    };
    let decomposition = timings.time("decompose", || decompose(&v, delta, cfg.decomposition.budget))?;
    Ok(Prepared { spec, grid, v, delta, decomposition })
}

/// `(−Δ_h + V)ψ` on the configured tensor grid, with its bound `10 h² max|V|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub spacing: f64,
    pub half_width: f64,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone)]
pub struct ClassifyRun {
    pub prepared: Prepared,
    pub evaluator: GreensEvaluator,
    pub solver_tol: f64,
    pub scan: ChannelScan,
    pub state: ZeroState,
    pub moment_tol: f64,
    pub tail: TailSamples,
    pub classification: Classification,
    pub residual: Option<Residual>,
    pub timings: Timings,
}

pub fn evaluator(cfg: &RunConfig, w: &SampledFunction, timings: &mut Timings) -> Result<GreensEvaluator, RunError> {
    Ok(timings.time("greens", || GreensEvaluator::new(w, cfg.greens.options()))?)
}

pub fn run_classify(cfg: &RunConfig) -> Result<ClassifyRun, RunError> {
    let mut timings = Timings::default();
    let prepared = prepare(cfg, &mut timings)?;
    let evaluator = evaluator(cfg, &prepared.decomposition.w, &mut timings)?;
    let solver_tol = cfg.solver.tol.unwrap_or_else(|| default_tolerance(&prepared.grid));
    let max_degree = cfg.solver.max_degree.max(cfg.solver.degree);
    let scan = timings.time("solve", || scan_channels(&prepared.decomposition, &evaluator, max_degree, solver_tol))?;
    let state = scan
        .state(cfg.solver.degree)
        .cloned()
        .ok_or(RunError::NoZeroState { sigma_min: scan.sigma_min[cfg.solver.degree], tol: solver_tol })?;
    let moment_tol = match cfg.classification.moment_tol {
        Some(t) => t,
        None => default_moment_tol(&prepared.v, &state.psi)?,
    };
    let tail = TailSamples::from_sampled(&state.psi, cfg.tail.r_min, cfg.tail.r_max, 0);
    let classification = timings.time("classify", || classify(&state.psi, &prepared.v, moment_tol, &tail))?;
    let residual = match &cfg.grid.tensor {
        Some(t) => Some(timings.time("residual", || tensor_residual(&prepared, &state, t.spacing, t.half_width))?),
        None => None,
    };
    Ok(ClassifyRun { prepared, evaluator, solver_tol, scan, state, moment_tol, tail, classification, residual, timings })
}

fn tensor_residual(p: &Prepared, state: &ZeroState, spacing: f64, half_width: f64) -> Result<Residual, RunError> {
    let tg = Arc::new(TensorGrid::new(p.spec.dim(), spacing, half_width)?);
    let mut x = vec![0.0; tg.dim()];
    let targets: Vec<Vec<f64>> = (0..tg.len())
        .map(|k| {
            tg.point(k, &mut x);
            x.clone()
        })
        .collect();
    let psi = SampledFunction::tensor(&tg, extend(state, &p.decomposition, &targets)?)?;
    let v = p.spec.sample_tensor(&tg)?;
    let value = laplacian_residual(&psi, &v)?;
    let vmax = v.max_abs();
    Ok(Residual { spacing, half_width, value, bound: 10.0 * spacing * spacing * vmax * vmax })
}
