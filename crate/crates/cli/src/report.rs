//! `report.json` layout. Every inequality carries both sides.

use serde::Serialize;
use zeromode_core::asymptotics::{kappa_b, stencil_directions, Classification};
use zeromode_core::greens::{a_priori_contraction, kappa};
use zeromode_core::lorentz::quasinorm;
use zeromode_core::potential::{critical_norm, CONTRACTION_CEILING};
use zeromode_core::Error;

use crate::config::{IndexConfig, RunConfig};
use crate::pipeline::{ClassifyRun, Prepared, Timings};
use crate::{RunError, SCHEMA_VERSION};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl Check {
    /// `lhs ≤ rhs`.
    pub fn at_most(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Check { name: name.into(), lhs, rhs, holds: lhs <= rhs }
    }
}

/// Fixed design constants and the values substituted for unset knobs.
#[derive(Debug, Clone, Serialize)]
pub struct Knobs {
    pub delta: Option<f64>,
    pub solver_tol: Option<f64>,
    pub moment_tol: Option<f64>,
    pub contraction_ceiling: f64,
    pub kappa_n: f64,
    pub kappa_b: Vec<f64>,
    pub limit_window_start: &'static str,
    pub decay_window: [f64; 2],
    pub stencil_directions: usize,
    pub classification_tolerance: f64,
    pub heavy_tail_ratio: f64,
}

impl Knobs {
    pub fn new(cfg: &RunConfig) -> Self {
        let n = cfg.dim;
        Knobs {
            delta: cfg.decomposition.delta,
            solver_tol: cfg.solver.tol,
            moment_tol: cfg.classification.moment_tol,
            contraction_ceiling: CONTRACTION_CEILING,
            kappa_n: kappa(n),
            kappa_b: (0..=2).filter_map(|order| kappa_b(n, order).ok()).collect(),
            limit_window_start: "r_max/sqrt(10)",
            decay_window: [0.25, 0.9],
            stencil_directions: if n <= 8 { stencil_directions(n).len() } else { 0 },
            classification_tolerance: 0.3,
            heavy_tail_ratio: 0.5,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Header {
    pub schema_version: u32,
    pub command: &'static str,
    pub status: String,
    pub error: Option<String>,
    pub config: RunConfig,
    pub knobs: Knobs,
}

impl Header {
    pub fn new(command: &'static str, cfg: &RunConfig, outcome: Option<&RunError>) -> Self {
        Header {
            schema_version: SCHEMA_VERSION,
            command,
            status: outcome.map_or("ok", |e| e.status()).to_string(),
            error: outcome.map(|e| e.to_string()),
            config: cfg.clone(),
            knobs: Knobs::new(cfg),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionReport {
    pub delta: f64,
    pub v_norm: f64,
    pub w_norm: f64,
    pub k_norm: f64,
    pub contraction_c: f64,
    pub support_radius: f64,
    pub cutoff_radius: f64,
    pub clamp: f64,
    pub step: f64,
    pub levels: usize,
    pub rounds: usize,
}

impl DecompositionReport {
    pub fn new(p: &Prepared) -> Result<Self, RunError> {
        let d = &p.decomposition;
        Ok(DecompositionReport {
            delta: p.delta,
            v_norm: critical_norm(&p.v)?,
            w_norm: d.measured_w_norm,
            k_norm: critical_norm(&d.k)?,
            contraction_c: d.contraction_c,
            support_radius: d.support_radius,
            cutoff_radius: d.cutoff_radius,
            clamp: d.clamp,
            step: d.step,
            levels: d.levels,
            rounds: d.rounds,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GreensReport {
    pub order: usize,
    pub c_measured: f64,
    pub c_a_priori: f64,
    pub tail_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StateSummary {
    pub degree: usize,
    pub sigma_min: f64,
    pub multiplicity: usize,
    pub support_nodes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverReport {
    pub tol: f64,
    pub sigma_min_by_degree: Vec<f64>,
    pub states: Vec<StateSummary>,
    pub selected: StateSummary,
    /// The state is scaled so that its largest-magnitude value on `supp K` is `+1`.
    pub normalization: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct Moment {
    pub alpha: Vec<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub kind: &'static str,
    pub decay_class: usize,
    pub a_limit: f64,
    pub limit_fit_b: f64,
    pub limit_fit_rms: f64,
    pub limit_fit_points: usize,
    pub decay_alpha: f64,
    pub decay_r_squared: f64,
    pub decay_points: usize,
    pub moment_tol: f64,
    pub moments: Vec<Moment>,
    pub l2_value: f64,
    pub l2_last_decade_ratio: f64,
    pub l2_converged: bool,
}

impl ClassificationReport {
    pub fn new(c: &Classification) -> Self {
        ClassificationReport {
            kind: c.kind.name(),
            decay_class: c.decay_class,
            a_limit: c.a_limit,
            limit_fit_b: c.limit_fit.b,
            limit_fit_rms: c.limit_fit.rms_residual,
            limit_fit_points: c.limit_fit.points,
            decay_alpha: c.decay.alpha,
            decay_r_squared: c.decay.r_squared,
            decay_points: c.decay.points,
            moment_tol: c.moment_tol,
            moments: c.moments.iter().map(|(a, v)| Moment { alpha: a.clone(), value: *v }).collect(),
            l2_value: c.l2.value,
            l2_last_decade_ratio: c.l2.last_decade_ratio,
            l2_converged: c.l2.converged(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NormRow {
    /// `V`, `W`, `K`, `kernel` or `state`.
    pub function: String,
    pub p: f64,
    pub q: String,
    pub value: Option<f64>,
    pub status: String,
}

pub fn norm_rows(function: &str, f: &zeromode_core::grid::SampledFunction, indices: &[IndexConfig]) -> Result<Vec<NormRow>, RunError> {
    use rayon::prelude::*;
    indices
        .par_iter()
        .map(|idx| {
            let (value, status) = match quasinorm(f, idx.index()?) {
                Ok(v) => (Some(v), "finite".to_string()),
                Err(Error::DivergentNorm(end)) => (None, format!("divergent_{end}")),
                Err(e) => return Err(RunError::Core(e)),
            };
            Ok(NormRow { function: function.to_string(), p: idx.p, q: idx.q.to_string(), value, status })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub spacing: f64,
    pub half_width: f64,
    pub relative_residual: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyReport {
    #[serde(flatten)]
    pub header: Header,
    pub decomposition: Option<DecompositionReport>,
    pub greens: Option<GreensReport>,
    pub solver: Option<SolverReport>,
    pub classification: Option<ClassificationReport>,
    pub norms: Vec<NormRow>,
    pub residual: Option<ResidualReport>,
    pub checks: Vec<Check>,
}

fn summary(z: &zeromode_core::zerostate::ZeroState) -> StateSummary {
    StateSummary { degree: z.degree, sigma_min: z.sigma_min, multiplicity: z.multiplicity, support_nodes: z.support.len() }
}

impl ClassifyReport {
    pub fn failed(cfg: &RunConfig, err: &RunError) -> Self {
        ClassifyReport {
            header: Header::new("classify", cfg, Some(err)),
            decomposition: None,
            greens: None,
            solver: None,
            classification: None,
            norms: Vec::new(),
            residual: None,
            checks: Vec::new(),
        }
    }

    pub fn new(cfg: &RunConfig, run: &ClassifyRun) -> Result<Self, RunError> {
        let n = cfg.dim;
        let p = &run.prepared;
        let d = &p.decomposition;
        let mut header = Header::new("classify", cfg, None);
        header.knobs.delta = Some(p.delta);
        header.knobs.solver_tol = Some(run.solver_tol);
        header.knobs.moment_tol = Some(run.moment_tol);
        let c_a_priori = a_priori_contraction(n, d.measured_w_norm);
        let greens = GreensReport {
            order: run.evaluator.order(),
            c_measured: run.evaluator.c_measured(),
            c_a_priori,
            tail_bound: run.evaluator.tail_bound(),
        };
        let c = &run.classification;
        let mut checks = vec![
            Check::at_most("w_norm <= delta", d.measured_w_norm, p.delta),
            Check::at_most("contraction_c <= contraction_target", d.contraction_c, cfg.decomposition.contraction_target),
            Check::at_most("c_measured <= 1.05 * c_a_priori", greens.c_measured, 1.05 * c_a_priori),
            Check::at_most("sigma_min <= solver_tol", run.state.sigma_min, run.solver_tol),
        ];
        let m0 = c.moments.get(&vec![0; n]).copied().unwrap_or(0.0);
        if c.kind == zeromode_core::asymptotics::StateKind::Resonance {
            let predicted = -kappa(n) * m0;
            checks.push(Check::at_most(
                "|a_limit + kappa_n * M_0| <= 0.02 * |kappa_n * M_0|",
                (c.a_limit - predicted).abs(),
                0.02 * predicted.abs(),
            ));
        }
        if let Some(r) = &run.residual {
            checks.push(Check::at_most("laplacian_residual <= 10 h^2 max|V|^2", r.value, r.bound));
        }
        let mut norms = norm_rows("V", &p.v, &cfg.norm_indices())?;
        let critical = [IndexConfig { p: n as f64 / 2.0, q: crate::config::Exponent::Finite(1.0) }];
        norms.extend(norm_rows("W", &d.w, &critical)?);
        norms.extend(norm_rows("K", &d.k, &critical)?);
        Ok(ClassifyReport {
            header,
            decomposition: Some(DecompositionReport::new(p)?),
            greens: Some(greens),
            solver: Some(SolverReport {
                tol: run.solver_tol,
                sigma_min_by_degree: run.scan.sigma_min.clone(),
                states: run.scan.states.iter().map(summary).collect(),
                selected: summary(&run.state),
                normalization: "max_abs_one_on_support",
            }),
            classification: Some(ClassificationReport::new(c)),
            norms,
            residual: run.residual.map(|r| ResidualReport {
                spacing: r.spacing,
                half_width: r.half_width,
                relative_residual: r.value,
                bound: r.bound,
            }),
            checks,
        })
    }
}

/// Wall-clock sidecar, kept out of `report.json` so reports stay reproducible.
#[derive(Debug, Clone, Serialize)]
pub struct TimingsReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub threads: usize,
    pub stages: Vec<Stage>,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Stage {
    pub stage: String,
    pub seconds: f64,
}

impl TimingsReport {
    pub fn new(command: &'static str, timings: &Timings) -> Self {
        TimingsReport {
            schema_version: SCHEMA_VERSION,
            command,
            threads: rayon::current_num_threads(),
            stages: timings.stages.iter().map(|(s, t)| Stage { stage: s.to_string(), seconds: *t }).collect(),
            total_seconds: timings.total(),
        }
    }
}
