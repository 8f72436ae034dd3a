//! One function per subcommand. Each writes its files under `cfg.output_dir` and returns
//! the text printed on standard output.

use std::fmt::Write as _;
use std::fs;
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;
use zeromode_core::asymptotics::{calibrate_kappa_b, kappa_b, multipole_coeffs, MultipoleExpansion};
use zeromode_core::grid::{RadialGrid, SampledFunction};

use crate::config::{NormTarget, RunConfig};
use crate::output::{write_json, write_multipole, write_norms, write_sweep, write_tail};
use crate::pipeline::{run_classify, Timings};
use crate::report::{norm_rows, Check, ClassifyReport, GreensReport, Header, NormRow, TimingsReport};
use crate::verify::{run_verify, SweepSummary};
use crate::RunError;

/// Signature shared by the subcommands.
pub type Runner = fn(&RunConfig) -> Result<String, RunError>;

/// Grid sizes of the `κ_B` recalibration sweep.
pub const CALIBRATION_SWEEP: (usize, usize) = (601, 401);

fn failed<T: Serialize>(cfg: &RunConfig, command: &'static str, err: RunError, report: impl FnOnce(Header) -> T) -> RunError {
    let header = Header::new(command, cfg, Some(&err));
    match write_json(&cfg.output_dir.join("report.json"), &report(header)) {
        Ok(()) => err,
        Err(io) => io,
    }
}

fn finish(cfg: &RunConfig, command: &'static str, timings: &Timings, report: &impl Serialize) -> Result<(), RunError> {
    write_json(&cfg.output_dir.join("report.json"), report)?;
    write_json(&cfg.output_dir.join("timings.json"), &TimingsReport::new(command, timings))
}

pub fn classify(cfg: &RunConfig) -> Result<String, RunError> {
    fs::create_dir_all(&cfg.output_dir)?;
    let run = match run_classify(cfg) {
        Ok(run) => run,
        Err(e) => {
            write_json(&cfg.output_dir.join("report.json"), &ClassifyReport::failed(cfg, &e))?;
            return Err(e);
        }
    };
    let report = ClassifyReport::new(cfg, &run)?;
    write_tail(&cfg.output_dir.join("tail.csv"), &run.tail)?;
    write_norms(&cfg.output_dir.join("norms.csv"), &report.norms)?;
    finish(cfg, "classify", &run.timings, &report)?;
    let c = &run.classification;
    let mut out = String::new();
    writeln!(out, "kind          {}", c.kind.name()).ok();
    writeln!(out, "decay_class   {}", c.decay_class).ok();
    writeln!(out, "a_limit       {:.6}", c.a_limit).ok();
    writeln!(out, "decay_alpha   {:.4}", c.decay.alpha).ok();
    writeln!(out, "sigma_min     {:.3e} (degree {})", run.state.sigma_min, run.state.degree).ok();
    let failing: Vec<&Check> = report.checks.iter().filter(|c| !c.holds).collect();
    for check in &failing {
        writeln!(out, "check failed: {} ({} > {})", check.name, check.lhs, check.rhs).ok();
    }
    if failing.is_empty() {
        Ok(out)
    } else {
        Err(RunError::Violations(failing.len()))
    }
}

#[derive(Debug, Serialize)]
struct NormsReport {
    #[serde(flatten)]
    header: Header,
    target: NormTarget,
    rows: Vec<NormRow>,
}

fn norms_target(cfg: &RunConfig, timings: &mut Timings) -> Result<(&'static str, SampledFunction), RunError> {
    let n = cfg.dim;
    match cfg.norms.target {
        NormTarget::Potential => {
            let grid = Arc::new(RadialGrid::with_log_step(cfg.grid.r_min, cfg.grid.r_max, cfg.grid.log_step, n)?);
            Ok(("V", cfg.potential_spec()?.sample_radial(&grid)?))
        }
        NormTarget::Kernel => {
            let grid = Arc::new(RadialGrid::with_log_step(cfg.grid.r_min, cfg.grid.r_max, cfg.grid.log_step, n)?);
            Ok(("kernel", SampledFunction::from_profile(&grid, |r| r.powi(2 - n as i32))))
        }
        NormTarget::State => {
            let run = run_classify(cfg)?;
            timings.stages.extend(run.timings.stages);
            Ok(("state", run.state.psi))
        }
    }
}

pub fn norms(cfg: &RunConfig) -> Result<String, RunError> {
    fs::create_dir_all(&cfg.output_dir)?;
    let mut timings = Timings::default();
    let rows = match norms_target(cfg, &mut timings).and_then(|(function, f)| {
        let start = Instant::now();
        let rows = norm_rows(function, &f, &cfg.norm_indices());
        timings.stages.push(("norms", start.elapsed().as_secs_f64()));
        rows
    }) {
        Ok(rows) => rows,
        Err(e) => return Err(failed(cfg, "norms", e, |header| NormsReport { header, target: cfg.norms.target, rows: Vec::new() })),
    };
    write_norms(&cfg.output_dir.join("norms.csv"), &rows)?;
    let report = NormsReport { header: Header::new("norms", cfg, None), target: cfg.norms.target, rows };
    finish(cfg, "norms", &timings, &report)?;
    let mut out = format!("{:>10} {:>10} {:>24}  status\n", "p", "q", "value");
    for r in &report.rows {
        let value = r.value.map_or_else(|| "-".to_string(), |v| format!("{v:.10e}"));
        writeln!(out, "{:>10} {:>10} {:>24}  {}", r.p, r.q, value, r.status).ok();
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    #[serde(flatten)]
    header: Header,
    greens: Option<GreensReport>,
    sweeps: Vec<SweepSummary>,
    checks: Vec<Check>,
}

pub fn verify(cfg: &RunConfig) -> Result<String, RunError> {
    fs::create_dir_all(&cfg.output_dir)?;
    let run = match run_verify(cfg) {
        Ok(run) => run,
        Err(e) => {
            return Err(failed(cfg, "verify", e, |header| VerifyReport { header, greens: None, sweeps: Vec::new(), checks: Vec::new() }))
        }
    };
    for sweep in &run.sweeps {
        write_sweep(&cfg.output_dir.join(format!("{}.csv", sweep.name)), &sweep.extra_columns, &sweep.rows)?;
    }
    let violations = run.violations();
    let outcome = (violations > 0).then_some(RunError::Violations(violations));
    let mut header = Header::new("verify", cfg, outcome.as_ref());
    header.knobs.delta = Some(run.prepared.delta);
    let report = VerifyReport {
        header,
        greens: Some(GreensReport {
            order: run.evaluator.order(),
            c_measured: run.evaluator.c_measured(),
            c_a_priori: run.c_a_priori,
            tail_bound: run.evaluator.tail_bound(),
        }),
        sweeps: run.sweeps.iter().map(|s| s.summary()).collect(),
        checks: run.checks.clone(),
    };
    finish(cfg, "verify", &run.timings, &report)?;
    let mut out = String::new();
    for s in &report.sweeps {
        writeln!(out, "{:<12} rows {:>6}  violations {:>4}  worst lhs/rhs {:.4}", s.name, s.rows, s.violations, s.worst_ratio).ok();
    }
    for c in &report.checks {
        writeln!(out, "{:<40} {} ({} vs {})", c.name, if c.holds { "holds" } else { "FAILS" }, c.lhs, c.rhs).ok();
    }
    match outcome {
        None => Ok(out),
        Some(err) => Err(err),
    }
}

#[derive(Debug, Serialize)]
struct ExpansionTable {
    order: usize,
    d: Vec<f64>,
    c: Vec<Vec<f64>>,
    kappa_b_frozen: Option<f64>,
    /// Sup of the normalized error on the calibration sweep, before headroom.
    kappa_b_recalibrated: f64,
}

#[derive(Debug, Serialize)]
struct ExpandReport {
    #[serde(flatten)]
    header: Header,
    calibration_sweep: [usize; 2],
    tables: Vec<ExpansionTable>,
    checks: Vec<Check>,
}

pub fn expand(cfg: &RunConfig) -> Result<String, RunError> {
    fs::create_dir_all(&cfg.output_dir)?;
    let n = cfg.dim;
    let mut timings = Timings::default();
    let start = Instant::now();
    let built: Result<Vec<(MultipoleExpansion, Option<f64>, f64)>, RunError> = (0..=2)
        .map(|order| {
            let e = multipole_coeffs(order, n)?;
            let sup = calibrate_kappa_b(n, order, CALIBRATION_SWEEP.0, CALIBRATION_SWEEP.1)?;
            Ok((e, kappa_b(n, order).ok(), sup))
        })
        .collect();
    timings.stages.push(("calibrate", start.elapsed().as_secs_f64()));
    let built = match built {
        Ok(b) => b,
        Err(e) => {
            return Err(failed(cfg, "expand", e, |header| ExpandReport {
                header,
                calibration_sweep: [CALIBRATION_SWEEP.0, CALIBRATION_SWEEP.1],
                tables: Vec::new(),
                checks: Vec::new(),
            }))
        }
    };
    let expansions: Vec<MultipoleExpansion> = built.iter().map(|(e, _, _)| e.clone()).collect();
    write_multipole(&cfg.output_dir.join("multipole.csv"), &expansions)?;
    let checks = built
        .iter()
        .filter_map(|(e, frozen, sup)| frozen.map(|k| Check::at_most(format!("N={}: recalibrated sup <= kappa_b", e.order), *sup, k)))
        .collect();
    let report = ExpandReport {
        header: Header::new("expand", cfg, None),
        calibration_sweep: [CALIBRATION_SWEEP.0, CALIBRATION_SWEEP.1],
        tables: built
            .into_iter()
            .map(|(e, frozen, sup)| ExpansionTable { order: e.order, d: e.d, c: e.c, kappa_b_frozen: frozen, kappa_b_recalibrated: sup })
            .collect(),
        checks,
    };
    finish(cfg, "expand", &timings, &report)?;
    let mut out = String::new();
    for t in &report.tables {
        writeln!(out, "N={}  d = {:?}", t.order, t.d).ok();
        for (k, row) in t.c.iter().enumerate() {
            writeln!(out, "      c[{k}] = {row:?}").ok();
        }
        let frozen = t.kappa_b_frozen.map_or_else(|| "-".to_string(), |k| k.to_string());
        writeln!(out, "      kappa_b frozen {frozen}, recalibrated sup {:.4}", t.kappa_b_recalibrated).ok();
    }
    Ok(out)
}
