//! Seeded inequality sweeps over the configured remainder `W`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use zeromode_core::asymptotics::{contraction_estimate, expansion_error};
use zeromode_core::greens::{a_priori_contraction, gwg_bound, GreensEvaluator};
use zeromode_core::grid::SampledFunction;
use zeromode_core::potential::Decomposition;

use crate::config::RunConfig;
use crate::output::SweepRow;
use crate::pipeline::{evaluator, prepare, Prepared, Timings};
use crate::report::Check;
use crate::RunError;

/// Relative tolerance of the second-resolvent self-consistency check.
pub const RESOLVENT_TOL: f64 = 1e-3;

/// Ratio `|y|/|x|` ranges of the expansion regimes.
pub const REGIMES: [(&str, f64, f64); 3] = [("inner", 1e-3, 0.5), ("comparable", 0.5, 2.0), ("outer", 2.0, 1e3)];

#[derive(Debug, Clone)]
pub struct Sweep {
    pub name: &'static str,
    pub extra_columns: Vec<&'static str>,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub name: &'static str,
    pub rows: usize,
    pub violations: usize,
    /// Largest `lhs/rhs`, with `0/0` read as 0.
    pub worst_ratio: f64,
}

impl Sweep {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| !r.holds()).count()
    }

    pub fn summary(&self) -> SweepSummary {
        let worst_ratio = self.rows.iter().map(|r| if r.lhs == 0.0 { 0.0 } else { r.lhs / r.rhs }).fold(0.0f64, f64::max);
        SweepSummary { name: self.name, rows: self.rows.len(), violations: self.violations(), worst_ratio }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyRun {
    pub prepared: Prepared,
    pub w: SampledFunction,
    pub evaluator: GreensEvaluator,
    pub c_a_priori: f64,
    pub sweeps: Vec<Sweep>,
    pub checks: Vec<Check>,
    pub timings: Timings,
}

impl VerifyRun {
    pub fn violations(&self) -> usize {
        self.sweeps.iter().map(Sweep::violations).sum::<usize>() + self.checks.iter().filter(|c| !c.holds).count()
    }
}

fn direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let d: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let len = d.iter().map(|c| c * c).sum::<f64>().sqrt();
        if len > 0.1 && len <= 1.0 {
            return d.into_iter().map(|c| c / len).collect();
        }
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo.ln()..hi.ln()).exp()
}

fn point(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let r = log_uniform(rng, lo, hi);
    direction(rng, n).into_iter().map(|c| c * r).collect()
}

/// Pairs with radii log-uniform in `[0.05, 50]`.
pub fn random_pairs(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    (0..count).map(|_| (point(rng, n, 0.05, 50.0), point(rng, n, 0.05, 50.0))).collect()
}

fn gwg_sweep(w: &SampledFunction, pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<Sweep, RunError> {
    let rows = pairs
        .par_iter()
        .map(|(x, y)| {
            let (lhs, rhs) = gwg_bound(w, x, y)?;
            Ok(SweepRow { x: x.clone(), y: y.clone(), lhs, rhs, extra: Vec::new() })
        })
        .collect::<Result<Vec<_>, RunError>>()?;
    Ok(Sweep { name: "gwg", extra_columns: Vec::new(), rows })
}

fn series_sweep(ev: &GreensEvaluator, pairs: &[(Vec<f64>, Vec<f64>)], orders: usize) -> Result<Sweep, RunError> {
    let c = ev.c_measured();
    let rows = pairs
        .par_iter()
        .map(|(x, y)| {
            let terms = ev.order_terms(x, y, orders)?;
            Ok((1..=orders)
                .map(|j| SweepRow {
                    x: x.clone(),
                    y: y.clone(),
                    lhs: terms[j].abs() / terms[0],
                    rhs: c.powi(j as i32),
                    extra: vec![j.to_string()],
                })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>, RunError>>()?;
    Ok(Sweep { name: "series", extra_columns: vec!["order"], rows: rows.into_iter().flatten().collect() })
}

fn resolvent_sweep(ev: &GreensEvaluator, pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<Sweep, RunError> {
    let rows = ev
        .resolvent_check(pairs)?
        .into_iter()
        .zip(pairs)
        .map(|(s, (x, y))| SweepRow {
            x: x.clone(),
            y: y.clone(),
            lhs: s.relative_gap(),
            rhs: RESOLVENT_TOL,
            extra: vec![s.series.to_string(), s.identity.to_string()],
        })
        .collect();
    Ok(Sweep { name: "resolvent", extra_columns: vec!["series", "identity"], rows })
}

fn expansion_sweep(rng: &mut ChaCha8Rng, n: usize, per_regime: usize, origin_rows: usize) -> Result<Sweep, RunError> {
    let mut cases = Vec::with_capacity(3 * per_regime + origin_rows);
    for (regime, lo, hi) in REGIMES {
        for _ in 0..per_regime {
            let x = point(rng, n, 0.1, 10.0);
            let s = log_uniform(rng, lo, hi) * zeromode_core::special::norm(&x);
            let y: Vec<f64> = direction(rng, n).into_iter().map(|c| c * s).collect();
            cases.push((regime, x, y));
        }
    }
    for _ in 0..origin_rows {
        cases.push(("origin", point(rng, n, 0.1, 10.0), vec![0.0; n]));
    }
    let rows = cases
        .par_iter()
        .map(|(regime, x, y)| {
            (0..=2)
                .map(|order| {
                    let (lhs, rhs) = expansion_error(x, y, order, n)?;
                    Ok(SweepRow { x: x.clone(), y: y.clone(), lhs, rhs, extra: vec![order.to_string(), regime.to_string()] })
                })
                .collect::<Result<Vec<_>, RunError>>()
        })
        .collect::<Result<Vec<_>, RunError>>()?;
    Ok(Sweep { name: "expansion", extra_columns: vec!["order", "regime"], rows: rows.into_iter().flatten().collect() })
}

fn contraction_sweep(dec: &Decomposition, probes: usize, seed: u64) -> Result<Sweep, RunError> {
    let n = dec.w.dim();
    let cutoff = 2.0 * dec.support_radius.max(1.0);
    let cases: Vec<(usize, f64)> = (0..=2).flat_map(|order| [(order, (order + n - 2) as f64), (order, (order + n - 1) as f64)]).collect();
    let rows = cases
        .par_iter()
        .map(|&(order, alpha)| {
            let estimate = contraction_estimate(dec, alpha, order, cutoff, probes, seed)?;
            Ok(SweepRow {
                x: Vec::new(),
                y: Vec::new(),
                lhs: estimate,
                rhs: 1.0,
                extra: vec![order.to_string(), alpha.to_string(), cutoff.to_string()],
            })
        })
        .collect::<Result<Vec<_>, RunError>>()?;
    Ok(Sweep { name: "contraction", extra_columns: vec!["order", "alpha", "cutoff"], rows })
}

pub fn run_verify(cfg: &RunConfig) -> Result<VerifyRun, RunError> {
    let mut timings = Timings::default();
    let prepared = prepare(cfg, &mut timings)?;
    let n = cfg.dim;
    let v = &cfg.verify;
    let mut dec = prepared.decomposition.clone();
    dec.w = dec.w.scaled(v.w_scale);
    let w = dec.w.clone();
    let evaluator = evaluator(cfg, &w, &mut timings)?;
    let c_a_priori = a_priori_contraction(n, v.w_scale * prepared.decomposition.measured_w_norm);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let gwg_pairs = random_pairs(&mut rng, n, v.gwg_pairs);
    let series_pairs = random_pairs(&mut rng, n, v.series_pairs);
    let resolvent_pairs = random_pairs(&mut rng, n, v.resolvent_pairs);
    let start = std::time::Instant::now();
    let mut sweeps = vec![
        gwg_sweep(&w, &gwg_pairs)?,
        series_sweep(&evaluator, &series_pairs, v.series_orders)?,
        resolvent_sweep(&evaluator, &resolvent_pairs)?,
        expansion_sweep(&mut rng, n, v.expansion_pairs, v.origin_rows)?,
    ];
    sweeps.push(contraction_sweep(&dec, v.contraction_probes, cfg.seed)?);
    timings.stages.push(("sweeps", start.elapsed().as_secs_f64()));

    let origin_lhs = sweeps[3].rows.iter().filter(|r| r.extra.last().is_some_and(|g| g == "origin")).map(|r| r.lhs).fold(0.0f64, f64::max);
    let checks = vec![
        Check::at_most("c_measured <= 1.05 * c_a_priori", evaluator.c_measured(), 1.05 * c_a_priori),
        Check::at_most("max expansion lhs at y = 0 <= 0", origin_lhs, 0.0),
    ];
    Ok(VerifyRun { prepared, w, evaluator, c_a_priori, sweeps, checks, timings })
}
