//! CSV and JSON writers. Column layouts are listed in `docs/output-schema.md`.

use std::fs;
use std::path::Path;

use serde::Serialize;
use zeromode_core::asymptotics::{MultipoleExpansion, TailSamples};

use crate::report::NormRow;
use crate::RunError;

/// One `lhs ≤ rhs` sample of a pairwise sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    /// Trailing columns, e.g. the series order or the expansion regime.
    pub extra: Vec<String>,
}

impl SweepRow {
    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }

    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

fn point(x: &[f64]) -> String {
    x.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

pub fn write_sweep(path: &Path, extra_columns: &[&str], rows: &[SweepRow]) -> Result<(), RunError> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["x", "y", "lhs", "rhs", "margin"];
    header.extend_from_slice(extra_columns);
    w.write_record(&header)?;
    for r in rows {
        let mut record = vec![point(&r.x), point(&r.y), r.lhs.to_string(), r.rhs.to_string(), r.margin().to_string()];
        record.extend(r.extra.iter().cloned());
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_tail(path: &Path, tail: &TailSamples) -> Result<(), RunError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["r", "psi_max", "psi_avg", "r_pow_n_minus_2_psi_avg"])?;
    let (max, avg, scaled) = (tail.psi_max(), tail.psi_avg(), tail.scaled_avg());
    for (i, r) in tail.radii().iter().enumerate() {
        w.write_record([r.to_string(), max[i].to_string(), avg[i].to_string(), scaled[i].to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_norms(path: &Path, rows: &[NormRow]) -> Result<(), RunError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["function", "p", "q", "value", "status"])?;
    for r in rows {
        let value = r.value.map_or_else(String::new, |v| v.to_string());
        w.write_record([r.function.clone(), r.p.to_string(), r.q.clone(), value, r.status.clone()])?;
    }
    w.flush()?;
    Ok(())
}

/// `d_k` rows carry an empty `l`; `c_kl` rows carry both indices.
pub fn write_multipole(path: &Path, tables: &[MultipoleExpansion]) -> Result<(), RunError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["order", "coefficient", "k", "l", "value"])?;
    for e in tables {
        for (k, d) in e.d.iter().enumerate() {
            w.write_record([e.order.to_string(), "d".into(), k.to_string(), String::new(), d.to_string()])?;
        }
        for (k, row) in e.c.iter().enumerate() {
            for (l, c) in row.iter().enumerate() {
                w.write_record([e.order.to_string(), "c".into(), k.to_string(), l.to_string(), c.to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), RunError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}
