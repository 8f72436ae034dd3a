//! Configuration, pipelines and report writers behind the `zeromode` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;
pub mod pipeline;
pub mod report;
pub mod verify;

use std::io;

pub use config::RunConfig;

/// Version of the `report.json` layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] zeromode_core::Error),
    #[error("no zero state: smallest singular value {sigma_min:.3e} above tolerance {tol:.3e}")]
    NoZeroState { sigma_min: f64, tol: f64 },
    #[error("{0} inequality violations")]
    Violations(usize),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const BUDGET_EXHAUSTED: i32 = 3;
    pub const CONTRACTION_VIOLATED: i32 = 4;
    pub const NO_ZERO_STATE: i32 = 5;
    pub const INCONSISTENT_CLASSIFICATION: i32 = 6;
    pub const INEQUALITY_VIOLATED: i32 = 7;
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        use zeromode_core::Error as E;
        match self {
            RunError::Config(_) => exit::CONFIG,
            RunError::Core(E::BudgetExhausted { .. }) => exit::BUDGET_EXHAUSTED,
            RunError::Core(E::ContractionViolated(_)) => exit::CONTRACTION_VIOLATED,
            RunError::Core(E::InconsistentClassification { .. }) => exit::INCONSISTENT_CLASSIFICATION,
            RunError::NoZeroState { .. } => exit::NO_ZERO_STATE,
            RunError::Violations(_) => exit::INEQUALITY_VIOLATED,
            _ => exit::FAILURE,
        }
    }

    /// Short machine-readable status written to reports.
    pub fn status(&self) -> &'static str {
        use zeromode_core::Error as E;
        match self {
            RunError::Config(_) => "config_error",
            RunError::Core(E::BudgetExhausted { .. }) => "budget_exhausted",
            RunError::Core(E::ContractionViolated(_)) => "contraction_violated",
            RunError::Core(E::InconsistentClassification { .. }) => "inconsistent_classification",
            RunError::NoZeroState { .. } => "no_zero_state",
            RunError::Violations(_) => "inequality_violated",
            _ => "error",
        }
    }
}
