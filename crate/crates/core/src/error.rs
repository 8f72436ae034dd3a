use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Which end of the level range makes a quasinorm integral diverge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelEnd {
    /// Small values of `|f|`, i.e. a heavy tail at infinity.
    Low,
    /// Large values of `|f|`, i.e. a strong local singularity.
    High,
}

impl fmt::Display for LevelEnd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LevelEnd::Low => f.write_str("low"),
            LevelEnd::High => f.write_str("high"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid range: {0}")]
    InvalidRange(&'static str),
    #[error("input contains NaN")]
    NanInput,
    #[error("functions live on different grids")]
    GridMismatch,
    #[error("threshold must be non-negative, got {0}")]
    NegativeThreshold(f64),
    #[error("measure argument must be positive, got {0}")]
    NonpositiveMeasure(f64),
    #[error("invalid Lorentz index (p = {p}, q = {q})")]
    InvalidIndex { p: f64, q: f64 },
    #[error("quasinorm diverges at the {0} end of the level range")]
    DivergentNorm(LevelEnd),
    #[error("quasinorm overflowed")]
    Overflow,
    #[error("exponents do not satisfy the Hölder scaling relations")]
    ExponentMismatch,
    #[error("unknown potential kind `{0}`")]
    UnknownKind(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error(
        "decomposition budget exhausted after {rounds} rounds \
         (‖W‖ = {best_norm:.4e}, contraction {contraction:.4})"
    )]
    BudgetExhausted { rounds: usize, best_norm: f64, contraction: f64 },
    #[error("coincident points")]
    CoincidentPoints,
    #[error("contraction violated (ratio {0:.4})")]
    ContractionViolated(f64),
    #[error("operation requires an isotropic function on a radial grid")]
    RequiresRadial,
    #[error("operation requires a tensor grid")]
    RequiresTensor,
    #[error("insufficient tail samples ({0})")]
    InsufficientTail(usize),
    #[error("degenerate fit: tail samples underflow")]
    DegenerateFit,
    #[error("inconsistent classification: moments give decay {moment_class}, fit gives {fitted:.3}")]
    InconsistentClassification { moment_class: f64, fitted: f64 },
    #[error("linear algebra breakdown: {0}")]
    LinearAlgebra(&'static str),
}
