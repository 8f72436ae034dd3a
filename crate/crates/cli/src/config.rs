//! Run configuration: a JSON document with nested sections, plus embedded presets.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use zeromode_core::greens::GreensOptions;
use zeromode_core::lorentz::LorentzIndex;
use zeromode_core::potential::{PotentialSpec, DEFAULT_BUDGET, DEFAULT_CONTRACTION_TARGET};

use crate::RunError;

pub const PRESETS: [(&str, &str); 3] = [
    ("radial3", include_str!("../presets/radial3.json")),
    ("dipole3", include_str!("../presets/dipole3.json")),
    ("radial5", include_str!("../presets/radial5.json")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dim: usize,
    pub potential: PotentialConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub decomposition: DecompositionConfig,
    #[serde(default)]
    pub greens: GreensConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub tail: TailConfig,
    #[serde(default)]
    pub classification: ClassificationConfig,
    #[serde(default)]
    pub norms: NormsConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir", skip_serializing)]
    pub output_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("zeromode-out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub kind: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub r_min: f64,
    pub r_max: f64,
    /// Logarithmic step `ln(r_{i+1}/r_i)`.
    pub log_step: f64,
    /// Optional tensor grid for the finite-difference residual of the extended state.
    pub tensor: Option<TensorConfig>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { r_min: 1e-4, r_max: 2e3, log_step: 0.1, tensor: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorConfig {
    pub spacing: f64,
    pub half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecompositionConfig {
    /// `None` selects `min(0.1‖V‖, δ at contraction_target)`.
    pub delta: Option<f64>,
    pub contraction_target: f64,
    pub budget: usize,
}

impl Default for DecompositionConfig {
    fn default() -> Self {
        DecompositionConfig { delta: None, contraction_target: DEFAULT_CONTRACTION_TARGET, budget: DEFAULT_BUDGET }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GreensConfig {
    pub series_tol: f64,
    pub max_channels: usize,
    pub probe_radii: usize,
    pub probe_angles: usize,
    pub headroom: f64,
    pub resolvent_channels: usize,
}

impl Default for GreensConfig {
    fn default() -> Self {
        let o = GreensOptions::default();
        GreensConfig {
            series_tol: o.series_tol,
            max_channels: o.max_channels,
            probe_radii: o.probe_radii,
            probe_angles: o.probe_angles,
            headroom: o.headroom,
            resolvent_channels: o.resolvent_channels,
        }
    }
}

impl GreensConfig {
    pub fn options(&self) -> GreensOptions {
        GreensOptions {
            series_tol: self.series_tol,
            max_channels: self.max_channels,
            probe_radii: self.probe_radii,
            probe_angles: self.probe_angles,
            headroom: self.headroom,
            resolvent_channels: self.resolvent_channels,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Harmonic degree of the state that is classified.
    pub degree: usize,
    /// Channels `0..=max_degree` are scanned and listed in the report.
    pub max_degree: usize,
    /// `None` selects the squared log step.
    pub tol: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { degree: 0, max_degree: 2, tol: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TailConfig {
    pub r_min: f64,
    pub r_max: f64,
}

impl Default for TailConfig {
    fn default() -> Self {
        TailConfig { r_min: 30.0, r_max: 1e3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ClassificationConfig {
    /// `None` selects `10 h² ∫|Vψ|`.
    pub moment_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NormTarget {
    #[default]
    Potential,
    /// `|x|^{2-n}`.
    Kernel,
    State,
}

/// Second Lorentz exponent; `"inf"` selects the weak space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Exponent {
    Finite(f64),
    Named(Infinity),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Infinity {
    #[serde(rename = "inf")]
    Inf,
}

impl Exponent {
    pub fn value(&self) -> f64 {
        match self {
            Exponent::Finite(q) => *q,
            Exponent::Named(Infinity::Inf) => f64::INFINITY,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(q) => write!(f, "{q}"),
            Exponent::Named(_) => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexConfig {
    pub p: f64,
    pub q: Exponent,
}

impl IndexConfig {
    pub fn index(&self) -> Result<LorentzIndex, RunError> {
        LorentzIndex::new(self.p, self.q.value()).map_err(RunError::Core)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormsConfig {
    pub target: NormTarget,
    /// Empty selects `(n/2,1)`, `(n/2,∞)`, `(n/(n−2),∞)` and `(1,∞)`.
    pub indices: Vec<IndexConfig>,
}

impl Default for NormsConfig {
    fn default() -> Self {
        NormsConfig { target: NormTarget::Potential, indices: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub gwg_pairs: usize,
    pub series_pairs: usize,
    pub series_orders: usize,
    pub resolvent_pairs: usize,
    /// Pairs per regime `|y| < |x|/2`, `|y| ≈ |x|`, `|y| > 2|x|`.
    pub expansion_pairs: usize,
    pub origin_rows: usize,
    pub contraction_probes: usize,
    /// Multiplier applied to `W` before the sweeps.
    pub w_scale: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            gwg_pairs: 100,
            series_pairs: 100,
            series_orders: 4,
            resolvent_pairs: 20,
            expansion_pairs: 1000,
            origin_rows: 4,
            contraction_probes: 16,
            w_scale: 1.0,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, RunError> {
        let mut de = serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let inner = e.inner();
            RunError::Config(format!("line {}, column {}, field `{}`: {}", inner.line(), inner.column(), e.path(), inner))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn preset(name: &str) -> Result<Self, RunError> {
        let (_, text) = PRESETS.iter().find(|(n, _)| *n == name).ok_or_else(|| RunError::Config(format!("unknown preset `{name}`")))?;
        RunConfig::parse(text)
    }

    pub fn validate(&self) -> Result<(), RunError> {
        let fail = |field: &str, why: &str| Err(RunError::Config(format!("field `{field}`: {why}")));
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if self.dim < 3 {
            return fail("dim", "must be at least 3");
        }
        if !positive(self.grid.r_min) || !(self.grid.r_max > self.grid.r_min) || !positive(self.grid.log_step) {
            return fail("grid", "need 0 < r_min < r_max and log_step > 0");
        }
        if let Some(t) = &self.grid.tensor {
            if !positive(t.spacing) || !(t.half_width > t.spacing) {
                return fail("grid.tensor", "need spacing > 0 and half_width > spacing");
            }
        }
        if self.decomposition.delta.is_some_and(|d| !positive(d)) {
            return fail("decomposition.delta", "must be positive");
        }
        if !(positive(self.decomposition.contraction_target) && self.decomposition.contraction_target < 0.5) {
            return fail("decomposition.contraction_target", "must lie in (0, 0.5)");
        }
        if self.decomposition.budget == 0 {
            return fail("decomposition.budget", "must be positive");
        }
        let g = &self.greens;
        if !positive(g.series_tol) || !positive(g.headroom) || g.max_channels == 0 || g.probe_radii == 0 || g.probe_angles == 0 {
            return fail("greens", "all parameters must be positive");
        }
        if self.solver.tol.is_some_and(|t| !positive(t)) {
            return fail("solver.tol", "must be positive");
        }
        if !positive(self.tail.r_min) || !(self.tail.r_max > self.tail.r_min) {
            return fail("tail", "need 0 < r_min < r_max");
        }
        if self.tail.r_max > self.grid.r_max {
            return fail("tail.r_max", "must not exceed grid.r_max");
        }
        if self.classification.moment_tol.is_some_and(|t| !positive(t)) {
            return fail("classification.moment_tol", "must be positive");
        }
        for (i, idx) in self.norms.indices.iter().enumerate() {
            if idx.index().is_err() {
                return fail(&format!("norms.indices[{i}]"), "need p in (0, inf) and q in (0, inf]");
            }
        }
        if !(self.verify.w_scale.is_finite() && self.verify.w_scale >= 0.0) {
            return fail("verify.w_scale", "must be finite and non-negative");
        }
        self.potential_spec()?;
        Ok(())
    }

    pub fn potential_spec(&self) -> Result<PotentialSpec, RunError> {
        if self.potential.kind == "custom_samples" {
            return Err(RunError::Config("field `potential.kind`: custom samples cannot be configured".into()));
        }
        PotentialSpec::from_kind(&self.potential.kind, self.potential.params.clone(), self.dim)
            .map_err(|e| RunError::Config(format!("field `potential`: {e}")))
    }

    pub fn norm_indices(&self) -> Vec<IndexConfig> {
        if !self.norms.indices.is_empty() {
            return self.norms.indices.clone();
        }
        let n = self.dim as f64;
        let inf = Exponent::Named(Infinity::Inf);
        vec![
            IndexConfig { p: n / 2.0, q: Exponent::Finite(1.0) },
            IndexConfig { p: n / 2.0, q: inf },
            IndexConfig { p: n / (n - 2.0), q: inf },
            IndexConfig { p: 1.0, q: inf },
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse() {
        for (name, _) in PRESETS {
            let cfg = RunConfig::preset(name).unwrap();
            assert!(cfg.dim >= 3);
        }
        assert_eq!(RunConfig::preset("dipole3").unwrap().solver.degree, 1);
    }

    #[test]
    fn parse_errors_name_the_field_and_line() {
        let text = "{\n  \"dim\": 3,\n  \"potential\": {\"kind\": \"inverse_design_radial\"},\n  \"grid\": {\"log_step\": \"x\"}\n}";
        let err = RunConfig::parse(text).unwrap_err().to_string();
        assert!(err.contains("line 4") && err.contains("grid.log_step"), "{err}");
        let unknown = "{\"dim\": 3, \"potential\": {\"kind\": \"inverse_design_radial\"}, \"gird\": {}}";
        assert!(RunConfig::parse(unknown).unwrap_err().to_string().contains("gird"));
    }

    #[test]
    fn semantic_validation() {
        let text = "{\"dim\": 2, \"potential\": {\"kind\": \"inverse_design_radial\"}}";
        assert!(RunConfig::parse(text).unwrap_err().to_string().contains("dim"));
        let text = "{\"dim\": 3, \"potential\": {\"kind\": \"nope\"}}";
        assert!(RunConfig::parse(text).unwrap_err().to_string().contains("potential"));
        let text = "{\"dim\": 3, \"potential\": {\"kind\": \"inverse_design_radial\"}, \"norms\": {\"indices\": [{\"p\": 3, \"q\": \"inf\"}, {\"p\": 3, \"q\": 3}]}}";
        let cfg = RunConfig::parse(text).unwrap();
        assert!(cfg.norms.indices[0].q.value().is_infinite());
        assert_eq!(cfg.norms.indices[1].q.value(), 3.0);
    }
}
