//! Experiment configuration: a flat, diff-friendly `key = value` text format
//! with one nested section per module, plus dotted-path overrides.

use serde::{Deserialize, Serialize};

use fraclab::evolve::SolverConfig;
use fraclab::grid::GridSpec;
use fraclab::model::ModelParams;
use fraclab::{FracError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Kernel,
    Operator,
    Evolve,
    Dichotomy,
    Trace,
    Barrier,
    Blowup,
    Admissibility,
    Harnack,
    Selftest,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Kernel => "kernel",
            Experiment::Operator => "operator",
            Experiment::Evolve => "evolve",
            Experiment::Dichotomy => "dichotomy",
            Experiment::Trace => "trace",
            Experiment::Barrier => "barrier",
            Experiment::Blowup => "blowup",
            Experiment::Admissibility => "admissibility",
            Experiment::Harnack => "harnack",
            Experiment::Selftest => "selftest",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_s")]
    pub s: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default = "default_p")]
    pub p: f64,
}

fn default_dim() -> usize {
    1
}
fn default_s() -> f64 {
    0.5
}
fn default_p() -> f64 {
    1.8
}

impl Default for ParamsSection {
    fn default() -> Self {
        Self { dim: 1, s: 0.5, beta: 0.0, p: 1.8 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_half_length")]
    pub half_length: f64,
    #[serde(default = "default_n_per_dim")]
    pub n_per_dim: usize,
    #[serde(default = "default_t_start")]
    pub t_start: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_n_steps")]
    pub n_steps: usize,
    #[serde(default = "default_n_snapshots")]
    pub n_snapshots: usize,
    #[serde(default = "default_true")]
    pub absorption: bool,
}

fn default_half_length() -> f64 {
    8.0
}
fn default_n_per_dim() -> usize {
    32768
}
fn default_t_start() -> f64 {
    1e-3
}
fn default_t_end() -> f64 {
    1.0
}
fn default_n_steps() -> usize {
    384
}
fn default_n_snapshots() -> usize {
    33
}
fn default_true() -> bool {
    true
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            half_length: default_half_length(),
            n_per_dim: default_n_per_dim(),
            t_start: default_t_start(),
            t_end: default_t_end(),
            n_steps: default_n_steps(),
            n_snapshots: default_n_snapshots(),
            absorption: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    #[serde(default = "default_max_radius")]
    pub max_radius: f64,
    #[serde(default = "default_n_samples")]
    pub n_samples: usize,
}

fn default_max_radius() -> f64 {
    400.0
}
fn default_n_samples() -> usize {
    4096
}

impl Default for KernelSection {
    fn default() -> Self {
        Self { max_radius: default_max_radius(), n_samples: default_n_samples() }
    }
}

/// Per-experiment knobs. Unused fields are simply ignored by the other
/// experiments, so one config can drive the whole battery.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsSection {
    /// Dirac weight (dichotomy, trace, harnack, evolve with datum = "dirac").
    #[serde(default = "default_weight")]
    pub weight: f64,
    /// Saturate the Dirac weight by doubling instead of using it directly.
    #[serde(default = "default_true")]
    pub saturate: bool,
    /// Initial datum of the evolve experiment: gaussian | dirac | indicator.
    #[serde(default = "default_datum")]
    pub datum: String,
    /// Indicator level and radius (evolve with datum = "indicator").
    #[serde(default = "default_one")]
    pub level: f64,
    #[serde(default = "default_one")]
    pub radius: f64,
    /// Ball centers and radius of the trace experiment.
    #[serde(default = "default_centers")]
    pub ball_centers: Vec<f64>,
    #[serde(default = "default_half")]
    pub ball_radius: f64,
    /// Harnack window parameter.
    #[serde(default = "default_one")]
    pub theta: f64,
    /// Growth exponent and truncation list of the blow-up experiment.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_n_list")]
    pub n_list: Vec<f64>,
    /// Barrier scan range, sample count, and residual tolerance.
    #[serde(default = "default_z_max")]
    pub z_max: f64,
    #[serde(default = "default_scan_samples")]
    pub scan_samples: usize,
    #[serde(default = "default_tol")]
    pub residual_tol: f64,
    /// Admissibility epsilon decades (smallest epsilon = 10^-decades).
    #[serde(default = "default_decades")]
    pub eps_decades: usize,
}

fn default_weight() -> f64 {
    64.0
}
fn default_datum() -> String {
    "gaussian".to_string()
}
fn default_one() -> f64 {
    1.0
}
fn default_half() -> f64 {
    0.5
}
fn default_centers() -> Vec<f64> {
    vec![0.0, 3.0]
}
fn default_alpha() -> f64 {
    3.0
}
fn default_n_list() -> Vec<f64> {
    vec![4.0, 16.0, 64.0, 160.0]
}
fn default_z_max() -> f64 {
    50.0
}
fn default_scan_samples() -> usize {
    1000
}
fn default_tol() -> f64 {
    1e-6
}
fn default_decades() -> usize {
    6
}

impl Default for OptionsSection {
    fn default() -> Self {
        toml::from_str("").expect("empty options deserialize to defaults")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: Option<Experiment>,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    #[serde(default)]
    pub params: ParamsSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub kernel: KernelSection,
    #[serde(default)]
    pub options: OptionsSection,
    /// Analysis threshold overrides, by field name.
    #[serde(default)]
    pub thresholds: std::collections::BTreeMap<String, f64>,
}

fn default_output_dir() -> String {
    "fraclab-out".to_string()
}

impl ExperimentConfig {
    /// Parse config text, apply dotted-path overrides, and deserialize.
    pub fn from_text(text: &str, overrides: &[String]) -> Result<Self> {
        let bad = |m: String| FracError::ConfigError(m);
        let mut value: toml::Value = toml::Value::Table(
            text.parse::<toml::Table>()
                .map_err(|e| bad(format!("config parse error: {e}")))?,
        );
        for ov in overrides {
            let (path, raw) = ov
                .split_once('=')
                .ok_or_else(|| bad(format!("override '{ov}' is not key=value")))?;
            let parsed: toml::Value = match format!("x = {}", raw.trim()).parse::<toml::Table>() {
                Ok(t) => t["x"].clone(),
                Err(_) => toml::Value::String(raw.trim().to_string()),
            };
            let mut cursor = &mut value;
            let parts: Vec<&str> = path.trim().split('.').collect();
            for (i, part) in parts.iter().enumerate() {
                let table = cursor
                    .as_table_mut()
                    .ok_or_else(|| bad(format!("override path '{path}' crosses a non-table")))?;
                if i + 1 == parts.len() {
                    table.insert(part.to_string(), parsed.clone());
                    break;
                }
                cursor = table
                    .entry(part.to_string())
                    .or_insert(toml::Value::Table(Default::default()));
            }
        }
        let config: ExperimentConfig =
            value.try_into().map_err(|e| bad(format!("config error: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    /// Serialize back to the text format (round-trippable, embedded in reports).
    pub fn to_text(&self) -> String {
        toml::to_string_pretty(self).expect("config serialization is infallible")
    }

    pub fn model_params(&self) -> Result<ModelParams> {
        ModelParams::new(self.params.dim, self.params.s, self.params.beta, self.params.p)
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        let grid =
            GridSpec::new(self.params.dim, self.solver.half_length, self.solver.n_per_dim)?;
        let mut config =
            SolverConfig::new(grid, self.solver.t_start, self.solver.t_end, self.solver.n_steps);
        config.n_snapshots = self.solver.n_snapshots;
        config.absorption_enabled = self.solver.absorption;
        Ok(config)
    }

    pub fn thresholds(&self) -> Result<fraclab::analysis::AnalysisThresholds> {
        let mut th = fraclab::analysis::AnalysisThresholds::default();
        for (key, &value) in &self.thresholds {
            match key.as_str() {
                "profile_match" => th.profile_match = value,
                "constancy_window" => th.constancy_window = value,
                "variation_window" => th.variation_window = value,
                "variation_factor" => th.variation_factor = value,
                "mass_growth_factor" => th.mass_growth_factor = value,
                "stabilize_tail" => th.stabilize_tail = value,
                "diverge_ratio" => th.diverge_ratio = value,
                other => {
                    return Err(FracError::ConfigError(format!(
                        "unknown threshold '{other}'"
                    )))
                }
            }
        }
        Ok(th)
    }

    /// Early validation: model parameters, grid, and the wraparound guard.
    pub fn validate(&self) -> Result<()> {
        let params = self.model_params()?;
        self.solver_config()?.validate(params.s)?;
        self.thresholds()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_and_validate() {
        let c = ExperimentConfig::from_text("", &[]).unwrap();
        assert_eq!(c.params.dim, 1);
        assert!(c.experiment.is_none());
    }

    #[test]
    fn overrides_apply_dotted_paths() {
        let c = ExperimentConfig::from_text(
            "experiment = \"dichotomy\"",
            &["params.p=1.4".into(), "solver.n_steps=64".into(), "options.saturate=false".into()],
        )
        .unwrap();
        assert_eq!(c.experiment, Some(Experiment::Dichotomy));
        assert_eq!(c.params.p, 1.4);
        assert_eq!(c.solver.n_steps, 64);
        assert!(!c.options.saturate);
    }

    #[test]
    fn round_trip_through_text() {
        let c = ExperimentConfig::from_text("[params]\np = 2.2\n", &[]).unwrap();
        let c2 = ExperimentConfig::from_text(&c.to_text(), &[]).unwrap();
        assert_eq!(c2.params.p, 2.2);
    }

    #[test]
    fn wraparound_guard_rejected_early() {
        let err = ExperimentConfig::from_text("[solver]\nhalf_length = 2.0\n", &[]);
        assert!(err.is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_text("typo_key = 1\n", &[]).is_err());
    }
}
