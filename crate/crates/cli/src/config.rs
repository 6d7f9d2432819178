//! Experiment configuration (JSON, `schema_version` 1, unknown keys rejected).

use std::path::Path;

use chainspread_core::analytic::EmissionModel;
use chainspread_core::chain::ChainSpec;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

/// Lead site, counted from the core boundary, whose amplitude feeds the
/// emission fit when none is configured.
pub const DEFAULT_EMISSION_SITE: i64 = 2;

/// Samples later than this are left out of the emission fit by default.
pub const DEFAULT_EMISSION_HORIZON: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub chain: ChainSpec,
    pub times: TimeGrid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emission: Option<EmissionSeed>,
    #[serde(default)]
    pub ensemble: EnsembleSpec,
    #[serde(default)]
    pub outputs: OutputSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub num_samples: usize,
    #[serde(default = "default_spacing")]
    pub spacing: Spacing,
}

fn default_spacing() -> Spacing {
    Spacing::Linear
}

/// Starting values for the emission fit run after each simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmissionSeed {
    pub beta: f64,
    pub tau: f64,
    pub gamma_mag: f64,
    /// Lead site offset `x >= 1` beyond the core boundary.
    #[serde(default = "default_emission_site")]
    pub site: i64,
    /// Last sample time used by the fit.
    #[serde(default = "default_emission_horizon")]
    pub fit_until: f64,
}

fn default_emission_horizon() -> f64 {
    DEFAULT_EMISSION_HORIZON
}

fn default_emission_site() -> i64 {
    DEFAULT_EMISSION_SITE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    #[serde(default = "default_realizations")]
    pub num_realizations: usize,
    /// Overrides `chain.disorder.seed` when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_seed: Option<u64>,
}

fn default_realizations() -> usize {
    1
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self {
            num_realizations: 1,
            base_seed: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_directory")]
    pub directory: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
}

fn default_directory() -> String {
    "out".into()
}

fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Csv, OutputFormat::Json]
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            directory: default_directory(),
            formats: default_formats(),
        }
    }
}

impl OutputSpec {
    pub fn wants(&self, format: OutputFormat) -> bool {
        self.formats.contains(&format)
    }
}

impl ExperimentConfig {
    /// Reads and validates a config file. Parse errors carry line and column.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| {
            CliError::Config(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |field: &str, msg: String| Err(CliError::Config(format!("{field}: {msg}")));
        if self.schema_version != SCHEMA_VERSION {
            return bad(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, got {}", self.schema_version),
            );
        }
        if let Err(e) = self.chain.validate() {
            return bad("chain", e.to_string());
        }

        let t = &self.times;
        if !(t.t_start.is_finite() && t.t_end.is_finite()) {
            return bad("times", "t_start and t_end must be finite".into());
        }
        if t.t_start < 0.0 {
            return bad("times.t_start", format!("must be >= 0, got {}", t.t_start));
        }
        if t.num_samples == 0 {
            return bad("times.num_samples", "must be >= 1".into());
        }
        if t.num_samples == 1 {
            if t.t_end != t.t_start {
                return bad(
                    "times.t_end",
                    "a single sample requires t_end == t_start".into(),
                );
            }
        } else if t.t_end <= t.t_start {
            return bad(
                "times.t_end",
                format!("must exceed t_start ({} <= {})", t.t_end, t.t_start),
            );
        }
        if t.spacing == Spacing::Log && t.t_start <= 0.0 {
            return bad("times.spacing", "log spacing requires t_start > 0".into());
        }

        if self.ensemble.num_realizations == 0 {
            return bad("ensemble.num_realizations", "must be >= 1".into());
        }
        if let Some(seed) = &self.emission {
            if seed.site < 1 {
                return bad("emission.site", format!("must be >= 1, got {}", seed.site));
            }
            if !(seed.fit_until > 0.0) {
                return bad(
                    "emission.fit_until",
                    format!("must be > 0, got {}", seed.fit_until),
                );
            }
            if let Err(e) = self.emission_model(seed) {
                return bad("emission", e.to_string());
            }
        }
        if self.outputs.directory.is_empty() {
            return bad("outputs.directory", "must not be empty".into());
        }
        Ok(())
    }

    pub fn emission_model(&self, seed: &EmissionSeed) -> chainspread_core::Result<EmissionModel> {
        EmissionModel::new(
            seed.beta,
            seed.tau,
            seed.gamma_mag,
            self.chain.disorder.half_width,
        )
    }

    /// Sample times; both endpoints are hit exactly.
    pub fn sample_times(&self) -> Vec<f64> {
        let t = &self.times;
        let n = t.num_samples;
        if n == 1 {
            return vec![t.t_start];
        }
        let last = (n - 1) as f64;
        let mut times: Vec<f64> = match t.spacing {
            Spacing::Linear => (0..n)
                .map(|i| t.t_start + (t.t_end - t.t_start) * (i as f64 / last))
                .collect(),
            Spacing::Log => {
                let (a, b) = (t.t_start.ln(), t.t_end.ln());
                (0..n)
                    .map(|i| (a + (b - a) * (i as f64 / last)).exp())
                    .collect()
            }
        };
        times[0] = t.t_start;
        times[n - 1] = t.t_end;
        times
    }

    /// Seed precedence: command line, then `ensemble.base_seed`, then the
    /// disorder spec's own seed.
    pub fn effective_seed(&self, cli_seed: Option<u64>) -> u64 {
        cli_seed
            .or(self.ensemble.base_seed)
            .unwrap_or(self.chain.disorder.seed)
    }

    /// The chain spec with the effective seed written into it.
    pub fn effective_chain(&self, cli_seed: Option<u64>) -> ChainSpec {
        let mut chain = self.chain.clone();
        chain.disorder.seed = self.effective_seed(cli_seed);
        chain
    }
}
