use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use svakit::dataset::{BenchFraction, SynthSpec};
use svakit::equiv::BoundConfig;
use svakit::provider::HttpSettings;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Templates {
    pub annotation: Option<PathBuf>,
    pub generation: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Refinement {
    pub ser_threshold: f64,
    pub min_support: usize,
}

impl Default for Refinement {
    fn default() -> Self {
        Refinement {
            ser_threshold: 0.5,
            min_support: 10,
        }
    }
}

/// Contents of the JSON config file. Every field is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    /// `http`, `replay:<file>`, or `fixed:<file>`.
    pub provider: String,
    pub http: HttpSettings,
    pub bound: BoundConfig,
    pub split_fraction: BenchFraction,
    pub seed: u64,
    pub templates: Templates,
    /// Default dataset for `bench run`.
    pub dataset: Option<PathBuf>,
    pub refinement: Refinement,
    pub max_rounds: usize,
    pub annotate_retries: u32,
    pub synth: SynthSpec,
}

impl Default for CliConfig {
    fn default() -> Self {
        CliConfig {
            provider: "http".into(),
            http: HttpSettings::default(),
            bound: BoundConfig::default(),
            split_fraction: BenchFraction::default(),
            seed: 0,
            templates: Templates::default(),
            dataset: None,
            refinement: Refinement::default(),
            max_rounds: 3,
            annotate_retries: 2,
            synth: SynthSpec::default(),
        }
    }
}

impl CliConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(CliConfig::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        let r = &self.refinement;
        anyhow::ensure!(
            r.ser_threshold > 0.0 && r.ser_threshold <= 1.0,
            "refinement.ser_threshold must be in (0, 1]"
        );
        anyhow::ensure!(r.min_support >= 1, "refinement.min_support must be at least 1");
        anyhow::ensure!(self.max_rounds >= 1, "max_rounds must be at least 1");
        anyhow::ensure!(self.http.max_in_flight >= 1, "http.max_in_flight must be at least 1");
        Ok(())
    }
}

/// Reads a template file, or returns the built-in default.
pub fn template(path: Option<&Path>, default: &str) -> Result<String> {
    match path {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading template {}", p.display())),
        None => Ok(default.to_string()),
    }
}
