//! Run configuration: TOML file plus command-line overrides.
//!
//! Unknown keys are rejected at every level. The resolved configuration is
//! echoed by every command and can be fed back with `--config` to reproduce
//! the run.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use varmatch_core::SamplerConfig;

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lr_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hr_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corpus_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pred_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ref_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleSection {
    pub batches: usize,
    /// Thresholds to sweep; empty means a single run at `sampler.sigma_t_sq`.
    pub sweep: Vec<f64>,
}

impl Default for SampleSection {
    fn default() -> Self {
        SampleSection { batches: 10, sweep: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsSection {
    pub patch: usize,
    pub stride: usize,
}

impl Default for StatsSection {
    fn default() -> Self {
        StatsSection { patch: 32, stride: 32 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DegradeSection {
    pub threshold: f64,
    pub patch: usize,
    pub stride: usize,
    pub scale: u32,
}

impl Default for DegradeSection {
    fn default() -> Self {
        DegradeSection { threshold: 20.0, patch: 32, stride: 32, scale: 4 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsSection {
    /// Pixels shaved from every border before measuring.
    pub crop: usize,
    /// Measure PSNR on BT.601 luminance instead of all channels.
    pub luma: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSection {
    pub warmup: usize,
    pub iters: usize,
    pub patch: usize,
    pub batches: usize,
}

impl Default for BenchSection {
    fn default() -> Self {
        BenchSection { warmup: 200, iters: 2000, patch: 128, batches: 50 }
    }
}

/// Everything a command needs. `sampler.seed` is the run seed for every
/// seeded command.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub paths: Paths,
    pub sampler: SamplerConfig,
    pub sample: SampleSection,
    pub stats: StatsSection,
    pub degrade: DegradeSection,
    pub metrics: MetricsSection,
    pub bench: BenchSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Self::parse_json(&text)
        } else {
            Self::parse(&text)
        }
    }

    /// Accepts the `config` object echoed in command output.
    pub fn parse_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load_or_default(path: Option<&Path>) -> Result<Self, CliError> {
        path.map_or_else(|| Ok(RunConfig::default()), RunConfig::load)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialization")
    }
}

/// Fetches a required path or reports which key is missing.
pub fn require<'a>(p: &'a Option<PathBuf>, key: &str) -> Result<&'a Path, CliError> {
    p.as_deref().ok_or_else(|| CliError::Config(format!("missing path: pass the flag or set paths.{key}")))
}
