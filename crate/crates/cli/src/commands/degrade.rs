use std::path::PathBuf;

use clap::Args;
use varmatch_core::{build_synthetic_corpus, extract_noise_patches, Corpus};

use super::{emit, set, set_opt, Output};
use crate::config::{require, RunConfig};
use crate::error::CliError;

#[derive(Debug, Clone, Default, Args)]
pub struct DegradeArgs {
    /// Directory of clean HR images.
    #[arg(long)]
    pub hr: Option<PathBuf>,
    /// Directory of real LR images to harvest noise from.
    #[arg(long)]
    pub noise_source: Option<PathBuf>,
    /// Output directory for the degraded images and `corpus_summary.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Windows with luminance variance below this become noise tiles.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub noise_patch: Option<usize>,
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long)]
    pub scale: Option<u32>,
}

impl DegradeArgs {
    pub fn resolve(&self, mut cfg: RunConfig) -> RunConfig {
        set_opt(&mut cfg.paths.hr_dir, &self.hr);
        set_opt(&mut cfg.paths.noise_dir, &self.noise_source);
        set_opt(&mut cfg.paths.out_dir, &self.out);
        let d = &mut cfg.degrade;
        set(&mut d.threshold, &self.threshold);
        set(&mut d.patch, &self.noise_patch);
        set(&mut d.stride, &self.stride);
        set(&mut d.scale, &self.scale);
        cfg
    }
}

pub(super) fn run(cfg: RunConfig) -> Result<Output, CliError> {
    let d = &cfg.degrade;
    if !(d.threshold.is_finite() && d.threshold > 0.0) {
        return Err(CliError::Config(format!("degrade.threshold must be positive, got {}", d.threshold)));
    }
    if d.scale == 0 || d.patch == 0 || d.stride == 0 {
        return Err(CliError::Config("degrade.scale, patch and stride must be at least 1".into()));
    }
    let hr_dir = require(&cfg.paths.hr_dir, "hr_dir")?;
    let noise_dir = require(&cfg.paths.noise_dir, "noise_dir")?;
    let out_dir = require(&cfg.paths.out_dir, "out_dir")?;

    let source = Corpus::load_dir(noise_dir)?;
    let bank = extract_noise_patches(&source, d.threshold, d.patch, d.stride)?;
    let summary = build_synthetic_corpus(hr_dir, out_dir, &bank, d.scale, cfg.sampler.seed)?;
    Ok(Output::ok(emit("degrade", &cfg, summary, None)?))
}
