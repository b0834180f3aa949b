use std::path::PathBuf;

use clap::Args;
use varmatch_core::report::corpus_stats;
use varmatch_core::Corpus;

use super::{emit, set, set_opt, Output};
use crate::config::{require, RunConfig};
use crate::error::CliError;

#[derive(Debug, Clone, Default, Args)]
pub struct StatsArgs {
    /// Directory of PNG images.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub patch: Option<usize>,
    #[arg(long)]
    pub stride: Option<usize>,
    /// Also write the report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl StatsArgs {
    pub fn resolve(&self, mut cfg: RunConfig) -> RunConfig {
        set_opt(&mut cfg.paths.corpus_dir, &self.corpus);
        set_opt(&mut cfg.paths.out_file, &self.out);
        set(&mut cfg.stats.patch, &self.patch);
        set(&mut cfg.stats.stride, &self.stride);
        cfg
    }
}

pub(super) fn run(cfg: RunConfig) -> Result<Output, CliError> {
    let dir = require(&cfg.paths.corpus_dir, "corpus_dir")?;
    let corpus = Corpus::load_dir(dir)?;
    let report = corpus_stats(&corpus, cfg.stats.patch, cfg.stats.stride)?;
    Ok(Output::ok(emit("stats", &cfg, report, cfg.paths.out_file.as_deref())?))
}
