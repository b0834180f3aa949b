mod bench;
mod degrade;
mod metrics;
mod sample;
mod stats;
mod synth;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

pub use bench::BenchArgs;
pub use degrade::DegradeArgs;
pub use metrics::MetricsArgs;
pub use sample::SampleArgs;
pub use stats::StatsArgs;
pub use synth::SynthArgs;

#[derive(Debug, Parser)]
#[command(name = "varmatch", version, about = "Variance-matched LR/HR patch sampling")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML config file, or the JSON `config` object echoed by a previous run.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Run seed; overrides `sampler.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Histogram of patch variances and means over a corpus.
    Stats(StatsArgs),
    /// Sample variance-matched batches and write JSONL manifests.
    #[command(allow_negative_numbers = true)]
    Sample(SampleArgs),
    /// Build a synthetic LR corpus from HR images and a noise source.
    #[command(allow_negative_numbers = true)]
    Degrade(DegradeArgs),
    /// Per-image and mean PSNR/SSIM between two directories.
    Metrics(MetricsArgs),
    /// Throughput of patch statistics and batch sampling.
    Bench(BenchArgs),
    /// Write the bundled procedural LR/HR corpora.
    Synth(SynthArgs),
}

/// What a command printed, plus an error to exit with after printing.
#[derive(Debug)]
pub struct Output {
    pub json: String,
    pub failure: Option<CliError>,
}

impl Output {
    fn ok(json: String) -> Self {
        Output { json, failure: None }
    }
}

pub fn run(cli: &Cli) -> Result<Output, CliError> {
    let mut cfg = RunConfig::load_or_default(cli.common.config.as_deref())?;
    if let Some(seed) = cli.common.seed {
        cfg.sampler.seed = seed;
    }
    match &cli.command {
        Command::Stats(a) => stats::run(a.resolve(cfg)),
        Command::Sample(a) => sample::run(a.resolve(cfg)),
        Command::Degrade(a) => degrade::run(a.resolve(cfg)),
        Command::Metrics(a) => metrics::run(a.resolve(cfg)),
        Command::Bench(a) => bench::run(a.resolve(cfg)),
        Command::Synth(a) => synth::run(a, cfg, cli.common.seed.is_some()),
    }
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    command: &'a str,
    config: &'a RunConfig,
    result: T,
}

/// Renders the standard output document and optionally mirrors it to a file.
fn emit<T: Serialize>(command: &str, config: &RunConfig, result: T, file: Option<&Path>) -> Result<String, CliError> {
    let text = serde_json::to_string_pretty(&Report { command, config, result }).expect("report serialization");
    if let Some(path) = file {
        write_file(path, text.as_bytes())?;
    }
    Ok(text)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| output_error(dir, source))?;
    }
    std::fs::write(path, bytes).map_err(|source| output_error(path, source))
}

fn output_error(path: &Path, source: std::io::Error) -> CliError {
    CliError::Output { path: path.display().to_string(), source }
}

fn set<T>(slot: &mut T, flag: &Option<T>)
where
    T: Clone,
{
    if let Some(v) = flag {
        *slot = v.clone();
    }
}

fn set_opt<T: Clone>(slot: &mut Option<T>, flag: &Option<T>) {
    if flag.is_some() {
        *slot = flag.clone();
    }
}
