use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use varmatch_core::manifest::manifest_string;
use varmatch_core::sampler::{mean_variance_gap, SampleOutcome};
use varmatch_core::{Corpus, Error, PairSampler, SamplerConfig};

use super::{emit, set, set_opt, write_file, Output};
use crate::config::{require, RunConfig};
use crate::error::CliError;

#[derive(Debug, Clone, Default, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub lr: Option<PathBuf>,
    #[arg(long)]
    pub hr: Option<PathBuf>,
    /// Output directory for manifests, `config.toml` and `summary.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub batches: Option<usize>,
    #[arg(long)]
    pub sigma_t_sq: Option<f64>,
    #[arg(long)]
    pub mu_t: Option<f64>,
    #[arg(long)]
    pub lr_patch: Option<usize>,
    #[arg(long)]
    pub hr_patch: Option<usize>,
    #[arg(long)]
    pub scale: Option<u32>,
    #[arg(long)]
    pub n_lr: Option<usize>,
    #[arg(long)]
    pub n_hr: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub max_retries: Option<usize>,
    /// Comma-separated thresholds; each gets its own `sigma_<v>` subdirectory.
    #[arg(long, value_delimiter = ',')]
    pub sweep: Option<Vec<f64>>,
}

impl SampleArgs {
    pub fn resolve(&self, mut cfg: RunConfig) -> RunConfig {
        set_opt(&mut cfg.paths.lr_dir, &self.lr);
        set_opt(&mut cfg.paths.hr_dir, &self.hr);
        set_opt(&mut cfg.paths.out_dir, &self.out);
        set(&mut cfg.sample.batches, &self.batches);
        set(&mut cfg.sample.sweep, &self.sweep);
        let s = &mut cfg.sampler;
        set(&mut s.sigma_t_sq, &self.sigma_t_sq);
        set_opt(&mut s.mu_t, &self.mu_t);
        set(&mut s.lr_patch, &self.lr_patch);
        set(&mut s.hr_patch, &self.hr_patch);
        set(&mut s.scale, &self.scale);
        set(&mut s.n_lr, &self.n_lr);
        set(&mut s.n_hr, &self.n_hr);
        set(&mut s.batch_size, &self.batch_size);
        set(&mut s.max_retries, &self.max_retries);
        cfg
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BatchSummary {
    pub index: usize,
    pub pairs: usize,
    pub starved: bool,
    pub retries_used: usize,
    pub rounds: usize,
    pub admissible_fraction: f64,
    pub mean_variance_gap: f64,
}

/// Yield statistics of one threshold.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub sigma_t_sq: f64,
    pub mu_t: Option<f64>,
    pub batches: usize,
    pub starved_batches: usize,
    pub pairs: usize,
    /// Admissible pairs over evaluated pairs across every round.
    pub admissible_fraction: f64,
    /// The same fraction restricted to the first round of each batch. First
    /// rounds see identical candidates at every threshold, so this is
    /// monotone in the threshold.
    pub probe_admissible_fraction: f64,
    pub total_retries: usize,
    pub mean_retries: f64,
    pub mean_variance_gap: f64,
    pub manifest_dir: String,
    pub per_batch: Vec<BatchSummary>,
}

#[derive(Serialize)]
#[serde(untagged)]
enum SampleResult {
    Single(RunSummary),
    Sweep { runs: Vec<RunSummary> },
}

pub(super) fn run(cfg: RunConfig) -> Result<Output, CliError> {
    cfg.sampler.validate()?;
    for &s in &cfg.sample.sweep {
        SamplerConfig { sigma_t_sq: s, ..cfg.sampler.clone() }.validate()?;
    }
    if cfg.sample.batches == 0 {
        return Err(CliError::Config("sample.batches must be at least 1".into()));
    }
    let out_dir = require(&cfg.paths.out_dir, "out_dir")?.to_path_buf();
    let lr = Arc::new(Corpus::load_dir(require(&cfg.paths.lr_dir, "lr_dir")?)?);
    let hr = Arc::new(Corpus::load_dir(require(&cfg.paths.hr_dir, "hr_dir")?)?);

    write_file(&out_dir.join("config.toml"), cfg.to_toml().as_bytes())?;
    let (result, starved, total) = if cfg.sample.sweep.is_empty() {
        let s = run_one(&lr, &hr, &cfg.sampler, cfg.sample.batches, &out_dir)?;
        let (n, t) = (s.starved_batches, s.batches);
        (SampleResult::Single(s), n, t)
    } else {
        let runs = cfg
            .sample
            .sweep
            .iter()
            .map(|&sigma| {
                let sampler = SamplerConfig { sigma_t_sq: sigma, ..cfg.sampler.clone() };
                run_one(&lr, &hr, &sampler, cfg.sample.batches, &out_dir.join(sweep_dir_name(sigma)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let starved = runs.iter().map(|r| r.starved_batches).sum();
        let total = runs.iter().map(|r| r.batches).sum();
        (SampleResult::Sweep { runs }, starved, total)
    };
    let json = emit("sample", &cfg, result, Some(&out_dir.join("summary.json")))?;
    let failure = (starved > 0).then_some(CliError::Starvation { count: starved, total });
    Ok(Output { json, failure })
}

pub fn sweep_dir_name(sigma: f64) -> String {
    format!("sigma_{sigma}")
}

pub fn manifest_name(index: usize) -> String {
    format!("batch_{index:05}.jsonl")
}

/// Samples `batches` batches at one configuration and writes one manifest per
/// filled batch. Starved batches are recorded in the summary only.
fn run_one(
    lr: &Arc<Corpus>,
    hr: &Arc<Corpus>,
    config: &SamplerConfig,
    batches: usize,
    dir: &Path,
) -> Result<RunSummary, CliError> {
    let sampler = PairSampler::new(lr.clone(), hr.clone(), config.clone())?;
    let outcomes: Vec<SampleOutcome> =
        (0..batches).into_par_iter().map(|k| sampler.outcome_at(k as u64)).collect::<Result<_, Error>>()?;

    std::fs::create_dir_all(dir).map_err(|source| super::output_error(dir, source))?;
    let mut per_batch = Vec::with_capacity(batches);
    let mut all_pairs = Vec::new();
    let (mut evaluated, mut admissible) = (0usize, 0usize);
    let (mut probe_evaluated, mut probe_admissible) = (0usize, 0usize);
    for (index, outcome) in outcomes.into_iter().enumerate() {
        evaluated += outcome.rounds.iter().map(|r| r.evaluated).sum::<usize>();
        admissible += outcome.rounds.iter().map(|r| r.admissible).sum::<usize>();
        if let Some(first) = outcome.rounds.first() {
            probe_evaluated += first.evaluated;
            probe_admissible += first.admissible;
        }
        let summary = BatchSummary {
            index,
            pairs: outcome.pairs.len(),
            starved: outcome.pairs.len() < config.batch_size,
            retries_used: outcome.retries_used,
            rounds: outcome.rounds.len(),
            admissible_fraction: ratio(
                outcome.rounds.iter().map(|r| r.admissible).sum(),
                outcome.rounds.iter().map(|r| r.evaluated).sum(),
            ),
            mean_variance_gap: mean_variance_gap(&outcome.pairs),
        };
        if let Ok(batch) = outcome.into_batch(config) {
            write_file(&dir.join(manifest_name(index)), manifest_string(&batch).as_bytes())?;
            all_pairs.extend(batch.pairs);
        }
        per_batch.push(summary);
    }

    let total_retries: usize = per_batch.iter().map(|b| b.retries_used).sum();
    Ok(RunSummary {
        sigma_t_sq: config.sigma_t_sq,
        mu_t: config.mu_t,
        batches,
        starved_batches: per_batch.iter().filter(|b| b.starved).count(),
        pairs: all_pairs.len(),
        admissible_fraction: ratio(admissible, evaluated),
        probe_admissible_fraction: ratio(probe_admissible, probe_evaluated),
        total_retries,
        mean_retries: total_retries as f64 / batches as f64,
        mean_variance_gap: mean_variance_gap(&all_pairs),
        manifest_dir: dir.display().to_string(),
        per_batch,
    })
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}
