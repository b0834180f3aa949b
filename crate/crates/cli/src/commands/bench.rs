use std::hint::black_box;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use clap::Args;
use rand::Rng;
use serde::Serialize;
use varmatch_core::rng::rng_from_seed;
use varmatch_core::stats::naive_patch_stats;
use varmatch_core::synth::{synth_corpus, synth_image, SynthSpec};
use varmatch_core::{build_integral, Corpus, Image, PairSampler};

use super::{emit, set, set_opt, Output};
use crate::config::RunConfig;
use crate::error::CliError;

/// Side of the generated benchmark image (1 MP).
pub const BENCH_SIDE: usize = 1024;

#[derive(Debug, Clone, Default, Args)]
pub struct BenchArgs {
    /// LR corpus for batch timing; the bundled synthetic corpus if omitted.
    #[arg(long)]
    pub lr: Option<PathBuf>,
    #[arg(long)]
    pub hr: Option<PathBuf>,
    #[arg(long)]
    pub iters: Option<usize>,
    /// Untimed iterations before measuring; 0 disables warmup.
    #[arg(long)]
    pub warmup: Option<usize>,
    #[arg(long)]
    pub patch: Option<usize>,
    #[arg(long)]
    pub batches: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl BenchArgs {
    pub fn resolve(&self, mut cfg: RunConfig) -> RunConfig {
        set_opt(&mut cfg.paths.lr_dir, &self.lr);
        set_opt(&mut cfg.paths.hr_dir, &self.hr);
        set_opt(&mut cfg.paths.out_file, &self.out);
        let b = &mut cfg.bench;
        set(&mut b.iters, &self.iters);
        set(&mut b.warmup, &self.warmup);
        set(&mut b.patch, &self.patch);
        set(&mut b.batches, &self.batches);
        cfg
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub image_width: usize,
    pub image_height: usize,
    pub patch: usize,
    pub warmup: usize,
    pub iters: usize,
    pub table_build_seconds: f64,
    pub naive_patches_per_sec: f64,
    pub integral_patches_per_sec: f64,
    pub speedup: f64,
    /// Integral-table stats at least 10x faster than the naive scan.
    pub meets_10x: bool,
    pub batches: usize,
    pub starved_batches: usize,
    pub batches_per_sec: f64,
}

pub(super) fn run(cfg: RunConfig) -> Result<Output, CliError> {
    let b = &cfg.bench;
    if b.iters == 0 || b.batches == 0 {
        return Err(CliError::Config("bench.iters and bench.batches must be at least 1".into()));
    }
    if b.patch == 0 || b.patch > BENCH_SIDE {
        return Err(CliError::Config(format!("bench.patch must be in 1..={BENCH_SIDE}")));
    }
    cfg.sampler.validate()?;
    let report = measure(&cfg)?;
    Ok(Output::ok(emit("bench", &cfg, report, cfg.paths.out_file.as_deref())?))
}

fn positions(n: usize, patch: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = rng_from_seed(seed);
    (0..n).map(|_| (rng.random_range(0..=BENCH_SIDE - patch), rng.random_range(0..=BENCH_SIDE - patch))).collect()
}

fn per_sec(count: usize, seconds: f64) -> f64 {
    count as f64 / seconds.max(1e-12)
}

pub fn measure(cfg: &RunConfig) -> Result<BenchReport, CliError> {
    let b = &cfg.bench;
    let seed = cfg.sampler.seed;
    let plane: Image = synth_image(BENCH_SIDE, BENCH_SIDE, 1, seed)?;
    let p = b.patch;

    let t = Instant::now();
    let table = build_integral(&plane)?;
    let table_build_seconds = t.elapsed().as_secs_f64();

    for &(x, y) in &positions(b.warmup, p, seed ^ 1) {
        black_box(naive_patch_stats(&plane, x, y, p, p));
        black_box(table.patch_stats(x, y, p, p)?);
    }
    let pos = positions(b.iters, p, seed);
    let t = Instant::now();
    for &(x, y) in &pos {
        black_box(naive_patch_stats(black_box(&plane), x, y, p, p));
    }
    let naive = per_sec(b.iters, t.elapsed().as_secs_f64());
    let t = Instant::now();
    for &(x, y) in &pos {
        black_box(black_box(&table).patch_stats(x, y, p, p)?);
    }
    let integral = per_sec(b.iters, t.elapsed().as_secs_f64());

    let (lr, hr) = bench_corpora(cfg)?;
    let sampler = PairSampler::new(Arc::new(lr), Arc::new(hr), cfg.sampler.clone())?;
    for k in 0..b.warmup.min(b.batches) {
        let _ = black_box(sampler.outcome_at(u64::MAX - k as u64));
    }
    let mut starved = 0;
    let t = Instant::now();
    for k in 0..b.batches {
        let outcome = sampler.outcome_at(k as u64)?;
        starved += usize::from(outcome.pairs.len() < cfg.sampler.batch_size);
        black_box(outcome);
    }
    let batches_per_sec = per_sec(b.batches, t.elapsed().as_secs_f64());

    Ok(BenchReport {
        image_width: BENCH_SIDE,
        image_height: BENCH_SIDE,
        patch: p,
        warmup: b.warmup,
        iters: b.iters,
        table_build_seconds,
        naive_patches_per_sec: naive,
        integral_patches_per_sec: integral,
        speedup: integral / naive,
        meets_10x: integral >= 10.0 * naive,
        batches: b.batches,
        starved_batches: starved,
        batches_per_sec,
    })
}

fn bench_corpora(cfg: &RunConfig) -> Result<(Corpus, Corpus), CliError> {
    let load = |dir: &Option<PathBuf>, spec: &SynthSpec| -> Result<Corpus, CliError> {
        Ok(match dir {
            Some(d) => Corpus::load_dir(d)?,
            None => Corpus::from_images(synth_corpus(spec)?)?,
        })
    };
    Ok((load(&cfg.paths.lr_dir, &SynthSpec::LR)?, load(&cfg.paths.hr_dir, &SynthSpec::HR)?))
}
