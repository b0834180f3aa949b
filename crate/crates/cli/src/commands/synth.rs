use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use varmatch_core::synth::{synth_corpus, SynthSpec};
use varmatch_core::{derive_seed, save_png};

use super::{emit, Output};
use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Writes `lr/` and `hr/` below this directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
struct SideSummary {
    dir: String,
    count: usize,
    width: usize,
    height: usize,
    seed: u64,
}

/// Without `--seed` the bundled corpora are written; with it, both sides are
/// regenerated from seeds derived from it.
pub(super) fn run(args: &SynthArgs, cfg: RunConfig, seeded: bool) -> Result<Output, CliError> {
    let (mut lr, mut hr) = (SynthSpec::LR, SynthSpec::HR);
    if seeded {
        lr.seed = derive_seed(cfg.sampler.seed, 0);
        hr.seed = derive_seed(cfg.sampler.seed, 1);
    }
    let sides = [("lr", lr), ("hr", hr)]
        .iter()
        .map(|(name, spec)| {
            let dir = args.out.join(name);
            std::fs::create_dir_all(&dir).map_err(|e| super::output_error(&dir, e))?;
            synth_corpus(spec)?.par_iter().try_for_each(|(file, img)| save_png(img, dir.join(file)))?;
            Ok(SideSummary {
                dir: dir.display().to_string(),
                count: spec.count,
                width: spec.width,
                height: spec.height,
                seed: spec.seed,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Output::ok(emit("synth", &cfg, sides, None)?))
}
