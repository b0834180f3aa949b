use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use varmatch_core::corpus::list_pngs;
use varmatch_core::metrics::crop_border;
use varmatch_core::{load_png, psnr, ssim, Psnr};

use super::{emit, set, set_opt, Output};
use crate::config::{require, RunConfig};
use crate::error::CliError;

#[derive(Debug, Clone, Default, Args)]
pub struct MetricsArgs {
    /// Predictions; file names must match the reference directory.
    #[arg(long)]
    pub pred: Option<PathBuf>,
    #[arg(long = "ref")]
    pub reference: Option<PathBuf>,
    /// Shave this many pixels from every border first.
    #[arg(long)]
    pub crop: Option<usize>,
    /// PSNR on luminance instead of all channels.
    #[arg(long)]
    pub luma: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl MetricsArgs {
    pub fn resolve(&self, mut cfg: RunConfig) -> RunConfig {
        set_opt(&mut cfg.paths.pred_dir, &self.pred);
        set_opt(&mut cfg.paths.ref_dir, &self.reference);
        set_opt(&mut cfg.paths.out_file, &self.out);
        set(&mut cfg.metrics.crop, &self.crop);
        cfg.metrics.luma |= self.luma;
        cfg
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ImageScore {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psnr: Option<Psnr>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ssim: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_kind: Option<&'static str>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricsTable {
    pub images: Vec<ImageScore>,
    pub scored: usize,
    pub failed: usize,
    /// Mean over finite PSNR values only.
    pub mean_psnr: Option<f64>,
    pub psnr_infinite_count: usize,
    pub mean_ssim: Option<f64>,
}

pub(super) fn run(cfg: RunConfig) -> Result<Output, CliError> {
    let pred_dir = require(&cfg.paths.pred_dir, "pred_dir")?;
    let ref_dir = require(&cfg.paths.ref_dir, "ref_dir")?;
    let names = matched_names(pred_dir, ref_dir)?;
    let (crop, luma) = (cfg.metrics.crop, cfg.metrics.luma);

    let images: Vec<ImageScore> = names
        .par_iter()
        .map(|name| match score(&pred_dir.join(name), &ref_dir.join(name), crop, luma) {
            Ok((p, s)) => {
                ImageScore { name: name.clone(), psnr: Some(p), ssim: Some(s), error: None, error_kind: None }
            }
            Err(e) => ImageScore {
                name: name.clone(),
                psnr: None,
                ssim: None,
                error: Some(e.to_string()),
                error_kind: Some(e.kind_name()),
            },
        })
        .collect();
    let table = summarize(images);
    let failure = (table.failed > 0).then(|| {
        let first = table.images.iter().find(|i| i.error.is_some()).unwrap();
        CliError::Core(varmatch_core::Error::ShapeMismatch(format!(
            "{} of {} images could not be scored, first: {}: {}",
            table.failed,
            table.images.len(),
            first.name,
            first.error.as_deref().unwrap_or_default()
        )))
    });
    let json = emit("metrics", &cfg, table, cfg.paths.out_file.as_deref())?;
    Ok(Output { json, failure })
}

fn score(pred: &Path, reference: &Path, crop: usize, luma: bool) -> varmatch_core::Result<(Psnr, f64)> {
    let p = crop_border(&load_png(pred)?, crop)?;
    let r = crop_border(&load_png(reference)?, crop)?;
    let psnr_value = if luma { psnr(&p.to_luminance(), &r.to_luminance())? } else { psnr(&p, &r)? };
    Ok((psnr_value, ssim(&p, &r)?))
}

fn file_names(dir: &Path) -> Result<BTreeSet<String>, CliError> {
    Ok(list_pngs(dir)?.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect())
}

/// Sorted common file names, or an error naming every unmatched file.
fn matched_names(pred_dir: &Path, ref_dir: &Path) -> Result<Vec<String>, CliError> {
    let pred = file_names(pred_dir)?;
    let reference = file_names(ref_dir)?;
    if pred != reference {
        return Err(CliError::FilenameMismatch {
            missing_pred: reference.difference(&pred).cloned().collect(),
            missing_ref: pred.difference(&reference).cloned().collect(),
        });
    }
    if pred.is_empty() {
        return Err(varmatch_core::Error::EmptyCorpus(format!("no PNG files in {}", pred_dir.display())).into());
    }
    Ok(pred.into_iter().collect())
}

pub fn summarize(images: Vec<ImageScore>) -> MetricsTable {
    let finite: Vec<f64> = images.iter().filter_map(|i| i.psnr.and_then(Psnr::finite)).collect();
    let ssims: Vec<f64> = images.iter().filter_map(|i| i.ssim).collect();
    let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    MetricsTable {
        scored: ssims.len(),
        failed: images.len() - ssims.len(),
        mean_psnr: mean(&finite),
        psnr_infinite_count: images.iter().filter(|i| i.psnr.is_some_and(Psnr::is_infinite)).count(),
        mean_ssim: mean(&ssims),
        images,
    }
}
