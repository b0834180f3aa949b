//! Line-delimited JSON pair manifests.
//!
//! One object per pair, keys in fixed order:
//! `lr_image, lr_x, lr_y, lr_size, lr_mean, lr_var, hr_image, hr_x, hr_y,
//! hr_size, hr_mean, hr_var`. Floats are written in scientific notation with
//! 17 significant digits, which reproduces every `f64` exactly on parse.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::Deserialize;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::sampler::{is_admissible, PairBatch, PatchPair, PatchRef};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestRecord {
    pub lr_image: String,
    pub lr_x: usize,
    pub lr_y: usize,
    pub lr_size: usize,
    pub lr_mean: f64,
    pub lr_var: f64,
    pub hr_image: String,
    pub hr_x: usize,
    pub hr_y: usize,
    pub hr_size: usize,
    pub hr_mean: f64,
    pub hr_var: f64,
}

impl ManifestRecord {
    pub fn from_pair(pair: &PatchPair) -> Self {
        ManifestRecord {
            lr_image: pair.lr.image_id.clone(),
            lr_x: pair.lr.x,
            lr_y: pair.lr.y,
            lr_size: pair.lr.size,
            lr_mean: pair.lr.mean,
            lr_var: pair.lr.variance,
            hr_image: pair.hr.image_id.clone(),
            hr_x: pair.hr.x,
            hr_y: pair.hr.y,
            hr_size: pair.hr.size,
            hr_mean: pair.hr.mean,
            hr_var: pair.hr.variance,
        }
    }

    pub fn to_pair(&self) -> PatchPair {
        PatchPair {
            lr: PatchRef {
                image_id: self.lr_image.clone(),
                x: self.lr_x,
                y: self.lr_y,
                size: self.lr_size,
                mean: self.lr_mean,
                variance: self.lr_var,
            },
            hr: PatchRef {
                image_id: self.hr_image.clone(),
                x: self.hr_x,
                y: self.hr_y,
                size: self.hr_size,
                mean: self.hr_mean,
                variance: self.hr_var,
            },
        }
    }

    /// Serializes to one manifest line (no trailing newline).
    pub fn to_line(&self) -> String {
        let mut s = String::with_capacity(256);
        let quote = |v: &str| serde_json::to_string(v).expect("string serialization");
        write!(
            s,
            "{{\"lr_image\":{},\"lr_x\":{},\"lr_y\":{},\"lr_size\":{},\"lr_mean\":{},\"lr_var\":{},\
             \"hr_image\":{},\"hr_x\":{},\"hr_y\":{},\"hr_size\":{},\"hr_mean\":{},\"hr_var\":{}}}",
            quote(&self.lr_image),
            self.lr_x,
            self.lr_y,
            self.lr_size,
            fmt_f64(self.lr_mean),
            fmt_f64(self.lr_var),
            quote(&self.hr_image),
            self.hr_x,
            self.hr_y,
            self.hr_size,
            fmt_f64(self.hr_mean),
            fmt_f64(self.hr_var),
        )
        .unwrap();
        s
    }
}

/// 17 significant digits in scientific notation.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn manifest_string(batch: &PairBatch) -> String {
    let mut out = String::new();
    for pair in &batch.pairs {
        out.push_str(&ManifestRecord::from_pair(pair).to_line());
        out.push('\n');
    }
    out
}

/// Writes one line per pair of `batch` to `path`.
pub fn export_manifest(batch: &PairBatch, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(manifest_string(batch).as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn parse_manifest(text: &str) -> Result<Vec<ManifestRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::Manifest { line: i + 1, reason: e.to_string() }))
        .collect()
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_manifest(&text)
}

/// Outcome of re-checking a manifest against its source corpora.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VerifyReport {
    pub records: usize,
    /// Lines whose recorded stats differ from a recomputation.
    pub stat_mismatches: Vec<usize>,
    /// Lines that violate the matching predicate.
    pub predicate_violations: Vec<usize>,
}

impl VerifyReport {
    pub fn is_clean(&self) -> bool {
        self.stat_mismatches.is_empty() && self.predicate_violations.is_empty()
    }
}

fn recompute(corpus: &Corpus, r: &PatchRef) -> Result<(f64, f64)> {
    let entry = corpus.get(&r.image_id).ok_or_else(|| Error::ImageNotFound(r.image_id.clone()))?;
    let s = entry.table.patch_stats(r.x, r.y, r.size, r.size)?;
    Ok((s.mean, s.variance))
}

/// Recomputes every record's statistics from the named images and re-checks
/// the matching predicate. Missing images are an error; numeric
/// discrepancies are reported per line (1-based).
pub fn verify_manifest(
    records: &[ManifestRecord],
    lr: &Corpus,
    hr: &Corpus,
    sigma_t_sq: f64,
    mu_t: Option<f64>,
) -> Result<VerifyReport> {
    let mut report = VerifyReport { records: records.len(), ..Default::default() };
    for (i, rec) in records.iter().enumerate() {
        let pair = rec.to_pair();
        let lr_stats = recompute(lr, &pair.lr)?;
        let hr_stats = recompute(hr, &pair.hr)?;
        if lr_stats != (pair.lr.mean, pair.lr.variance) || hr_stats != (pair.hr.mean, pair.hr.variance) {
            report.stat_mismatches.push(i + 1);
        }
        if !is_admissible(&pair.lr, &pair.hr, sigma_t_sq, mu_t) {
            report.predicate_violations.push(i + 1);
        }
    }
    Ok(report)
}
