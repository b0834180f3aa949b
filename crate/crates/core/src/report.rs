//! Corpus-wide patch statistic histograms.
//!
//! Variance bins: an exact-zero bin, then `(0, 1)`, `[1, 4)`, `[4, 16)`,
//! `[16, 36)`, `[36, 64)`, `[64, 100)`, `[100, 256)`, `[256, 576)`,
//! `[576, 1024)`, `[1024, 4096)`, `[4096, 16384)`, `[16384, ∞)`.
//! Mean bins are 16 wide over `[0, 256)`. Quantiles use the nearest-rank rule.

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::Corpus;
use crate::degrade::grid_offsets;
use crate::error::{Error, Result};

pub const VARIANCE_EDGES: [f64; 12] = [0.0, 1.0, 4.0, 16.0, 36.0, 64.0, 100.0, 256.0, 576.0, 1024.0, 4096.0, 16384.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bin {
    pub lo: f64,
    /// Exclusive upper edge; `None` for the open last bin.
    pub hi: Option<f64>,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantiles {
    pub p0: f64,
    pub p10: f64,
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
    pub p90: f64,
    pub p100: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsReport {
    pub patch: usize,
    pub stride: usize,
    pub images: usize,
    pub windows: u64,
    pub zero_variance: u64,
    pub variance_bins: Vec<Bin>,
    pub variance_quantiles: Quantiles,
    pub mean_bins: Vec<Bin>,
    pub mean_quantiles: Quantiles,
}

/// Bin index for a variance: 0 is exactly zero, `k ≥ 1` covers
/// `[VARIANCE_EDGES[k-1], VARIANCE_EDGES[k])` (open below for `k = 1`), and
/// the last index is everything from 16384 up.
pub fn variance_bin(v: f64) -> usize {
    if v == 0.0 {
        return 0;
    }
    VARIANCE_EDGES[1..].iter().position(|&e| v < e).map_or(VARIANCE_EDGES.len(), |k| k + 1)
}

pub fn mean_bin(m: f64) -> usize {
    ((m / 16.0) as usize).min(15)
}

fn quantiles(mut v: Vec<f64>) -> Quantiles {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let q = |p: f64| {
        let rank = (p * n as f64).ceil() as usize;
        v[rank.clamp(1, n) - 1]
    };
    Quantiles { p0: v[0], p10: q(0.10), p25: q(0.25), p50: q(0.50), p75: q(0.75), p90: q(0.90), p100: v[n - 1] }
}

/// Mean and variance of every stride-grid window of side `patch`, per image
/// in corpus order.
pub fn window_stats(corpus: &Corpus, patch: usize, stride: usize) -> Vec<Vec<(f64, f64)>> {
    corpus
        .entries()
        .par_iter()
        .map(|e| {
            let mut out = Vec::new();
            for y in grid_offsets(e.height(), patch, stride) {
                for x in grid_offsets(e.width(), patch, stride) {
                    let s = e.table.patch_stats_unchecked(x, y, patch, patch);
                    out.push((s.mean, s.variance));
                }
            }
            out
        })
        .collect()
}

pub fn corpus_stats(corpus: &Corpus, patch: usize, stride: usize) -> Result<StatsReport> {
    if patch == 0 || stride == 0 {
        return Err(Error::Config("patch and stride must be at least 1".into()));
    }
    let all: Vec<(f64, f64)> = window_stats(corpus, patch, stride).into_iter().flatten().collect();
    if all.is_empty() {
        return Err(Error::EmptyCorpus(format!(
            "no {patch}x{patch} windows at stride {stride} in {} images",
            corpus.len()
        )));
    }

    let mut variance_bins: Vec<Bin> = std::iter::once(Bin { lo: 0.0, hi: Some(0.0), count: 0 })
        .chain(VARIANCE_EDGES.windows(2).map(|w| Bin { lo: w[0], hi: Some(w[1]), count: 0 }))
        .chain(std::iter::once(Bin { lo: *VARIANCE_EDGES.last().unwrap(), hi: None, count: 0 }))
        .collect();
    let mut mean_bins: Vec<Bin> =
        (0..16).map(|k| Bin { lo: 16.0 * k as f64, hi: Some(16.0 * (k + 1) as f64), count: 0 }).collect();
    for &(m, v) in &all {
        variance_bins[variance_bin(v)].count += 1;
        mean_bins[mean_bin(m)].count += 1;
    }

    Ok(StatsReport {
        patch,
        stride,
        images: corpus.len(),
        windows: all.len() as u64,
        zero_variance: variance_bins[0].count,
        variance_bins,
        variance_quantiles: quantiles(all.iter().map(|p| p.1).collect()),
        mean_bins,
        mean_quantiles: quantiles(all.iter().map(|p| p.0).collect()),
    })
}
