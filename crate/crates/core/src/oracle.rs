//! Slow reference implementations for tests.
//!
//! Nothing here touches summed-area tables, separable filters or the sorted
//! greedy matcher; each routine recomputes its result directly from pixels.

#![allow(clippy::needless_range_loop)]

use rand::Rng;

use crate::corpus::Corpus;
use crate::image::Image;
use crate::rng::SampleRng;
use crate::sampler::{PatchPair, PatchRef, SamplerConfig};

/// Two-pass mean and population variance of a window of a 1-channel plane.
pub fn two_pass_stats(plane: &Image, x: usize, y: usize, w: usize, h: usize) -> (f64, f64) {
    let mut vals = Vec::with_capacity(w * h);
    for r in y..y + h {
        for c in x..x + w {
            vals.push(plane.get(c, r, 0) as f64);
        }
    }
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var)
}

/// SSIM by direct 2-D window sums with an unnormalized-then-normalized
/// Gaussian, on float luminance computed from the BT.601 weights.
pub fn naive_ssim(a: &Image, b: &Image) -> f64 {
    let la = a.to_luminance();
    let lb = b.to_luminance();
    let (w, h) = (la.width(), la.height());
    let mut win = [[0.0f64; 11]; 11];
    let mut total = 0.0;
    for (i, row) in win.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let (di, dj) = (i as f64 - 5.0, j as f64 - 5.0);
            *v = (-(di * di + dj * dj) / (2.0 * 1.5 * 1.5)).exp();
            total += *v;
        }
    }
    let c1 = (0.01f64 * 255.0).powi(2);
    let c2 = (0.03f64 * 255.0).powi(2);
    let mut acc = 0.0;
    let mut count = 0usize;
    for y in 0..=h - 11 {
        for x in 0..=w - 11 {
            let (mut ma, mut mb) = (0.0, 0.0);
            for i in 0..11 {
                for j in 0..11 {
                    let g = win[i][j] / total;
                    ma += g * la.get(x + j, y + i, 0) as f64;
                    mb += g * lb.get(x + j, y + i, 0) as f64;
                }
            }
            let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
            for i in 0..11 {
                for j in 0..11 {
                    let g = win[i][j] / total;
                    let da = la.get(x + j, y + i, 0) as f64 - ma;
                    let db = lb.get(x + j, y + i, 0) as f64 - mb;
                    va += g * da * da;
                    vb += g * db * db;
                    cov += g * da * db;
                }
            }
            acc += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            count += 1;
        }
    }
    acc / count as f64
}

/// Greedy matching by repeated global-minimum selection: among pairs whose
/// candidates are both unused and that satisfy the predicate, take the one
/// with the smallest `(gap, lr index, hr index)`; repeat until none remain.
pub fn greedy_replay(lr: &[PatchRef], hr: &[PatchRef], sigma_t_sq: f64, mu_t: Option<f64>) -> Vec<(usize, usize)> {
    let mut lr_used = vec![false; lr.len()];
    let mut hr_used = vec![false; hr.len()];
    let mut out = Vec::new();
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..lr.len() {
            if lr_used[i] {
                continue;
            }
            for j in 0..hr.len() {
                if hr_used[j] {
                    continue;
                }
                let gap = (lr[i].variance - hr[j].variance).abs();
                let mean_ok = match mu_t {
                    Some(mu) => (lr[i].mean - hr[j].mean).abs() < mu,
                    None => true,
                };
                if !(gap < sigma_t_sq && mean_ok) {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bg, bi, bj)) => gap < bg || (gap == bg && (i, j) < (bi, bj)),
                };
                if better {
                    best = Some((gap, i, j));
                }
            }
        }
        match best {
            Some((_, i, j)) => {
                lr_used[i] = true;
                hr_used[j] = true;
                out.push((i, j));
            }
            None => return out,
        }
    }
}

fn brute_candidates(corpus: &Corpus, idx: usize, n: usize, size: usize, rng: &mut SampleRng) -> Vec<PatchRef> {
    let e = corpus.entry(idx);
    let luma = e.image.to_luminance();
    (0..n)
        .map(|_| {
            let x = rng.random_range(0..=e.width() - size);
            let y = rng.random_range(0..=e.height() - size);
            let (mean, variance) = two_pass_stats(&luma, x, y, size, size);
            PatchRef { image_id: e.id.clone(), x, y, size, mean, variance }
        })
        .collect()
}

/// Replays the documented sampling procedure from scratch: same random
/// stream order, statistics from pixels, matching by [`greedy_replay`],
/// cross-round duplicate suppression. Returns the accumulated pairs.
pub fn replay_sample(lr: &Corpus, hr: &Corpus, config: &SamplerConfig, rng: &mut SampleRng) -> Vec<PatchPair> {
    let mut pairs: Vec<PatchPair> = Vec::new();
    let same = |a: &PatchRef, b: &PatchRef| a.image_id == b.image_id && a.x == b.x && a.y == b.y && a.size == b.size;
    for _ in 0..=config.max_retries {
        let li = rng.random_range(0..lr.len());
        let hi = rng.random_range(0..hr.len());
        let lc = brute_candidates(lr, li, config.n_lr, config.lr_patch, rng);
        let hc = brute_candidates(hr, hi, config.n_hr, config.hr_patch, rng);
        for (i, j) in greedy_replay(&lc, &hc, config.sigma_t_sq, config.mu_t) {
            if pairs.len() == config.batch_size {
                break;
            }
            if pairs.iter().any(|p| same(&p.lr, &lc[i]) || same(&p.hr, &hc[j])) {
                continue;
            }
            pairs.push(PatchPair { lr: lc[i].clone(), hr: hc[j].clone() });
        }
        if pairs.len() == config.batch_size {
            break;
        }
    }
    pairs
}

/// Number of stride-grid windows with luminance variance below `threshold`,
/// by direct pixel scans.
pub fn count_quiet_windows(images: &[Image], patch: usize, stride: usize, threshold: f64) -> usize {
    let mut count = 0;
    for img in images {
        let luma = img.to_luminance();
        let mut y = 0;
        while y + patch <= luma.height() {
            let mut x = 0;
            while x + patch <= luma.width() {
                if two_pass_stats(&luma, x, y, patch, patch).1 < threshold {
                    count += 1;
                }
                x += stride;
            }
            y += stride;
        }
    }
    count
}

/// Per-window variances on the stride grid, by direct pixel scans.
pub fn window_variances(img: &Image, patch: usize, stride: usize) -> Vec<f64> {
    let luma = img.to_luminance();
    let mut out = Vec::new();
    let mut y = 0;
    while y + patch <= luma.height() {
        let mut x = 0;
        while x + patch <= luma.width() {
            out.push(two_pass_stats(&luma, x, y, patch, patch).1);
            x += stride;
        }
        y += stride;
    }
    out
}
