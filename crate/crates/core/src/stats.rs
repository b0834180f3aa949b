//! Constant-time patch mean and variance from summed-area tables.
//!
//! Sums are accumulated exactly in `u64`, so the only rounding happens in the
//! final division; low-variance patches do not suffer from cancellation.

use crate::error::{Error, Result};
use crate::image::Image;

/// Largest sample count whose sum of squares (255² each) still fits in `u64`.
const MAX_SAMPLES: u64 = u64::MAX / (255 * 255);

/// Zero-padded `(width+1) x (height+1)` tables of cumulative sums and squared sums.
#[derive(Clone, PartialEq, Eq)]
pub struct IntegralTable {
    width: usize,
    height: usize,
    sum: Vec<u64>,
    sum_sq: Vec<u64>,
}

impl std::fmt::Debug for IntegralTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IntegralTable")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

/// Population mean and variance of a patch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchStats {
    pub mean: f64,
    pub variance: f64,
}

impl IntegralTable {
    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    /// Cumulative sum of samples strictly above and left of (`x`, `y`).
    #[inline]
    pub fn sum_at(&self, x: usize, y: usize) -> u64 {
        self.sum[y * (self.width + 1) + x]
    }

    #[inline]
    pub fn sum_sq_at(&self, x: usize, y: usize) -> u64 {
        self.sum_sq[y * (self.width + 1) + x]
    }

    /// Exact (sum, sum of squares) over a rectangle. Bounds are not checked.
    #[inline]
    fn rect_sums(&self, x: usize, y: usize, w: usize, h: usize) -> (u64, u64) {
        let stride = self.width + 1;
        let (a, b) = (y * stride + x, y * stride + x + w);
        let (c, d) = ((y + h) * stride + x, (y + h) * stride + x + w);
        let s = self.sum[d] + self.sum[a] - self.sum[b] - self.sum[c];
        let s2 = self.sum_sq[d] + self.sum_sq[a] - self.sum_sq[b] - self.sum_sq[c];
        (s, s2)
    }

    pub fn rect_sum(&self, x: usize, y: usize, w: usize, h: usize) -> Result<(u64, u64)> {
        self.check_rect(x, y, w, h)?;
        Ok(self.rect_sums(x, y, w, h))
    }

    fn check_rect(&self, x: usize, y: usize, w: usize, h: usize) -> Result<()> {
        let fits = w >= 1
            && h >= 1
            && x.checked_add(w).is_some_and(|r| r <= self.width)
            && y.checked_add(h).is_some_and(|b| b <= self.height);
        if fits {
            Ok(())
        } else {
            Err(Error::OutOfBounds { x, y, w, h, width: self.width, height: self.height })
        }
    }

    /// Mean/variance of the rectangle; see [`patch_stats`].
    pub fn patch_stats(&self, x: usize, y: usize, w: usize, h: usize) -> Result<PatchStats> {
        self.check_rect(x, y, w, h)?;
        Ok(self.patch_stats_unchecked(x, y, w, h))
    }

    #[inline]
    pub(crate) fn patch_stats_unchecked(&self, x: usize, y: usize, w: usize, h: usize) -> PatchStats {
        let (s, s2) = self.rect_sums(x, y, w, h);
        let n = (w * h) as f64;
        let mean = s as f64 / n;
        let variance = raw_variance(s, s2, n).max(0.0);
        PatchStats { mean, variance }
    }
}

#[inline]
fn raw_variance(s: u64, s2: u64, n: f64) -> f64 {
    let mean = s as f64 / n;
    s2 as f64 / n - mean * mean
}

/// Variance before the clamp at zero, exposed for the rounding invariant.
pub fn unclamped_variance(table: &IntegralTable, x: usize, y: usize, w: usize, h: usize) -> Result<f64> {
    let (s, s2) = table.rect_sum(x, y, w, h)?;
    Ok(raw_variance(s, s2, (w * h) as f64))
}

/// Builds value and squared-value summed-area tables for a 1-channel plane.
pub fn build_integral(plane: &Image) -> Result<IntegralTable> {
    if plane.channels() != 1 {
        return Err(Error::MultichannelInput { channels: plane.channels() });
    }
    let (w, h) = (plane.width(), plane.height());
    let samples = w as u64 * h as u64;
    if samples > MAX_SAMPLES {
        return Err(Error::OverflowRisk { samples });
    }
    let stride = w + 1;
    let mut sum = vec![0u64; stride * (h + 1)];
    let mut sum_sq = vec![0u64; stride * (h + 1)];
    let data = plane.data();
    for y in 0..h {
        let (mut run, mut run_sq) = (0u64, 0u64);
        let row = &data[y * w..(y + 1) * w];
        for (x, &v) in row.iter().enumerate() {
            let v = v as u64;
            run += v;
            run_sq += v * v;
            let above = y * stride + x + 1;
            let here = above + stride;
            sum[here] = sum[above] + run;
            sum_sq[here] = sum_sq[above] + run_sq;
        }
    }
    Ok(IntegralTable { width: w, height: h, sum, sum_sq })
}

/// Free-function form of [`IntegralTable::patch_stats`].
///
/// `mean = S / n`, `variance = S2 / n - mean²` (population variance, clamped
/// at zero), with `S`, `S2` taken from four corner lookups.
pub fn patch_stats(table: &IntegralTable, x: usize, y: usize, w: usize, h: usize) -> Result<PatchStats> {
    table.patch_stats(x, y, w, h)
}

/// Direct two-pass mean/variance over the window, for benchmarking against
/// the table lookup.
pub fn naive_patch_stats(plane: &Image, x: usize, y: usize, w: usize, h: usize) -> PatchStats {
    let width = plane.width();
    let data = plane.data();
    let n = (w * h) as f64;
    let mut s = 0u64;
    for row in y..y + h {
        s += data[row * width + x..row * width + x + w].iter().map(|&v| v as u64).sum::<u64>();
    }
    let mean = s as f64 / n;
    let mut acc = 0.0;
    for row in y..y + h {
        for &v in &data[row * width + x..row * width + x + w] {
            let d = v as f64 - mean;
            acc += d * d;
        }
    }
    PatchStats { mean, variance: acc / n }
}
