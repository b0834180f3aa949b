//! Separable cubic-convolution resampling (Keys kernel).
//!
//! Output pixel `i` samples the source at `(i + 0.5) / scale - 0.5`, i.e. pixel
//! centers are aligned. Four taps per axis, indices clamped to the edge. The
//! kernel is not widened when downscaling, so `B(y)` at 1/4 is a pure
//! four-tap cubic interpolation at the phase-0.5 positions.

use crate::error::{Error, Result};
use crate::image::Image;

/// Scale factor and kernel for [`bicubic_resize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResampleSpec {
    pub numerator: u32,
    pub denominator: u32,
    pub kernel_a: f64,
}

pub const KEYS_A: f64 = -0.5;

impl ResampleSpec {
    pub fn new(numerator: u32, denominator: u32) -> Result<Self> {
        if numerator == 0 || denominator == 0 {
            return Err(Error::Config(format!("scale {numerator}/{denominator} must have positive terms")));
        }
        Ok(ResampleSpec { numerator, denominator, kernel_a: KEYS_A })
    }

    /// Downscale by an integer factor, e.g. `downscale(4)` is scale 1/4.
    pub fn downscale(factor: u32) -> Result<Self> {
        ResampleSpec::new(1, factor)
    }

    pub fn upscale(factor: u32) -> Result<Self> {
        ResampleSpec::new(factor, 1)
    }

    pub fn with_kernel_a(mut self, a: f64) -> Self {
        self.kernel_a = a;
        self
    }

    pub fn scale(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    /// `floor(len * scale)` computed in integers.
    pub fn output_len(&self, len: usize) -> usize {
        (len as u64 * self.numerator as u64 / self.denominator as u64) as usize
    }
}

/// Keys cubic convolution kernel with parameter `a`.
#[inline]
pub fn keys_kernel(t: f64, a: f64) -> f64 {
    let t = t.abs();
    if t <= 1.0 {
        ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0
    } else if t < 2.0 {
        ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a
    } else {
        0.0
    }
}

/// The four tap weights for a sample that falls `phase` ∈ [0, 1) past
/// source index `floor(src)`. Taps are at offsets -1, 0, 1, 2.
#[inline]
pub fn tap_weights(phase: f64, a: f64) -> [f64; 4] {
    [keys_kernel(phase + 1.0, a), keys_kernel(phase, a), keys_kernel(1.0 - phase, a), keys_kernel(2.0 - phase, a)]
}

struct Taps {
    index: [usize; 4],
    weight: [f64; 4],
}

fn axis_taps(in_len: usize, out_len: usize, spec: &ResampleSpec) -> Vec<Taps> {
    let num = spec.numerator as f64;
    let den = spec.denominator as f64;
    let last = in_len as i64 - 1;
    (0..out_len)
        .map(|i| {
            let src = (i as f64 + 0.5) * den / num - 0.5;
            let base = src.floor();
            let w = tap_weights(src - base, spec.kernel_a);
            let base = base as i64;
            let mut index = [0usize; 4];
            for (k, slot) in index.iter_mut().enumerate() {
                *slot = (base - 1 + k as i64).clamp(0, last) as usize;
            }
            Taps { index, weight: w }
        })
        .collect()
}

#[inline]
pub(crate) fn quantize(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Resamples every channel of `image` by `spec`.
pub fn bicubic_resize(image: &Image, spec: &ResampleSpec) -> Result<Image> {
    let (w, h) = (image.width(), image.height());
    let (ow, oh) = (spec.output_len(w), spec.output_len(h));
    if ow == 0 || oh == 0 {
        return Err(Error::DegenerateOutput { width: ow, height: oh });
    }
    let xt = axis_taps(w, ow, spec);
    let yt = axis_taps(h, oh, spec);

    let mut out = Vec::with_capacity(ow * oh * image.channels());
    let mut tmp = vec![0f64; ow * h];
    for c in 0..image.channels() {
        let plane = image.plane(c);
        for y in 0..h {
            let row = &plane[y * w..(y + 1) * w];
            let dst = &mut tmp[y * ow..(y + 1) * ow];
            for (d, t) in dst.iter_mut().zip(&xt) {
                *d = t.index.iter().zip(&t.weight).map(|(&i, &wt)| row[i] as f64 * wt).sum();
            }
        }
        for t in &yt {
            for x in 0..ow {
                let v: f64 = t.index.iter().zip(&t.weight).map(|(&i, &wt)| tmp[i * ow + x] * wt).sum();
                out.push(quantize(v));
            }
        }
    }
    Image::new(ow, oh, image.channels(), out)
}
