//! Procedural test corpora with heterogeneous patch statistics.
//!
//! Each image is a smooth background overlaid with rectangles of flat color,
//! uniform noise of varying amplitude, stripes and checkerboards, so patch
//! variances range from zero to several thousand.

use rand::Rng;

use crate::error::Result;
use crate::image::Image;
use crate::rng::{derive_seed, rng_from_seed, SampleRng};

/// Shape of a generated corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthSpec {
    pub count: usize,
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub seed: u64,
}

impl SynthSpec {
    /// Default LR side of the bundled corpus.
    pub const LR: SynthSpec = SynthSpec { count: 6, width: 256, height: 192, channels: 3, seed: 0x4C52 };

    /// Default HR side of the bundled corpus.
    pub const HR: SynthSpec = SynthSpec { count: 6, width: 640, height: 480, channels: 3, seed: 0x4852 };
}

#[derive(Clone, Copy)]
enum Fill {
    Flat,
    Noise(f64),
    Stripes(usize, f64),
    Checker(usize, f64),
}

fn random_fill(rng: &mut SampleRng) -> Fill {
    match rng.random_range(0..4) {
        0 => Fill::Flat,
        1 => Fill::Noise([2.0, 4.0, 8.0, 16.0, 32.0, 64.0][rng.random_range(0..6)]),
        2 => Fill::Stripes(rng.random_range(2..12), rng.random_range(4.0..60.0)),
        _ => Fill::Checker(rng.random_range(2..10), rng.random_range(4.0..60.0)),
    }
}

/// One synthetic image.
pub fn synth_image(width: usize, height: usize, channels: usize, seed: u64) -> Result<Image> {
    let mut rng = rng_from_seed(seed);
    let base: [f64; 3] = [rng.random_range(40.0..200.0), rng.random_range(40.0..200.0), rng.random_range(40.0..200.0)];
    let (gx, gy) = (rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2));

    // Luminance-like field plus per-channel offsets.
    let mut field = vec![0f64; width * height];
    for y in 0..height {
        for x in 0..width {
            field[y * width + x] = gx * x as f64 + gy * y as f64;
        }
    }
    let regions = rng.random_range(6..14);
    for _ in 0..regions {
        let rw = rng.random_range(width / 8..=width / 2);
        let rh = rng.random_range(height / 8..=height / 2);
        let x0 = rng.random_range(0..=width - rw);
        let y0 = rng.random_range(0..=height - rh);
        let level = rng.random_range(-60.0..60.0);
        let fill = random_fill(&mut rng);
        for y in y0..y0 + rh {
            for x in x0..x0 + rw {
                let v = match fill {
                    Fill::Flat => level,
                    Fill::Noise(a) => level + rng.random_range(-a..a),
                    Fill::Stripes(p, c) => level + if (x / p) % 2 == 0 { c } else { -c },
                    Fill::Checker(p, c) => level + if (x / p + y / p) % 2 == 0 { c } else { -c },
                };
                field[y * width + x] = v;
            }
        }
    }
    Image::from_fn(width, height, channels, |x, y, c| (base[c] + field[y * width + x]).round().clamp(0.0, 255.0) as u8)
}

/// `spec.count` images named `synth_000.png`, `synth_001.png`, ...
pub fn synth_corpus(spec: &SynthSpec) -> Result<Vec<(String, Image)>> {
    (0..spec.count)
        .map(|i| {
            let img = synth_image(spec.width, spec.height, spec.channels, derive_seed(spec.seed, i as u64))?;
            Ok((format!("synth_{i:03}.png"), img))
        })
        .collect()
}
