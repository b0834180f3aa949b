//! Synthetic LR corpus generation from HR images.
//!
//! Noise is harvested from real LR images: every window on a stride grid
//! whose luminance variance is below a threshold is assumed to hold sensor
//! noise only, and its mean-subtracted residual goes into a [`NoiseBank`].
//! Degradation downsamples an HR image with the bicubic operator and adds
//! bank tiles laid out on a grid over the result, one random tile per cell.

use std::fs;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{list_pngs, Corpus};
use crate::error::{Error, Result};
use crate::image::{load_png, save_png, Image};
use crate::resample::{bicubic_resize, quantize, ResampleSpec};
use crate::rng::{derive_seed, rng_from_seed, SampleRng};
use crate::sampler::PatchRef;

pub const DEFAULT_NOISE_PATCH: usize = 32;
pub const DEFAULT_NOISE_STRIDE: usize = 32;

/// A zero-mean residual tile, planar `channels × side × side`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseTile {
    pub channels: usize,
    pub side: usize,
    pub residual: Vec<f64>,
}

impl NoiseTile {
    #[inline]
    fn at(&self, c: usize, x: usize, y: usize) -> f64 {
        self.residual[(c * self.side + y) * self.side + x]
    }

    /// Residual contribution to channel `c` of an image with `out_channels`.
    /// Gray tiles broadcast to RGB; RGB tiles collapse to luminance weights.
    #[inline]
    pub fn sample(&self, out_channels: usize, c: usize, x: usize, y: usize) -> f64 {
        match (self.channels, out_channels) {
            (1, _) => self.at(0, x, y),
            (3, 1) => 0.299 * self.at(0, x, y) + 0.587 * self.at(1, x, y) + 0.114 * self.at(2, x, y),
            _ => self.at(c, x, y),
        }
    }

    pub fn mean(&self) -> f64 {
        self.residual.iter().sum::<f64>() / self.residual.len() as f64
    }

    /// Per-channel means of the residual.
    pub fn channel_means(&self) -> Vec<f64> {
        let n = self.side * self.side;
        self.residual.chunks_exact(n).map(|p| p.iter().sum::<f64>() / n as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseBank {
    pub tiles: Vec<NoiseTile>,
    pub sources: Vec<PatchRef>,
    pub var_threshold: f64,
    pub patch: usize,
}

impl NoiseBank {
    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    /// A bank of `count` all-zero tiles.
    pub fn zeros(count: usize, channels: usize, patch: usize) -> Self {
        let tile = NoiseTile { channels, side: patch, residual: vec![0.0; channels * patch * patch] };
        NoiseBank { tiles: vec![tile; count], sources: Vec::new(), var_threshold: 0.0, patch }
    }

    pub fn from_tiles(tiles: Vec<NoiseTile>, patch: usize) -> Result<Self> {
        if tiles.iter().any(|t| t.side != patch || t.residual.len() != t.channels * patch * patch) {
            return Err(Error::Config(format!("every tile must be {patch}x{patch}")));
        }
        Ok(NoiseBank { tiles, sources: Vec::new(), var_threshold: f64::INFINITY, patch })
    }

    pub fn summary(&self) -> BankSummary {
        let vars: Vec<f64> = self.sources.iter().map(|s| s.variance).collect();
        let residual_var = if self.tiles.is_empty() {
            0.0
        } else {
            let (sum, n) = self.tiles.iter().fold((0.0, 0usize), |(s, n), t| {
                (s + t.residual.iter().map(|r| r * r).sum::<f64>(), n + t.residual.len())
            });
            sum / n as f64
        };
        BankSummary {
            tiles: self.tiles.len(),
            patch: self.patch,
            var_threshold: self.var_threshold,
            mean_source_variance: if vars.is_empty() { 0.0 } else { vars.iter().sum::<f64>() / vars.len() as f64 },
            max_source_variance: vars.iter().copied().fold(0.0, f64::max),
            residual_std: residual_var.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BankSummary {
    pub tiles: usize,
    pub patch: usize,
    pub var_threshold: f64,
    pub mean_source_variance: f64,
    pub max_source_variance: f64,
    pub residual_std: f64,
}

/// Top-left offsets of stride-grid windows of side `patch` along one axis.
pub fn grid_offsets(len: usize, patch: usize, stride: usize) -> impl Iterator<Item = usize> {
    let last = len.checked_sub(patch);
    (0..).step_by(stride.max(1)).take_while(move |&o| last.is_some_and(|l| o <= l))
}

/// Collects mean-subtracted residuals of all stride-grid windows whose
/// luminance variance is below `var_threshold`. Images are scanned in corpus
/// order, windows in row-major order.
pub fn extract_noise_patches(corpus: &Corpus, var_threshold: f64, patch: usize, stride: usize) -> Result<NoiseBank> {
    if stride == 0 {
        return Err(Error::Config("stride must be at least 1".into()));
    }
    if patch == 0 {
        return Err(Error::Config("noise patch side must be at least 1".into()));
    }
    if let Some(e) = corpus.entries().iter().find(|e| e.width() < patch || e.height() < patch) {
        return Err(Error::ImageTooSmall { id: e.id.clone(), width: e.width(), height: e.height(), size: patch });
    }

    let per_image: Vec<Vec<(NoiseTile, PatchRef)>> = corpus
        .entries()
        .par_iter()
        .map(|e| {
            let mut found = Vec::new();
            for y in grid_offsets(e.height(), patch, stride) {
                for x in grid_offsets(e.width(), patch, stride) {
                    let s = e.table.patch_stats_unchecked(x, y, patch, patch);
                    if s.variance < var_threshold {
                        let tile = residual_tile(&e.image, x, y, patch);
                        let source =
                            PatchRef { image_id: e.id.clone(), x, y, size: patch, mean: s.mean, variance: s.variance };
                        found.push((tile, source));
                    }
                }
            }
            found
        })
        .collect();

    let (tiles, sources): (Vec<_>, Vec<_>) = per_image.into_iter().flatten().unzip();
    if tiles.is_empty() {
        return Err(Error::EmptyBank);
    }
    Ok(NoiseBank { tiles, sources, var_threshold, patch })
}

fn residual_tile(image: &Image, x: usize, y: usize, side: usize) -> NoiseTile {
    let n = side * side;
    let mut residual = Vec::with_capacity(n * image.channels());
    for c in 0..image.channels() {
        let start = residual.len();
        let mut sum = 0u64;
        for row in y..y + side {
            for col in x..x + side {
                let v = image.get(col, row, c);
                sum += v as u64;
                residual.push(v as f64);
            }
        }
        let mean = sum as f64 / n as f64;
        for r in &mut residual[start..] {
            *r -= mean;
        }
    }
    NoiseTile { channels: image.channels(), side, residual }
}

/// Tile index per grid cell, drawn row-major over cells of side `bank.patch`.
pub fn draw_tile_layout(width: usize, height: usize, bank: &NoiseBank, rng: &mut SampleRng) -> Vec<usize> {
    let cells_x = width.div_ceil(bank.patch);
    let cells_y = height.div_ceil(bank.patch);
    (0..cells_x * cells_y).map(|_| rng.random_range(0..bank.len())).collect()
}

/// Downsamples `hr` by `scale` and adds tiled bank residuals, rounding and
/// clamping back to 8 bits.
pub fn degrade_image(hr: &Image, bank: &NoiseBank, scale: u32, rng: &mut SampleRng) -> Result<Image> {
    if bank.is_empty() {
        return Err(Error::EmptyBank);
    }
    let down = bicubic_resize(hr, &ResampleSpec::downscale(scale)?)?;
    let (w, h, ch) = (down.width(), down.height(), down.channels());
    let layout = draw_tile_layout(w, h, bank, rng);
    let cells_x = w.div_ceil(bank.patch);
    let side = bank.patch;

    let mut out = Vec::with_capacity(w * h * ch);
    for c in 0..ch {
        let plane = down.plane(c);
        for y in 0..h {
            for x in 0..w {
                let tile = &bank.tiles[layout[(y / side) * cells_x + x / side]];
                let v = plane[y * w + x] as f64 + tile.sample(ch, c, x % side, y % side);
                out.push(quantize(v));
            }
        }
    }
    Image::new(w, h, ch, out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImageRecord {
    pub name: String,
    pub index: usize,
    pub seed: u64,
    pub hr_width: usize,
    pub hr_height: usize,
    pub lr_width: usize,
    pub lr_height: usize,
}

/// Reproducibility record for a synthetic corpus build.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusSummary {
    pub seed: u64,
    pub scale: u32,
    pub seed_derivation: &'static str,
    pub bank: BankSummary,
    pub images: Vec<ImageRecord>,
}

pub const SUMMARY_FILE: &str = "corpus_summary.json";

/// Degrades every PNG in `hr_dir` into `out_dir` (same file names) and writes
/// `corpus_summary.json` next to them. Image `i` (sorted by name) uses seed
/// `derive_seed(seed, i)`.
pub fn build_synthetic_corpus(
    hr_dir: impl AsRef<Path>,
    out_dir: impl AsRef<Path>,
    bank: &NoiseBank,
    scale: u32,
    seed: u64,
) -> Result<CorpusSummary> {
    let (hr_dir, out_dir) = (hr_dir.as_ref(), out_dir.as_ref());
    if bank.is_empty() {
        return Err(Error::EmptyBank);
    }
    let files = list_pngs(hr_dir)?;
    if files.is_empty() {
        return Err(Error::EmptyCorpus(format!("no PNG files in {}", hr_dir.display())));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let images = files
        .par_iter()
        .enumerate()
        .map(|(index, path)| {
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            let image_seed = derive_seed(seed, index as u64);
            let hr = load_png(path)?;
            let lr = degrade_image(&hr, bank, scale, &mut rng_from_seed(image_seed))?;
            save_png(&lr, out_dir.join(&name))?;
            Ok(ImageRecord {
                name,
                index,
                seed: image_seed,
                hr_width: hr.width(),
                hr_height: hr.height(),
                lr_width: lr.width(),
                lr_height: lr.height(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let summary = CorpusSummary {
        seed,
        scale,
        seed_derivation: "splitmix64(seed ^ splitmix64(index))",
        bank: bank.summary(),
        images,
    };
    let path = out_dir.join(SUMMARY_FILE);
    let text = serde_json::to_string_pretty(&summary).expect("summary serialization");
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn checkerboard(side: usize) -> Image {
        Image::from_fn(side, side, 1, |x, y, _| if (x + y) % 2 == 0 { 0 } else { 255 }).unwrap()
    }

    fn single(id: &str, img: Image) -> Corpus {
        Corpus::from_images([(id.to_string(), img)]).unwrap()
    }

    #[test]
    fn constant_image_every_window_qualifies() {
        let bank = extract_noise_patches(&single("c", Image::filled(64, 96, 1, 40).unwrap()), 1.0, 32, 32).unwrap();
        assert_eq!(bank.len(), 6);
        assert!(bank.tiles.iter().all(|t| t.residual.iter().all(|&r| r == 0.0)));
        assert_eq!(bank.sources[1].x, 32);
        assert_eq!(bank.sources[2].y, 32);
    }

    #[test]
    fn checkerboard_yields_empty_bank() {
        let err = extract_noise_patches(&single("k", checkerboard(64)), 64.0, 32, 32).unwrap_err();
        assert_eq!(err.kind_name(), "empty-bank");
    }

    #[test]
    fn too_small_and_zero_stride() {
        let c = single("s", Image::filled(16, 16, 1, 0).unwrap());
        assert_eq!(extract_noise_patches(&c, 1.0, 32, 32).unwrap_err().kind_name(), "image-too-small");
        assert_eq!(extract_noise_patches(&c, 1.0, 8, 0).unwrap_err().kind_name(), "config-error");
    }

    #[test]
    fn rgb_tiles_are_zero_mean_per_channel() {
        let img = Image::from_fn(40, 40, 3, |x, y, c| (100 + (x * 3 + y * 5 + c * 7) % 5) as u8).unwrap();
        let bank = extract_noise_patches(&single("rgb", img), 10.0, 8, 4).unwrap();
        assert!(!bank.is_empty());
        for t in &bank.tiles {
            assert_eq!(t.channels, 3);
            for m in t.channel_means() {
                assert!(m.abs() < 1e-9);
            }
        }
    }

    #[test]
    fn zero_bank_equals_bicubic() {
        let hr = Image::from_fn(64, 48, 3, |x, y, c| ((x * 5 + y * 3 + c * 50) % 256) as u8).unwrap();
        let bank = NoiseBank::zeros(3, 3, 8);
        let out = degrade_image(&hr, &bank, 4, &mut rng_from_seed(1)).unwrap();
        let plain = bicubic_resize(&hr, &ResampleSpec::downscale(4).unwrap()).unwrap();
        assert_eq!(out, plain);
    }

    #[test]
    fn zero_mean_tile_preserves_brightness() {
        let hr = Image::filled(128, 128, 1, 128).unwrap();
        let residual: Vec<f64> = (0..64).map(|i| if i % 2 == 0 { 3.0 } else { -3.0 }).collect();
        let bank = NoiseBank::from_tiles(vec![NoiseTile { channels: 1, side: 8, residual }], 8).unwrap();
        let out = degrade_image(&hr, &bank, 4, &mut rng_from_seed(4)).unwrap();
        let mean = out.data().iter().map(|&v| v as f64).sum::<f64>() / out.data().len() as f64;
        assert!((mean - 128.0).abs() <= 0.5);
        assert!(out.data().iter().all(|&v| v == 125 || v == 131));
    }

    #[test]
    fn empty_bank_is_rejected() {
        let hr = Image::filled(16, 16, 1, 0).unwrap();
        let bank = NoiseBank::zeros(0, 1, 4);
        assert_eq!(degrade_image(&hr, &bank, 4, &mut rng_from_seed(0)).unwrap_err().kind_name(), "empty-bank");
    }

    #[test]
    fn grid_offsets_cover_valid_positions() {
        assert_eq!(grid_offsets(10, 4, 3).collect::<Vec<_>>(), vec![0, 3, 6]);
        assert_eq!(grid_offsets(3, 4, 1).count(), 0);
        assert_eq!(grid_offsets(4, 4, 100).collect::<Vec<_>>(), vec![0]);
    }
}
