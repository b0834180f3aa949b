//! Variance-matched patch sampling for unpaired super-resolution training.
//!
//! LR and HR corpora are unrelated scenes. Sampling draws candidate patches
//! from both and keeps only pairs whose luminance variances differ by less
//! than a threshold, so each pair carries a similar amount of content.
//! Patch statistics come from summed-area tables in constant time.
//!
//! Supporting pieces: bicubic resampling, noise-bank degradation for building
//! synthetic LR corpora, PSNR/SSIM and loss aggregation.

pub mod corpus;
pub mod degrade;
pub mod error;
pub mod image;
pub mod manifest;
pub mod metrics;
#[cfg(any(test, feature = "oracle"))]
pub mod oracle;
pub mod report;
pub mod resample;
pub mod rng;
pub mod sampler;
pub mod stats;
pub mod synth;

pub use corpus::{Corpus, CorpusEntry};
pub use degrade::{build_synthetic_corpus, degrade_image, extract_noise_patches, CorpusSummary, NoiseBank};
pub use error::{Error, Result};
pub use image::{load_png, save_png, to_luminance, Image};
pub use manifest::{export_manifest, read_manifest, verify_manifest, ManifestRecord};
pub use metrics::{compose_loss, l1_distance, l2_distance, psnr, ssim, LossComponents, LossWeights, Psnr};
pub use resample::{bicubic_resize, ResampleSpec};
pub use rng::{derive_seed, rng_from_seed, SampleRng};
pub use sampler::{
    extract_candidates, match_pairs, sample_batch, PairBatch, PairSampler, PatchPair, PatchRef, SamplerConfig,
};
pub use stats::{build_integral, patch_stats, IntegralTable, PatchStats};
