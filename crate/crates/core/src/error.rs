use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the sampling pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported or malformed image {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("resampling to {width}x{height} would produce an empty image")]
    DegenerateOutput { width: usize, height: usize },

    #[error("expected a single-channel plane, got {channels} channels")]
    MultichannelInput { channels: usize },

    #[error("image of {samples} samples is too large for exact integral accumulation")]
    OverflowRisk { samples: u64 },

    #[error("rectangle ({x},{y}) {w}x{h} is outside a {width}x{height} plane")]
    OutOfBounds { x: usize, y: usize, w: usize, h: usize, width: usize, height: usize },

    #[error("image {id} ({width}x{height}) is smaller than patch side {size}")]
    ImageTooSmall { id: String, width: usize, height: usize, size: usize },

    #[error("insufficient pairs: achieved {achieved} of {required} after {retries} retries")]
    InsufficientPairs { achieved: usize, required: usize, retries: usize },

    #[error("image not found: {0}")]
    ImageNotFound(String),

    #[error("noise bank is empty: no window passed the variance threshold")]
    EmptyBank,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("image is {width}x{height}, SSIM needs at least 11x11")]
    TooSmall { width: usize, height: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("corpus is empty: {0}")]
    EmptyCorpus(String),

    #[error("manifest error at line {line}: {reason}")]
    Manifest { line: usize, reason: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Stable machine-readable name of the error kind.
    pub fn kind_name(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io-error",
            Error::Format { .. } => "format-error",
            Error::InvalidImage(_) => "invalid-image",
            Error::DegenerateOutput { .. } => "degenerate-output",
            Error::MultichannelInput { .. } => "multichannel-input",
            Error::OverflowRisk { .. } => "overflow-risk",
            Error::OutOfBounds { .. } => "out-of-bounds",
            Error::ImageTooSmall { .. } => "image-too-small",
            Error::InsufficientPairs { .. } => "insufficient-pairs",
            Error::ImageNotFound(_) => "image-not-found",
            Error::EmptyBank => "empty-bank",
            Error::ShapeMismatch(_) => "shape-mismatch",
            Error::TooSmall { .. } => "too-small",
            Error::Config(_) => "config-error",
            Error::EmptyCorpus(_) => "empty-corpus",
            Error::Manifest { .. } => "manifest-error",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
