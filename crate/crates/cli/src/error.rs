use thiserror::Error;
use varmatch_core::Error as CoreError;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_STARVATION: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{count} of {total} batches starved (insufficient pairs)")]
    Starvation { count: usize, total: usize },

    #[error("file names differ between directories: missing from predictions {missing_pred:?}, missing from references {missing_ref:?}")]
    FilenameMismatch { missing_pred: Vec<String>, missing_ref: Vec<String> },

    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Core(CoreError::Config(_)) => EXIT_CONFIG,
            CliError::Core(CoreError::InsufficientPairs { .. }) | CliError::Starvation { .. } => EXIT_STARVATION,
            CliError::Core(_) | CliError::FilenameMismatch { .. } | CliError::Output { .. } => EXIT_DATA,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config-error",
            CliError::Core(e) => e.kind_name(),
            CliError::Starvation { .. } => "insufficient-pairs",
            CliError::FilenameMismatch { .. } => "filename-mismatch",
            CliError::Output { .. } => "io-error",
        }
    }
}
