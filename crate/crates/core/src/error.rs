//! Error types shared across the toolkit.

use thiserror::Error;

/// Unified error type for the library surface.
///
/// The variants map onto the process exit codes used by the CLI:
/// configuration problems, data problems and internal failures are kept
/// apart so callers can react differently to each.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration: unknown learner ids, out-of-range
    /// hyperparameters, impossible split plans and the like.
    #[error("config error: {0}")]
    Config(String),

    /// Malformed or unusable input data (event logs, CSV files).
    #[error("data error: {0}")]
    Data(String),

    /// An encoding produced no samples for the requested window size.
    /// Carries the dataset name and window size so callers can skip the
    /// configuration instead of aborting a whole run.
    #[error("empty dataset: {dataset} has no samples for window size {window_size}")]
    EmptyDataset { dataset: String, window_size: usize },

    /// A prediction-time input did not match the model schema.
    #[error("input error: {0}")]
    Input(String),

    /// Internal consistency violation; indicates a bug rather than bad input.
    #[error("internal error: {0}")]
    Internal(String),

    /// Arithmetic preconditions violated (zero baselines, negative values).
    #[error("arithmetic error: {0}")]
    Arithmetic(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
