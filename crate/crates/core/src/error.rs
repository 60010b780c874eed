use std::io;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter lies outside its admissible domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An estimator was handed zero bits.
    #[error("empty input: at least one bit is required")]
    EmptyInput,

    /// Not enough bits for the requested statistic.
    #[error("insufficient data: need at least {needed} bits, got {got}")]
    InsufficientData { needed: u64, got: u64 },

    /// The input has no variance (all zeros or all ones).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A bit file could not be parsed.
    #[error("malformed bit file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
