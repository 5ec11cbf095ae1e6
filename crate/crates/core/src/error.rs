use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the amplifier-noise library.
///
/// Mode indices carried by variants are always 1-based.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mode index {index} out of range (1..={n})")]
    ModeOutOfRange { index: usize, n: usize },

    #[error("mode pair ({k}, {l}) must satisfy k < l")]
    PairOrder { k: usize, l: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty ladder signature")]
    EmptySignature,

    #[error("invalid signature tag {0:?} (expected \"a\" or \"c\")")]
    InvalidTag(String),

    #[error("nonlinear phase must be finite and non-negative, got {0}")]
    InvalidPhase(f64),

    #[error("row condition violated at row {row}: residual {residual:.3e} > tolerance {tol:.1e}")]
    RowCondition { row: usize, residual: f64, tol: f64 },

    #[error("invalid input state: {0}")]
    InvalidInput(String),

    #[error("noise figure of mode {mode} is undefined: {reason}")]
    UndefinedNoiseFigure { mode: usize, reason: &'static str },

    #[error("Fock space dimension {dim} exceeds limit {limit}")]
    FockDimension { dim: u128, limit: u128 },

    #[error("coherent amplitude |alpha|^2 = {alpha_sq} too large for cutoff {cutoff} (truncation loss {loss:.3e})")]
    Truncation { alpha_sq: f64, cutoff: usize, loss: f64 },

    #[error("oracle did not converge up to cutoff {cutoff} (relative change {change:.3e})")]
    NonConvergence { cutoff: usize, change: f64 },

    #[error("hermiticity residual {residual:.3e} for mode {mode}")]
    Hermiticity { mode: usize, residual: f64 },

    #[error("invalid sweep specification: {0}")]
    InvalidSpec(String),

    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Write(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
