use std::path::PathBuf;

/// Errors produced anywhere in the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("stability violation: time step {dt:.3e} exceeds the limit {limit:.3e}")]
    Stability { dt: f64, limit: f64 },

    #[error("root finding failed at y = {y}: {reason}")]
    RootFinding { y: f64, reason: String },

    #[error("quadrature order {order} misses tolerance {tol:.1e} (estimated error {estimate:.2e})")]
    Quadrature { order: usize, tol: f64, estimate: f64 },

    #[error("iteration budget of {iterations} exhausted, achieved relative change {achieved:.3e}")]
    NotConverged { iterations: usize, achieved: f64 },

    #[error("backend refused: {0}")]
    Backend(String),

    #[error("internal inconsistency: {0}")]
    Internal(String),

    #[error("{path}: not a recognised file (bad magic bytes)")]
    BadMagic { path: PathBuf },

    #[error("{path}: corrupt header: {reason}")]
    CorruptHeader { path: PathBuf, reason: String },

    #[error("{path}: format version {found} is not supported (expected {expected})")]
    VersionMismatch { path: PathBuf, found: u32, expected: u32 },

    #[error("{path}: payload truncated, expected {expected} bytes, found {found}")]
    Truncated { path: PathBuf, expected: usize, found: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
