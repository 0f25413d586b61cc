use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("not a valid gossip matrix: {0}")]
    InvalidGossipMatrix(String),

    #[error("random two-neighbor mixing requires M >= 3 (got M = {0})")]
    RandomMixingTooSmall(usize),

    #[error("spectral gap closed; theory bound undefined (rho = {0})")]
    SpectralGapClosed(f64),

    #[error("noiseless regime: bound degenerates, choose t manually")]
    NoiselessRounds,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("worker count mismatch: matrix is {matrix} columns, {workers} workers")]
    WorkerCountMismatch { matrix: usize, workers: usize },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("non-finite value in worker {worker} at iteration {iteration}")]
    NumericalAbort { iteration: usize, worker: usize },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
