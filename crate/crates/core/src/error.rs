use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("trace is {trace}, expected 1")]
    NotUnitTrace { trace: f64 },

    #[error("matrix has eigenvalue {eigenvalue:e} below the PSD tolerance")]
    NotPositive { eigenvalue: f64 },

    #[error("non-finite matrix entry")]
    NonFinite,

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("invalid entropy parameters q={q}, z={z}: {reason}")]
    InvalidParams { q: f64, z: f64, reason: &'static str },

    #[error("weight function diverges at s={s:e}")]
    DivergentWeight { s: f64 },

    #[error("invalid model parameter: {0}")]
    InvalidModel(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("normalization trace vanished at t={t} (trace {trace:e})")]
    VanishingNorm { t: f64, trace: f64 },

    #[error("bound chain violated at t={t}: {detail}")]
    ChainViolation { t: f64, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;
