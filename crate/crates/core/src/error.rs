//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("LFSR degree {0} outside supported range 3..=10")]
    InvalidDegree(u32),

    #[error("invalid tap set {taps:?} for degree {degree}")]
    InvalidTaps { degree: u32, taps: Vec<u32> },

    #[error("tap set {taps:?} is not maximal: period {period}, expected {expected}")]
    NonMaximalPolynomial {
        taps: Vec<u32>,
        period: usize,
        expected: usize,
    },

    #[error("invalid signature code: {0}")]
    InvalidCode(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid offsets: {0}")]
    Offset(String),

    #[error("zero-forcing matrix is singular for V={elements}, L={length}")]
    Singular { elements: usize, length: usize },

    #[error("reference element estimate is zero")]
    ReferenceZero,

    #[error("phase RMSE radicand is negative ({0}); inputs are outside the high-SNR regime")]
    NegativeRadicand(f64),

    #[error("invalid element gains: {0}")]
    InvalidGains(String),

    #[error("invalid scenario configuration: {0}")]
    Config(String),

    #[error("unknown figure '{0}', expected one of fig5, fig6, fig7, fig8")]
    UnknownFigure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
