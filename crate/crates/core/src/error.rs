use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invariant `{name}` violated: {detail}")]
    Invariant { name: &'static str, detail: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    Dimension {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("calibration response is zero at bin {bin}")]
    ZeroCalibration { bin: usize },

    #[error("sweep carries no power; path loss is unbounded")]
    ZeroPower,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("under-determined fit: {points} points for {params} free parameters")]
    UnderDetermined { points: usize, params: usize },

    #[error(transparent)]
    Parse(#[from] crate::campaign_io::ParseError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
