use thiserror::Error;

/// Every fallible operation in the crate reports through this type.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum NekError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("budget exceeded: attempted {attempted}, cap {cap}")]
    Budget { attempted: usize, cap: usize },
    #[error("small divisor |k.omega| = {value:.3e} < {bound:.3e} at k = {k:?}, I = {at:?}")]
    SmallDivisor {
        k: Vec<i64>,
        at: Vec<f64>,
        value: f64,
        bound: f64,
    },
    #[error("regularity precondition failed: {0}")]
    Regularity(String),
    #[error("threshold check refused: {0}")]
    Threshold(String),
    #[error("divergence: residual norms per step {0:?}")]
    Divergence(Vec<f64>),
    #[error("integration error: {0}")]
    Integration(String),
    #[error("invariant violation: {0}")]
    Invariant(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, NekError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(NekError::Domain(msg.into()))
}

impl From<std::io::Error> for NekError {
    fn from(e: std::io::Error) -> Self {
        NekError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for NekError {
    fn from(e: serde_json::Error) -> Self {
        NekError::Format(e.to_string())
    }
}
