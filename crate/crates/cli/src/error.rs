use neklab::NekError;
use thiserror::Error;

/// Failure of a run, carrying its exit status.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or refused input; the message names the field.
    #[error("invalid config: {0}")]
    Validation(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    /// A checked invariant failed; the witness is written next to the
    /// other artifacts.
    #[error("invariant violation: {message}")]
    Invariant {
        message: String,
        witness: serde_json::Value,
    },
    #[error("io error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => 1,
            CliError::Budget(_) => 2,
            CliError::Invariant { .. } => 3,
        }
    }

    pub fn invariant(message: impl Into<String>, witness: impl serde::Serialize) -> Self {
        CliError::Invariant {
            message: message.into(),
            witness: serde_json::to_value(witness).unwrap_or(serde_json::Value::Null),
        }
    }
}

impl From<NekError> for CliError {
    fn from(e: NekError) -> Self {
        let message = e.to_string();
        match e {
            NekError::Budget { attempted, cap } => {
                CliError::Budget(format!("attempted {attempted}, cap {cap}"))
            }
            NekError::SmallDivisor { k, at, value, bound } => CliError::invariant(
                message,
                serde_json::json!({"kind": "small_divisor", "k": k, "at": at, "value": value, "bound": bound}),
            ),
            NekError::Divergence(norms) => CliError::invariant(
                message,
                serde_json::json!({"kind": "divergence", "norms": norms}),
            ),
            NekError::Integration(m) | NekError::Invariant(m) | NekError::Resolution(m) => {
                CliError::invariant(message, serde_json::json!({"kind": "internal", "detail": m}))
            }
            NekError::Io(m) => CliError::Io(m),
            NekError::Domain(_) | NekError::Regularity(_) | NekError::Threshold(_) | NekError::Format(_) => {
                CliError::Validation(message)
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
