use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),
    #[error("non-finite input: {0}")]
    NonFiniteInput(String),
    #[error("non-finite output at t = {t}")]
    NonFiniteOutput { t: f64 },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("no admissible partner exponent: {0}")]
    NoAdmissiblePartner(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("trajectory coverage: {0}")]
    Coverage(String),
    #[error("ledger too short: {0}")]
    LedgerTooShort(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
