use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("accuracy error: {0}")]
    Accuracy(String),
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("contour error: {0}")]
    Contour(String),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("grid error: {0}")]
    Grid(String),
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("regime error: {0}")]
    Regime(String),
    #[error("sampling error: {0}")]
    Sampling(String),
    #[error("precondition error: {0}")]
    Precondition(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag, used in structured error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Accuracy(_) => "accuracy",
            Error::InvalidKernel(_) => "invalid_kernel",
            Error::Config(_) => "config",
            Error::Shape { .. } => "shape",
            Error::Contour(_) => "contour",
            Error::Overflow(_) => "overflow",
            Error::Grid(_) => "grid",
            Error::Resolution(_) => "resolution",
            Error::Regime(_) => "regime",
            Error::Sampling(_) => "sampling",
            Error::Precondition(_) => "precondition",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
