use thiserror::Error;

#[derive(Debug, Error)]
pub enum XctlError {
    /// Bad flags, config entries or parameter ranges (exit code 2).
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] loopon::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, XctlError>;

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(XctlError::Usage(msg.into()))
}
