use thiserror::Error;

/// Library-wide error type. The CLI maps variants onto exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("corrupt stream: {0}")]
    CorruptStream(String),
    #[error("memory synchronization error: stream fingerprint {expected:#018x}, supplied memory hashes to {found:#018x}")]
    Synchronization { expected: u64, found: u64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub fn corrupt(msg: impl Into<String>) -> Self {
        Error::CorruptStream(msg.into())
    }
}
