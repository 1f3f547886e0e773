use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("invalid mapping: {0}")]
    InvalidMapping(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("budget guard: {0} (pass --force to override)")]
    Budget(String),

    #[error("outside validated domain: {0}")]
    OutOfDomain(String),

    #[error("singular input: {0}")]
    Singular(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("conditioning failed after {attempts} attempts ({accepted} accepted)")]
    ConditioningFailed { attempts: u64, accepted: u64 },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Budget(_) => 3,
            Error::Fit(_) => 4,
            Error::Io(_) | Error::Json(_) => 1,
            _ => 2,
        }
    }
}
