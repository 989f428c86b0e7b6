use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("truncation mismatch: {0}")]
    Cutoff(String),
    #[error("space mismatch: {0}")]
    Space(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("master equation fails: {0}")]
    MasterEquation(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error("singularity is not isolated: {0}")]
    NonIsolated(String),
    #[error("numerical diagnostic: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
