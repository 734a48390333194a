use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed station: {0}")]
    MalformedStation(String),

    #[error("invalid train `{train}`: {reason}")]
    InvalidTrain { train: String, reason: String },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("invalid path for train `{train}`: {reason}")]
    InvalidPath { train: String, reason: String },

    #[error("train `{0}` is cancelled, shifts are undefined")]
    Cancelled(String),

    #[error("enumeration refused: {0}")]
    EnumerationCap(String),

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("invalid solution file: {0}")]
    SolutionFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
