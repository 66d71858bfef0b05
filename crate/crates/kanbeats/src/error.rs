//! Crate-wide error type and exit-code mapping for the CLI.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("{path}:{line}: {msg}")]
    CsvParse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("{market}: gap of {missing_hours} missing hour(s) between {from} and {to} exceeds the 3h repair limit")]
    DataGap {
        market: String,
        missing_hours: i64,
        from: String,
        to: String,
    },

    #[error("dimension mismatch: {0}")]
    Shape(String),

    #[error("checkpoint format version {found} is not supported (expected {expected})")]
    CheckpointVersion { found: u32, expected: u32 },

    #[error("checkpoint corrupt: {0}")]
    CheckpointCorrupt(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// CLI exit code: 2 config, 3 data, 4 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Shape(_) => 2,
            Error::Data(_)
            | Error::CsvParse { .. }
            | Error::DataGap { .. }
            | Error::CheckpointVersion { .. }
            | Error::CheckpointCorrupt(_)
            | Error::Io(_) => 3,
            Error::Numeric(_) => 4,
        }
    }
}
