use std::path::PathBuf;

use thiserror::Error;

use crate::corpus::{CountryCode, RecordDefect};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {defect}")]
    Record { line: usize, defect: RecordDefect },

    #[error("region map: {0}")]
    RegionMap(String),

    #[error("conflicting region for {0}")]
    ConflictingRegion(CountryCode),

    #[error("cannot merge profile sets of {left} and {right}")]
    CountryMismatch {
        left: CountryCode,
        right: CountryCode,
    },

    #[error("value {value} for {country} is outside [0, 1]")]
    OutOfRange { country: CountryCode, value: f64 },

    #[error("unknown selector `{name}`; valid selectors: {valid}")]
    UnknownSelector { name: String, valid: String },

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Usage problems map to exit code 1, everything data-related to 2.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::UnknownSelector { .. } => 1,
            _ => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Record { .. } => "record",
            Error::RegionMap(_) | Error::ConflictingRegion(_) => "region_map",
            Error::CountryMismatch { .. } => "country_mismatch",
            Error::OutOfRange { .. } => "out_of_range",
            Error::UnknownSelector { .. } => "unknown_selector",
            Error::Scenario(_) => "scenario",
            Error::Config(_) => "usage",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}
