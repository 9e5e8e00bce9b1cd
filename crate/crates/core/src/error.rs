use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("line {line}: expected {expected} feature columns, found {found}")]
    InconsistentFeatureDim {
        line: u64,
        expected: usize,
        found: usize,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("degenerate time axis: all timestamps are identical")]
    DegenerateTimeAxis,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected at most {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("descriptor configuration mismatch: {0}")]
    DescriptorMismatch(String),

    #[error("degenerate descriptor: all-zero matrix has no direction")]
    DegenerateDescriptor,

    #[error("no response: series is constant")]
    ConstantSeries,

    #[error("no features to permute")]
    NoFeatures,

    #[error("clustering failed: {0}")]
    Clustering(String),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("toml error: {0}")]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
