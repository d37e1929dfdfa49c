use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("sample needs at least 2 observations, got {0}")]
    TooFewObservations(usize),

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("invalid rule: {0}")]
    InvalidRule(String),

    #[error("rule class is empty")]
    EmptyClass,

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("operation requires scalar features, sample has dimension {0}")]
    NonScalarFeatures(usize),

    #[error("operation requires an exact discrete oracle")]
    InexactOracle,

    #[error("degenerate study: {0}")]
    DegenerateStudy(String),

    #[error("rate fit needs at least 3 positive points, got {0}")]
    TooFewFitPoints(usize),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("{context}: {source}")]
    Csv {
        context: String,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
