use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("missing file: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("malformed CSV: {0}")]
    Csv(String),

    #[error("ragged rows: line {line} has {found} fields, header has {expected}")]
    RaggedRow {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("no target column named `{0}`")]
    NoTargetColumn(String),

    #[error("zero data rows")]
    ZeroDataRows,

    #[error("invalid target: {0}")]
    InvalidTarget(String),

    #[error("all feature columns dropped during preprocessing")]
    AllFeaturesDropped,

    #[error("invalid fold count k={k} for n={n} rows")]
    InvalidFoldCount { k: usize, n: usize },

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite values in {0}")]
    NonFinite(&'static str),

    #[error("linear system is singular")]
    Singular,

    #[error("support cap s_max={s_max} exceeds block count m={m}")]
    SupportTooLarge { s_max: usize, m: usize },

    #[error("all activation columns are constant")]
    DegenerateActivations,

    #[error("feature not in model: {0}")]
    FeatureNotInModel(String),

    #[error("solver did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("empty lambda grid")]
    EmptyGrid,

    #[error("labels contain a single class")]
    SingleClass,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("serialization error: {0}")]
    Serde(String),

    #[error("registry error: {0}")]
    Registry(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

impl From<toml::de::Error> for Error {
    fn from(e: toml::de::Error) -> Self {
        Error::Registry(e.to_string())
    }
}
