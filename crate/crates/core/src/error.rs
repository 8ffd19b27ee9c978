use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("format error at row {row}: {message}")]
    Format { row: usize, message: String },

    #[error("class {class} has {have} members, need {need}")]
    InsufficientClassSize { class: usize, have: usize, need: usize },

    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("at least two classes are required")]
    NeedTwoClasses,

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("operation requires exactly two classes, got {0}")]
    NotBinary(usize),

    #[error("class means are identical; no discriminant direction exists")]
    DegenerateMeans,

    #[error("discriminant recursion broke down at direction {at}; {produced} directions were produced")]
    RecursionBreakdown { at: usize, produced: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("repetition {repetition}, method {method}: {source}")]
    Experiment {
        repetition: usize,
        method: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for failures caused by the numerics rather than by the data or configuration.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NotPositiveDefinite
            | Error::NumericalFailure(_)
            | Error::RecursionBreakdown { .. } => true,
            Error::Experiment { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    /// Short stable identifier used as a machine-parsable prefix by the CLI.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::NotPositiveDefinite => "not-positive-definite",
            Error::Io { .. } => "io",
            Error::Format { .. } => "format",
            Error::InsufficientClassSize { .. } => "insufficient-class-size",
            Error::NegativeEntry { .. } => "negative-entry",
            Error::NeedTwoClasses => "need-two-classes",
            Error::NumericalFailure(_) => "numerical-failure",
            Error::NotBinary(_) => "not-binary",
            Error::DegenerateMeans => "degenerate-means",
            Error::RecursionBreakdown { .. } => "recursion-breakdown",
            Error::Config(_) => "config",
            Error::Experiment { source, .. } => source.kind(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
