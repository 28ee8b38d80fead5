use std::path::PathBuf;

use thiserror::Error;

use crate::table::AxisKey;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("axis {0} is not part of the table")]
    UnknownAxis(AxisKey),

    #[error("axis {0} appears more than once")]
    DuplicateAxis(AxisKey),

    #[error("tables share axis {0}")]
    OverlappingAxes(AxisKey),

    #[error("conditioning context {context} has zero probability")]
    ZeroMassContext { context: String },

    #[error("conditioning contradicts the intervention at {0}")]
    ConditioningInconsistent(AxisKey),

    #[error("interventions must cover the same variables at every position: {0}")]
    InconsistentInterventionPattern(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid value {value} for axis {axis} with cardinality {card}")]
    ValueOutOfRange { axis: AxisKey, value: usize, card: usize },

    #[error("graph contains a cycle")]
    Cyclic,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
