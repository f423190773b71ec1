use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the estimators, the simulation harness and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty sample")]
    EmptySample,

    #[error("theorem requires n ≥ 3 (got n = {0})")]
    SampleTooSmall(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("label {label} out of range for a distribution over {species} species")]
    LabelOutOfRange { label: usize, species: usize },

    #[error("all points extreme; estimator undefined")]
    AllPointsExtreme,

    #[error("exact volume unsupported above d=3 (got d = {0})")]
    VolumeUnsupported(usize),

    #[error("no dominated points; estimate undefined")]
    NoDominatedPoints,

    #[error("closure is not enumerable for this order")]
    NotEnumerable,

    #[error("distance undefined (saturated)")]
    SaturatedDistance,

    #[error("invalid sequence {id}: {reason}")]
    InvalidSequence { id: String, reason: String },

    #[error("singular design")]
    SingularDesign,

    #[error("singular design when leaving out row {0}")]
    SingularSubFit(usize),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("ground-truth evaluation failed for {scenario}: {reason}")]
    GroundTruth { scenario: String, reason: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
