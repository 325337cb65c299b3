use thiserror::Error;

use crate::model::SettingPair;

/// Failures raised by a hidden-variable model while producing trials.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("model `{model}` needs the setting pair to sample its hidden variable")]
    SettingsRequired { model: &'static str },
    #[error("model `{model}` has no exact source distribution")]
    NoExactSource { model: &'static str },
    #[error(
        "model `{model}` violates measurement independence; no single class distribution exists"
    )]
    NotMeasurementIndependent { model: &'static str },
    #[error("model `{model}`: {reason}")]
    Domain { model: &'static str, reason: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("n_per_series must be at least 1")]
    EmptyRun,
    #[error("cannot estimate a correlation from an empty series")]
    EmptySeries,
    #[error("trial log carries no hidden-variable tags (quantum trials cannot be classified)")]
    MissingHiddenVariables,
    #[error("class frequencies are missing setting pair {0}")]
    MissingPair(SettingPair),
    #[error("invalid class weights: {0}")]
    InvalidWeights(String),
    #[error("invalid class frequencies: {0}")]
    InvalidFrequencies(String),
    #[error("invalid behavior statistics: {0}")]
    InvalidStatistics(String),
    #[error("invalid correlation table: {0}")]
    InvalidTable(String),
    #[error("angle must be finite, got {0}")]
    NonFiniteAngle(f64),
    #[error("phi = {0} is degenerate (a multiple of pi)")]
    DegeneratePhi(f64),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("{found} distinct variables exceed the enumeration limit of {limit}")]
    TooManyVariables { found: usize, limit: usize },
    #[error("unknown model `{0}`")]
    UnknownModel(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
