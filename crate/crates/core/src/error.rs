use thiserror::Error;

/// Problems with a model, an instance, or their textual forms.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("instance row {row}: {message}")]
    Instance { row: usize, message: String },
}

/// Failures of the SAT oracle layer.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("time budget exhausted")]
    Timeout,
    #[error("unknown selector {0}")]
    UnknownSelector(u32),
    #[error("solver failure: {0}")]
    Backend(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("alternative encoding supports binary classifiers only ({0} classes)")]
    MultiClassUnsupported(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExplainError {
    #[error("no CXp exists: the prediction cannot change")]
    NoCxpExists,
    #[error("time budget exhausted")]
    Timeout,
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("solver failure: {0}")]
    Backend(String),
    #[error(transparent)]
    Encode(#[from] EncodeError),
}

impl From<OracleError> for ExplainError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Timeout => ExplainError::Timeout,
            other => ExplainError::Backend(other.to_string()),
        }
    }
}

impl From<ModelError> for ExplainError {
    fn from(e: ModelError) -> Self {
        ExplainError::Encode(EncodeError::Model(e))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HornError {
    #[error("decision list is outside the self-determining fragment: {0}")]
    NotRestricted(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundError {
    #[error("feature space has {points} points, bound is {max}")]
    TooManyPoints { points: u128, max: u128 },
    #[error("{features} features, bound is {max}")]
    TooManyFeatures { features: usize, max: usize },
}
