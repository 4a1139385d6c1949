use thiserror::Error;

use crate::models::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("feature {feature}: {message}")]
    Domain { feature: usize, message: String },

    #[error("point has {got} coordinates but the model has {expected} features")]
    Arity { expected: usize, got: usize },

    #[error("feature {feature} out of range for a model with {count} features")]
    FeatureOutOfRange { feature: usize, count: usize },

    #[error("feature {0} is already in the conditioning set")]
    FeatureInSet(usize),

    #[error("weight undefined for a set of size {size} with {count} features")]
    WeightSetTooLarge { size: usize, count: usize },

    #[error("{what} supports at most {limit} features, got {count}")]
    TooManyFeatures {
        what: &'static str,
        limit: usize,
        count: usize,
    },

    #[error("invalid model: {}", join_violations(.0))]
    InvalidModel(Vec<Violation>),

    #[error("invalid explanation problem: {0}")]
    InvalidProblem(String),

    #[error("model output {0} is not boolean")]
    NonBoolean(String),

    #[error("generator precondition violated: {0}")]
    Precondition(String),

    #[error("construction condition failed: {0}")]
    ConditionFailed(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

fn join_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
