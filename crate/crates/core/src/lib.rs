//! Exact SHAP scores, formal explanations and issue detection for small
//! tabular and piecewise-multilinear models.

pub mod error;
pub mod explanations;
pub mod feature_set;
pub mod generators;
pub mod issues;
pub mod models;
pub mod problem;
pub mod rational;
pub mod reproduce;
pub mod shapley;

pub use error::{Error, Result};
pub use feature_set::FeatureSet;
pub use models::{Instance, Model, PiecewiseModel, TabularModel};
pub use problem::{ExplanationProblem, Mode, SimilarityConfig};
pub use rational::Rational;
