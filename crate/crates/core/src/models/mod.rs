//! Explicitly represented classifiers and regression models.
//!
//! Two representations share one [`Model`] type: a [`TabularModel`] lists the
//! output of every point of a finite feature space, and a [`PiecewiseModel`]
//! partitions a box into cells carrying multilinear polynomials. Both evaluate
//! exactly and compute conditioned expectations under the uniform
//! distribution, by counting or by closed-form integration respectively.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feature_set::{FeatureSet, MAX_FEATURES};
use crate::rational::{format_rational, parse_rational, Rational};

pub mod json;
mod piecewise;
mod polynomial;
mod tabular;

pub(crate) use piecewise::corner_points;
pub use piecewise::{Cell, FaceViolation, InputNorm, LipschitzBound, PiecewiseModel};
pub use polynomial::{Polynomial, Term};
pub use tabular::{ConsistentIndices, TabularModel};

/// Named values of a finite feature, each carrying a rational for ordinal use.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteDomain {
    labels: Vec<String>,
    values: Vec<Rational>,
}

impl FiniteDomain {
    pub fn new(labels: Vec<String>, values: Vec<Rational>) -> Result<Self> {
        if labels.len() != values.len() {
            return Err(Error::Parse(format!(
                "{} labels but {} values",
                labels.len(),
                values.len()
            )));
        }
        Ok(FiniteDomain { labels, values })
    }

    /// Labels that parse as rationals keep that value; any other label is
    /// mapped to its position.
    pub fn from_labels(labels: Vec<String>) -> Self {
        let values = labels
            .iter()
            .enumerate()
            .map(|(k, l)| parse_rational(l).unwrap_or_else(|_| Rational::from_integer(k.into())))
            .collect();
        FiniteDomain { labels, values }
    }

    pub fn boolean() -> Self {
        FiniteDomain::from_labels(vec!["0".into(), "1".into()])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn index_of_value(&self, value: &Rational) -> Option<usize> {
        self.values.iter().position(|v| v == value)
    }

    pub fn index_of_label(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Domain {
    Finite(FiniteDomain),
    Interval { lo: Rational, hi: Rational },
}

impl Domain {
    pub fn contains(&self, value: &Rational) -> bool {
        match self {
            Domain::Finite(d) => d.index_of_value(value).is_some(),
            Domain::Interval { lo, hi } => lo <= value && value <= hi,
        }
    }

    fn check(&self, feature: usize) -> Result<()> {
        match self {
            Domain::Finite(d) => {
                if d.len() < 2 {
                    return Err(Error::Domain {
                        feature,
                        message: "finite domain needs at least two values".into(),
                    });
                }
                let values: HashSet<&Rational> = d.values.iter().collect();
                let labels: HashSet<&String> = d.labels.iter().collect();
                if values.len() != d.len() || labels.len() != d.len() {
                    return Err(Error::Domain {
                        feature,
                        message: "duplicate domain value".into(),
                    });
                }
            }
            Domain::Interval { lo, hi } => {
                if lo >= hi {
                    return Err(Error::Domain {
                        feature,
                        message: format!("empty interval [{lo}, {hi}]"),
                    });
                }
            }
        }
        Ok(())
    }
}

/// `D_1 × … × D_m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureSpace {
    domains: Vec<Domain>,
}

impl FeatureSpace {
    pub fn new(domains: Vec<Domain>) -> Result<Self> {
        if domains.is_empty() {
            return Err(Error::Parse(
                "feature space needs at least one feature".into(),
            ));
        }
        if domains.len() > MAX_FEATURES {
            return Err(Error::TooManyFeatures {
                what: "a feature space",
                limit: MAX_FEATURES,
                count: domains.len(),
            });
        }
        for (i, d) in domains.iter().enumerate() {
            d.check(i + 1)?;
        }
        Ok(FeatureSpace { domains })
    }

    pub fn boolean(m: usize) -> Result<Self> {
        FeatureSpace::new(vec![Domain::Finite(FiniteDomain::boolean()); m])
    }

    pub fn boxed(bounds: Vec<(Rational, Rational)>) -> Result<Self> {
        FeatureSpace::new(
            bounds
                .into_iter()
                .map(|(lo, hi)| Domain::Interval { lo, hi })
                .collect(),
        )
    }

    pub fn feature_count(&self) -> usize {
        self.domains.len()
    }

    pub fn domains(&self) -> &[Domain] {
        &self.domains
    }

    pub fn domain(&self, i: usize) -> &Domain {
        &self.domains[i]
    }

    pub fn check_point(&self, point: &[Rational]) -> Result<()> {
        if point.len() != self.domains.len() {
            return Err(Error::Arity {
                expected: self.domains.len(),
                got: point.len(),
            });
        }
        for (i, (d, x)) in self.domains.iter().zip(point).enumerate() {
            if !d.contains(x) {
                return Err(Error::Domain {
                    feature: i + 1,
                    message: format!("value {x} is outside the feature domain"),
                });
            }
        }
        Ok(())
    }

    pub fn check_subset(&self, set: FeatureSet) -> Result<()> {
        if set.span() > self.domains.len() {
            return Err(Error::FeatureOutOfRange {
                feature: set.span(),
                count: self.domains.len(),
            });
        }
        Ok(())
    }
}

/// A classifier or regression model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Model {
    Tabular(TabularModel),
    Piecewise(PiecewiseModel),
}

impl Model {
    pub fn space(&self) -> &FeatureSpace {
        match self {
            Model::Tabular(t) => t.space(),
            Model::Piecewise(p) => p.space(),
        }
    }

    pub fn feature_count(&self) -> usize {
        self.space().feature_count()
    }

    pub fn evaluate(&self, point: &[Rational]) -> Result<Rational> {
        match self {
            Model::Tabular(t) => t.evaluate(point),
            Model::Piecewise(p) => p.evaluate(point),
        }
    }

    /// `E[τ(x) | x_S = v_S]` under the uniform distribution.
    pub fn conditioned_expectation(&self, v: &[Rational], fixed: FeatureSet) -> Result<Rational> {
        match self {
            Model::Tabular(t) => t.conditioned_expectation(v, fixed),
            Model::Piecewise(p) => p.conditioned_expectation(v, fixed),
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate_model(self)
    }

    pub fn as_tabular(&self) -> Option<&TabularModel> {
        match self {
            Model::Tabular(t) => Some(t),
            Model::Piecewise(_) => None,
        }
    }

    pub fn as_piecewise(&self) -> Option<&PiecewiseModel> {
        match self {
            Model::Piecewise(p) => Some(p),
            Model::Tabular(_) => None,
        }
    }
}

impl From<TabularModel> for Model {
    fn from(t: TabularModel) -> Self {
        Model::Tabular(t)
    }
}

impl From<PiecewiseModel> for Model {
    fn from(p: PiecewiseModel) -> Self {
        Model::Piecewise(p)
    }
}

/// A target sample `(v, q)` with `q` the model output at `v`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    #[serde(with = "crate::rational::serde_string_vec")]
    pub point: Vec<Rational>,
    #[serde(with = "crate::rational::serde_string")]
    pub prediction: Rational,
}

impl Instance {
    /// Builds the instance at `point`, reading the prediction off the model.
    pub fn at(model: &Model, point: Vec<Rational>) -> Result<Self> {
        let prediction = model.evaluate(&point)?;
        Ok(Instance { point, prediction })
    }
}

/// A structural defect found by [`validate_model`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    OutputCount {
        expected: usize,
        got: usize,
    },
    ConstantFunction,
    CellArity {
        cell: usize,
        expected: usize,
        got: usize,
    },
    EmptyCell {
        cell: usize,
        feature: usize,
    },
    CellOutsideBox {
        cell: usize,
        feature: usize,
    },
    PolynomialVariable {
        cell: usize,
        feature: usize,
    },
    CellOverlap {
        first: usize,
        second: usize,
    },
    Coverage {
        covered: Rational,
        required: Rational,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::OutputCount { expected, got } => {
                write!(
                    f,
                    "table has {got} outputs, feature space has {expected} points"
                )
            }
            Violation::ConstantFunction => write!(f, "model function is constant"),
            Violation::CellArity {
                cell,
                expected,
                got,
            } => {
                write!(f, "cell {cell} has {got} bounds, expected {expected}")
            }
            Violation::EmptyCell { cell, feature } => {
                write!(f, "cell {cell} has an empty extent on feature {feature}")
            }
            Violation::CellOutsideBox { cell, feature } => {
                write!(f, "cell {cell} leaves the feature box on feature {feature}")
            }
            Violation::PolynomialVariable { cell, feature } => {
                write!(f, "cell {cell} polynomial uses unknown feature {feature}")
            }
            Violation::CellOverlap { first, second } => {
                write!(f, "cells {first} and {second} overlap in their interiors")
            }
            Violation::Coverage { covered, required } => write!(
                f,
                "cells cover volume {} of a box of volume {}",
                format_rational(covered),
                format_rational(required)
            ),
        }
    }
}

/// Lists every structural defect of `model`; an empty list means valid.
pub fn validate_model(model: &Model) -> Vec<Violation> {
    match model {
        Model::Tabular(t) => t.violations(),
        Model::Piecewise(p) => p.violations(),
    }
}
