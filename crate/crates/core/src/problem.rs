use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feature_set::FeatureSet;
use crate::models::{Instance, Model};
use crate::rational::{int, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Classification,
    Regression,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Classification => write!(f, "classification"),
            Mode::Regression => write!(f, "regression"),
        }
    }
}

/// Threshold `δ` of the similarity predicate `|τ(x) - q| ≤ δ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimilarityConfig {
    delta: Rational,
}

impl SimilarityConfig {
    pub fn new(delta: Rational) -> Result<Self> {
        if delta.is_negative() {
            return Err(Error::InvalidProblem(format!("delta {delta} is negative")));
        }
        Ok(SimilarityConfig { delta })
    }

    pub fn exact() -> Self {
        SimilarityConfig {
            delta: Rational::zero(),
        }
    }

    pub fn delta(&self) -> &Rational {
        &self.delta
    }
}

/// A model together with the target sample to be explained.
#[derive(Debug)]
pub struct ExplanationProblem {
    model: Model,
    instance: Instance,
    similarity: SimilarityConfig,
    mode: Mode,
    similar_entries: OnceLock<Vec<bool>>,
}

impl Clone for ExplanationProblem {
    fn clone(&self) -> Self {
        ExplanationProblem {
            model: self.model.clone(),
            instance: self.instance.clone(),
            similarity: self.similarity.clone(),
            mode: self.mode,
            similar_entries: OnceLock::new(),
        }
    }
}

impl PartialEq for ExplanationProblem {
    fn eq(&self, other: &Self) -> bool {
        self.model == other.model
            && self.instance == other.instance
            && self.similarity == other.similarity
            && self.mode == other.mode
    }
}

impl ExplanationProblem {
    /// Validates the model, reads `q` off the model at `point` and checks the
    /// threshold against the mode.
    pub fn new(model: Model, point: Vec<Rational>, mode: Mode, delta: Rational) -> Result<Self> {
        let violations = model.validate();
        if !violations.is_empty() {
            return Err(Error::InvalidModel(violations));
        }
        let instance = Instance::at(&model, point)?;
        let similarity = SimilarityConfig::new(delta)?;
        match mode {
            Mode::Classification => {
                if !similarity.delta.is_zero() {
                    return Err(Error::InvalidProblem(
                        "classification problems use delta = 0".into(),
                    ));
                }
            }
            Mode::Regression => {
                if let Some(limit) = delta_limit(&model) {
                    if similarity.delta >= limit {
                        return Err(Error::InvalidProblem(format!(
                            "delta {} must be below {} (half the smallest gap between outputs)",
                            similarity.delta, limit
                        )));
                    }
                }
            }
        }
        Ok(ExplanationProblem {
            model,
            instance,
            similarity,
            mode,
            similar_entries: OnceLock::new(),
        })
    }

    pub fn classification(model: Model, point: Vec<Rational>) -> Result<Self> {
        ExplanationProblem::new(model, point, Mode::Classification, Rational::zero())
    }

    pub fn regression(model: Model, point: Vec<Rational>, delta: Rational) -> Result<Self> {
        ExplanationProblem::new(model, point, Mode::Regression, delta)
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn point(&self) -> &[Rational] {
        &self.instance.point
    }

    pub fn prediction(&self) -> &Rational {
        &self.instance.prediction
    }

    pub fn similarity(&self) -> &SimilarityConfig {
        &self.similarity
    }

    pub fn delta(&self) -> &Rational {
        &self.similarity.delta
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn feature_count(&self) -> usize {
        self.model.feature_count()
    }

    pub fn all_features(&self) -> FeatureSet {
        FeatureSet::full(self.feature_count())
    }

    pub fn check_subset(&self, set: FeatureSet) -> Result<()> {
        self.model.space().check_subset(set)
    }

    /// Whether an output value is similar to the target prediction.
    pub fn is_similar_output(&self, output: &Rational) -> bool {
        (output - &self.instance.prediction).abs() <= self.similarity.delta
    }

    /// Per-entry similarity of a tabular model, computed once.
    pub(crate) fn similar_entries(&self) -> Option<&[bool]> {
        let table = self.model.as_tabular()?;
        Some(self.similar_entries.get_or_init(|| {
            table
                .outputs()
                .iter()
                .map(|o| self.is_similar_output(o))
                .collect()
        }))
    }
}

/// Half the smallest gap between distinct outputs of a tabular model; `δ`
/// must stay strictly below it so that similarity is not vacuous.
pub fn delta_limit(model: &Model) -> Option<Rational> {
    let table = model.as_tabular()?;
    let distinct: BTreeSet<&Rational> = table.outputs().iter().collect();
    let values: Vec<&Rational> = distinct.into_iter().collect();
    values
        .windows(2)
        .map(|w| w[1] - w[0])
        .min()
        .map(|gap| gap / int(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{FeatureSpace, TabularModel};
    use crate::rational::rat;

    fn runex(alpha: Rational) -> Model {
        let space = FeatureSpace::boolean(2).unwrap();
        let one = int(1);
        let outputs = vec![
            &one - int(6) * &alpha,
            &one + int(2) * &alpha,
            one.clone(),
            one.clone(),
        ];
        Model::Tabular(TabularModel::new(space, outputs).unwrap())
    }

    #[test]
    fn prediction_is_read_off_the_model() {
        let p = ExplanationProblem::classification(runex(int(1)), vec![int(0), int(0)]).unwrap();
        assert_eq!(p.prediction(), &int(-5));
    }

    #[test]
    fn delta_must_leave_outputs_distinguishable() {
        // outputs {-1/2, 1, 3/2}: smallest gap 1/2, so delta < 1/4
        let m = runex(rat(1, 4));
        assert_eq!(delta_limit(&m), Some(rat(1, 4)));
        assert!(ExplanationProblem::regression(m.clone(), vec![int(1), int(1)], rat(1, 8)).is_ok());
        assert!(
            ExplanationProblem::regression(m.clone(), vec![int(1), int(1)], rat(1, 4)).is_err()
        );
        assert!(ExplanationProblem::regression(m, vec![int(1), int(1)], rat(-1, 8)).is_err());
    }

    #[test]
    fn classification_requires_zero_delta() {
        assert!(ExplanationProblem::new(
            runex(int(1)),
            vec![int(1), int(1)],
            Mode::Classification,
            rat(1, 2)
        )
        .is_err());
    }

    #[test]
    fn constant_models_are_rejected() {
        let t = TabularModel::boolean(2, |_| true).unwrap();
        assert!(matches!(
            ExplanationProblem::classification(t.into(), vec![int(1), int(1)]),
            Err(Error::InvalidModel(_))
        ));
    }
}
