//! Exact SHAP scores.
//!
//! The characteristic function is `ν(S) = E[τ(x) | x_S = v_S]` under the
//! uniform distribution, and the score of feature `i` is the Shapley value
//! `Σ_{S ⊆ F \ {i}} ς(S)·(ν(S ∪ {i}) − ν(S))`. Everything is exact; the
//! subset sum visits all `2^(m-1)` coalitions, so brute force is practical up
//! to about 14 features for tabular models.
//!
//! [`ShapleyEngine::permutation_oracle`] recomputes a score from the
//! average-over-orderings form and serves as an independent cross-check.

use std::collections::HashMap;
use std::sync::RwLock;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::feature_set::FeatureSet;
use crate::problem::ExplanationProblem;
use crate::rational::{factorial, Rational};

/// Largest feature count accepted by the `m!` permutation oracle.
pub const PERMUTATION_ORACLE_LIMIT: usize = 10;

/// Memoized `ν(S)` values of one explanation problem.
///
/// Concurrent fills of the same key compute the same exact value, so a racing
/// second insert is harmless.
#[derive(Debug, Default)]
pub struct CharacteristicCache {
    values: RwLock<HashMap<FeatureSet, Rational>>,
}

impl CharacteristicCache {
    pub fn get(&self, set: FeatureSet) -> Option<Rational> {
        self.values.read().expect("cache lock").get(&set).cloned()
    }

    pub fn insert(&self, set: FeatureSet, value: Rational) {
        self.values.write().expect("cache lock").insert(set, value);
    }

    pub fn len(&self) -> usize {
        self.values.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `ς(S) = |S|! (m − |S| − 1)! / m!`.
pub fn shapley_weight(set: FeatureSet, m: usize) -> Result<Rational> {
    weight_for_size(set.len(), m)
}

fn weight_for_size(size: usize, m: usize) -> Result<Rational> {
    if size >= m {
        return Err(Error::WeightSetTooLarge { size, count: m });
    }
    Ok(Rational::new(
        factorial(size) * factorial(m - size - 1),
        factorial(m),
    ))
}

/// SHAP computations over one problem with a shared `ν` memo.
#[derive(Debug)]
pub struct ShapleyEngine<'a> {
    problem: &'a ExplanationProblem,
    cache: CharacteristicCache,
}

impl<'a> ShapleyEngine<'a> {
    pub fn new(problem: &'a ExplanationProblem) -> Self {
        ShapleyEngine {
            problem,
            cache: CharacteristicCache::default(),
        }
    }

    pub fn problem(&self) -> &ExplanationProblem {
        self.problem
    }

    pub fn cache(&self) -> &CharacteristicCache {
        &self.cache
    }

    /// `ν_e(S)`.
    pub fn char_fn(&self, set: FeatureSet) -> Result<Rational> {
        if let Some(v) = self.cache.get(set) {
            return Ok(v);
        }
        self.problem.check_subset(set)?;
        let value = self
            .problem
            .model()
            .conditioned_expectation(self.problem.point(), set)?;
        self.cache.insert(set, value.clone());
        Ok(value)
    }

    /// `Δ_i(S) = ν(S ∪ {i}) − ν(S)` for `i ∉ S`.
    pub fn delta(&self, i: usize, set: FeatureSet) -> Result<Rational> {
        self.check_feature(i)?;
        if set.contains(i) {
            return Err(Error::FeatureInSet(i + 1));
        }
        Ok(self.char_fn(set.with(i))? - self.char_fn(set)?)
    }

    pub fn shap(&self, i: usize) -> Result<Rational> {
        self.check_feature(i)?;
        let m = self.problem.feature_count();
        let weights = (0..m)
            .map(|k| weight_for_size(k, m))
            .collect::<Result<Vec<_>>>()?;
        let others = self.problem.all_features().without(i);
        let mut total = Rational::zero();
        for set in others.subsets() {
            let d = self.delta(i, set)?;
            if !d.is_zero() {
                total += &weights[set.len()] * d;
            }
        }
        Ok(total)
    }

    pub fn shap_all(&self) -> Result<Vec<Rational>> {
        (0..self.problem.feature_count())
            .map(|i| self.shap(i))
            .collect()
    }

    /// Average over all `m!` feature orderings of the marginal contribution
    /// of `i` when it joins the features preceding it.
    pub fn permutation_oracle(&self, i: usize) -> Result<Rational> {
        self.check_feature(i)?;
        let m = self.problem.feature_count();
        if m > PERMUTATION_ORACLE_LIMIT {
            return Err(Error::TooManyFeatures {
                what: "the permutation oracle",
                limit: PERMUTATION_ORACLE_LIMIT,
                count: m,
            });
        }
        let mut order: Vec<usize> = (0..m).collect();
        let mut total = Rational::zero();
        let mut visit = |order: &[usize]| -> Result<()> {
            let pos = order.iter().position(|&f| f == i).expect("i is a feature");
            let before: FeatureSet = order[..pos].iter().copied().collect();
            total += self.char_fn(before.with(i))? - self.char_fn(before)?;
            Ok(())
        };
        // Heap's algorithm
        let mut counters = vec![0usize; m];
        visit(&order)?;
        let mut k = 1;
        while k < m {
            if counters[k] < k {
                if k % 2 == 0 {
                    order.swap(0, k);
                } else {
                    order.swap(counters[k], k);
                }
                visit(&order)?;
                counters[k] += 1;
                k = 1;
            } else {
                counters[k] = 0;
                k += 1;
            }
        }
        Ok(total / Rational::from_integer(factorial(m)))
    }

    fn check_feature(&self, i: usize) -> Result<()> {
        let m = self.problem.feature_count();
        if i >= m {
            return Err(Error::FeatureOutOfRange {
                feature: i + 1,
                count: m,
            });
        }
        Ok(())
    }
}

pub fn char_fn(problem: &ExplanationProblem, set: FeatureSet) -> Result<Rational> {
    ShapleyEngine::new(problem).char_fn(set)
}

pub fn delta(problem: &ExplanationProblem, i: usize, set: FeatureSet) -> Result<Rational> {
    ShapleyEngine::new(problem).delta(i, set)
}

pub fn shap(problem: &ExplanationProblem, i: usize) -> Result<Rational> {
    ShapleyEngine::new(problem).shap(i)
}

pub fn shap_all(problem: &ExplanationProblem) -> Result<Vec<Rational>> {
    ShapleyEngine::new(problem).shap_all()
}

pub fn shap_permutation_oracle(problem: &ExplanationProblem, i: usize) -> Result<Rational> {
    ShapleyEngine::new(problem).permutation_oracle(i)
}
