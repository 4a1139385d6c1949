use num_traits::{One, Zero};

use super::{Domain, FeatureSpace, FiniteDomain, Violation};
use crate::error::{Error, Result};
use crate::feature_set::FeatureSet;
use crate::rational::Rational;

/// A total function table over a finite feature space.
///
/// Outputs are stored row-major with the first feature most significant, so
/// for two boolean features the order is `00, 01, 10, 11`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TabularModel {
    space: FeatureSpace,
    strides: Vec<usize>,
    outputs: Vec<Rational>,
}

impl TabularModel {
    pub fn new(space: FeatureSpace, outputs: Vec<Rational>) -> Result<Self> {
        let mut sizes = Vec::with_capacity(space.feature_count());
        for (i, d) in space.domains().iter().enumerate() {
            match d {
                Domain::Finite(f) => sizes.push(f.len()),
                Domain::Interval { .. } => {
                    return Err(Error::Domain {
                        feature: i + 1,
                        message: "tabular models need finite domains".into(),
                    })
                }
            }
        }
        let mut strides = vec![1usize; sizes.len()];
        for i in (0..sizes.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1]
                .checked_mul(sizes[i + 1])
                .ok_or_else(|| Error::Parse("feature space too large to tabulate".into()))?;
        }
        let expected = strides[0]
            .checked_mul(sizes[0])
            .ok_or_else(|| Error::Parse("feature space too large to tabulate".into()))?;
        if outputs.len() != expected {
            return Err(Error::InvalidModel(vec![Violation::OutputCount {
                expected,
                got: outputs.len(),
            }]));
        }
        Ok(TabularModel {
            space,
            strides,
            outputs,
        })
    }

    /// Tabulates `f` over every point, given as per-feature domain indices.
    pub fn from_fn(space: FeatureSpace, mut f: impl FnMut(&[usize]) -> Rational) -> Result<Self> {
        let size: usize = space
            .domains()
            .iter()
            .map(|d| match d {
                Domain::Finite(f) => f.len(),
                Domain::Interval { .. } => 0,
            })
            .product();
        let probe = TabularModel::new(space, vec![Rational::zero(); size])?;
        let outputs = (0..size).map(|idx| f(&probe.decode(idx))).collect();
        TabularModel::new(probe.space, outputs)
    }

    /// A 0/1-valued table over `m` boolean features.
    pub fn boolean(m: usize, f: impl Fn(&[bool]) -> bool) -> Result<Self> {
        let space = FeatureSpace::boolean(m)?;
        TabularModel::from_fn(space, |idx| {
            let bits: Vec<bool> = idx.iter().map(|&b| b == 1).collect();
            if f(&bits) {
                Rational::one()
            } else {
                Rational::zero()
            }
        })
    }

    pub fn space(&self) -> &FeatureSpace {
        &self.space
    }

    pub fn outputs(&self) -> &[Rational] {
        &self.outputs
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    pub fn output_at(&self, index: usize) -> &Rational {
        &self.outputs[index]
    }

    pub fn finite_domain(&self, i: usize) -> &FiniteDomain {
        match self.space.domain(i) {
            Domain::Finite(f) => f,
            Domain::Interval { .. } => unreachable!("tabular spaces are finite"),
        }
    }

    pub fn index_of(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.strides).map(|(d, s)| d * s).sum()
    }

    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        self.strides
            .iter()
            .map(|s| {
                let d = index / s;
                index %= s;
                d
            })
            .collect()
    }

    pub fn digits_of_point(&self, point: &[Rational]) -> Result<Vec<usize>> {
        self.space.check_point(point)?;
        Ok(point
            .iter()
            .enumerate()
            .map(|(i, x)| {
                self.finite_domain(i)
                    .index_of_value(x)
                    .expect("checked against the domain")
            })
            .collect())
    }

    pub fn point_of_index(&self, index: usize) -> Vec<Rational> {
        self.decode(index)
            .iter()
            .enumerate()
            .map(|(i, &d)| self.finite_domain(i).values()[d].clone())
            .collect()
    }

    pub fn evaluate(&self, point: &[Rational]) -> Result<Rational> {
        let digits = self.digits_of_point(point)?;
        Ok(self.outputs[self.index_of(&digits)].clone())
    }

    /// Table indices of `Υ(S; v)`, the points agreeing with `v` on `fixed`.
    pub fn consistent_indices(&self, v_digits: &[usize], fixed: FeatureSet) -> ConsistentIndices {
        let m = self.space.feature_count();
        let base = (0..m)
            .filter(|&i| fixed.contains(i))
            .map(|i| v_digits[i] * self.strides[i])
            .sum();
        let free: Vec<(usize, usize)> = (0..m)
            .filter(|&i| !fixed.contains(i))
            .map(|i| (self.strides[i], self.finite_domain(i).len()))
            .collect();
        ConsistentIndices {
            counters: vec![0; free.len()],
            free,
            base,
            done: false,
        }
    }

    /// Average output over `Υ(S; v)` by exhaustive counting.
    pub fn conditioned_expectation(&self, v: &[Rational], fixed: FeatureSet) -> Result<Rational> {
        self.space.check_subset(fixed)?;
        let digits = self.digits_of_point(v)?;
        let mut sum = Rational::zero();
        let mut count = 0usize;
        for idx in self.consistent_indices(&digits, fixed) {
            sum += &self.outputs[idx];
            count += 1;
        }
        Ok(sum / Rational::from_integer(count.into()))
    }

    pub fn is_constant(&self) -> bool {
        self.outputs.windows(2).all(|w| w[0] == w[1])
    }

    pub fn is_boolean(&self) -> bool {
        self.outputs.iter().all(|o| o.is_zero() || o.is_one())
    }

    /// Pointwise `1 - τ` of a 0/1-valued table.
    pub fn negate_boolean(&self) -> Result<TabularModel> {
        let outputs = self
            .outputs
            .iter()
            .map(|o| {
                if o.is_zero() {
                    Ok(Rational::one())
                } else if o.is_one() {
                    Ok(Rational::zero())
                } else {
                    Err(Error::NonBoolean(o.to_string()))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        TabularModel::new(self.space.clone(), outputs)
    }

    pub(super) fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let expected = self.strides[0] * self.finite_domain(0).len();
        if self.outputs.len() != expected {
            out.push(Violation::OutputCount {
                expected,
                got: self.outputs.len(),
            });
        }
        if self.is_constant() {
            out.push(Violation::ConstantFunction);
        }
        out
    }
}

/// Odometer over the free coordinates of a conditioned sub-table.
#[derive(Clone, Debug)]
pub struct ConsistentIndices {
    free: Vec<(usize, usize)>,
    counters: Vec<usize>,
    base: usize,
    done: bool,
}

impl Iterator for ConsistentIndices {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.done {
            return None;
        }
        let idx = self.base
            + self
                .free
                .iter()
                .zip(&self.counters)
                .map(|((stride, _), c)| stride * c)
                .sum::<usize>();
        // advance, last free coordinate fastest
        let mut k = self.free.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            self.counters[k] += 1;
            if self.counters[k] < self.free[k].1 {
                break;
            }
            self.counters[k] = 0;
        }
        Some(idx)
    }
}
