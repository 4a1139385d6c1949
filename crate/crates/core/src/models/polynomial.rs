use std::fmt;

use num_traits::{One, Zero};

use crate::feature_set::FeatureSet;
use crate::rational::{int, Rational};

/// One monomial `coef · ∏_{i ∈ vars} x_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub coef: Rational,
    pub vars: FeatureSet,
}

/// A multilinear polynomial: no variable appears twice in a monomial.
///
/// Terms are kept normalized (like terms merged, zero coefficients dropped,
/// monomials in canonical order), so structural equality is polynomial
/// equality.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Polynomial {
    terms: Vec<Term>,
}

impl Polynomial {
    pub fn new(terms: impl IntoIterator<Item = Term>) -> Self {
        let mut merged: Vec<Term> = Vec::new();
        for term in terms {
            match merged.iter_mut().find(|t| t.vars == term.vars) {
                Some(existing) => existing.coef += term.coef,
                None => merged.push(term),
            }
        }
        merged.retain(|t| !t.coef.is_zero());
        merged.sort_by(|a, b| a.vars.canonical_cmp(&b.vars));
        Polynomial { terms: merged }
    }

    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn constant(c: Rational) -> Self {
        Polynomial::new([Term {
            coef: c,
            vars: FeatureSet::EMPTY,
        }])
    }

    /// The monomial `x_i`.
    pub fn variable(i: usize) -> Self {
        Polynomial::new([Term {
            coef: Rational::one(),
            vars: FeatureSet::singleton(i),
        }])
    }

    /// `a + b·x_i`.
    pub fn affine(a: Rational, b: Rational, i: usize) -> Self {
        Polynomial::new([
            Term {
                coef: a,
                vars: FeatureSet::EMPTY,
            },
            Term {
                coef: b,
                vars: FeatureSet::singleton(i),
            },
        ])
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Union of the variables that occur in some monomial.
    pub fn variables(&self) -> FeatureSet {
        self.terms
            .iter()
            .fold(FeatureSet::EMPTY, |acc, t| acc.union(t.vars))
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        self.terms
            .iter()
            .map(|t| t.vars.iter().fold(t.coef.clone(), |acc, i| acc * &x[i]))
            .sum()
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        Polynomial::new(self.terms.iter().chain(other.terms.iter()).cloned())
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, factor: &Rational) -> Polynomial {
        Polynomial::new(self.terms.iter().map(|t| Term {
            coef: &t.coef * factor,
            vars: t.vars,
        }))
    }

    /// Product of two polynomials; `None` if the product would repeat a
    /// variable and so leave the multilinear class.
    pub fn mul(&self, other: &Polynomial) -> Option<Polynomial> {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                if a.vars.intersects(b.vars) {
                    return None;
                }
                terms.push(Term {
                    coef: &a.coef * &b.coef,
                    vars: a.vars.union(b.vars),
                });
            }
        }
        Some(Polynomial::new(terms))
    }

    /// `∂/∂x_i`, again multilinear and free of `x_i`.
    pub fn partial(&self, i: usize) -> Polynomial {
        Polynomial::new(
            self.terms
                .iter()
                .filter(|t| t.vars.contains(i))
                .map(|t| Term {
                    coef: t.coef.clone(),
                    vars: t.vars.without(i),
                }),
        )
    }

    /// Integral over the sub-box `∏_{i ∉ fixed} [lo_i, hi_i]` with the fixed
    /// coordinates substituted from `v`.
    pub fn integrate(
        &self,
        lo: &[Rational],
        hi: &[Rational],
        fixed: FeatureSet,
        v: &[Rational],
    ) -> Rational {
        let two = int(2);
        let dims = lo.len();
        let mut total = Rational::zero();
        for term in &self.terms {
            let mut acc = term.coef.clone();
            for i in 0..dims {
                let factor = match (fixed.contains(i), term.vars.contains(i)) {
                    (true, true) => v[i].clone(),
                    (true, false) => continue,
                    (false, true) => (&hi[i] * &hi[i] - &lo[i] * &lo[i]) / &two,
                    (false, false) => &hi[i] - &lo[i],
                };
                acc *= factor;
            }
            total += acc;
        }
        total
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}", t.coef)?;
            for i in t.vars.iter() {
                write!(f, "·x{}", i + 1)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn normalizes_like_terms() {
        let x1 = Polynomial::variable(0);
        let p = x1.add(&x1).sub(&Polynomial::variable(0).scale(&int(2)));
        assert!(p.is_zero());
    }

    #[test]
    fn product_rejects_repeated_variable() {
        let x1 = Polynomial::variable(0);
        assert!(x1.mul(&x1).is_none());
        let p = x1.mul(&Polynomial::variable(1)).unwrap();
        assert_eq!(p.eval(&[int(3), int(4)]), int(12));
    }

    #[test]
    fn partial_derivative_drops_variable() {
        // 2 + 3 x1 x2 - x2
        let p = Polynomial::new([
            Term {
                coef: int(2),
                vars: FeatureSet::EMPTY,
            },
            Term {
                coef: int(3),
                vars: FeatureSet::from_bits(0b11),
            },
            Term {
                coef: int(-1),
                vars: FeatureSet::from_bits(0b10),
            },
        ]);
        assert_eq!(p.partial(0), Polynomial::variable(1).scale(&int(3)));
        assert_eq!(p.partial(1), Polynomial::affine(int(-1), int(3), 0));
    }

    #[test]
    fn integrates_monomials_in_closed_form() {
        // ∫_{1/2}^{3/2} x1 dx1 = (9/4 - 1/4)/2 = 1
        let p = Polynomial::variable(0);
        let lo = [rat(1, 2), rat(-1, 2)];
        let hi = [rat(3, 2), rat(3, 2)];
        assert_eq!(
            p.integrate(&lo, &hi, FeatureSet::singleton(1), &[int(0), int(1)]),
            int(1)
        );
        // over both dimensions: 1 * 2
        assert_eq!(
            p.integrate(&lo, &hi, FeatureSet::EMPTY, &[int(0), int(0)]),
            int(2)
        );
        // fully fixed reduces to evaluation
        let v = [int(1), int(1)];
        assert_eq!(p.integrate(&lo, &hi, FeatureSet::full(2), &v), p.eval(&v));
    }
}
