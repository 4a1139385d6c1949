//! Running examples and counterexample families, packaged as explanation
//! problems.
//!
//! The boolean families take sub-functions over the first `m` (or `2m`)
//! features and glue them together on one or two extra features appended
//! last, all set to 1 in the instance. Every family checks, by brute force,
//! the conditions its construction relies on and refuses to emit a problem
//! if any fails, so custom sub-functions are safe to try.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::explanations::enumerate_cxps;
use crate::feature_set::FeatureSet;
use crate::models::{Cell, FeatureSpace, Model, PiecewiseModel, Polynomial, TabularModel, Term};
use crate::problem::{ExplanationProblem, Mode};
use crate::rational::{int, pow2, rat, serde_string, serde_string_vec, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Runex1,
    Rho2,
    Rho3,
    Prop1,
    Prop2,
    Prop3,
    Prop4,
    Prop5,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::Runex1,
        Family::Rho2,
        Family::Rho3,
        Family::Prop1,
        Family::Prop2,
        Family::Prop3,
        Family::Prop4,
        Family::Prop5,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Runex1 => "runex1",
            Family::Rho2 => "rho2",
            Family::Rho3 => "rho3",
            Family::Prop1 => "prop1",
            Family::Prop2 => "prop2",
            Family::Prop3 => "prop3",
            Family::Prop4 => "prop4",
            Family::Prop5 => "prop5",
        }
    }

    /// Smallest admissible size, used when none is given.
    pub fn default_m(self) -> Option<usize> {
        match self {
            Family::Prop1 | Family::Prop5 => Some(2),
            Family::Prop2 | Family::Prop3 => Some(1),
            Family::Prop4 => Some(3),
            _ => None,
        }
    }

    pub fn uses_alpha(self) -> bool {
        matches!(self, Family::Runex1 | Family::Rho3)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown family {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorConfig {
    pub family: Family,
    pub m: Option<usize>,
    pub alpha: Option<Rational>,
    pub delta: Option<Rational>,
}

impl GeneratorConfig {
    pub fn new(family: Family) -> Self {
        GeneratorConfig {
            family,
            m: None,
            alpha: None,
            delta: None,
        }
    }

    pub fn with_m(mut self, m: usize) -> Self {
        self.m = Some(m);
        self
    }

    pub fn with_alpha(mut self, alpha: Rational) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn with_delta(mut self, delta: Rational) -> Self {
        self.delta = Some(delta);
        self
    }
}

/// Default `α` for the parameterized examples.
pub fn default_alpha() -> Rational {
    rat(1, 2)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub name: String,
    pub holds: bool,
}

impl ConditionCheck {
    fn new(name: impl Into<String>, holds: bool) -> Self {
        ConditionCheck {
            name: name.into(),
            holds,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Generated {
    pub family: Family,
    pub m: Option<usize>,
    pub alpha: Option<Rational>,
    pub problem: ExplanationProblem,
    pub conditions: Vec<ConditionCheck>,
}

impl Generated {
    pub fn sidecar(&self) -> ProblemSidecar {
        ProblemSidecar {
            family: Some(self.family),
            m: self.m,
            alpha: self.alpha.clone(),
            point: self.problem.point().to_vec(),
            prediction: self.problem.prediction().clone(),
            mode: self.problem.mode(),
            delta: self.problem.delta().clone(),
            conditions: self.conditions.clone(),
        }
    }
}

/// Instance, threshold and provenance stored next to a generated model file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemSidecar {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "optional_rational"
    )]
    pub alpha: Option<Rational>,
    #[serde(with = "serde_string_vec")]
    pub point: Vec<Rational>,
    #[serde(with = "serde_string")]
    pub prediction: Rational,
    pub mode: Mode,
    #[serde(with = "serde_string")]
    pub delta: Rational,
    #[serde(default)]
    pub conditions: Vec<ConditionCheck>,
}

impl ProblemSidecar {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("sidecars always serialize");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

mod optional_rational {
    use super::Rational;
    use crate::rational::{format_rational, parse_rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        value: &Option<Rational>,
        serializer: S,
    ) -> Result<S::Ok, S::Error> {
        match value {
            Some(v) => serializer.serialize_str(&format_rational(v)),
            None => serializer.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        deserializer: D,
    ) -> Result<Option<Rational>, D::Error> {
        Option::<String>::deserialize(deserializer)?
            .map(|t| parse_rational(&t).map_err(serde::de::Error::custom))
            .transpose()
    }
}

pub fn generate(config: &GeneratorConfig) -> Result<Generated> {
    let family = config.family;
    if config.m.is_some() && family.default_m().is_none() {
        return Err(Error::Precondition(format!("{family} takes no size m")));
    }
    if config.alpha.is_some() && !family.uses_alpha() {
        return Err(Error::Precondition(format!("{family} takes no alpha")));
    }
    let m = config.m.or(family.default_m());
    let alpha = family
        .uses_alpha()
        .then(|| config.alpha.clone().unwrap_or_else(default_alpha));
    let mut out = match family {
        Family::Runex1 => gen_runex1_with(alpha.clone().unwrap(), config.delta.clone())?,
        Family::Rho2 => gen_rho2_with(config.delta.clone())?,
        Family::Rho3 => gen_rho3_with(alpha.clone().unwrap(), config.delta.clone())?,
        boolean => {
            if let Some(d) = &config.delta {
                if !d.is_zero() {
                    return Err(Error::Precondition(format!(
                        "{boolean} is a classification family; delta must be 0"
                    )));
                }
            }
            let m = m.unwrap();
            match boolean {
                Family::Prop1 => gen_prop1(m)?,
                Family::Prop2 => gen_prop2(m)?,
                Family::Prop3 => gen_prop3(m)?,
                Family::Prop4 => gen_prop4(m)?,
                _ => gen_prop5(m)?,
            }
        }
    };
    out.alpha = alpha;
    Ok(out)
}

fn require_nonzero_alpha(alpha: &Rational) -> Result<()> {
    if alpha.is_zero() {
        return Err(Error::Precondition("alpha must be nonzero".into()));
    }
    Ok(())
}

fn check_conditions(family: Family, conditions: &[ConditionCheck]) -> Result<()> {
    match conditions.iter().find(|c| !c.holds) {
        Some(bad) => Err(Error::ConditionFailed(format!("{family}: {}", bad.name))),
        None => Ok(()),
    }
}

fn emit(
    family: Family,
    m: Option<usize>,
    problem: ExplanationProblem,
    conditions: Vec<ConditionCheck>,
) -> Result<Generated> {
    check_conditions(family, &conditions)?;
    Ok(Generated {
        family,
        m,
        alpha: None,
        problem,
        conditions,
    })
}

// ---------------------------------------------------------------- τ₁ / 𝓔₁

/// The two-feature running example with default threshold.
pub fn gen_runex1(alpha: Rational) -> Result<Generated> {
    gen_runex1_with(alpha, None)
}

/// Outputs `(0,0) → 1−6α`, `(0,1) → 1+2α`, `(1,0) → 1`, `(1,1) → 1` with
/// instance `((1,1), 1)`. `δ = 0` gives the classification view; the default
/// is the regression view with `δ = min(|α|, 1)/2`.
pub fn gen_runex1_with(alpha: Rational, delta: Option<Rational>) -> Result<Generated> {
    require_nonzero_alpha(&alpha)?;
    let one = Rational::one();
    let outputs = vec![
        &one - int(6) * &alpha,
        &one + int(2) * &alpha,
        one.clone(),
        one.clone(),
    ];
    let model = Model::Tabular(TabularModel::new(FeatureSpace::boolean(2)?, outputs)?);
    let delta = delta.unwrap_or_else(|| alpha.abs().min(Rational::one()) / int(2));
    let mode = if delta.is_zero() {
        Mode::Classification
    } else {
        Mode::Regression
    };
    let problem = ExplanationProblem::new(model, vec![int(1), int(1)], mode, delta)?;
    emit(Family::Runex1, None, problem, Vec::new())
}

// ---------------------------------------------------------------- ρ₂ / 𝓔₂

pub fn gen_rho2() -> Result<Generated> {
    gen_rho2_with(None)
}

/// `ρ₂` on `[−1/2, 3/2]²` with `D⁺ = [1/2, 3/2]`: `x₁` on `x₁ ∈ D⁺`,
/// `x₂ − 2` when neither coordinate is in `D⁺`, `x₂ + 1` when only `x₂` is.
pub fn gen_rho2_with(delta: Option<Rational>) -> Result<Generated> {
    let (lo, mid, hi) = (rat(-1, 2), rat(1, 2), rat(3, 2));
    let space = FeatureSpace::boxed(vec![(lo.clone(), hi.clone()), (lo.clone(), hi.clone())])?;
    let cells = vec![
        Cell::new(
            vec![mid.clone(), lo.clone()],
            vec![hi.clone(), hi.clone()],
            Polynomial::variable(0),
        ),
        Cell::new(
            vec![lo.clone(), lo.clone()],
            vec![mid.clone(), mid.clone()],
            Polynomial::affine(int(-2), int(1), 1),
        ),
        Cell::new(
            vec![lo.clone(), mid.clone()],
            vec![mid, hi],
            Polynomial::affine(int(1), int(1), 1),
        ),
    ];
    let model = Model::Piecewise(PiecewiseModel::new(space, cells)?);
    let problem = ExplanationProblem::regression(
        model,
        vec![int(1), int(1)],
        delta.unwrap_or_else(|| rat(1, 5)),
    )?;
    emit(Family::Rho2, None, problem, Vec::new())
}

// ---------------------------------------------------------------- ρ₃ / 𝓔₃

pub fn gen_rho3(alpha: Rational) -> Result<Generated> {
    gen_rho3_with(alpha, None)
}

/// A continuous piecewise-bilinear `ρ₃ = 1 + g(x₁)·h(x₂)` on `[0, 2]²` with
/// `g = 0` on `[0,1]`, `4(x₁−1)` on `[1,2]`, and `h = −7α + 8α·x₂` on
/// `[0,1]`, `α` on `[1,2]`. Then `E[g] = 1`, `g(1) = 0`, `E[h] = −α` and
/// `h(1) = α`, so at `v = (1,1)` the conditioned expectations are
/// `(1−α, 1, 1+α, 1)`. Default `δ = |α|/8`.
pub fn gen_rho3_with(alpha: Rational, delta: Option<Rational>) -> Result<Generated> {
    require_nonzero_alpha(&alpha)?;
    let (zero, one, two) = (int(0), int(1), int(2));
    let space = FeatureSpace::boxed(vec![
        (zero.clone(), two.clone()),
        (zero.clone(), two.clone()),
    ])?;
    let a = |k: i64| int(k) * &alpha;
    let term = |coef: Rational, vars: &[usize]| Term {
        coef,
        vars: vars.iter().copied().collect(),
    };
    let cells = vec![
        Cell::new(
            vec![zero.clone(), zero.clone()],
            vec![one.clone(), one.clone()],
            Polynomial::constant(one.clone()),
        ),
        Cell::new(
            vec![zero.clone(), one.clone()],
            vec![one.clone(), two.clone()],
            Polynomial::constant(one.clone()),
        ),
        Cell::new(
            vec![one.clone(), zero.clone()],
            vec![two.clone(), one.clone()],
            Polynomial::new([
                term(&one + a(28), &[]),
                term(a(-28), &[0]),
                term(a(-32), &[1]),
                term(a(32), &[0, 1]),
            ]),
        ),
        Cell::new(
            vec![one.clone(), one.clone()],
            vec![two.clone(), two.clone()],
            Polynomial::affine(&one - a(4), a(4), 0),
        ),
    ];
    let model = Model::Piecewise(PiecewiseModel::new(space, cells)?);
    let delta = delta.unwrap_or_else(|| alpha.abs() / int(8));
    let problem = ExplanationProblem::regression(model, vec![one.clone(), one], delta)?;
    emit(Family::Rho3, None, problem, Vec::new())
}

// ---------------------------------------------------------------- boolean helpers

/// A boolean function of a fixed number of inputs.
pub type BoolFn<'a> = &'a dyn Fn(&[bool]) -> bool;

fn all_points(k: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u64..1 << k).map(move |bits| (0..k).map(|i| bits >> (k - 1 - i) & 1 == 1).collect())
}

fn is_constant(k: usize, f: BoolFn) -> bool {
    let mut points = all_points(k);
    let first = f(&points.next().unwrap());
    points.all(|x| f(&x) == first)
}

fn never_both(k: usize, f: BoolFn, g: BoolFn) -> bool {
    all_points(k).all(|x| !(f(&x) && g(&x)))
}

fn same_function(k: usize, f: BoolFn, g: BoolFn) -> bool {
    all_points(k).all(|x| f(&x) == g(&x))
}

/// CXps of `f` at `v`; a constant function has none.
fn cxps_at(k: usize, f: BoolFn, v: &[bool]) -> Result<Vec<FeatureSet>> {
    if is_constant(k, f) {
        return Ok(Vec::new());
    }
    let model = TabularModel::boolean(k, f)?;
    let point = v.iter().map(|&b| int(b as i64)).collect();
    enumerate_cxps(&ExplanationProblem::classification(model.into(), point)?)
}

fn boolean_problem(n: usize, f: impl Fn(&[bool]) -> bool) -> Result<ExplanationProblem> {
    let model = TabularModel::boolean(n, f)?;
    ExplanationProblem::classification(model.into(), vec![int(1); n])
}

fn require_m(family: Family, m: usize, min: usize) -> Result<()> {
    if m < min {
        return Err(Error::Precondition(format!(
            "{family} needs m >= {min}, got {m}"
        )));
    }
    // keep n within brute-force range for enumeration
    let n = match family {
        Family::Prop2 => 2 * m + 1,
        Family::Prop3 => 2 * m + 2,
        Family::Prop5 => m + 2,
        _ => m + 1,
    };
    if n > crate::explanations::ENUMERATION_LIMIT {
        return Err(Error::TooManyFeatures {
            what: family.name(),
            limit: crate::explanations::ENUMERATION_LIMIT,
            count: n,
        });
    }
    Ok(())
}

fn and_all(x: &[bool]) -> bool {
    x.iter().all(|&b| b)
}

// ---------------------------------------------------------------- prop1

/// `κ = κ₁ ∨ f` if `xₙ = 0`, `κ₁` if `xₙ = 1`, with `n = m+1`, defaults
/// `κ₁ = ¬x₁ ∧ (x₂ ∧ … ∧ x_m)` and `f = ¬x₁ ∧ ¬(x₂ ∧ … ∧ x_m)`.
pub fn gen_prop1(m: usize) -> Result<Generated> {
    let k1 = |x: &[bool]| !x[0] && and_all(&x[1..]);
    let f = |x: &[bool]| !x[0] && !and_all(&x[1..]);
    gen_prop1_with(m, &k1, &f)
}

pub fn gen_prop1_with(m: usize, k1: BoolFn, f: BoolFn) -> Result<Generated> {
    require_m(Family::Prop1, m, 2)?;
    let k1_or_f = |x: &[bool]| k1(x) || f(x);
    let v = vec![true; m];
    let conditions = vec![
        ConditionCheck::new(
            "kappa1 and f are non-constant",
            !is_constant(m, k1) && !is_constant(m, f),
        ),
        ConditionCheck::new(
            "kappa1 != kappa1 | f and kappa1 & f = 0",
            !same_function(m, k1, &k1_or_f) && never_both(m, k1, f),
        ),
        ConditionCheck::new(
            "kappa1 and kappa1 | f predict v to 0",
            !k1(&v) && !k1_or_f(&v),
        ),
        ConditionCheck::new(
            "kappa1 and kappa1 | f have the same CXps at v",
            cxps_at(m, k1, &v)? == cxps_at(m, &k1_or_f, &v)?,
        ),
    ];
    check_conditions(Family::Prop1, &conditions)?;
    let problem = boolean_problem(m + 1, |x| {
        let base = &x[..m];
        if x[m] {
            k1(base)
        } else {
            k1(base) || f(base)
        }
    })?;
    emit(Family::Prop1, Some(m), problem, conditions)
}

// ---------------------------------------------------------------- prop2

/// `κ = κ₀(x_{1..m})` if `xₙ = 0`, `κ₁(x_{m+1..2m})` if `xₙ = 1`, with
/// `n = 2m+1` and both halves defaulting to a conjunction.
pub fn gen_prop2(m: usize) -> Result<Generated> {
    gen_prop2_with(m, &and_all, &and_all)
}

pub fn gen_prop2_with(m: usize, k0: BoolFn, k1: BoolFn) -> Result<Generated> {
    require_m(Family::Prop2, m, 1)?;
    let v = vec![true; m];
    let conditions = vec![
        ConditionCheck::new(
            "kappa0 and kappa1 are non-constant",
            !is_constant(m, k0) && !is_constant(m, k1),
        ),
        ConditionCheck::new(
            "kappa0 and kappa1 are isomorphic (i <-> m+i)",
            same_function(m, k0, k1),
        ),
        ConditionCheck::new("kappa0 and kappa1 predict v to 1", k0(&v) && k1(&v)),
    ];
    check_conditions(Family::Prop2, &conditions)?;
    let problem = boolean_problem(2 * m + 1, |x| {
        if x[2 * m] {
            k1(&x[m..2 * m])
        } else {
            k0(&x[..m])
        }
    })?;
    emit(Family::Prop2, Some(m), problem, conditions)
}

// ---------------------------------------------------------------- prop3

/// `κ = κ₀` if `xₙ = 0` and `κ₀ ∨ f` if `xₙ = 1`, where
/// `κ₀ = κ₀₀(x_{1..m})` if `x_{n−1} = 0` and `κ₀₁(x_{m+1..2m})` otherwise;
/// `n = 2m+2`. Defaults: conjunctions for `κ₀₀`, `κ₀₁` and the all-zeros
/// indicator over `x_{1..2m}` for `f`.
pub fn gen_prop3(m: usize) -> Result<Generated> {
    let f = |x: &[bool]| x.iter().all(|&b| !b);
    gen_prop3_with(m, &and_all, &and_all, &f)
}

pub fn gen_prop3_with(m: usize, k00: BoolFn, k01: BoolFn, f: BoolFn) -> Result<Generated> {
    require_m(Family::Prop3, m, 1)?;
    // κ₀ over (x_{1..2m}, x_{n−1})
    let k0 = |x: &[bool]| {
        if x[2 * m] {
            k01(&x[m..2 * m])
        } else {
            k00(&x[..m])
        }
    };
    let k0_or_f = |x: &[bool]| k0(x) || f(&x[..2 * m]);
    let on_low = |x: &[bool]| k00(&x[..m]);
    let on_high = |x: &[bool]| k01(&x[m..]);
    let v = vec![true; 2 * m + 1];
    let conditions = vec![
        ConditionCheck::new(
            "kappa00, kappa01 and f are non-constant",
            !is_constant(m, k00) && !is_constant(m, k01) && !is_constant(2 * m, f),
        ),
        ConditionCheck::new(
            "kappa00 and kappa01 are isomorphic (i <-> m+i)",
            same_function(m, k00, k01),
        ),
        ConditionCheck::new(
            "kappa0 != kappa0 | f, kappa00 & f = 0 and kappa01 & f = 0",
            !same_function(2 * m + 1, &k0, &k0_or_f)
                && never_both(2 * m, &on_low, f)
                && never_both(2 * m, &on_high, f),
        ),
        ConditionCheck::new(
            "kappa0 and kappa0 | f predict v to 1",
            k0(&v) && k0_or_f(&v),
        ),
        ConditionCheck::new(
            "kappa0 and kappa0 | f have the same CXps at v",
            cxps_at(2 * m + 1, &k0, &v)? == cxps_at(2 * m + 1, &k0_or_f, &v)?,
        ),
    ];
    check_conditions(Family::Prop3, &conditions)?;
    let n = 2 * m + 2;
    let problem = boolean_problem(n, |x| {
        let base = &x[..n - 1];
        if x[n - 1] {
            k0_or_f(base)
        } else {
            k0(base)
        }
    })?;
    emit(Family::Prop3, Some(m), problem, conditions)
}

// ---------------------------------------------------------------- prop4

/// `κ = 0` if `xₙ = 0` and `κ₁` if `xₙ = 1`, `n = m+1`, with `κ₁` the
/// "exactly one input is 0" function.
pub fn gen_prop4(m: usize) -> Result<Generated> {
    let k1 = |x: &[bool]| x.iter().filter(|&&b| !b).count() == 1;
    gen_prop4_with(m, &k1)
}

pub fn gen_prop4_with(m: usize, k1: BoolFn) -> Result<Generated> {
    require_m(Family::Prop4, m, 3)?;
    let v = vec![true; m];
    let hamming = |x: &[bool]| x.iter().zip(&v).filter(|(a, b)| a != b).count();
    let conditions = vec![
        ConditionCheck::new("kappa1 predicts v to 0", !k1(&v)),
        ConditionCheck::new(
            "kappa1 predicts every point at Hamming distance 1 from v to 1",
            all_points(m).filter(|x| hamming(x) == 1).all(|x| k1(&x)),
        ),
        ConditionCheck::new(
            "kappa1 predicts all other points to 0",
            all_points(m).filter(|x| hamming(x) != 1).all(|x| !k1(&x)),
        ),
    ];
    check_conditions(Family::Prop4, &conditions)?;
    let problem = boolean_problem(m + 1, |x| x[m] && k1(&x[..m]))?;
    emit(Family::Prop4, Some(m), problem, conditions)
}

/// `sv(n) = (2^{m+1} − m − 2) / ((m+1)·2^{m+1})` for the default prop4
/// family.
pub fn closed_form_prop4_sv(m: usize) -> Result<Rational> {
    if m < 3 {
        return Err(Error::Precondition(format!("prop4 needs m >= 3, got {m}")));
    }
    let p = pow2(m + 1);
    let numer = &p - (m + 2);
    let denom = p * (m + 1);
    Ok(Rational::new(numer, denom))
}

// ---------------------------------------------------------------- prop5

/// Four branches on `(xₙ, x_{n−1})`: `κ′`, `κ′ ∨ f`, `κ′ ∨ g`,
/// `κ′ ∨ f ∨ g`, with `n = m+2`. Defaults `κ′ = ¬x₁ ∧ (x₂ ∧ … ∧ x_m)`,
/// `f = x₁ ∧ … ∧ x_m`, `g = ¬x₁ ∧ ¬(x₂ ∧ … ∧ x_m)`.
pub fn gen_prop5(m: usize) -> Result<Generated> {
    let kp = |x: &[bool]| !x[0] && and_all(&x[1..]);
    let g = |x: &[bool]| !x[0] && !and_all(&x[1..]);
    gen_prop5_with(m, &kp, &and_all, &g)
}

pub fn gen_prop5_with(m: usize, kp: BoolFn, f: BoolFn, g: BoolFn) -> Result<Generated> {
    require_m(Family::Prop5, m, 2)?;
    // κ₀ and κ₁ over (x_{1..m}, x_{n−1})
    let k0 = |x: &[bool]| kp(&x[..m]) || (x[m] && f(&x[..m]));
    let k1 = |x: &[bool]| kp(&x[..m]) || g(&x[..m]) || (x[m] && f(&x[..m]));
    let v = vec![true; m];
    let mut v_ext = v.clone();
    v_ext.push(true);
    let conditions = vec![
        ConditionCheck::new(
            "kappa', f and g are non-constant",
            !is_constant(m, kp) && !is_constant(m, f) && !is_constant(m, g),
        ),
        ConditionCheck::new(
            "kappa0 != kappa1 and kappa', f, g pairwise disjoint",
            !same_function(m + 1, &k0, &k1)
                && never_both(m, kp, f)
                && never_both(m, kp, g)
                && never_both(m, f, g),
        ),
        ConditionCheck::new("f predicts v to 1", f(&v)),
        ConditionCheck::new("kappa' and g predict v to 0", !kp(&v) && !g(&v)),
        ConditionCheck::new(
            "kappa0 and kappa1 have the same CXps at (v, 1)",
            cxps_at(m + 1, &k0, &v_ext)? == cxps_at(m + 1, &k1, &v_ext)?,
        ),
    ];
    check_conditions(Family::Prop5, &conditions)?;
    let n = m + 2;
    let problem = boolean_problem(n, |x| {
        let base = &x[..n - 1];
        if x[n - 1] {
            k1(base)
        } else {
            k0(base)
        }
    })?;
    emit(Family::Prop5, Some(m), problem, conditions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapley::{char_fn, shap, shap_all};

    fn nu(p: &ExplanationProblem, members: &[usize]) -> Rational {
        char_fn(p, members.iter().map(|i| i - 1).collect()).unwrap()
    }

    #[test]
    fn runex1_codomain_and_expectations() {
        let g = gen_runex1(int(1)).unwrap();
        let t = g.problem.model().as_tabular().unwrap();
        assert_eq!(t.outputs(), &[int(-5), int(3), int(1), int(1)]);
        let p = gen_runex1(rat(1, 2)).unwrap().problem;
        assert_eq!(
            [nu(&p, &[]), nu(&p, &[1]), nu(&p, &[2]), nu(&p, &[1, 2])],
            [rat(1, 2), int(1), rat(3, 2), int(1)]
        );
        assert_eq!(p.delta(), &rat(1, 4));
        assert!(gen_runex1(int(0)).is_err());
        let c = gen_runex1_with(int(1), Some(int(0))).unwrap();
        assert_eq!(c.problem.mode(), Mode::Classification);
    }

    #[test]
    fn rho2_evaluations() {
        let p = gen_rho2().unwrap().problem;
        let m = p.model();
        assert_eq!(m.evaluate(&[int(1), int(1)]).unwrap(), int(1));
        assert_eq!(m.evaluate(&[int(0), int(0)]).unwrap(), int(-2));
        assert_eq!(m.evaluate(&[rat(-1, 4), int(1)]).unwrap(), int(2));
        assert_eq!(
            [nu(&p, &[]), nu(&p, &[1]), nu(&p, &[2]), nu(&p, &[1, 2])],
            [rat(1, 2), int(1), rat(3, 2), int(1)]
        );
    }

    #[test]
    fn rho3_contract() {
        for alpha in [rat(1, 4), rat(1, 2), int(-3)] {
            let p = gen_rho3(alpha.clone()).unwrap().problem;
            let one = int(1);
            assert_eq!(
                [nu(&p, &[]), nu(&p, &[1]), nu(&p, &[2]), nu(&p, &[1, 2])],
                [&one - &alpha, one.clone(), &one + &alpha, one.clone()]
            );
            assert!(p
                .model()
                .as_piecewise()
                .unwrap()
                .check_continuity()
                .is_empty());
        }
    }

    #[test]
    fn prop4_closed_form_values() {
        assert_eq!(closed_form_prop4_sv(3).unwrap(), rat(11, 64));
        assert_eq!(closed_form_prop4_sv(4).unwrap(), rat(13, 80));
        let p = gen_prop4(3).unwrap().problem;
        assert_eq!(shap(&p, 3).unwrap(), rat(11, 64));
        assert_eq!(p.prediction(), &int(0));
        assert!(gen_prop4(2).is_err());
    }

    #[test]
    fn prop4_sub_function_expectation() {
        // E[κ₁ | x_S = v_S] = (m − |S|) / 2^(m−|S|)
        let m = 4;
        let k1 = |x: &[bool]| x.iter().filter(|&&b| !b).count() == 1;
        let t = TabularModel::boolean(m, k1).unwrap();
        let point = vec![int(1); m];
        for s in FeatureSet::full(m).subsets() {
            let free = m - s.len();
            let want = Rational::new(free.into(), pow2(free));
            assert_eq!(t.conditioned_expectation(&point, s).unwrap(), want);
        }
    }

    #[test]
    fn size_preconditions() {
        assert!(matches!(gen_prop1(1), Err(Error::Precondition(_))));
        assert!(matches!(gen_prop2(0), Err(Error::Precondition(_))));
        assert!(matches!(gen_prop3(0), Err(Error::Precondition(_))));
        assert!(matches!(gen_prop5(1), Err(Error::Precondition(_))));
    }

    #[test]
    fn custom_sub_functions_are_checked() {
        // κ₁ and f overlap at (0, 1)
        let k1 = |x: &[bool]| !x[0];
        let f = |x: &[bool]| !x[0] && x[1];
        assert!(matches!(
            gen_prop1_with(2, &k1, &f),
            Err(Error::ConditionFailed(_))
        ));
        let k0 = |x: &[bool]| x[0];
        let k1 = |x: &[bool]| !x[0];
        assert!(matches!(
            gen_prop2_with(1, &k0, &k1),
            Err(Error::ConditionFailed(_))
        ));
    }

    #[test]
    fn prop2_smallest_instance() {
        let p = gen_prop2(1).unwrap().problem;
        assert!(shap(&p, 2).unwrap().is_zero());
        let sv = shap_all(&p).unwrap();
        assert_eq!(
            sv.iter().sum::<Rational>(),
            nu(&p, &[1, 2, 3]) - nu(&p, &[])
        );
    }

    #[test]
    fn config_dispatch() {
        let g = generate(&GeneratorConfig::new(Family::Prop4)).unwrap();
        assert_eq!(g.problem.feature_count(), 4);
        assert!(generate(&GeneratorConfig::new(Family::Rho2).with_m(3)).is_err());
        assert!(generate(&GeneratorConfig::new(Family::Prop1).with_delta(rat(1, 2))).is_err());
        let g = generate(&GeneratorConfig::new(Family::Rho3).with_alpha(rat(1, 4))).unwrap();
        assert_eq!(g.alpha, Some(rat(1, 4)));
        assert_eq!("prop3".parse::<Family>().unwrap(), Family::Prop3);
    }

    #[test]
    fn sidecar_round_trip() {
        let g = gen_prop1(2).unwrap();
        let text = g.sidecar().to_json();
        let back = ProblemSidecar::from_json(&text).unwrap();
        assert_eq!(back, g.sidecar());
        assert_eq!(back.to_json(), text);
        assert!(back.conditions.iter().all(|c| c.holds));
    }
}
