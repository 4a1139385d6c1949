//! Detection of the six ways SHAP scores can mislead about feature relevancy.
//!
//! | issue | condition (witnesses quantified existentially)                    |
//! |-------|-------------------------------------------------------------------|
//! | I1    | `i` irrelevant and `sv(i) ≠ 0`                                    |
//! | I2    | `i₁` irrelevant, `i₂` relevant and `|sv(i₁)| > |sv(i₂)|`          |
//! | I3    | `i` relevant and `sv(i) = 0`                                      |
//! | I4    | an I1 witness `i₁` together with an I3 witness `i₂`               |
//! | I5    | `i` irrelevant and `|sv(j)| < |sv(i)|` for every `j ≠ i`          |
//! | I6    | `i₁` irrelevant, `i₂` relevant and `sv(i₁)·sv(i₂) > 0`            |
//!
//! All comparisons are exact; zero means the rational zero.

use std::fmt;

use num_traits::{Signed, Zero};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::explanations::relevant_features;
use crate::feature_set::FeatureSet;
use crate::models::Model;
use crate::problem::{ExplanationProblem, Mode};
use crate::rational::{serde_string_vec, Rational};
use crate::shapley::shap_all;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Issue {
    I1,
    I2,
    I3,
    I4,
    I5,
    I6,
}

impl Issue {
    pub const ALL: [Issue; 6] = [
        Issue::I1,
        Issue::I2,
        Issue::I3,
        Issue::I4,
        Issue::I5,
        Issue::I6,
    ];
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Features (zero-based) demonstrating an issue.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Witness {
    Feature(usize),
    Pair { irrelevant: usize, relevant: usize },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Feature(i) => write!(f, "feature {}", i + 1),
            Witness::Pair {
                irrelevant,
                relevant,
            } => write!(
                f,
                "irrelevant {} / relevant {}",
                irrelevant + 1,
                relevant + 1
            ),
        }
    }
}

impl Serialize for Witness {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            Witness::Feature(i) => {
                let mut map = serializer.serialize_map(Some(1))?;
                map.serialize_entry("feature", &(i + 1))?;
                map.end()
            }
            Witness::Pair {
                irrelevant,
                relevant,
            } => {
                let mut map = serializer.serialize_map(Some(2))?;
                map.serialize_entry("irrelevant", &(irrelevant + 1))?;
                map.serialize_entry("relevant", &(relevant + 1))?;
                map.end()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IssueFinding {
    pub issue: Issue,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IssueReport {
    #[serde(with = "serde_string_vec")]
    pub scores: Vec<Rational>,
    pub relevant: FeatureSet,
    pub irrelevant: FeatureSet,
    pub findings: Vec<IssueFinding>,
}

impl IssueReport {
    pub fn finding(&self, issue: Issue) -> &IssueFinding {
        &self.findings[issue as usize]
    }

    pub fn holds(&self, issue: Issue) -> bool {
        self.finding(issue).holds
    }

    pub fn witness(&self, issue: Issue) -> Option<Witness> {
        self.finding(issue).witness
    }

    /// The issues that hold, in order.
    pub fn issues(&self) -> Vec<Issue> {
        self.findings
            .iter()
            .filter(|f| f.holds)
            .map(|f| f.issue)
            .collect()
    }

    /// I4 ⇒ I1 ∧ I3 and I4 ∨ I5 ⇒ I2. The I5 ⇒ I2 step needs a relevant
    /// feature to compare against, so it is only required when one exists.
    pub fn implications_hold(&self) -> bool {
        let h = |i| self.holds(i);
        let i4 = !h(Issue::I4) || (h(Issue::I1) && h(Issue::I3) && h(Issue::I2));
        let i5 = !h(Issue::I5) || self.relevant.is_empty() || h(Issue::I2);
        i4 && i5
    }

    /// Re-checks every reported witness against the scores and relevancy.
    pub fn witnesses_valid(&self) -> bool {
        self.findings.iter().all(|f| match (f.holds, f.witness) {
            (true, Some(w)) => witness_satisfies(f.issue, w, &self.scores, self.relevant),
            (true, None) => false,
            (false, _) => true,
        })
    }
}

fn witness_satisfies(issue: Issue, w: Witness, sv: &[Rational], relevant: FeatureSet) -> bool {
    let rel = |i: usize| relevant.contains(i);
    match (issue, w) {
        (Issue::I1, Witness::Feature(i)) => !rel(i) && !sv[i].is_zero(),
        (Issue::I3, Witness::Feature(i)) => rel(i) && sv[i].is_zero(),
        (Issue::I5, Witness::Feature(i)) => {
            !rel(i) && (0..sv.len()).all(|j| j == i || sv[j].abs() < sv[i].abs())
        }
        (
            issue,
            Witness::Pair {
                irrelevant: a,
                relevant: b,
            },
        ) => {
            a != b
                && !rel(a)
                && rel(b)
                && match issue {
                    Issue::I2 => sv[a].abs() > sv[b].abs(),
                    Issue::I4 => !sv[a].is_zero() && sv[b].is_zero(),
                    Issue::I6 => (&sv[a] * &sv[b]).is_positive(),
                    _ => false,
                }
        }
        _ => false,
    }
}

/// Evaluates I1–I6 from exact scores and the relevant-feature set.
pub fn detect_issues_from(scores: Vec<Rational>, relevant: FeatureSet) -> IssueReport {
    let m = scores.len();
    let irrelevant = relevant.complement(m);
    let sv = &scores;
    let abs: Vec<Rational> = sv.iter().map(Signed::abs).collect();

    let found = |issue, witness: Option<Witness>| IssueFinding {
        issue,
        holds: witness.is_some(),
        witness,
        note: None,
    };
    let first_pair = |pred: &dyn Fn(usize, usize) -> bool| {
        irrelevant.iter().find_map(|a| {
            relevant
                .iter()
                .find(|&b| pred(a, b))
                .map(|b| Witness::Pair {
                    irrelevant: a,
                    relevant: b,
                })
        })
    };

    let i1 = irrelevant
        .iter()
        .find(|&i| !sv[i].is_zero())
        .map(Witness::Feature);
    let i2 = first_pair(&|a, b| abs[a] > abs[b]);
    let i3 = relevant
        .iter()
        .find(|&i| sv[i].is_zero())
        .map(Witness::Feature);
    let i4 = first_pair(&|a, b| !sv[a].is_zero() && sv[b].is_zero());
    let i6 = first_pair(&|a, b| (&sv[a] * &sv[b]).is_positive());

    let strict_max = |i: usize| (0..m).all(|j| j == i || abs[j] < abs[i]);
    let i5 = irrelevant
        .iter()
        .find(|&i| strict_max(i))
        .map(Witness::Feature);
    let mut i5_finding = found(Issue::I5, i5);
    if i5.is_none() {
        let top = abs.iter().max();
        let tied = irrelevant.iter().any(|i| Some(&abs[i]) == top)
            && abs.iter().filter(|a| Some(*a) == top).count() > 1;
        if tied {
            i5_finding.note = Some("tied: an irrelevant feature shares the largest |sv|".into());
        }
    }

    IssueReport {
        findings: vec![
            found(Issue::I1, i1),
            found(Issue::I2, i2),
            found(Issue::I3, i3),
            found(Issue::I4, i4),
            i5_finding,
            found(Issue::I6, i6),
        ],
        scores,
        relevant,
        irrelevant,
    }
}

pub fn detect_issues(problem: &ExplanationProblem) -> Result<IssueReport> {
    Ok(detect_issues_from(
        shap_all(problem)?,
        relevant_features(problem)?,
    ))
}

/// Outcome of comparing a boolean problem with its negation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NegationAudit {
    pub original: IssueReport,
    pub negated: IssueReport,
    pub scores_negated: bool,
    pub same_issues: bool,
}

impl NegationAudit {
    pub fn holds(&self) -> bool {
        self.scores_negated && self.same_issues
    }
}

/// Recomputes scores and issues for `(¬κ, (v, ¬c))` and compares.
pub fn negation_audit(problem: &ExplanationProblem) -> Result<NegationAudit> {
    let table = match problem.model() {
        Model::Tabular(t) if problem.mode() == Mode::Classification => t,
        _ => {
            return Err(Error::Precondition(
                "negation audit needs a boolean tabular classification problem".into(),
            ))
        }
    };
    let negated_model = table.negate_boolean()?;
    let negated =
        ExplanationProblem::classification(negated_model.into(), problem.point().to_vec())?;
    let original = detect_issues(problem)?;
    let negated = detect_issues(&negated)?;
    let scores_negated = original
        .scores
        .iter()
        .zip(&negated.scores)
        .all(|(a, b)| *a == -b);
    let same_issues = original.issues() == negated.issues();
    Ok(NegationAudit {
        original,
        negated,
        scores_negated,
        same_issues,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::TabularModel;
    use crate::rational::{int, rat};

    fn rel(members: &[usize]) -> FeatureSet {
        members.iter().map(|i| i - 1).collect()
    }

    #[test]
    fn running_example_scores() {
        // sv = (0, 1/2) with only feature 1 relevant
        let r = detect_issues_from(vec![int(0), rat(1, 2)], rel(&[1]));
        assert_eq!(
            r.issues(),
            vec![Issue::I1, Issue::I2, Issue::I3, Issue::I4, Issue::I5]
        );
        assert_eq!(r.witness(Issue::I1), Some(Witness::Feature(1)));
        assert_eq!(
            r.witness(Issue::I4),
            Some(Witness::Pair {
                irrelevant: 1,
                relevant: 0
            })
        );
        assert!(r.implications_hold());
        assert!(r.witnesses_valid());
    }

    #[test]
    fn ties_block_i5() {
        let r = detect_issues_from(vec![rat(1, 4), rat(-1, 4), int(0)], rel(&[2]));
        assert!(!r.holds(Issue::I5));
        assert!(r
            .finding(Issue::I5)
            .note
            .as_deref()
            .unwrap()
            .starts_with("tied"));
        assert!(r.holds(Issue::I1));
        assert!(!r.holds(Issue::I2));
    }

    #[test]
    fn sign_agreement() {
        let r = detect_issues_from(vec![rat(1, 8), rat(3, 8)], rel(&[2]));
        assert!(r.holds(Issue::I6));
        let r = detect_issues_from(vec![rat(-1, 8), rat(3, 8)], rel(&[2]));
        assert!(!r.holds(Issue::I6));
    }

    #[test]
    fn identity_has_no_issues() {
        let t = TabularModel::boolean(1, |x| x[0]).unwrap();
        let p = ExplanationProblem::classification(t.into(), vec![int(1)]).unwrap();
        let r = detect_issues(&p).unwrap();
        assert!(r.issues().is_empty());
    }

    #[test]
    fn serializes_one_based() {
        let r = detect_issues_from(vec![int(0), rat(1, 2)], rel(&[1]));
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["scores"][1], "1/2");
        assert_eq!(json["relevant"], serde_json::json!([1]));
        assert_eq!(json["findings"][0]["witness"]["feature"], 2);
    }

    #[test]
    fn negation_of_xor() {
        let t = TabularModel::boolean(2, |x| x[0] ^ x[1]).unwrap();
        let p = ExplanationProblem::classification(t.into(), vec![int(1), int(1)]).unwrap();
        let audit = negation_audit(&p).unwrap();
        assert!(audit.holds());
    }

    #[test]
    fn negation_needs_boolean_outputs() {
        let t = TabularModel::from_fn(crate::models::FeatureSpace::boolean(1).unwrap(), |d| {
            int(d[0] as i64 * 2)
        })
        .unwrap();
        let p = ExplanationProblem::classification(t.into(), vec![int(1)]).unwrap();
        assert!(matches!(negation_audit(&p), Err(Error::NonBoolean(_))));
    }
}
