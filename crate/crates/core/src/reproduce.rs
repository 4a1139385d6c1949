//! End-to-end reproduction of the built-in worked examples.
//!
//! Each [`Check`] compares an exact expected value with a recomputed one.
//! Values are rendered as canonical strings, so a report can be printed or
//! serialized without losing exactness.

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::Result;
use crate::explanations::{
    enumerate_axps, enumerate_cxps, find_aex, relevant_features, AExQuery, Norm,
};
use crate::feature_set::FeatureSet;
use crate::generators::{
    closed_form_prop4_sv, gen_prop1, gen_prop2, gen_prop3, gen_prop4, gen_prop5, gen_rho2,
    gen_rho3, gen_runex1, gen_runex1_with,
};
use crate::issues::{detect_issues, negation_audit, Issue};
use crate::models::Model;
use crate::problem::ExplanationProblem;
use crate::rational::{int, rat, Rational};
use crate::shapley::{char_fn, shap, shap_all};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub got: String,
    pub passed: bool,
}

impl Check {
    fn compare(name: impl Into<String>, expected: impl ToString, got: impl ToString) -> Self {
        let (expected, got) = (expected.to_string(), got.to_string());
        Check {
            name: name.into(),
            passed: expected == got,
            expected,
            got,
        }
    }

    fn failed(name: impl Into<String>, expected: impl ToString, error: impl ToString) -> Self {
        Check {
            name: name.into(),
            expected: expected.to_string(),
            got: format!("error: {}", error.to_string()),
            passed: false,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    /// Replaces the built-in ρ₂ model, e.g. with one read from a file.
    pub rho2_model: Option<Model>,
}

fn list(values: &[Rational]) -> String {
    let parts: Vec<String> = values.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(", "))
}

fn sets(values: &[FeatureSet]) -> String {
    let parts: Vec<String> = values.iter().map(ToString::to_string).collect();
    format!("{{{}}}", parts.join(", "))
}

fn expectations(p: &ExplanationProblem) -> Result<Vec<Rational>> {
    [vec![], vec![0], vec![1], vec![0, 1]]
        .iter()
        .map(|s| char_fn(p, s.iter().copied().collect()))
        .collect()
}

fn issue_names(p: &ExplanationProblem) -> Result<String> {
    let names: Vec<String> = detect_issues(p)?
        .issues()
        .iter()
        .map(ToString::to_string)
        .collect();
    Ok(names.join(","))
}

/// Runs every check; a failing computation becomes a failed check rather
/// than aborting the run.
pub fn verify_paper(options: &VerifyOptions) -> Vec<Check> {
    let mut checks = Vec::new();
    let mut run = |name: &str, expected: String, got: Result<String>| {
        checks.push(match got {
            Ok(g) => Check::compare(name, expected, g),
            Err(e) => Check::failed(name, expected, e),
        })
    };

    // 𝓔₂
    let rho2 = || -> Result<ExplanationProblem> {
        match &options.rho2_model {
            Some(model) => {
                ExplanationProblem::regression(model.clone(), vec![int(1), int(1)], rat(1, 5))
            }
            None => Ok(gen_rho2()?.problem),
        }
    };
    run(
        "rho2: evaluate at (1,1), (0,0), (-1/4,1)",
        "(1, -2, 2)".into(),
        rho2().and_then(|p| {
            let m = p.model();
            Ok(list(&[
                m.evaluate(&[int(1), int(1)])?,
                m.evaluate(&[int(0), int(0)])?,
                m.evaluate(&[rat(-1, 4), int(1)])?,
            ]))
        }),
    );
    run(
        "rho2: nu(S) for S = {}, {1}, {2}, {1,2}",
        "(1/2, 1, 3/2, 1)".into(),
        rho2().and_then(|p| Ok(list(&expectations(&p)?))),
    );
    run(
        "rho2: SHAP scores",
        "(0, 1/2)".into(),
        rho2().and_then(|p| Ok(list(&shap_all(&p)?))),
    );
    run(
        "rho2: AXps / CXps with delta = 1/5",
        "{{1}} / {{1}}".into(),
        rho2().and_then(|p| {
            Ok(format!(
                "{} / {}",
                sets(&enumerate_axps(&p)?),
                sets(&enumerate_cxps(&p)?)
            ))
        }),
    );

    // 𝓔₁
    for (alpha, codomain) in [(int(1), "{-5, 1, 3}"), (rat(1, 4), "{-1/2, 1, 3/2}")] {
        run(
            &format!("runex1: codomain at alpha = {alpha}"),
            codomain.into(),
            gen_runex1(alpha).map(|g| {
                let t = g.problem.model().as_tabular().expect("tabular");
                let mut values: Vec<Rational> = t.outputs().to_vec();
                values.sort();
                values.dedup();
                let parts: Vec<String> = values.iter().map(ToString::to_string).collect();
                format!("{{{}}}", parts.join(", "))
            }),
        );
    }
    run(
        "runex1: nu(S) at alpha = 1/2",
        "(1/2, 1, 3/2, 1)".into(),
        gen_runex1(rat(1, 2)).and_then(|g| Ok(list(&expectations(&g.problem)?))),
    );
    run(
        "runex1: SHAP scores at alpha = 1/2",
        "(0, 1/2)".into(),
        gen_runex1(rat(1, 2)).and_then(|g| Ok(list(&shap_all(&g.problem)?))),
    );
    for (label, delta) in [("classification", Some(int(0))), ("regression", None)] {
        run(
            &format!("runex1: AXps / CXps / relevant ({label}, alpha = 1)"),
            "{{1}} / {{1}} / {1}".into(),
            gen_runex1_with(int(1), delta).and_then(|g| {
                let p = &g.problem;
                Ok(format!(
                    "{} / {} / {}",
                    sets(&enumerate_axps(p)?),
                    sets(&enumerate_cxps(p)?),
                    relevant_features(p)?
                ))
            }),
        );
    }
    run(
        "runex1: l0 AEx within distance 1 / none with feature 1 fixed",
        "true / false".into(),
        gen_runex1(int(1)).and_then(|g| {
            let p = &g.problem;
            let free = AExQuery::new(int(1), Norm::L0, FeatureSet::EMPTY)?;
            let pinned = AExQuery::new(int(2), Norm::L0, FeatureSet::singleton(0))?;
            Ok(format!(
                "{} / {}",
                find_aex(p, &free)?.is_some(),
                find_aex(p, &pinned)?.is_some()
            ))
        }),
    );

    // 𝓔₃
    run(
        "rho3: nu(S) at alpha = 1/2",
        "(1/2, 1, 3/2, 1)".into(),
        gen_rho3(rat(1, 2)).and_then(|g| Ok(list(&expectations(&g.problem)?))),
    );
    run(
        "rho3: continuous, sv(1) = 0",
        "true, 0".into(),
        gen_rho3(rat(1, 2)).and_then(|g| {
            let p = &g.problem;
            let pw = p.model().as_piecewise().expect("piecewise");
            Ok(format!(
                "{}, {}",
                pw.check_continuity().is_empty(),
                shap(p, 0)?
            ))
        }),
    );

    // boolean families
    run(
        "prop1 (m = 2): feature 3 irrelevant with sv(3) < 0",
        "true".into(),
        gen_prop1(2).and_then(|g| {
            let p = &g.problem;
            Ok((!relevant_features(p)?.contains(2) && shap(p, 2)?.is_negative()).to_string())
        }),
    );
    run(
        "prop2 (m = 1): feature 3 relevant with sv(3) = 0",
        "true".into(),
        gen_prop2(1).and_then(|g| {
            let p = &g.problem;
            Ok((relevant_features(p)?.contains(2) && shap(p, 2)?.is_zero()).to_string())
        }),
    );
    run(
        "prop3 (m = 1): sv(4) > 0 irrelevant, sv(3) = 0 relevant",
        "true".into(),
        gen_prop3(1).and_then(|g| {
            let p = &g.problem;
            let rel = relevant_features(p)?;
            Ok((!rel.contains(3)
                && shap(p, 3)?.is_positive()
                && rel.contains(2)
                && shap(p, 2)?.is_zero())
            .to_string())
        }),
    );
    for m in 3..=6 {
        run(
            &format!("prop4 (m = {m}): closed form sv(n) equals brute force"),
            closed_form_prop4_sv(m).map_or_else(|e| e.to_string(), |v| v.to_string()),
            gen_prop4(m).and_then(|g| Ok(shap(&g.problem, m)?.to_string())),
        );
    }
    run(
        "prop4 (m = 3): issues",
        "I1,I2,I5".into(),
        gen_prop4(3).and_then(|g| issue_names(&g.problem)),
    );
    run(
        "prop5 (m = 2): I6 holds",
        "true".into(),
        gen_prop5(2).and_then(|g| Ok(detect_issues(&g.problem)?.holds(Issue::I6).to_string())),
    );
    run(
        "negation (prop1, m = 2): scores negated, same issues",
        "true".into(),
        gen_prop1(2).and_then(|g| Ok(negation_audit(&g.problem)?.holds().to_string())),
    );

    checks
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}
