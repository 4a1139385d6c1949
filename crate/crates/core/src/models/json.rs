//! JSON model files.
//!
//! ```json
//! {"kind":"tabular","domains":[["0","1"],["0","1"]],"outputs":{"0,0":"-2", ...}}
//! {"kind":"piecewise","box":[["-1/2","3/2"],...],
//!  "cells":[{"lo":[...],"hi":[...],"poly":[{"coef":"1","vars":[1]}]}]}
//! ```
//!
//! Rationals are strings (`"p/q"` or integers). Tabular output keys join the
//! domain labels of a point with commas. Polynomial variables are one-based.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{Cell, Domain, FeatureSpace, FiniteDomain, Model, PiecewiseModel, Polynomial};
use super::{TabularModel, Term};
use crate::error::{Error, Result};
use crate::feature_set::{FeatureSet, MAX_FEATURES};
use crate::rational::{format_rational, parse_rational, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelFile {
    Tabular {
        domains: Vec<Vec<String>>,
        outputs: BTreeMap<String, String>,
    },
    Piecewise {
        #[serde(rename = "box")]
        bounds: Vec<[String; 2]>,
        cells: Vec<CellFile>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellFile {
    pub lo: Vec<String>,
    pub hi: Vec<String>,
    pub poly: Vec<TermFile>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermFile {
    pub coef: String,
    pub vars: Vec<usize>,
}

pub fn parse_model(text: &str) -> Result<Model> {
    let file: ModelFile = serde_json::from_str(text)?;
    file.into_model()
}

/// Canonical pretty-printed JSON with a trailing newline.
pub fn write_model(model: &Model) -> String {
    let file = ModelFile::from_model(model);
    let mut text = serde_json::to_string_pretty(&file).expect("model files always serialize");
    text.push('\n');
    text
}

fn parse_all(texts: &[String]) -> Result<Vec<Rational>> {
    texts.iter().map(|t| parse_rational(t)).collect()
}

fn format_all(values: &[Rational]) -> Vec<String> {
    values.iter().map(format_rational).collect()
}

impl ModelFile {
    pub fn into_model(self) -> Result<Model> {
        match self {
            ModelFile::Tabular { domains, outputs } => tabular_from_file(domains, outputs),
            ModelFile::Piecewise { bounds, cells } => piecewise_from_file(bounds, cells),
        }
    }

    pub fn from_model(model: &Model) -> Self {
        match model {
            Model::Tabular(t) => {
                let m = t.space().feature_count();
                let domains: Vec<Vec<String>> = (0..m)
                    .map(|i| t.finite_domain(i).labels().to_vec())
                    .collect();
                let outputs = (0..t.len())
                    .map(|idx| {
                        let key = t
                            .decode(idx)
                            .iter()
                            .enumerate()
                            .map(|(i, &d)| domains[i][d].as_str())
                            .collect::<Vec<_>>()
                            .join(",");
                        (key, format_rational(t.output_at(idx)))
                    })
                    .collect();
                ModelFile::Tabular { domains, outputs }
            }
            Model::Piecewise(p) => ModelFile::Piecewise {
                bounds: p
                    .box_lo()
                    .iter()
                    .zip(p.box_hi())
                    .map(|(l, h)| [format_rational(l), format_rational(h)])
                    .collect(),
                cells: p
                    .cells()
                    .iter()
                    .map(|c| CellFile {
                        lo: format_all(&c.lo),
                        hi: format_all(&c.hi),
                        poly: c
                            .poly
                            .terms()
                            .iter()
                            .map(|t| TermFile {
                                coef: format_rational(&t.coef),
                                vars: t.vars.iter().map(|i| i + 1).collect(),
                            })
                            .collect(),
                    })
                    .collect(),
            },
        }
    }
}

fn tabular_from_file(
    domains: Vec<Vec<String>>,
    outputs: BTreeMap<String, String>,
) -> Result<Model> {
    for labels in &domains {
        if let Some(bad) = labels.iter().find(|l| l.contains(',')) {
            return Err(Error::Parse(format!(
                "domain label {bad:?} contains a comma"
            )));
        }
    }
    let space = FeatureSpace::new(
        domains
            .into_iter()
            .map(|labels| Domain::Finite(FiniteDomain::from_labels(labels)))
            .collect(),
    )?;
    let probe = TabularModel::from_fn(space, |_| Rational::zero())?;
    let mut table = vec![None; probe.len()];
    let m = probe.space().feature_count();
    for (key, value) in &outputs {
        let labels: Vec<&str> = key.split(',').collect();
        if labels.len() != m {
            return Err(Error::Parse(format!("output key {key:?} needs {m} labels")));
        }
        let mut digits = Vec::with_capacity(m);
        for (i, label) in labels.iter().enumerate() {
            let d = probe
                .finite_domain(i)
                .index_of_label(label)
                .ok_or_else(|| Error::Domain {
                    feature: i + 1,
                    message: format!("unknown label {label:?} in output key {key:?}"),
                })?;
            digits.push(d);
        }
        let idx = probe.index_of(&digits);
        if table[idx].is_some() {
            return Err(Error::Parse(format!("duplicate output key {key:?}")));
        }
        table[idx] = Some(parse_rational(value)?);
    }
    let missing = table.iter().filter(|o| o.is_none()).count();
    if missing > 0 {
        return Err(Error::Parse(format!(
            "outputs are not total: {missing} of {} points missing",
            table.len()
        )));
    }
    let outputs = table.into_iter().map(Option::unwrap).collect();
    Ok(Model::Tabular(TabularModel::new(
        probe.space().clone(),
        outputs,
    )?))
}

fn piecewise_from_file(bounds: Vec<[String; 2]>, cells: Vec<CellFile>) -> Result<Model> {
    let bounds = bounds
        .iter()
        .map(|[l, h]| Ok((parse_rational(l)?, parse_rational(h)?)))
        .collect::<Result<Vec<_>>>()?;
    let space = FeatureSpace::boxed(bounds)?;
    let cells = cells
        .into_iter()
        .map(|c| {
            let terms = c
                .poly
                .into_iter()
                .map(|t| {
                    let mut vars = FeatureSet::EMPTY;
                    for &i in &t.vars {
                        if i == 0 || i > MAX_FEATURES {
                            return Err(Error::Parse(format!("variable index {i} out of range")));
                        }
                        if vars.contains(i - 1) {
                            return Err(Error::Parse(format!(
                                "variable {i} repeated in a monomial (not multilinear)"
                            )));
                        }
                        vars = vars.with(i - 1);
                    }
                    Ok(Term {
                        coef: parse_rational(&t.coef)?,
                        vars,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Cell::new(
                parse_all(&c.lo)?,
                parse_all(&c.hi)?,
                Polynomial::new(terms),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Model::Piecewise(PiecewiseModel::new(space, cells)?))
}
