//! Reading models, instances and thresholds from the command line.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use sha2::{Digest, Sha256};
use xpaudit::generators::ProblemSidecar;
use xpaudit::models::{json, Domain, Model};
use xpaudit::rational::{int, parse_rational};
use xpaudit::{ExplanationProblem, Mode, Rational};

use crate::report::InputDigest;

/// `dir/name.json` → `dir/name.instance.json`.
pub fn sidecar_path(model: &Path) -> PathBuf {
    let stem = model
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    model.with_file_name(format!("{stem}.instance.json"))
}

pub fn read_input(path: &Path, digests: &mut Vec<InputDigest>) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    digests.push(InputDigest {
        path: path.display().to_string(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    });
    String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", path.display()))
}

pub fn load_model(path: &Path, digests: &mut Vec<InputDigest>) -> Result<Model> {
    let text = read_input(path, digests)?;
    let model =
        json::parse_model(&text).with_context(|| format!("loading model {}", path.display()))?;
    let violations = model.validate();
    if !violations.is_empty() {
        let lines: Vec<String> = violations.iter().map(|v| format!("  - {v}")).collect();
        bail!("invalid model {}:\n{}", path.display(), lines.join("\n"));
    }
    Ok(model)
}

/// Parses `"v1,v2,..."`; finite features accept a domain label or a value.
pub fn parse_instance(model: &Model, text: &str) -> Result<Vec<Rational>> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let m = model.feature_count();
    if parts.len() != m {
        bail!(
            "instance has {} values but the model has {m} features",
            parts.len()
        );
    }
    parts
        .iter()
        .zip(model.space().domains())
        .enumerate()
        .map(|(i, (part, domain))| match domain {
            Domain::Finite(d) => {
                if let Some(k) = d.index_of_label(part) {
                    return Ok(d.values()[k].clone());
                }
                let value =
                    parse_rational(part).with_context(|| format!("feature {}: {part:?}", i + 1))?;
                if d.index_of_value(&value).is_none() {
                    bail!("feature {}: {part:?} is not in the domain", i + 1);
                }
                Ok(value)
            }
            Domain::Interval { .. } => {
                parse_rational(part).with_context(|| format!("feature {}: {part:?}", i + 1))
            }
        })
        .collect()
}

/// Builds the problem from flags, falling back to the sidecar written by
/// `generate` next to the model.
pub fn load_problem(
    model_path: &Path,
    instance: Option<&str>,
    delta: Option<&str>,
    digests: &mut Vec<InputDigest>,
) -> Result<ExplanationProblem> {
    let model = load_model(model_path, digests)?;
    let sidecar_file = sidecar_path(model_path);
    let sidecar = if sidecar_file.exists() {
        let text = read_input(&sidecar_file, digests)?;
        Some(
            ProblemSidecar::from_json(&text)
                .with_context(|| format!("reading {}", sidecar_file.display()))?,
        )
    } else {
        None
    };
    let point = match (instance, &sidecar) {
        (Some(text), _) => parse_instance(&model, text)?,
        (None, Some(s)) => s.point.clone(),
        (None, None) => bail!("--instance is required (no sidecar next to the model)"),
    };
    let delta = match (delta, &sidecar) {
        (Some(text), _) => parse_rational(text).context("--delta")?,
        (None, Some(s)) => s.delta.clone(),
        (None, None) => match model {
            Model::Tabular(_) => int(0),
            Model::Piecewise(_) => bail!("--delta is required for piecewise models"),
        },
    };
    let mode = if model.as_tabular().is_some() && delta == int(0) {
        Mode::Classification
    } else {
        Mode::Regression
    };
    Ok(ExplanationProblem::new(model, point, mode, delta)?)
}
