mod load;
mod report;

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use xpaudit::explanations::{check_duality, enumerate_axps, enumerate_cxps, relevant_features};
use xpaudit::generators::{generate, Family, GeneratorConfig};
use xpaudit::issues::detect_issues;
use xpaudit::models::{json as model_json, InputNorm, LipschitzBound};
use xpaudit::rational::parse_rational;
use xpaudit::reproduce::{all_passed, verify_paper, VerifyOptions};
use xpaudit::shapley::ShapleyEngine;
use xpaudit::FeatureSet;

use crate::load::{load_model, load_problem, sidecar_path};
use crate::report::{number, pretty, InputDigest, RunReport};

#[derive(Parser)]
#[command(
    name = "xpaudit",
    version,
    about = "Exact SHAP scores and formal explanations"
)]
struct Cli {
    /// Print a machine-readable JSON report.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ProblemArgs {
    /// Model file (JSON).
    #[arg(long)]
    model: PathBuf,
    /// Comma-separated feature values or domain labels.
    #[arg(long)]
    instance: Option<String>,
    /// Similarity threshold, e.g. 1/5.
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    L1,
    Linf,
}

#[derive(Subcommand)]
enum Command {
    /// Exact SHAP score of every feature.
    Shap(ProblemArgs),
    /// AXps, CXps, feature relevancy and the duality check.
    Explain(ProblemArgs),
    /// Which of the issues I1-I6 hold.
    Audit(ProblemArgs),
    /// Write a generated model and its instance sidecar.
    Generate {
        #[arg(long)]
        family: String,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        delta: Option<String>,
        /// Model output path; the sidecar goes next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Continuity verdict and a Lipschitz bound for a piecewise model.
    Lipschitz {
        #[arg(long)]
        model: PathBuf,
        /// Norm on the input space.
        #[arg(long, value_enum, default_value = "linf")]
        norm: NormArg,
    },
    /// Recompute the built-in worked examples and compare exactly.
    VerifyPaper {
        /// Use this file in place of the built-in rho2 model.
        #[arg(long)]
        model: Option<PathBuf>,
    },
}

struct Outcome {
    report: RunReport,
    text: String,
    exit: u8,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let command = format!("xpaudit {}", args.join(" "));
    match run(cli.command, command) {
        Ok(outcome) => {
            if cli.json {
                let mut text = serde_json::to_string_pretty(&outcome.report)
                    .expect("reports always serialize");
                text.push('\n');
                emit(&text);
            } else {
                emit(&outcome.text);
            }
            ExitCode::from(outcome.exit)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Writes to stdout, tolerating a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn run(command: Command, echo: String) -> Result<Outcome> {
    let mut inputs = Vec::new();
    let (result, text, passed) = match command {
        Command::Shap(a) => cmd_shap(&a, &mut inputs)?,
        Command::Explain(a) => cmd_explain(&a, &mut inputs)?,
        Command::Audit(a) => cmd_audit(&a, &mut inputs)?,
        Command::Generate {
            family,
            m,
            alpha,
            delta,
            out,
        } => cmd_generate(&family, m, alpha.as_deref(), delta.as_deref(), &out)?,
        Command::Lipschitz { model, norm } => cmd_lipschitz(&model, norm, &mut inputs)?,
        Command::VerifyPaper { model } => cmd_verify_paper(model.as_deref(), &mut inputs)?,
    };
    Ok(Outcome {
        exit: if passed == Some(false) { 1 } else { 0 },
        report: RunReport {
            command: echo,
            inputs,
            result,
            passed,
        },
        text,
    })
}

type CommandResult = Result<(serde_json::Value, String, Option<bool>)>;

fn cmd_shap(a: &ProblemArgs, inputs: &mut Vec<InputDigest>) -> CommandResult {
    let problem = load_problem(&a.model, a.instance.as_deref(), a.delta.as_deref(), inputs)?;
    let engine = ShapleyEngine::new(&problem);
    let scores = engine.shap_all()?;
    let m = problem.feature_count();
    let nu_empty = engine.char_fn(FeatureSet::EMPTY)?;
    let nu_full = engine.char_fn(FeatureSet::full(m))?;
    let mut text = format!(
        "prediction {} at ({})\n",
        problem.prediction(),
        join(problem.point())
    );
    for (i, s) in scores.iter().enumerate() {
        writeln!(text, "sv({}) = {}", i + 1, pretty(s))?;
    }
    writeln!(
        text,
        "nu(F) - nu(empty) = {}",
        pretty(&(&nu_full - &nu_empty))
    )?;
    let result = json!({
        "prediction": problem.prediction().to_string(),
        "mode": problem.mode(),
        "delta": problem.delta().to_string(),
        "scores": scores.iter().enumerate().map(|(i, s)| {
            let mut v = number(s);
            v["feature"] = json!(i + 1);
            v
        }).collect::<Vec<_>>(),
        "nu_empty": number(&nu_empty),
        "nu_full": number(&nu_full),
    });
    Ok((result, text, None))
}

fn cmd_explain(a: &ProblemArgs, inputs: &mut Vec<InputDigest>) -> CommandResult {
    let problem = load_problem(&a.model, a.instance.as_deref(), a.delta.as_deref(), inputs)?;
    let axps = enumerate_axps(&problem)?;
    let cxps = enumerate_cxps(&problem)?;
    let relevant = relevant_features(&problem)?;
    let irrelevant = relevant.complement(problem.feature_count());
    let duality = check_duality(&problem)?;
    let text = format!(
        "AXps: {{{}}}\nCXps: {{{}}}\nrelevant: {relevant}\nirrelevant: {irrelevant}\nduality: {}\n",
        join(&axps),
        join(&cxps),
        if duality { "ok" } else { "FAILED" },
    );
    let result = json!({
        "axps": axps,
        "cxps": cxps,
        "relevant": relevant,
        "irrelevant": irrelevant,
        "duality": duality,
    });
    Ok((result, text, None))
}

fn cmd_audit(a: &ProblemArgs, inputs: &mut Vec<InputDigest>) -> CommandResult {
    let problem = load_problem(&a.model, a.instance.as_deref(), a.delta.as_deref(), inputs)?;
    let report = detect_issues(&problem)?;
    let mut text = String::new();
    for (i, s) in report.scores.iter().enumerate() {
        let tag = if report.relevant.contains(i) {
            "relevant"
        } else {
            "irrelevant"
        };
        writeln!(text, "sv({}) = {}  [{tag}]", i + 1, pretty(s))?;
    }
    for f in &report.findings {
        write!(text, "{}: {}", f.issue, if f.holds { "yes" } else { "no" })?;
        if let Some(w) = f.witness {
            write!(text, "  ({w})")?;
        }
        if let Some(note) = &f.note {
            write!(text, "  -- {note}")?;
        }
        text.push('\n');
    }
    let mut result = serde_json::to_value(&report)?;
    result["decimal_scores"] = json!(report
        .scores
        .iter()
        .map(|s| number(s)["decimal"].clone())
        .collect::<Vec<_>>());
    result["issues"] = json!(report.issues());
    Ok((result, text, None))
}

fn cmd_generate(
    family: &str,
    m: Option<usize>,
    alpha: Option<&str>,
    delta: Option<&str>,
    out: &Path,
) -> CommandResult {
    let family: Family = family.parse()?;
    let config = GeneratorConfig {
        family,
        m,
        alpha: alpha.map(parse_rational).transpose().context("--alpha")?,
        delta: delta.map(parse_rational).transpose().context("--delta")?,
    };
    let generated = generate(&config)?;
    let sidecar = sidecar_path(out);
    fs::write(out, model_json::write_model(generated.problem.model()))
        .with_context(|| format!("writing {}", out.display()))?;
    fs::write(&sidecar, generated.sidecar().to_json())
        .with_context(|| format!("writing {}", sidecar.display()))?;
    let mut text = format!(
        "{family}: {} features\nwrote {}\nwrote {}\n",
        generated.problem.feature_count(),
        out.display(),
        sidecar.display()
    );
    for c in &generated.conditions {
        writeln!(
            text,
            "  [{}] {}",
            if c.holds { "ok" } else { "FAIL" },
            c.name
        )?;
    }
    let result = json!({
        "family": family,
        "features": generated.problem.feature_count(),
        "model": out.display().to_string(),
        "sidecar": sidecar.display().to_string(),
        "conditions": generated.conditions,
    });
    Ok((result, text, None))
}

fn cmd_lipschitz(path: &Path, norm: NormArg, inputs: &mut Vec<InputDigest>) -> CommandResult {
    let model = load_model(path, inputs)?;
    let Some(pw) = model.as_piecewise() else {
        bail!("lipschitz needs a piecewise model");
    };
    let (norm, name) = match norm {
        NormArg::L1 => (InputNorm::L1, "l1"),
        NormArg::Linf => (InputNorm::LInf, "linf"),
    };
    Ok(match pw.lipschitz_bound(norm) {
        LipschitzBound::Bounded(c) => (
            json!({"continuous": true, "norm": name, "bound": number(&c)}),
            format!(
                "continuous\nLipschitz bound ({name} input norm): {}\n",
                pretty(&c)
            ),
            None,
        ),
        LipschitzBound::Discontinuous(faces) => {
            let mut text = String::from("discontinuous\n");
            let mut rows = Vec::new();
            for f in &faces {
                writeln!(
                    text,
                    "  face x{} = {} between cells {} and {}: at ({}) {} vs {}",
                    f.axis + 1,
                    f.coordinate,
                    f.left_cell + 1,
                    f.right_cell + 1,
                    join(&f.witness),
                    f.left_value,
                    f.right_value
                )?;
                let mut row = serde_json::to_value(f)?;
                row["axis"] = json!(f.axis + 1);
                row["left_cell"] = json!(f.left_cell + 1);
                row["right_cell"] = json!(f.right_cell + 1);
                rows.push(row);
            }
            (
                json!({"continuous": false, "norm": name, "bound": null, "faces": rows}),
                text,
                None,
            )
        }
    })
}

fn cmd_verify_paper(model: Option<&Path>, inputs: &mut Vec<InputDigest>) -> CommandResult {
    let options = VerifyOptions {
        rho2_model: model.map(|p| load_model(p, inputs)).transpose()?,
    };
    let checks = verify_paper(&options);
    let passed = all_passed(&checks);
    let mut text = String::new();
    for c in &checks {
        if c.passed {
            writeln!(text, "PASS  {}", c.name)?;
        } else {
            writeln!(
                text,
                "FAIL  {}\n      expected {}\n      got      {}",
                c.name, c.expected, c.got
            )?;
        }
    }
    let failures = checks.iter().filter(|c| !c.passed).count();
    writeln!(text, "{} checks, {failures} failed", checks.len())?;
    Ok((json!({"checks": checks}), text, Some(passed)))
}

fn join<T: ToString>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}
