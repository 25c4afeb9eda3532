//! `perturbkit`: run a perturbation problem from a TOML file and write
//! `report.json` / `table.csv`.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 mismatch
//! against reference values (corpus run or `check`).

mod config;
mod report;
mod tasks;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use config::{parse_complex, parse_grid, parse_region, ProblemConfig, TaskKind};
use report::Format;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Validation { path: String, message: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{}: {source}", source.name())]
    Numerical {
        #[from]
        source: perturbkit::Error,
    },
    #[error("{0}")]
    Mismatch(String),
}

impl CliError {
    pub fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Validation {
            path: path.into(),
            message: message.into(),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            CliError::Validation { .. } => "ValidationError",
            CliError::Io { .. } => "IoError",
            CliError::Numerical { source } => source.name(),
            CliError::Mismatch(_) => "Mismatch",
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation { .. } | CliError::Io { .. } => 2,
            CliError::Numerical { source } => match source {
                // the problem as posed is outside what the operation accepts
                perturbkit::Error::InvalidInput(_)
                | perturbkit::Error::RegionTouchesSpectrum
                | perturbkit::Error::UnsupportedBackend(_)
                | perturbkit::Error::ComplexTauUnsupported
                | perturbkit::Error::RegularityViolation(_)
                | perturbkit::Error::OnSpectrumEdge(_) => 2,
                _ => 3,
            },
            CliError::Mismatch(_) => 4,
        }
    }

    fn to_json(&self) -> Value {
        let mut v = json!({ "name": self.name(), "message": self.to_string() });
        if let CliError::Validation { path, .. } = self {
            v["path"] = json!(path);
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Both,
}

#[derive(Debug, Parser)]
#[command(name = "perturbkit", version, about = "Rank-one singular perturbations: resolvents, eigenvalues, scattering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Problem file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for report.json and table.csv.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Relative quadrature tolerance; only tighter than the default.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Search region: `A:B`, `A:B:H` (imaginary part in [-H, H]) or `[A,B]`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    region: Option<String>,
    /// Energy grid `A:B:N`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Extra starting point `RE,IM` for the eigenvalue search.
    #[arg(long, global = true, allow_hyphen_values = true)]
    seed: Vec<String>,
    #[arg(long, global = true, value_enum, default_value = "both")]
    format: FormatArg,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Perturbed resolvent data at the configured points.
    Resolve,
    /// Eigenvalues of the perturbed operator in a region.
    Eigen,
    /// Perturbation with a prescribed eigenvalue and eigenvectors.
    Inverse,
    /// Partner eigenvalue and perturbation from one eigenvalue and eigenvector data.
    Dualpair,
    /// Regular perturbations approaching a τ-class one.
    Approx,
    /// Scattering matrix on an energy grid.
    Scatter,
    /// Recompute the built-in worked examples against their reference values.
    VerifyExamples,
    /// Re-run the problem stored in a report and compare.
    Check { report: PathBuf },
}

impl Command {
    fn kind(&self) -> Option<TaskKind> {
        Some(match self {
            Command::Resolve => TaskKind::Resolve,
            Command::Eigen => TaskKind::Eigen,
            Command::Inverse => TaskKind::Inverse,
            Command::Dualpair => TaskKind::Dualpair,
            Command::Approx => TaskKind::Approx,
            Command::Scatter => TaskKind::Scatter,
            Command::VerifyExamples => TaskKind::VerifyExamples,
            Command::Check { .. } => return None,
        })
    }
}

fn set_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("PERTURBKIT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::validation("PERTURBKIT_THREADS", format!("expected a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::validation("PERTURBKIT_THREADS", e.to_string()))
}

/// Config file plus flags, as one config. This merged form goes into the report.
fn merged_config(cli: &Cli, kind: TaskKind) -> Result<ProblemConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|source| CliError::Io {
                path: p.display().to_string(),
                source,
            })?;
            ProblemConfig::parse(&text)?
        }
        None if kind == TaskKind::VerifyExamples => ProblemConfig::parse("")?,
        None => return Err(CliError::validation("--config", "required for this task")),
    };
    match cfg.task.kind {
        Some(k) if k != kind => {
            return Err(CliError::validation(
                "task.kind",
                format!("config is for `{}`, invoked as `{}`", k.name(), kind.name()),
            ))
        }
        _ => cfg.task.kind = Some(kind),
    }
    if let Some(t) = cli.tol {
        cfg.task.tol = Some(t);
    }
    if let Some(r) = &cli.region {
        cfg.task.region = Some(parse_region(r)?);
    }
    if let Some(g) = &cli.grid {
        cfg.task.grid = Some(parse_grid(g)?);
    }
    if !cli.seed.is_empty() {
        let seeds = cli.seed.iter().map(|s| parse_complex(s)).collect::<Result<Vec<_>, _>>()?;
        cfg.task.seeds.get_or_insert_with(Vec::new).extend(seeds);
    }
    Ok(cfg)
}

fn input_json(cfg: &ProblemConfig) -> Value {
    serde_json::to_value(cfg).expect("config serializes")
}

fn run_task(cli: &Cli, kind: TaskKind) -> Result<(), CliError> {
    let format = match cli.format {
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
        FormatArg::Both => Format::Both,
    };
    let mut doc = json!({ "task": kind.name() });
    let outcome = merged_config(cli, kind).and_then(|cfg| {
        doc["input"] = input_json(&cfg);
        tasks::run(kind, &cfg)
    });
    match outcome {
        Ok(out) => {
            doc["status"] = json!(if out.mismatch.is_some() { "mismatch" } else { "ok" });
            doc["result"] = out.result;
            for line in &out.summary {
                println!("{line}");
            }
            for p in report::emit(&cli.out, &doc, out.table.as_ref(), format)? {
                println!("wrote {}", p.display());
            }
            match out.mismatch {
                Some(m) => Err(CliError::Mismatch(m)),
                None => Ok(()),
            }
        }
        Err(e) => {
            doc["status"] = json!("error");
            doc["error"] = e.to_json();
            // the report is secondary to the original failure
            if format != Format::Csv {
                let _ = report::emit(&cli.out, &doc, None, Format::Json);
            }
            Err(e)
        }
    }
}

fn check(path: &Path, tol: Option<f64>) -> Result<(), CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| CliError::validation("report", e.to_string()))?;
    let kind: TaskKind = serde_json::from_value(doc["task"].clone())
        .map_err(|e| CliError::validation("report.task", e.to_string()))?;
    let mut cfg: ProblemConfig = serde_json::from_value(doc["input"].clone())
        .map_err(|e| CliError::validation("report.input", e.to_string()))?;
    if let Some(t) = tol {
        cfg.task.tol = Some(t);
    }

    let mut problems = Vec::new();
    match (doc["status"].as_str(), tasks::run(kind, &cfg)) {
        (Some("error"), Err(e)) => {
            if doc["error"]["name"] != json!(e.name()) {
                problems.push(format!("error {} in report, {} recomputed", doc["error"]["name"], e.name()));
            }
        }
        (Some("error"), Ok(_)) => problems.push("report records an error; recomputation succeeded".into()),
        (_, Err(e)) => return Err(e),
        (status, Ok(out)) => {
            let recomputed = if out.mismatch.is_some() { "mismatch" } else { "ok" };
            if status != Some(recomputed) {
                problems.push(format!("status {status:?} in report, {recomputed} recomputed"));
            }
            problems.extend(report::compare(&doc["result"], &out.result, 1e-9));
            problems.extend(tasks::residual_checks(kind, &cfg, &doc["result"])?);
        }
    }
    for p in &problems {
        println!("mismatch: {p}");
    }
    if problems.is_empty() {
        println!("{}: consistent with recomputation", path.display());
        Ok(())
    } else {
        Err(CliError::Mismatch(format!("{} difference(s)", problems.len())))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = set_threads().and_then(|()| match &cli.command {
        Command::Check { report } => check(report, cli.tol),
        cmd => run_task(&cli, cmd.kind().expect("task subcommand")),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
