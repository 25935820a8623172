//! `piezo`: config-driven runs of the gap, Chern-number, polarization,
//! disorder and symmetry computations.

mod commands;
mod config;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use log::{error, info};
use serde::Serialize;

use config::{Command, Overrides, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "piezo", version, about = "Chern numbers and adiabatic charge transport of parametrized Bloch Hamiltonians")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    #[command(flatten)]
    flags: Overrides,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Spectral distance over a box of parameters (CSV).
    GapMap,
    /// Matrix of Chern numbers of a loop.
    Chern,
    /// Charge transported along a loop.
    Polarization,
    /// Real-space polarization over disorder strengths and seeds (CSV).
    Disorder,
    /// Symmetry class of a Clifford rank, and the inversion check.
    Symmetry,
    /// Geometry and gap of a loop.
    LoopInfo,
}

impl Sub {
    fn command(&self) -> Command {
        match self {
            Sub::GapMap => Command::GapMap,
            Sub::Chern => Command::Chern,
            Sub::Polarization => Command::Polarization,
            Sub::Disorder => Command::Disorder,
            Sub::Symmetry => Command::Symmetry,
            Sub::LoopInfo => Command::LoopInfo,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical { message: String, diagnostics: Option<serde_json::Value> },
    Inconsistent(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical { .. } => 3,
            CliError::Inconsistent(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numerical { .. } => "numerical",
            CliError::Inconsistent(_) => "inconsistent",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Inconsistent(m) | CliError::Numerical { message: m, .. } => m,
        }
    }
}

impl From<piezo::Error> for CliError {
    fn from(e: piezo::Error) -> Self {
        match e {
            piezo::Error::MethodDisagreement(m) => CliError::Inconsistent(m),
            e if e.is_numerical() => CliError::Numerical { message: e.to_string(), diagnostics: None },
            e => CliError::Config(e.to_string()),
        }
    }
}

/// What a command produced: a report document, and optionally a CSV table
/// that takes the place of the report as the main output.
pub struct Outcome {
    pub result: serde_json::Value,
    pub table: Option<String>,
    pub warnings: Vec<String>,
}

#[derive(Serialize)]
struct Report<'a> {
    command: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    result: Option<&'a serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<ErrorDoc<'a>>,
    warnings: &'a [String],
    runtime_ms: Option<u128>,
}

#[derive(Serialize)]
struct ErrorDoc<'a> {
    kind: &'static str,
    exit_code: u8,
    message: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    diagnostics: Option<&'a serde_json::Value>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let command = cli.command.command();
    let config = match prepare(command, &cli.flags) {
        Ok(c) => c,
        Err(e) => {
            error!("{}", e.message());
            return ExitCode::from(e.code());
        }
    };
    let timing = config.timing;
    let start = Instant::now();
    let run = match config.clone().validate() {
        Ok(run) => run,
        Err(e) => {
            error!("{}", e.message());
            return ExitCode::from(e.code());
        }
    };
    if let Some(n) = config.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            error!("cannot start {n} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    info!("{} with model '{}'", config::name(command), run.model.name());
    let outcome = commands::execute(command, &run);
    let runtime_ms = timing.then(|| start.elapsed().as_millis());
    match outcome {
        Ok(outcome) => {
            for w in &outcome.warnings {
                log::warn!("{w}");
            }
            let report = Report {
                command: config::name(command),
                version: env!("CARGO_PKG_VERSION"),
                config: &run.config,
                result: Some(&outcome.result),
                error: None,
                warnings: &outcome.warnings,
                runtime_ms,
            };
            match emit(&run.config, &report, outcome.table.as_deref()) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    error!("{}", e.message());
                    ExitCode::from(e.code())
                }
            }
        }
        Err(e) => {
            error!("{}", e.message());
            let diagnostics = match &e {
                CliError::Numerical { diagnostics, .. } => diagnostics.as_ref(),
                _ => None,
            };
            let report = Report {
                command: config::name(command),
                version: env!("CARGO_PKG_VERSION"),
                config: &run.config,
                result: None,
                error: Some(ErrorDoc { kind: e.kind(), exit_code: e.code(), message: e.message(), diagnostics }),
                warnings: &[],
                runtime_ms,
            };
            // failure documents go to standard output only, never to --out
            let _ = writeln!(std::io::stdout(), "{}", to_json(&report));
            ExitCode::from(e.code())
        }
    }
}

fn prepare(command: Command, flags: &Overrides) -> Result<RunConfig, CliError> {
    let mut config = match &flags.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    config.apply(command, flags)?;
    Ok(config)
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize")
}

/// With a table, the table goes to `--out` (or standard output) and the
/// report to standard output (or standard error). Without one, the report
/// is the main output.
fn emit(config: &RunConfig, report: &Report, table: Option<&str>) -> Result<(), CliError> {
    let doc = to_json(report) + "\n";
    let write = |path: &std::path::Path, text: &str| {
        std::fs::write(path, text).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
    };
    let stdout = |text: &str| {
        std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Config(format!("cannot write standard output: {e}")))
    };
    match (table, &config.out) {
        (Some(t), Some(path)) => {
            write(path, t)?;
            stdout(&doc)
        }
        (Some(t), None) => {
            eprint!("{doc}");
            stdout(t)
        }
        (None, Some(path)) => write(path, &doc),
        (None, None) => stdout(&doc),
    }
}
