//! Command-line front end for `orthochain`.
//!
//! Every command writes one JSON report (or a CSV table for the per-level
//! commands) wrapped in a `{"schema": "v1", "command": ...}` envelope. Exit
//! codes: 0 success, 1 a checked inequality failed, 2 usage or input error.

mod commands;
pub mod config;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

pub use config::{CommonArgs, Format, RunConfig, Settings};
use orthochain::process::GeneratorKind;

pub const SCHEMA: &str = "v1";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Input(#[from] orthochain::Error),
    #[error("stage {stage}: {message}")]
    Stage {
        stage: &'static str,
        message: String,
    },
    #[error("cannot write output: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Output(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "orthochain",
    version,
    about = "Majorizing measures and chaining bounds for orthogonal series"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build the index set T and its 4-adic partition.
    Build(CommonArgs),
    /// Evaluate the strong, weak, dyadic, filtered and Rademacher-Menchov values.
    Evaluate(CommonArgs),
    /// Classify the good indices I(k) level by level.
    Classify(CommonArgs),
    /// Minimize the strong functional and maximize the weak one.
    Optimize(OptimizeArgs),
    /// Estimate E max_m (sum_{n<=m} a_n phi_n)^2 by Monte Carlo.
    Simulate(SimulateArgs),
    /// Sample the recursive construction and check the filtered lower bound.
    Adversarial(CommonArgs),
    /// Run a named property suite.
    Verify(VerifyArgs),
    /// Build, optimize, evaluate, and run the chaining and lower-bound checks.
    Pipeline(SimulateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Objective {
    Strong,
    Weak,
    Duality,
}

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value = "duality")]
    pub objective: Objective,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// gaussian, rademacher or trig.
    #[arg(long)]
    pub generator: Option<GeneratorKind>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// skeleton, lemma4, bridge, chaining, lowerbound, inequalities or all.
    #[arg(long)]
    pub suite: String,
    #[arg(long, value_name = "N")]
    pub random_measures: Option<usize>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Build(_) => "build",
            Command::Evaluate(_) => "evaluate",
            Command::Classify(_) => "classify",
            Command::Optimize(_) => "optimize",
            Command::Simulate(_) => "simulate",
            Command::Adversarial(_) => "adversarial",
            Command::Verify(_) => "verify",
            Command::Pipeline(_) => "pipeline",
        }
    }

    pub fn common(&self) -> &CommonArgs {
        match self {
            Command::Build(c)
            | Command::Evaluate(c)
            | Command::Classify(c)
            | Command::Adversarial(c) => c,
            Command::Optimize(a) => &a.common,
            Command::Simulate(a) | Command::Pipeline(a) => &a.common,
            Command::Verify(a) => &a.common,
        }
    }
}

/// What a command produced.
pub enum Body {
    Json { result: Value, pass: Option<bool> },
    Csv(Vec<u8>),
}

#[derive(Serialize)]
struct Envelope<'a> {
    schema: &'static str,
    command: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<u64>,
    config: &'a Settings,
    #[serde(skip_serializing_if = "Option::is_none")]
    pass: Option<bool>,
    result: &'a Value,
}

/// A finished run: rendered bytes plus the exit code they imply.
pub struct Rendered {
    pub bytes: Vec<u8>,
    pub exit_code: i32,
    pub out: Option<PathBuf>,
}

/// Runs a parsed command and renders its report.
pub fn execute(cli: &Cli) -> Result<Rendered, CliError> {
    let settings = Settings::resolve(cli.command.common())?;
    let body = orthochain::par::with_workers(settings.workers, || {
        commands::dispatch(&cli.command, &settings)
    })?;
    let (bytes, exit_code) = match body {
        Body::Csv(bytes) => (bytes, 0),
        Body::Json { result, pass } => {
            let timestamp = settings.timestamp.then(|| {
                std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map_or(0, |d| d.as_secs())
            });
            let env = Envelope {
                schema: SCHEMA,
                command: cli.command.name(),
                timestamp,
                config: &settings,
                pass,
                result: &result,
            };
            let mut bytes =
                serde_json::to_vec_pretty(&env).map_err(|e| CliError::Output(e.to_string()))?;
            bytes.push(b'\n');
            (bytes, if pass == Some(false) { 1 } else { 0 })
        }
    };
    Ok(Rendered {
        bytes,
        exit_code,
        out: settings.out.clone(),
    })
}

/// Parses `args`, runs the command and writes its output. Returns the exit
/// code; messages go to `err`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 {
                write!(stdout, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    match execute(&cli) {
        Ok(r) => {
            let written = match &r.out {
                Some(path) => {
                    std::fs::write(path, &r.bytes).map_err(|e| format!("{}: {e}", path.display()))
                }
                None => stdout.write_all(&r.bytes).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => r.exit_code,
                Err(e) => {
                    let _ = writeln!(err, "error: cannot write output: {e}");
                    1
                }
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
