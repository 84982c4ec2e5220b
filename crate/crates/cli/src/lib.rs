//! Command-line front end for `ccfusion`.
//!
//! Every subcommand loads one or more JSON instance files (see
//! [`ccfusion::instance`]) and prints a [`report::RunReport`] as text or JSON.
//! Exit codes: 0 success, 1 usage/parse/hypothesis errors, 2 degenerate
//! (Bessel-only or not a frame).

use std::ffi::OsString;
use std::path::PathBuf;

use ccfusion::instance::InstanceError;
use ccfusion::random::ControlConstraint;
use ccfusion::theorems::TheoremId;
use ccfusion::{FrameError, Tolerances};
use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

mod commands;
pub mod report;

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_DEGENERATE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "ccfusion", version, about = "Controlled fusion frames: bounds, reconstruction, Q-duals and theorem checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Seed for every random draw (overrides the instance's `params.seed`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte Carlo sample count (overrides `params.samples`; default 1000).
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Override a named tolerance, e.g. `--tol containment=1e-6`.
    #[arg(long = "tol", value_name = "NAME=VALUE", global = true)]
    pub tol: Vec<String>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text, global = true)]
    pub output: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FieldArg {
    Real,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PerturbKind {
    Subspace,
    Lambda,
    All,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal frame bounds, classification and Hermitian residual.
    Bounds { instance: PathBuf },
    /// Classification plus square-root gate and control diagnostics.
    Classify { instance: PathBuf },
    /// Solve `S_W x = S_W f` and report the relative error.
    Reconstruct {
        instance: PathBuf,
        /// Vector as a JSON array; complex entries as `[re, im]`.
        #[arg(long, conflicts_with = "random")]
        vector: Option<String>,
        /// Draw a Gaussian vector from `--seed`.
        #[arg(long)]
        random: bool,
    },
    /// Build `Q` for the instance and its second frame, then check the bound estimates.
    Qdual { instance: PathBuf },
    /// Subspace and/or lambda perturbation checks against the second frame.
    Perturb {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = PerturbKind::All)]
        kind: PerturbKind,
    },
    /// Run theorem verifiers on instance files or directories of them.
    Verify {
        #[arg(required = true)]
        instances: Vec<PathBuf>,
        #[arg(long, value_parser = parse_theorem, required_unless_present = "all", conflicts_with = "all")]
        theorem: Option<TheoremId>,
        /// Every theorem whose inputs are present; inapplicable ones are skipped.
        #[arg(long)]
        all: bool,
    },
    /// Write seeded random instances.
    Generate {
        /// Dimension `N` or range `LO-HI`, within 2-64.
        #[arg(long, default_value = "2-64")]
        dim: String,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, value_parser = parse_constraint, default_value = "none")]
        constraint: ControlConstraint,
        #[arg(long, value_enum, default_value_t = FieldArg::Real)]
        field: FieldArg,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_theorem(s: &str) -> Result<TheoremId, String> {
    s.parse().map_err(|e: FrameError| e.to_string())
}

fn parse_constraint(s: &str) -> Result<ControlConstraint, String> {
    s.parse().map_err(|e: FrameError| e.to_string())
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Instance { path: String, source: InstanceError },
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("invalid range: {0}")]
    InvalidRange(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Frame(FrameError::NotAFrame { .. }) => EXIT_DEGENERATE,
            _ => EXIT_ERROR,
        }
    }
}

/// Captured result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Execution {
    pub stdout: String,
    pub stderr: String,
    pub code: u8,
}

pub fn run<I, S>(args: I) -> Execution
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let (stdout, stderr) = if e.use_stderr() { (String::new(), text) } else { (text, String::new()) };
            return Execution { stdout, stderr, code };
        }
    };
    let tol = match tolerances(&cli.common.tol) {
        Ok(tol) => tol,
        Err(e) => return failure(&e),
    };
    match commands::dispatch(&cli, &tol) {
        Ok((report, code)) => Execution {
            stdout: report.render(cli.common.output),
            stderr: report.errors().iter().map(|line| format!("error: {line}\n")).collect(),
            code,
        },
        Err(e) => failure(&e),
    }
}

fn failure(e: &CliError) -> Execution {
    Execution {
        stdout: String::new(),
        stderr: format!("error: {e}\n"),
        code: e.exit_code(),
    }
}

fn tolerances(overrides: &[String]) -> Result<Tolerances, CliError> {
    let mut tol = Tolerances::default();
    for spec in overrides {
        tol.apply_override(spec)?;
    }
    Ok(tol)
}
