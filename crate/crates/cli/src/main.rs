mod commands;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nfold_svd::Error;
use serde_json::json;

/// Singular systems of the n-fold integration operator in arbitrary precision.
#[derive(Debug, Parser)]
#[command(name = "nfold-svd", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Order of the operator J^n.
    #[arg(long, global = true, default_value_t = 2)]
    pub n: usize,

    /// Number of singular triples, series order, or plotted functions.
    #[arg(long, global = true)]
    pub count: Option<usize>,

    /// Binary working precision.
    #[arg(long, global = true, env = "NFOLD_BITS", default_value_t = 256)]
    pub bits: u32,

    /// Significant digits of emitted reals.
    #[arg(long, global = true)]
    pub digits: Option<usize>,

    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// json, csv or text; the default depends on the command.
    #[arg(long, global = true)]
    pub format: Option<String>,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// L2 norm of the data perturbation.
    #[arg(long, global = true, default_value_t = 0.0)]
    pub delta: f64,

    /// Safety factor of the discrepancy principle.
    #[arg(long, global = true, default_value_t = nfold_svd::spectral_cutoff::DEFAULT_TAU)]
    pub tau: f64,

    /// `auto` (discrepancy principle) or a fixed index.
    #[arg(long, global = true, default_value = "auto")]
    pub cutoff: String,

    /// unit-l2 or last-one.
    #[arg(long, global = true, default_value = "unit-l2")]
    pub normalization: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Singular values, roots and coefficient vectors.
    Eigensystem,
    /// The characteristic equation F_n(z) = 0.
    Charpoly,
    /// Exact coefficients a_1 .. a_K of the n = 2 offset expansion.
    Epsilon,
    /// Spectral cut-off reconstruction of x from y = J^n x.
    Differentiate {
        /// CSV of `t,value` rows.
        #[arg(long, conflicts_with = "example")]
        input: Option<PathBuf>,
        /// Built-in data with known solution.
        #[arg(long, value_enum)]
        example: Option<Example>,
        /// Grid points of the reconstruction CSV.
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
    /// Runs the self-check suite.
    Verify {
        /// Adds a check that fails by construction.
        #[arg(long)]
        force_failure: bool,
    },
    /// `t,u_1,...,u_N` on a uniform grid.
    Plotdata {
        #[arg(long, default_value_t = 512)]
        points: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Example {
    /// x = 1, y = t^n / n!
    Ones,
    /// x = sin(pi t), y = J^n x
    Sine,
}

/// Failure surfaced to the shell.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Library(Error),
    Io(String),
    /// The command ran but reported failed checks.
    Checks,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Library(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Checks => 1,
            Failure::Library(e) if e.is_numerical() => 2,
            _ => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Config(_) => "config",
            Failure::Library(e) if e.is_numerical() => "numerical",
            Failure::Library(_) => "invalid-input",
            Failure::Io(_) => "io",
            Failure::Checks => "verification",
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Config(m) | Failure::Io(m) => m.clone(),
            Failure::Library(e) => e.to_string(),
            Failure::Checks => "one or more checks failed".into(),
        }
    }
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Io(e.to_string())),
    }
}

fn report(failure: &Failure) -> ExitCode {
    let code = failure.exit_code();
    let body = json!({ "error": failure.kind(), "message": failure.message(), "exit_code": code });
    eprintln!("{body}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return report(&Failure::Config(e.to_string().trim().to_string())),
    };
    let run = commands::RunConfig::from_cli(&cli).and_then(|cfg| {
        let (text, ok) = commands::dispatch(&cfg)?;
        emit(&cli.output, &text)?;
        if ok {
            Ok(())
        } else {
            Err(Failure::Checks)
        }
    });
    match run {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report(&f),
    }
}
