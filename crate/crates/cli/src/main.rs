//! `biasqec` command-line driver.
//!
//! Every flag can also be set through an environment variable named
//! `BIASQEC_<FLAG>` (for example `BIASQEC_SAMPLES=60000`); explicit flags win.

mod commands;
mod manifest;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use biasqec::{Bias, CodeFamily, FailureMode};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "biasqec", version, about = "Maximum-likelihood decoding of surface codes under biased noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the stabilizer algebra of a code and print the report.
    Validate(CodeArgs),
    /// Closed-form failure rates at the special point, as JSON.
    Exact(ExactArgs),
    /// Error rate at which the channel entropy reaches one bit.
    Hashing(HashingArgs),
    /// Decode one syndrome given as JSON (file or `-` for stdin).
    Decode(DecodeArgs),
    /// Monte Carlo failure rates over a (d, p) grid, written as CSV.
    Simulate(SimulateArgs),
    /// Finite-size-scaling thresholds per distance bin and failure mode.
    Fit(FitArgs),
    /// SVG of failure rate against p, one line per distance.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
struct CodeArgs {
    #[arg(long, env = "BIASQEC_FAMILY")]
    family: CodeFamily,
    #[arg(long, env = "BIASQEC_D")]
    d: usize,
}

#[derive(Debug, Args)]
struct ExactArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[arg(long, env = "BIASQEC_ETA")]
    eta: Bias,
}

#[derive(Debug, Args)]
struct HashingArgs {
    #[arg(long, env = "BIASQEC_ETA")]
    eta: Bias,
}

#[derive(Debug, Args)]
struct DecodeArgs {
    /// JSON with `family`, `d`, `eta`, `p`, `syndrome` and an optional `decoder`.
    #[arg(long, env = "BIASQEC_INPUT", default_value = "-")]
    input: PathBuf,
    /// Overrides the input's decoder with an MPS of this bond dimension.
    #[arg(long, env = "BIASQEC_CHI")]
    chi: Option<usize>,
    #[arg(long, env = "BIASQEC_CUTOFF", requires = "chi")]
    cutoff: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum DecoderKind {
    Exact,
    Mps,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Replay a manifest written by an earlier run; grid flags are then ignored.
    #[arg(long, env = "BIASQEC_MANIFEST", conflicts_with_all = ["family", "d", "eta", "p", "p_min"])]
    manifest: Option<PathBuf>,
    #[arg(long, env = "BIASQEC_FAMILY", required_unless_present = "manifest")]
    family: Option<CodeFamily>,
    /// Comma-separated odd distances.
    #[arg(long, env = "BIASQEC_D", value_delimiter = ',', required_unless_present = "manifest")]
    d: Vec<usize>,
    #[arg(long, env = "BIASQEC_ETA", required_unless_present = "manifest")]
    eta: Option<Bias>,
    /// Comma-separated error rates; alternative to the `--p-min/--p-max/--dp` grid.
    #[arg(long, env = "BIASQEC_P", value_delimiter = ',', conflicts_with_all = ["p_min", "p_max"])]
    p: Vec<f64>,
    #[arg(long, env = "BIASQEC_P_MIN", requires = "p_max")]
    p_min: Option<f64>,
    #[arg(long, env = "BIASQEC_P_MAX", requires = "p_min")]
    p_max: Option<f64>,
    #[arg(long, env = "BIASQEC_DP", default_value_t = 0.005)]
    dp: f64,
    #[arg(long, env = "BIASQEC_DECODER", value_enum, default_value_t = DecoderKind::Mps)]
    decoder: DecoderKind,
    /// Bond dimension; defaults to 16 below eta = 30 and 8 above.
    #[arg(long, env = "BIASQEC_CHI")]
    chi: Option<usize>,
    #[arg(long, env = "BIASQEC_CUTOFF")]
    cutoff: Option<f64>,
    #[arg(long, env = "BIASQEC_SAMPLES", default_value_t = 10_000)]
    samples: u64,
    #[arg(long, env = "BIASQEC_SEED", default_value_t = 0)]
    seed: u64,
    /// Thread count; never changes results. Defaults to the available cores.
    #[arg(long, env = "BIASQEC_WORKERS")]
    workers: Option<usize>,
    #[arg(long, env = "BIASQEC_OUT")]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct FitArgs {
    /// Experiment CSV written by `simulate`.
    #[arg(long, env = "BIASQEC_INPUT")]
    input: PathBuf,
    /// Distances of one bin, comma-separated; repeat for more bins. Defaults to
    /// every run of three consecutive distances in the data.
    #[arg(long, env = "BIASQEC_BINS", value_delimiter = ';')]
    bins: Vec<String>,
    #[arg(long, env = "BIASQEC_MODES", value_delimiter = ',', default_value = "P_fX,P_fZ,P_fY,P_f")]
    modes: Vec<FailureMode>,
    /// Report the spread of p_c over this many bootstrap refits as sigma_pc.
    #[arg(long, env = "BIASQEC_BOOTSTRAP", num_args = 0..=1, default_missing_value = "200")]
    bootstrap: Option<usize>,
    #[arg(long, env = "BIASQEC_P_MIN")]
    p_min: Option<f64>,
    #[arg(long, env = "BIASQEC_P_MAX")]
    p_max: Option<f64>,
    #[arg(long, env = "BIASQEC_SEED", default_value_t = 0)]
    seed: u64,
    /// Output CSV; stdout when absent.
    #[arg(long, env = "BIASQEC_OUT")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct PlotArgs {
    #[arg(long, env = "BIASQEC_INPUT")]
    input: PathBuf,
    #[arg(long, env = "BIASQEC_MODE", default_value = "P_f")]
    mode: FailureMode,
    /// Keep only rows of this family when the CSV mixes several.
    #[arg(long, env = "BIASQEC_FAMILY")]
    family: Option<CodeFamily>,
    /// Keep only rows with this bias when the CSV mixes several.
    #[arg(long, env = "BIASQEC_ETA")]
    eta: Option<Bias>,
    #[arg(long, env = "BIASQEC_OUT")]
    out: PathBuf,
}

/// A failure reported as one JSON line on stderr.
#[derive(Debug)]
pub struct CliError {
    kind: &'static str,
    message: String,
}

impl CliError {
    pub fn new(kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }

    fn exit_code(&self) -> u8 {
        if self.kind == "usage" {
            2
        } else {
            1
        }
    }
}

impl From<biasqec::Error> for CliError {
    fn from(e: biasqec::Error) -> Self {
        use biasqec::Error as E;
        let kind = match &e {
            E::LengthMismatch { .. } => "length-mismatch",
            E::InvalidDistance { .. } => "invalid-distance",
            E::UnsupportedFamily { .. } => "unsupported-family",
            E::InvalidSite { .. } => "invalid-site",
            E::OutOfRange(_) => "out-of-range",
            E::EnumerationBound { .. } => "enumeration-bound",
            E::Degenerate(_) => "degenerate",
            E::Parse(_) => "parse",
            E::Fit(_) => "fit",
            E::Io(_) => "io",
            E::Csv(_) => "csv",
            E::Json(_) => "json",
        };
        Self::new(kind, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::new("io", e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::new("json", e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn report(err: &CliError) {
    let line = serde_json::json!({ "error": err.kind, "message": err.message });
    eprintln!("{line}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            let err = CliError::new("usage", first.trim_start_matches("error: "));
            report(&err);
            return ExitCode::from(err.exit_code());
        }
    };
    let result = match cli.command {
        Command::Validate(a) => commands::validate(&a),
        Command::Exact(a) => commands::exact(&a),
        Command::Hashing(a) => commands::hashing(&a),
        Command::Decode(a) => commands::decode(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Fit(a) => commands::fit(&a),
        Command::Plot(a) => plot::plot(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            report(&err);
            ExitCode::from(err.exit_code())
        }
    }
}
