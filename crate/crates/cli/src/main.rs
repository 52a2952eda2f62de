//! `passivity`: command-line front end. Every command prints a JSON report on
//! standard output; realizations go to the file named by `-o`.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "passivity", version, about = "Passivity certificates and transforms for state-space realizations")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Absolute PSD tolerance for certificates (default scales with ‖Q‖).
    #[arg(long, global = true)]
    pub tol_psd: Option<f64>,
    /// Tolerance of the sampling oracles.
    #[arg(long, global = true, default_value_t = passivity_core::families::TOL_ORACLE)]
    pub tol_oracle: f64,
    /// Seed for grids and random isometries.
    #[arg(long, global = true, env = "PASSIVITY_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Omit the timestamp so identical runs give identical reports.
    #[arg(long, global = true)]
    pub deterministic: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Certify membership of a family (KYP certificate plus sampling oracle).
    Check(CheckArgs),
    /// Apply a transform and write the resulting realization.
    Transform(TransformArgs),
    /// Matrix-convex combination of certified realizations.
    Combine(CombineArgs),
    /// Evaluate the transfer function at a point.
    Eval(EvalArgs),
    /// Print the weight matrix of a family.
    Wmat(WmatArgs),
    /// Write one of the built-in fixtures.
    Fixtures(FixturesArgs),
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// p, b, dp or db.
    #[arg(long)]
    pub family: String,
    /// Hyper-boundedness parameter (beta only).
    #[arg(long)]
    pub eta: Option<f64>,
    /// Also require losslessness (p or b only).
    #[arg(long)]
    pub lossless: bool,
    /// Candidate P to verify instead of searching.
    #[arg(long, conflicts_with = "solve")]
    pub p_matrix: Option<PathBuf>,
    /// Search for P (the default when no P is given).
    #[arg(long)]
    pub solve: bool,
    /// Boundary and interior sample counts.
    #[arg(long, default_value_t = passivity_core::families::DEFAULT_BOUNDARY_POINTS)]
    pub grid: usize,
    #[arg(long, default_value_t = 5000)]
    pub max_iter: usize,
    pub file: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    CayleyFn,
    Bilinear,
    InvertArray,
    InvertFn,
    Balance,
    Coords,
}

#[derive(Args, Debug)]
pub struct TransformArgs {
    #[arg(long, value_enum)]
    pub op: Op,
    #[arg(long)]
    pub t_matrix: Option<PathBuf>,
    #[arg(long)]
    pub p_matrix: Option<PathBuf>,
    /// Family of the certificate used by `balance`.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub eta: Option<f64>,
    pub file: PathBuf,
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CombineArgs {
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub eta: Option<f64>,
    /// Comma-separated realization files.
    #[arg(long, value_delimiter = ',', required = true)]
    pub inputs: Vec<PathBuf>,
    /// JSON `{"state": [...], "io": [...]}` with one block per input.
    #[arg(long, conflicts_with = "random", required_unless_present = "random")]
    pub isometries: Option<PathBuf>,
    /// Draw k random isometry tiers from the seed.
    #[arg(long)]
    pub random: Option<usize>,
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Point as "re,im".
    #[arg(long, allow_hyphen_values = true)]
    pub at: String,
    pub file: PathBuf,
}

#[derive(Args, Debug)]
pub struct WmatArgs {
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub eta: Option<f64>,
    /// Use P = I.
    #[arg(long)]
    pub balanced: bool,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    #[arg(long, conflicts_with = "balanced")]
    pub p_matrix: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FixturesArgs {
    /// f, g, F1, F2 or F3.
    #[arg(long)]
    pub name: String,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub b: f64,
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            // help and version are not errors
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let report = commands::run(&cli, argv[1..].to_vec());
    print!("{}", report.to_json());
    ExitCode::from(report.exit_code.clamp(0, 255) as u8)
}
