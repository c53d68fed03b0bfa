//! Command-line front end: argument parsing, dispatch, and JSON reports.

pub mod commands;
pub mod output;
pub mod verify;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dyadic_core::chains::ChainKind;
use serde::Serialize;

pub use output::{Envelope, Header};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "DYADIC_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "dyadic", version, about = "Dyadic tilings: counts, chains, spectral gaps, coupling and mixing")]
pub struct Cli {
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file; defaults to a file in $DYADIC_OUT_DIR, else stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    pub out_dir: Option<PathBuf>,
    /// Single-line JSON instead of pretty-printed.
    #[arg(long, global = true)]
    pub compact: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact counts, fractions and subset sizes.
    Count(CountArgs),
    /// Dump Ω_k, the boundary set or the Υ_k family as JSON lines.
    Enumerate(EnumerateArgs),
    /// Spectral gap, recursion check and lower-bound check.
    Gap(GapArgs),
    /// Distance curves, mixing times, sandwich and scaling reports.
    Mix(MixArgs),
    /// Exact coupling contraction survey.
    Couple(CoupleArgs),
    /// Simulate a trajectory.
    Sample(SampleArgs),
    /// Run every acceptance check.
    VerifyAll(VerifyArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Count(_) => "count",
            Command::Enumerate(_) => "enumerate",
            Command::Gap(_) => "gap",
            Command::Mix(_) => "mix",
            Command::Couple(_) => "couple",
            Command::Sample(_) => "sample",
            Command::VerifyAll(_) => "verify-all",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainArg {
    Edge,
    Block,
}

impl From<ChainArg> for ChainKind {
    fn from(c: ChainArg) -> Self {
        match c {
            ChainArg::Edge => ChainKind::Edge,
            ChainArg::Block => ChainKind::Block,
        }
    }
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct CountArgs {
    #[arg(long)]
    pub k: u32,
    /// Upper limit on k for the recurrence table.
    #[arg(long, default_value_t = dyadic_core::combinatorics::DEFAULT_K_CAP)]
    pub cap: u32,
    /// Also count by streaming over Ω_{k-1} pairs (k <= 5).
    #[arg(long)]
    pub streaming: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SetArg {
    All,
    Boundary,
    Upsilon,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct EnumerateArgs {
    #[arg(long)]
    pub k: u32,
    #[arg(long, value_enum, default_value_t = SetArg::All)]
    pub set: SetArg,
    /// Compute the flip-graph diameter.
    #[arg(long)]
    pub diameter: bool,
    /// Write the flip graph as `i j multiplicity` lines.
    #[arg(long)]
    #[serde(skip)]
    pub edges: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub residual_tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_iterations: usize,
}

impl SolverArgs {
    pub fn options(&self) -> dyadic_core::spectral::SolverOptions {
        dyadic_core::spectral::SolverOptions {
            tol: self.tol,
            window: 100,
            max_iterations: self.max_iterations,
            residual_tol: self.residual_tol,
        }
    }
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct GapArgs {
    #[arg(long)]
    pub k: u32,
    #[arg(long, value_enum, default_value_t = ChainArg::Edge)]
    pub chain: ChainArg,
    /// Check γ_k ≥ γ_{k,block}·γ_{k−1} (3 <= k <= 4).
    #[arg(long)]
    pub recursion: bool,
    /// Compare γ_k with the vertical-bisector Rayleigh quotient.
    #[arg(long)]
    pub lower_bound: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Write the transition matrix as `i j p/q` lines.
    #[arg(long)]
    #[serde(skip)]
    pub matrix: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StartsArg {
    All,
    Surrogate,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct MixArgs {
    #[arg(long)]
    pub k: u32,
    #[arg(long, value_enum, default_value_t = ChainArg::Edge)]
    pub chain: ChainArg,
    #[arg(long, default_value_t = 0.25)]
    pub epsilon: f64,
    /// Start of the distance curve (canonical encoding); default: vertical strips.
    #[arg(long)]
    pub start: Option<String>,
    #[arg(long, default_value_t = 200)]
    pub t_max: u64,
    /// Compute the mixing time over this start set.
    #[arg(long, value_enum)]
    pub mixing_time: Option<StartsArg>,
    #[arg(long, default_value_t = 100)]
    pub random_starts: usize,
    /// Relaxation/mixing sandwich (edge chain, k <= 3).
    #[arg(long)]
    pub sandwich: bool,
    /// Relaxation-time scaling for k = 1..=K.
    #[arg(long)]
    pub scaling: Option<u32>,
    /// Monte-Carlo samples for the statistic distance at --statistic-t.
    #[arg(long)]
    pub statistic_samples: Option<u64>,
    #[arg(long, default_value_t = 100)]
    pub statistic_t: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Write the curve as CSV.
    #[arg(long)]
    #[serde(skip)]
    pub csv: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct CoupleArgs {
    #[arg(long)]
    pub k: u32,
    #[arg(long, default_value_t = dyadic_core::coupling::DEFAULT_B)]
    pub b: u64,
    /// Survey all pairs (k <= 3).
    #[arg(long, conflicts_with = "samples")]
    pub exhaustive: bool,
    /// Number of sampled pairs (k = 4).
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticArg {
    VerticalBisector,
    HorizontalBisector,
    BothBisectors,
    HalfBisectorCount,
}

impl From<StatisticArg> for dyadic_core::chains::Statistic {
    fn from(s: StatisticArg) -> Self {
        use dyadic_core::chains::Statistic as S;
        match s {
            StatisticArg::VerticalBisector => S::VerticalBisector,
            StatisticArg::HorizontalBisector => S::HorizontalBisector,
            StatisticArg::BothBisectors => S::BothBisectors,
            StatisticArg::HalfBisectorCount => S::HalfBisectorCount,
        }
    }
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub k: u32,
    #[arg(long, value_enum, default_value_t = ChainArg::Edge)]
    pub chain: ChainArg,
    #[arg(long)]
    pub steps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Start tiling (canonical encoding); default: vertical strips.
    #[arg(long)]
    pub start: Option<String>,
    #[arg(long, value_enum, default_value_t = StatisticArg::VerticalBisector)]
    pub statistic: StatisticArg,
    /// Record the statistic every this many steps.
    #[arg(long, default_value_t = 1)]
    pub every: u64,
    #[arg(long)]
    #[serde(skip)]
    pub csv: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct VerifyArgs {
    /// Seed for the randomized checks.
    #[arg(long, default_value_t = verify::DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] dyadic_core::Error),
    #[error("check failed: {0}")]
    Assertion(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for usage errors, 1 for guard violations and failed checks.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(dyadic_core::Error::InvalidArgument(_)) => 2,
            CliError::Core(dyadic_core::Error::Tiling(_)) => 2,
            _ => 1,
        }
    }
}

/// Parses arguments and runs, returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("dyadic: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let threads = cli.threads.unwrap_or(0);
    if cli.threads == Some(0) {
        return Err(CliError::Usage("--threads must be positive".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    pool.install(|| commands::dispatch(cli))
}
