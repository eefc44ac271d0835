//! `rqi-lab`: enumerate populations of reduced quadratic irrationals, compute spectral
//! constants, and run the acceptance suite.

mod commands;
mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use config::{ConfigError, CostName, FileConfig, Format};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_USAGE: u8 = 1;
const EXIT_COMPUTATION: u8 = 2;
const EXIT_ACCEPTANCE: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "rqi-lab", version, about = "Gaussian costs on reduced quadratic irrationals")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Directory for report files; reports go to stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// JSON file with default values for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate P_N and summarize costs over it.
    Enumerate(EnumerateArgs),
    /// Gaussian constants of a cost from the transfer operator.
    Constants(ConstantsArgs),
    /// Hausdorff dimensions of bounded-digit sets.
    Dimension(DimensionArgs),
    /// Trace identities, Dirichlet partial sums and matrix traces.
    Traces(TracesArgs),
    /// Empirical statistics against spectral predictions.
    Study(StudyArgs),
    /// Run the acceptance suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CostArgs {
    #[arg(long, value_enum)]
    pub cost: Option<CostName>,
    /// Digit of the chi cost; also the chi column of audit files.
    #[arg(long)]
    pub digit: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct SpectralArgs {
    /// Collocation order D.
    #[arg(long)]
    pub order: Option<usize>,
    /// Last digit summed directly.
    #[arg(long)]
    pub digit_truncation: Option<u64>,
    #[arg(long)]
    pub tail_order: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct EnumerateArgs {
    #[arg(long)]
    pub n: Option<f64>,
    #[command(flatten)]
    pub cost: CostArgs,
    #[arg(long)]
    pub digit_cap: Option<u64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub w_grid: Option<Vec<f64>>,
    /// Also write one CSV row per number.
    #[arg(long)]
    pub audit: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ConstantsArgs {
    #[command(flatten)]
    pub cost: CostArgs,
    #[command(flatten)]
    pub spectral: SpectralArgs,
    #[arg(long)]
    pub digit_cap: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct DimensionArgs {
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<u64>>,
    #[arg(long)]
    pub order: Option<usize>,
    /// Also compare π(N, M) with N^{2(σ_M − 1)} for these bounds.
    #[arg(long, value_delimiter = ',')]
    pub threshold_n: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct TracesArgs {
    #[command(flatten)]
    pub cost: CostArgs,
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub s: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub w: Option<Vec<f64>>,
    /// Digit-product cutoff of the word sums.
    #[arg(long)]
    pub cutoff: Option<u64>,
    /// Size cutoff of the Dirichlet partial sums.
    #[arg(long)]
    pub n: Option<f64>,
    #[arg(long)]
    pub order: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct StudyArgs {
    #[command(flatten)]
    pub cost: CostArgs,
    #[arg(long, value_delimiter = ',')]
    pub n_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub w_grid: Option<Vec<f64>>,
    #[arg(long)]
    pub order: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Small scale: N ≤ 10³, D = 32, a subset of the criteria.
    #[arg(long)]
    pub quick: bool,
    /// Write the machine-readable report here.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

/// How a run ended.
pub enum Outcome {
    Done,
    AcceptanceFailed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::AcceptanceFailed) => ExitCode::from(EXIT_ACCEPTANCE),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::from(EXIT_COMPUTATION)
            }
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let file = match &cli.config {
        Some(p) => config::load(p)?,
        None => FileConfig::default(),
    };
    let threads = cli.threads.or(file.threads).unwrap_or_else(|| {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    });
    if threads == 0 {
        return Err(ConfigError::new("$.threads", "must be at least 1").into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| anyhow::anyhow!("thread pool: {e}"))?;
    let sink = output::Sink {
        out: cli.out.clone().or_else(|| file.out.clone().map(PathBuf::from)),
        format: cli.format.or(file.format).unwrap_or(Format::Json),
        threads,
    };
    commands::dispatch(cli.command, &file, &sink)
}
