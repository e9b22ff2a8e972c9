use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

mod commands;
mod io;

#[derive(Parser)]
#[command(name = "diffkde", version, about = "Kernel and diffusion density estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Select a bandwidth and print the report as JSON.
    Bandwidth(BandwidthArgs),
    /// Estimate a density on a grid.
    Density(DensityArgs),
    /// Draw from a smoothed estimate.
    Sample(SampleArgs),
    /// Run registry cases and write per-trial CSV plus a JSON summary.
    Benchmark(BenchmarkArgs),
}

#[derive(Args, Clone)]
struct Common {
    /// Sample file, one value (or two for --dims 2) per line; `-` reads stdin.
    input: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Grid points per axis.
    #[arg(long)]
    grid: Option<usize>,
    /// Grid padding as a fraction of the data range.
    #[arg(long, default_value_t = diffkde::grid::DEFAULT_PAD)]
    pad: f64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    dims: u8,
    /// Known lower support bound (1D).
    #[arg(long, allow_negative_numbers = true)]
    lower: Option<f64>,
    /// Known upper support bound (1D).
    #[arg(long, allow_negative_numbers = true)]
    upper: Option<f64>,
}

#[derive(Args)]
struct BandwidthArgs {
    #[command(flatten)]
    common: Common,
    /// isj, sj or lscv.
    #[arg(long, default_value = "isj")]
    selector: String,
    /// Plug-in stages (1D) or chain order (2D).
    #[arg(long)]
    stages: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EstimatorKind {
    Gauss,
    Theta,
    Diffusion,
    Abramson,
    Sinc,
    Hallpark,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct DensityArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value_t = EstimatorKind::Gauss)]
    method: EstimatorKind,
    /// isj, sj, lscv or fixed:<t>; the default depends on the method.
    #[arg(long)]
    selector: Option<String>,
    /// Exponent in a = p^alpha for the diffusion estimator.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// 0/1 matrix of inside nodes for a 2D masked estimate.
    #[arg(long)]
    mask: Option<PathBuf>,
    /// 2D grid bounds `x_lo,x_hi,y_lo,y_hi`; taken from the data when omitted.
    #[arg(long, allow_hyphen_values = true)]
    bounds: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SamplerKind {
    Gauss,
    Theta,
    Diffusion,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value_t = SamplerKind::Diffusion)]
    method: SamplerKind,
    /// Number of draws.
    #[arg(long, allow_negative_numbers = true)]
    count: i64,
    /// isj, sj, lscv or fixed:<t>.
    #[arg(long, default_value = "isj")]
    selector: String,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Euler steps per draw.
    #[arg(long, default_value_t = 500)]
    steps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Case id or name, or `all`.
    #[arg(long = "case")]
    case_key: String,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Numerator method; the suite default when omitted.
    #[arg(long)]
    method_a: Option<String>,
    /// Denominator method; the suite default when omitted.
    #[arg(long)]
    method_b: Option<String>,
    /// Directory for `<case>.csv` and `<case>.json`.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

/// Failure classes with stable exit codes.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<diffkde::KdeError> for CliError {
    fn from(e: diffkde::KdeError) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bandwidth(a) => commands::bandwidth(&a),
        Command::Density(a) => commands::density(&a),
        Command::Sample(a) => commands::sample(&a),
        Command::Benchmark(a) => commands::benchmark(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
