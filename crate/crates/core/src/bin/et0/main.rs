//! `et0` — reference evapotranspiration toolkit and benchmark runner.
//!
//! Exit codes: 0 success, 2 usage or file-schema errors, 3 data invariant
//! violations, 4 training failure across all folds.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "et0",
    version,
    about = "FAO-56 ET0 calculator and neural-network benchmark harness",
    disable_help_subcommand = true
)]
struct Cli {
    /// Worker threads for cross-validation and grid runs
    /// (default: ET0_LAB_JOBS or all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute daily ET0 from a weather CSV.
    Compute(ComputeArgs),
    /// Generate synthetic daily weather for a built-in station profile.
    Synth(SynthArgs),
    /// Train a single network on PM-labelled weather data.
    Train(TrainArgs),
    /// Cross-validate a single network architecture.
    Cv(CvArgs),
    /// Run the full model grid across stations.
    Grid(GridArgs),
    /// Rank an aggregate results file.
    Report(ReportArgs),
    /// Convert saved predictions to a scatter TSV.
    Scatter(ScatterArgs),
}

#[derive(Args)]
struct PmFlags {
    /// Psychrometric constant mode.
    #[arg(long, value_parser = ["fixed", "altitude"], default_value = "altitude")]
    gamma: String,
    /// Soil heat flux density G, MJ m-2 day-1.
    #[arg(long, default_value_t = 0.0)]
    g: f64,
    /// Reference surface albedo.
    #[arg(long, default_value_t = 0.23)]
    albedo: f64,
    /// Radiation input: `solar` derives net radiation from measured
    /// shortwave, `net` uses the rs column as net radiation directly.
    #[arg(long, value_parser = ["solar", "net"], default_value = "solar")]
    radiation: String,
}

#[derive(Args)]
struct ComputeArgs {
    /// Input weather CSV (date,tmax,tmin,rs,rhmax,rhmin,u2).
    #[arg(long)]
    input: PathBuf,
    /// Station metadata TOML (name, code, longitude, latitude, altitude).
    #[arg(long)]
    station: PathBuf,
    /// Output CSV (date,et0_mm_day).
    #[arg(long)]
    output: PathBuf,
    /// Quality-flag sidecar path (default: <output>.flags.csv).
    #[arg(long)]
    flags_output: Option<PathBuf>,
    /// Abort on the first invalid row instead of skipping it.
    #[arg(long)]
    strict: bool,
    #[command(flatten)]
    pm: PmFlags,
}

#[derive(Args)]
struct SynthArgs {
    /// Built-in profile: adana, aksaray, isparta, or nigde.
    #[arg(long)]
    profile: String,
    /// Number of days to generate.
    #[arg(long)]
    days: usize,
    /// Generator seed.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output weather CSV.
    #[arg(long)]
    output: PathBuf,
    /// Also write the station metadata TOML here.
    #[arg(long)]
    station_output: Option<PathBuf>,
}

#[derive(Args)]
struct NetFlags {
    /// Hidden layer widths, comma-separated (e.g. 60,90,60).
    #[arg(long)]
    hidden: String,
    /// Hidden activation: sigmoid, relu, selu, or linear.
    #[arg(long, default_value = "sigmoid")]
    activation: String,
    /// Dropout rate per hidden layer, comma-separated (default: all 0).
    #[arg(long)]
    dropout: Option<String>,
}

#[derive(Args)]
struct HyperFlags {
    #[arg(long, default_value_t = 500)]
    epochs: usize,
    #[arg(long, default_value_t = 32)]
    batch_size: usize,
    #[arg(long, default_value_t = 1e-3)]
    learning_rate: f64,
    /// Optimizer: adam or sgd.
    #[arg(long, value_parser = ["adam", "sgd"], default_value = "adam")]
    optimizer: String,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    station: PathBuf,
    /// Output model file (JSON).
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[command(flatten)]
    net: NetFlags,
    #[command(flatten)]
    hyper: HyperFlags,
    #[command(flatten)]
    pm: PmFlags,
}

#[derive(Args)]
struct CvArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    station: PathBuf,
    /// Directory for result files and the manifest.
    #[arg(long)]
    output_dir: PathBuf,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    /// Fold assignment: random (seeded) or chronological blocks.
    #[arg(long, value_parser = ["random", "chronological"], default_value = "random")]
    fold_mode: String,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Save held-out predictions for scatter plots.
    #[arg(long)]
    save_predictions: bool,
    #[command(flatten)]
    net: NetFlags,
    #[command(flatten)]
    hyper: HyperFlags,
    #[command(flatten)]
    pm: PmFlags,
}

#[derive(Args)]
struct GridArgs {
    /// Grid config TOML (families, ann_width_range, dnn_dropout_rates,
    /// hyperparams, seed). Defaults to the full benchmark grid.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Real station dataset as NAME=WEATHER.csv:STATION.toml (repeatable).
    #[arg(long = "data", value_name = "NAME=CSV:CFG")]
    data: Vec<String>,
    /// Use synthetic data for the four built-in station profiles instead.
    #[arg(long)]
    synthetic: bool,
    /// Days of synthetic data per station.
    #[arg(long, default_value_t = 1460)]
    days: usize,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Restrict to these families (comma-separated).
    #[arg(long)]
    families: Option<String>,
    /// Collapse the dropout grid to the no-dropout variant of each base.
    #[arg(long)]
    no_dropout_grid: bool,
    /// Override config epochs.
    #[arg(long)]
    epochs: Option<usize>,
    /// Print spec/run counts and exit without training or writing files.
    #[arg(long)]
    dry_run: bool,
    #[arg(long)]
    save_predictions: bool,
    #[command(flatten)]
    pm: PmFlags,
}

#[derive(Args)]
struct ReportArgs {
    /// Aggregate results CSV from a cv or grid run.
    #[arg(long)]
    results: PathBuf,
    /// Ranking metric: r2, rmse, mae, or mae_paper_literal.
    #[arg(long, default_value = "r2")]
    by: String,
    #[arg(long, default_value_t = 20)]
    top: usize,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct ScatterArgs {
    /// predictions.csv from a run with --save-predictions.
    #[arg(long)]
    predictions: PathBuf,
    /// Output TSV.
    #[arg(long)]
    output: PathBuf,
    /// Keep only this station.
    #[arg(long)]
    station: Option<String>,
    /// Keep only this model id.
    #[arg(long)]
    model: Option<String>,
}

/// Process-level error with its exit code.
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }

    fn data(message: impl Into<String>) -> Self {
        CliError { code: 3, message: message.into() }
    }

    fn training(message: impl Into<String>) -> Self {
        CliError { code: 4, message: message.into() }
    }

    fn other(message: impl Into<String>) -> Self {
        CliError { code: 1, message: message.into() }
    }
}

impl From<et0lab::meteo::MeteoError> for CliError {
    fn from(e: et0lab::meteo::MeteoError) -> Self {
        use et0lab::meteo::MeteoError::*;
        match e {
            MissingColumn(_) | UnparsableValue { .. } | Csv(_) | Config(_) => {
                CliError::usage(e.to_string())
            }
            HardInvariantViolation { .. } | InvalidProfile(_) | InvalidStation(_) => {
                CliError::data(e.to_string())
            }
            Io(_) => CliError::other(e.to_string()),
        }
    }
}

impl From<et0lab::pm::PmError> for CliError {
    fn from(e: et0lab::pm::PmError) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<et0lab::nn::NnError> for CliError {
    fn from(e: et0lab::nn::NnError) -> Self {
        use et0lab::nn::NnError::*;
        match e {
            InvalidSpec(_) | InvalidHyperparams(_) | InvalidRate(_) => {
                CliError::usage(e.to_string())
            }
            DivergedLoss { .. } => CliError::training(e.to_string()),
            other => CliError::other(other.to_string()),
        }
    }
}

impl From<et0lab::experiment::ExperimentError> for CliError {
    fn from(e: et0lab::experiment::ExperimentError) -> Self {
        use et0lab::experiment::ExperimentError::*;
        match e {
            InvalidGridConfig(_) | BadResultsFile(_) => CliError::usage(e.to_string()),
            TooFewRecords { .. } | TooFewFolds(_) | PlanMismatch { .. } => {
                CliError::data(e.to_string())
            }
            AllFoldsFailed { .. } => CliError::training(e.to_string()),
            Pm(inner) => inner.into(),
            Nn(inner) => inner.into(),
            Io(inner) => CliError::other(inner.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::other(e.to_string())
    }
}

fn configure_jobs(jobs: Option<usize>) {
    let jobs = jobs.or_else(|| {
        std::env::var("ET0_LAB_JOBS").ok().and_then(|v| v.parse().ok())
    });
    if let Some(n) = jobs {
        if n >= 1 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_jobs(cli.jobs);
    let result = match cli.command {
        Command::Compute(args) => commands::compute(args),
        Command::Synth(args) => commands::synth(args),
        Command::Train(args) => commands::train(args),
        Command::Cv(args) => commands::cv(args),
        Command::Grid(args) => commands::grid(args),
        Command::Report(args) => commands::report(args),
        Command::Scatter(args) => commands::scatter(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
