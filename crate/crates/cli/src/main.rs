//! `igann`: data preparation, training, feature selection, benchmarking and
//! shape export for sparse boosted-ELM additive models.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use igann_sparse::elm::Activation;
use igann_sparse::eval::ModelKind;
use igann_sparse::Task;
use serde::Serialize;

use config::{file_section, resolve, Method, UsageError};

#[derive(Debug, Parser)]
#[command(name = "igann", version, about = "Sparse additive models from boosted extreme learning machines")]
struct Cli {
    /// TOML file with one table per subcommand; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Encode and standardize a CSV file into a prepared dataset artifact.
    Prep(PrepArgs),
    /// Fit a full or sparse model on a prepared dataset.
    Train(TrainArgs),
    /// Report the features chosen by the sparse model or the lasso.
    Select(SelectArgs),
    /// Repeated k-fold comparison over every dataset of a registry.
    Benchmark(BenchmarkArgs),
    /// Cross-validated metric against a forced number of selected features.
    Sweep(SweepArgs),
    /// Export the shape functions of a trained model as CSV files.
    Shapes(ShapesArgs),
}

#[derive(Debug, Args, Serialize)]
struct PrepArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Name of the target column.
    #[arg(long)]
    target: Option<String>,
    /// regression or classification.
    #[arg(long)]
    task: Option<Task>,
    /// Columns to drop (comma separated; `*` wildcards allowed).
    #[arg(long, value_delimiter = ',')]
    id_columns: Option<Vec<String>>,
    /// Columns to treat as categorical even if numeric.
    #[arg(long, value_delimiter = ',')]
    categorical: Option<Vec<String>>,
    /// Categorical columns with more distinct values are dropped.
    #[arg(long)]
    max_levels: Option<usize>,
    /// Output artifact (JSON).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Boosting hyperparameters.
#[derive(Debug, Args, Serialize)]
struct IgannFlags {
    /// Hidden units per feature.
    #[arg(long)]
    k: Option<usize>,
    /// Boosting rounds.
    #[arg(long)]
    rounds: Option<usize>,
    /// Learning rate in (0, 1].
    #[arg(long)]
    lr: Option<f64>,
    /// Ridge penalty of every read-out.
    #[arg(long)]
    lambda: Option<f64>,
    /// Largest support searched by the sparsity layer.
    #[arg(long)]
    smax: Option<usize>,
    /// Early-stopping patience in rounds (0 disables).
    #[arg(long)]
    patience: Option<usize>,
    /// Share of training rows held out for early stopping.
    #[arg(long)]
    val_fraction: Option<f64>,
    /// elu, tanh, relu or sigmoid.
    #[arg(long)]
    activation: Option<Activation>,
    /// BIC complexity: blocks or coefficients.
    #[arg(long)]
    complexity: Option<String>,
}

#[derive(Debug, Args, Serialize)]
struct TrainArgs {
    /// Prepared dataset artifact.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Run the sparsity layer.
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    sparse: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Output model artifact (JSON).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    igann: IgannFlags,
}

#[derive(Debug, Args, Serialize)]
struct SelectArgs {
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: Option<Method>,
    #[arg(long)]
    seed: Option<u64>,
    /// Folds used to pick the lasso penalty.
    #[arg(long)]
    folds: Option<usize>,
    /// Number of lasso penalties searched.
    #[arg(long)]
    lasso_grid: Option<usize>,
    /// Output feature list (JSON).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    igann: IgannFlags,
}

#[derive(Debug, Args, Serialize)]
struct BenchmarkArgs {
    /// Dataset registry (TOML).
    #[arg(long)]
    registry: Option<PathBuf>,
    /// Comma separated subset of igann_full, igann_sparse, lasso.
    #[arg(long, value_delimiter = ',')]
    models: Option<Vec<ModelKind>>,
    /// Seeds 0..repeats, each a fresh fold split.
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    lasso_grid: Option<usize>,
    /// Count selected design columns or original features: columns or features.
    #[arg(long)]
    level: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    igann: IgannFlags,
}

#[derive(Debug, Args, Serialize)]
struct SweepArgs {
    #[arg(long)]
    data: Option<PathBuf>,
    /// Comma separated support sizes.
    #[arg(long, value_delimiter = ',')]
    counts: Option<Vec<usize>>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    repeats: Option<usize>,
    /// Output CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    igann: IgannFlags,
}

#[derive(Debug, Args, Serialize)]
struct ShapesArgs {
    /// Trained model artifact.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Grid points per shape function.
    #[arg(long)]
    grid: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = cli.config.as_deref();
    match &cli.command {
        Command::Prep(a) => commands::prep(resolve(a, file_section(cfg, "prep")?)?),
        Command::Train(a) => commands::train(resolve(a, file_section(cfg, "train")?)?),
        Command::Select(a) => commands::select(resolve(a, file_section(cfg, "select")?)?),
        Command::Benchmark(a) => commands::benchmark(resolve(a, file_section(cfg, "benchmark")?)?),
        Command::Sweep(a) => commands::sweep(resolve(a, file_section(cfg, "sweep")?)?),
        Command::Shapes(a) => commands::shapes(resolve(a, file_section(cfg, "shapes")?)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
