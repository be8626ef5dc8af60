mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Random hyperboxes: train, apply and evaluate ensembles of fuzzy min-max
/// hyperbox classifiers.
#[derive(Parser, Debug)]
#[command(name = "rhbox", version)]
pub struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "RHBOX_THREADS", value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,

    /// Emit results as a single JSON document instead of sectioned text.
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Train an ensemble and write a model file plus manifest.
    Train(TrainArgs),
    /// Predict classes for every row of a CSV file.
    Predict(PredictArgs),
    /// Repeated stratified k-fold cross-validation.
    Evaluate(EvaluateArgs),
    /// Strength, correlation and error bound of a model on its training data.
    Bound(BoundArgs),
    /// Feature usage probabilities of a model.
    Importance(ImportanceArgs),
}

#[derive(Args, Debug)]
pub struct DataArgs {
    /// Input CSV file.
    #[arg(long)]
    pub data: PathBuf,

    /// Label column: zero-based index, header name, `last` or `none`.
    #[arg(long, default_value = "last")]
    pub label_col: String,

    /// The first row holds column names.
    #[arg(long)]
    pub header: bool,
}

#[derive(Args, Debug)]
pub struct ModelArgs {
    /// Maximum hyperbox size.
    #[arg(long, default_value_t = 0.1)]
    pub theta: f64,

    /// Membership sensitivity: one value, or one per feature separated by commas.
    #[arg(long, default_value = "1.0")]
    pub gamma: String,

    /// Number of base learners.
    #[arg(long, default_value_t = 100)]
    pub n_estimators: usize,

    /// Feature cap per learner: `2sqrt`, `all` or a positive integer.
    #[arg(long, default_value = "2sqrt")]
    pub max_features: String,

    /// Fraction of training rows each learner sees.
    #[arg(long, default_value_t = 0.5)]
    pub sample_rate: f64,

    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Model file to write; the manifest goes next to it with a `.manifest` suffix.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Label column to skip in the input, if present: index, header name, `last` or `none`.
    #[arg(long, default_value = "none")]
    pub label_col: String,
    #[arg(long)]
    pub header: bool,
    /// Also write the vote fraction of every class.
    #[arg(long)]
    pub proba: bool,
    /// Output CSV (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum NormModeArg {
    PerFold,
    Whole,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(2..))]
    pub folds: u64,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub repeats: u64,
    #[arg(long, value_enum, default_value = "per-fold")]
    pub norm_mode: NormModeArg,
    /// External fold assignments: one line per repeat, one fold id per row.
    #[arg(long)]
    pub fold_file: Option<PathBuf>,
    /// Attach strength, correlation and error bound per fold.
    #[arg(long)]
    pub bound: bool,
    /// Ensemble sizes to sweep: `a,b,c` or `start:end:step`.
    #[arg(long)]
    pub sweep_m: Option<String>,
    /// Feature caps to sweep: `a,b,c` or `start:end:step`.
    #[arg(long)]
    pub sweep_mf: Option<String>,
    /// Results file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ImportanceArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Keep only the K most used features.
    #[arg(long)]
    pub top: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Usage errors exit with 2, everything else with 1.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n as usize).build_global() {
            eprintln!("error: could not start {n} threads: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
