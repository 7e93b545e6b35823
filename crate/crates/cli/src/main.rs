//! `playsleuth`: command line front end for the detection pipeline.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use playsleuth::features::Task;
use playsleuth::learn::LearnerKind;

/// Bad input or arguments; exits with status 1.
#[derive(Debug)]
pub struct Invalid(pub String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

#[derive(Parser)]
#[command(
    name = "playsleuth",
    version,
    about = "Search rank fraud and malware detection for app markets"
)]
struct Cli {
    /// Master seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for per-app work (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Serialize)]
pub struct Input {
    /// Ingestion manifest naming the record files.
    #[arg(long)]
    pub manifest: PathBuf,
}

#[derive(Args, Serialize)]
pub struct Out {
    /// Directory for the outputs and the provenance record.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct Finder {
    /// Weighted density threshold.
    #[arg(long, default_value_t = 3.0)]
    pub theta: f64,
    #[arg(long, default_value_t = 3)]
    pub min_size: usize,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RampArg {
    Count,
    Set,
}

#[derive(Args, Serialize)]
#[group(required = true, multiple = false)]
pub struct ReviewSource {
    /// Trained review filter deciding which reviews are fraudulent.
    #[arg(long)]
    pub filter: Option<PathBuf>,
    /// Use the gold review labels instead of a trained filter.
    #[arg(long)]
    pub gold_review_labels: bool,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Validate record files and write a canonical copy with a report.
    Ingest {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        out: Out,
    },
    /// Generate a synthetic market with planted campaigns.
    Generate {
        /// Generator config; defaults apply to missing fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        out: Out,
    },
    /// Dump the co-review graph of one app.
    Graph {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        app: String,
        #[command(flatten)]
        out: Out,
    },
    /// Mine pseudo cliques.
    Pcf {
        #[command(flatten)]
        input: Input,
        /// Apps to mine; all apps when omitted.
        #[arg(long)]
        app: Vec<String>,
        #[command(flatten)]
        finder: Finder,
        #[command(flatten)]
        out: Out,
    },
    /// Assemble the per-app feature matrix.
    Features {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        reviews: ReviewSource,
        #[command(flatten)]
        finder: Finder,
        #[arg(long, value_enum, default_value_t = RampArg::Count)]
        ramp_mode: RampArg,
        #[command(flatten)]
        out: Out,
    },
    /// Train the fraudulent review filter on labeled reviews.
    TrainReviewFilter {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "mlp")]
        learner: LearnerKind,
        /// Laplace smoothing of the sentence sentiment model.
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Also cross-validate the filter with this many folds.
        #[arg(long)]
        k: Option<usize>,
        #[command(flatten)]
        out: Out,
    },
    /// Train an app classifier on a feature matrix.
    TrainApp {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        task: Task,
        #[arg(long, default_value = "rf")]
        learner: LearnerKind,
        #[command(flatten)]
        out: Out,
    },
    /// Stratified k-fold cross-validation of app classifiers.
    Crossval {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        task: Task,
        /// One or more of dt, rf, mlp.
        #[arg(long, value_delimiter = ',', default_value = "rf")]
        learner: Vec<LearnerKind>,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[command(flatten)]
        out: Out,
    },
    /// Score apps with a trained model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[command(flatten)]
        out: Out,
    },
    /// Chi-square test of rating count against install count buckets.
    Chisq {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        out: Out,
    },
    /// Find apps whose genuine reviews report forced ratings or installs.
    CoerciveScan {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        reviews: ReviewSource,
        #[arg(long, default_value_t = playsleuth::review::coercive::DEFAULT_MIN_HITS)]
        min_hits: usize,
        #[command(flatten)]
        out: Out,
    },
    /// Per-category share of flagged apps from a predict run.
    Report {
        #[arg(long)]
        predictions: PathBuf,
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        out: Out,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Invalid>().is_some() || err.downcast_ref::<playsleuth::Error>().is_some() {
        1
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let run = std::panic::catch_unwind(|| commands::run(&cli.command, cli.seed));
    match run {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
        Err(_) => ExitCode::from(2),
    }
}
