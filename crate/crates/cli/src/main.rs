//! `cdrsight`: CDR ingestion, anomaly detection and forecasting from the
//! command line. Every subcommand reads and writes plain CSV.

mod commands;
mod config;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cdrsight_core::ErrorClass;
use config::UsageError;

#[derive(Parser, Debug)]
#[command(name = "cdrsight", version, about = "Call-detail-record anomaly detection and forecasting")]
pub struct Cli {
    /// `key=value` run configuration; flags override it
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Base seed; each stage derives its own seed from it
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for commands that process several independent inputs
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Also write an SVG plot next to every CSV output
    #[arg(long, global = true)]
    pub svg: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse a raw dataset into canonical CSV
    Ingest(IngestArgs),
    /// Bucket canonical records into an activity series
    Series(SeriesArgs),
    /// Label anomalous buckets with k-means and the zero-activity rule
    Detect(DetectArgs),
    /// Replace anomalous buckets with the mean of the rest
    Scrub(ScrubArgs),
    /// Train the network on raw and scrubbed data and compare test errors
    NnCompare(NnArgs),
    /// Augmented Dickey-Fuller unit-root test
    Adf(AdfArgs),
    /// Simulate a Dickey-Fuller quantile table
    AdfTable(AdfTableArgs),
    /// ACF and PACF with an order suggestion
    Correlogram(CorrelogramArgs),
    /// Fit an ARIMA model and evaluate it on a hold-out split
    Fit(FitArgs),
    /// Forecast with a fitted or freshly estimated ARIMA model
    Forecast(ForecastArgs),
    /// Generate a synthetic CDR corpus with known anomalies
    Synth(SynthArgs),
}

/// How a series is obtained from an input file: series CSV as is, canonical
/// event or aggregated CSV by bucketing.
#[derive(Args, Debug, Clone, Default)]
pub struct SeriesOpts {
    /// Bucket width in seconds when bucketing records
    #[arg(long)]
    pub bucket_width: Option<i64>,
    /// event_count, total_duration_seconds or activity_sum
    #[arg(long)]
    pub metric: Option<String>,
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    /// crawdad, nodobo, telecom_italia or canonical
    #[arg(short, long)]
    pub format: Option<String>,
    /// Output CSV (standard output if omitted)
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub delimiter: Option<char>,
    /// Subscriber id for schemas without a user column
    #[arg(long)]
    pub user_id: Option<String>,
}

#[derive(Args, Debug)]
pub struct SeriesArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub series: SeriesOpts,
}

#[derive(Args, Debug)]
pub struct DetectArgs {
    /// Series, canonical event or aggregated CSV; repeat for several inputs
    #[arg(short, long, required = true)]
    pub input: Vec<PathBuf>,
    /// Report CSV for a single input (standard output if omitted)
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Directory for `<stem>.anomalies.csv` reports, required for several inputs
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Also save the bucketed series (single input)
    #[arg(long)]
    pub series_output: Option<PathBuf>,
    #[arg(short, long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Active hours `HH:MM-HH:MM` in which zero activity is anomalous
    #[arg(long)]
    pub zero_window: Option<String>,
    #[command(flatten)]
    pub series: SeriesOpts,
}

#[derive(Args, Debug)]
pub struct ScrubArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    /// Anomaly report from `detect`
    #[arg(short, long)]
    pub report: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// CSV listing every replaced bucket
    #[arg(long)]
    pub sidecar: Option<PathBuf>,
    #[command(flatten)]
    pub series: SeriesOpts,
}

#[derive(Args, Debug)]
pub struct NnArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    /// Anomaly report; detection runs with the derived seed if omitted
    #[arg(short, long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
    /// Learning curve CSV of the network trained on raw data
    #[arg(long)]
    pub raw_curve: Option<PathBuf>,
    /// Learning curve CSV of the network trained on scrubbed data
    #[arg(long)]
    pub clean_curve: Option<PathBuf>,
    #[arg(short, long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub zero_window: Option<String>,
    #[command(flatten)]
    pub series: SeriesOpts,
}

#[derive(Args, Debug)]
pub struct AdfArgs {
    #[arg(short, long, required = true)]
    pub input: Vec<PathBuf>,
    /// Augmentation lags (Schwert rule if omitted)
    #[arg(long)]
    pub lags: Option<usize>,
    /// Difference the series this many times first
    #[arg(long, default_value_t = 0)]
    pub diff: usize,
    /// Quantile table to use instead of the bundled one
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[command(flatten)]
    pub series: SeriesOpts,
}

#[derive(Args, Debug)]
pub struct AdfTableArgs {
    /// Comma-separated sample sizes
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long, default_value_t = 100_000)]
    pub replications: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CorrelogramArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(long)]
    pub max_lag: Option<usize>,
    #[arg(long)]
    pub diff: Option<usize>,
    /// ACF CSV (standard output if neither output is given)
    #[arg(long)]
    pub acf: Option<PathBuf>,
    #[arg(long)]
    pub pacf: Option<PathBuf>,
    #[command(flatten)]
    pub series: SeriesOpts,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    /// `p,d,q` or `auto`
    #[arg(long)]
    pub spec: Option<String>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
    /// Model JSON
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub series: SeriesOpts,
}

#[derive(Args, Debug)]
pub struct ForecastArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    /// Model JSON from `fit`; otherwise a model is estimated with `--spec`
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub spec: Option<String>,
    /// multi (fixed origin) or rolling (one step ahead)
    #[arg(long, default_value = "multi")]
    pub mode: String,
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Hold out the tail of the series; required for rolling mode
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub series: SeriesOpts,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// week or clean
    #[arg(long, default_value = "week")]
    pub profile: String,
    #[arg(long, default_value_t = 9)]
    pub days: usize,
    #[arg(long, default_value_t = 30)]
    pub users: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Ground-truth anomaly CSV
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

fn exit_class(err: &anyhow::Error) -> ErrorClass {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return ErrorClass::Usage;
        }
        if let Some(class) = cdrsight_core::classify(cause) {
            return class;
        }
    }
    ErrorClass::Data
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(ErrorClass::Usage.exit_code() as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_class(&e).exit_code() as u8)
        }
    }
}
