use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sentimarket::forecast::{TargetMode, TrainConfig};
use sentimarket::text::FilterMode;

/// COVID-era tweet sentiment and stock-price forecasting pipeline.
///
/// Every subcommand reads its inputs, writes its outputs atomically and
/// drops a `<output>.manifest.json` next to each output file with the
/// inputs, configuration, seed and SHA-256 digests needed to re-run it.
#[derive(Debug, Parser)]
#[command(name = "sentimarket", version, propagate_version = true)]
pub struct Cli {
    /// Directory that relative input and output paths are resolved against.
    #[arg(long, global = true, env = "SENTIMARKET_DATA_DIR", value_name = "DIR")]
    pub data_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clean tweets and keep the ones that mention a COVID keyword.
    Filter(FilterArgs),
    /// Attach a lexicon sentiment score in [-1, 1] to every tweet.
    Score(ScoreArgs),
    /// Bucket scored tweets into a sentiment time series.
    Aggregate(AggregateArgs),
    /// Validate and normalize a daily OHLC file.
    Ingest(IngestArgs),
    /// Fill non-trading calendar days by local cubic interpolation.
    Fill(FillArgs),
    /// Wavelet-denoise the close column and report SNR and RMSE.
    Denoise(DenoiseArgs),
    /// Train an LSTM (prices only) or S-LSTM (prices + sentiment).
    Train(TrainArgs),
    /// Forecast the close of the day after the last price row.
    Predict(PredictArgs),
    /// Walk-forward evaluation of one or more models over a date range.
    Backtest(BacktestArgs),
    /// Generate a synthetic price/sentiment pair with a known coupling.
    Synth(SynthArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Filter(_) => "filter",
            Command::Score(_) => "score",
            Command::Aggregate(_) => "aggregate",
            Command::Ingest(_) => "ingest",
            Command::Fill(_) => "fill",
            Command::Denoise(_) => "denoise",
            Command::Train(_) => "train",
            Command::Predict(_) => "predict",
            Command::Backtest(_) => "backtest",
            Command::Synth(_) => "synth",
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Either,
    Epidemic,
    PanicBuying,
}

impl From<ModeArg> for FilterMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Either => FilterMode::Either,
            ModeArg::Epidemic => FilterMode::Epidemic,
            ModeArg::PanicBuying => FilterMode::PanicBuying,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct FilterArgs {
    /// Tweet CSV with a `timestamp,text` header.
    #[arg(long = "in", value_name = "CSV")]
    pub input: PathBuf,
    /// `default` for the built-in keyword table, or a keyword file.
    #[arg(long, default_value = "default", value_name = "default|FILE")]
    pub keywords: String,
    /// Which keyword groups a tweet has to hit.
    #[arg(long, value_enum, default_value_t = ModeArg::Either)]
    pub mode: ModeArg,
    /// Filtered CSV: `timestamp,text,keywords`.
    #[arg(long, value_name = "CSV")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ScoreArgs {
    /// Tweet CSV with a `timestamp,text` header (typically `filter` output).
    #[arg(long = "in", value_name = "CSV")]
    pub input: PathBuf,
    /// `builtin` for the bundled lexicon, or a lexicon TSV.
    #[arg(long, default_value = "builtin", value_name = "builtin|FILE")]
    pub lexicon: String,
    /// Scored CSV: `timestamp,score,text`.
    #[arg(long, value_name = "CSV")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum BucketArg {
    /// Half-hour buckets.
    #[value(name = "30m", alias = "30min")]
    #[serde(rename = "30m")]
    HalfHour,
    /// Calendar days, the mean of the day's half-hour buckets.
    #[value(name = "1d", alias = "day")]
    #[serde(rename = "1d")]
    Day,
}

#[derive(Debug, Args, Serialize)]
pub struct AggregateArgs {
    /// Scored CSV with `timestamp` and `score` columns.
    #[arg(long = "in", value_name = "CSV")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = BucketArg::Day)]
    pub bucket: BucketArg,
    /// Sentiment series CSV: `bucket_start,score,count` (uncentered).
    #[arg(long, value_name = "CSV")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct IngestArgs {
    /// Raw OHLC CSV: `date,open,high,low,close,volume`.
    #[arg(long = "in", value_name = "CSV")]
    pub input: PathBuf,
    #[arg(long, value_name = "CSV")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct FillArgs {
    /// OHLC CSV with trading days only.
    #[arg(long = "in", value_name = "CSV")]
    pub input: PathBuf,
    /// Denoise the trading-day closes before filling the calendar gaps.
    #[arg(long)]
    pub denoise_first: bool,
    /// Decomposition depth used with `--denoise-first`.
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    #[arg(long, value_name = "CSV")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct DenoiseArgs {
    #[arg(long = "in", value_name = "CSV")]
    pub input: PathBuf,
    /// Wavelet decomposition depth.
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    /// Reconstruct without thresholding (identity check).
    #[arg(long)]
    pub zero_threshold: bool,
    #[arg(long, value_name = "CSV")]
    pub out: PathBuf,
    /// Where to write the JSON denoising report; stdout when omitted.
    #[arg(long, value_name = "JSON")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NetArg {
    Lstm,
    SLstm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetArg {
    /// Standardized close level.
    Close,
    /// Standardized daily log-return.
    LogReturn,
}

/// Optimizer and architecture knobs shared by `train` and `backtest`.
#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainFlags {
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    #[arg(long, default_value_t = 16)]
    pub hidden: usize,
    #[arg(long, default_value_t = 0.01)]
    pub learning_rate: f64,
    /// Seed for initialization and minibatch shuffling.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Global gradient-norm clipping threshold.
    #[arg(long, default_value_t = 1.0)]
    pub clip_norm: f64,
    /// Leading share of windows used for training; the rest validate.
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    /// Days of history per forecast.
    #[arg(long, default_value_t = 3)]
    pub window: usize,
    #[arg(long, value_enum, default_value_t = TargetArg::Close)]
    pub target: TargetArg,
}

impl TrainFlags {
    pub fn config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            hidden_size: self.hidden,
            learning_rate: self.learning_rate,
            seed: self.seed,
            clip_norm: self.clip_norm,
            train_fraction: self.train_fraction,
            batch_size: self.batch_size,
            window: self.window,
            target: match self.target {
                TargetArg::Close => TargetMode::Close,
                TargetArg::LogReturn => TargetMode::LogReturn,
            },
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long, value_enum)]
    pub model: NetArg,
    /// Contiguous daily OHLC CSV (run `fill` first).
    #[arg(long, value_name = "CSV")]
    pub prices: PathBuf,
    /// Sentiment series CSV; required for `s-lstm`.
    #[arg(long, value_name = "CSV")]
    pub sentiment: Option<PathBuf>,
    /// Train only on dates strictly before this day.
    #[arg(long, value_name = "YYYY-MM-DD")]
    pub until: Option<NaiveDate>,
    #[command(flatten)]
    pub train: TrainFlags,
    /// Serialized model (JSON).
    #[arg(long, value_name = "JSON")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct PredictArgs {
    /// Model written by `train`.
    #[arg(long, value_name = "JSON")]
    pub model: PathBuf,
    #[arg(long, value_name = "CSV")]
    pub prices: PathBuf,
    /// Sentiment series CSV; required for `s-lstm` models.
    #[arg(long, value_name = "CSV")]
    pub sentiment: Option<PathBuf>,
    /// Where to write the forecast; stdout when omitted.
    #[arg(long, value_name = "JSON")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelArg {
    Lstm,
    SLstm,
    Arima,
    Persistence,
}

#[derive(Debug, Args, Serialize)]
pub struct BacktestArgs {
    /// Models to evaluate; repeat the flag or separate with commas.
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    pub model: Vec<ModelArg>,
    #[arg(long, value_name = "CSV")]
    pub prices: PathBuf,
    /// Sentiment series CSV; required for `s-lstm`.
    #[arg(long, value_name = "CSV")]
    pub sentiment: Option<PathBuf>,
    /// First test day.
    #[arg(long, value_name = "YYYY-MM-DD", requires = "end", conflicts_with = "last")]
    pub start: Option<NaiveDate>,
    /// Last test day (inclusive).
    #[arg(long, value_name = "YYYY-MM-DD", requires = "start")]
    pub end: Option<NaiveDate>,
    /// Test on the final N days of the price file instead of --start/--end.
    #[arg(long, value_name = "N")]
    pub last: Option<usize>,
    /// Refit neural models every N test days; default fits once.
    #[arg(long, value_name = "N")]
    pub refit_every: Option<usize>,
    /// ARIMA autoregressive order.
    #[arg(long, default_value_t = 5)]
    pub arima_p: usize,
    /// ARIMA differencing order.
    #[arg(long, default_value_t = 1)]
    pub arima_d: usize,
    #[command(flatten)]
    pub train: TrainFlags,
    /// JSON array with one evaluation report per model.
    #[arg(long, value_name = "JSON")]
    pub out: PathBuf,
    /// Per-day rows `date,truth,predicted,previous_close` (single model only).
    #[arg(long, value_name = "CSV")]
    pub rows_csv: Option<PathBuf>,
    /// Side-by-side predictions `date,truth,pred_<model>...`.
    #[arg(long, value_name = "CSV")]
    pub plot_csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    /// Number of days, at least 60.
    #[arg(long, default_value_t = 400)]
    pub length: usize,
    /// Standard deviation of the daily log-return noise.
    #[arg(long, default_value_t = 0.01)]
    pub noise: f64,
    /// Next-day log-return per unit of sentiment.
    #[arg(long, default_value_t = 0.05)]
    pub coupling: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// First calendar day of the series.
    #[arg(long, default_value = "2020-01-01", value_name = "YYYY-MM-DD")]
    pub start: NaiveDate,
    /// Daily OHLC CSV.
    #[arg(long, value_name = "CSV")]
    pub out_prices: PathBuf,
    /// Daily sentiment series CSV (uncentered).
    #[arg(long, value_name = "CSV")]
    pub out_sentiment: PathBuf,
}
