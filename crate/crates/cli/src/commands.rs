use std::path::Path;

use anyhow::{Context, Result};
use chrono::Days;
use serde::Serialize;

use sentimarket::evaluation::{
    backtest, generate_synthetic, tail_range, write_plot_csv, BacktestOptions, ModelSpec,
    SyntheticScenario,
};
use sentimarket::forecast::{feature_rows, fit, ArimaOrder, ModelKind, TrainedModel};
use sentimarket::marketdata::{denoise, fill_calendar, DenoiseOptions, PriceSeries};
use sentimarket::sentiment::{aggregate, score_text, Bucket, Lexicon, SentimentSeries};
use sentimarket::text::{format_timestamp, parse_timestamp, read_tweets, write_tweets, KeywordSet};

use crate::args::{
    AggregateArgs, BacktestArgs, BucketArg, DenoiseArgs, FillArgs, FilterArgs, IngestArgs,
    ModelArg, NetArg, PredictArgs, ScoreArgs, SynthArgs, TrainArgs,
};
use crate::output::{usage, Run};

const SLSTM_NEEDS_SENTIMENT: &str = "s-lstm requires --sentiment";

fn json_bytes(value: &impl Serialize) -> Result<Vec<u8>> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text.into_bytes())
}

fn load_prices(run: &mut Run, path: &Path) -> Result<PriceSeries> {
    let bytes = run.read(path)?;
    PriceSeries::read_csv(bytes.as_slice()).with_context(|| format!("reading {}", path.display()))
}

/// Reads a sentiment file and turns it into the centered daily series the
/// forecasters consume.
fn load_daily_sentiment(run: &mut Run, path: &Path) -> Result<SentimentSeries> {
    let bytes = run.read(path)?;
    let raw = SentimentSeries::read_csv(bytes.as_slice())
        .with_context(|| format!("reading {}", path.display()))?;
    let daily = match raw.bucket {
        Bucket::Day => raw,
        Bucket::HalfHour => raw.daily()?,
    };
    Ok(daily.center()?)
}

pub fn filter(run: &mut Run, args: &FilterArgs) -> Result<()> {
    let custom = (args.keywords != "default").then(|| Path::new(&args.keywords));
    let mut inputs = vec![args.input.as_path()];
    inputs.extend(custom);
    run.validate_paths(&inputs, &[&args.out])?;
    run.set_config(args, None)?;

    let keywords = match custom {
        None => KeywordSet::default(),
        Some(p) => KeywordSet::parse(&run.read_string(p)?)
            .with_context(|| format!("reading {}", p.display()))?,
    };
    let bytes = run.read(&args.input)?;
    let tweets = read_tweets(bytes.as_slice(), &keywords)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let total = tweets.len();
    let kept: Vec<_> = tweets
        .into_iter()
        .filter(|t| t.passes(&keywords, args.mode.into()))
        .collect();
    let mut out = Vec::new();
    write_tweets(&mut out, &kept)?;
    run.write(&args.out, &out)?;
    eprintln!("kept {} of {total} tweets", kept.len());
    Ok(())
}

pub fn score(run: &mut Run, args: &ScoreArgs) -> Result<()> {
    let custom = (args.lexicon != "builtin").then(|| Path::new(&args.lexicon));
    let mut inputs = vec![args.input.as_path()];
    inputs.extend(custom);
    run.validate_paths(&inputs, &[&args.out])?;
    run.set_config(args, None)?;

    let lexicon = match custom {
        None => Lexicon::builtin(),
        Some(p) => Lexicon::parse(&run.read_string(p)?)
            .with_context(|| format!("reading {}", p.display()))?,
    };
    let bytes = run.read(&args.input)?;
    let tweets = read_tweets(bytes.as_slice(), &KeywordSet::default())
        .with_context(|| format!("reading {}", args.input.display()))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["timestamp", "score", "text"])?;
    for t in &tweets {
        w.write_record([
            format_timestamp(&t.timestamp),
            score_text(&t.text, &lexicon).to_string(),
            t.text.clone(),
        ])?;
    }
    run.write(&args.out, &w.into_inner()?)?;
    eprintln!("scored {} tweets", tweets.len());
    Ok(())
}

pub fn aggregate_cmd(run: &mut Run, args: &AggregateArgs) -> Result<()> {
    run.validate_paths(&[&args.input], &[&args.out])?;
    run.set_config(args, None)?;

    let bytes = run.read(&args.input)?;
    let mut rdr = csv::Reader::from_reader(bytes.as_slice());
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .with_context(|| format!("{} has no `{name}` column", args.input.display()))
    };
    let (ts_col, score_col) = (col("timestamp")?, col("score")?);
    let mut scored = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let t = parse_timestamp(&row[ts_col])
            .with_context(|| format!("line {line}: bad timestamp {:?}", &row[ts_col]))?;
        let s: f64 = row[score_col]
            .trim()
            .parse()
            .with_context(|| format!("line {line}: bad score {:?}", &row[score_col]))?;
        scored.push((t, s));
    }
    let half_hourly = aggregate(&scored, Bucket::HalfHour)?;
    let series = match args.bucket {
        BucketArg::HalfHour => half_hourly,
        BucketArg::Day => half_hourly.daily()?,
    };
    let mut out = Vec::new();
    series.write_csv(&mut out)?;
    run.write(&args.out, &out)?;
    Ok(())
}

pub fn ingest(run: &mut Run, args: &IngestArgs) -> Result<()> {
    run.validate_paths(&[&args.input], &[&args.out])?;
    run.set_config(args, None)?;
    let series = load_prices(run, &args.input)?;
    let mut out = Vec::new();
    series.write_csv(&mut out)?;
    run.write(&args.out, &out)?;
    eprintln!(
        "{} trading days, {} to {}",
        series.len(),
        series.date.first().map(ToString::to_string).unwrap_or_default(),
        series.date.last().map(ToString::to_string).unwrap_or_default()
    );
    Ok(())
}

pub fn fill(run: &mut Run, args: &FillArgs) -> Result<()> {
    run.validate_paths(&[&args.input], &[&args.out])?;
    run.set_config(args, None)?;
    let mut series = load_prices(run, &args.input)?;
    if args.denoise_first {
        let (clean, report) = denoise(
            &series,
            DenoiseOptions {
                levels: args.levels,
                ..Default::default()
            },
        )?;
        eprintln!("denoised trading days: SNR {:.3} dB, RMSE {:.6}", report.snr_db, report.rmse);
        series = clean;
    }
    let filled = fill_calendar(&series)?;
    let mut out = Vec::new();
    filled.write_csv(&mut out)?;
    run.write(&args.out, &out)?;
    eprintln!("{} calendar days ({} filled)", filled.len(), filled.len() - series.len());
    Ok(())
}

pub fn denoise_cmd(run: &mut Run, args: &DenoiseArgs) -> Result<()> {
    let mut outputs = vec![args.out.as_path()];
    outputs.extend(args.report.as_deref());
    run.validate_paths(&[&args.input], &outputs)?;
    run.set_config(args, None)?;
    let series = load_prices(run, &args.input)?;
    let (clean, report) = denoise(
        &series,
        DenoiseOptions {
            levels: args.levels,
            zero_threshold: args.zero_threshold,
        },
    )?;
    let mut out = Vec::new();
    clean.write_csv(&mut out)?;
    run.write(&args.out, &out)?;
    let report_json = json_bytes(&report)?;
    match &args.report {
        Some(path) => run.write(path, &report_json)?,
        None => print!("{}", String::from_utf8(report_json)?),
    }
    Ok(())
}

pub fn train(run: &mut Run, args: &TrainArgs) -> Result<()> {
    if args.model == NetArg::SLstm && args.sentiment.is_none() {
        return Err(usage(SLSTM_NEEDS_SENTIMENT));
    }
    if args.model == NetArg::Lstm && args.sentiment.is_some() {
        return Err(usage("lstm is price-only; drop --sentiment or use --model s-lstm"));
    }
    let mut inputs = vec![args.prices.as_path()];
    inputs.extend(args.sentiment.as_deref());
    run.validate_paths(&inputs, &[&args.out])?;
    let config = args.train.config();
    config.validate().map_err(|e| usage(e.to_string()))?;
    run.set_config(args, Some(config.seed))?;

    let mut prices = load_prices(run, &args.prices)?;
    if let Some(until) = args.until {
        prices = prices.before(until);
    }
    let sentiment = match &args.sentiment {
        Some(p) => Some(load_daily_sentiment(run, p)?),
        None => None,
    };
    let model = fit(&prices, sentiment.as_ref(), &config)?;
    run.write(&args.out, model.to_json()?.as_bytes())?;
    eprintln!(
        "trained {} on {} days: final train loss {:.6}",
        model.kind.name(),
        prices.len(),
        model.train_loss.last().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}

#[derive(Serialize)]
struct Forecast {
    model: &'static str,
    last_date: String,
    last_close: f64,
    date: String,
    predicted_close: f64,
}

pub fn predict(run: &mut Run, args: &PredictArgs) -> Result<()> {
    let mut inputs = vec![args.model.as_path(), args.prices.as_path()];
    inputs.extend(args.sentiment.as_deref());
    let outputs: Vec<&Path> = args.out.as_deref().into_iter().collect();
    run.validate_paths(&inputs, &outputs)?;
    run.set_config(args, None)?;

    let text = run.read_string(&args.model)?;
    let model = TrainedModel::from_json(&text)
        .with_context(|| format!("reading {}", args.model.display()))?;
    if model.kind == ModelKind::SLstm && args.sentiment.is_none() {
        return Err(usage(SLSTM_NEEDS_SENTIMENT));
    }
    let prices = load_prices(run, &args.prices)?;
    let sentiment = match (&args.sentiment, model.kind) {
        (Some(p), ModelKind::SLstm) => Some(load_daily_sentiment(run, p)?),
        _ => None,
    };
    let rows = feature_rows(&prices, sentiment.as_ref())?;
    let predicted_close = model.predict(&rows)?;
    let last = prices.len() - 1;
    let forecast = Forecast {
        model: model.kind.name(),
        last_date: prices.date[last].to_string(),
        last_close: prices.close[last],
        date: (prices.date[last] + Days::new(1)).to_string(),
        predicted_close,
    };
    let bytes = json_bytes(&forecast)?;
    match &args.out {
        Some(path) => run.write(path, &bytes)?,
        None => print!("{}", String::from_utf8(bytes)?),
    }
    Ok(())
}

pub fn backtest_cmd(run: &mut Run, args: &BacktestArgs) -> Result<()> {
    let needs_sentiment = args.model.contains(&ModelArg::SLstm);
    if needs_sentiment && args.sentiment.is_none() {
        return Err(usage(SLSTM_NEEDS_SENTIMENT));
    }
    if args.rows_csv.is_some() && args.model.len() != 1 {
        return Err(usage("--rows-csv takes exactly one --model"));
    }
    if args.last.is_none() && args.start.is_none() {
        return Err(usage("give the test range with --start/--end or --last"));
    }
    let mut inputs = vec![args.prices.as_path()];
    inputs.extend(args.sentiment.as_deref());
    let mut outputs = vec![args.out.as_path()];
    outputs.extend(args.rows_csv.as_deref());
    outputs.extend(args.plot_csv.as_deref());
    run.validate_paths(&inputs, &outputs)?;
    let config = args.train.config();
    config.validate().map_err(|e| usage(e.to_string()))?;
    run.set_config(args, Some(config.seed))?;

    let prices = load_prices(run, &args.prices)?;
    let sentiment = match &args.sentiment {
        Some(p) => Some(load_daily_sentiment(run, p)?),
        None => None,
    };
    let (start, end) = match (args.last, args.start, args.end) {
        (Some(n), _, _) => tail_range(&prices, n)?,
        (None, Some(s), Some(e)) => (s, e),
        _ => unreachable!("clap enforces --start with --end"),
    };
    let opts = BacktestOptions {
        start,
        end,
        refit_every: args.refit_every,
    };
    let mut reports = Vec::with_capacity(args.model.len());
    for m in &args.model {
        let spec = match m {
            ModelArg::Lstm => ModelSpec::Lstm(config.clone()),
            ModelArg::SLstm => ModelSpec::SLstm(config.clone()),
            ModelArg::Arima => ModelSpec::Arima(ArimaOrder {
                p: args.arima_p,
                d: args.arima_d,
                q: 0,
            }),
            ModelArg::Persistence => ModelSpec::Persistence,
        };
        let report = backtest(&spec, &prices, sentiment.as_ref(), opts)
            .with_context(|| format!("backtesting {}", spec.name()))?;
        eprintln!(
            "{:<12} direction accuracy {:.3}  f1(up) {:.3}  relative accuracy {:.4}",
            report.model, report.direction_accuracy, report.f1_up, report.relative_accuracy
        );
        reports.push(report);
    }
    run.write(&args.out, &json_bytes(&reports)?)?;
    if let Some(path) = &args.rows_csv {
        let mut out = Vec::new();
        reports[0].write_rows_csv(&mut out)?;
        run.write(path, &out)?;
    }
    if let Some(path) = &args.plot_csv {
        let mut out = Vec::new();
        write_plot_csv(&mut out, &reports)?;
        run.write(path, &out)?;
    }
    Ok(())
}

pub fn synth(run: &mut Run, args: &SynthArgs) -> Result<()> {
    run.validate_paths(&[], &[&args.out_prices, &args.out_sentiment])?;
    if args.out_prices == args.out_sentiment {
        return Err(usage("--out-prices and --out-sentiment must differ"));
    }
    run.set_config(args, Some(args.seed))?;
    let scenario = SyntheticScenario {
        start: args.start,
        ..SyntheticScenario::new(args.length, args.noise, args.coupling, args.seed)
    };
    let (prices, sentiment) = generate_synthetic(&scenario).map_err(|e| usage(e.to_string()))?;
    let mut out = Vec::new();
    prices.write_csv(&mut out)?;
    run.write(&args.out_prices, &out)?;
    let mut out = Vec::new();
    sentiment.write_csv(&mut out)?;
    run.write(&args.out_sentiment, &out)?;
    Ok(())
}
