//! Browser bindings: three self-contained operations that return JSON text,
//! driven by the static page in `www/`.
//!
//! Each `#[wasm_bindgen]` export is a thin wrapper around a plain Rust
//! function so the same logic is testable natively.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use wasm_bindgen::prelude::*;

use sentimarket::evaluation::{
    backtest, generate_synthetic, tail_range, BacktestOptions, ModelSpec, SyntheticScenario,
};
use sentimarket::forecast::{ArimaOrder, TrainConfig};
use sentimarket::marketdata::{denoise_values, rmse, snr_db, DenoiseOptions};
use sentimarket::sentiment::{explain_text, score_text, Contribution, Lexicon};
use sentimarket::text::{clean_text, match_keywords, split_cjk, KeywordGroup, KeywordSet};

pub const MAX_LENGTH: usize = 2000;
pub const MAX_EPOCHS: usize = 500;

#[derive(Debug, Serialize)]
pub struct KeywordHit {
    pub phrase: String,
    pub group: &'static str,
}

#[derive(Debug, Serialize)]
pub struct TweetAnalysis {
    pub cleaned: String,
    pub keywords: Vec<KeywordHit>,
    /// Whether the default (either-group) keyword filter keeps the tweet.
    pub kept_by_filter: bool,
    pub score: f64,
    pub contributions: Vec<Contribution>,
}

/// Cleans a tweet, matches the COVID keyword table and scores it with the
/// bundled lexicon.
pub fn analyze(raw: &str) -> TweetAnalysis {
    let keywords = KeywordSet::default();
    let lexicon = Lexicon::builtin();
    let cleaned = split_cjk(&clean_text(raw));
    let hits: Vec<KeywordHit> = match_keywords(&cleaned, &keywords)
        .into_iter()
        .map(|phrase| {
            let group = match keywords.group_of(&phrase) {
                Some(KeywordGroup::PanicBuying) => "panic-buying",
                _ => "epidemic",
            };
            KeywordHit { phrase, group }
        })
        .collect();
    TweetAnalysis {
        score: score_text(&cleaned, &lexicon),
        contributions: explain_text(&cleaned, &lexicon),
        kept_by_filter: !hits.is_empty(),
        keywords: hits,
        cleaned,
    }
}

#[derive(Debug, Serialize)]
pub struct DenoiseDemo {
    pub clean: Vec<f64>,
    pub noisy: Vec<f64>,
    pub denoised: Vec<f64>,
    pub threshold: f64,
    /// SNR of the reconstruction against its noisy input, in dB.
    pub snr_db: f64,
    pub rmse_noisy_vs_clean: f64,
    pub rmse_denoised_vs_clean: f64,
}

/// The smooth reference curve the denoising demo corrupts.
pub fn demo_signal(length: usize) -> Vec<f64> {
    use std::f64::consts::TAU;
    (0..length)
        .map(|t| {
            let t = t as f64;
            100.0 + 5.0 * (TAU * t / 64.0).sin() + 2.0 * (TAU * t / 23.0).sin() + 0.02 * t
        })
        .collect()
}

/// Adds seeded Gaussian noise to [`demo_signal`] and denoises it.
pub fn denoise_demo(length: usize, noise: f64, levels: usize, seed: u64) -> Result<DenoiseDemo, String> {
    if !(16..=MAX_LENGTH).contains(&length) {
        return Err(format!("length must lie in 16..={MAX_LENGTH}"));
    }
    if !(noise.is_finite() && noise >= 0.0) {
        return Err("noise must be finite and non-negative".into());
    }
    let dist = Normal::new(0.0, noise).map_err(|e| format!("noise: {e}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clean = demo_signal(length);
    let noisy: Vec<f64> = clean.iter().map(|c| c + dist.sample(&mut rng)).collect();
    let (denoised, threshold) = denoise_values(
        &noisy,
        DenoiseOptions {
            levels,
            ..Default::default()
        },
    )
    .map_err(|e| e.to_string())?;
    Ok(DenoiseDemo {
        snr_db: snr_db(&noisy, &denoised),
        rmse_noisy_vs_clean: rmse(&clean, &noisy),
        rmse_denoised_vs_clean: rmse(&clean, &denoised),
        threshold,
        clean,
        noisy,
        denoised,
    })
}

#[derive(Debug, Serialize)]
pub struct ModelSummary {
    pub name: &'static str,
    pub direction_accuracy: f64,
    pub f1_up: f64,
    pub relative_accuracy: f64,
    pub predicted: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct ModelComparison {
    pub dates: Vec<String>,
    pub truth: Vec<f64>,
    /// Closes before the test window, for context in plots.
    pub history: Vec<f64>,
    pub models: Vec<ModelSummary>,
}

/// Generates a synthetic market whose next-day return follows today's
/// sentiment and backtests all four models on its final fifth.
pub fn compare(
    coupling: f64,
    noise: f64,
    length: usize,
    seed: u64,
    epochs: usize,
) -> Result<ModelComparison, String> {
    if length > MAX_LENGTH {
        return Err(format!("length must be at most {MAX_LENGTH}"));
    }
    if !(1..=MAX_EPOCHS).contains(&epochs) {
        return Err(format!("epochs must lie in 1..={MAX_EPOCHS}"));
    }
    let scenario = SyntheticScenario::new(length, noise, coupling, seed);
    let (prices, raw) = generate_synthetic(&scenario).map_err(|e| e.to_string())?;
    let sentiment = raw.center().map_err(|e| e.to_string())?;
    let test_days = (length / 5).max(1);
    let (start, end) = tail_range(&prices, test_days).map_err(|e| e.to_string())?;
    let opts = BacktestOptions {
        start,
        end,
        refit_every: None,
    };
    let cfg = TrainConfig {
        epochs,
        seed,
        ..TrainConfig::default()
    };
    let specs = [
        ModelSpec::Lstm(cfg.clone()),
        ModelSpec::SLstm(cfg),
        ModelSpec::Arima(ArimaOrder::default()),
        ModelSpec::Persistence,
    ];
    let mut models = Vec::with_capacity(specs.len());
    let mut rows = Vec::new();
    for spec in &specs {
        let report = backtest(spec, &prices, Some(&sentiment), opts).map_err(|e| e.to_string())?;
        models.push(ModelSummary {
            name: spec.name(),
            direction_accuracy: report.direction_accuracy,
            f1_up: report.f1_up,
            relative_accuracy: report.relative_accuracy,
            predicted: report.rows.iter().map(|r| r.predicted).collect(),
        });
        rows = report.rows;
    }
    Ok(ModelComparison {
        dates: rows.iter().map(|r| r.date.to_string()).collect(),
        truth: rows.iter().map(|r| r.truth).collect(),
        history: prices.close[..prices.len() - test_days].to_vec(),
        models,
    })
}

fn to_json(value: &impl Serialize) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

/// JSON [`TweetAnalysis`] of one raw tweet.
#[wasm_bindgen]
pub fn analyze_tweet(text: &str) -> Result<String, String> {
    to_json(&analyze(text))
}

/// JSON [`DenoiseDemo`]; throws on invalid parameters.
#[wasm_bindgen]
pub fn denoise_signal(length: usize, noise: f64, levels: usize, seed: u32) -> Result<String, String> {
    to_json(&denoise_demo(length, noise, levels, seed.into())?)
}

/// JSON [`ModelComparison`]; throws on invalid parameters.
#[wasm_bindgen]
pub fn compare_models(
    coupling: f64,
    noise: f64,
    length: usize,
    seed: u32,
    epochs: usize,
) -> Result<String, String> {
    to_json(&compare(coupling, noise, length, seed.into(), epochs)?)
}
