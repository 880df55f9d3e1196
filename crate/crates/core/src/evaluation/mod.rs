//! Forecast metrics, walk-forward backtests and synthetic scenarios.

mod metrics;

use chrono::{DateTime, Days, NaiveDate, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

pub use metrics::{
    direction_metrics, relative_error_accuracy, write_plot_csv, DirectionMetrics,
    EvaluationReport, ForecastRow,
};

use crate::error::{Error, Result};
use crate::forecast::{
    arima_fit_forecast, feature_rows, fit, persistence_forecast, ArimaOrder, TrainConfig,
    TrainedModel,
};
use crate::marketdata::{Bar, PriceSeries};
use crate::sentiment::{Bucket, SentimentSeries};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ModelSpec {
    Lstm(TrainConfig),
    SLstm(TrainConfig),
    Arima(ArimaOrder),
    Persistence,
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Lstm(_) => "lstm",
            ModelSpec::SLstm(_) => "s-lstm",
            ModelSpec::Arima(_) => "arima",
            ModelSpec::Persistence => "persistence",
        }
    }
}

/// Inclusive test interval and refit cadence. `refit_every = None` fits
/// once on everything before `start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BacktestOptions {
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub refit_every: Option<usize>,
}

/// The last `days` dates of `prices` as an inclusive range.
pub fn tail_range(prices: &PriceSeries, days: usize) -> Result<(NaiveDate, NaiveDate)> {
    if days == 0 || days > prices.len() {
        return Err(Error::EmptyTestRange);
    }
    Ok((prices.date[prices.len() - days], prices.date[prices.len() - 1]))
}

/// Walk-forward evaluation: every test day is forecast from its trailing
/// window, by a model that has only seen dates strictly before the day it
/// was (re)fitted on.
pub fn backtest(
    spec: &ModelSpec,
    prices: &PriceSeries,
    sentiment: Option<&SentimentSeries>,
    opts: BacktestOptions,
) -> Result<EvaluationReport> {
    if opts.start > opts.end {
        return Err(Error::EmptyTestRange);
    }
    prices.ensure_contiguous()?;
    let (Some(first), Some(last)) = (prices.date.first(), prices.date.last()) else {
        return Err(Error::EmptySeries);
    };
    if opts.start <= *first || opts.end > *last {
        return Err(Error::TestRange(format!(
            "{}..={} must lie after {first} and not beyond {last}",
            opts.start, opts.end
        )));
    }
    if opts.refit_every == Some(0) {
        return Err(Error::InvalidConfig("refit interval must be positive".into()));
    }
    let s_idx = prices.index_of(opts.start).expect("contiguous range");
    let e_idx = prices.index_of(opts.end).expect("contiguous range");

    let model_sentiment = match spec {
        ModelSpec::SLstm(_) => Some(sentiment.ok_or_else(|| {
            Error::InvalidConfig("s-lstm requires a sentiment series".into())
        })?),
        _ => None,
    };

    let mut rows = Vec::with_capacity(e_idx - s_idx + 1);
    let mut model: Option<TrainedModel> = None;
    let features = match spec {
        ModelSpec::Lstm(_) | ModelSpec::SLstm(_) => Some(feature_rows(prices, model_sentiment)?),
        _ => None,
    };
    for (k, idx) in (s_idx..=e_idx).enumerate() {
        let predicted = match spec {
            ModelSpec::Persistence => persistence_forecast(&prices.close[..idx])?,
            ModelSpec::Arima(order) => arima_fit_forecast(&prices.close[..idx], *order)?.forecast,
            ModelSpec::Lstm(cfg) | ModelSpec::SLstm(cfg) => {
                let refit = match opts.refit_every {
                    None => model.is_none(),
                    Some(every) => k % every == 0,
                };
                if refit {
                    model = Some(fit(&prices.slice(0, idx), model_sentiment, cfg)?);
                }
                let m = model.as_ref().expect("fitted above");
                m.predict_at(features.as_ref().expect("lstm features"), idx)?
            }
        };
        rows.push(ForecastRow {
            date: prices.date[idx],
            truth: prices.close[idx],
            predicted,
            previous_close: prices.close[idx - 1],
        });
    }
    let mut report = EvaluationReport::from_rows(spec.name(), rows)?;
    report.positive_sentiment_fraction = sentiment.map(SentimentSeries::positive_fraction);
    Ok(report)
}

/// A price path whose next-day log-return is driven by today's sentiment:
/// `r[t+1] = coupling * s[t] + N(0, noise)`, `s[t] ~ U(-0.5, 0.5)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticScenario {
    pub length: usize,
    pub noise: f64,
    pub coupling: f64,
    pub seed: u64,
    pub start: NaiveDate,
}

pub const MIN_SCENARIO_LENGTH: usize = 60;
pub const SYNTHETIC_START_PRICE: f64 = 100.0;
const SYNTHETIC_VOLUME: f64 = 1.0e6;

impl SyntheticScenario {
    pub fn new(length: usize, noise: f64, coupling: f64, seed: u64) -> Self {
        SyntheticScenario {
            length,
            noise,
            coupling,
            seed,
            start: NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(),
        }
    }
}

/// Generates the scenario's daily prices and raw (uncentered) sentiment.
pub fn generate_synthetic(sc: &SyntheticScenario) -> Result<(PriceSeries, SentimentSeries)> {
    if sc.length < MIN_SCENARIO_LENGTH {
        return Err(Error::InvalidConfig(format!(
            "scenario length must be at least {MIN_SCENARIO_LENGTH}"
        )));
    }
    if !(sc.noise.is_finite() && sc.noise >= 0.0) || !sc.coupling.is_finite() {
        return Err(Error::InvalidConfig(
            "noise must be finite and non-negative, coupling finite".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
    let sentiment: Vec<f64> = (0..sc.length).map(|_| rng.random_range(-0.5..0.5)).collect();
    let eps = Normal::new(0.0, sc.noise).map_err(|e| Error::InvalidConfig(e.to_string()))?;

    let mut prices = PriceSeries::empty();
    let mut close = SYNTHETIC_START_PRICE;
    let mut open = SYNTHETIC_START_PRICE;
    for t in 0..sc.length {
        if t > 0 {
            let r = sc.coupling * sentiment[t - 1] + eps.sample(&mut rng);
            open = close;
            close *= r.exp();
        }
        let date = sc.start + Days::new(t as u64);
        prices.push(
            Bar {
                date,
                open,
                high: open.max(close),
                low: open.min(close),
                close,
                volume: SYNTHETIC_VOLUME,
            },
            crate::marketdata::Provenance::Observed,
        );
    }
    let series = SentimentSeries {
        bucket: Bucket::Day,
        bucket_start: prices
            .date
            .iter()
            .map(|d| DateTime::<Utc>::from_naive_utc_and_offset(d.and_hms_opt(0, 0, 0).unwrap(), Utc))
            .collect(),
        score: sentiment,
        count: vec![1; sc.length],
        centered: false,
        mean_before_centering: 0.0,
    };
    Ok((prices, series))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_drivers_give_constant_prices() {
        let (p, s) = generate_synthetic(&SyntheticScenario::new(80, 0.0, 0.0, 1)).unwrap();
        assert!(p.close.iter().all(|c| *c == SYNTHETIC_START_PRICE));
        assert_eq!(s.len(), 80);
        assert!(s.score.iter().all(|v| (-0.5..0.5).contains(v)));
    }

    #[test]
    fn noiseless_coupling_sets_direction() {
        let (p, s) = generate_synthetic(&SyntheticScenario::new(100, 0.0, 0.05, 2)).unwrap();
        for t in 0..99 {
            let dp = p.close[t + 1] - p.close[t];
            assert_eq!(dp.signum(), s.score[t].signum(), "day {t}");
        }
    }

    #[test]
    fn seeded_reproducibility_and_validation() {
        let sc = SyntheticScenario::new(70, 0.01, 0.05, 9);
        assert_eq!(generate_synthetic(&sc).unwrap(), generate_synthetic(&sc).unwrap());
        let other = SyntheticScenario { seed: 10, ..sc.clone() };
        assert_ne!(generate_synthetic(&other).unwrap().0, generate_synthetic(&sc).unwrap().0);
        assert!(generate_synthetic(&SyntheticScenario::new(59, 0.0, 0.0, 1)).is_err());
        assert!(generate_synthetic(&SyntheticScenario::new(60, -1.0, 0.0, 1)).is_err());
    }

    #[test]
    fn persistence_accuracy_is_share_of_down_days() {
        let (p, _) = generate_synthetic(&SyntheticScenario::new(120, 0.01, 0.0, 4)).unwrap();
        let (start, end) = tail_range(&p, 40).unwrap();
        let opts = BacktestOptions {
            start,
            end,
            refit_every: None,
        };
        let rep = backtest(&ModelSpec::Persistence, &p, None, opts).unwrap();
        // recount directly from the closes
        let n0 = p.len() - 40;
        let down = (n0..p.len()).filter(|&i| p.close[i] <= p.close[i - 1]).count();
        assert!((rep.direction_accuracy - down as f64 / 40.0).abs() < 1e-15);
        assert_eq!(rep.rows.len(), 40);
        assert_eq!(rep, backtest(&ModelSpec::Persistence, &p, None, opts).unwrap());
    }

    #[test]
    fn range_errors() {
        let (p, s) = generate_synthetic(&SyntheticScenario::new(80, 0.01, 0.0, 4)).unwrap();
        let d = |k: u64| p.date[0] + Days::new(k);
        let run = |start, end| {
            backtest(
                &ModelSpec::Persistence,
                &p,
                None,
                BacktestOptions {
                    start,
                    end,
                    refit_every: None,
                },
            )
        };
        assert!(matches!(run(d(50), d(40)), Err(Error::EmptyTestRange)));
        assert!(matches!(run(p.date[0] - Days::new(5), d(10)), Err(Error::TestRange(_))));
        assert!(matches!(run(d(70), d(90)), Err(Error::TestRange(_))));
        let slstm = backtest(
            &ModelSpec::SLstm(TrainConfig::default()),
            &p,
            None,
            BacktestOptions {
                start: d(60),
                end: d(70),
                refit_every: None,
            },
        );
        assert!(matches!(slstm, Err(Error::InvalidConfig(_))));
        drop(s);
    }

    #[test]
    fn arima_backtest_runs() {
        let (p, _) = generate_synthetic(&SyntheticScenario::new(120, 0.01, 0.0, 6)).unwrap();
        let (start, end) = tail_range(&p, 20).unwrap();
        let rep = backtest(
            &ModelSpec::Arima(ArimaOrder::default()),
            &p,
            None,
            BacktestOptions {
                start,
                end,
                refit_every: None,
            },
        )
        .unwrap();
        assert_eq!(rep.model, "arima");
        assert!(rep.relative_accuracy > 0.9);
    }

    #[test]
    fn refit_schedule_uses_only_past_data() {
        let (p, s) = generate_synthetic(&SyntheticScenario::new(90, 0.01, 0.05, 8)).unwrap();
        let s = s.center().unwrap();
        let cfg = TrainConfig {
            epochs: 5,
            hidden_size: 3,
            ..TrainConfig::default()
        };
        let (start, end) = tail_range(&p, 6).unwrap();
        let opts = BacktestOptions {
            start,
            end,
            refit_every: Some(3),
        };
        let rep = backtest(&ModelSpec::SLstm(cfg.clone()), &p, Some(&s), opts).unwrap();
        // the first prediction must match a model fitted on the pre-range prefix
        let idx = p.index_of(start).unwrap();
        let m = fit(&p.slice(0, idx), Some(&s), &cfg).unwrap();
        let rows = feature_rows(&p, Some(&s)).unwrap();
        assert_eq!(rep.rows[0].predicted, m.predict_at(&rows, idx).unwrap());
        assert!(rep.positive_sentiment_fraction.is_some());
    }
}
