use serde::{Serialize, Serializer};

use super::wavelet::{forward, inverse, Wavelet};
use super::{PriceSeries, Provenance};
use crate::error::{Error, Result};

/// Median absolute deviation to Gaussian sigma.
const MAD_SCALE: f64 = 0.6745;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenoiseOptions {
    pub levels: usize,
    /// Skip thresholding entirely (identity path).
    pub zero_threshold: bool,
}

impl Default for DenoiseOptions {
    fn default() -> Self {
        DenoiseOptions {
            levels: 3,
            zero_threshold: false,
        }
    }
}

fn ser_snr<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() && *v > 0.0 {
        s.serialize_str("+inf")
    } else {
        s.serialize_f64(*v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DenoiseReport {
    /// `+inf` when the output equals the input.
    #[serde(serialize_with = "ser_snr")]
    pub snr_db: f64,
    pub rmse: f64,
    pub levels: usize,
    pub wavelet_name: String,
    pub threshold_rule: String,
    pub threshold: f64,
}

/// Signal-to-noise ratio in decibels of an estimate `x_hat` against `x`:
/// `10 log10(sum x^2 / sum (x - x_hat)^2)`; `+inf` for an exact match.
pub fn snr_db(x: &[f64], x_hat: &[f64]) -> f64 {
    let signal: f64 = x.iter().map(|v| v * v).sum();
    let noise: f64 = x.iter().zip(x_hat).map(|(a, b)| (a - b) * (a - b)).sum();
    if noise == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (signal / noise).log10()
    }
}

pub fn rmse(x: &[f64], x_hat: &[f64]) -> f64 {
    let sq: f64 = x.iter().zip(x_hat).map(|(a, b)| (a - b) * (a - b)).sum();
    (sq / x.len() as f64).sqrt()
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn soft(c: f64, lambda: f64) -> f64 {
    c.signum() * (c.abs() - lambda).max(0.0)
}

/// Universal soft-threshold denoising of a plain signal. Returns the
/// reconstruction and the threshold that was applied.
pub fn denoise_values(values: &[f64], opts: DenoiseOptions) -> Result<(Vec<f64>, f64)> {
    let w = Wavelet::coif3();
    let mut pyramid = forward(&w, values, opts.levels)?;
    if opts.zero_threshold {
        return Ok((values.to_vec(), 0.0));
    }
    let mut finest: Vec<f64> = pyramid.finest().iter().map(|c| c.abs()).collect();
    let sigma = median(&mut finest) / MAD_SCALE;
    let lambda = sigma * (2.0 * (values.len() as f64).ln()).sqrt();
    for detail in &mut pyramid.details {
        detail.iter_mut().for_each(|c| *c = soft(*c, lambda));
    }
    Ok((inverse(&w, &pyramid)?, lambda))
}

/// Denoises the close column and marks every row as denoised.
pub fn denoise(series: &PriceSeries, opts: DenoiseOptions) -> Result<(PriceSeries, DenoiseReport)> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let (clean, lambda) = denoise_values(&series.close, opts)?;
    let report = DenoiseReport {
        snr_db: snr_db(&series.close, &clean),
        rmse: rmse(&series.close, &clean),
        levels: opts.levels,
        wavelet_name: "coif3".into(),
        threshold_rule: if opts.zero_threshold {
            "none".into()
        } else {
            "universal-soft".into()
        },
        threshold: lambda,
    };
    let mut out = series.clone();
    out.close = clean;
    out.provenance = vec![Provenance::Denoised; out.len()];
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marketdata::Bar;
    use chrono::{Days, NaiveDate};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn closes(values: &[f64]) -> PriceSeries {
        let d0 = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        PriceSeries::from_bars(values.iter().enumerate().map(|(i, &v)| Bar {
            date: d0 + Days::new(i as u64),
            open: v,
            high: v,
            low: v,
            close: v,
            volume: 0.0,
        }))
        .unwrap()
    }

    #[test]
    fn snr_and_rmse_arithmetic() {
        let x = [1.0, 1.0, 1.0, 1.0];
        let xh = [1.0, 1.0, 1.0, 0.0];
        assert!((snr_db(&x, &xh) - 6.0206).abs() < 1e-3);
        assert!((snr_db(&x, &xh) - 10.0 * 4f64.log10()).abs() < 1e-12);
        assert!((rmse(&x, &xh) - 0.5).abs() < 1e-12);
        assert_eq!(snr_db(&x, &x), f64::INFINITY);
    }

    #[test]
    fn zero_threshold_is_identity() {
        let s = closes(&(0..32).map(|i| 100.0 + (i as f64).sin()).collect::<Vec<_>>());
        let (out, rep) = denoise(
            &s,
            DenoiseOptions {
                levels: 3,
                zero_threshold: true,
            },
        )
        .unwrap();
        assert_eq!(out.close, s.close);
        assert_eq!(rep.rmse, 0.0);
        assert_eq!(rep.snr_db, f64::INFINITY);
        let json = serde_json::to_string(&rep).unwrap();
        assert!(json.contains("\"snr_db\":\"+inf\""));
        assert!(out.provenance.iter().all(|p| *p == Provenance::Denoised));
    }

    #[test]
    fn constant_is_fixed_point() {
        let s = closes(&[42.0; 50]);
        let (out, _) = denoise(&s, DenoiseOptions::default()).unwrap();
        for v in &out.close {
            assert!((v - 42.0).abs() < 1e-9);
        }
    }

    #[test]
    fn matches_reference_reconstruction() {
        // PyWavelets: universal soft threshold on wavedec(x, "coif3",
        // mode="periodization", level=3), then waverec
        let x: Vec<f64> = (0..64)
            .map(|j| (0.2 * j as f64).sin() * 10.0 + if j % 3 == 0 { 0.5 } else { -0.3 })
            .collect();
        let (y, lambda) = denoise_values(&x, DenoiseOptions::default()).unwrap();
        assert!((lambda - 1.6024778178526735).abs() < 1e-12);
        let want_head = [1.0936135418892374, 2.869928174704639, 4.51631448994569];
        let want_tail = [-4.239040160711472, -2.49166024894576, -0.6992472624357331];
        for (a, b) in y[..3].iter().zip(want_head) {
            assert!((a - b).abs() < 1e-10);
        }
        for (a, b) in y[61..].iter().zip(want_tail) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn too_short_for_levels() {
        let s = closes(&[1.0; 6]);
        assert!(denoise(&s, DenoiseOptions::default()).is_err());
    }

    #[test]
    fn denoising_improves_snr_on_most_seeds() {
        let n = 256;
        let clean: Vec<f64> = (0..n)
            .map(|i| 100.0 + 5.0 * (2.0 * std::f64::consts::PI * i as f64 / 64.0).sin())
            .collect();
        let mut wins = 0;
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let noise = Normal::new(0.0, 1.0).unwrap();
            let noisy: Vec<f64> = clean.iter().map(|c| c + noise.sample(&mut rng)).collect();
            let (den, _) = denoise_values(&noisy, DenoiseOptions::default()).unwrap();
            if snr_db(&clean, &den) >= snr_db(&clean, &noisy) {
                wins += 1;
            }
        }
        assert!(wins >= 90, "only {wins}/100 seeds improved");
    }

    #[test]
    fn snr_falls_as_rmse_rises() {
        let x: Vec<f64> = (0..40).map(|i| 50.0 + i as f64).collect();
        let mut last: Option<(f64, f64)> = None;
        for k in 1..10 {
            let xh: Vec<f64> = x
                .iter()
                .enumerate()
                .map(|(i, v)| v + 0.1 * k as f64 * if i % 2 == 0 { 1.0 } else { -1.0 })
                .collect();
            let cur = (snr_db(&x, &xh), rmse(&x, &xh));
            if let Some((snr, err)) = last {
                assert!(cur.0 < snr && cur.1 > err);
            }
            last = Some(cur);
        }
    }
}
