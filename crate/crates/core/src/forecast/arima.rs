use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArimaOrder {
    pub p: usize,
    pub d: usize,
    pub q: usize,
}

impl Default for ArimaOrder {
    fn default() -> Self {
        ArimaOrder { p: 5, d: 1, q: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArimaForecast {
    /// AR coefficients, lag 1 first.
    pub coefficients: Vec<f64>,
    pub forecast: f64,
}

/// Solves the symmetric system `a x = b` by Gaussian elimination with
/// partial pivoting. `None` when a pivot vanishes relative to the matrix
/// scale.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let (upper, lower) = a.split_at_mut(col + 1);
        let pivot_row = &upper[col];
        for (off, row) in lower.iter_mut().enumerate() {
            let f = row[col] / pivot_row[col];
            for (x, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= f * p;
            }
            b[col + 1 + off] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

fn difference(series: &[f64]) -> Vec<f64> {
    series.windows(2).map(|w| w[1] - w[0]).collect()
}

/// One-step ARIMA(p, d, 0) forecast.
///
/// The series is differenced `d` times, AR coefficients (no intercept) are
/// fitted by ordinary least squares on the lagged values, and the one-step
/// forecast is integrated back. An identically zero differenced series
/// forecasts a zero change.
pub fn arima_fit_forecast(series: &[f64], order: ArimaOrder) -> Result<ArimaForecast> {
    if order.q != 0 {
        return Err(Error::InvalidConfig(
            "moving-average terms (q > 0) are not supported".into(),
        ));
    }
    if order.p == 0 {
        return Err(Error::InvalidConfig("AR order p must be at least 1".into()));
    }
    let min_len = order.p + order.d + 10;
    if series.len() <= min_len {
        return Err(Error::SeriesTooShort(format!(
            "ARIMA needs more than {min_len} points, got {}",
            series.len()
        )));
    }

    // keep the last value of every differencing stage for integration
    let mut stages = vec![series.to_vec()];
    for _ in 0..order.d {
        let next = difference(stages.last().unwrap());
        stages.push(next);
    }
    let y = stages.last().unwrap();
    let p = order.p;

    let mut xtx = vec![vec![0.0; p]; p];
    let mut xty = vec![0.0; p];
    for t in p..y.len() {
        for i in 0..p {
            let xi = y[t - 1 - i];
            xty[i] += xi * y[t];
            for j in 0..p {
                xtx[i][j] += xi * y[t - 1 - j];
            }
        }
    }
    let coefficients = match solve(xtx, xty) {
        Some(c) => c,
        None if y.iter().all(|v| *v == 0.0) => vec![0.0; p],
        None => return Err(Error::DegenerateSeries),
    };

    let n = y.len();
    let mut next: f64 = (0..p).map(|i| coefficients[i] * y[n - 1 - i]).sum();
    for stage in stages[..order.d].iter().rev() {
        next += stage.last().unwrap();
    }
    Ok(ArimaForecast {
        coefficients,
        forecast: next,
    })
}

/// Last observed value.
pub fn persistence_forecast(series: &[f64]) -> Result<f64> {
    series.last().copied().ok_or(Error::EmptySeries)
}
