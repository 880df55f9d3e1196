use std::io::Write;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{csv_error, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionMetrics {
    pub accuracy: f64,
    pub f1_up: f64,
}

/// Up when the value is strictly above the previous close; ties are down.
fn is_up(value: f64, previous_close: f64) -> bool {
    value > previous_close
}

/// Direction accuracy and F1 of the "up" class.
pub fn direction_metrics(truth: &[f64], predicted: &[f64], previous_close: &[f64]) -> Result<DirectionMetrics> {
    if truth.len() != predicted.len() {
        return Err(Error::LengthMismatch(truth.len(), predicted.len()));
    }
    if truth.len() != previous_close.len() {
        return Err(Error::LengthMismatch(truth.len(), previous_close.len()));
    }
    if truth.is_empty() {
        return Err(Error::EmptySeries);
    }
    let (mut tp, mut fp, mut fn_, mut hits) = (0usize, 0usize, 0usize, 0usize);
    for ((t, p), prev) in truth.iter().zip(predicted).zip(previous_close) {
        let (tu, pu) = (is_up(*t, *prev), is_up(*p, *prev));
        if tu == pu {
            hits += 1;
        }
        match (pu, tu) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            _ => {}
        }
    }
    let f1_up = if tp == 0 {
        0.0
    } else {
        let precision = tp as f64 / (tp + fp) as f64;
        let recall = tp as f64 / (tp + fn_) as f64;
        2.0 * precision * recall / (precision + recall)
    };
    Ok(DirectionMetrics {
        accuracy: hits as f64 / truth.len() as f64,
        f1_up,
    })
}

/// Mean of `|(predicted - truth) / truth|` and one minus that mean.
pub fn relative_error_accuracy(truth: &[f64], predicted: &[f64]) -> Result<(f64, f64)> {
    if truth.len() != predicted.len() {
        return Err(Error::LengthMismatch(truth.len(), predicted.len()));
    }
    if truth.is_empty() {
        return Err(Error::EmptySeries);
    }
    let mut total = 0.0;
    for (i, (t, p)) in truth.iter().zip(predicted).enumerate() {
        if *t == 0.0 {
            return Err(Error::ZeroTruth(format!("index {i}")));
        }
        total += ((p - t) / t).abs();
    }
    let mre = total / truth.len() as f64;
    Ok((mre, 1.0 - mre))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastRow {
    pub date: NaiveDate,
    pub truth: f64,
    pub predicted: f64,
    pub previous_close: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub model: String,
    pub direction_accuracy: f64,
    pub f1_up: f64,
    pub mean_relative_error: f64,
    pub relative_accuracy: f64,
    /// Share of dates whose raw (uncentered) daily sentiment is positive,
    /// when sentiment was supplied.
    pub positive_sentiment_fraction: Option<f64>,
    pub rows: Vec<ForecastRow>,
}

impl EvaluationReport {
    pub fn from_rows(model: impl Into<String>, rows: Vec<ForecastRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyTestRange);
        }
        if let Some(r) = rows.iter().find(|r| r.truth == 0.0) {
            return Err(Error::ZeroTruth(r.date.to_string()));
        }
        let truth: Vec<f64> = rows.iter().map(|r| r.truth).collect();
        let pred: Vec<f64> = rows.iter().map(|r| r.predicted).collect();
        let prev: Vec<f64> = rows.iter().map(|r| r.previous_close).collect();
        let dm = direction_metrics(&truth, &pred, &prev)?;
        let (mre, acc) = relative_error_accuracy(&truth, &pred)?;
        Ok(EvaluationReport {
            model: model.into(),
            direction_accuracy: dm.accuracy,
            f1_up: dm.f1_up,
            mean_relative_error: mre,
            relative_accuracy: acc,
            positive_sentiment_fraction: None,
            rows,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// `date,truth,predicted,previous_close`.
    pub fn write_rows_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["date", "truth", "predicted", "previous_close"])
            .map_err(csv_error)?;
        for r in &self.rows {
            w.write_record([
                r.date.to_string(),
                r.truth.to_string(),
                r.predicted.to_string(),
                r.previous_close.to_string(),
            ])
            .map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `date,truth,pred_<model>...` over reports that share the same dates.
pub fn write_plot_csv<W: Write>(writer: W, reports: &[EvaluationReport]) -> Result<()> {
    let Some(first) = reports.first() else {
        return Err(Error::EmptySeries);
    };
    for r in reports {
        if r.rows.len() != first.rows.len()
            || r.rows.iter().zip(&first.rows).any(|(a, b)| a.date != b.date)
        {
            return Err(Error::LengthMismatch(first.rows.len(), r.rows.len()));
        }
    }
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["date".to_string(), "truth".to_string()];
    header.extend(reports.iter().map(|r| format!("pred_{}", r.model)));
    w.write_record(&header).map_err(csv_error)?;
    for (i, row) in first.rows.iter().enumerate() {
        let mut rec = vec![row.date.to_string(), row.truth.to_string()];
        rec.extend(reports.iter().map(|r| r.rows[i].predicted.to_string()));
        w.write_record(&rec).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}
