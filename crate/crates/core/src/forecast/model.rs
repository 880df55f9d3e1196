//! Training, prediction and serialization of LSTM / S-LSTM forecasters.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::lstm::{loss_and_gradients, FeatureWindow, LstmParameters};
use crate::error::{Error, Result};
use crate::marketdata::PriceSeries;
use crate::sentiment::{Bucket, SentimentSeries};

pub const MODEL_FORMAT: &str = "sentimarket-lstm";
pub const MODEL_VERSION: u32 = 1;
pub const MIN_WINDOWS: usize = 20;

/// What the price feature and the regression target represent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetMode {
    /// Close level, standardized.
    #[default]
    Close,
    /// Daily log-return of the close, standardized.
    LogReturn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub hidden_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub clip_norm: f64,
    /// Leading fraction of windows used for training; the rest validate.
    pub train_fraction: f64,
    pub batch_size: usize,
    pub window: usize,
    pub target: TargetMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 200,
            hidden_size: 16,
            learning_rate: 0.01,
            seed: 42,
            clip_norm: 1.0,
            train_fraction: 0.8,
            batch_size: 32,
            window: 3,
            target: TargetMode::Close,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.epochs == 0 || self.hidden_size == 0 || self.batch_size == 0 || self.window == 0 {
            return bad("epochs, hidden size, batch size and window must be positive");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning rate must be positive");
        }
        if !(self.clip_norm.is_finite() && self.clip_norm > 0.0) {
            return bad("clip norm must be positive");
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad("train fraction must lie in (0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureScale {
    pub mean: f64,
    pub std: f64,
}

impl FeatureScale {
    /// Population statistics; a zero spread is replaced by 1 so constant
    /// features standardize to 0.
    pub fn fit(values: &[f64]) -> Self {
        let n = values.len().max(1) as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let std = var.sqrt();
        FeatureScale {
            mean,
            std: if std > 1e-12 * mean.abs().max(1.0) { std } else { 1.0 },
        }
    }

    pub fn standardize(&self, v: f64) -> f64 {
        (v - self.mean) / self.std
    }

    pub fn restore(&self, z: f64) -> f64 {
        z * self.std + self.mean
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Lstm,
    SLstm,
}

impl ModelKind {
    pub fn feature_dim(self) -> usize {
        match self {
            ModelKind::Lstm => 1,
            ModelKind::SLstm => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Lstm => "lstm",
            ModelKind::SLstm => "s-lstm",
        }
    }
}

/// A fitted forecaster: parameters, feature scalers, the configuration it
/// was trained with and its per-epoch loss curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format: String,
    pub version: u32,
    pub kind: ModelKind,
    pub config: TrainConfig,
    pub scalers: Vec<FeatureScale>,
    pub params: LstmParameters,
    pub train_loss: Vec<f64>,
    pub validation_loss: Vec<f64>,
}

/// Raw per-day feature rows, `[close]` or `[close, sentiment]`, aligned
/// with the price series.
pub fn feature_rows(series: &PriceSeries, sentiment: Option<&SentimentSeries>) -> Result<Vec<Vec<f64>>> {
    series.ensure_contiguous()?;
    let Some(sent) = sentiment else {
        return Ok(series.close.iter().map(|c| vec![*c]).collect());
    };
    if sent.bucket != Bucket::Day {
        return Err(Error::InvalidConfig(
            "sentiment must be a daily series".into(),
        ));
    }
    if !sent.centered {
        return Err(Error::InvalidConfig(
            "sentiment must be centered before training".into(),
        ));
    }
    let mut missing = Vec::new();
    let mut rows = Vec::with_capacity(series.len());
    for (d, c) in series.date.iter().zip(&series.close) {
        match sent.value_on(*d) {
            Some(s) => rows.push(vec![*c, s]),
            None => missing.push(d.to_string()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::MisalignedSentiment(missing));
    }
    Ok(rows)
}

/// Model-space rows: the price column becomes a log-return in
/// [`TargetMode::LogReturn`], which drops the first day.
fn transform_rows(raw: &[Vec<f64>], mode: TargetMode) -> Vec<Vec<f64>> {
    match mode {
        TargetMode::Close => raw.to_vec(),
        TargetMode::LogReturn => raw
            .windows(2)
            .map(|w| {
                let mut row = w[1].clone();
                row[0] = (w[1][0] / w[0][0]).ln();
                row
            })
            .collect(),
    }
}

fn history_len(window: usize, mode: TargetMode) -> usize {
    match mode {
        TargetMode::Close => window,
        TargetMode::LogReturn => window + 1,
    }
}

fn standardize_rows(rows: &[Vec<f64>], scalers: &[FeatureScale]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| r.iter().zip(scalers).map(|(v, s)| s.standardize(*v)).collect())
        .collect()
}

fn global_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Self {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        for k in 0..params.len() {
            self.m[k] = Self::BETA1 * self.m[k] + (1.0 - Self::BETA1) * grad[k];
            self.v[k] = Self::BETA2 * self.v[k] + (1.0 - Self::BETA2) * grad[k] * grad[k];
            let m_hat = self.m[k] / c1;
            let v_hat = self.v[k] / c2;
            params[k] -= lr * m_hat / (v_hat.sqrt() + Self::EPS);
        }
    }
}

/// Trains an LSTM on closes, or an S-LSTM when a centered daily sentiment
/// series is supplied. Identical inputs give bit-identical models.
pub fn fit(
    series: &PriceSeries,
    sentiment: Option<&SentimentSeries>,
    config: &TrainConfig,
) -> Result<TrainedModel> {
    config.validate()?;
    let kind = if sentiment.is_some() {
        ModelKind::SLstm
    } else {
        ModelKind::Lstm
    };
    let rows = transform_rows(&feature_rows(series, sentiment)?, config.target);
    let w = config.window;
    let n_windows = rows.len().saturating_sub(w);
    if n_windows < MIN_WINDOWS {
        return Err(Error::SeriesTooShort(format!(
            "{n_windows} usable windows, need at least {MIN_WINDOWS}"
        )));
    }
    let n_train = ((n_windows as f64 * config.train_fraction).floor() as usize).clamp(1, n_windows);

    // statistics over every row a training window touches, targets included
    let dim = kind.feature_dim();
    let seen = &rows[..n_train + w];
    let scalers: Vec<FeatureScale> = (0..dim)
        .map(|j| FeatureScale::fit(&seen.iter().map(|r| r[j]).collect::<Vec<_>>()))
        .collect();
    let z = standardize_rows(&rows, &scalers);
    let windows: Vec<FeatureWindow> = (w..rows.len())
        .map(|e| FeatureWindow {
            inputs: z[e - w..e].to_vec(),
            target: z[e][0],
        })
        .collect();
    let (train, valid) = windows.split_at(n_train);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = LstmParameters::init_uniform(dim, config.hidden_size, &mut rng);
    let mut flat = params.flatten();
    let mut adam = Adam::new(flat.len());
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut batch = Vec::with_capacity(config.batch_size);
    let mut train_loss = Vec::with_capacity(config.epochs);
    let mut validation_loss = Vec::with_capacity(config.epochs);

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&k| train[k].clone()));
            let (_, grad) = loss_and_gradients(&params, &batch)?;
            let mut g = grad.flatten();
            let norm = global_norm(&g);
            if norm > config.clip_norm {
                let s = config.clip_norm / norm;
                g.iter_mut().for_each(|x| *x *= s);
            }
            adam.step(&mut flat, &g, config.learning_rate);
            params.assign_flat(&flat);
        }
        train_loss.push(loss_and_gradients(&params, train)?.0);
        if !valid.is_empty() {
            validation_loss.push(loss_and_gradients(&params, valid)?.0);
        }
    }
    if flat.iter().any(|v| !v.is_finite()) {
        return Err(Error::Model("training diverged".into()));
    }

    Ok(TrainedModel {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
        kind,
        config: config.clone(),
        scalers,
        params,
        train_loss,
        validation_loss,
    })
}

impl TrainedModel {
    pub fn feature_dim(&self) -> usize {
        self.kind.feature_dim()
    }

    /// Number of trailing raw rows [`predict`](Self::predict) needs.
    pub fn history(&self) -> usize {
        history_len(self.config.window, self.config.target)
    }

    /// Next-day close from the trailing raw feature rows (oldest first).
    pub fn predict(&self, recent: &[Vec<f64>]) -> Result<f64> {
        let need = self.history();
        if recent.len() < need {
            return Err(Error::ShapeMismatch {
                operand: "recent days",
                expected: need,
                got: recent.len(),
            });
        }
        let recent = &recent[recent.len() - need..];
        if let Some(row) = recent.iter().find(|r| r.len() != self.feature_dim()) {
            return Err(Error::ShapeMismatch {
                operand: "features",
                expected: self.feature_dim(),
                got: row.len(),
            });
        }
        let z = standardize_rows(&transform_rows(recent, self.config.target), &self.scalers);
        let out = self.scalers[0].restore(self.params.forward(&z)?);
        Ok(match self.config.target {
            TargetMode::Close => out,
            TargetMode::LogReturn => recent[need - 1][0] * out.exp(),
        })
    }

    /// Prediction for row `index` of `rows` from the rows before it.
    pub fn predict_at(&self, rows: &[Vec<f64>], index: usize) -> Result<f64> {
        if index < self.history() || index > rows.len() {
            return Err(Error::SeriesTooShort(format!(
                "row {index} has fewer than {} days of history",
                self.history()
            )));
        }
        self.predict(&rows[index - self.history()..index])
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: TrainedModel = serde_json::from_str(text)?;
        if m.format != MODEL_FORMAT || m.version != MODEL_VERSION {
            return Err(Error::Model(format!(
                "unsupported model format {} v{}",
                m.format, m.version
            )));
        }
        m.params.validate()?;
        if m.scalers.len() != m.feature_dim() || m.params.input_size != m.feature_dim() {
            return Err(Error::Model("scalers do not match feature dimension".into()));
        }
        Ok(m)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
