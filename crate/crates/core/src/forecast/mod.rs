//! LSTM and S-LSTM forecasters plus ARIMA and persistence baselines.

mod arima;
pub mod lstm;
mod model;

pub use arima::{arima_fit_forecast, persistence_forecast, ArimaForecast, ArimaOrder};
pub use lstm::{loss_and_gradients, lstm_step, FeatureWindow, Gate, LstmParameters, LstmState};
pub use model::{
    feature_rows, fit, FeatureScale, ModelKind, TargetMode, TrainConfig, TrainedModel, MIN_WINDOWS,
};
