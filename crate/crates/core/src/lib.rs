//! Sentiment-augmented stock index forecasting.
//!
//! The pipeline runs tweets through [`text`] cleaning and keyword filtering,
//! scores and buckets them in [`sentiment`], conditions daily index prices in
//! [`marketdata`], trains LSTM / S-LSTM forecasters in [`forecast`] and scores
//! them with [`evaluation`].

pub mod error;
pub mod evaluation;
pub mod forecast;
pub mod marketdata;
pub mod sentiment;
pub mod text;

pub use error::{Error, Result};
