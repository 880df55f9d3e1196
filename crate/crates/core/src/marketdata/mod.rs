//! Daily OHLC series: ingestion, calendar gap filling and wavelet denoising.

mod denoise;
mod interpolate;
pub mod wavelet;

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

pub use denoise::{denoise, denoise_values, rmse, snr_db, DenoiseOptions, DenoiseReport};
pub use interpolate::{fill_calendar, lagrange_eval, STENCIL};

use crate::error::{csv_error, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Observed,
    Interpolated,
    Denoised,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Observed => "observed",
            Provenance::Interpolated => "interpolated",
            Provenance::Denoised => "denoised",
        })
    }
}

impl FromStr for Provenance {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "observed" => Ok(Provenance::Observed),
            "interpolated" => Ok(Provenance::Interpolated),
            "denoised" => Ok(Provenance::Denoised),
            other => Err(format!("unknown provenance {other:?}")),
        }
    }
}

/// Column-oriented daily price table. Dates are strictly increasing; they
/// may skip non-trading days until [`fill_calendar`] has run.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    pub date: Vec<NaiveDate>,
    pub open: Vec<f64>,
    pub high: Vec<f64>,
    pub low: Vec<f64>,
    pub close: Vec<f64>,
    pub volume: Vec<f64>,
    pub provenance: Vec<Provenance>,
}

/// One parsed row before validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bar {
    pub date: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: f64,
}

fn check_bar(bar: &Bar, line: u64) -> Result<()> {
    let bad = |reason: String| Error::InvalidPrice { line, reason };
    for (name, v) in [
        ("open", bar.open),
        ("high", bar.high),
        ("low", bar.low),
        ("close", bar.close),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(bad(format!("{name} = {v} is not a positive price")));
        }
    }
    if !(bar.volume.is_finite() && bar.volume >= 0.0) {
        return Err(bad(format!("volume = {} is negative", bar.volume)));
    }
    let lo = bar.open.min(bar.close);
    let hi = bar.open.max(bar.close);
    if bar.low > lo || hi > bar.high {
        return Err(bad(format!(
            "inconsistent bar: low {} open {} close {} high {}",
            bar.low, bar.open, bar.close, bar.high
        )));
    }
    Ok(())
}

impl PriceSeries {
    pub fn empty() -> Self {
        PriceSeries {
            date: Vec::new(),
            open: Vec::new(),
            high: Vec::new(),
            low: Vec::new(),
            close: Vec::new(),
            volume: Vec::new(),
            provenance: Vec::new(),
        }
    }

    /// Validates, sorts and wraps observed bars. Errors name the 1-based
    /// position of the offending bar as its "line".
    pub fn from_bars(bars: impl IntoIterator<Item = Bar>) -> Result<Self> {
        Self::from_lined_bars(
            bars.into_iter()
                .enumerate()
                .map(|(i, b)| (i as u64 + 1, b, Provenance::Observed)),
        )
    }

    fn from_lined_bars(bars: impl IntoIterator<Item = (u64, Bar, Provenance)>) -> Result<Self> {
        let mut bars: Vec<(u64, Bar, Provenance)> = bars.into_iter().collect();
        for (line, bar, prov) in &bars {
            if *prov == Provenance::Observed {
                check_bar(bar, *line)?;
            }
        }
        bars.sort_by_key(|(_, b, _)| b.date);
        if let Some(w) = bars.windows(2).find(|w| w[0].1.date == w[1].1.date) {
            return Err(Error::DuplicateDate(w[0].1.date.to_string()));
        }
        let mut s = PriceSeries::empty();
        for (_, b, prov) in bars {
            s.push(b, prov);
        }
        Ok(s)
    }

    pub(crate) fn push(&mut self, b: Bar, prov: Provenance) {
        self.date.push(b.date);
        self.open.push(b.open);
        self.high.push(b.high);
        self.low.push(b.low);
        self.close.push(b.close);
        self.volume.push(b.volume);
        self.provenance.push(prov);
    }

    pub fn bar(&self, i: usize) -> Bar {
        Bar {
            date: self.date[i],
            open: self.open[i],
            high: self.high[i],
            low: self.low[i],
            close: self.close[i],
            volume: self.volume[i],
        }
    }

    pub fn len(&self) -> usize {
        self.date.len()
    }

    pub fn is_empty(&self) -> bool {
        self.date.is_empty()
    }

    /// `Ok` when every date follows its predecessor by exactly one day.
    pub fn ensure_contiguous(&self) -> Result<()> {
        match self
            .date
            .windows(2)
            .find(|w| w[0].checked_add_days(Days::new(1)) != Some(w[1]))
        {
            Some(w) => Err(Error::NotContiguous(w[0].to_string())),
            None => Ok(()),
        }
    }

    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        self.date.binary_search(&date).ok()
    }

    /// Rows with `date < end`.
    pub fn before(&self, end: NaiveDate) -> PriceSeries {
        let k = self.date.partition_point(|d| *d < end);
        self.slice(0, k)
    }

    pub fn slice(&self, from: usize, to: usize) -> PriceSeries {
        PriceSeries {
            date: self.date[from..to].to_vec(),
            open: self.open[from..to].to_vec(),
            high: self.high[from..to].to_vec(),
            low: self.low[from..to].to_vec(),
            close: self.close[from..to].to_vec(),
            volume: self.volume[from..to].to_vec(),
            provenance: self.provenance[from..to].to_vec(),
        }
    }

    /// Reads `date,open,high,low,close,volume[,provenance]` with columns
    /// located by header name. Rows without a provenance column are observed.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers().map_err(csv_error)?.clone();
        let find = |name: &str| {
            headers
                .iter()
                .position(|h| h.trim().trim_start_matches('\u{feff}').eq_ignore_ascii_case(name))
        };
        let mut cols = [0usize; 6];
        for (slot, name) in cols
            .iter_mut()
            .zip(["date", "open", "high", "low", "close", "volume"])
        {
            *slot = find(name).ok_or_else(|| Error::MissingColumn(name.into()))?;
        }
        let prov_col = find("provenance");
        let mut bars = Vec::new();
        for row in rdr.records() {
            let row = row.map_err(csv_error)?;
            let line = row.position().map(|p| p.line()).unwrap_or(0);
            let bad = |reason: String| Error::MalformedRow { line, reason };
            let date = NaiveDate::parse_from_str(row[cols[0]].trim(), "%Y-%m-%d")
                .map_err(|_| bad(format!("date {:?}", &row[cols[0]])))?;
            let mut nums = [0.0; 5];
            for (k, slot) in nums.iter_mut().enumerate() {
                let raw = row[cols[k + 1]].trim();
                *slot = raw
                    .parse()
                    .map_err(|_| bad(format!("number {raw:?}")))?;
            }
            let prov = match prov_col {
                Some(c) => row[c].parse().map_err(bad)?,
                None => Provenance::Observed,
            };
            let [open, high, low, close, volume] = nums;
            bars.push((
                line,
                Bar {
                    date,
                    open,
                    high,
                    low,
                    close,
                    volume,
                },
                prov,
            ));
        }
        Self::from_lined_bars(bars)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["date", "open", "high", "low", "close", "volume", "provenance"])
            .map_err(csv_error)?;
        for i in 0..self.len() {
            w.write_record([
                self.date[i].format("%Y-%m-%d").to_string(),
                self.open[i].to_string(),
                self.high[i].to_string(),
                self.low[i].to_string(),
                self.close[i].to_string(),
                self.volume[i].to_string(),
                self.provenance[i].to_string(),
            ])
            .map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reads an OHLC file of trading days.
pub fn parse_ohlc(path: impl AsRef<Path>) -> Result<PriceSeries> {
    PriceSeries::read_csv(std::fs::File::open(path)?)
}
