//! Lexicon scoring, time bucketing and mean-centering of tweet sentiment.

mod lexicon;

use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, Duration, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

pub use lexicon::{explain_text, score_text, Contribution, Lexicon};

use crate::error::{csv_error, Error, Result};
use crate::text::{format_timestamp, parse_timestamp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bucket {
    HalfHour,
    Day,
}

impl Bucket {
    pub fn seconds(self) -> i64 {
        match self {
            Bucket::HalfHour => 30 * 60,
            Bucket::Day => 24 * 60 * 60,
        }
    }

    pub fn duration(self) -> Duration {
        Duration::seconds(self.seconds())
    }

    fn floor(self, t: DateTime<Utc>) -> i64 {
        t.timestamp().div_euclid(self.seconds()) * self.seconds()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentimentSeries {
    pub bucket: Bucket,
    pub bucket_start: Vec<DateTime<Utc>>,
    pub score: Vec<f64>,
    pub count: Vec<u32>,
    pub centered: bool,
    pub mean_before_centering: f64,
}

fn from_epoch(secs: i64) -> DateTime<Utc> {
    DateTime::from_timestamp(secs, 0).expect("timestamp in range")
}

/// Fills `None` gaps by linear interpolation between the nearest known
/// neighbours; leading and trailing gaps take the nearest known value.
pub(crate) fn fill_linear(values: &[Option<f64>]) -> Vec<f64> {
    let known: Vec<usize> = (0..values.len()).filter(|&i| values[i].is_some()).collect();
    let mut out = vec![0.0; values.len()];
    let Some((&first, &last)) = known.first().zip(known.last()) else {
        return out;
    };
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = match values[i] {
            Some(v) => v,
            None if i < first => values[first].unwrap(),
            None if i > last => values[last].unwrap(),
            None => {
                let right = known.partition_point(|&k| k < i);
                let (l, r) = (known[right - 1], known[right]);
                let (vl, vr) = (values[l].unwrap(), values[r].unwrap());
                vl + (vr - vl) * (i - l) as f64 / (r - l) as f64
            }
        };
    }
    out
}

/// Averages scores into aligned buckets (`:00`/`:30`, or UTC midnight) from
/// the first to the last scored bucket. Empty buckets are interpolated and
/// keep a count of zero.
pub fn aggregate(tweets: &[(DateTime<Utc>, f64)], bucket: Bucket) -> Result<SentimentSeries> {
    if tweets.is_empty() {
        return Err(Error::NoScoredTweets);
    }
    if let Some(&(_, s)) = tweets.iter().find(|(_, s)| !(-1.0..=1.0).contains(s)) {
        return Err(Error::ScoreOutOfRange(s));
    }
    let step = bucket.seconds();
    let first = tweets.iter().map(|(t, _)| bucket.floor(*t)).min().unwrap();
    let last = tweets.iter().map(|(t, _)| bucket.floor(*t)).max().unwrap();
    let n = ((last - first) / step + 1) as usize;
    let mut sums = vec![0.0; n];
    let mut count = vec![0u32; n];
    for (t, s) in tweets {
        let k = ((bucket.floor(*t) - first) / step) as usize;
        sums[k] += s;
        count[k] += 1;
    }
    let means: Vec<Option<f64>> = sums
        .iter()
        .zip(&count)
        .map(|(&s, &c)| (c > 0).then(|| s / c as f64))
        .collect();
    Ok(SentimentSeries {
        bucket,
        bucket_start: (0..n).map(|k| from_epoch(first + k as i64 * step)).collect(),
        score: fill_linear(&means),
        count,
        centered: false,
        mean_before_centering: 0.0,
    })
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

impl SentimentSeries {
    pub fn len(&self) -> usize {
        self.score.len()
    }

    pub fn is_empty(&self) -> bool {
        self.score.is_empty()
    }

    /// Daily values as the mean of each UTC day's buckets; counts are summed.
    pub fn daily(&self) -> Result<SentimentSeries> {
        if self.is_empty() {
            return Err(Error::NoScoredTweets);
        }
        if self.bucket == Bucket::Day {
            return Ok(self.clone());
        }
        let mut out = SentimentSeries {
            bucket: Bucket::Day,
            bucket_start: Vec::new(),
            score: Vec::new(),
            count: Vec::new(),
            centered: self.centered,
            mean_before_centering: self.mean_before_centering,
        };
        let mut i = 0;
        while i < self.len() {
            let day = Bucket::Day.floor(self.bucket_start[i]);
            let mut j = i;
            while j < self.len() && Bucket::Day.floor(self.bucket_start[j]) == day {
                j += 1;
            }
            out.bucket_start.push(from_epoch(day));
            out.score.push(mean(&self.score[i..j]));
            out.count.push(self.count[i..j].iter().sum());
            i = j;
        }
        Ok(out)
    }

    /// Subtracts the full-sample mean from every score.
    pub fn center(&self) -> Result<SentimentSeries> {
        if self.centered {
            return Err(Error::AlreadyCentered);
        }
        if self.is_empty() {
            return Err(Error::EmptySeries);
        }
        let shift = mean(&self.score);
        let mut score: Vec<f64> = self.score.iter().map(|s| s - shift).collect();
        // second pass removes the rounding residue of the first
        let residue = mean(&score);
        score.iter_mut().for_each(|s| *s -= residue);
        Ok(SentimentSeries {
            score,
            centered: true,
            mean_before_centering: shift + residue,
            ..self.clone()
        })
    }

    /// Undoes [`center`](Self::center).
    pub fn uncenter(&self) -> SentimentSeries {
        if !self.centered {
            return self.clone();
        }
        SentimentSeries {
            score: self
                .score
                .iter()
                .map(|s| s + self.mean_before_centering)
                .collect(),
            centered: false,
            mean_before_centering: 0.0,
            ..self.clone()
        }
    }

    /// Fraction of buckets with a strictly positive raw score.
    pub fn positive_fraction(&self) -> f64 {
        let raw = self.uncenter();
        raw.score.iter().filter(|&&s| s > 0.0).count() as f64 / raw.len().max(1) as f64
    }

    pub fn value_on(&self, date: NaiveDate) -> Option<f64> {
        let t = date.and_hms_opt(0, 0, 0)?.and_utc();
        self.bucket_start
            .binary_search(&t)
            .ok()
            .map(|i| self.score[i])
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["bucket_start", "score", "count"])
            .map_err(csv_error)?;
        for i in 0..self.len() {
            w.write_record([
                format_timestamp(&self.bucket_start[i]),
                self.score[i].to_string(),
                self.count[i].to_string(),
            ])
            .map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads `bucket_start,score,count`. The spacing (half-hour or day) is
    /// inferred from the timestamps; the series comes back uncentered.
    pub fn read_csv<R: Read>(reader: R) -> Result<SentimentSeries> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers().map_err(csv_error)?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| Error::MissingColumn(name.into()))
        };
        let (ts_col, score_col, count_col) = (col("bucket_start")?, col("score")?, col("count")?);
        let mut bucket_start = Vec::new();
        let mut score = Vec::new();
        let mut count = Vec::new();
        for row in rdr.records() {
            let row = row.map_err(csv_error)?;
            let line = row.position().map(|p| p.line()).unwrap_or(0);
            let bad = |reason: String| Error::MalformedRow { line, reason };
            let t = parse_timestamp(&row[ts_col]).ok_or_else(|| Error::Timestamp {
                value: row[ts_col].to_string(),
                line,
            })?;
            let s: f64 = row[score_col]
                .trim()
                .parse()
                .map_err(|_| bad(format!("score {:?}", &row[score_col])))?;
            let c: u32 = row[count_col]
                .trim()
                .parse()
                .map_err(|_| bad(format!("count {:?}", &row[count_col])))?;
            bucket_start.push(t);
            score.push(s);
            count.push(c);
        }
        if bucket_start.is_empty() {
            return Err(Error::EmptySeries);
        }
        let bucket = match bucket_start.windows(2).next() {
            Some(w) if (w[1] - w[0]).num_seconds() == Bucket::HalfHour.seconds() => Bucket::HalfHour,
            _ => Bucket::Day,
        };
        if let Some(w) = bucket_start
            .windows(2)
            .find(|w| (w[1] - w[0]).num_seconds() != bucket.seconds())
        {
            return Err(Error::InvalidConfig(format!(
                "sentiment buckets are not uniformly spaced at {}",
                format_timestamp(&w[1])
            )));
        }
        Ok(SentimentSeries {
            bucket,
            bucket_start,
            score,
            count,
            centered: false,
            mean_before_centering: 0.0,
        })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<SentimentSeries> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn at(hms: &str) -> DateTime<Utc> {
        parse_timestamp(&format!("2020-03-12T{hms}Z")).unwrap()
    }

    fn series(scores: &[f64]) -> SentimentSeries {
        let start = at("00:00:00");
        SentimentSeries {
            bucket: Bucket::Day,
            bucket_start: (0..scores.len())
                .map(|i| start + Duration::days(i as i64))
                .collect(),
            score: scores.to_vec(),
            count: vec![1; scores.len()],
            centered: false,
            mean_before_centering: 0.0,
        }
    }

    #[test]
    fn half_hour_means() {
        let tweets = [
            (at("09:05:00"), 0.5),
            (at("09:20:00"), -0.1),
            (at("09:45:00"), 0.3),
        ];
        let s = aggregate(&tweets, Bucket::HalfHour).unwrap();
        assert_eq!(s.bucket_start, vec![at("09:00:00"), at("09:30:00")]);
        assert!((s.score[0] - 0.2).abs() < 1e-15);
        assert!((s.score[1] - 0.3).abs() < 1e-15);
        assert_eq!(s.count, vec![2, 1]);
    }

    #[test]
    fn single_tweet_and_gap_fill() {
        let s = aggregate(&[(at("10:10:00"), -0.4)], Bucket::HalfHour).unwrap();
        assert_eq!(s.score, vec![-0.4]);

        let tweets = [(at("09:00:00"), 0.4), (at("10:00:00"), 0.0)];
        let s = aggregate(&tweets, Bucket::HalfHour).unwrap();
        assert_eq!(s.count, vec![1, 0, 1]);
        assert!((s.score[1] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn aggregate_rejects_empty_and_out_of_range() {
        assert!(matches!(
            aggregate(&[], Bucket::Day),
            Err(Error::NoScoredTweets)
        ));
        assert!(matches!(
            aggregate(&[(at("09:00:00"), 1.5)], Bucket::Day),
            Err(Error::ScoreOutOfRange(_))
        ));
    }

    #[test]
    fn fill_linear_extends_ends() {
        assert_eq!(
            fill_linear(&[None, Some(1.0), None, Some(3.0), None]),
            vec![1.0, 1.0, 2.0, 3.0, 3.0]
        );
    }

    #[test]
    fn daily_is_mean_of_buckets() {
        let tweets = [
            (at("09:00:00"), 0.4),
            (at("10:00:00"), 0.0),
            (at("23:59:00"), 0.8),
            (parse_timestamp("2020-03-13T00:10:00Z").unwrap(), -0.2),
        ];
        let half = aggregate(&tweets, Bucket::HalfHour).unwrap();
        let day = half.daily().unwrap();
        assert_eq!(day.len(), 2);
        let first_day = &half.score[..half.len() - 1];
        assert!((day.score[0] - mean(first_day)).abs() < 1e-15);
        assert_eq!(day.score[1], -0.2);
        assert_eq!(day.count, vec![3, 1]);
        assert_eq!(day.value_on(NaiveDate::from_ymd_opt(2020, 3, 13).unwrap()), Some(-0.2));
    }

    #[test]
    fn center_examples() {
        let c = series(&[0.2, 0.4, 0.6]).center().unwrap();
        for (got, want) in c.score.iter().zip([-0.2, 0.0, 0.2]) {
            assert!((got - want).abs() < 1e-15);
        }
        assert!((c.mean_before_centering - 0.4).abs() < 1e-15);
        assert!(c.centered);

        let z = series(&[0.0, 0.0]).center().unwrap();
        assert_eq!(z.score, vec![0.0, 0.0]);
        assert_eq!(z.mean_before_centering, 0.0);

        let one = series(&[0.3]).center().unwrap();
        assert_eq!(one.score, vec![0.0]);
        assert_eq!(one.mean_before_centering, 0.3);

        assert!(matches!(c.center(), Err(Error::AlreadyCentered)));
    }

    #[test]
    fn csv_round_trip() {
        let s = series(&[0.25, -0.5, 0.125]);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("bucket_start,score,count\n2020-03-12T00:00:00Z,0.25,1\n"));
        assert_eq!(SentimentSeries::read_csv(buf.as_slice()).unwrap(), s);
    }

    proptest! {
        #[test]
        fn center_annihilates_mean_and_keeps_order(scores in proptest::collection::vec(-1.0f64..1.0, 1..200)) {
            let s = series(&scores);
            let c = s.center().unwrap();
            prop_assert!(mean(&c.score).abs() < 1e-12);
            let back = c.uncenter();
            for (a, b) in back.score.iter().zip(&scores) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            for i in 0..scores.len() {
                for j in 0..scores.len() {
                    if scores[i] < scores[j] {
                        prop_assert!(c.score[i] <= c.score[j]);
                    }
                }
            }
        }

        #[test]
        fn permuting_equal_timestamps_keeps_bucket_mean(
            scores in proptest::collection::vec(-1.0f64..1.0, 1..30),
            rot in 0usize..30,
        ) {
            let t = at("12:00:00");
            let a: Vec<_> = scores.iter().map(|&s| (t, s)).collect();
            let mut b = a.clone();
            let k = rot % b.len();
            b.rotate_left(k);
            let sa = aggregate(&a, Bucket::HalfHour).unwrap();
            let sb = aggregate(&b, Bucket::HalfHour).unwrap();
            prop_assert!((mean(&sa.score) - mean(&sb.score)).abs() < 1e-12);
        }
    }
}
