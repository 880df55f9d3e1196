use chrono::{Days, NaiveDate};

use super::{Bar, PriceSeries, Provenance};
use crate::error::{Error, Result};

/// Number of nodes in the local interpolation stencil (a cubic).
pub const STENCIL: usize = 4;

/// Lagrange polynomial through `(xs[i], ys[i])` evaluated at `x`.
pub fn lagrange_eval(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    let mut total = 0.0;
    for (i, (&xi, &yi)) in xs.iter().zip(ys).enumerate() {
        let mut basis = 1.0;
        for (j, &xj) in xs.iter().enumerate() {
            if i != j {
                basis *= (x - xj) / (xi - xj);
            }
        }
        total += yi * basis;
    }
    total
}

fn ordinal(origin: NaiveDate, d: NaiveDate) -> f64 {
    (d - origin).num_days() as f64
}

/// Expands a trading-day series to every calendar day between its first
/// and last rows.
///
/// Each missing day is filled column by column with the cubic through the
/// four nearest existing rows, two on each side when available and shifted
/// inward at the ends. Existing rows are copied through untouched and new
/// rows are marked [`Provenance::Interpolated`]. Interpolated volume is
/// clamped at zero.
pub fn fill_calendar(series: &PriceSeries) -> Result<PriceSeries> {
    let n = series.len();
    if n < STENCIL {
        return Err(Error::InsufficientNodes {
            needed: STENCIL,
            got: n,
        });
    }
    let origin = series.date[0];
    let xs: Vec<f64> = series.date.iter().map(|d| ordinal(origin, *d)).collect();
    let columns = [
        &series.open,
        &series.high,
        &series.low,
        &series.close,
        &series.volume,
    ];

    let mut out = PriceSeries::empty();
    for i in 0..n {
        out.push(series.bar(i), series.provenance[i]);
        if i + 1 == n {
            break;
        }
        let mut day = series.date[i];
        loop {
            day = day + Days::new(1);
            if day >= series.date[i + 1] {
                break;
            }
            // first stencil node is two rows left of the gap, clamped
            let start = (i + 1).saturating_sub(2).min(n - STENCIL);
            let nodes = start..start + STENCIL;
            let x = ordinal(origin, day);
            let mut v = [0.0; 5];
            for (slot, col) in v.iter_mut().zip(columns) {
                *slot = lagrange_eval(&xs[nodes.clone()], &col[nodes.clone()], x);
            }
            out.push(
                Bar {
                    date: day,
                    open: v[0],
                    high: v[1],
                    low: v[2],
                    close: v[3],
                    volume: v[4].max(0.0),
                },
                Provenance::Interpolated,
            );
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2020, 9, 1).unwrap() + Days::new(day as u64)
    }

    fn series_from(days: &[u32], f: impl Fn(f64) -> f64) -> PriceSeries {
        PriceSeries::from_bars(days.iter().map(|&k| {
            let v = f(k as f64);
            Bar {
                date: d(k),
                open: v,
                high: v + 1.0,
                low: v - 0.5,
                close: v,
                volume: 1000.0 + v,
            }
        }))
        .unwrap()
    }

    // Direct polynomial evaluation, independent of the Lagrange form.
    fn horner(coeffs: &[f64], x: f64) -> f64 {
        coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    #[test]
    fn linear_gap() {
        // 4 nodes on a line, one missing day in the middle
        let s = series_from(&[0, 2, 3, 4], |x| 1.0 + x);
        let f = fill_calendar(&s).unwrap();
        assert_eq!(f.len(), 5);
        assert!((f.close[1] - 2.0).abs() < 1e-12);
        assert_eq!(f.provenance[1], Provenance::Interpolated);
    }

    #[test]
    fn quadratic_reproduced() {
        let s = series_from(&[0, 1, 3, 4], |x| x * x + 1.0);
        let f = fill_calendar(&s).unwrap();
        assert!((f.close[2] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn cubic_reproduced() {
        let s = series_from(&[0, 1, 2, 4], |x| x * x * x + 1.0);
        let f = fill_calendar(&s).unwrap();
        assert!((f.close[3] - horner(&[1.0, 0.0, 0.0, 1.0], 3.0)).abs() < 1e-12);
        assert!((f.close[3] - 28.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_nodes() {
        let s = series_from(&[0, 2, 4], |x| 1.0 + x);
        assert!(matches!(
            fill_calendar(&s),
            Err(Error::InsufficientNodes { needed: 4, got: 3 })
        ));
    }

    #[test]
    fn volume_never_negative() {
        let mut s = series_from(&[0, 1, 2, 6, 7], |x| 10.0 + x);
        s.volume = vec![1000.0, 10.0, 0.0, 0.0, 1000.0];
        let f = fill_calendar(&s).unwrap();
        assert!(f.volume.iter().all(|v| *v >= 0.0));
    }

    proptest! {
        #[test]
        fn exact_on_cubics_and_observed_rows_untouched(
            coeffs in proptest::collection::vec(-1.0f64..1.0, 4),
            gaps in proptest::collection::vec(1u32..4, 4..20),
        ) {
            let mut days = vec![0u32];
            for g in &gaps {
                days.push(days.last().unwrap() + g);
            }
            let poly = |x: f64| 500.0 + horner(&coeffs, x / 10.0);
            let s = series_from(&days, poly);
            let f = fill_calendar(&s).unwrap();
            prop_assert!(f.ensure_contiguous().is_ok());
            prop_assert_eq!(f.len() as u32, days.last().unwrap() + 1);
            for i in 0..f.len() {
                let x = i as f64;
                prop_assert!((f.close[i] - poly(x)).abs() < 1e-9);
                if let Some(j) = s.index_of(f.date[i]) {
                    prop_assert_eq!(f.close[i].to_bits(), s.close[j].to_bits());
                    prop_assert_eq!(f.open[i].to_bits(), s.open[j].to_bits());
                    prop_assert_eq!(f.provenance[i], Provenance::Observed);
                }
            }
        }
    }
}
