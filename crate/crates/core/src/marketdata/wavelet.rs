//! Multi-level periodic discrete wavelet transform with Coiflet-3 filters.

use crate::error::{Error, Result};

/// coif3 decomposition low-pass filter (18 taps).
pub const COIF3_DEC_LO: [f64; 18] = [
    -3.459977319727278e-05,
    -7.0983302506379e-05,
    0.0004662169598204029,
    0.0011175187708306303,
    -0.0025745176881367972,
    -0.009007976136730624,
    0.015880544863669452,
    0.03455502757329774,
    -0.08230192710629983,
    -0.07179982161915484,
    0.42848347637737,
    0.7937772226260872,
    0.40517690240911824,
    -0.06112339000297255,
    -0.06577191128146936,
    0.023452696142077168,
    0.007782596425672746,
    -0.003793512864380802,
];

/// An orthogonal two-channel filter bank.
#[derive(Debug, Clone)]
pub struct Wavelet {
    pub name: &'static str,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Wavelet {
    pub fn coif3() -> Self {
        Self::from_lowpass("coif3", &COIF3_DEC_LO)
    }

    /// High-pass is the alternating flip of the low-pass.
    pub fn from_lowpass(name: &'static str, lo: &[f64]) -> Self {
        let n = lo.len();
        let hi = (0..n)
            .map(|k| {
                let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
                sign * lo[n - 1 - k]
            })
            .collect();
        Wavelet {
            name,
            lo: lo.to_vec(),
            hi,
        }
    }

    pub fn taps(&self) -> usize {
        self.lo.len()
    }

    /// Unit energy, `sqrt(2)` DC gain and orthogonality to even shifts.
    pub fn check_orthonormal(&self, tol: f64) -> Result<()> {
        let n = self.lo.len();
        let energy: f64 = self.lo.iter().map(|h| h * h).sum();
        let gain: f64 = self.lo.iter().sum();
        if (energy - 1.0).abs() > tol || (gain - std::f64::consts::SQRT_2).abs() > tol {
            return Err(Error::Wavelet(format!(
                "{}: energy {energy}, dc gain {gain}",
                self.name
            )));
        }
        for shift in (2..n).step_by(2) {
            let dot: f64 = (0..n - shift).map(|k| self.lo[k] * self.lo[k + shift]).sum();
            if dot.abs() > tol {
                return Err(Error::Wavelet(format!(
                    "{}: shift {shift} correlation {dot}",
                    self.name
                )));
            }
        }
        Ok(())
    }

    /// One analysis step. Odd inputs are padded by repeating the last
    /// sample, so the output has `ceil(len / 2)` coefficients per channel.
    pub fn analyze(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut padded;
        let x = if x.len() % 2 == 1 {
            padded = x.to_vec();
            padded.push(*x.last().unwrap());
            &padded[..]
        } else {
            x
        };
        let n = x.len() as isize;
        let half = self.taps() as isize / 2;
        let mut approx = Vec::with_capacity(x.len() / 2);
        let mut detail = Vec::with_capacity(x.len() / 2);
        for i in 0..n / 2 {
            let (mut a, mut d) = (0.0, 0.0);
            for (k, (h, g)) in self.lo.iter().zip(&self.hi).enumerate() {
                let idx = (2 * i + half - k as isize).rem_euclid(n) as usize;
                a += h * x[idx];
                d += g * x[idx];
            }
            approx.push(a);
            detail.push(d);
        }
        (approx, detail)
    }

    /// Inverse of [`analyze`](Self::analyze), truncated to `len` samples.
    pub fn synthesize(&self, approx: &[f64], detail: &[f64], len: usize) -> Vec<f64> {
        let n = 2 * approx.len();
        let half = self.taps() as isize / 2;
        let mut x = vec![0.0; n];
        for i in 0..approx.len() {
            for (k, (h, g)) in self.lo.iter().zip(&self.hi).enumerate() {
                let idx = (2 * i as isize + half - k as isize).rem_euclid(n as isize) as usize;
                x[idx] += h * approx[i] + g * detail[i];
            }
        }
        x.truncate(len);
        x
    }
}

/// Coarsest approximation plus details ordered coarsest first.
#[derive(Debug, Clone, PartialEq)]
pub struct Pyramid {
    pub approx: Vec<f64>,
    pub details: Vec<Vec<f64>>,
    /// Signal length entering each level, finest first.
    pub lengths: Vec<usize>,
}

impl Pyramid {
    pub fn levels(&self) -> usize {
        self.details.len()
    }

    /// Finest-scale detail coefficients.
    pub fn finest(&self) -> &[f64] {
        self.details.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

pub fn forward(wavelet: &Wavelet, values: &[f64], levels: usize) -> Result<Pyramid> {
    if levels < 1 {
        return Err(Error::Wavelet("levels must be at least 1".into()));
    }
    let needed = 1usize
        .checked_shl(levels as u32)
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::Wavelet(format!("{levels} levels is too many")))?;
    if values.len() < needed {
        return Err(Error::Wavelet(format!(
            "series of length {} is too short for {levels} levels (need {needed})",
            values.len()
        )));
    }
    let mut approx = values.to_vec();
    let mut details = Vec::with_capacity(levels);
    let mut lengths = Vec::with_capacity(levels);
    for _ in 0..levels {
        lengths.push(approx.len());
        let (a, d) = wavelet.analyze(&approx);
        details.push(d);
        approx = a;
    }
    details.reverse();
    Ok(Pyramid {
        approx,
        details,
        lengths,
    })
}

pub fn inverse(wavelet: &Wavelet, pyramid: &Pyramid) -> Result<Vec<f64>> {
    let levels = pyramid.levels();
    if levels == 0 || pyramid.lengths.len() != levels {
        return Err(Error::Wavelet("pyramid has no levels".into()));
    }
    let mut approx = pyramid.approx.clone();
    for (level, detail) in pyramid.details.iter().enumerate() {
        let len = pyramid.lengths[levels - 1 - level];
        if detail.len() != approx.len() || len.div_ceil(2) != approx.len() {
            return Err(Error::Wavelet(format!(
                "coefficient lengths do not match at level {}",
                levels - level
            )));
        }
        approx = wavelet.synthesize(&approx, detail, len);
    }
    Ok(approx)
}

/// Forward (`coefficients = None`) or inverse transform in one entry point.
pub enum Transformed {
    Coefficients(Pyramid),
    Signal(Vec<f64>),
}

pub fn wavelet_transform(
    values: &[f64],
    levels: usize,
    inverse_from: Option<&Pyramid>,
) -> Result<Transformed> {
    let w = Wavelet::coif3();
    match inverse_from {
        None => forward(&w, values, levels).map(Transformed::Coefficients),
        Some(p) => {
            if p.levels() != levels {
                return Err(Error::Wavelet(format!(
                    "pyramid has {} levels, asked for {levels}",
                    p.levels()
                )));
            }
            inverse(&w, p).map(Transformed::Signal)
        }
    }
}
