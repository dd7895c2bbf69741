//! Compensated summation, ordered parallel reductions and the small
//! least-squares fits used by the trend reports.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{LabError, Result};

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    /// Merges another partial accumulator, keeping both compensation terms.
    pub fn merge(&mut self, other: &NeumaierSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<NeumaierSum>().value()
}

/// Compensated complex accumulator (real and imaginary parts independently).
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum {
    re: NeumaierSum,
    im: NeumaierSum,
}

impl ComplexSum {
    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Fixed block length for parallel reductions. Block boundaries never depend
/// on the thread count, so results are bit-identical for any pool size.
pub const REDUCTION_BLOCK: usize = 1 << 14;

/// Sums `f(i)` for `i in range` with per-block Neumaier accumulation,
/// combining blocks in index order.
pub fn ordered_par_sum<F>(range: std::ops::Range<usize>, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    if range.is_empty() {
        return 0.0;
    }
    let start = range.start;
    let len = range.end - range.start;
    let blocks = len.div_ceil(REDUCTION_BLOCK);
    let partials: Vec<NeumaierSum> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let lo = start + b * REDUCTION_BLOCK;
            let hi = (lo + REDUCTION_BLOCK).min(range.end);
            (lo..hi).map(&f).collect::<NeumaierSum>()
        })
        .collect();
    let mut total = NeumaierSum::new();
    for p in &partials {
        total.merge(p);
    }
    total.value()
}

/// Coefficients of the two-term model `S(x) ≈ A·x·ln x + B·x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XLogXFit {
    pub a: f64,
    pub b: f64,
}

/// Least-squares fit of `S(x) ≈ A·x·ln x + B·x`.
///
/// Residuals are weighted by `1/x`, i.e. `S/x` is regressed on `ln x`, so
/// every grid point carries comparable weight across decades.
pub fn fit_xlogx(points: &[(f64, f64)]) -> Result<XLogXFit> {
    if points.len() < 3 {
        return Err(LabError::GridTooShort(points.len()));
    }
    let (slope, intercept) = linear_regression(points.iter().map(|&(x, s)| (x.ln(), s / x)))?;
    Ok(XLogXFit { a: slope, b: intercept })
}

/// Slope of `ln|residual|` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(LabError::GridTooShort(points.len()));
    }
    let (slope, _) = linear_regression(points.iter().map(|&(x, r)| (x.ln(), r.abs().ln())))?;
    Ok(slope)
}

fn linear_regression<I: Iterator<Item = (f64, f64)>>(pts: I) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = pts.collect();
    let n = pts.len() as f64;
    let mx = compensated_sum(pts.iter().map(|p| p.0)) / n;
    let my = compensated_sum(pts.iter().map(|p| p.1)) / n;
    let sxx = compensated_sum(pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)));
    let sxy = compensated_sum(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)));
    if !(sxx > 0.0) || !sxy.is_finite() {
        return Err(LabError::InvalidArgument(
            "regression grid needs at least two distinct, finite abscissae".into(),
        ));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Relative residual with a floor of one on the reference magnitude.
#[inline]
pub fn floored_relative(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs().max(1.0)
}

/// Relative residual `|a - b| / |b|` (or `|a - b|` when `b == 0`).
#[inline]
pub fn relative(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        (a - b).abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

/// Renders a double with 15 significant digits and a lowercase exponent.
pub fn fmt_sig15(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.14e}")
    } else {
        format!("{v}")
    }
}
