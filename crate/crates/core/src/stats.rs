//! Descriptive statistics.

use alloc::vec::Vec;
#[allow(unused_imports)] // inherent methods shadow it when `std` is linked
use num_traits::Float;

use crate::error::DataError;

/// Summary record of a sample: location, spread, quartiles and the third
/// and fourth standardized moments.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub std: f64,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
    /// Moment skewness `m3 / m2^1.5`; `None` when the sample has zero variance.
    pub skewness: Option<f64>,
    /// Non-excess kurtosis `m4 / m2^2` (a normal sample gives 3); `None` when degenerate.
    pub kurtosis: Option<f64>,
}

impl Summary {
    pub fn is_degenerate(&self) -> bool {
        self.skewness.is_none()
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance with the n - 1 denominator.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Linear-interpolation quantile on a sorted slice (the "type 7" rule).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn describe(xs: &[f64]) -> Result<Summary, DataError> {
    if xs.is_empty() {
        return Err(DataError::InsufficientData { needed: 1, got: 0 });
    }
    let n = xs.len() as f64;
    let mut sorted: Vec<f64> = xs.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let m = sorted.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in &sorted {
        let d = x - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let std = if xs.len() > 1 { (m2 / (n - 1.0)).sqrt() } else { 0.0 };
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let scale = m.abs().max(1.0);
    let degenerate = m2 <= (f64::EPSILON * scale) * (f64::EPSILON * scale);
    Ok(Summary {
        count: xs.len(),
        mean: m,
        std,
        min: sorted[0],
        q25: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        q75: quantile_sorted(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
        skewness: (!degenerate).then(|| m3 / m2.powf(1.5)),
        kurtosis: (!degenerate).then(|| m4 / (m2 * m2)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_is_degenerate() {
        let s = describe(&[5.0, 5.0, 5.0, 5.0]).unwrap();
        assert_eq!(s.std, 0.0);
        assert!(s.is_degenerate());
        assert_eq!(s.kurtosis, None);
    }

    #[test]
    fn symmetric_series_has_zero_skew() {
        let s = describe(&[-1.0, 0.0, 1.0]).unwrap();
        assert_eq!(s.skewness, Some(0.0));
        assert_eq!(s.mean, 0.0);
        assert!((s.std - 1.0).abs() < 1e-15);
        assert_eq!(s.kurtosis, Some(1.5));
    }

    #[test]
    fn quartiles_interpolate_linearly() {
        let s = describe(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!((s.min, s.q25, s.median, s.q75, s.max), (1.0, 1.75, 2.5, 3.25, 4.0));
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(matches!(describe(&[]), Err(DataError::InsufficientData { .. })));
    }
}
