//! Portmanteau and ARCH-LM tests on standardized residuals.

use alloc::vec::Vec;
#[allow(unused_imports)] // inherent methods shadow it when `std` is linked
use num_traits::Float;

use nalgebra::{DMatrix, DVector};

use crate::error::DiagnosticError;
use crate::linalg;
use crate::special::chi2_sf;

/// Lag count used when none is configured.
pub const DEFAULT_LAGS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub df: usize,
}

fn check(n: usize, lags: usize) -> Result<(), DiagnosticError> {
    if lags == 0 {
        return Err(DiagnosticError::InvalidLags);
    }
    if n <= lags + 1 {
        return Err(DiagnosticError::TooShort { n, lags });
    }
    Ok(())
}

/// Sample autocorrelations at lags `1..=lags`.
pub fn autocorrelations(x: &[f64], lags: usize) -> Result<Vec<f64>, DiagnosticError> {
    check(x.len(), lags)?;
    let n = x.len();
    let m = x.iter().sum::<f64>() / n as f64;
    let d: Vec<f64> = x.iter().map(|v| v - m).collect();
    let c0: f64 = d.iter().map(|v| v * v).sum();
    if !(c0 > f64::EPSILON * f64::EPSILON * n as f64 * m.abs().max(1.0).powi(2)) {
        return Err(DiagnosticError::Degenerate);
    }
    Ok((1..=lags).map(|k| d[k..].iter().zip(&d[..n - k]).map(|(a, b)| a * b).sum::<f64>() / c0).collect())
}

/// Ljung–Box `Q = n(n+2) sum_k rho_k^2 / (n-k)` against chi-square(`lags`).
pub fn ljung_box(x: &[f64], lags: usize) -> Result<TestResult, DiagnosticError> {
    let rho = autocorrelations(x, lags)?;
    let n = x.len() as f64;
    let q = n * (n + 2.0) * rho.iter().enumerate().map(|(i, r)| r * r / (n - (i + 1) as f64)).sum::<f64>();
    Ok(TestResult { statistic: q, p_value: chi2_sf(q, lags as f64), df: lags })
}

/// Engle's LM test: `(n - lags) R^2` from regressing `x_t^2` on a constant
/// and `x_{t-1}^2 .. x_{t-lags}^2`, against chi-square(`lags`).
pub fn engle_arch(x: &[f64], lags: usize) -> Result<TestResult, DiagnosticError> {
    check(x.len(), lags)?;
    let sq: Vec<f64> = x.iter().map(|v| v * v).collect();
    let rows = sq.len() - lags;
    if rows <= lags + 1 {
        return Err(DiagnosticError::TooShort { n: x.len(), lags });
    }
    let y = DVector::from_iterator(rows, sq[lags..].iter().copied());
    let ybar = y.mean();
    let tss: f64 = y.iter().map(|v| (v - ybar) * (v - ybar)).sum();
    if !(tss > f64::EPSILON * rows as f64 * ybar.abs().max(f64::MIN_POSITIVE).powi(2)) {
        return Err(DiagnosticError::Degenerate);
    }
    let design = DMatrix::from_fn(rows, lags + 1, |r, c| if c == 0 { 1.0 } else { sq[lags + r - c] });
    let r2 = match linalg::least_squares(&design, &y) {
        Ok(fit) => (1.0 - fit.residuals.norm_squared() / tss).clamp(0.0, 1.0),
        // lagged squares perfectly collinear: the pattern is deterministic
        Err(_) => 1.0,
    };
    let stat = rows as f64 * r2;
    Ok(TestResult { statistic: stat, p_value: chi2_sf(stat, lags as f64), df: lags })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn constant_residuals_are_degenerate() {
        let x = vec![1.5; 50];
        assert_eq!(ljung_box(&x, 5), Err(DiagnosticError::Degenerate));
        assert_eq!(engle_arch(&x, 5), Err(DiagnosticError::Degenerate));
    }

    #[test]
    fn lag_guards() {
        let x: Vec<f64> = (0..20).map(|i| (i as f64).sin()).collect();
        assert_eq!(ljung_box(&x, 0), Err(DiagnosticError::InvalidLags));
        assert!(matches!(ljung_box(&x, 19), Err(DiagnosticError::TooShort { .. })));
    }

    #[test]
    fn trending_series_rejects_whiteness() {
        let x: Vec<f64> = (0..500).map(|i| i as f64).collect();
        let r = ljung_box(&x, 10).unwrap();
        assert!(r.p_value < 1e-12);
    }

    #[test]
    fn volatility_bursts_reject_homoskedasticity() {
        let x: Vec<f64> = (0..400)
            .map(|i| {
                let scale = if (i / 5) % 2 == 0 { 1.0 } else { 10.0 };
                if i % 2 == 0 {
                    scale
                } else {
                    -scale
                }
            })
            .collect();
        let r = engle_arch(&x, 10).unwrap();
        assert!(r.p_value < 1e-10);
    }

    #[test]
    fn ljung_box_matches_hand_computation() {
        let x = [1.0, -2.0, 0.5, 3.0, -1.0, 0.0, 2.0, -0.5];
        let m = x.iter().sum::<f64>() / 8.0;
        let d: Vec<f64> = x.iter().map(|v| v - m).collect();
        let c0: f64 = d.iter().map(|v| v * v).sum();
        let r1: f64 = (1..8).map(|t| d[t] * d[t - 1]).sum::<f64>() / c0;
        let r2: f64 = (2..8).map(|t| d[t] * d[t - 2]).sum::<f64>() / c0;
        let q = 8.0 * 10.0 * (r1 * r1 / 7.0 + r2 * r2 / 6.0);
        assert!((ljung_box(&x, 2).unwrap().statistic - q).abs() < 1e-12);
    }
}
