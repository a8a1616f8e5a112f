//! Thin least-squares helpers over `nalgebra`.

use alloc::vec::Vec;
#[allow(unused_imports)] // inherent methods shadow it when `std` is linked
use num_traits::Float;

use nalgebra::{DMatrix, DVector};

use crate::error::RegressionError;

/// Designs above this 2-norm condition number are treated as singular.
pub const MAX_CONDITION: f64 = 1e8;

#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub coefficients: DVector<f64>,
    pub residuals: DVector<f64>,
    pub condition_number: f64,
}

/// Ratio of largest to smallest singular value.
pub fn condition_number(x: &DMatrix<f64>) -> f64 {
    let sv = x.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Solves `min ||y - X b||` through a Householder QR factorization.
pub fn least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<LeastSquares, RegressionError> {
    let (n, k) = x.shape();
    if n < k || k == 0 {
        return Err(RegressionError::TooFewRows { rows: n, cols: k });
    }
    let cond = condition_number(x);
    if !cond.is_finite() || cond > MAX_CONDITION {
        return Err(RegressionError::Singular(cond));
    }
    let qr = x.clone().qr();
    let qty = qr.q().transpose() * y;
    let coefficients = qr.r().solve_upper_triangular(&qty).ok_or(RegressionError::Singular(cond))?;
    let residuals = y - x * &coefficients;
    Ok(LeastSquares { coefficients, residuals, condition_number: cond })
}

/// Inverse of a symmetric positive-definite matrix, falling back to LU.
pub fn invert_symmetric(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if let Some(ch) = a.clone().cholesky() {
        return Some(ch.inverse());
    }
    a.clone().try_inverse()
}

/// Square roots of the diagonal of a covariance matrix; `NaN` where the
/// entry is not strictly positive.
pub fn standard_errors(cov: &DMatrix<f64>) -> Vec<f64> {
    (0..cov.nrows())
        .map(|i| {
            let d = cov[(i, i)];
            if d > 0.0 && d.is_finite() {
                d.sqrt()
            } else {
                f64::NAN
            }
        })
        .collect()
}

/// Inverse of the observed information `-H`, with `H` the Hessian of the
/// log-likelihood.
pub fn information_covariance(hess: &[Vec<f64>]) -> Option<DMatrix<f64>> {
    let k = hess.len();
    DMatrix::from_fn(k, k, |i, j| -hess[i][j]).try_inverse()
}

/// Bartlett-weighted long-run covariance of per-observation score rows
/// (`scores[t][param]`); bandwidth 0 gives the outer-product sum.
pub fn long_run_covariance(scores: &[Vec<f64>], bandwidth: usize, k: usize) -> DMatrix<f64> {
    let n = scores.len();
    let s = DMatrix::from_fn(n, k, |t, i| scores[t][i]);
    let mut meat = s.transpose() * &s;
    for lag in 1..=bandwidth.min(n.saturating_sub(1)) {
        let w = 1.0 - lag as f64 / (bandwidth as f64 + 1.0);
        let gamma = s.rows(lag, n - lag).transpose() * s.rows(0, n - lag);
        meat += (&gamma + gamma.transpose()) * w;
    }
    meat
}

/// Sandwich (quasi-ML) standard errors `H^-1 B H^-1`.
pub fn sandwich_standard_errors(scores: &[Vec<f64>], hess: &[Vec<f64>], bandwidth: usize, k: usize) -> Vec<f64> {
    match information_covariance(hess) {
        Some(h_inv) => standard_errors(&(&h_inv * long_run_covariance(scores, bandwidth, k) * &h_inv)),
        None => alloc::vec![f64::NAN; k],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_linear_response_has_zero_residuals() {
        let x = DMatrix::from_fn(20, 3, |i, j| match j {
            0 => 1.0,
            1 => i as f64,
            _ => ((i * i) % 7) as f64,
        });
        let beta = DVector::from_vec(alloc::vec![0.5, -2.0, 3.25]);
        let y = &x * &beta;
        let fit = least_squares(&x, &y).unwrap();
        assert!(fit.residuals.amax() < 1e-10);
        assert!((fit.coefficients - beta).amax() < 1e-10);
    }

    #[test]
    fn duplicated_column_is_singular() {
        let x = DMatrix::from_fn(10, 3, |i, j| if j == 0 { 1.0 } else { i as f64 });
        let y = DVector::from_element(10, 1.0);
        assert!(matches!(least_squares(&x, &y), Err(RegressionError::Singular(_))));
    }
}
