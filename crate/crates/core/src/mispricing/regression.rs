//! Two-step feasible GLS with Newey–West inference and collinearity
//! diagnostics.
//!
//! Step 1 is OLS; step 2 regresses the squared OLS residuals on the same
//! design and floors the fitted values to form the diagonal of `Omega`;
//! step 3 is weighted least squares with weights `1 / Omega_jj`. Inference
//! uses a Bartlett-kernel HAC covariance of the weighted regression, with
//! observations in row order.

#[allow(unused_imports)] // inherent methods shadow it when `std` is linked
use num_traits::Float;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::RegressionError;
use crate::linalg::{self, LeastSquares};
use crate::special::{chi2_sf, f_sf, student_t_two_sided};

/// Fitted auxiliary variances are floored at this fraction of the OLS
/// residual variance.
pub const DEFAULT_FLOOR_RATIO: f64 = 1e-6;

/// `floor(4 (n / 100)^(2/9))`.
pub fn auto_bandwidth(n: usize) -> usize {
    (4.0 * (n as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize
}

pub fn ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<LeastSquares, RegressionError> {
    linalg::least_squares(x, y)
}

/// Weighted least squares with `Omega = diag(omega)`; residuals are on the
/// original scale.
pub fn gls_with_omega(x: &DMatrix<f64>, y: &DVector<f64>, omega: &[f64]) -> Result<LeastSquares, RegressionError> {
    if omega.len() != x.nrows() || omega.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
        return Err(RegressionError::Domain("Omega diagonal must be positive and match the rows".into()));
    }
    let (xw, yw) = whiten(x, y, omega);
    let fit = linalg::least_squares(&xw, &yw)?;
    let residuals = y - x * &fit.coefficients;
    Ok(LeastSquares { coefficients: fit.coefficients, residuals, condition_number: fit.condition_number })
}

fn whiten(x: &DMatrix<f64>, y: &DVector<f64>, omega: &[f64]) -> (DMatrix<f64>, DVector<f64>) {
    let mut xw = x.clone();
    let mut yw = y.clone();
    for (i, w) in omega.iter().enumerate() {
        let s = 1.0 / w.sqrt();
        xw.row_mut(i).scale_mut(s);
        yw[i] *= s;
    }
    (xw, yw)
}

/// Newey–West covariance of OLS coefficients with Bartlett weights
/// `1 - l / (L + 1)`; `L = 0` is White's estimator.
pub fn newey_west_cov(
    x: &DMatrix<f64>,
    residuals: &DVector<f64>,
    bandwidth: usize,
) -> Result<DMatrix<f64>, RegressionError> {
    let (n, k) = x.shape();
    if bandwidth >= n {
        return Err(RegressionError::Domain(format!("HAC bandwidth {bandwidth} must be below the sample size {n}")));
    }
    let scores: Vec<Vec<f64>> = (0..n).map(|i| x.row(i).iter().map(|v| v * residuals[i]).collect()).collect();
    let meat = linalg::long_run_covariance(&scores, bandwidth, k);
    let bread = linalg::invert_symmetric(&(x.transpose() * x)).ok_or(RegressionError::Singular(f64::INFINITY))?;
    let cov = &bread * meat * &bread;
    Ok((&cov + cov.transpose()) * 0.5)
}

/// Heteroskedasticity-consistent (HC0) covariance.
pub fn white_cov(x: &DMatrix<f64>, residuals: &DVector<f64>) -> Result<DMatrix<f64>, RegressionError> {
    let bread = linalg::invert_symmetric(&(x.transpose() * x)).ok_or(RegressionError::Singular(f64::INFINITY))?;
    let mut meat = DMatrix::<f64>::zeros(x.ncols(), x.ncols());
    for i in 0..x.nrows() {
        let xi = x.row(i).transpose();
        meat += &xi * xi.transpose() * (residuals[i] * residuals[i]);
    }
    Ok(&bread * meat * &bread)
}

fn is_constant(col: nalgebra::DVectorView<'_, f64>) -> bool {
    let first = col[0];
    col.iter().all(|v| *v == first) && first != 0.0
}

/// Variance inflation factor of every non-constant column, `NaN` for
/// constant columns. `R^2` is centered when the other columns include a
/// constant and uncentered otherwise.
pub fn vif(x: &DMatrix<f64>, names: &[String]) -> Result<Vec<f64>, RegressionError> {
    let k = x.ncols();
    let constant: Vec<bool> = (0..k).map(|j| is_constant(x.column(j))).collect();
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        if constant[j] {
            out.push(f64::NAN);
            continue;
        }
        let others: Vec<usize> = (0..k).filter(|&c| c != j).collect();
        let collinear = || RegressionError::Collinear(names.get(j).cloned().unwrap_or_else(|| format!("column {j}")));
        let target = x.column(j).into_owned();
        let r2 = if others.is_empty() {
            0.0
        } else {
            let z = x.select_columns(&others);
            let fit = linalg::least_squares(&z, &target).map_err(|_| collinear())?;
            let ssr = fit.residuals.norm_squared();
            let tss = if others.iter().any(|&c| constant[c]) {
                let m = target.mean();
                target.iter().map(|v| (v - m) * (v - m)).sum::<f64>()
            } else {
                target.norm_squared()
            };
            1.0 - ssr / tss
        };
        if r2 >= 1.0 - 1e-12 || !r2.is_finite() {
            return Err(collinear());
        }
        out.push(1.0 / (1.0 - r2));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FglsOptions {
    /// HAC bandwidth; `None` selects [`auto_bandwidth`].
    pub bandwidth: Option<usize>,
    pub floor_ratio: f64,
}

impl Default for FglsOptions {
    fn default() -> Self {
        Self { bandwidth: None, floor_ratio: DEFAULT_FLOOR_RATIO }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionResult {
    pub names: Vec<String>,
    pub n_obs: usize,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub p_values: Vec<f64>,
    /// Step-1 OLS coefficients.
    pub ols_coefficients: Vec<f64>,
    /// Auxiliary-regression coefficients.
    pub aux_coefficients: Vec<f64>,
    /// Diagonal of `Omega` after flooring.
    pub omega: Vec<f64>,
    pub omega_floor: f64,
    pub floored: usize,
    /// Every fitted variance hit the floor; the weights are degenerate.
    pub degenerate_weights: bool,
    /// GLS residuals on the original scale.
    pub residuals: Vec<f64>,
    pub response: Vec<f64>,
    /// Weighted `R^2` of the GLS fit.
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub f_stat: f64,
    pub f_p_value: f64,
    /// Joint test of all slopes with the HAC covariance.
    pub wald_stat: f64,
    pub wald_p_value: f64,
    pub condition_number: f64,
    pub vif: Vec<f64>,
    pub bandwidth: usize,
    pub covariance: DMatrix<f64>,
}

/// Weighted `R^2` (centered around the weighted mean) and its adjusted form.
pub fn weighted_r_squared(y: &[f64], residuals: &[f64], omega: &[f64], k: usize) -> (f64, f64) {
    let w: Vec<f64> = omega.iter().map(|o| 1.0 / o).collect();
    let sw: f64 = w.iter().sum();
    let ybar = y.iter().zip(&w).map(|(v, wi)| v * wi).sum::<f64>() / sw;
    let ssr: f64 = residuals.iter().zip(&w).map(|(e, wi)| wi * e * e).sum();
    let tss: f64 = y.iter().zip(&w).map(|(v, wi)| wi * (v - ybar) * (v - ybar)).sum();
    let n = y.len() as f64;
    let r2 = 1.0 - ssr / tss;
    (r2, 1.0 - (1.0 - r2) * (n - 1.0) / (n - k as f64))
}

/// Two-step FGLS of `y` on `x` (intercept in column 0).
pub fn fit_fgls(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    names: &[String],
    options: &FglsOptions,
) -> Result<RegressionResult, RegressionError> {
    let n = x.nrows();
    let step1 = ols(x, y)?;
    let resid_var = step1.residuals.norm_squared() / n as f64;
    let sq = step1.residuals.map(|e| e * e);
    let aux = ols(x, &sq)?;
    let fitted = x * &aux.coefficients;
    let floor = options.floor_ratio * resid_var.max(f64::MIN_POSITIVE);
    let mut floored = 0;
    let omega: Vec<f64> = fitted
        .iter()
        .map(|f| {
            if *f > floor {
                *f
            } else {
                floored += 1;
                floor
            }
        })
        .collect();
    fit_with_omega(
        x,
        y,
        names,
        omega,
        floor,
        floored,
        step1.coefficients.iter().copied().collect(),
        aux.coefficients.iter().copied().collect(),
        options,
    )
}

/// Step 3 and inference for a given `Omega` diagonal.
#[allow(clippy::too_many_arguments)]
fn fit_with_omega(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    names: &[String],
    omega: Vec<f64>,
    omega_floor: f64,
    floored: usize,
    ols_coefficients: Vec<f64>,
    aux_coefficients: Vec<f64>,
    options: &FglsOptions,
) -> Result<RegressionResult, RegressionError> {
    let (n, k) = x.shape();
    let gls = gls_with_omega(x, y, &omega)?;
    let (xw, _) = whiten(x, y, &omega);
    let ew = DVector::from_iterator(n, gls.residuals.iter().zip(&omega).map(|(e, w)| e / w.sqrt()));
    let bandwidth = options.bandwidth.unwrap_or_else(|| auto_bandwidth(n));
    let cov = newey_west_cov(&xw, &ew, bandwidth)?;
    let beta: Vec<f64> = gls.coefficients.iter().copied().collect();
    let std_errors = linalg::standard_errors(&cov);
    let df = (n - k) as f64;
    let t_stats: Vec<f64> = beta.iter().zip(&std_errors).map(|(b, s)| b / s).collect();
    let p_values = t_stats.iter().map(|t| student_t_two_sided(*t, df)).collect();
    let residuals: Vec<f64> = gls.residuals.iter().copied().collect();
    let response: Vec<f64> = y.iter().copied().collect();
    let (r2, adj) = weighted_r_squared(&response, &residuals, &omega, k);
    let q = (k - 1) as f64;
    let f_stat = (r2 / q) / ((1.0 - r2) / df);
    let slopes = cov.view((1, 1), (k - 1, k - 1)).into_owned();
    let b = DVector::from_iterator(k - 1, beta[1..].iter().copied());
    let wald_stat = linalg::invert_symmetric(&slopes).map_or(f64::NAN, |inv| (b.transpose() * inv * &b)[(0, 0)]);
    let names_vec: Vec<String> = names.to_vec();
    Ok(RegressionResult {
        vif: vif(x, &names_vec)?,
        condition_number: linalg::condition_number(x),
        names: names_vec,
        n_obs: n,
        std_errors,
        t_stats,
        p_values,
        ols_coefficients,
        aux_coefficients,
        degenerate_weights: floored == n,
        omega,
        omega_floor,
        floored,
        residuals,
        response,
        r_squared: r2,
        adj_r_squared: adj,
        f_stat,
        f_p_value: f_sf(f_stat, q, df),
        wald_stat,
        wald_p_value: chi2_sf(wald_stat, q),
        bandwidth,
        covariance: cov,
        coefficients: beta,
    })
}

/// FGLS with a caller-supplied `Omega` diagonal (step 2 skipped).
pub fn fit_gls_fixed_omega(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    names: &[String],
    omega: Vec<f64>,
    options: &FglsOptions,
) -> Result<RegressionResult, RegressionError> {
    let step1 = ols(x, y)?;
    fit_with_omega(x, y, names, omega, 0.0, 0, step1.coefficients.iter().copied().collect(), Vec::new(), options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|j| format!("x{j}")).collect()
    }

    #[test]
    fn bandwidth_rule() {
        assert_eq!(auto_bandwidth(100), 4);
        assert_eq!(auto_bandwidth(1306), 7);
        assert_eq!(auto_bandwidth(10), 2);
    }

    #[test]
    fn orthonormal_design_gives_inner_products() {
        let s = 0.5;
        let x = DMatrix::from_row_slice(4, 2, &[s, s, s, -s, s, s, s, -s]);
        let y = DVector::from_vec(vec![1.0, 2.0, -0.5, 4.0]);
        let fit = ols(&x, &y).unwrap();
        let expect = x.transpose() * &y;
        assert!((fit.coefficients - expect).amax() < 1e-14);
    }

    #[test]
    fn vif_of_orthogonal_columns_is_one() {
        let x = DMatrix::from_row_slice(4, 3, &[1.0, 1.0, 1.0, 1.0, 1.0, -1.0, 1.0, -1.0, 1.0, 1.0, -1.0, -1.0]);
        let v = vif(&x, &names(3)).unwrap();
        assert!(v[0].is_nan());
        assert!((v[1] - 1.0).abs() < 1e-12 && (v[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn duplicated_column_is_collinear() {
        let x = DMatrix::from_fn(12, 3, |i, j| match j {
            0 => 1.0,
            _ => (i as f64).sin(),
        });
        assert!(matches!(vif(&x, &names(3)), Err(RegressionError::Collinear(_))));
    }

    #[test]
    fn bandwidth_must_be_below_sample_size() {
        let x = DMatrix::from_element(5, 1, 1.0);
        let e = DVector::from_element(5, 0.1);
        assert!(matches!(newey_west_cov(&x, &e, 5), Err(RegressionError::Domain(_))));
    }
}
