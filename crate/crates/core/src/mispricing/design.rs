//! The standardized regressor matrix of the mispricing regression.
//!
//! Amount, Strike, Maturity and Volume enter in logs; all six continuous
//! regressors are centered and scaled to unit sample standard deviation;
//! the Kind (call = 1) and Type (ATM = 1) dummies are left as is; an
//! intercept column comes first.

#[allow(unused_imports)] // inherent methods shadow it when `std` is linked
use num_traits::Float;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::rows::{Exclusion, MispricingRow};
use crate::error::RegressionError;
use crate::market_data::{Moneyness, OptionKind};

pub const CONTINUOUS: [&str; 6] = ["Amount", "Strike", "Maturity", "Return", "Volume", "Volatility"];
pub const DUMMIES: [&str; 2] = ["Kind", "Type"];
/// Continuous regressors that enter in logs.
const LOGGED: [bool; 6] = [true, true, true, false, true, false];

#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    /// Column names, intercept first.
    pub names: Vec<String>,
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub trade_ids: Vec<String>,
    /// Mean and sample standard deviation of each continuous regressor
    /// after the log step, before standardization.
    pub location: Vec<f64>,
    pub scale: Vec<f64>,
    pub excluded: Vec<Exclusion>,
}

fn raw_regressors(row: &MispricingRow) -> [f64; 6] {
    [row.amount, row.strike, row.maturity_days as f64, row.underlying_return, row.volume, row.sigma]
}

/// Centers and scales `column` in place; returns `(mean, std)`.
pub fn standardize(column: &mut [f64]) -> (f64, f64) {
    let n = column.len() as f64;
    let mean = column.iter().sum::<f64>() / n;
    let var = column.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    let sd = var.sqrt();
    for v in column.iter_mut() {
        *v = (*v - mean) / sd;
    }
    (mean, sd)
}

fn has_spread(column: &[f64]) -> bool {
    let first = column[0];
    let scale = column.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    column.iter().any(|v| (v - first).abs() > 1e-12 * scale)
}

/// Builds the regression design from mispricing rows, in row order.
pub fn build_design(rows: &[MispricingRow]) -> Result<Design, RegressionError> {
    let mut kept: Vec<(&MispricingRow, [f64; 6])> = Vec::with_capacity(rows.len());
    let mut excluded = Vec::new();
    'rows: for row in rows {
        let mut raw = raw_regressors(row);
        for (j, v) in raw.iter_mut().enumerate() {
            if !v.is_finite() {
                return Err(RegressionError::NonFinite(CONTINUOUS[j]));
            }
            if LOGGED[j] {
                if *v <= 0.0 {
                    excluded.push(Exclusion {
                        trade_id: row.trade_id.clone(),
                        reason: format!("{} is {} before the log transform", CONTINUOUS[j], v),
                    });
                    continue 'rows;
                }
                *v = v.ln();
            }
        }
        if !row.delta_price.is_finite() {
            return Err(RegressionError::NonFinite("response"));
        }
        kept.push((row, raw));
    }
    let n = kept.len();
    let k = 1 + CONTINUOUS.len() + DUMMIES.len();
    if n <= k {
        return Err(RegressionError::TooFewRows { rows: n, cols: k });
    }
    let mut x = DMatrix::<f64>::zeros(n, k);
    let mut location = Vec::with_capacity(6);
    let mut scale = Vec::with_capacity(6);
    for j in 0..CONTINUOUS.len() {
        let mut col: Vec<f64> = kept.iter().map(|(_, raw)| raw[j]).collect();
        if !has_spread(&col) {
            return Err(RegressionError::ZeroVariance(CONTINUOUS[j]));
        }
        let (m, s) = standardize(&mut col);
        location.push(m);
        scale.push(s);
        x.column_mut(1 + j).copy_from_slice(&col);
    }
    for (i, (row, _)) in kept.iter().enumerate() {
        x[(i, 0)] = 1.0;
        x[(i, 7)] = if row.kind == OptionKind::Call { 1.0 } else { 0.0 };
        x[(i, 8)] = if row.moneyness == Moneyness::Atm { 1.0 } else { 0.0 };
    }
    let mut names = Vec::with_capacity(k);
    names.push(String::from("Intercept"));
    names.extend(CONTINUOUS.iter().chain(DUMMIES.iter()).map(|s| String::from(*s)));
    Ok(Design {
        names,
        x,
        y: DVector::from_iterator(n, kept.iter().map(|(r, _)| r.delta_price)),
        trade_ids: kept.iter().map(|(r, _)| r.trade_id.clone()).collect(),
        location,
        scale,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn standardized_column_has_unit_moments() {
        let mut c = vec![3.0, 7.5, -1.0, 2.25, 10.0];
        standardize(&mut c);
        let n = c.len() as f64;
        let mean = c.iter().sum::<f64>() / n;
        let var = c.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 1e-15);
        assert!((var.sqrt() - 1.0).abs() < 1e-15);
    }
}
