//! Regime subsamples and the calendar volatility path used for pricing.

#[allow(unused_imports)] // inherent methods shadow it when `std` is linked
use num_traits::Float;

use alloc::vec::Vec;

use chrono::NaiveDate;

use super::garch::GarchFit;
use crate::error::DataError;
use crate::market_data::ReturnSeries;
use crate::regime_switching::{RegimeLabel, RegimeLabels};

pub const DEFAULT_ANNUALIZATION: f64 = 365.0;
pub const REALIZED_WINDOW: usize = 7;

/// `sqrt(factor * daily variance) / 100` for variances in percent squared.
pub fn annualize(daily_variance: f64, factor: f64) -> f64 {
    (factor * daily_variance).sqrt() / 100.0
}

/// Days labeled `regime`, concatenated in time order.
pub fn regime_subsample(series: &ReturnSeries, labels: &RegimeLabels, regime: usize) -> ReturnSeries {
    let points = series
        .points
        .iter()
        .filter(|p| labels.label_on(p.date) == Some(RegimeLabel::Regime(regime)))
        .copied()
        .collect();
    ReturnSeries { asset: series.asset.clone(), points }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolPoint {
    pub date: NaiveDate,
    pub sigma_annualized: f64,
    pub label: RegimeLabel,
    /// Regime whose fit supplied the variance.
    pub source_regime: usize,
    /// Carried forward from the most recent labeled day.
    pub inherited: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolatilityPath {
    pub points: Vec<VolPoint>,
    /// Leading uncertain days with no earlier labeled day to inherit from.
    pub unresolved: Vec<NaiveDate>,
    pub annualization: f64,
}

impl VolatilityPath {
    pub fn get(&self, date: NaiveDate) -> Option<&VolPoint> {
        self.points.binary_search_by_key(&date, |p| p.date).ok().map(|i| &self.points[i])
    }

    /// Annualized volatility on `date`, or an alignment error.
    pub fn sigma_on(&self, date: NaiveDate) -> Result<f64, DataError> {
        self.get(date).map(|p| p.sigma_annualized).ok_or(DataError::Alignment { date, what: "volatility path entry" })
    }
}

/// Dated conditional variances from one regime's fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeVariances<'a> {
    pub dates: &'a [NaiveDate],
    pub variances: &'a [f64],
}

impl<'a> From<&'a GarchFit> for RegimeVariances<'a> {
    fn from(fit: &'a GarchFit) -> Self {
        Self { dates: &fit.dates, variances: &fit.variances }
    }
}

/// Builds the daily annualized volatility over `calendar`. Labeled days
/// read the conditional variance of their regime's fit on that date;
/// uncertain days inherit the previous labeled day's value.
pub fn build_vol_path(
    labels: &RegimeLabels,
    fits: [RegimeVariances<'_>; 2],
    calendar: &[NaiveDate],
    annualization: f64,
) -> Result<VolatilityPath, DataError> {
    let mut points: Vec<VolPoint> = Vec::with_capacity(calendar.len());
    let mut unresolved = Vec::new();
    let mut last: Option<(f64, usize)> = None;
    let mut sorted = calendar.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    for date in sorted {
        let label = labels.label_on(date).ok_or(DataError::Alignment { date, what: "regime label" })?;
        match label {
            RegimeLabel::Regime(r) => {
                let fit = fits[r];
                let i = fit
                    .dates
                    .binary_search(&date)
                    .map_err(|_| DataError::Alignment { date, what: "regime GARCH variance" })?;
                let sigma = annualize(fit.variances[i], annualization);
                last = Some((sigma, r));
                points.push(VolPoint { date, sigma_annualized: sigma, label, source_regime: r, inherited: false });
            }
            RegimeLabel::Uncertain => match last {
                Some((sigma, r)) => {
                    points.push(VolPoint { date, sigma_annualized: sigma, label, source_regime: r, inherited: true })
                }
                None => unresolved.push(date),
            },
        }
    }
    Ok(VolatilityPath { points, unresolved, annualization })
}

/// Rolling realized volatility: annualized sample standard deviation of
/// the last `window` returns, dated at the window's last day.
pub fn realized_volatility(series: &ReturnSeries, window: usize, annualization: f64) -> Vec<(NaiveDate, f64)> {
    if window < 2 || series.len() < window {
        return Vec::new();
    }
    series
        .points
        .windows(window)
        .map(|w| {
            let m = w.iter().map(|p| p.value).sum::<f64>() / window as f64;
            let var = w.iter().map(|p| (p.value - m) * (p.value - m)).sum::<f64>() / (window as f64 - 1.0);
            (w[window - 1].date, annualize(var, annualization))
        })
        .collect()
}
