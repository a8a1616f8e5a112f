//! Daily price series, returns and option-trade records.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use chrono::{DateTime, NaiveDate, Utc};
use core::fmt;
use core::str::FromStr;
#[allow(unused_imports)] // inherent methods shadow it when `std` is linked
use num_traits::Float;

use crate::error::DataError;
use crate::stats::{describe, Summary};

/// Relative tolerance when matching a strike to a grid point of the spot.
pub const GRID_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricePoint {
    pub date: NaiveDate,
    pub close: f64,
    pub volume: f64,
}

/// Sorts points by date and enforces the series invariants (unique dates,
/// positive closes, non-negative volume).
pub fn validate_prices(mut points: Vec<PricePoint>) -> Result<Vec<PricePoint>, DataError> {
    if points.is_empty() {
        return Err(DataError::EmptySeries);
    }
    for p in &points {
        if !p.close.is_finite() || !p.volume.is_finite() {
            return Err(DataError::NonFinite("price series"));
        }
        if p.close <= 0.0 {
            return Err(DataError::NonPositiveClose { date: p.date, close: p.close });
        }
        if p.volume < 0.0 {
            return Err(DataError::NegativeVolume { date: p.date, volume: p.volume });
        }
    }
    points.sort_by_key(|p| p.date);
    if let Some(w) = points.windows(2).find(|w| w[0].date == w[1].date) {
        return Err(DataError::DuplicateDate(w[0].date));
    }
    Ok(points)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReturnKind {
    /// `100 (P_t - P_{t-1}) / P_{t-1}`
    #[default]
    Simple,
    /// `100 ln(P_t / P_{t-1})`
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnPoint {
    pub date: NaiveDate,
    /// Return in percent.
    pub value: f64,
    /// Volume traded on `date`.
    pub volume: f64,
}

/// Dated daily percentage returns of one asset, in date order.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub asset: String,
    pub points: Vec<ReturnPoint>,
}

impl ReturnSeries {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.points.iter().map(|p| p.date).collect()
    }

    pub fn position(&self, date: NaiveDate) -> Option<usize> {
        self.points.binary_search_by_key(&date, |p| p.date).ok()
    }

    pub fn get(&self, date: NaiveDate) -> Option<&ReturnPoint> {
        self.position(date).map(|i| &self.points[i])
    }
}

/// Consecutive-observation returns. Calendar gaps are spanned, not filled:
/// the return dated `t` is computed from the previous available close.
pub fn compute_returns(asset: &str, prices: &[PricePoint], kind: ReturnKind) -> Result<ReturnSeries, DataError> {
    if prices.len() < 2 {
        return Err(DataError::InsufficientData { needed: 2, got: prices.len() });
    }
    let points = prices
        .windows(2)
        .map(|w| {
            let (prev, cur) = (w[0].close, w[1].close);
            let value = match kind {
                ReturnKind::Simple => 100.0 * (cur - prev) / prev,
                ReturnKind::Log => 100.0 * (cur / prev).ln(),
            };
            ReturnPoint { date: w[1].date, value, volume: w[1].volume }
        })
        .collect();
    Ok(ReturnSeries { asset: asset.to_string(), points })
}

pub fn describe_returns(series: &ReturnSeries) -> Result<Summary, DataError> {
    describe(&series.values())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OptionKind {
    Call,
    Put,
}

impl OptionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OptionKind::Call => "call",
            OptionKind::Put => "put",
        }
    }
}

impl fmt::Display for OptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OptionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "call" => Ok(OptionKind::Call),
            "put" => Ok(OptionKind::Put),
            other => Err(format!("unknown option kind {other:?}")),
        }
    }
}

/// Moneyness class of a listed strike.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Moneyness {
    Atm,
    Otm,
}

impl Moneyness {
    pub fn as_str(self) -> &'static str {
        match self {
            Moneyness::Atm => "ATM",
            Moneyness::Otm => "OTM",
        }
    }
}

impl fmt::Display for Moneyness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Moneyness {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "ATM" => Ok(Moneyness::Atm),
            "OTM" => Ok(Moneyness::Otm),
            other => Err(format!("unknown option type {other:?}")),
        }
    }
}

pub const MIN_MATURITY_DAYS: u32 = 7;
pub const MAX_MATURITY_DAYS: u32 = 90;

/// One option purchase on the AMM.
#[derive(Debug, Clone, PartialEq)]
pub struct OptionTrade {
    pub trade_id: String,
    pub underlying: String,
    pub kind: OptionKind,
    pub moneyness: Moneyness,
    pub strike: f64,
    pub maturity_days: u32,
    /// Contracts bought; fractional amounts are allowed.
    pub amount: f64,
    /// Total premium paid, in stablecoin units.
    pub premium_paid: f64,
    /// Oracle spot at the time of purchase.
    pub spot: f64,
    pub timestamp: DateTime<Utc>,
}

impl OptionTrade {
    pub fn date(&self) -> NaiveDate {
        self.timestamp.date_naive()
    }

    pub fn strike_ratio(&self) -> f64 {
        self.strike / self.spot
    }

    /// Checks every record invariant: maturity range, positive size and
    /// prices, no in-the-money strike, and the ATM flag agreeing with the
    /// strike sitting on the 100% grid point.
    pub fn validate(&self) -> Result<(), DataError> {
        let fail = |reason: String| DataError::InvalidTrade { trade_id: self.trade_id.clone(), reason };
        if !(MIN_MATURITY_DAYS..=MAX_MATURITY_DAYS).contains(&self.maturity_days) {
            return Err(fail(format!(
                "maturity {} days outside [{MIN_MATURITY_DAYS}, {MAX_MATURITY_DAYS}]",
                self.maturity_days
            )));
        }
        if !(self.amount.is_finite() && self.amount > 0.0) {
            return Err(fail(format!("amount must be positive, got {}", self.amount)));
        }
        if !(self.premium_paid.is_finite() && self.premium_paid >= 0.0) {
            return Err(fail(format!("premium must be non-negative, got {}", self.premium_paid)));
        }
        if !(self.spot.is_finite() && self.spot > 0.0) {
            return Err(fail(format!("spot must be positive, got {}", self.spot)));
        }
        if !(self.strike.is_finite() && self.strike > 0.0) {
            return Err(fail(format!("strike must be positive, got {}", self.strike)));
        }
        let ratio = self.strike_ratio();
        let in_the_money = match self.kind {
            OptionKind::Call => ratio < 1.0 - GRID_TOLERANCE,
            OptionKind::Put => ratio > 1.0 + GRID_TOLERANCE,
        };
        if in_the_money {
            return Err(fail(format!("{} strike/spot {ratio:.6} is in the money", self.kind)));
        }
        let at_grid_centre = (ratio - 1.0).abs() <= GRID_TOLERANCE;
        if at_grid_centre != (self.moneyness == Moneyness::Atm) {
            return Err(fail(format!("type {} inconsistent with strike/spot {ratio:.6}", self.moneyness)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn day(d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2023, 1, d).unwrap()
    }

    fn pp(d: u32, close: f64) -> PricePoint {
        PricePoint { date: day(d), close, volume: 1.0 }
    }

    #[test]
    fn prices_are_sorted() {
        let v = validate_prices(vec![pp(3, 3.0), pp(1, 1.0), pp(2, 2.0)]).unwrap();
        assert_eq!(v.iter().map(|p| p.date).collect::<Vec<_>>(), vec![day(1), day(2), day(3)]);
    }

    #[test]
    fn price_invariants() {
        assert!(matches!(validate_prices(vec![pp(1, 0.0)]), Err(DataError::NonPositiveClose { .. })));
        assert!(matches!(validate_prices(vec![pp(1, 1.0), pp(1, 2.0)]), Err(DataError::DuplicateDate(_))));
        assert_eq!(validate_prices(vec![]), Err(DataError::EmptySeries));
    }

    #[test]
    fn simple_returns() {
        let r = compute_returns("X", &[pp(1, 100.0), pp(2, 100.0), pp(3, 110.0)], ReturnKind::Simple).unwrap();
        assert_eq!(r.values(), vec![0.0, 10.0]);
        assert_eq!(r.points[1].date, day(3));
        assert!(matches!(
            compute_returns("X", &[pp(1, 1.0)], ReturnKind::Simple),
            Err(DataError::InsufficientData { .. })
        ));
    }

    fn trade(kind: OptionKind, moneyness: Moneyness, strike: f64, maturity: u32) -> OptionTrade {
        OptionTrade {
            trade_id: "t1".into(),
            underlying: "wBTC".into(),
            kind,
            moneyness,
            strike,
            maturity_days: maturity,
            amount: 0.5,
            premium_paid: 100.0,
            spot: 30_000.0,
            timestamp: DateTime::from_timestamp(1_680_000_000, 0).unwrap(),
        }
    }

    #[test]
    fn trade_invariants() {
        assert!(trade(OptionKind::Call, Moneyness::Atm, 30_000.0, 30).validate().is_ok());
        assert!(trade(OptionKind::Put, Moneyness::Otm, 27_000.0, 7).validate().is_ok());
        assert!(trade(OptionKind::Call, Moneyness::Atm, 30_000.0, 91).validate().is_err());
        assert!(trade(OptionKind::Call, Moneyness::Otm, 30_000.0, 30).validate().is_err());
        assert!(trade(OptionKind::Call, Moneyness::Otm, 28_500.0, 30).validate().is_err());
        assert!(trade(OptionKind::Put, Moneyness::Otm, 33_000.0, 30).validate().is_err());
    }

    #[test]
    fn parses_kinds() {
        assert_eq!("Call".parse::<OptionKind>(), Ok(OptionKind::Call));
        assert!("straddle".parse::<OptionKind>().is_err());
        assert_eq!("otm".parse::<Moneyness>(), Ok(Moneyness::Otm));
    }
}
