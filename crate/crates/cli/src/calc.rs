//! The `price` and `quote` one-shot calculators.

use serde::Serialize;

use optbench_core::amm::{quote, RateTable};
use optbench_core::pricing::{bs_price, implied_vol, PricingInput};
use optbench_core::OptionKind;

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceOutput {
    pub kind: String,
    pub spot: f64,
    pub strike: f64,
    pub rate: f64,
    pub maturity_days: f64,
    pub sigma: f64,
    pub price: f64,
    /// Volatility recovered from `price`.
    pub implied_vol: f64,
    pub round_trip_error: f64,
    /// Volatility implied by an observed premium, when one is given.
    pub premium: Option<f64>,
    pub premium_implied_vol: Option<f64>,
}

pub fn price(
    kind: OptionKind,
    spot: f64,
    strike: f64,
    rate: f64,
    maturity_days: f64,
    sigma: f64,
    premium: Option<f64>,
) -> Result<PriceOutput> {
    let input = PricingInput::from_days(spot, strike, rate, maturity_days, sigma);
    let value = bs_price(&input, kind)?;
    let iv = implied_vol(value, &input, kind)?;
    let premium_iv = premium.map(|p| implied_vol(p, &input, kind)).transpose()?;
    Ok(PriceOutput {
        kind: kind.to_string(),
        spot,
        strike,
        rate,
        maturity_days,
        sigma,
        price: value,
        implied_vol: iv,
        round_trip_error: (iv - sigma).abs(),
        premium,
        premium_implied_vol: premium_iv,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuoteOutput {
    pub kind: String,
    pub step_percent: u32,
    pub strike: f64,
    pub maturity_days: u32,
    pub spot: f64,
    pub amount: f64,
    pub moneyness: String,
    pub rate: f64,
    pub interpolated: bool,
    pub premium_per_contract: f64,
    pub fee: f64,
    pub total: f64,
}

/// Quotes against `table`, or against a single rate when `table` holds
/// just the requested cell.
pub fn quote_one(
    table: &RateTable,
    spot: f64,
    kind: OptionKind,
    step: u32,
    maturity_days: u32,
    amount: f64,
) -> Result<QuoteOutput> {
    let q = quote(table, spot, kind, step, maturity_days, amount)?;
    Ok(QuoteOutput {
        kind: kind.to_string(),
        step_percent: step,
        strike: spot * f64::from(step) / 100.0,
        maturity_days,
        spot,
        amount,
        moneyness: q.moneyness.to_string(),
        rate: q.rate,
        interpolated: q.interpolated,
        premium_per_contract: q.premium,
        fee: q.fee,
        total: q.total,
    })
}

/// A one-cell table for quoting at an explicit rate.
pub fn single_rate_table(kind: OptionKind, step: u32, maturity_days: u32, rate: f64) -> Result<RateTable> {
    let mut t = RateTable::new();
    t.insert(kind, step, maturity_days, rate)?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn price_round_trips_through_implied_vol() {
        let out = price(OptionKind::Call, 100.0, 110.0, 0.01, 30.0, 0.5, None).unwrap();
        assert!(out.price > 0.0);
        assert!(out.round_trip_error < 1e-6);
        assert!(out.premium_implied_vol.is_none());
    }

    #[test]
    fn single_rate_quote_has_fee_on_top() {
        let t = single_rate_table(OptionKind::Put, 90, 30, 0.02).unwrap();
        let q = quote_one(&t, 2000.0, OptionKind::Put, 90, 30, 2.0).unwrap();
        assert_eq!(q.premium_per_contract, 40.0);
        assert_eq!(q.fee, 80.0 * 0.005);
        assert_eq!(q.total, 80.0 + q.fee);
        assert!(single_rate_table(OptionKind::Put, 110, 30, 0.02).is_err());
    }
}
