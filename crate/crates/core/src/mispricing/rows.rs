//! Per-trade benchmark prices and relative price deviations.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use chrono::{DateTime, NaiveDate, Utc};

use crate::amm;
use crate::error::DataError;
use crate::market_data::{Moneyness, OptionKind, OptionTrade, ReturnSeries};
use crate::pricing::{bs_price, implied_vol, PricingInput};
use crate::volatility::VolatilityPath;

/// A trade left out of a downstream table, with the reason.
#[derive(Debug, Clone, PartialEq)]
pub struct Exclusion {
    pub trade_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MispricingRow {
    pub trade_id: String,
    pub underlying: String,
    pub timestamp: DateTime<Utc>,
    pub kind: OptionKind,
    pub moneyness: Moneyness,
    /// Strike grid step in percent of spot, when the strike is on the grid.
    pub step_percent: Option<u32>,
    pub strike: f64,
    pub maturity_days: u32,
    pub amount: f64,
    pub spot: f64,
    pub premium_paid: f64,
    /// Per-contract quote `premium_paid / amount`.
    pub quote: f64,
    /// Black–Scholes price per contract at the day's volatility.
    pub benchmark: f64,
    /// `(benchmark - quote) / quote`
    pub delta_price: f64,
    /// Underlying's return on the trade date (percent).
    pub underlying_return: f64,
    /// Underlying's volume on the trade date.
    pub volume: f64,
    /// Annualized model volatility on the trade date.
    pub sigma: f64,
    /// Implied volatility of the quote; `None` outside the no-arbitrage band.
    pub iv: Option<f64>,
}

impl MispricingRow {
    pub fn date(&self) -> NaiveDate {
        self.timestamp.date_naive()
    }

    pub fn iv_gap(&self) -> Option<f64> {
        self.iv.map(|iv| iv - self.sigma)
    }
}

/// `(benchmark - quote) / quote`.
pub fn relative_deviation(benchmark: f64, quote: f64) -> f64 {
    (benchmark - quote) / quote
}

/// Prices every trade against the volatility path. Rows come back ordered
/// by timestamp, then trade id. Zero-premium trades are excluded; a trade
/// date missing from the returns or the volatility path is an error.
pub fn compute_mispricing(
    trades: &[OptionTrade],
    returns: &ReturnSeries,
    vol: &VolatilityPath,
    risk_free_rate: f64,
) -> Result<(Vec<MispricingRow>, Vec<Exclusion>), DataError> {
    let mut rows = Vec::with_capacity(trades.len());
    let mut excluded = Vec::new();
    let mut ordered: Vec<&OptionTrade> = trades.iter().collect();
    ordered.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.trade_id.cmp(&b.trade_id)));
    for trade in ordered {
        let date = trade.date();
        let day = returns.get(date).ok_or(DataError::Alignment { date, what: "underlying return" })?;
        let sigma = vol.sigma_on(date)?;
        let quote = trade.premium_paid / trade.amount;
        if !(quote > 0.0) {
            excluded
                .push(Exclusion { trade_id: trade.trade_id.clone(), reason: format!("per-contract quote is {quote}") });
            continue;
        }
        let input =
            PricingInput::from_days(trade.spot, trade.strike, risk_free_rate, trade.maturity_days as f64, sigma);
        let benchmark = bs_price(&input, trade.kind)
            .map_err(|e| DataError::InvalidTrade { trade_id: trade.trade_id.clone(), reason: format!("{e}") })?;
        rows.push(MispricingRow {
            trade_id: trade.trade_id.clone(),
            underlying: trade.underlying.clone(),
            timestamp: trade.timestamp,
            kind: trade.kind,
            moneyness: trade.moneyness,
            step_percent: amm::validate_trade_against_grid(trade).ok(),
            strike: trade.strike,
            maturity_days: trade.maturity_days,
            amount: trade.amount,
            spot: trade.spot,
            premium_paid: trade.premium_paid,
            quote,
            benchmark,
            delta_price: relative_deviation(benchmark, quote),
            underlying_return: day.value,
            volume: day.volume,
            sigma,
            iv: implied_vol(quote, &input, trade.kind).ok(),
        });
    }
    Ok((rows, excluded))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deviation_arithmetic() {
        assert_eq!(relative_deviation(150.0, 100.0), 0.5);
        assert_eq!(relative_deviation(42.0, 42.0), 0.0);
        assert!(relative_deviation(90.0, 100.0) < 0.0);
    }
}
