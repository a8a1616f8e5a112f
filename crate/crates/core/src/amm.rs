//! The rate-based AMM quoting rule.
//!
//! A quote is a tabulated rate times the oracle spot, `O = v(K, T) S`, on a
//! discrete strike grid (calls at 100/110/120/130% of spot, puts at
//! 100/90/80/70%) with maturities between 7 and 90 days. Buyers pay a
//! settlement fee of `amount * O * r_s` on top, with `r_s` = 1% at the money
//! and 0.5% out of the money.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::GridError;
use crate::market_data::{Moneyness, OptionKind, OptionTrade, GRID_TOLERANCE, MAX_MATURITY_DAYS, MIN_MATURITY_DAYS};

pub const CALL_STEPS: [u32; 4] = [100, 110, 120, 130];
pub const PUT_STEPS: [u32; 4] = [100, 90, 80, 70];

pub const ATM_SETTLEMENT_RATE: f64 = 0.01;
pub const OTM_SETTLEMENT_RATE: f64 = 0.005;

pub fn steps(kind: OptionKind) -> &'static [u32; 4] {
    match kind {
        OptionKind::Call => &CALL_STEPS,
        OptionKind::Put => &PUT_STEPS,
    }
}

pub fn moneyness_of_step(percent: u32) -> Moneyness {
    if percent == 100 {
        Moneyness::Atm
    } else {
        Moneyness::Otm
    }
}

pub fn settlement_rate(class: Moneyness) -> f64 {
    match class {
        Moneyness::Atm => ATM_SETTLEMENT_RATE,
        Moneyness::Otm => OTM_SETTLEMENT_RATE,
    }
}

fn check_step(kind: OptionKind, percent: u32) -> Result<(), GridError> {
    if steps(kind).contains(&percent) {
        Ok(())
    } else {
        Err(GridError::InvalidStep { kind: kind.as_str(), percent })
    }
}

fn check_maturity(days: u32) -> Result<(), GridError> {
    if (MIN_MATURITY_DAYS..=MAX_MATURITY_DAYS).contains(&days) {
        Ok(())
    } else {
        Err(GridError::MaturityOutOfRange(days))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateLookup {
    pub rate: f64,
    /// The maturity was not tabulated and the rate was interpolated
    /// linearly in days between its neighbours.
    pub interpolated: bool,
}

/// Rates per (kind, strike step, maturity). Immutable once built.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RateTable {
    cells: BTreeMap<(OptionKind, u32), BTreeMap<u32, f64>>,
}

impl RateTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, kind: OptionKind, percent: u32, maturity_days: u32, rate: f64) -> Result<(), GridError> {
        check_step(kind, percent)?;
        check_maturity(maturity_days)?;
        if !(rate.is_finite() && rate > 0.0) {
            return Err(GridError::InvalidRate(format!(
                "{kind} {percent}% {maturity_days}d: rate must be positive, got {rate}"
            )));
        }
        let row = self.cells.entry((kind, percent)).or_default();
        if row.insert(maturity_days, rate).is_some() {
            return Err(GridError::InvalidRate(format!("{kind} {percent}% {maturity_days}d listed twice")));
        }
        Ok(())
    }

    /// All entries in (kind, step, maturity) order.
    pub fn entries(&self) -> Vec<(OptionKind, u32, u32, f64)> {
        self.cells.iter().flat_map(|(&(kind, pct), row)| row.iter().map(move |(&m, &r)| (kind, pct, m, r))).collect()
    }

    pub fn len(&self) -> usize {
        self.cells.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn rate(&self, kind: OptionKind, percent: u32, maturity_days: u32) -> Result<RateLookup, GridError> {
        check_step(kind, percent)?;
        check_maturity(maturity_days)?;
        let missing = GridError::MissingRate { kind: kind.as_str(), percent, maturity_days };
        let row = self.cells.get(&(kind, percent)).ok_or(missing.clone())?;
        if let Some(&rate) = row.get(&maturity_days) {
            return Ok(RateLookup { rate, interpolated: false });
        }
        let below = row.range(..maturity_days).next_back();
        let above = row.range(maturity_days..).next();
        match (below, above) {
            (Some((&m0, &r0)), Some((&m1, &r1))) => {
                let w = f64::from(maturity_days - m0) / f64::from(m1 - m0);
                Ok(RateLookup { rate: r0 + w * (r1 - r0), interpolated: true })
            }
            _ => Err(missing),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuoteResult {
    /// Premium per contract `O`.
    pub premium: f64,
    /// Settlement fee `s` on the whole order.
    pub fee: f64,
    /// `amount * O + s`.
    pub total: f64,
    pub moneyness: Moneyness,
    pub rate: f64,
    pub interpolated: bool,
}

pub fn quote(
    table: &RateTable,
    spot: f64,
    kind: OptionKind,
    percent: u32,
    maturity_days: u32,
    amount: f64,
) -> Result<QuoteResult, GridError> {
    if !(spot.is_finite() && spot > 0.0) {
        return Err(GridError::Domain(format!("spot must be positive, got {spot}")));
    }
    if !(amount.is_finite() && amount > 0.0) {
        return Err(GridError::Domain(format!("amount must be positive, got {amount}")));
    }
    let lookup = table.rate(kind, percent, maturity_days)?;
    Ok(quote_with_rate(lookup, spot, percent, amount))
}

fn quote_with_rate(lookup: RateLookup, spot: f64, percent: u32, amount: f64) -> QuoteResult {
    let moneyness = moneyness_of_step(percent);
    let premium = lookup.rate * spot;
    let notional = amount * premium;
    let fee = notional * settlement_rate(moneyness);
    QuoteResult { premium, fee, total: notional + fee, moneyness, rate: lookup.rate, interpolated: lookup.interpolated }
}

/// Maps a trade's strike/spot ratio onto its grid step (in percent).
pub fn validate_trade_against_grid(trade: &OptionTrade) -> Result<u32, GridError> {
    let ratio = trade.strike_ratio();
    let mut nearest = (f64::INFINITY, 100);
    for &pct in steps(trade.kind) {
        let rel = (ratio / (f64::from(pct) / 100.0) - 1.0).abs();
        if rel <= GRID_TOLERANCE {
            return Ok(pct);
        }
        if rel < nearest.0 {
            nearest = (rel, pct);
        }
    }
    Err(GridError::OffGrid { kind: trade.kind.as_str(), ratio, nearest_percent: nearest.1 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpliedRate {
    pub rate: f64,
    /// A zero premium: the trade carries no information about the table.
    pub suspicious: bool,
}

/// The table rate implied by an observed purchase, `v = (premium/amount)/spot`.
pub fn implied_rate(trade: &OptionTrade) -> Result<ImpliedRate, GridError> {
    implied_rate_from(trade.premium_paid, trade.amount, trade.spot)
}

pub fn implied_rate_from(premium_paid: f64, amount: f64, spot: f64) -> Result<ImpliedRate, GridError> {
    if !(amount.is_finite() && amount > 0.0) {
        return Err(GridError::Domain(format!("amount must be positive, got {amount}")));
    }
    if !(spot.is_finite() && spot > 0.0) {
        return Err(GridError::Domain(format!("spot must be positive, got {spot}")));
    }
    if !(premium_paid.is_finite() && premium_paid >= 0.0) {
        return Err(GridError::Domain(format!("premium must be non-negative, got {premium_paid}")));
    }
    let rate = (premium_paid / amount) / spot;
    Ok(ImpliedRate { rate, suspicious: premium_paid == 0.0 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSkip {
    pub trade_id: String,
    pub reason: String,
}

/// Builds a rate table as the median implied rate per (kind, step, maturity)
/// cell. With `strip_fee`, `premium_paid` is taken to include the settlement
/// fee, which is removed before inverting.
pub fn calibrate_rate_table(trades: &[OptionTrade], strip_fee: bool) -> (RateTable, Vec<CalibrationSkip>) {
    let mut cells: BTreeMap<(OptionKind, u32, u32), Vec<f64>> = BTreeMap::new();
    let mut skipped = Vec::new();
    for t in trades {
        let skip = |reason: String| CalibrationSkip { trade_id: t.trade_id.clone(), reason };
        let pct = match validate_trade_against_grid(t) {
            Ok(p) => p,
            Err(e) => {
                skipped.push(skip(format!("{e}")));
                continue;
            }
        };
        let premium =
            if strip_fee { t.premium_paid / (1.0 + settlement_rate(moneyness_of_step(pct))) } else { t.premium_paid };
        match implied_rate_from(premium, t.amount, t.spot) {
            Ok(r) if !r.suspicious => cells.entry((t.kind, pct, t.maturity_days)).or_default().push(r.rate),
            Ok(_) => skipped.push(skip(String::from("zero premium"))),
            Err(e) => skipped.push(skip(format!("{e}"))),
        }
    }
    let mut table = RateTable::new();
    for ((kind, pct, m), mut rates) in cells {
        rates.sort_by(f64::total_cmp);
        let n = rates.len();
        let median = if n % 2 == 1 { rates[n / 2] } else { 0.5 * (rates[n / 2 - 1] + rates[n / 2]) };
        // keys are unique and already validated, so insertion cannot fail
        let _ = table.insert(kind, pct, m, median);
    }
    (table, skipped)
}
