//! European Black–Scholes benchmark prices and implied volatility.
//!
//! Hegic contracts are American-style; they are priced here as European
//! options, which understates the early-exercise premium on puts when
//! rates are positive.

use alloc::format;
#[allow(unused_imports)] // inherent methods shadow it when `std` is linked
use num_traits::Float;

use crate::error::{ArbitrageBound, PricingError};
use crate::market_data::OptionKind;
use crate::optimize::{find_root, BrentError};
use crate::special::norm_cdf;

/// Days per year in the actual/365 maturity convention.
pub const DAYS_PER_YEAR: f64 = 365.0;

/// Implied-volatility search bracket.
pub const IV_LOWER: f64 = 1e-6;
pub const IV_UPPER: f64 = 10.0;

/// Below this total volatility `σ√T` the price is taken at its
/// deterministic limit.
const MIN_TOTAL_VOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricingInput {
    pub spot: f64,
    pub strike: f64,
    /// Continuously compounded annual rate.
    pub rate: f64,
    /// Time to expiry in years.
    pub maturity: f64,
    /// Annualized volatility (decimal).
    pub volatility: f64,
}

impl PricingInput {
    /// Builds an input with `T = maturity_days / 365`.
    pub fn from_days(spot: f64, strike: f64, rate: f64, maturity_days: f64, volatility: f64) -> Self {
        Self { spot, strike, rate, maturity: maturity_days / DAYS_PER_YEAR, volatility }
    }

    pub fn with_volatility(self, volatility: f64) -> Self {
        Self { volatility, ..self }
    }

    fn validate_contract(&self) -> Result<(), PricingError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.spot) {
            return Err(PricingError::Domain(format!("spot must be positive, got {}", self.spot)));
        }
        if !ok(self.strike) {
            return Err(PricingError::Domain(format!("strike must be positive, got {}", self.strike)));
        }
        if !ok(self.maturity) {
            return Err(PricingError::Domain(format!("maturity must be positive, got {}", self.maturity)));
        }
        if !self.rate.is_finite() {
            return Err(PricingError::Domain(format!("rate must be finite, got {}", self.rate)));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), PricingError> {
        self.validate_contract()?;
        if !(self.volatility.is_finite() && self.volatility > 0.0) {
            return Err(PricingError::Domain(format!("volatility must be positive, got {}", self.volatility)));
        }
        Ok(())
    }

    pub fn discounted_strike(&self) -> f64 {
        self.strike * (-self.rate * self.maturity).exp()
    }
}

/// Black–Scholes premium per contract.
pub fn bs_price(input: &PricingInput, kind: OptionKind) -> Result<f64, PricingError> {
    input.validate()?;
    Ok(price_unchecked(input, kind))
}

fn price_unchecked(input: &PricingInput, kind: OptionKind) -> f64 {
    let s = input.spot;
    let k_disc = input.discounted_strike();
    let total_vol = input.volatility * input.maturity.sqrt();
    if total_vol < MIN_TOTAL_VOL {
        return match kind {
            OptionKind::Call => (s - k_disc).max(0.0),
            OptionKind::Put => (k_disc - s).max(0.0),
        };
    }
    let d1 = ((s / input.strike).ln() + (input.rate + 0.5 * input.volatility * input.volatility) * input.maturity)
        / total_vol;
    let d2 = d1 - total_vol;
    match kind {
        OptionKind::Call => s * norm_cdf(d1) - k_disc * norm_cdf(d2),
        OptionKind::Put => k_disc * norm_cdf(-d2) - s * norm_cdf(-d1),
    }
}

/// The open interval of premiums consistent with no arbitrage.
pub fn arbitrage_band(input: &PricingInput, kind: OptionKind) -> (f64, f64) {
    let k_disc = input.discounted_strike();
    match kind {
        OptionKind::Call => ((input.spot - k_disc).max(0.0), input.spot),
        OptionKind::Put => ((k_disc - input.spot).max(0.0), k_disc),
    }
}

/// Inverts [`bs_price`] for the volatility on `[1e-6, 10]` with Brent's
/// method. `input.volatility` is ignored.
pub fn implied_vol(premium: f64, input: &PricingInput, kind: OptionKind) -> Result<f64, PricingError> {
    input.validate_contract()?;
    if !premium.is_finite() {
        return Err(PricingError::Domain(format!("premium must be finite, got {premium}")));
    }
    let (lower, upper) = arbitrage_band(input, kind);
    if premium <= lower {
        return Err(PricingError::NoSolution { bound: ArbitrageBound::Lower, premium, lower, upper });
    }
    if premium >= upper {
        return Err(PricingError::NoSolution { bound: ArbitrageBound::Upper, premium, lower, upper });
    }
    let f_tol = 1e-10 * premium.max(1.0);
    let objective = |sigma: f64| price_unchecked(&input.with_volatility(sigma), kind) - premium;
    let root = find_root(objective, IV_LOWER, IV_UPPER, 1e-15, 0.0, 200).map_err(|e| match e {
        BrentError::NotBracketed => {
            PricingError::Bracket(format!("premium {premium} not attained for volatility in [{IV_LOWER}, {IV_UPPER}]"))
        }
        BrentError::Exhausted => PricingError::Bracket(format!("no convergence for premium {premium}")),
    })?;
    if root.fx.abs() > f_tol {
        return Err(PricingError::Bracket(format!("residual {} above tolerance {f_tol} at sigma {}", root.fx, root.x)));
    }
    Ok(root.x)
}

/// Put–call parity residual `C - P - S + K e^{-rT}` for separately
/// specified call and put contracts.
pub fn put_call_parity_gap(call: &PricingInput, put: &PricingInput) -> Result<f64, PricingError> {
    let c = bs_price(call, OptionKind::Call)?;
    let p = bs_price(put, OptionKind::Put)?;
    Ok(c - p - call.spot + call.discounted_strike())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input(s: f64, k: f64, r: f64, t: f64, v: f64) -> PricingInput {
        PricingInput { spot: s, strike: k, rate: r, maturity: t, volatility: v }
    }

    #[test]
    fn zero_volatility_limit_is_discounted_intrinsic() {
        let p = bs_price(&input(100.0, 90.0, 0.0, 1.0, 1e-14), OptionKind::Call).unwrap();
        assert!((p - 10.0).abs() < 1e-10);
        let p = bs_price(&input(100.0, 90.0, 0.0, 1.0, 1e-14), OptionKind::Put).unwrap();
        assert!(p.abs() < 1e-10);
    }

    #[test]
    fn vanishing_strike_call_is_worth_spot() {
        let p = bs_price(&input(100.0, 1e-12, 0.03, 0.5, 0.6), OptionKind::Call).unwrap();
        assert!((p - 100.0).abs() < 1e-10);
    }

    #[test]
    fn textbook_value() {
        // S=K=100, r=5%, T=1, sigma=20%: the classic 10.4506 call
        let c = bs_price(&input(100.0, 100.0, 0.05, 1.0, 0.2), OptionKind::Call).unwrap();
        assert!((c - 10.450_583_572_185_565).abs() < 1e-9);
    }

    #[test]
    fn at_the_money_zero_rate_call_equals_put() {
        let i = input(250.0, 250.0, 0.0, 0.3, 0.8);
        let c = bs_price(&i, OptionKind::Call).unwrap();
        let p = bs_price(&i, OptionKind::Put).unwrap();
        assert!((c - p).abs() < 1e-12);
    }

    #[test]
    fn mismatched_strikes_give_nonzero_gap() {
        let call = input(100.0, 100.0, 0.01, 0.5, 0.4);
        let put = input(100.0, 90.0, 0.01, 0.5, 0.4);
        assert!(put_call_parity_gap(&call, &put).unwrap().abs() > 1.0);
        assert!(put_call_parity_gap(&call, &call).unwrap().abs() < 1e-10);
    }

    #[test]
    fn implied_vol_round_trip() {
        let i = input(30_000.0, 33_000.0, 0.0, 14.0 / 365.0, 0.5);
        let premium = bs_price(&i, OptionKind::Call).unwrap();
        let iv = implied_vol(premium, &i, OptionKind::Call).unwrap();
        assert!((iv - 0.5).abs() < 1e-8);
    }

    #[test]
    fn implied_vol_rejects_arbitrage() {
        let i = input(100.0, 90.0, 0.0, 0.1, 0.5);
        match implied_vol(9.5, &i, OptionKind::Call) {
            Err(PricingError::NoSolution { bound: ArbitrageBound::Lower, .. }) => {}
            other => panic!("{other:?}"),
        }
        match implied_vol(100.0, &i, OptionKind::Call) {
            Err(PricingError::NoSolution { bound: ArbitrageBound::Upper, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_inputs_are_domain_errors() {
        assert!(matches!(bs_price(&input(-1.0, 1.0, 0.0, 1.0, 0.2), OptionKind::Call), Err(PricingError::Domain(_))));
        assert!(matches!(bs_price(&input(1.0, 1.0, 0.0, 0.0, 0.2), OptionKind::Put), Err(PricingError::Domain(_))));
        assert!(matches!(bs_price(&input(1.0, 1.0, 0.0, 1.0, 0.0), OptionKind::Put), Err(PricingError::Domain(_))));
    }
}
