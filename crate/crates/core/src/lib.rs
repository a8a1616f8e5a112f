//! Regime-sensitive benchmark pricing of rate-based AMM option quotes.
//!
//! The crate is `no_std` (with `alloc`) and holds the numerical core of the
//! pipeline:
//!
//! 1. [`regime_switching`]: two-regime Markov-switching autoregression,
//!    Hamilton filter and Kim smoother, regime classification.
//! 2. [`volatility`]: regime-conditional GJR-GARCH with Hansen skewed-t
//!    innovations, BIC order selection, residual diagnostics and the
//!    annualized volatility path.
//! 3. [`pricing`]: Black–Scholes benchmark prices and implied volatility.
//! 4. [`amm`]: the rate-table quoting rule and settlement fee.
//! 5. [`mispricing`]: relative price deviations, the standardized design,
//!    two-step feasible GLS with Newey–West inference and diagnostics.
//!
//! File formats, configuration and the command-line pipeline live in the
//! companion `optbench` crate.

#![no_std]
// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod amm;
pub mod error;
pub mod linalg;
pub mod market_data;
pub mod mispricing;
pub mod optimize;
pub mod pricing;
pub mod regime_switching;
pub mod simulate;
pub mod special;
pub mod stats;
pub mod volatility;

pub use error::{
    ArbitrageBound, DataError, DiagnosticError, EstimationError, GridError, PricingError, RegressionError,
};
pub use market_data::{Moneyness, OptionKind, OptionTrade, PricePoint, ReturnKind, ReturnPoint, ReturnSeries};
