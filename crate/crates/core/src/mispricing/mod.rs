//! Mispricing of AMM quotes against the regime-sensitive benchmark and the
//! cross-sectional FGLS regression that explains it.

pub mod design;
pub mod iv_gap;
pub mod regression;
pub mod rows;

pub use design::{build_design, Design};
pub use iv_gap::{delta_price_by_strike, iv_gap_report, IvGapBucket, IvGapReport, StrikePoint};
pub use regression::{
    auto_bandwidth, fit_fgls, fit_gls_fixed_omega, gls_with_omega, newey_west_cov, ols, vif, white_cov, FglsOptions,
    RegressionResult,
};
pub use rows::{compute_mispricing, relative_deviation, Exclusion, MispricingRow};
