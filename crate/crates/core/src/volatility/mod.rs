//! Regime-conditional volatility: GJR-GARCH estimation, order selection,
//! residual diagnostics and the annualized volatility path.

pub mod diagnostics;
pub mod garch;
pub mod path;
pub mod selection;
pub mod skewt;

pub use diagnostics::{engle_arch, ljung_box, TestResult};
pub use garch::{fit_garch, fit_garch_values, Family, GarchFit, GarchOptions, GarchParams, GarchSpec, Innovations};
pub use path::{build_vol_path, realized_volatility, regime_subsample, RegimeVariances, VolPoint, VolatilityPath};
pub use selection::{select_best, select_by_bic, spec_seed, GridBounds, Selection};
pub use skewt::SkewT;
