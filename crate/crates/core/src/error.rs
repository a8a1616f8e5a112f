use alloc::string::String;
use chrono::NaiveDate;

/// Input-data problems: malformed or inconsistent series and trade records.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DataError {
    #[error("insufficient data: need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("series is empty")]
    EmptySeries,
    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),
    #[error("non-positive close {close} on {date}")]
    NonPositiveClose { date: NaiveDate, close: f64 },
    #[error("negative volume {volume} on {date}")]
    NegativeVolume { date: NaiveDate, volume: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("trade {trade_id}: {reason}")]
    InvalidTrade { trade_id: String, reason: String },
    #[error("no {what} available for {date}")]
    Alignment { date: NaiveDate, what: &'static str },
}

/// Failures of the likelihood-based estimators.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EstimationError {
    #[error("invalid model specification: {0}")]
    InvalidSpec(String),
    #[error(
        "{model} estimation did not converge after {starts} start(s); best log-likelihood {best_log_likelihood}, gradient sup-norm {gradient_norm}"
    )]
    NotConverged { model: &'static str, starts: usize, best_log_likelihood: f64, gradient_norm: f64 },
    #[error("regime {regime} collapsed: innovation variance {variance} is below the floor {floor}")]
    DegenerateRegime { regime: usize, variance: f64, floor: f64 },
    #[error("filter likelihood underflowed at observation {0}")]
    Underflow(usize),
    #[error("no admissible (converged, covariance-stationary) fit on the grid")]
    NoAdmissibleFit,
    #[error("{0}")]
    Numerical(String),
}

/// Which side of the no-arbitrage band an observed premium violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArbitrageBound {
    /// Premium at or below the discounted intrinsic value.
    Lower,
    /// Premium at or above the spot (calls) or discounted strike (puts).
    Upper,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PricingError {
    #[error("invalid pricing input: {0}")]
    Domain(String),
    #[error("premium {premium} violates the {bound:?} no-arbitrage bound (band is ({lower}, {upper}))")]
    NoSolution { bound: ArbitrageBound, premium: f64, lower: f64, upper: f64 },
    #[error("root bracket exhausted: {0}")]
    Bracket(String),
}

/// Violations of the AMM's discrete strike/maturity grid or rate table.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GridError {
    #[error("strike/spot ratio {ratio} is off the {kind} grid (nearest step {nearest_percent}%)")]
    OffGrid { kind: &'static str, ratio: f64, nearest_percent: u32 },
    #[error("{percent}% is not a {kind} strike step")]
    InvalidStep { kind: &'static str, percent: u32 },
    #[error("maturity {0} days is outside the 7-90 day range")]
    MaturityOutOfRange(u32),
    #[error("rate table has no rate for {kind} {percent}% at {maturity_days} days")]
    MissingRate { kind: &'static str, percent: u32, maturity_days: u32 },
    #[error("invalid rate table entry: {0}")]
    InvalidRate(String),
    #[error("invalid quote input: {0}")]
    Domain(String),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RegressionError {
    #[error("design has {rows} rows for {cols} columns")]
    TooFewRows { rows: usize, cols: usize },
    #[error("regressor {0} has zero variance")]
    ZeroVariance(&'static str),
    #[error("regressor {0} is not finite")]
    NonFinite(&'static str),
    #[error("design matrix is singular or ill-conditioned (condition number {0})")]
    Singular(f64),
    #[error("regressor {0} is perfectly collinear with the others")]
    Collinear(String),
    #[error("{0}")]
    Domain(String),
}

/// Residual-diagnostic tests that cannot be evaluated.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DiagnosticError {
    #[error("lag count must be at least 1")]
    InvalidLags,
    #[error("{n} residuals cannot support {lags} lags")]
    TooShort { n: usize, lags: usize },
    #[error("statistic undefined: residuals are degenerate (zero variance)")]
    Degenerate,
}
