//! Serializable report records written by the pipeline stages.
//!
//! Non-finite numbers become `null` in JSON, so every optional statistic is
//! an `Option<f64>` here rather than a `NaN`.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use optbench_core::special::norm_cdf;
use optbench_core::stats::Summary;
use optbench_core::volatility::TestResult;
use optbench_core::DiagnosticError;

pub fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Significance marks at the 1%, 5% and 10% levels.
pub fn stars(p_value: Option<f64>) -> String {
    match p_value {
        Some(p) if p < 0.01 => "***".into(),
        Some(p) if p < 0.05 => "**".into(),
        Some(p) if p < 0.1 => "*".into(),
        _ => String::new(),
    }
}

/// A point estimate with a normal-approximation test against zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: Option<f64>,
    pub z_stat: Option<f64>,
    pub p_value: Option<f64>,
    pub stars: String,
}

impl Estimate {
    pub fn new(value: f64, std_error: f64) -> Self {
        let se = finite(std_error).filter(|s| *s > 0.0);
        let z = se.map(|s| value / s);
        let p = z.map(|z| 2.0 * norm_cdf(-z.abs()));
        Self { value, std_error: se, z_stat: z, p_value: p, stars: stars(p) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryReport {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
    pub skewness: Option<f64>,
    pub kurtosis: Option<f64>,
    pub degenerate: bool,
}

impl From<&Summary> for SummaryReport {
    fn from(s: &Summary) -> Self {
        Self {
            count: s.count,
            mean: s.mean,
            std: s.std,
            min: s.min,
            q25: s.q25,
            median: s.median,
            q75: s.q75,
            max: s.max,
            skewness: s.skewness,
            kurtosis: s.kurtosis,
            degenerate: s.is_degenerate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Count {
    pub kind: String,
    #[serde(rename = "type")]
    pub moneyness: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub asset: String,
    pub price_file: String,
    pub trade_file: String,
    pub return_kind: String,
    pub first_date: NaiveDate,
    pub last_date: NaiveDate,
    pub price_days: usize,
    /// Returns spanning more than one calendar day.
    pub calendar_gaps: usize,
    pub returns: SummaryReport,
    pub volume: SummaryReport,
    pub trades: usize,
    pub trades_by_bucket: Vec<Count>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub index: usize,
    pub name: String,
    pub intercept: Estimate,
    pub ar: Vec<Estimate>,
    pub variance: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionReport {
    /// `matrix[i][j] = P(s_t = j | s_{t-1} = i)`.
    pub matrix: [[f64; 2]; 2],
    pub p00: Estimate,
    pub p10: Estimate,
    pub stationary: [f64; 2],
    pub expected_durations: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelCounts {
    pub regime0: usize,
    pub regime1: usize,
    pub uncertain: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothedTable {
    pub columns: [String; 2],
    pub rows: Vec<(NaiveDate, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeFitReport {
    pub asset: String,
    pub ar_order: usize,
    pub n_obs: usize,
    pub n_params: usize,
    pub log_likelihood: f64,
    pub aic: f64,
    pub bic: f64,
    pub standard_errors: String,
    pub se_bandwidth: usize,
    pub starts: usize,
    pub converged_starts: usize,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub high_volatility_regime: usize,
    pub regimes: Vec<RegimeReport>,
    pub transition: TransitionReport,
    pub labels: LabelCounts,
    /// Smoothed probability of the high-volatility regime per day.
    pub smoothed: SmoothedTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticReport {
    pub lags: usize,
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub error: Option<String>,
}

impl DiagnosticReport {
    pub fn new(lags: usize, r: &Result<TestResult, DiagnosticError>) -> Self {
        match r {
            Ok(t) => Self { lags: t.df, statistic: finite(t.statistic), p_value: finite(t.p_value), error: None },
            Err(e) => Self { lags, statistic: None, p_value: None, error: Some(e.to_string()) },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedEstimate {
    pub name: String,
    pub value: f64,
    /// Inverse observed information.
    pub std_error: Option<f64>,
    /// White sandwich; the test columns use it.
    pub robust_std_error: Option<f64>,
    pub z_stat: Option<f64>,
    pub p_value: Option<f64>,
    pub stars: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecReport {
    pub p: usize,
    pub o: usize,
    pub q: usize,
}

impl SpecReport {
    pub fn label(&self) -> String {
        if self.o == 0 {
            format!("GARCH({},{})", self.p, self.q)
        } else {
            format!("GJR-GARCH({},{},{})", self.p, self.o, self.q)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub spec: SpecReport,
    pub bic: Option<f64>,
    pub admissible: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchReport {
    pub asset: String,
    pub regime: usize,
    pub name: String,
    pub input: String,
    pub subsample_size: usize,
    pub spec: SpecReport,
    pub specification: String,
    pub family: String,
    pub params: Vec<NamedEstimate>,
    pub log_likelihood: f64,
    pub aic: f64,
    pub bic: f64,
    pub n_params: usize,
    pub n_obs: usize,
    pub presample_variance: f64,
    pub persistence: f64,
    pub stationary: bool,
    pub unconditional_variance: Option<f64>,
    pub ljung_box: DiagnosticReport,
    pub arch_lm: DiagnosticReport,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub grid: SpecReport,
    pub candidates: Vec<Candidate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeSigma {
    pub regime: usize,
    pub days: usize,
    pub sigma: Option<SummaryReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolPathSummary {
    pub asset: String,
    pub annualization: f64,
    pub days: usize,
    pub inherited: usize,
    /// Leading uncertain days with no earlier labeled day.
    pub unresolved: Vec<NaiveDate>,
    pub by_source_regime: Vec<RegimeSigma>,
    pub realized_window: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reason {
    pub trade_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bucket {
    pub underlying: String,
    pub kind: String,
    pub summary: SummaryReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IvGapSummary {
    pub asset: String,
    pub rows_with_iv: usize,
    pub rows_without_iv: usize,
    pub buckets: Vec<Bucket>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateTableInfo {
    pub source: String,
    pub strip_fee: bool,
    pub cells: usize,
    pub skipped: Vec<Reason>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuoteCheckSummary {
    pub trades: usize,
    pub quoted: usize,
    pub interpolated: usize,
    pub relative_gap: Option<SummaryReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MispricingSummary {
    pub asset: String,
    pub risk_free_rate: f64,
    pub rows: usize,
    pub excluded: Vec<Reason>,
    pub delta_price: Vec<Bucket>,
    pub rate_table: RateTableInfo,
    pub quote_check: QuoteCheckSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionHeader {
    pub risk_free_rate: f64,
    pub volatility_regressor: String,
    pub observation_order: String,
    pub hac_bandwidth: usize,
    pub bandwidth_rule: String,
    pub omega_floor_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: Option<f64>,
    pub t_stat: Option<f64>,
    pub p_value: Option<f64>,
    pub stars: String,
    pub ols_estimate: f64,
    pub aux_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vif {
    pub name: String,
    pub vif: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionDiagnostics {
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub f_stat: Option<f64>,
    pub f_p_value: Option<f64>,
    pub wald_stat: Option<f64>,
    pub wald_p_value: Option<f64>,
    pub condition_number: f64,
    pub vif: Vec<Vif>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaReport {
    pub floor: f64,
    pub floored: usize,
    pub degenerate_weights: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub name: String,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionReport {
    pub asset: String,
    pub header: RegressionHeader,
    pub n_obs: usize,
    pub excluded: Vec<Reason>,
    pub coefficients: Vec<Coefficient>,
    pub diagnostics: RegressionDiagnostics,
    pub omega: OmegaReport,
    pub standardization: Vec<Standardization>,
}

impl RegressionReport {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_thresholds() {
        assert_eq!(stars(Some(0.009)), "***");
        assert_eq!(stars(Some(0.01)), "**");
        assert_eq!(stars(Some(0.0999)), "*");
        assert_eq!(stars(Some(0.1)), "");
        assert_eq!(stars(None), "");
    }

    #[test]
    fn estimate_handles_missing_errors() {
        let e = Estimate::new(2.0, 1.0);
        assert!((e.p_value.unwrap() - 0.0455).abs() < 1e-4);
        assert_eq!(e.stars, "**");
        let n = Estimate::new(2.0, f64::NAN);
        assert_eq!((n.std_error, n.p_value), (None, None));
        assert_eq!(serde_json::to_string(&n.std_error).unwrap(), "null");
    }
}
