//! Pipeline configuration, read from one TOML file.
//!
//! Every constant the estimators leave open (risk-free rate, annualization,
//! HAC bandwidth, diagnostic lags, grid bounds, floors, optimizer
//! tolerances) has a field here with the library default. Relative paths
//! resolve against the directory holding the config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use optbench_core::mispricing::FglsOptions;
use optbench_core::optimize::LbfgsOptions;
use optbench_core::regime_switching::MsArOptions;
use optbench_core::volatility::{Family, GarchOptions, GridBounds};
use optbench_core::ReturnKind;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_annualization")]
    pub annualization: f64,
    #[serde(default)]
    pub risk_free_rate: f64,
    #[serde(default)]
    pub return_kind: ReturnKindConfig,
    #[serde(default)]
    pub regimes: RegimeConfig,
    #[serde(default)]
    pub garch: GarchConfig,
    #[serde(default)]
    pub regression: RegressionConfig,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub rates: RatesConfig,
    pub assets: Vec<AssetConfig>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_annualization() -> f64 {
    365.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReturnKindConfig {
    #[default]
    Simple,
    Log,
}

impl From<ReturnKindConfig> for ReturnKind {
    fn from(k: ReturnKindConfig) -> Self {
        match k {
            ReturnKindConfig::Simple => ReturnKind::Simple,
            ReturnKindConfig::Log => ReturnKind::Log,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegimeConfig {
    pub starts: usize,
    /// Bartlett bandwidth of the sandwich standard errors (0 = White).
    pub se_bandwidth: usize,
    pub variance_floor_ratio: f64,
}

impl Default for RegimeConfig {
    fn default() -> Self {
        let d = MsArOptions::default();
        Self { starts: d.starts, se_bandwidth: d.se_bandwidth, variance_floor_ratio: d.variance_floor_ratio }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GarchInput {
    /// Constant-mean model on the regime's raw returns.
    #[default]
    Returns,
    /// Constant-mean model on the MS-AR residuals.
    MsarResiduals,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyConfig {
    #[default]
    SkewedT,
    Normal,
}

impl From<FamilyConfig> for Family {
    fn from(f: FamilyConfig) -> Self {
        match f {
            FamilyConfig::SkewedT => Family::SkewT,
            FamilyConfig::Normal => Family::Normal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GarchConfig {
    pub p_max: usize,
    pub o_max: usize,
    pub q_max: usize,
    pub family: FamilyConfig,
    pub starts: usize,
    pub diagnostic_lags: usize,
    pub input: GarchInput,
}

impl Default for GarchConfig {
    fn default() -> Self {
        let b = GridBounds::default();
        let o = GarchOptions::default();
        Self {
            p_max: b.p_max,
            o_max: b.o_max,
            q_max: b.q_max,
            family: FamilyConfig::SkewedT,
            starts: o.starts,
            diagnostic_lags: o.diagnostic_lags,
            input: GarchInput::Returns,
        }
    }
}

/// `"auto"` or a fixed lag count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Bandwidth {
    #[default]
    Auto,
    Fixed(usize),
}

impl Serialize for Bandwidth {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Bandwidth::Auto => s.serialize_str("auto"),
            Bandwidth::Fixed(l) => s.serialize_u64(*l as u64),
        }
    }
}

impl<'de> Deserialize<'de> for Bandwidth {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Lags(usize),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Lags(l) => Ok(Bandwidth::Fixed(l)),
            Raw::Word(w) if w == "auto" => Ok(Bandwidth::Auto),
            Raw::Word(w) => {
                Err(serde::de::Error::custom(format!("bandwidth must be \"auto\" or a lag count, got {w:?}")))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegressionConfig {
    pub bandwidth: Bandwidth,
    pub floor_ratio: f64,
}

impl Default for RegressionConfig {
    fn default() -> Self {
        Self { bandwidth: Bandwidth::Auto, floor_ratio: FglsOptions::default().floor_ratio }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub memory: usize,
    pub max_iter: usize,
    pub grad_tol: f64,
    pub rel_tol: f64,
    pub stall_grad_tol: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        let d = LbfgsOptions::default();
        Self {
            memory: d.memory,
            max_iter: d.max_iter,
            grad_tol: d.grad_tol,
            rel_tol: d.rel_tol,
            stall_grad_tol: d.stall_grad_tol,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RatesConfig {
    /// Rate-table file; when absent the table is calibrated per asset from
    /// its own trades.
    pub table: Option<PathBuf>,
    /// Treat `premium_paid` as fee-inclusive when calibrating.
    pub strip_fee: bool,
}

/// Which set of reference targets an asset is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reference {
    #[serde(rename = "BTC")]
    Btc,
    #[serde(rename = "ETH")]
    Eth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetConfig {
    pub name: String,
    pub prices: PathBuf,
    pub trades: PathBuf,
    pub ar_order: usize,
    #[serde(default)]
    pub reference: Option<Reference>,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: PipelineConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve(base);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Makes every relative path absolute against `base`.
    pub fn resolve(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.output_dir);
        if let Some(t) = self.rates.table.as_mut() {
            join(t);
        }
        for a in &mut self.assets {
            join(&mut a.prices);
            join(&mut a.trades);
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.assets.is_empty() {
            return bad("no assets configured".into());
        }
        let mut names: Vec<&str> = self.assets.iter().map(|a| a.name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return bad(format!("asset {} listed twice", w[0]));
        }
        for a in &self.assets {
            if a.name.is_empty() || !a.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return bad(format!("asset name {:?} must be non-empty ASCII letters, digits, '-' or '_'", a.name));
            }
            if a.ar_order == 0 {
                return bad(format!("asset {}: ar_order must be at least 1", a.name));
            }
        }
        if !(self.annualization.is_finite() && self.annualization > 0.0) {
            return bad(format!("annualization must be positive, got {}", self.annualization));
        }
        if !self.risk_free_rate.is_finite() {
            return bad("risk_free_rate must be finite".into());
        }
        self.grid_bounds().validate().map_err(|e| CliError::Config(format!("GARCH grid: {e}")))?;
        if self.regimes.starts == 0 || self.garch.starts == 0 {
            return bad("starts must be at least 1".into());
        }
        if self.garch.diagnostic_lags == 0 {
            return bad("diagnostic_lags must be at least 1".into());
        }
        if !(self.regression.floor_ratio > 0.0) {
            return bad("regression floor_ratio must be positive".into());
        }
        if !(self.regimes.variance_floor_ratio > 0.0) {
            return bad("regimes variance_floor_ratio must be positive".into());
        }
        let o = &self.optimizer;
        if o.memory == 0 || o.max_iter == 0 || !(o.grad_tol > 0.0) || !(o.rel_tol > 0.0) || !(o.stall_grad_tol > 0.0) {
            return bad("optimizer settings must be positive".into());
        }
        Ok(())
    }

    pub fn asset(&self, name: &str) -> Result<&AssetConfig> {
        self.assets.iter().find(|a| a.name == name).ok_or_else(|| CliError::Config(format!("unknown asset {name}")))
    }

    pub fn lbfgs(&self) -> LbfgsOptions {
        let o = &self.optimizer;
        LbfgsOptions {
            memory: o.memory,
            max_iter: o.max_iter,
            grad_tol: o.grad_tol,
            rel_tol: o.rel_tol,
            stall_grad_tol: o.stall_grad_tol,
        }
    }

    pub fn msar_options(&self) -> MsArOptions {
        MsArOptions {
            starts: self.regimes.starts,
            lbfgs: self.lbfgs(),
            variance_floor_ratio: self.regimes.variance_floor_ratio,
            se_bandwidth: self.regimes.se_bandwidth,
        }
    }

    pub fn grid_bounds(&self) -> GridBounds {
        GridBounds { p_max: self.garch.p_max, o_max: self.garch.o_max, q_max: self.garch.q_max }
    }

    pub fn garch_options(&self) -> GarchOptions {
        GarchOptions {
            family: self.garch.family.into(),
            starts: self.garch.starts,
            lbfgs: self.lbfgs(),
            pinned: Vec::new(),
            diagnostic_lags: self.garch.diagnostic_lags,
        }
    }

    pub fn fgls_options(&self) -> FglsOptions {
        FglsOptions {
            bandwidth: match self.regression.bandwidth {
                Bandwidth::Auto => None,
                Bandwidth::Fixed(l) => Some(l),
            },
            floor_ratio: self.regression.floor_ratio,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[[assets]]
name = "BTC"
prices = "btc.csv"
trades = "data/wbtc.csv"
ar_order = 8
"#;

    #[test]
    fn defaults_and_path_resolution() {
        let mut cfg: PipelineConfig = toml::from_str(MINIMAL).unwrap();
        cfg.resolve(Path::new("/data/run"));
        cfg.validate().unwrap();
        assert_eq!(cfg.annualization, 365.0);
        assert_eq!(cfg.risk_free_rate, 0.0);
        assert_eq!(cfg.regression.bandwidth, Bandwidth::Auto);
        assert_eq!(cfg.garch.p_max, 10);
        assert_eq!(cfg.assets[0].trades, PathBuf::from("/data/run/data/wbtc.csv"));
        assert_eq!(cfg.output_dir, PathBuf::from("/data/run/out"));
    }

    #[test]
    fn bandwidth_accepts_auto_or_integer() {
        let fixed: RegressionConfig = toml::from_str("bandwidth = 4").unwrap();
        assert_eq!(fixed.bandwidth, Bandwidth::Fixed(4));
        let auto: RegressionConfig = toml::from_str("bandwidth = \"auto\"").unwrap();
        assert_eq!(auto.bandwidth, Bandwidth::Auto);
        assert!(toml::from_str::<RegressionConfig>("bandwidth = \"wide\"").is_err());
    }

    #[test]
    fn rejects_out_of_range_grid_and_unknown_keys() {
        let mut cfg: PipelineConfig = toml::from_str(MINIMAL).unwrap();
        cfg.garch.o_max = 6;
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
        assert!(toml::from_str::<PipelineConfig>(&format!("sed = 1\n{MINIMAL}")).is_err());
    }
}
