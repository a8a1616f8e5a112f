//! Synthetic two-asset fixture: daily closes from a two-regime AR(1) whose
//! regimes each carry their own GJR-GARCH(1,1) variance, and AMM option
//! purchases priced off a hidden rate table with multiplicative noise.
//!
//! Everything is drawn from one seed, so regenerating with the same options
//! reproduces the files byte for byte.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chrono::{Duration, NaiveDate, TimeZone, Utc};
use rand::Rng;
use rand_distr::{Distribution, LogNormal, Normal};

use optbench_core::amm::{moneyness_of_step, settlement_rate, steps, RateTable};
use optbench_core::pricing::{bs_price, PricingInput};
use optbench_core::simulate::{rng, Shock};
use optbench_core::{OptionKind, OptionTrade, PricePoint};

use crate::error::{CliError, Result};
use crate::io;
use crate::seeds::substream;

pub const CONFIG_FILE: &str = "config.toml";
pub const MATURITIES: [u32; 5] = [7, 14, 30, 60, 90];
/// Trades start after this many days so the volatility path is defined.
pub const FIRST_TRADE_DAY: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureOptions {
    pub seed: u64,
    pub days: usize,
    pub trades: usize,
    /// Tag the assets with reference targets so the report stage writes a
    /// comparison table.
    pub with_references: bool,
}

impl Default for FixtureOptions {
    fn default() -> Self {
        Self { seed: 20_240_501, days: 1500, trades: 300, with_references: false }
    }
}

/// Per-regime GJR-GARCH(1,1) dynamics around an AR(1) mean.
#[derive(Debug, Clone, Copy)]
struct RegimeDynamics {
    intercept: f64,
    ar: f64,
    /// Unconditional variance of the regime's innovations.
    variance: f64,
    alpha: f64,
    gamma: f64,
    beta: f64,
}

impl RegimeDynamics {
    fn omega(&self) -> f64 {
        self.variance * (1.0 - self.alpha - 0.5 * self.gamma - self.beta)
    }
}

#[derive(Debug, Clone)]
pub struct AssetSpec {
    pub name: &'static str,
    pub reference: &'static str,
    start_price: f64,
    regimes: [RegimeDynamics; 2],
    /// `P(s_t = 0 | s_{t-1} = 0)` and `P(s_t = 0 | s_{t-1} = 1)`.
    p00: f64,
    p10: f64,
    /// Volatility behind the hidden rate table.
    table_vol: f64,
}

pub fn assets() -> [AssetSpec; 2] {
    [
        AssetSpec {
            name: "ALPHA",
            reference: "BTC",
            start_price: 20_000.0,
            regimes: [
                RegimeDynamics { intercept: 0.08, ar: 0.05, variance: 1.5, alpha: 0.06, gamma: 0.04, beta: 0.88 },
                RegimeDynamics { intercept: -0.05, ar: 0.05, variance: 16.0, alpha: 0.10, gamma: 0.0, beta: 0.80 },
            ],
            p00: 0.97,
            p10: 0.07,
            table_vol: 0.4,
        },
        AssetSpec {
            name: "BETA",
            reference: "ETH",
            start_price: 1_500.0,
            regimes: [
                RegimeDynamics { intercept: 0.1, ar: 0.03, variance: 2.5, alpha: 0.08, gamma: 0.0, beta: 0.85 },
                RegimeDynamics { intercept: -0.1, ar: 0.03, variance: 25.0, alpha: 0.08, gamma: 0.06, beta: 0.82 },
            ],
            p00: 0.96,
            p10: 0.08,
            table_vol: 0.5,
        },
    ]
}

fn round_to(x: f64, decimals: i32) -> f64 {
    let f = 10f64.powi(decimals);
    (x * f).round() / f
}

pub fn start_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2021, 1, 1).expect("valid date")
}

/// Daily closes and the regime path that produced them (one regime per
/// return, i.e. per day after the first).
pub fn simulate_prices<R: Rng>(spec: &AssetSpec, days: usize, rng: &mut R) -> (Vec<PricePoint>, Vec<usize>) {
    let shock = Shock::StudentT(7.0);
    let volume = LogNormal::new(0.0, 0.4).expect("valid lognormal");
    let mut h = [spec.regimes[0].variance, spec.regimes[1].variance];
    let mut last_eps = [0.0f64; 2];
    let mut prev = 0.0;
    let mut s = usize::from(rng.random::<f64>() >= spec.p10 / (1.0 - spec.p00 + spec.p10));
    let mut close = spec.start_price;
    let mut prices = Vec::with_capacity(days);
    let mut path = Vec::with_capacity(days.saturating_sub(1));
    let base_volume = spec.start_price * 50.0;
    for d in 0..days {
        if d > 0 {
            let stay0 = if s == 0 { spec.p00 } else { spec.p10 };
            s = usize::from(rng.random::<f64>() >= stay0);
            let r = &spec.regimes[s];
            let e = last_eps[s];
            h[s] = r.omega() + r.alpha * e * e + r.gamma * e * e * f64::from(u8::from(e < 0.0)) + r.beta * h[s];
            let eps = h[s].sqrt() * shock.draw(rng);
            last_eps[s] = eps;
            let y = r.intercept + r.ar * prev + eps;
            prev = y;
            close = round_to(close * (1.0 + y / 100.0), 2).max(0.01);
            path.push(s);
        }
        let date = start_date() + Duration::days(d as i64);
        prices.push(PricePoint { date, close, volume: round_to(base_volume * volume.sample(rng), 2) });
    }
    (prices, path)
}

/// Table rate for a cell: the Black-Scholes premium per unit of spot.
fn hidden_rate(kind: OptionKind, percent: u32, maturity_days: u32, vol: f64) -> f64 {
    let input = PricingInput::from_days(1.0, f64::from(percent) / 100.0, 0.0, f64::from(maturity_days), vol);
    bs_price(&input, kind).expect("valid hidden-table inputs")
}

pub fn hidden_table(spec: &AssetSpec) -> RateTable {
    let mut t = RateTable::new();
    for kind in [OptionKind::Call, OptionKind::Put] {
        for &pct in steps(kind) {
            for m in MATURITIES {
                t.insert(kind, pct, m, hidden_rate(kind, pct, m, spec.table_vol)).expect("grid cell");
            }
        }
    }
    t
}

/// Purchases on random days after `FIRST_TRADE_DAY`. `premium_paid` is the
/// table premium times lognormal noise, fee included, rounded to cents.
pub fn simulate_trades<R: Rng>(spec: &AssetSpec, prices: &[PricePoint], n: usize, rng: &mut R) -> Vec<OptionTrade> {
    let spot_noise = Normal::new(0.0, 0.004).expect("valid normal");
    let premium_noise = LogNormal::new(0.0, 0.08).expect("valid lognormal");
    let amount = LogNormal::new(-0.5, 0.9).expect("valid lognormal");
    let first = FIRST_TRADE_DAY.min(prices.len().saturating_sub(1));
    let mut trades: Vec<OptionTrade> = (0..n)
        .map(|i| {
            let day = &prices[rng.random_range(first..prices.len())];
            let kind = if rng.random::<bool>() { OptionKind::Call } else { OptionKind::Put };
            let pct = steps(kind)[rng.random_range(0..4)];
            let maturity_days = MATURITIES[rng.random_range(0..MATURITIES.len())];
            let spot = round_to(day.close * (1.0 + spot_noise.sample(rng)), 2);
            let amount = round_to(amount.sample(rng), 4).max(0.001);
            let rate = hidden_rate(kind, pct, maturity_days, spec.table_vol);
            let fee = 1.0 + settlement_rate(moneyness_of_step(pct));
            let premium_paid = round_to(amount * rate * spot * fee * premium_noise.sample(rng), 2).max(0.01);
            let secs = rng.random_range(0..86_400);
            let timestamp =
                Utc.from_utc_datetime(&day.date.and_hms_opt(0, 0, 0).expect("midnight")) + Duration::seconds(secs);
            OptionTrade {
                trade_id: format!("{}-{:04}", spec.name, i + 1),
                underlying: spec.name.to_string(),
                kind,
                moneyness: moneyness_of_step(pct),
                strike: round_to(spot * f64::from(pct) / 100.0, 2),
                maturity_days,
                amount,
                premium_paid,
                spot,
                timestamp,
            }
        })
        .collect();
    trades.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.trade_id.cmp(&b.trade_id)));
    trades
}

pub fn config_text(opts: &FixtureOptions) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "# Synthetic fixture generated with seed {} ({} days, {} trades per asset).",
        opts.seed, opts.days, opts.trades
    );
    let _ = writeln!(s, "seed = {}", opts.seed);
    s.push_str(
        r#"output_dir = "out"
annualization = 365.0
risk_free_rate = 0.0
return_kind = "simple"

[regimes]
starts = 8

[garch]
p_max = 2
o_max = 1
q_max = 2
family = "skewed-t"
starts = 3
diagnostic_lags = 10
input = "returns"

[regression]
bandwidth = "auto"

[rates]
strip_fee = true
"#,
    );
    for a in assets() {
        let _ = write!(
            s,
            "\n[[assets]]\nname = \"{n}\"\nprices = \"{n}_prices.csv\"\ntrades = \"{n}_trades.csv\"\nar_order = 1\n",
            n = a.name
        );
        if opts.with_references {
            let _ = writeln!(s, "reference = \"{}\"", a.reference);
        }
    }
    s
}

/// Writes the fixture into `dir` and returns the path of its config file.
/// Alongside the inputs it writes each asset's hidden rate table and true
/// regime path for tests to compare against.
pub fn generate(dir: &Path, opts: &FixtureOptions) -> Result<PathBuf> {
    if opts.days < FIRST_TRADE_DAY + 2 {
        return Err(CliError::Config(format!("fixture needs more than {} days", FIRST_TRADE_DAY + 1)));
    }
    for spec in assets() {
        let mut r = rng(substream(opts.seed, "fixture", spec.name));
        let (prices, path) = simulate_prices(&spec, opts.days, &mut r);
        let trades = simulate_trades(&spec, &prices, opts.trades, &mut r);
        io::write_prices(&dir.join(format!("{}_prices.csv", spec.name)), &prices)?;
        io::write_trades(&dir.join(format!("{}_trades.csv", spec.name)), &trades)?;
        io::write_rate_table(&dir.join(format!("{}_hidden_rates.csv", spec.name)), &hidden_table(&spec))?;
        io::write_records(
            &dir.join(format!("{}_regimes.csv", spec.name)),
            prices[1..].iter().zip(&path).map(|(p, s)| (p.date, *s)),
        )?;
    }
    let config = dir.join(CONFIG_FILE);
    std::fs::write(&config, config_text(opts)).map_err(|e| CliError::output(&config, e))?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PipelineConfig;

    #[test]
    fn regimes_are_stationary_garch() {
        for a in assets() {
            for r in a.regimes {
                assert!(r.omega() > 0.0);
                assert!(r.alpha + 0.5 * r.gamma + r.beta < 1.0);
            }
            assert!(a.regimes[0].variance < a.regimes[1].variance);
        }
    }

    #[test]
    fn generated_trades_pass_validation() {
        let spec = &assets()[0];
        let mut r = rng(7);
        let (prices, path) = simulate_prices(spec, 300, &mut r);
        assert_eq!(path.len(), 299);
        let trades = simulate_trades(spec, &prices, 200, &mut r);
        for t in &trades {
            t.validate().unwrap();
            optbench_core::amm::validate_trade_against_grid(t).unwrap();
            assert!(t.date() >= prices[FIRST_TRADE_DAY].date);
        }
    }

    #[test]
    fn config_parses_and_validates() {
        for with_references in [false, true] {
            let text = config_text(&FixtureOptions { with_references, ..Default::default() });
            let cfg: PipelineConfig = toml::from_str(&text).unwrap();
            cfg.validate().unwrap();
            assert_eq!(cfg.assets.len(), 2);
            assert_eq!(cfg.assets[0].reference.is_some(), with_references);
        }
    }
}
