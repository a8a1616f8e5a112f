//! Delimited-text and JSON file formats.
//!
//! Inputs are comma-separated with a header row. Floats are written with
//! the shortest representation that parses back to the same value, so
//! every stage file can be reread without drift.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, NaiveDateTime, SecondsFormat, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use optbench_core::amm::RateTable;
use optbench_core::market_data::validate_prices;
use optbench_core::mispricing::MispricingRow;
use optbench_core::{Moneyness, OptionKind, OptionTrade, PricePoint, ReturnPoint, ReturnSeries};

use crate::error::{CliError, Result};

/// Reads every record of a headed CSV file, tagging parse failures with the
/// path and line.
pub fn read_records<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::input(path, csv_message(&e)))?;
    let mut out = Vec::new();
    for record in reader.deserialize() {
        out.push(record.map_err(|e| CliError::input(path, csv_message(&e)))?);
    }
    Ok(out)
}

fn csv_message(e: &csv::Error) -> String {
    match (e.kind(), e.position()) {
        (csv::ErrorKind::Io(io), _) => io.to_string(),
        (_, Some(pos)) => format!("line {}: {e}", pos.line()),
        _ => e.to_string(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PriceRecord {
    date: NaiveDate,
    close: f64,
    volume: f64,
}

/// Loads a `date,close,volume` file, sorted by date.
pub fn load_prices(path: &Path) -> Result<Vec<PricePoint>> {
    let records: Vec<PriceRecord> = read_records(path)?;
    let points = records.into_iter().map(|r| PricePoint { date: r.date, close: r.close, volume: r.volume }).collect();
    validate_prices(points).map_err(|e| CliError::input(path, e))
}

pub fn write_prices(path: &Path, prices: &[PricePoint]) -> Result<()> {
    write_records(path, prices.iter().map(|p| PriceRecord { date: p.date, close: p.close, volume: p.volume }))
}

/// Accepts RFC 3339, `YYYY-MM-DD HH:MM:SS` (UTC) or Unix seconds.
pub fn parse_timestamp(s: &str) -> std::result::Result<DateTime<Utc>, String> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Ok(t.with_timezone(&Utc));
    }
    if let Ok(t) = NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S") {
        return Ok(t.and_utc());
    }
    if let Ok(secs) = s.parse::<i64>() {
        if let Some(t) = DateTime::from_timestamp(secs, 0) {
            return Ok(t);
        }
    }
    Err(format!("unrecognized timestamp {s:?}"))
}

pub fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

mod timestamp {
    use chrono::{DateTime, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format_timestamp(t))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let s = String::deserialize(d)?;
        super::parse_timestamp(&s).map_err(serde::de::Error::custom)
    }
}

mod display {
    use std::fmt::Display;
    use std::str::FromStr;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<T: Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<T, D::Error>
    where
        T: FromStr<Err = String>,
        D: Deserializer<'de>,
    {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TradeRecord {
    trade_id: String,
    underlying: String,
    #[serde(with = "display")]
    kind: OptionKind,
    #[serde(rename = "type", with = "display")]
    moneyness: Moneyness,
    strike: f64,
    maturity_days: u32,
    amount: f64,
    premium_paid: f64,
    spot: f64,
    #[serde(with = "timestamp")]
    timestamp: DateTime<Utc>,
}

impl From<TradeRecord> for OptionTrade {
    fn from(r: TradeRecord) -> Self {
        OptionTrade {
            trade_id: r.trade_id,
            underlying: r.underlying,
            kind: r.kind,
            moneyness: r.moneyness,
            strike: r.strike,
            maturity_days: r.maturity_days,
            amount: r.amount,
            premium_paid: r.premium_paid,
            spot: r.spot,
            timestamp: r.timestamp,
        }
    }
}

impl From<&OptionTrade> for TradeRecord {
    fn from(t: &OptionTrade) -> Self {
        TradeRecord {
            trade_id: t.trade_id.clone(),
            underlying: t.underlying.clone(),
            kind: t.kind,
            moneyness: t.moneyness,
            strike: t.strike,
            maturity_days: t.maturity_days,
            amount: t.amount,
            premium_paid: t.premium_paid,
            spot: t.spot,
            timestamp: t.timestamp,
        }
    }
}

/// Loads a trade book. Any record violating a trade invariant fails the
/// whole load with the offending line; rows come back ordered by
/// timestamp, then trade id.
pub fn load_trades(path: &Path) -> Result<Vec<OptionTrade>> {
    let records: Vec<TradeRecord> = read_records(path)?;
    let mut trades = Vec::with_capacity(records.len());
    let mut ids = std::collections::BTreeSet::new();
    for (i, r) in records.into_iter().enumerate() {
        let line = i + 2;
        let trade = OptionTrade::from(r);
        trade.validate().map_err(|e| CliError::input(path, format!("line {line}: {e}")))?;
        if !ids.insert(trade.trade_id.clone()) {
            return Err(CliError::input(path, format!("line {line}: duplicate trade id {}", trade.trade_id)));
        }
        trades.push(trade);
    }
    if trades.is_empty() {
        return Err(CliError::input(path, "no trades"));
    }
    trades.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.trade_id.cmp(&b.trade_id)));
    Ok(trades)
}

pub fn write_trades(path: &Path, trades: &[OptionTrade]) -> Result<()> {
    write_records(path, trades.iter().map(TradeRecord::from))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ReturnRecord {
    date: NaiveDate,
    #[serde(rename = "return")]
    value: f64,
    volume: f64,
}

pub fn write_returns(path: &Path, series: &ReturnSeries) -> Result<()> {
    write_records(path, series.points.iter().map(|p| ReturnRecord { date: p.date, value: p.value, volume: p.volume }))
}

pub fn load_returns(path: &Path, asset: &str) -> Result<ReturnSeries> {
    let records: Vec<ReturnRecord> = read_records(path)?;
    let points: Vec<ReturnPoint> =
        records.into_iter().map(|r| ReturnPoint { date: r.date, value: r.value, volume: r.volume }).collect();
    if points.windows(2).any(|w| w[0].date >= w[1].date) {
        return Err(CliError::input(path, "dates are not strictly increasing"));
    }
    Ok(ReturnSeries { asset: asset.to_string(), points })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RateRecord {
    #[serde(with = "display")]
    kind: OptionKind,
    step_percent: u32,
    maturity_days: u32,
    rate: f64,
}

/// Loads a `kind,step_percent,maturity_days,rate` table.
pub fn load_rate_table(path: &Path) -> Result<RateTable> {
    let records: Vec<RateRecord> = read_records(path)?;
    let mut table = RateTable::new();
    for (i, r) in records.into_iter().enumerate() {
        table
            .insert(r.kind, r.step_percent, r.maturity_days, r.rate)
            .map_err(|e| CliError::input(path, format!("line {}: {e}", i + 2)))?;
    }
    if table.is_empty() {
        return Err(CliError::input(path, "rate table is empty"));
    }
    Ok(table)
}

pub fn write_rate_table(path: &Path, table: &RateTable) -> Result<()> {
    write_records(
        path,
        table.entries().into_iter().map(|(kind, step_percent, maturity_days, rate)| RateRecord {
            kind,
            step_percent,
            maturity_days,
            rate,
        }),
    )
}

/// One line of the per-trade mispricing file.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct MispricingRecord {
    trade_id: String,
    underlying: String,
    #[serde(with = "timestamp")]
    timestamp: DateTime<Utc>,
    date: NaiveDate,
    #[serde(with = "display")]
    kind: OptionKind,
    #[serde(rename = "type", with = "display")]
    moneyness: Moneyness,
    step_percent: Option<u32>,
    strike: f64,
    maturity_days: u32,
    amount: f64,
    spot: f64,
    premium_paid: f64,
    quote: f64,
    benchmark: f64,
    delta_price: f64,
    underlying_return: f64,
    volume: f64,
    sigma: f64,
    iv: Option<f64>,
    iv_gap: Option<f64>,
}

impl From<&MispricingRow> for MispricingRecord {
    fn from(r: &MispricingRow) -> Self {
        MispricingRecord {
            trade_id: r.trade_id.clone(),
            underlying: r.underlying.clone(),
            timestamp: r.timestamp,
            date: r.date(),
            kind: r.kind,
            moneyness: r.moneyness,
            step_percent: r.step_percent,
            strike: r.strike,
            maturity_days: r.maturity_days,
            amount: r.amount,
            spot: r.spot,
            premium_paid: r.premium_paid,
            quote: r.quote,
            benchmark: r.benchmark,
            delta_price: r.delta_price,
            underlying_return: r.underlying_return,
            volume: r.volume,
            sigma: r.sigma,
            iv: r.iv,
            iv_gap: r.iv_gap(),
        }
    }
}

impl From<MispricingRecord> for MispricingRow {
    fn from(r: MispricingRecord) -> Self {
        MispricingRow {
            trade_id: r.trade_id,
            underlying: r.underlying,
            timestamp: r.timestamp,
            kind: r.kind,
            moneyness: r.moneyness,
            step_percent: r.step_percent,
            strike: r.strike,
            maturity_days: r.maturity_days,
            amount: r.amount,
            spot: r.spot,
            premium_paid: r.premium_paid,
            quote: r.quote,
            benchmark: r.benchmark,
            delta_price: r.delta_price,
            underlying_return: r.underlying_return,
            volume: r.volume,
            sigma: r.sigma,
            iv: r.iv,
        }
    }
}

pub fn write_mispricing(path: &Path, rows: &[MispricingRow]) -> Result<()> {
    write_records(path, rows.iter().map(MispricingRecord::from))
}

pub fn load_mispricing(path: &Path) -> Result<Vec<MispricingRow>> {
    let records: Vec<MispricingRecord> = read_records(path)?;
    Ok(records.into_iter().map(MispricingRow::from).collect())
}

fn create_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::output(dir, e))?;
    }
    Ok(())
}

/// Writes serializable records as a headed CSV with LF line endings.
pub fn write_records<T: Serialize>(path: &Path, records: impl IntoIterator<Item = T>) -> Result<()> {
    create_parent(path)?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| CliError::output(path, e.into()))?;
    for r in records {
        w.serialize(r).map_err(|e| CliError::output(path, e.into()))?;
    }
    w.flush().map_err(|e| CliError::output(path, e))
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    create_parent(path)?;
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::output(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::input(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(path, e))
}

/// Output directory that remembers which files a run wrote.
#[derive(Debug)]
pub struct Sink {
    root: PathBuf,
    written: Vec<String>,
}

impl Sink {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into(), written: Vec::new() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    /// Records `rel` as written and returns its full path.
    pub fn claim(&mut self, rel: &str) -> PathBuf {
        self.written.push(rel.to_string());
        self.path(rel)
    }

    pub fn json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        let p = self.claim(rel);
        write_json(&p, value)
    }

    pub fn records<T: Serialize>(&mut self, rel: &str, records: impl IntoIterator<Item = T>) -> Result<()> {
        let p = self.claim(rel);
        write_records(&p, records)
    }

    /// Files written since the last call, in write order.
    pub fn take_written(&mut self) -> Vec<String> {
        std::mem::take(&mut self.written)
    }
}
