//! Distribution of `IV - sigma` by underlying and option kind.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::rows::MispricingRow;
use crate::market_data::OptionKind;
use crate::stats::{describe, Summary};

#[derive(Debug, Clone, PartialEq)]
pub struct IvGapBucket {
    pub underlying: String,
    pub kind: OptionKind,
    pub summary: Summary,
}

/// One plot point: gap against strike.
#[derive(Debug, Clone, PartialEq)]
pub struct StrikePoint {
    pub underlying: String,
    pub kind: OptionKind,
    pub strike: f64,
    pub step_percent: Option<u32>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IvGapReport {
    pub buckets: Vec<IvGapBucket>,
    pub by_strike: Vec<StrikePoint>,
    /// Buckets without any implied volatility, omitted from `buckets`.
    pub notes: Vec<String>,
}

fn kind_order(k: OptionKind) -> u8 {
    match k {
        OptionKind::Call => 0,
        OptionKind::Put => 1,
    }
}

pub fn iv_gap_report(rows: &[MispricingRow]) -> IvGapReport {
    let mut groups: BTreeMap<(String, u8), (OptionKind, Vec<f64>)> = BTreeMap::new();
    let mut by_strike = Vec::new();
    for row in rows {
        let entry =
            groups.entry((row.underlying.clone(), kind_order(row.kind))).or_insert_with(|| (row.kind, Vec::new()));
        if let Some(gap) = row.iv_gap() {
            entry.1.push(gap);
            by_strike.push(StrikePoint {
                underlying: row.underlying.clone(),
                kind: row.kind,
                strike: row.strike,
                step_percent: row.step_percent,
                value: gap,
            });
        }
    }
    let mut buckets = Vec::new();
    let mut notes = Vec::new();
    for ((underlying, _), (kind, gaps)) in groups {
        match describe(&gaps) {
            Ok(summary) => buckets.push(IvGapBucket { underlying, kind, summary }),
            Err(_) => notes.push(format!("{underlying} {kind}: no trade with an implied volatility; bucket omitted")),
        }
    }
    IvGapReport { buckets, by_strike, notes }
}

/// `delta_price` against strike for plotting.
pub fn delta_price_by_strike(rows: &[MispricingRow]) -> Vec<StrikePoint> {
    rows.iter()
        .map(|r| StrikePoint {
            underlying: r.underlying.clone(),
            kind: r.kind,
            strike: r.strike,
            step_percent: r.step_percent,
            value: r.delta_price,
        })
        .collect()
}
