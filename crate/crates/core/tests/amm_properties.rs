//! Rate-rule quoting: fee identities, round trips and the strike grid.

use chrono::{TimeZone, Utc};
use optbench_core::amm::{
    implied_rate_from, moneyness_of_step, quote, steps, validate_trade_against_grid, RateTable, CALL_STEPS, PUT_STEPS,
};
use optbench_core::{Moneyness, OptionKind, OptionTrade};
use proptest::prelude::*;

fn table() -> RateTable {
    let mut t = RateTable::new();
    for kind in [OptionKind::Call, OptionKind::Put] {
        for &pct in steps(kind) {
            for (i, m) in [7u32, 14, 30, 60, 90].into_iter().enumerate() {
                let base = if pct == 100 { 0.04 } else { 0.015 };
                t.insert(kind, pct, m, base * (1.0 + 0.3 * i as f64)).unwrap();
            }
        }
    }
    t
}

fn kinds() -> impl Strategy<Value = OptionKind> {
    prop_oneof![Just(OptionKind::Call), Just(OptionKind::Put)]
}

fn trade(kind: OptionKind, ratio: f64, spot: f64) -> OptionTrade {
    let atm = (ratio - 1.0).abs() <= 1e-3;
    OptionTrade {
        trade_id: "t".into(),
        underlying: "ETH".into(),
        kind,
        moneyness: if atm { Moneyness::Atm } else { Moneyness::Otm },
        strike: ratio * spot,
        maturity_days: 30,
        amount: 1.0,
        premium_paid: 10.0,
        spot,
        timestamp: Utc.with_ymd_and_hms(2021, 3, 1, 12, 0, 0).unwrap(),
    }
}

proptest! {
    #[test]
    fn fee_ratio_is_exact(kind in kinds(), step in 0usize..4, m in 7u32..=90, spot in 10.0f64..60000.0, amount in 0.01f64..500.0) {
        let pct = steps(kind)[step];
        let q = quote(&table(), spot, kind, pct, m, amount).unwrap();
        let notional = amount * q.premium;
        let expected_rate = if pct == 100 { 0.01 } else { 0.005 };
        prop_assert_eq!(q.moneyness, moneyness_of_step(pct));
        prop_assert!((q.fee / notional - expected_rate).abs() < 1e-15);
        prop_assert!((q.total - (notional + q.fee)).abs() <= 1e-12 * q.total);
        prop_assert!((q.premium - q.rate * spot).abs() <= 1e-12 * q.premium);
    }

    #[test]
    fn quote_and_implied_rate_round_trip(kind in kinds(), step in 0usize..4, m in 7u32..=90, spot in 10.0f64..60000.0, amount in 0.01f64..500.0) {
        let pct = steps(kind)[step];
        let q = quote(&table(), spot, kind, pct, m, amount).unwrap();
        let back = implied_rate_from(amount * q.premium, amount, spot).unwrap();
        prop_assert!((back.rate - q.rate).abs() < 1e-12 * q.rate);
    }

    #[test]
    fn homogeneous_in_spot_and_linear_in_amount(kind in kinds(), step in 0usize..4, spot in 10.0f64..60000.0, c in 0.1f64..10.0) {
        let pct = steps(kind)[step];
        let q = quote(&table(), spot, kind, pct, 30, 1.0).unwrap();
        let scaled = quote(&table(), c * spot, kind, pct, 30, 1.0).unwrap();
        let bigger = quote(&table(), spot, kind, pct, 30, c).unwrap();
        prop_assert!((scaled.premium - c * q.premium).abs() < 1e-12 * scaled.premium);
        prop_assert!((bigger.total - c * q.total).abs() < 1e-12 * bigger.total);
    }

    #[test]
    fn grid_rejects_in_the_money_strikes(kind in kinds(), step in 0usize..4, spot in 10.0f64..60000.0, jitter in -5e-4f64..5e-4) {
        // mirror images of the listed steps lie in the money
        let listed = f64::from(steps(kind)[step]) / 100.0;
        let itm = match (step, kind) {
            (0, OptionKind::Call) => 0.95,
            (0, OptionKind::Put) => 1.05,
            _ => 2.0 - listed,
        };
        let t = trade(kind, itm * (1.0 + jitter), spot);
        prop_assert!(validate_trade_against_grid(&t).is_err());
        prop_assert!(t.validate().is_err());
        let ok = trade(kind, listed * (1.0 + jitter), spot);
        prop_assert_eq!(validate_trade_against_grid(&ok).unwrap(), steps(kind)[step]);
        prop_assert!(ok.validate().is_ok());
    }
}

#[test]
fn steps_are_the_listed_grid() {
    assert_eq!(CALL_STEPS, [100, 110, 120, 130]);
    assert_eq!(PUT_STEPS, [100, 90, 80, 70]);
}

#[test]
fn interpolation_is_flagged_and_linear() {
    let t = table();
    let exact = t.rate(OptionKind::Call, 110, 14).unwrap();
    assert!(!exact.interpolated);
    let mid = t.rate(OptionKind::Call, 110, 22).unwrap();
    let hi = t.rate(OptionKind::Call, 110, 30).unwrap();
    assert!(mid.interpolated);
    assert!((mid.rate - 0.5 * (exact.rate + hi.rate)).abs() < 1e-15);
    assert!(t.rate(OptionKind::Call, 105, 30).is_err());
    assert!(t.rate(OptionKind::Put, 90, 91).is_err());
}
