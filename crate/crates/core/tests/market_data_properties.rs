//! Return construction and descriptive statistics.

use chrono::NaiveDate;
use optbench_core::market_data::{compute_returns, describe_returns, validate_prices};
use optbench_core::stats::describe;
use optbench_core::{PricePoint, ReturnKind};
use proptest::prelude::*;

fn series(closes: &[f64]) -> Vec<PricePoint> {
    let start = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
    closes
        .iter()
        .enumerate()
        .map(|(i, c)| PricePoint { date: start + chrono::Days::new(i as u64), close: *c, volume: 1.0 + i as f64 })
        .collect()
}

proptest! {
    #[test]
    fn cumulated_simple_returns_recover_the_last_close(closes in proptest::collection::vec(1.0f64..1e5, 2..400)) {
        let r = compute_returns("X", &series(&closes), ReturnKind::Simple).unwrap();
        prop_assert_eq!(r.len(), closes.len() - 1);
        let end = r.points.iter().fold(closes[0], |p, pt| p * (1.0 + pt.value / 100.0));
        let last = *closes.last().unwrap();
        prop_assert!((end / last - 1.0).abs() < 1e-9);
    }

    #[test]
    fn moments_are_permutation_invariant(mut xs in proptest::collection::vec(-50.0f64..50.0, 4..200), seed in any::<u64>()) {
        let a = describe(&xs).unwrap();
        // deterministic shuffle
        let mut s = seed | 1;
        for i in (1..xs.len()).rev() {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            xs.swap(i, (s % (i as u64 + 1)) as usize);
        }
        let b = describe(&xs).unwrap();
        let close = |u: f64, v: f64| (u - v).abs() <= 1e-9 * u.abs().max(1.0);
        let close_opt = |u: Option<f64>, v: Option<f64>| match (u, v) {
            (Some(u), Some(v)) => close(u, v),
            (u, v) => u.is_none() && v.is_none(),
        };
        prop_assert!(close(a.mean, b.mean) && close(a.std, b.std));
        prop_assert!(close_opt(a.skewness, b.skewness) && close_opt(a.kurtosis, b.kurtosis));
        prop_assert_eq!((a.min, a.max, a.median), (b.min, b.max, b.median));
    }
}

#[test]
fn volume_is_carried_from_the_later_day() {
    let r = compute_returns("X", &series(&[100.0, 110.0, 99.0]), ReturnKind::Simple).unwrap();
    assert_eq!(r.points[0].value, 10.0);
    assert_eq!(r.points[0].volume, 2.0);
    assert!((r.points[1].value + 10.0).abs() < 1e-12);
    let l = compute_returns("X", &series(&[100.0, 110.0]), ReturnKind::Log).unwrap();
    assert!((l.points[0].value - 100.0 * 1.1f64.ln()).abs() < 1e-12);
}

#[test]
fn gaps_are_spanned() {
    let mut p = series(&[100.0, 105.0, 120.0]);
    p.remove(1);
    let r = compute_returns("X", &p, ReturnKind::Simple).unwrap();
    assert_eq!(r.len(), 1);
    assert!((r.points[0].value - 20.0).abs() < 1e-12);
    assert_eq!(r.points[0].date, p[1].date);
}

#[test]
fn validation_sorts_and_rejects() {
    let mut p = series(&[3.0, 1.0, 2.0]);
    p.reverse();
    let sorted = validate_prices(p.clone()).unwrap();
    assert!(sorted.windows(2).all(|w| w[0].date < w[1].date));
    let mut dup = p.clone();
    dup[1].date = dup[0].date;
    assert!(validate_prices(dup).is_err());
    let mut zero = p;
    zero[2].close = 0.0;
    assert!(validate_prices(zero).is_err());
    assert!(validate_prices(Vec::new()).is_err());
}

#[test]
fn summary_of_symmetric_and_constant_series() {
    let s = describe(&[-1.0, 0.0, 1.0]).unwrap();
    assert!(s.skewness.unwrap().abs() < 1e-15);
    assert_eq!(s.kurtosis, Some(1.5));
    let c = describe(&[5.0; 4]).unwrap();
    assert!(c.is_degenerate());
    let r = compute_returns("X", &series(&[1.0, 2.0, 3.0, 4.0]), ReturnKind::Simple).unwrap();
    assert!(describe_returns(&r).is_ok());
}
