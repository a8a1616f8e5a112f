//! Black–Scholes properties and agreement with a quadrature oracle.

use optbench_core::pricing::{arbitrage_band, bs_price, implied_vol, put_call_parity_gap, PricingInput};
use optbench_core::OptionKind;
use optbench_oracles::black_scholes;
use proptest::prelude::*;

fn inputs() -> impl Strategy<Value = PricingInput> {
    (50.0f64..5000.0, 0.6f64..1.4, -0.02f64..0.1, 7.0f64..90.0, 0.1f64..2.0)
        .prop_map(|(s, m, r, d, v)| PricingInput::from_days(s, s * m, r, d, v))
}

fn kinds() -> impl Strategy<Value = OptionKind> {
    prop_oneof![Just(OptionKind::Call), Just(OptionKind::Put)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn parity_holds(i in inputs()) {
        let gap = put_call_parity_gap(&i, &i).unwrap();
        prop_assert!(gap.abs() < 1e-10 * i.spot.max(1.0), "gap {gap}");
    }

    #[test]
    fn monotone_in_spot_strike_and_volatility(i in inputs(), kind in kinds()) {
        let p = bs_price(&i, kind).unwrap();
        let up = |f: &dyn Fn(PricingInput) -> PricingInput| bs_price(&f(i), kind).unwrap();
        let vol_up = up(&|x| x.with_volatility(x.volatility * 1.1));
        prop_assert!(vol_up >= p);
        let spot_up = up(&|x| PricingInput { spot: x.spot * 1.01, ..x });
        let strike_up = up(&|x| PricingInput { strike: x.strike * 1.01, ..x });
        match kind {
            OptionKind::Call => prop_assert!(spot_up >= p && strike_up <= p),
            OptionKind::Put => prop_assert!(spot_up <= p && strike_up >= p),
        }
        let (lo, hi) = arbitrage_band(&i, kind);
        prop_assert!(p >= lo - 1e-9 && p <= hi + 1e-9);
    }

    #[test]
    fn homogeneous_of_degree_one(i in inputs(), kind in kinds(), c in 0.01f64..100.0) {
        let p = bs_price(&i, kind).unwrap();
        let scaled = PricingInput { spot: c * i.spot, strike: c * i.strike, ..i };
        let q = bs_price(&scaled, kind).unwrap();
        prop_assert!((q - c * p).abs() < 1e-10 * (c * i.spot).max(1.0));
    }

    #[test]
    fn implied_vol_round_trip(i in inputs(), kind in kinds()) {
        let p = bs_price(&i, kind).unwrap();
        let (lo, hi) = arbitrage_band(&i, kind);
        // premia indistinguishable from a bound carry no volatility information
        prop_assume!(p - lo > 1e-8 * i.spot && hi - p > 1e-8 * i.spot);
        let iv = implied_vol(p, &i, kind).unwrap();
        prop_assert!((iv - i.volatility).abs() < 1e-6, "{iv} vs {}", i.volatility);
    }
}

#[test]
fn agrees_with_quadrature() {
    let mut case = 0;
    for &m in &[0.7, 0.9, 1.0, 1.1, 1.3] {
        for &v in &[0.15, 0.6, 1.5] {
            for &d in &[7.0, 30.0, 90.0] {
                let i = PricingInput::from_days(1000.0, 1000.0 * m, 0.03, d, v);
                let c = bs_price(&i, OptionKind::Call).unwrap();
                let p = bs_price(&i, OptionKind::Put).unwrap();
                let qc = black_scholes::call(i.spot, i.strike, i.rate, i.maturity, v);
                let qp = black_scholes::put(i.spot, i.strike, i.rate, i.maturity, v);
                assert!((c - qc).abs() < 1e-6, "call case {case}: {c} vs {qc}");
                assert!((p - qp).abs() < 1e-6, "put case {case}: {p} vs {qp}");
                case += 1;
            }
        }
    }
}

#[test]
fn degenerate_limits() {
    let i = PricingInput::from_days(100.0, 80.0, 0.05, 30.0, 1e-13);
    let disc = i.discounted_strike();
    assert!((bs_price(&i, OptionKind::Call).unwrap() - (100.0 - disc)).abs() < 1e-10);
    assert!(bs_price(&i, OptionKind::Put).unwrap().abs() < 1e-10);
    // strike towards zero: the call is worth the spot and the put nothing
    let k0 = PricingInput::from_days(100.0, 1e-12, 0.05, 30.0, 0.8);
    assert!((bs_price(&k0, OptionKind::Call).unwrap() - 100.0).abs() < 1e-10);
    assert!(bs_price(&k0, OptionKind::Put).unwrap().abs() < 1e-10);
}

#[test]
fn premium_outside_band_has_no_implied_vol() {
    let i = PricingInput::from_days(100.0, 100.0, 0.0, 30.0, 0.5);
    assert!(implied_vol(0.0, &i, OptionKind::Call).is_err());
    assert!(implied_vol(100.0, &i, OptionKind::Call).is_err());
    assert!(implied_vol(-1.0, &i, OptionKind::Put).is_err());
}
