//! Forward filter and backward smoother against exhaustive enumeration of
//! every regime path.

use optbench_core::regime_switching::{hamilton_filter, kim_smoother, InitialState, MsArParams, RegimeParams};
use optbench_core::simulate::{rng, simulate_msar};
use optbench_oracles::regime_paths::{enumerate, Regime};
use rand::Rng;

fn random_params<R: Rng>(r: &mut R, ar_order: usize) -> MsArParams {
    let regime = |r: &mut R| RegimeParams {
        intercept: r.random_range(-1.0..1.0),
        ar: (0..ar_order).map(|_| r.random_range(-0.6..0.6)).collect(),
        variance: r.random_range(0.2..6.0),
    };
    MsArParams { regimes: [regime(r), regime(r)], p00: r.random_range(0.05..0.98), p10: r.random_range(0.02..0.95) }
}

fn oracle_regimes(p: &MsArParams) -> [Regime; 2] {
    p.regimes.clone().map(|g| Regime { intercept: g.intercept, ar: g.ar, variance: g.variance })
}

fn check(seed: u64, ar_order: usize, t: usize, initial: InitialState) {
    let mut r = rng(seed);
    let params = random_params(&mut r, ar_order);
    let (y, _) = simulate_msar(&params, t + ar_order, 20, seed ^ 0xabc);
    let prior = match initial {
        InitialState::Stationary => params.stationary(),
        InitialState::Fixed(pi) => pi,
    };
    let exact = enumerate(&oracle_regimes(&params), params.transition(), prior, &y);
    let filter = hamilton_filter(&params, &y, initial).unwrap();
    let smoothed = kim_smoother(&params, &filter);
    assert!(
        (filter.log_likelihood - exact.log_likelihood).abs() < 1e-8,
        "seed {seed}: {} vs {}",
        filter.log_likelihood,
        exact.log_likelihood
    );
    for (k, (a, b)) in smoothed.iter().zip(&exact.smoothed).enumerate() {
        assert!((a[0] - b[0]).abs() < 1e-8 && (a[1] - b[1]).abs() < 1e-8, "seed {seed}, t {k}");
    }
    // the filtered probability at the last date is also the smoothed one
    let last = filter.filtered.last().unwrap();
    assert!((last[0] - exact.smoothed.last().unwrap()[0]).abs() < 1e-8);
}

#[test]
fn stationary_start_matches_enumeration() {
    for seed in 0..10 {
        check(seed, 1, 10, InitialState::Stationary);
    }
}

#[test]
fn fixed_start_and_higher_order_match_enumeration() {
    for seed in 100..106 {
        check(seed, 2, 10, InitialState::Fixed([0.3, 0.7]));
    }
    check(200, 3, 12, InitialState::Fixed([1.0, 0.0]));
}

#[test]
fn contributions_sum_to_log_likelihood() {
    let mut r = rng(7);
    let params = random_params(&mut r, 1);
    let (y, _) = simulate_msar(&params, 300, 0, 8);
    let f = hamilton_filter(&params, &y, InitialState::Stationary).unwrap();
    let sum: f64 = f.contributions.iter().sum();
    assert!((sum - f.log_likelihood).abs() < 1e-9 * f.log_likelihood.abs());
    for p in f.filtered.iter().chain(&f.predicted) {
        assert!((p[0] + p[1] - 1.0).abs() < 1e-12);
    }
}
