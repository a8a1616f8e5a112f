//! GJR-GARCH likelihood and variance recursion against a direct reference
//! loop, plus parameter-vector round trips.

use optbench_core::simulate::{simulate_garch, Shock};
use optbench_core::volatility::garch::{log_likelihood, presample_variance, variance_path};
use optbench_core::volatility::{Family, GarchParams, GarchSpec, Innovations};
use optbench_oracles::garch as reference;
use proptest::prelude::*;

fn params(omega: f64, alpha: Vec<f64>, gamma: Vec<f64>, beta: Vec<f64>, innovations: Innovations) -> GarchParams {
    GarchParams { mu: 0.05, omega, alpha, gamma, beta, innovations }
}

fn shape(p: &GarchParams) -> Option<(f64, f64)> {
    match p.innovations {
        Innovations::Normal => None,
        Innovations::SkewT { eta, lambda } => Some((eta, lambda)),
    }
}

fn check(p: &GarchParams, x: &[f64]) {
    let s0 = presample_variance(x);
    let ours = log_likelihood(p, x, s0);
    let theirs = reference::log_likelihood(p.mu, p.omega, &p.alpha, &p.gamma, &p.beta, shape(p), x, s0);
    assert!((ours - theirs).abs() < 1e-9 * theirs.abs().max(1.0), "{ours} vs {theirs}");
}

#[test]
fn matches_reference_likelihood() {
    let skew = Innovations::SkewT { eta: 6.0, lambda: -0.2 };
    let cases = [
        params(0.1, vec![0.05], vec![], vec![0.9], Innovations::Normal),
        params(0.1, vec![0.05], vec![], vec![0.9], skew),
        params(0.2, vec![0.04, 0.03], vec![0.06], vec![0.5, 0.3], skew),
        params(0.3, vec![0.1], vec![-0.05], vec![0.8], Innovations::SkewT { eta: 2.5, lambda: 0.6 }),
        params(1.0, vec![], vec![], vec![], Innovations::Normal),
    ];
    for (i, p) in cases.iter().enumerate() {
        let x = simulate_garch(&cases[0], Shock::StudentT(6.0), 600, 100, i as u64);
        check(p, &x);
    }
}

#[test]
fn recursion_reproduces_stored_variances() {
    let p = params(0.1, vec![0.05], vec![0.04], vec![0.88], Innovations::Normal);
    let x = simulate_garch(&p, Shock::Normal, 400, 50, 3);
    let s0 = presample_variance(&x);
    let path = variance_path(&p, &x, s0).unwrap();
    // first step uses zero pre-sample shocks and the pre-sample variance
    assert!((path.variances[0] - (0.1 + 0.88 * s0)).abs() < 1e-14);
    for t in 1..x.len() {
        let e = path.residuals[t - 1];
        let lev = if e < 0.0 { 0.04 * e * e } else { 0.0 };
        let expect = 0.1 + 0.05 * e * e + lev + 0.88 * path.variances[t - 1];
        assert!((path.variances[t] - expect).abs() < 1e-12 * expect);
    }
}

#[test]
fn inadmissible_parameters_have_no_likelihood() {
    let x = [0.1, -0.3, 0.5, 0.2];
    let bad_omega = params(0.0, vec![0.1], vec![], vec![0.8], Innovations::Normal);
    assert_eq!(log_likelihood(&bad_omega, &x, 1.0), f64::NEG_INFINITY);
    let bad_shape = params(0.1, vec![0.1], vec![], vec![0.8], Innovations::SkewT { eta: 2.0, lambda: 0.0 });
    assert_eq!(log_likelihood(&bad_shape, &x, 1.0), f64::NEG_INFINITY);
}

proptest! {
    #[test]
    fn vector_round_trip(
        p in 1usize..3, o in 0usize..2, q in 1usize..3,
        seed in proptest::collection::vec(0.01f64..0.3, 12),
        skew in any::<bool>(),
    ) {
        let spec = GarchSpec::new(p, o, q).unwrap();
        let innovations = if skew { Innovations::SkewT { eta: 4.0 + seed[0], lambda: seed[1] - 0.15 } } else { Innovations::Normal };
        let g = GarchParams {
            mu: seed[2],
            omega: seed[3],
            alpha: seed[4..4 + p].to_vec(),
            gamma: seed[6..6 + o].to_vec(),
            beta: seed[7..7 + q].to_vec(),
            innovations,
        };
        let family = if skew { Family::SkewT } else { Family::Normal };
        let v = g.to_vec();
        prop_assert_eq!(v.len(), spec.n_params(family));
        prop_assert_eq!(GarchParams::from_vec(spec, family, &v), g.clone());
        prop_assert_eq!(g.spec(), spec);
        prop_assert_eq!(GarchParams::names(spec, family).len(), v.len());
    }
}
