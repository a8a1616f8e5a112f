//! Skewed-t density: normalization, moments and the symmetric limit, by
//! quadrature and against an independent closed form.

use optbench_core::volatility::skewt::standardized_t_ln_pdf;
use optbench_core::volatility::SkewT;
use optbench_oracles::{quad, skewt};

const ETAS: [f64; 3] = [2.5, 4.0, 10.0];
const LAMBDAS: [f64; 3] = [-0.5, 0.0, 0.5];

fn moment(d: &SkewT, k: i32) -> f64 {
    quad::real_line(|z| z.powi(k) * d.pdf(z), d.kink())
}

#[test]
fn integrates_to_one_with_zero_mean_and_unit_variance() {
    for eta in ETAS {
        for lambda in LAMBDAS {
            let d = SkewT::new(eta, lambda).unwrap();
            let mass = moment(&d, 0);
            let mean = moment(&d, 1);
            let var = moment(&d, 2);
            assert!((mass - 1.0).abs() < 1e-6, "({eta}, {lambda}) mass {mass}");
            assert!(mean.abs() < 1e-6, "({eta}, {lambda}) mean {mean}");
            assert!((var - 1.0).abs() < 1e-4, "({eta}, {lambda}) variance {var}");
        }
    }
}

#[test]
fn symmetric_case_is_standardized_student_t() {
    for eta in ETAS {
        let d = SkewT::new(eta, 0.0).unwrap();
        for i in -40..=40 {
            let z = 0.25 * i as f64;
            let reference = skewt::standardized_t_pdf(z, eta);
            assert!((d.pdf(z) - reference).abs() < 1e-10, "eta {eta} z {z}");
            assert!((standardized_t_ln_pdf(z, eta).exp() - reference).abs() < 1e-10);
        }
    }
}

#[test]
fn matches_independent_closed_form() {
    for eta in [2.2, 3.0, 6.0, 30.0] {
        for lambda in [-0.9, -0.3, 0.1, 0.7] {
            let d = SkewT::new(eta, lambda).unwrap();
            assert!((d.kink() - skewt::kink(eta, lambda)).abs() < 1e-12);
            for i in -30..=30 {
                let z = 0.3 * i as f64;
                let (a, b) = (d.pdf(z), skewt::pdf(z, eta, lambda));
                assert!((a - b).abs() < 1e-12 * b.max(1.0), "({eta}, {lambda}) z {z}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn skew_sign_moves_mass() {
    // positive lambda puts more mass to the right of the kink
    let d = SkewT::new(5.0, 0.4).unwrap();
    let right = quad::upper(|z| d.pdf(z), d.kink());
    assert!((right - 0.7).abs() < 1e-8, "right mass {right}");
}
