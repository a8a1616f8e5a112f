//! Hansen's standardized skewed Student-t density.
//!
//! Shape `eta > 2` controls the tails and skew `lambda` in (-1, 1) the
//! asymmetry; the density has mean zero and unit variance for every
//! admissible pair, and reduces to the unit-variance Student-t at
//! `lambda = 0`.

use core::f64::consts::PI;
#[allow(unused_imports)] // inherent methods shadow it when `std` is linked
use num_traits::Float;

use crate::special::ln_gamma;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewT {
    pub eta: f64,
    pub lambda: f64,
    ln_bc: f64,
    a: f64,
    b: f64,
}

impl SkewT {
    /// `None` outside `eta > 2`, `|lambda| < 1`.
    pub fn new(eta: f64, lambda: f64) -> Option<Self> {
        if !(eta > 2.0) || !(lambda.abs() < 1.0) || !eta.is_finite() {
            return None;
        }
        let ln_c = ln_gamma(0.5 * (eta + 1.0)) - ln_gamma(0.5 * eta) - 0.5 * (PI * (eta - 2.0)).ln();
        let c = ln_c.exp();
        let a = 4.0 * lambda * c * (eta - 2.0) / (eta - 1.0);
        let b = (1.0 + 3.0 * lambda * lambda - a * a).sqrt();
        Some(Self { eta, lambda, ln_bc: b.ln() + ln_c, a, b })
    }

    /// Location of the kink where the two half-densities meet.
    pub fn kink(&self) -> f64 {
        -self.a / self.b
    }

    pub fn ln_pdf(&self, z: f64) -> f64 {
        let side = if z < self.kink() { 1.0 - self.lambda } else { 1.0 + self.lambda };
        let u = (self.b * z + self.a) / side;
        self.ln_bc - 0.5 * (self.eta + 1.0) * (u * u / (self.eta - 2.0)).ln_1p()
    }

    pub fn pdf(&self, z: f64) -> f64 {
        self.ln_pdf(z).exp()
    }
}

/// Log density of the Student-t with `nu > 2` degrees of freedom rescaled
/// to unit variance.
pub fn standardized_t_ln_pdf(z: f64, nu: f64) -> f64 {
    ln_gamma(0.5 * (nu + 1.0))
        - ln_gamma(0.5 * nu)
        - 0.5 * (PI * (nu - 2.0)).ln()
        - 0.5 * (nu + 1.0) * (z * z / (nu - 2.0)).ln_1p()
}
