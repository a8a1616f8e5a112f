//! Seeded simulators for the two-regime MS-AR and GJR-GARCH models, used
//! by the recovery tests and to generate synthetic fixtures.

#[allow(unused_imports)] // inherent methods shadow it when `std` is linked
use num_traits::Float;

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};

use crate::regime_switching::MsArParams;
use crate::volatility::GarchParams;

/// Unit-variance innovation law for simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shock {
    Normal,
    /// Student-t with `nu > 2` degrees of freedom, rescaled to unit variance.
    StudentT(f64),
}

impl Shock {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Shock::Normal => StandardNormal.sample(rng),
            Shock::StudentT(nu) => {
                let t: f64 = StudentT::new(nu).expect("nu > 0").sample(rng);
                t * ((nu - 2.0) / nu).sqrt()
            }
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Simulates `n` observations (after `burn` discarded ones) of the MS-AR;
/// returns the series and the regime path. Lags before the start are zero
/// and the first regime is drawn from the stationary distribution.
pub fn simulate_msar(params: &MsArParams, n: usize, burn: usize, seed: u64) -> (Vec<f64>, Vec<usize>) {
    let mut rng = rng(seed);
    let a = params.ar_order();
    let p = params.transition();
    let total = n + burn;
    let mut y = Vec::with_capacity(total + a);
    y.extend(core::iter::repeat_n(0.0, a));
    let mut states = Vec::with_capacity(total);
    let mut s = usize::from(rng.random::<f64>() >= params.stationary()[0]);
    for t in 0..total {
        if t > 0 {
            s = usize::from(rng.random::<f64>() >= p[s][0]);
        }
        let r = &params.regimes[s];
        let k = y.len();
        let mean = r.ar.iter().enumerate().fold(r.intercept, |m, (i, phi)| m + phi * y[k - 1 - i]);
        let z: f64 = StandardNormal.sample(&mut rng);
        y.push(mean + r.variance.sqrt() * z);
        states.push(s);
    }
    (y.split_off(a + burn), states.split_off(burn))
}

/// Simulates `n` observations of a GJR-GARCH process after a burn-in that
/// starts from the unconditional variance.
pub fn simulate_garch(params: &GarchParams, shock: Shock, n: usize, burn: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng(seed);
    let (p, o, q) = (params.alpha.len(), params.gamma.len(), params.beta.len());
    let start = params.unconditional_variance();
    let start = if start.is_finite() { start } else { params.omega };
    let lag = p.max(o).max(q);
    let mut eps = Vec::with_capacity(n + burn + lag);
    let mut var = Vec::with_capacity(n + burn + lag);
    eps.extend(core::iter::repeat_n(0.0, lag));
    var.extend(core::iter::repeat_n(start, lag));
    for _ in 0..n + burn {
        let k = eps.len();
        let mut s = params.omega;
        for i in 0..p {
            s += params.alpha[i] * eps[k - 1 - i] * eps[k - 1 - i];
        }
        for i in 0..o {
            let e: f64 = eps[k - 1 - i];
            if e < 0.0 {
                s += params.gamma[i] * e * e;
            }
        }
        for j in 0..q {
            s += params.beta[j] * var[k - 1 - j];
        }
        eps.push(s.sqrt() * shock.draw(&mut rng));
        var.push(s);
    }
    eps.split_off(lag + burn).into_iter().map(|e| e + params.mu).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regime_switching::RegimeParams;
    use crate::volatility::Innovations;
    use alloc::vec;

    #[test]
    fn msar_simulation_is_seeded() {
        let p = MsArParams {
            regimes: [
                RegimeParams { intercept: 0.0, ar: vec![0.1], variance: 1.0 },
                RegimeParams { intercept: 0.0, ar: vec![0.1], variance: 25.0 },
            ],
            p00: 0.95,
            p10: 0.05,
        };
        let (y1, s1) = simulate_msar(&p, 500, 50, 7);
        let (y2, s2) = simulate_msar(&p, 500, 50, 7);
        assert_eq!((y1.len(), s1.len()), (500, 500));
        assert_eq!(y1, y2);
        assert_eq!(s1, s2);
    }

    #[test]
    fn garch_simulation_matches_unconditional_variance() {
        let p = GarchParams {
            mu: 0.0,
            omega: 0.1,
            alpha: vec![0.05],
            gamma: vec![],
            beta: vec![0.9],
            innovations: Innovations::Normal,
        };
        let x = simulate_garch(&p, Shock::StudentT(8.0), 50_000, 500, 11);
        let v = x.iter().map(|e| e * e).sum::<f64>() / x.len() as f64;
        assert!((v / p.unconditional_variance() - 1.0).abs() < 0.15, "{v}");
    }
}
