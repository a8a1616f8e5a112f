//! Reference computations for the test suites, written independently of
//! `optbench-core`: numerical quadrature, exhaustive enumeration of regime
//! paths, and a GJR-GARCH likelihood.

pub mod quad {
    //! Double-exponential quadrature on finite and infinite intervals.

    use quadrature::double_exponential;

    const TOL: f64 = 1e-14;

    pub fn finite<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
        double_exponential::integrate(f, a, b, TOL).integral
    }

    /// `int_a^inf f` through `z = a + u / (1 - u)`.
    pub fn upper<F: Fn(f64) -> f64>(f: F, a: f64) -> f64 {
        finite(
            |u| {
                if u >= 1.0 {
                    return 0.0;
                }
                let w = 1.0 - u;
                let v = f(a + u / w) / (w * w);
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            },
            0.0,
            1.0,
        )
    }

    /// `int_-inf^b f`.
    pub fn lower<F: Fn(f64) -> f64>(f: F, b: f64) -> f64 {
        upper(|z| f(-z), -b)
    }

    /// `int_R f`, split at `at` (put it on any kink).
    pub fn real_line<F: Fn(f64) -> f64>(f: F, at: f64) -> f64 {
        lower(&f, at) + upper(&f, at)
    }
}

pub mod black_scholes {
    //! Option prices as discounted expectations of the terminal payoff
    //! under the lognormal law, integrated numerically.

    use super::quad;

    fn phi(z: f64) -> f64 {
        (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
    }

    fn terminal(s: f64, r: f64, t: f64, sigma: f64, z: f64) -> f64 {
        s * ((r - 0.5 * sigma * sigma) * t + sigma * t.sqrt() * z).exp()
    }

    /// Standard-normal quantile at which the terminal price equals `k`.
    fn exercise_boundary(s: f64, k: f64, r: f64, t: f64, sigma: f64) -> f64 {
        ((k / s).ln() - (r - 0.5 * sigma * sigma) * t) / (sigma * t.sqrt())
    }

    /// Integrand support in standard-normal units; the density beyond it
    /// is below 1e-30 for the volatilities under test.
    const SUPPORT: f64 = 12.0;

    /// `int_lo^hi f` on the truncated support, split at zero where the
    /// normal density peaks.
    fn expectation<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> f64 {
        let (lo, hi) = (lo.max(-SUPPORT), hi.min(SUPPORT));
        if lo >= hi {
            return 0.0;
        }
        if lo < 0.0 && hi > 0.0 {
            quad::finite(&f, lo, 0.0) + quad::finite(&f, 0.0, hi)
        } else {
            quad::finite(&f, lo, hi)
        }
    }

    pub fn call(s: f64, k: f64, r: f64, t: f64, sigma: f64) -> f64 {
        let z0 = exercise_boundary(s, k, r, t, sigma);
        (-r * t).exp() * expectation(|z| (terminal(s, r, t, sigma, z) - k) * phi(z), z0, SUPPORT)
    }

    pub fn put(s: f64, k: f64, r: f64, t: f64, sigma: f64) -> f64 {
        let z0 = exercise_boundary(s, k, r, t, sigma);
        (-r * t).exp() * expectation(|z| (k - terminal(s, r, t, sigma, z)) * phi(z), -SUPPORT, z0)
    }
}

pub mod skewt {
    //! Hansen's skewed-t written out from the closed form with `statrs`
    //! gamma functions.

    use statrs::function::gamma::gamma;

    pub fn pdf(z: f64, eta: f64, lambda: f64) -> f64 {
        let c = gamma((eta + 1.0) / 2.0) / ((std::f64::consts::PI * (eta - 2.0)).sqrt() * gamma(eta / 2.0));
        let a = 4.0 * lambda * c * (eta - 2.0) / (eta - 1.0);
        let b = (1.0 + 3.0 * lambda * lambda - a * a).sqrt();
        let denom = if z < -a / b { 1.0 - lambda } else { 1.0 + lambda };
        let u = (b * z + a) / denom;
        b * c * (1.0 + u * u / (eta - 2.0)).powf(-(eta + 1.0) / 2.0)
    }

    /// Kink of the density, where the two halves meet.
    pub fn kink(eta: f64, lambda: f64) -> f64 {
        let c = gamma((eta + 1.0) / 2.0) / ((std::f64::consts::PI * (eta - 2.0)).sqrt() * gamma(eta / 2.0));
        let a = 4.0 * lambda * c * (eta - 2.0) / (eta - 1.0);
        let b = (1.0 + 3.0 * lambda * lambda - a * a).sqrt();
        -a / b
    }

    /// Student-t with `nu` degrees of freedom scaled to unit variance.
    pub fn standardized_t_pdf(z: f64, nu: f64) -> f64 {
        use statrs::distribution::{Continuous, StudentsT};
        let scale = ((nu - 2.0) / nu).sqrt();
        StudentsT::new(0.0, 1.0, nu).unwrap().pdf(z / scale) / scale
    }
}

pub mod regime_paths {
    //! Exact two-regime likelihood and smoothed probabilities by summing
    //! over all `2^T` regime paths.

    #[derive(Debug, Clone)]
    pub struct Regime {
        pub intercept: f64,
        pub ar: Vec<f64>,
        pub variance: f64,
    }

    #[derive(Debug, Clone)]
    pub struct Enumeration {
        pub log_likelihood: f64,
        pub smoothed: Vec<[f64; 2]>,
    }

    fn density(r: &Regime, y: &[f64], t: usize) -> f64 {
        let mut mean = r.intercept;
        for (i, phi) in r.ar.iter().enumerate() {
            mean += phi * y[t - 1 - i];
        }
        let e = y[t] - mean;
        (-0.5 * e * e / r.variance).exp() / (2.0 * std::f64::consts::PI * r.variance).sqrt()
    }

    /// `trans[i][j] = P(s_t = j | s_{t-1} = i)`; `initial` is the law of
    /// the regime at the first modeled observation `y[a]`.
    pub fn enumerate(regimes: &[Regime; 2], trans: [[f64; 2]; 2], initial: [f64; 2], y: &[f64]) -> Enumeration {
        let a = regimes[0].ar.len();
        let n = y.len() - a;
        assert!(n <= 20, "enumeration is exponential in the sample length");
        let dens: Vec<[f64; 2]> =
            (a..y.len()).map(|t| [density(&regimes[0], y, t), density(&regimes[1], y, t)]).collect();
        let mut total = 0.0;
        let mut marg = vec![[0.0; 2]; n];
        for path in 0u32..(1 << n) {
            let s = |t: usize| ((path >> t) & 1) as usize;
            let mut w = initial[s(0)] * dens[0][s(0)];
            for t in 1..n {
                w *= trans[s(t - 1)][s(t)] * dens[t][s(t)];
            }
            total += w;
            for (t, m) in marg.iter_mut().enumerate() {
                m[s(t)] += w;
            }
        }
        Enumeration {
            log_likelihood: total.ln(),
            smoothed: marg.into_iter().map(|m| [m[0] / total, m[1] / total]).collect(),
        }
    }
}

pub mod garch {
    //! GJR-GARCH log-likelihood written as a direct loop, with zero
    //! pre-sample shocks and a given pre-sample variance.

    use super::skewt;

    #[allow(clippy::too_many_arguments)]
    pub fn log_likelihood(
        mu: f64,
        omega: f64,
        alpha: &[f64],
        gamma: &[f64],
        beta: &[f64],
        shape: Option<(f64, f64)>,
        x: &[f64],
        presample_variance: f64,
    ) -> f64 {
        let e: Vec<f64> = x.iter().map(|v| v - mu).collect();
        let mut h: Vec<f64> = Vec::with_capacity(x.len());
        let mut ll = 0.0;
        for t in 0..x.len() {
            let arch: f64 =
                alpha.iter().enumerate().map(|(i, a)| if t > i { a * e[t - 1 - i].powi(2) } else { 0.0 }).sum();
            let leverage: f64 = gamma
                .iter()
                .enumerate()
                .map(|(i, g)| if t > i && e[t - 1 - i] < 0.0 { g * e[t - 1 - i].powi(2) } else { 0.0 })
                .sum();
            let garch: f64 =
                beta.iter().enumerate().map(|(j, b)| b * if t > j { h[t - 1 - j] } else { presample_variance }).sum();
            let ht = omega + arch + leverage + garch;
            h.push(ht);
            let z = e[t] / ht.sqrt();
            let g = match shape {
                None => (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt(),
                Some((eta, lambda)) => skewt::pdf(z, eta, lambda),
            };
            ll += g.ln() - 0.5 * ht.ln();
        }
        ll
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_integrates_to_one() {
        let v = quad::real_line(|z| (-0.5 * z * z).exp(), 0.3);
        assert!((v / (2.0 * std::f64::consts::PI).sqrt() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn textbook_call() {
        let c = black_scholes::call(100.0, 100.0, 0.05, 1.0, 0.2);
        assert!((c - 10.450_583_572_185_565).abs() < 1e-9);
    }
}
