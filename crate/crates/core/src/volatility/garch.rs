//! GJR-GARCH(p, o, q) with a constant mean, estimated by maximum
//! likelihood under normal or Hansen skewed-t innovations.
//!
//! The recursion is
//! `s2_t = omega + sum_i alpha_i e_{t-i}^2 + sum_i gamma_i e_{t-i}^2 1[e_{t-i} < 0] + sum_j beta_j s2_{t-j}`
//! with `e_t = x_t - mu`. Pre-sample shocks are zero and pre-sample
//! variances equal the sample variance of the input.

#[allow(unused_imports)] // inherent methods shadow it when `std` is linked
use num_traits::Float;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::diagnostics::{self, TestResult};
use super::skewt::SkewT;
use crate::error::{DiagnosticError, EstimationError};
use crate::linalg;
use crate::market_data::ReturnSeries;
use crate::optimize::{self, LbfgsOptions};

pub const OMEGA_FLOOR: f64 = 1e-12;
/// Lower bound on the skewed-t shape during estimation; keeps the fourth
/// moment of the score away from the `eta -> 2` singularity.
pub const ETA_LOWER: f64 = 2.05;
/// Smallest subsample accepted for estimation.
pub const MIN_OBSERVATIONS: usize = 200;
pub const MAX_P: usize = 10;
pub const MAX_O: usize = 5;
pub const MAX_Q: usize = 10;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GarchSpec {
    /// ARCH order.
    pub p: usize,
    /// Asymmetric (GJR) order; zero gives plain GARCH.
    pub o: usize,
    /// GARCH order.
    pub q: usize,
}

impl GarchSpec {
    pub fn new(p: usize, o: usize, q: usize) -> Result<Self, EstimationError> {
        let spec = Self { p, o, q };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), EstimationError> {
        if !(1..=MAX_P).contains(&self.p) || self.o > MAX_O || !(1..=MAX_Q).contains(&self.q) {
            return Err(EstimationError::InvalidSpec(format!(
                "GARCH order {self} outside p,q in 1..={MAX_P}, o in 0..={MAX_O}"
            )));
        }
        Ok(())
    }

    pub fn total_order(&self) -> usize {
        self.p + self.o + self.q
    }

    /// Length of the natural parameter vector.
    pub fn n_params(&self, family: Family) -> usize {
        2 + self.p + self.o + self.q + family.n_shape()
    }
}

impl fmt::Display for GarchSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.o == 0 {
            write!(f, "GARCH({},{})", self.p, self.q)
        } else {
            write!(f, "GJR-GARCH({},{},{})", self.p, self.o, self.q)
        }
    }
}

/// Innovation distribution family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Family {
    Normal,
    #[default]
    SkewT,
}

impl Family {
    fn n_shape(self) -> usize {
        match self {
            Family::Normal => 0,
            Family::SkewT => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Normal => "normal",
            Family::SkewT => "skewed-t",
        }
    }
}

/// Innovation distribution with its shape parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Innovations {
    Normal,
    SkewT { eta: f64, lambda: f64 },
}

impl Innovations {
    pub fn family(&self) -> Family {
        match self {
            Innovations::Normal => Family::Normal,
            Innovations::SkewT { .. } => Family::SkewT,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GarchParams {
    pub mu: f64,
    pub omega: f64,
    pub alpha: Vec<f64>,
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    pub innovations: Innovations,
}

impl GarchParams {
    pub fn spec(&self) -> GarchSpec {
        GarchSpec { p: self.alpha.len(), o: self.gamma.len(), q: self.beta.len() }
    }

    /// `sum alpha + sum beta + sum gamma / 2`.
    pub fn persistence(&self) -> f64 {
        self.alpha.iter().sum::<f64>() + self.beta.iter().sum::<f64>() + 0.5 * self.gamma.iter().sum::<f64>()
    }

    pub fn is_stationary(&self) -> bool {
        self.persistence() < 1.0
    }

    /// `omega / (1 - persistence)`; infinite when not covariance-stationary.
    pub fn unconditional_variance(&self) -> f64 {
        let gap = 1.0 - self.persistence();
        if gap > 0.0 {
            self.omega / gap
        } else {
            f64::INFINITY
        }
    }

    /// Layout `[mu, omega, alpha.., gamma.., beta.., eta, lambda]`, the
    /// shape pair only for skewed-t innovations.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = vec![self.mu, self.omega];
        v.extend_from_slice(&self.alpha);
        v.extend_from_slice(&self.gamma);
        v.extend_from_slice(&self.beta);
        if let Innovations::SkewT { eta, lambda } = self.innovations {
            v.push(eta);
            v.push(lambda);
        }
        v
    }

    pub fn from_vec(spec: GarchSpec, family: Family, v: &[f64]) -> Self {
        let (p, o, q) = (spec.p, spec.o, spec.q);
        let mut i = 2;
        let mut take = |n: usize| {
            let s = v[i..i + n].to_vec();
            i += n;
            s
        };
        let alpha = take(p);
        let gamma = take(o);
        let beta = take(q);
        let innovations = match family {
            Family::Normal => Innovations::Normal,
            Family::SkewT => Innovations::SkewT { eta: v[2 + p + o + q], lambda: v[3 + p + o + q] },
        };
        Self { mu: v[0], omega: v[1], alpha, gamma, beta, innovations }
    }

    /// Human-readable names in the [`to_vec`](Self::to_vec) layout.
    pub fn names(spec: GarchSpec, family: Family) -> Vec<String> {
        let mut names = vec![String::from("mu"), String::from("omega")];
        names.extend((1..=spec.p).map(|i| format!("alpha[{i}]")));
        names.extend((1..=spec.o).map(|i| format!("gamma[{i}]")));
        names.extend((1..=spec.q).map(|i| format!("beta[{i}]")));
        if family == Family::SkewT {
            names.push(String::from("eta"));
            names.push(String::from("lambda"));
        }
        names
    }
}

/// Shocks and conditional variances of the recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct VariancePath {
    pub residuals: Vec<f64>,
    pub variances: Vec<f64>,
}

/// Runs the variance recursion; `None` if any variance is non-positive or
/// non-finite.
pub fn variance_path(params: &GarchParams, x: &[f64], presample_variance: f64) -> Option<VariancePath> {
    let n = x.len();
    let residuals: Vec<f64> = x.iter().map(|v| v - params.mu).collect();
    let mut variances = Vec::with_capacity(n);
    for t in 0..n {
        let mut s = params.omega;
        for (i, a) in params.alpha.iter().enumerate() {
            if t > i {
                let e = residuals[t - 1 - i];
                s += a * e * e;
            }
        }
        for (i, g) in params.gamma.iter().enumerate() {
            if t > i {
                let e = residuals[t - 1 - i];
                if e < 0.0 {
                    s += g * e * e;
                }
            }
        }
        for (j, b) in params.beta.iter().enumerate() {
            s += b * if t > j { variances[t - 1 - j] } else { presample_variance };
        }
        if !(s > 0.0) || !s.is_finite() {
            return None;
        }
        variances.push(s);
    }
    Some(VariancePath { residuals, variances })
}

/// Per-observation log-likelihood contributions; `None` for inadmissible
/// parameters.
pub fn log_likelihood_terms(params: &GarchParams, x: &[f64], presample_variance: f64) -> Option<Vec<f64>> {
    if !(params.omega > 0.0) {
        return None;
    }
    let path = variance_path(params, x, presample_variance)?;
    let skewt = match params.innovations {
        Innovations::Normal => None,
        Innovations::SkewT { eta, lambda } => Some(SkewT::new(eta, lambda)?),
    };
    let terms: Vec<f64> = path
        .residuals
        .iter()
        .zip(&path.variances)
        .map(|(e, s2)| {
            let z = e / s2.sqrt();
            let ln_g = match &skewt {
                None => -0.5 * (LN_2PI + z * z),
                Some(d) => d.ln_pdf(z),
            };
            ln_g - 0.5 * s2.ln()
        })
        .collect();
    terms.iter().all(|v| v.is_finite()).then_some(terms)
}

pub fn log_likelihood(params: &GarchParams, x: &[f64], presample_variance: f64) -> f64 {
    log_likelihood_terms(params, x, presample_variance).map_or(f64::NEG_INFINITY, |t| t.iter().sum())
}

/// Mean of squared deviations from the sample mean.
pub fn presample_variance(x: &[f64]) -> f64 {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct GarchOptions {
    pub family: Family,
    /// Optimizer starts; the first two are fixed moment-based guesses, the
    /// rest are seeded perturbations of the first.
    pub starts: usize,
    pub lbfgs: LbfgsOptions,
    /// Natural-layout indices held at fixed values during estimation.
    pub pinned: Vec<(usize, f64)>,
    pub diagnostic_lags: usize,
}

impl Default for GarchOptions {
    fn default() -> Self {
        Self {
            family: Family::SkewT,
            starts: 2,
            lbfgs: LbfgsOptions::default(),
            pinned: Vec::new(),
            diagnostic_lags: diagnostics::DEFAULT_LAGS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GarchFit {
    pub spec: GarchSpec,
    pub params: GarchParams,
    pub log_likelihood: f64,
    pub aic: f64,
    pub bic: f64,
    /// Free (estimated) parameters.
    pub n_params: usize,
    pub n_obs: usize,
    pub presample_variance: f64,
    /// Dates of the subsample, empty when fitted on a bare slice.
    pub dates: Vec<NaiveDate>,
    pub residuals: Vec<f64>,
    pub variances: Vec<f64>,
    pub standardized: Vec<f64>,
    /// Covariance-stationarity guard; non-stationary fits are returned but
    /// excluded from order selection.
    pub stationary: bool,
    /// Inverse observed information, natural layout; `NaN` for pinned or
    /// unidentified parameters.
    pub standard_errors: Vec<f64>,
    /// White sandwich standard errors, natural layout.
    pub robust_standard_errors: Vec<f64>,
    pub ljung_box: Result<TestResult, DiagnosticError>,
    pub arch_lm: Result<TestResult, DiagnosticError>,
    pub gradient_norm: f64,
    pub iterations: usize,
}

impl GarchFit {
    pub fn is_admissible(&self) -> bool {
        self.stationary
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Mean,
    Omega,
    Positive,
    Free,
    Shape,
    Skew,
}

fn roles(spec: GarchSpec, family: Family) -> Vec<Role> {
    let mut r = vec![Role::Mean, Role::Omega];
    r.extend(core::iter::repeat_n(Role::Positive, spec.p));
    r.extend(core::iter::repeat_n(Role::Free, spec.o));
    r.extend(core::iter::repeat_n(Role::Positive, spec.q));
    if family == Family::SkewT {
        r.push(Role::Shape);
        r.push(Role::Skew);
    }
    r
}

fn to_natural(role: Role, theta: f64) -> f64 {
    match role {
        Role::Mean | Role::Free => theta,
        Role::Omega => theta.exp().max(OMEGA_FLOOR),
        Role::Positive => theta.exp(),
        Role::Shape => ETA_LOWER + theta.exp(),
        Role::Skew => theta.tanh(),
    }
}

fn to_unconstrained(role: Role, v: f64) -> f64 {
    match role {
        Role::Mean | Role::Free => v,
        Role::Omega | Role::Positive => v.max(1e-10).ln(),
        Role::Shape => (v - ETA_LOWER).max(1e-6).ln(),
        Role::Skew => v.clamp(-0.99, 0.99).atanh(),
    }
}

/// Maps between the optimizer's free coordinates and the natural layout.
struct Layout {
    spec: GarchSpec,
    family: Family,
    roles: Vec<Role>,
    free: Vec<usize>,
    pinned: Vec<Option<f64>>,
}

impl Layout {
    fn new(spec: GarchSpec, family: Family, pinned: &[(usize, f64)]) -> Result<Self, EstimationError> {
        let roles = roles(spec, family);
        let mut fixed = vec![None; roles.len()];
        for &(i, v) in pinned {
            if i >= roles.len() {
                return Err(EstimationError::InvalidSpec(format!("pinned index {i} outside the parameter vector")));
            }
            fixed[i] = Some(v);
        }
        let free = (0..roles.len()).filter(|&i| fixed[i].is_none()).collect();
        Ok(Self { spec, family, roles, free, pinned: fixed })
    }

    fn natural(&self, theta: &[f64]) -> Vec<f64> {
        let mut v: Vec<f64> = self.pinned.iter().map(|p| p.unwrap_or(0.0)).collect();
        for (k, &i) in self.free.iter().enumerate() {
            v[i] = to_natural(self.roles[i], theta[k]);
        }
        v
    }

    fn unconstrained(&self, natural: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&i| to_unconstrained(self.roles[i], natural[i])).collect()
    }

    fn with_free(&self, base: &[f64], free_values: &[f64]) -> Vec<f64> {
        let mut v = base.to_vec();
        for (k, &i) in self.free.iter().enumerate() {
            v[i] = free_values[k];
        }
        v
    }

    fn params(&self, natural: &[f64]) -> GarchParams {
        GarchParams::from_vec(self.spec, self.family, natural)
    }
}

/// Moment-based starting point with total ARCH weight `arch` and GARCH
/// weight `garch`, split evenly across lags.
fn start_point(spec: GarchSpec, family: Family, x: &[f64], arch: f64, garch: f64) -> Vec<f64> {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let var = presample_variance(x).max(OMEGA_FLOOR);
    let asym = if spec.o > 0 { 0.5 * arch } else { 0.0 };
    let persistence = arch + garch + 0.5 * asym;
    let mut v = vec![mean, var * (1.0 - persistence)];
    v.extend(core::iter::repeat_n(arch / spec.p as f64, spec.p));
    v.extend(core::iter::repeat_n(asym / spec.o.max(1) as f64, spec.o));
    v.extend(core::iter::repeat_n(garch / spec.q as f64, spec.q));
    if family == Family::SkewT {
        v.push(8.0);
        v.push(0.0);
    }
    v
}

fn natural_steps(roles: &[Role], v: &[f64], scale: f64) -> Vec<f64> {
    roles
        .iter()
        .zip(v)
        .map(|(role, &x)| match role {
            Role::Mean => 1e-4 * x.abs().max(0.01 * scale),
            Role::Omega => 1e-4 * x.abs().max(1e-6),
            Role::Positive | Role::Free => 1e-4 * x.abs().max(1e-2),
            Role::Shape => (1e-4 * x).min(0.5 * (x - 2.0)),
            Role::Skew => (1e-4_f64).min(0.5 * (1.0 - x.abs())),
        })
        .collect()
}

/// Fits one GJR-GARCH order to a (regime) subsample.
pub fn fit_garch(
    subsample: &ReturnSeries,
    spec: GarchSpec,
    seed: u64,
    options: &GarchOptions,
) -> Result<GarchFit, EstimationError> {
    let mut fit = fit_garch_values(&subsample.values(), spec, seed, options)?;
    fit.dates = subsample.dates();
    Ok(fit)
}

/// [`fit_garch`] on a bare slice.
pub fn fit_garch_values(
    x: &[f64],
    spec: GarchSpec,
    seed: u64,
    options: &GarchOptions,
) -> Result<GarchFit, EstimationError> {
    spec.validate()?;
    if x.len() < MIN_OBSERVATIONS {
        return Err(EstimationError::InvalidSpec(format!(
            "GARCH subsample has {} observations, need at least {MIN_OBSERVATIONS}",
            x.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(EstimationError::InvalidSpec("subsample contains non-finite values".into()));
    }
    let s0 = presample_variance(x);
    if !(s0 > 0.0) {
        return Err(EstimationError::InvalidSpec("subsample has zero variance".into()));
    }
    let family = options.family;
    let layout = Layout::new(spec, family, &options.pinned)?;
    let n = x.len() as f64;
    let objective = |theta: &[f64]| {
        let ll = log_likelihood(&layout.params(&layout.natural(theta)), x, s0);
        if ll.is_finite() {
            -ll / n
        } else {
            f64::INFINITY
        }
    };

    let pin = |mut v: Vec<f64>| {
        for (i, p) in layout.pinned.iter().enumerate() {
            if let Some(p) = p {
                v[i] = *p;
            }
        }
        v
    };
    let mut starts = vec![pin(start_point(spec, family, x, 0.05, 0.90)), pin(start_point(spec, family, x, 0.10, 0.80))];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = layout.unconstrained(&starts[0]);
    let mut thetas: Vec<Vec<f64>> = starts.drain(..).map(|s| layout.unconstrained(&s)).collect();
    while thetas.len() < options.starts {
        thetas.push(
            base.iter()
                .map(|v| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    v + 0.5 * z
                })
                .collect(),
        );
    }
    thetas.truncate(options.starts.max(1));

    let mut best: Option<optimize::Minimum> = None;
    let mut best_any: Option<optimize::Minimum> = None;
    for theta0 in &thetas {
        let m = optimize::minimize(&objective, theta0, &options.lbfgs);
        if !m.value.is_finite() {
            continue;
        }
        if best_any.as_ref().is_none_or(|b| m.value < b.value) {
            best_any = Some(m.clone());
        }
        if m.converged && best.as_ref().is_none_or(|b| m.value < b.value) {
            best = Some(m);
        }
    }
    let Some(min) = best else {
        let (ll, g) = best_any.map_or((f64::NEG_INFINITY, f64::NAN), |b| (-b.value * n, b.gradient_norm()));
        return Err(EstimationError::NotConverged {
            model: "GARCH",
            starts: thetas.len(),
            best_log_likelihood: ll,
            gradient_norm: g,
        });
    };

    let natural = layout.natural(&min.x);
    let params = layout.params(&natural);
    let terms = log_likelihood_terms(&params, x, s0)
        .ok_or_else(|| EstimationError::Numerical("likelihood not finite at the optimum".into()))?;
    let ll: f64 = terms.iter().sum();
    let path = variance_path(&params, x, s0).expect("admissible at optimum");
    let standardized: Vec<f64> = path.residuals.iter().zip(&path.variances).map(|(e, s2)| e / s2.sqrt()).collect();
    let k = layout.free.len();
    let kf = k as f64;
    let (standard_errors, robust_standard_errors) = garch_standard_errors(&layout, &natural, x, s0);
    let lags = options.diagnostic_lags;
    Ok(GarchFit {
        spec,
        stationary: params.is_stationary(),
        params,
        log_likelihood: ll,
        aic: 2.0 * kf - 2.0 * ll,
        bic: kf * n.ln() - 2.0 * ll,
        n_params: k,
        n_obs: x.len(),
        presample_variance: s0,
        dates: Vec::new(),
        residuals: path.residuals,
        variances: path.variances,
        ljung_box: diagnostics::ljung_box(&standardized, lags),
        arch_lm: diagnostics::engle_arch(&standardized, lags),
        standardized,
        standard_errors,
        robust_standard_errors,
        gradient_norm: min.gradient_norm(),
        iterations: min.iterations,
    })
}

/// Classical and sandwich standard errors over the free parameters,
/// scattered back into the natural layout.
fn garch_standard_errors(layout: &Layout, natural: &[f64], x: &[f64], s0: f64) -> (Vec<f64>, Vec<f64>) {
    let m = natural.len();
    let scale = s0.sqrt();
    let free_values: Vec<f64> = layout.free.iter().map(|&i| natural[i]).collect();
    let free_roles: Vec<Role> = layout.free.iter().map(|&i| layout.roles[i]).collect();
    let steps = natural_steps(&free_roles, &free_values, scale);
    let terms = |v: &[f64]| {
        log_likelihood_terms(&layout.params(&layout.with_free(natural, v)), x, s0)
            .unwrap_or_else(|| vec![f64::NAN; x.len()])
    };
    let total = |v: &[f64]| terms(v).iter().sum::<f64>();
    let k = free_values.len();
    let hess = optimize::hessian(&total, &free_values, &steps);
    let scores = optimize::jacobian(&terms, &free_values, &steps);
    let classical =
        linalg::information_covariance(&hess).map_or_else(|| vec![f64::NAN; k], |c| linalg::standard_errors(&c));
    let robust = linalg::sandwich_standard_errors(&scores, &hess, 0, k);
    let scatter = |se: Vec<f64>| {
        let mut out = vec![f64::NAN; m];
        for (j, &i) in layout.free.iter().enumerate() {
            out[i] = se[j];
        }
        out
    };
    (scatter(classical), scatter(robust))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn sample(n: usize) -> Vec<f64> {
        // deterministic heavy-ish tailed sequence with volatility clustering
        let mut s2 = 1.0;
        let mut e_prev: f64 = 0.0;
        (0..n)
            .map(|i| {
                s2 = 0.1 + 0.1 * e_prev * e_prev + 0.8 * s2;
                let u = ((i * 7919 % 1000) as f64 + 0.5) / 1000.0;
                let z = (u - 0.5) * 3.4;
                e_prev = z * s2.sqrt();
                e_prev
            })
            .collect()
    }

    #[test]
    fn spec_bounds() {
        assert!(GarchSpec::new(0, 0, 1).is_err());
        assert!(GarchSpec::new(1, 6, 1).is_err());
        assert!(GarchSpec::new(10, 5, 10).is_ok());
        assert_eq!(GarchSpec::new(1, 0, 1).unwrap().to_string(), "GARCH(1,1)");
        assert_eq!(GarchSpec::new(1, 1, 1).unwrap().to_string(), "GJR-GARCH(1,1,1)");
    }

    #[test]
    fn vector_layout_round_trip() {
        let p = GarchParams {
            mu: 0.1,
            omega: 0.2,
            alpha: vec![0.05, 0.02],
            gamma: vec![0.03],
            beta: vec![0.8],
            innovations: Innovations::SkewT { eta: 6.0, lambda: -0.1 },
        };
        let back = GarchParams::from_vec(p.spec(), Family::SkewT, &p.to_vec());
        assert_eq!(back, p);
        assert_eq!(GarchParams::names(p.spec(), Family::SkewT).len(), p.to_vec().len());
    }

    #[test]
    fn recursion_uses_presample_values() {
        let p = GarchParams {
            mu: 0.0,
            omega: 0.5,
            alpha: vec![0.1],
            gamma: vec![0.2],
            beta: vec![0.6],
            innovations: Innovations::Normal,
        };
        let x = [1.0, -2.0, 0.5];
        let path = variance_path(&p, &x, 3.0).unwrap();
        let s0 = 0.5 + 0.6 * 3.0;
        let s1 = 0.5 + 0.1 * 1.0 + 0.6 * s0;
        let s2 = 0.5 + (0.1 + 0.2) * 4.0 + 0.6 * s1;
        assert_eq!(path.variances, vec![s0, s1, s2]);
    }

    #[test]
    fn persistence_guard() {
        let mut p = GarchParams {
            mu: 0.0,
            omega: 0.1,
            alpha: vec![0.1],
            gamma: vec![0.2],
            beta: vec![0.8],
            innovations: Innovations::Normal,
        };
        assert!(!p.is_stationary());
        p.beta[0] = 0.7;
        assert!((p.persistence() - 0.9).abs() < 1e-15);
        assert!((p.unconditional_variance() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_samples_rejected() {
        let x = sample(150);
        let r = fit_garch_values(&x, GarchSpec::new(1, 0, 1).unwrap(), 1, &GarchOptions::default());
        assert!(matches!(r, Err(EstimationError::InvalidSpec(_))));
    }

    #[test]
    fn variance_collapse_matches_residual_variance() {
        let x = sample(400);
        let opts = GarchOptions { family: Family::Normal, pinned: vec![(2, 0.0), (3, 0.0)], ..GarchOptions::default() };
        let fit = fit_garch_values(&x, GarchSpec::new(1, 0, 1).unwrap(), 3, &opts).unwrap();
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let resid_var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / x.len() as f64;
        assert!(fit.variances.iter().all(|s| *s == fit.params.omega));
        assert!((fit.params.omega / resid_var - 1.0).abs() < 1e-4);
        assert!((fit.params.mu - mean).abs() < 1e-4 * resid_var.sqrt());
        assert_eq!(fit.n_params, 2);
    }
}
