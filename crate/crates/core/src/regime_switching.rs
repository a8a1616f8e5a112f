//! Two-regime Markov-switching autoregression.
//!
//! Returns follow `r_t = mu_s + sum_i phi_{s,i} r_{t-i} + e_t` with
//! `e_t ~ N(0, sigma2_s)` and `s` a two-state Markov chain. Estimation
//! maximizes the Hamilton-filter likelihood conditional on the first
//! `ar_order` observations; the Kim smoother yields full-sample regime
//! probabilities, which [`classify`] turns into day labels.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent methods shadow it when `std` is linked
use num_traits::Float;

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::EstimationError;
use crate::linalg;
use crate::market_data::ReturnSeries;
use crate::optimize::{self, LbfgsOptions};
use crate::stats;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Probability above which a smoothed regime probability labels the day.
pub const LABEL_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MsArSpec {
    pub ar_order: usize,
}

impl MsArSpec {
    pub fn new(ar_order: usize) -> Self {
        Self { ar_order }
    }

    /// Free parameters: intercept, AR lags and variance per regime, plus two
    /// transition probabilities.
    pub fn n_params(&self) -> usize {
        2 * (self.ar_order + 2) + 2
    }

    /// Checks the order against a series of `n` observations.
    pub fn validate(&self, n: usize) -> Result<(), EstimationError> {
        if self.ar_order == 0 {
            return Err(EstimationError::InvalidSpec("AR order must be at least 1".into()));
        }
        if self.ar_order * 10 >= n {
            return Err(EstimationError::InvalidSpec(format!(
                "AR order {} too large for {n} observations (must be below n/10)",
                self.ar_order
            )));
        }
        let needed = 10 * (2 * self.ar_order + 4);
        if n <= needed {
            return Err(EstimationError::InvalidSpec(format!(
                "{n} observations; AR order {} needs more than {needed}",
                self.ar_order
            )));
        }
        Ok(())
    }
}

/// Emission parameters of one regime.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeParams {
    pub intercept: f64,
    pub ar: Vec<f64>,
    pub variance: f64,
}

impl RegimeParams {
    fn conditional_mean(&self, y: &[f64], t: usize) -> f64 {
        self.ar.iter().enumerate().fold(self.intercept, |m, (i, phi)| m + phi * y[t - 1 - i])
    }

    fn log_density(&self, y: &[f64], t: usize) -> f64 {
        let e = y[t] - self.conditional_mean(y, t);
        -0.5 * (LN_2PI + self.variance.ln() + e * e / self.variance)
    }
}

/// Full parameter set. `p00 = P(0 -> 0)` and `p10 = P(1 -> 0)`; the
/// remaining transition probabilities are their complements.
#[derive(Debug, Clone, PartialEq)]
pub struct MsArParams {
    pub regimes: [RegimeParams; 2],
    pub p00: f64,
    pub p10: f64,
}

impl MsArParams {
    pub fn ar_order(&self) -> usize {
        self.regimes[0].ar.len()
    }

    pub fn p11(&self) -> f64 {
        1.0 - self.p10
    }

    /// `transition()[i][j] = P(s_t = j | s_{t-1} = i)`.
    pub fn transition(&self) -> [[f64; 2]; 2] {
        [[self.p00, 1.0 - self.p00], [self.p10, 1.0 - self.p10]]
    }

    /// Ergodic distribution of the chain; uniform when the chain is reducible.
    pub fn stationary(&self) -> [f64; 2] {
        let denom = 1.0 - self.p00 + self.p10;
        if denom <= 0.0 || !denom.is_finite() {
            return [0.5, 0.5];
        }
        let pi0 = self.p10 / denom;
        [pi0, 1.0 - pi0]
    }

    /// `1 / (1 - p_ss)` for each regime.
    pub fn expected_durations(&self) -> [f64; 2] {
        [1.0 / (1.0 - self.p00), 1.0 / (1.0 - self.p11())]
    }

    /// The same model with regime indices exchanged.
    pub fn swapped(&self) -> Self {
        Self { regimes: [self.regimes[1].clone(), self.regimes[0].clone()], p00: 1.0 - self.p10, p10: 1.0 - self.p00 }
    }

    /// Natural-scale layout: per regime `[mu, phi_1..phi_a, sigma2]`, then
    /// `p00, p10`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * (self.ar_order() + 2) + 2);
        for r in &self.regimes {
            v.push(r.intercept);
            v.extend_from_slice(&r.ar);
            v.push(r.variance);
        }
        v.push(self.p00);
        v.push(self.p10);
        v
    }

    pub fn from_vec(v: &[f64], ar_order: usize) -> Self {
        let block = ar_order + 2;
        let regime = |off: usize| RegimeParams {
            intercept: v[off],
            ar: v[off + 1..off + 1 + ar_order].to_vec(),
            variance: v[off + block - 1],
        };
        Self { regimes: [regime(0), regime(block)], p00: v[2 * block], p10: v[2 * block + 1] }
    }

    fn is_valid(&self) -> bool {
        let probs = [self.p00, self.p10];
        self.regimes.iter().all(|r| r.variance > 0.0 && r.variance.is_finite())
            && probs.iter().all(|p| (0.0..=1.0).contains(p))
            && self.to_vec().iter().all(|x| x.is_finite())
    }

    fn from_unconstrained(theta: &[f64], ar_order: usize) -> Self {
        let mut v = theta.to_vec();
        let block = ar_order + 2;
        v[block - 1] = theta[block - 1].exp();
        v[2 * block - 1] = theta[2 * block - 1].exp();
        v[2 * block] = logistic(theta[2 * block]);
        v[2 * block + 1] = logistic(theta[2 * block + 1]);
        Self::from_vec(&v, ar_order)
    }

    fn to_unconstrained(&self) -> Vec<f64> {
        let mut v = self.to_vec();
        let block = self.ar_order() + 2;
        v[block - 1] = v[block - 1].ln();
        v[2 * block - 1] = v[2 * block - 1].ln();
        v[2 * block] = logit(v[2 * block]);
        v[2 * block + 1] = logit(v[2 * block + 1]);
        v
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Distribution of the regime at the first modeled observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    /// Ergodic distribution of the chain.
    Stationary,
    /// Explicit prior probabilities.
    Fixed([f64; 2]),
}

/// Forward-filter output. Index `k` refers to observation `ar_order + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutput {
    pub log_likelihood: f64,
    /// `P(s_t | F_{t-1})`
    pub predicted: Vec<[f64; 2]>,
    /// `P(s_t | F_t)`
    pub filtered: Vec<[f64; 2]>,
    /// `ln f(y_t | F_{t-1})`
    pub contributions: Vec<f64>,
}

/// Hamilton filter in scaled form: each step normalizes the joint density
/// after factoring out the larger log emission, so finite inputs cannot
/// underflow.
pub fn hamilton_filter(params: &MsArParams, y: &[f64], initial: InitialState) -> Result<FilterOutput, EstimationError> {
    let a = params.ar_order();
    if !params.is_valid() {
        return Err(EstimationError::InvalidSpec("invalid MS-AR parameters".into()));
    }
    if y.len() <= a {
        return Err(EstimationError::InvalidSpec(format!("{} observations cannot support AR order {a}", y.len())));
    }
    let p = params.transition();
    let mut prior = match initial {
        InitialState::Stationary => params.stationary(),
        InitialState::Fixed(pi) => pi,
    };
    let n = y.len() - a;
    let mut out = FilterOutput {
        log_likelihood: 0.0,
        predicted: Vec::with_capacity(n),
        filtered: Vec::with_capacity(n),
        contributions: Vec::with_capacity(n),
    };
    for t in a..y.len() {
        let ld = [params.regimes[0].log_density(y, t), params.regimes[1].log_density(y, t)];
        if ld.iter().any(|v| v.is_nan()) {
            return Err(EstimationError::Numerical(format!("non-finite emission density at {t}")));
        }
        let m = ld[0].max(ld[1]);
        let joint = [prior[0] * (ld[0] - m).exp(), prior[1] * (ld[1] - m).exp()];
        let c = joint[0] + joint[1];
        if !(c > 0.0) || !c.is_finite() {
            return Err(EstimationError::Underflow(t));
        }
        let post = [joint[0] / c, joint[1] / c];
        let contribution = c.ln() + m;
        out.log_likelihood += contribution;
        out.contributions.push(contribution);
        out.predicted.push(prior);
        out.filtered.push(post);
        prior = [post[0] * p[0][0] + post[1] * p[1][0], post[0] * p[0][1] + post[1] * p[1][1]];
    }
    Ok(out)
}

/// Kim backward smoother over a filter pass.
pub fn kim_smoother(params: &MsArParams, filter: &FilterOutput) -> Vec<[f64; 2]> {
    let p = params.transition();
    let n = filter.filtered.len();
    let mut smoothed = vec![[0.0; 2]; n];
    if n == 0 {
        return smoothed;
    }
    smoothed[n - 1] = filter.filtered[n - 1];
    for t in (0..n - 1).rev() {
        let next = smoothed[t + 1];
        let pred = filter.predicted[t + 1];
        let ratio = [0, 1].map(|j| if pred[j] > 0.0 { next[j] / pred[j] } else { 0.0 });
        let mut s = [0.0; 2];
        for (i, si) in s.iter_mut().enumerate() {
            *si = filter.filtered[t][i] * (p[i][0] * ratio[0] + p[i][1] * ratio[1]);
        }
        // renormalize away rounding drift
        let total = s[0] + s[1];
        smoothed[t] = [s[0] / total, s[1] / total];
    }
    smoothed
}

/// Smoothed regime probabilities `P(s_t | F_T)` for observations
/// `ar_order..y.len()`.
pub fn hamilton_smooth(
    params: &MsArParams,
    y: &[f64],
    initial: InitialState,
) -> Result<Vec<[f64; 2]>, EstimationError> {
    let f = hamilton_filter(params, y, initial)?;
    Ok(kim_smoother(params, &f))
}

/// Log-likelihood under the stationary initial distribution.
pub fn log_likelihood(params: &MsArParams, y: &[f64]) -> Result<f64, EstimationError> {
    hamilton_filter(params, y, InitialState::Stationary).map(|f| f.log_likelihood)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MsArOptions {
    pub starts: usize,
    pub lbfgs: LbfgsOptions,
    /// A regime variance below this fraction of the sample variance is
    /// treated as a collapsed regime.
    pub variance_floor_ratio: f64,
    /// Bartlett bandwidth of the sandwich covariance (0 = White).
    pub se_bandwidth: usize,
}

impl Default for MsArOptions {
    fn default() -> Self {
        Self { starts: 8, lbfgs: LbfgsOptions::default(), variance_floor_ratio: 1e-6, se_bandwidth: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MsArFit {
    pub spec: MsArSpec,
    /// Regime 0 is the lower-variance regime.
    pub params: MsArParams,
    pub log_likelihood: f64,
    pub aic: f64,
    pub bic: f64,
    pub n_params: usize,
    /// Observations entering the likelihood (series length minus AR order).
    pub n_obs: usize,
    /// Robust standard errors in the layout of [`MsArParams::to_vec`];
    /// `NaN` where the sandwich is not positive.
    pub standard_errors: Vec<f64>,
    pub se_bandwidth: usize,
    /// Dates of the modeled observations.
    pub dates: Vec<NaiveDate>,
    pub smoothed: Vec<[f64; 2]>,
    pub filtered: Vec<[f64; 2]>,
    pub starts: usize,
    pub converged_starts: usize,
    pub gradient_norm: f64,
    pub iterations: usize,
}

impl MsArFit {
    pub fn information_criteria(log_likelihood: f64, k: usize, n: usize) -> (f64, f64) {
        let k = k as f64;
        (2.0 * k - 2.0 * log_likelihood, k * (n as f64).ln() - 2.0 * log_likelihood)
    }
}

/// Moment-based starting point: pooled OLS AR fit, variances split by the
/// small and large halves of the absolute residuals.
fn initial_guess(y: &[f64], a: usize) -> Result<MsArParams, EstimationError> {
    let n = y.len() - a;
    let x = DMatrix::from_fn(n, a + 1, |r, c| if c == 0 { 1.0 } else { y[a + r - c] });
    let rhs = DVector::from_iterator(n, y[a..].iter().copied());
    let ls = linalg::least_squares(&x, &rhs).map_err(|e| EstimationError::Numerical(format!("AR start: {e}")))?;
    let mut resid: Vec<f64> = ls.residuals.iter().copied().collect();
    resid.sort_by(|p, q| p.abs().total_cmp(&q.abs()));
    let half = n / 2;
    let var_of = |s: &[f64]| s.iter().map(|e| e * e).sum::<f64>() / s.len() as f64;
    let overall = var_of(&resid).max(f64::MIN_POSITIVE);
    let low = var_of(&resid[..half]).max(1e-3 * overall);
    let high = var_of(&resid[half..]).max(low * 1.5);
    let regime = |variance| RegimeParams {
        intercept: ls.coefficients[0],
        ar: ls.coefficients.iter().skip(1).copied().collect(),
        variance,
    };
    Ok(MsArParams { regimes: [regime(low), regime(high)], p00: 0.9, p10: 0.1 })
}

fn perturb(theta: &[f64], a: usize, scale: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let block = a + 2;
    theta
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let z: f64 = StandardNormal.sample(rng);
            let sd = if i >= 2 * block {
                1.0
            } else if i % block == block - 1 {
                0.5
            } else if i % block == 0 {
                0.1 * scale
            } else {
                0.05
            };
            v + sd * z
        })
        .collect()
}

/// Maximum-likelihood fit of the two-regime MS-AR on a return series.
pub fn fit_msar(
    series: &ReturnSeries,
    spec: MsArSpec,
    seed: u64,
    options: &MsArOptions,
) -> Result<MsArFit, EstimationError> {
    let y = series.values();
    let mut fit = fit_msar_values(&y, spec, seed, options)?;
    fit.dates = series.points[spec.ar_order..].iter().map(|p| p.date).collect();
    Ok(fit)
}

/// [`fit_msar`] on a bare slice; `dates` is left empty.
pub fn fit_msar_values(
    y: &[f64],
    spec: MsArSpec,
    seed: u64,
    options: &MsArOptions,
) -> Result<MsArFit, EstimationError> {
    spec.validate(y.len())?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(EstimationError::InvalidSpec("series contains non-finite values".into()));
    }
    let a = spec.ar_order;
    let n_obs = y.len() - a;
    let sample_var = stats::sample_variance(y);
    if !(sample_var > 0.0) {
        return Err(EstimationError::InvalidSpec("series has zero variance".into()));
    }
    let floor = options.variance_floor_ratio * sample_var;
    let objective = |theta: &[f64]| {
        let params = MsArParams::from_unconstrained(theta, a);
        match log_likelihood(&params, y) {
            Ok(ll) => -ll / n_obs as f64,
            Err(_) => f64::INFINITY,
        }
    };

    let base = initial_guess(y, a)?.to_unconstrained();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = sample_var.sqrt();
    let mut best: Option<(optimize::Minimum, MsArParams)> = None;
    let mut best_any: Option<optimize::Minimum> = None;
    let mut degenerate: Option<(usize, f64)> = None;
    let mut converged_starts = 0;
    for start in 0..options.starts.max(1) {
        let x0 = if start == 0 { base.clone() } else { perturb(&base, a, scale, &mut rng) };
        let m = optimize::minimize(&objective, &x0, &options.lbfgs);
        if best_any.as_ref().is_none_or(|b| m.value < b.value) {
            best_any = Some(m.clone());
        }
        if !m.converged || !m.value.is_finite() {
            continue;
        }
        let params = MsArParams::from_unconstrained(&m.x, a);
        if let Some(r) = (0..2).find(|&r| params.regimes[r].variance < floor) {
            degenerate = Some((r, params.regimes[r].variance));
            continue;
        }
        converged_starts += 1;
        if best.as_ref().is_none_or(|(b, _)| m.value < b.value) {
            best = Some((m, params));
        }
    }
    let Some((min, mut params)) = best else {
        if let Some((regime, variance)) = degenerate {
            return Err(EstimationError::DegenerateRegime { regime, variance, floor });
        }
        let b = best_any.expect("at least one start");
        return Err(EstimationError::NotConverged {
            model: "MS-AR",
            starts: options.starts.max(1),
            best_log_likelihood: -b.value * n_obs as f64,
            gradient_norm: b.gradient_norm(),
        });
    };
    if params.regimes[0].variance > params.regimes[1].variance {
        params = params.swapped();
    }
    let filter = hamilton_filter(&params, y, InitialState::Stationary)?;
    let smoothed = kim_smoother(&params, &filter);
    let k = spec.n_params();
    let (aic, bic) = MsArFit::information_criteria(filter.log_likelihood, k, n_obs);
    let standard_errors = robust_standard_errors(&params, y, options.se_bandwidth);
    Ok(MsArFit {
        spec,
        log_likelihood: filter.log_likelihood,
        aic,
        bic,
        n_params: k,
        n_obs,
        standard_errors,
        se_bandwidth: options.se_bandwidth,
        dates: Vec::new(),
        smoothed,
        filtered: filter.filtered,
        starts: options.starts.max(1),
        converged_starts,
        gradient_norm: min.gradient_norm(),
        iterations: min.iterations,
        params,
    })
}

/// Finite-difference steps in the natural layout, kept inside (0, 1) for
/// the transition probabilities.
fn natural_steps(v: &[f64], a: usize) -> Vec<f64> {
    let block = a + 2;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            if i >= 2 * block {
                (1e-4_f64).min(0.5 * x.min(1.0 - x))
            } else if i % block == block - 1 {
                1e-4 * x
            } else {
                1e-4 * x.abs().max(1e-2)
            }
        })
        .collect()
}

/// Sandwich covariance `H^-1 B H^-1` in the natural parameterization, with
/// `B` the Bartlett-weighted long-run covariance of per-observation scores.
/// Returns the square roots of its diagonal.
pub fn robust_standard_errors(params: &MsArParams, y: &[f64], bandwidth: usize) -> Vec<f64> {
    let a = params.ar_order();
    let v = params.to_vec();
    let k = v.len();
    let steps = natural_steps(&v, a);
    let contributions = |x: &[f64]| -> Vec<f64> {
        let p = MsArParams::from_vec(x, a);
        match hamilton_filter(&p, y, InitialState::Stationary) {
            Ok(f) => f.contributions,
            Err(_) => vec![f64::NAN; y.len() - a],
        }
    };
    let total = |x: &[f64]| contributions(x).iter().sum::<f64>();
    let scores = optimize::jacobian(&contributions, &v, &steps);
    let hess = optimize::hessian(&total, &v, &steps);
    linalg::sandwich_standard_errors(&scores, &hess, bandwidth, k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeLabel {
    Regime(usize),
    Uncertain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeName {
    LowVolatility,
    HighVolatility,
}

impl RegimeName {
    pub fn as_str(self) -> &'static str {
        match self {
            RegimeName::LowVolatility => "low-volatility",
            RegimeName::HighVolatility => "high-volatility",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeLabels {
    pub dates: Vec<NaiveDate>,
    pub labels: Vec<RegimeLabel>,
    /// Index of the regime with the larger innovation variance.
    pub high_volatility: usize,
    pub expected_durations: [f64; 2],
}

impl RegimeLabels {
    pub fn name(&self, regime: usize) -> RegimeName {
        if regime == self.high_volatility {
            RegimeName::HighVolatility
        } else {
            RegimeName::LowVolatility
        }
    }

    pub fn label_on(&self, date: NaiveDate) -> Option<RegimeLabel> {
        self.dates.binary_search(&date).ok().map(|i| self.labels[i])
    }

    pub fn count(&self, label: RegimeLabel) -> usize {
        self.labels.iter().filter(|l| **l == label).count()
    }
}

pub fn label_of(p: [f64; 2]) -> RegimeLabel {
    if p[0] > LABEL_THRESHOLD {
        RegimeLabel::Regime(0)
    } else if p[1] > LABEL_THRESHOLD {
        RegimeLabel::Regime(1)
    } else {
        RegimeLabel::Uncertain
    }
}

pub fn classify(fit: &MsArFit) -> RegimeLabels {
    let v = [fit.params.regimes[0].variance, fit.params.regimes[1].variance];
    RegimeLabels {
        dates: fit.dates.clone(),
        labels: fit.smoothed.iter().map(|p| label_of(*p)).collect(),
        high_volatility: usize::from(v[1] > v[0]),
        expected_durations: fit.params.expected_durations(),
    }
}

/// Residuals of the AR mean equation, each day evaluated under its more
/// probable smoothed regime. Feeds the residual-input GARCH mode; the first
/// `ar_order` days have no residual and are dropped, so the output lines up
/// with `smoothed`.
pub fn regime_residuals(
    params: &MsArParams,
    smoothed: &[[f64; 2]],
    series: &ReturnSeries,
) -> Result<ReturnSeries, EstimationError> {
    let a = params.ar_order();
    if series.points.len() != smoothed.len() + a {
        return Err(EstimationError::InvalidSpec(format!(
            "series has {} points, smoothed path covers {} plus {a} presample",
            series.points.len(),
            smoothed.len()
        )));
    }
    let y = series.values();
    let points = (a..y.len())
        .map(|t| {
            let p = smoothed[t - a];
            let r = &params.regimes[usize::from(p[1] > p[0])];
            let mut point = series.points[t];
            point.value = y[t] - r.conditional_mean(&y, t);
            point
        })
        .collect();
    Ok(ReturnSeries { asset: series.asset.clone(), points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn params(m0: f64, v0: f64, m1: f64, v1: f64, p00: f64, p10: f64) -> MsArParams {
        MsArParams {
            regimes: [
                RegimeParams { intercept: m0, ar: vec![0.2], variance: v0 },
                RegimeParams { intercept: m1, ar: vec![-0.1], variance: v1 },
            ],
            p00,
            p10,
        }
    }

    fn series() -> Vec<f64> {
        (0..40).map(|i| ((i * 37 % 11) as f64 - 5.0) * if i % 9 < 4 { 3.0 } else { 0.5 }).collect()
    }

    #[test]
    fn absorbing_chain_keeps_initial_state() {
        let p = params(0.0, 1.0, 0.5, 9.0, 1.0, 0.0);
        let s = hamilton_smooth(&p, &series(), InitialState::Fixed([1.0, 0.0])).unwrap();
        assert!(s.iter().all(|q| q[0] == 1.0 && q[1] == 0.0));
    }

    #[test]
    fn identical_regimes_are_uninformative() {
        let mut p = params(0.1, 2.0, 0.1, 2.0, 0.5, 0.5);
        p.regimes[1].ar = p.regimes[0].ar.clone();
        let s = hamilton_smooth(&p, &series(), InitialState::Stationary).unwrap();
        assert!(s.iter().all(|q| (q[0] - 0.5).abs() < 1e-15));
    }

    #[test]
    fn identical_regimes_collapse_to_single_ar_likelihood() {
        let y = series();
        let mut p = params(0.1, 2.0, 0.1, 2.0, 0.8, 0.3);
        p.regimes[1].ar = p.regimes[0].ar.clone();
        let single: f64 = (1..y.len()).map(|t| p.regimes[0].log_density(&y, t)).sum();
        assert!((log_likelihood(&p, &y).unwrap() - single).abs() < 1e-10);
    }

    #[test]
    fn smoother_rows_sum_to_one_and_end_at_filter() {
        let p = params(0.0, 1.0, 0.3, 16.0, 0.9, 0.2);
        let y = series();
        let f = hamilton_filter(&p, &y, InitialState::Stationary).unwrap();
        let s = kim_smoother(&p, &f);
        assert!(s.iter().all(|q| (q[0] + q[1] - 1.0).abs() < 1e-12));
        assert_eq!(s.last(), f.filtered.last());
    }

    #[test]
    fn swapping_regimes_preserves_likelihood() {
        let p = params(0.0, 1.0, 0.3, 16.0, 0.9, 0.2);
        let y = series();
        let a = log_likelihood(&p, &y).unwrap();
        let b = log_likelihood(&p.swapped(), &y).unwrap();
        assert!((a - b).abs() < 1e-10 * a.abs());
        let back = p.swapped().swapped().to_vec();
        assert!(back.iter().zip(p.to_vec()).all(|(x, y)| (x - y).abs() < 1e-15));
    }

    #[test]
    fn unconstrained_round_trip() {
        let p = params(0.3, 1.5, -0.2, 7.0, 0.8, 0.35);
        let back = MsArParams::from_unconstrained(&p.to_unconstrained(), 1);
        for (x, y) in back.to_vec().iter().zip(p.to_vec()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn labels_follow_threshold() {
        assert_eq!(label_of([0.5, 0.5]), RegimeLabel::Uncertain);
        assert_eq!(label_of([0.9, 0.1]), RegimeLabel::Regime(0));
        assert_eq!(label_of([0.2, 0.8]), RegimeLabel::Regime(1));
    }

    #[test]
    fn expected_duration_from_persistence() {
        let p = params(0.0, 2.455, 0.0, 28.6, 0.7710, 0.3659);
        let d = p.expected_durations();
        assert!((d[0] - 4.3668).abs() < 1e-3);
        assert!((d[1] - 1.0 / 0.3659).abs() < 1e-12);
    }

    #[test]
    fn spec_guards_identification() {
        assert!(MsArSpec::new(0).validate(1000).is_err());
        assert!(MsArSpec::new(8).validate(200).is_err());
        assert!(MsArSpec::new(8).validate(2000).is_ok());
    }

    #[test]
    fn information_criteria_formulae() {
        let (aic, bic) = MsArFit::information_criteria(-100.0, 8, 400);
        assert_eq!(aic, 216.0);
        assert!((bic - (8.0 * 400f64.ln() + 200.0)).abs() < 1e-12);
    }
}
