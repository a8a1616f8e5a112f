//! Limited-memory BFGS with a strong-Wolfe line search.
//!
//! Objectives that cannot be evaluated at a trial point (infeasible
//! parameters, overflow) return a non-finite value; the line search treats
//! those points as arbitrarily bad and backs off.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent methods shadow it when `std` is linked
use num_traits::Float;

use super::numdiff;

/// A smooth objective to minimize. The default gradient is a central
/// finite difference.
pub trait Objective {
    fn value(&self, x: &[f64]) -> f64;

    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        numdiff::gradient(&|p: &[f64]| self.value(p), x, grad);
        self.value(x)
    }
}

impl<F: Fn(&[f64]) -> f64> Objective for F {
    fn value(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsOptions {
    /// Number of correction pairs kept.
    pub memory: usize,
    pub max_iter: usize,
    /// Converged once the gradient sup-norm drops below this.
    pub grad_tol: f64,
    /// Relative objective change treated as a stall.
    pub rel_tol: f64,
    /// A stalled run still counts as converged when its gradient sup-norm
    /// is below this looser bound.
    pub stall_grad_tol: f64,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self { memory: 10, max_iter: 2000, grad_tol: 1e-5, rel_tol: 1e-8, stall_grad_tol: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    GradientTolerance,
    /// Objective stopped changing (relative change below `rel_tol`) while
    /// the gradient was below `stall_grad_tol`.
    Stalled,
    /// Line search could not make progress.
    LineSearchFailed,
    MaxIterations,
    /// The starting point is not evaluable.
    InfeasibleStart,
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub termination: Termination,
    pub converged: bool,
}

impl Minimum {
    pub fn gradient_norm(&self) -> f64 {
        sup_norm(&self.gradient)
    }
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn minimize<O: Objective + ?Sized>(obj: &O, x0: &[f64], opts: &LbfgsOptions) -> Minimum {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut g = vec![0.0; n];
    let mut f = obj.value_and_gradient(&x, &mut g);
    if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Minimum {
            x,
            value: f,
            gradient: g,
            iterations: 0,
            termination: Termination::InfeasibleStart,
            converged: false,
        };
    }
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.memory);
    let mut d = vec![0.0; n];
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut retried_steepest = false;

    for iter in 0..opts.max_iter {
        if sup_norm(&g) < opts.grad_tol {
            return finish(x, f, g, iter, Termination::GradientTolerance, true);
        }
        two_loop(&history, &g, &mut d);
        let mut slope = dot(&d, &g);
        if !(slope < 0.0) || !slope.is_finite() {
            history.clear();
            for (di, gi) in d.iter_mut().zip(&g) {
                *di = -gi;
            }
            slope = -dot(&g, &g);
        }
        let initial = if history.is_empty() { (1.0 / sup_norm(&d)).min(1.0) } else { 1.0 };
        let step = line_search(obj, &x, f, slope, &d, initial, &mut x_new, &mut g_new);
        let Some((alpha, f_new)) = step else {
            if !history.is_empty() && !retried_steepest {
                history.clear();
                retried_steepest = true;
                continue;
            }
            let converged = sup_norm(&g) < opts.stall_grad_tol;
            return finish(x, f, g, iter, Termination::LineSearchFailed, converged);
        };
        retried_steepest = false;

        let s: Vec<f64> = d.iter().map(|di| alpha * di).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() {
            if history.len() == opts.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        let rel = (f - f_new).abs() / f.abs().max(f_new.abs()).max(1.0);
        core::mem::swap(&mut x, &mut x_new);
        core::mem::swap(&mut g, &mut g_new);
        f = f_new;
        let gn = sup_norm(&g);
        if gn < opts.grad_tol {
            return finish(x, f, g, iter + 1, Termination::GradientTolerance, true);
        }
        if rel < opts.rel_tol && gn < opts.stall_grad_tol {
            return finish(x, f, g, iter + 1, Termination::Stalled, true);
        }
    }
    let converged = sup_norm(&g) < opts.grad_tol;
    finish(x, f, g, opts.max_iter, Termination::MaxIterations, converged)
}

fn finish(
    x: Vec<f64>,
    value: f64,
    gradient: Vec<f64>,
    iterations: usize,
    termination: Termination,
    converged: bool,
) -> Minimum {
    Minimum { x, value, gradient, iterations, termination, converged }
}

fn two_loop(history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>, g: &[f64], d: &mut [f64]) {
    d.copy_from_slice(g);
    let mut alphas = vec![0.0; history.len()];
    for (k, (s, y, rho)) in history.iter().enumerate().rev() {
        let a = rho * dot(s, d);
        alphas[k] = a;
        for (di, yi) in d.iter_mut().zip(y) {
            *di -= a * yi;
        }
    }
    if let Some((s, y, _)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        for di in d.iter_mut() {
            *di *= gamma;
        }
    }
    for (k, (s, y, rho)) in history.iter().enumerate() {
        let b = rho * dot(y, d);
        for (di, si) in d.iter_mut().zip(s) {
            *di += (alphas[k] - b) * si;
        }
    }
    for di in d.iter_mut() {
        *di = -*di;
    }
}

const C1: f64 = 1e-4;
const C2: f64 = 0.9;

/// Strong-Wolfe bracketing and zoom. On success `x_new`/`g_new` hold the
/// accepted point and its gradient.
#[allow(clippy::too_many_arguments)]
fn line_search<O: Objective + ?Sized>(
    obj: &O,
    x: &[f64],
    f0: f64,
    slope0: f64,
    d: &[f64],
    initial: f64,
    x_new: &mut [f64],
    g_new: &mut [f64],
) -> Option<(f64, f64)> {
    let mut eval = |alpha: f64, x_new: &mut [f64], g_new: &mut [f64]| -> (f64, f64) {
        for i in 0..x.len() {
            x_new[i] = x[i] + alpha * d[i];
        }
        let f = obj.value_and_gradient(x_new, g_new);
        if !f.is_finite() || g_new.iter().any(|v| !v.is_finite()) {
            return (f64::INFINITY, f64::NAN);
        }
        (f, dot(g_new, d))
    };

    let mut alpha_prev = 0.0;
    let mut f_prev = f0;
    let mut slope_prev = slope0;
    let mut alpha = initial;
    for i in 0..40 {
        let (fa, sa) = eval(alpha, x_new, g_new);
        if !fa.is_finite() {
            // infeasible trial: shrink toward the last good point
            alpha = alpha_prev + 0.25 * (alpha - alpha_prev);
            if alpha - alpha_prev < 1e-16 {
                return None;
            }
            continue;
        }
        if fa > f0 + C1 * alpha * slope0 || (i > 0 && fa >= f_prev) {
            return zoom(&mut eval, f0, slope0, (alpha_prev, f_prev, slope_prev), (alpha, fa, sa), x_new, g_new);
        }
        if sa.abs() <= -C2 * slope0 {
            return Some((alpha, fa));
        }
        if sa >= 0.0 {
            return zoom(&mut eval, f0, slope0, (alpha, fa, sa), (alpha_prev, f_prev, slope_prev), x_new, g_new);
        }
        alpha_prev = alpha;
        f_prev = fa;
        slope_prev = sa;
        alpha *= 2.0;
    }
    None
}

fn zoom<E: FnMut(f64, &mut [f64], &mut [f64]) -> (f64, f64)>(
    eval: &mut E,
    f0: f64,
    slope0: f64,
    mut lo: (f64, f64, f64),
    mut hi: (f64, f64, f64),
    x_new: &mut [f64],
    g_new: &mut [f64],
) -> Option<(f64, f64)> {
    for _ in 0..60 {
        let (a_lo, a_hi) = (lo.0, hi.0);
        let width = (a_hi - a_lo).abs();
        if width < 1e-16 * a_lo.abs().max(1e-10) {
            break;
        }
        let mut alpha = cubic_min(lo, hi).unwrap_or(0.5 * (a_lo + a_hi));
        let (left, right) = if a_lo < a_hi { (a_lo, a_hi) } else { (a_hi, a_lo) };
        let margin = 0.1 * (right - left);
        if !(alpha > left + margin && alpha < right - margin) {
            alpha = 0.5 * (a_lo + a_hi);
        }
        let (fa, sa) = eval(alpha, x_new, g_new);
        if !fa.is_finite() || fa > f0 + C1 * alpha * slope0 || fa >= lo.1 {
            hi = (alpha, if fa.is_finite() { fa } else { f64::INFINITY }, sa);
        } else {
            if sa.abs() <= -C2 * slope0 {
                return Some((alpha, fa));
            }
            if sa * (a_hi - a_lo) >= 0.0 {
                hi = lo;
            }
            lo = (alpha, fa, sa);
        }
    }
    // accept the best sufficient-decrease point found, if any
    if lo.0 > 0.0 && lo.1 < f0 {
        let (fa, _) = eval(lo.0, x_new, g_new);
        return Some((lo.0, fa));
    }
    None
}

fn cubic_min(a: (f64, f64, f64), b: (f64, f64, f64)) -> Option<f64> {
    let (x0, f0, g0) = a;
    let (x1, f1, g1) = b;
    if !(f0.is_finite() && f1.is_finite() && g0.is_finite() && g1.is_finite()) {
        return None;
    }
    let d1 = g0 + g1 - 3.0 * (f0 - f1) / (x0 - x1);
    let disc = d1 * d1 - g0 * g1;
    if disc < 0.0 {
        return None;
    }
    let d2 = (x1 - x0).signum() * disc.sqrt();
    let denom = g1 - g0 + 2.0 * d2;
    if denom == 0.0 {
        return None;
    }
    let x = x1 - (x1 - x0) * (g1 + d2 - d1) / denom;
    x.is_finite().then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = minimize(&f, &[-1.2, 1.0], &LbfgsOptions::default());
        assert!(m.converged, "{:?}", m.termination);
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn respects_infeasible_region() {
        // log barrier: undefined for x <= 0
        let f = |x: &[f64]| if x[0] <= 0.0 { f64::NAN } else { x[0] - 2.0 * libm::log(x[0]) };
        let m = minimize(&f, &[10.0], &LbfgsOptions::default());
        assert!(m.converged);
        assert!((m.x[0] - 2.0).abs() < 1e-5);
    }

    #[test]
    fn infeasible_start_is_reported() {
        let f = |_: &[f64]| f64::INFINITY;
        let m = minimize(&f, &[0.0], &LbfgsOptions::default());
        assert_eq!(m.termination, Termination::InfeasibleStart);
        assert!(!m.converged);
    }

    #[test]
    fn high_dimensional_quadratic() {
        let f = |x: &[f64]| x.iter().enumerate().map(|(i, v)| (i as f64 + 1.0) * (v - 0.5).powi(2)).sum::<f64>();
        let m = minimize(&f, &[0.0; 20], &LbfgsOptions::default());
        assert!(m.converged);
        assert!(m.x.iter().all(|v| (v - 0.5).abs() < 1e-5));
    }
}
