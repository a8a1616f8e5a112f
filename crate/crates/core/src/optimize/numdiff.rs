//! Central finite differences.

use alloc::vec;
use alloc::vec::Vec;

/// Step for a central first difference around `x`: cube root of machine
/// epsilon, scaled by the magnitude of the coordinate.
pub fn central_step(x: f64) -> f64 {
    6.0555e-6 * x.abs().max(1.0)
}

pub fn gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], grad: &mut [f64]) {
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        let h = central_step(x[i]);
        probe[i] = x[i] + h;
        let up = f(&probe);
        probe[i] = x[i] - h;
        let down = f(&probe);
        probe[i] = x[i];
        grad[i] = (up - down) / (2.0 * h);
    }
}

/// Jacobian of a vector-valued map, returned as `rows[output][input]`.
/// `steps[i]` overrides the default step for input `i`.
pub fn jacobian<F: Fn(&[f64]) -> Vec<f64>>(f: &F, x: &[f64], steps: &[f64]) -> Vec<Vec<f64>> {
    let mut probe = x.to_vec();
    let mut columns = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let h = steps[i];
        probe[i] = x[i] + h;
        let up = f(&probe);
        probe[i] = x[i] - h;
        let down = f(&probe);
        probe[i] = x[i];
        columns.push(up.iter().zip(&down).map(|(u, d)| (u - d) / (2.0 * h)).collect::<Vec<_>>());
    }
    let m = columns.first().map_or(0, Vec::len);
    let mut rows = vec![vec![0.0; x.len()]; m];
    for (i, col) in columns.iter().enumerate() {
        for (t, v) in col.iter().enumerate() {
            rows[t][i] = *v;
        }
    }
    rows
}

/// Symmetrized Hessian from second central differences of `f`.
pub fn hessian<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], steps: &[f64]) -> Vec<Vec<f64>> {
    let k = x.len();
    let mut h = vec![vec![0.0; k]; k];
    let mut p = x.to_vec();
    let f0 = f(x);
    for i in 0..k {
        let hi = steps[i];
        p[i] = x[i] + hi;
        let fp = f(&p);
        p[i] = x[i] - hi;
        let fm = f(&p);
        p[i] = x[i];
        h[i][i] = (fp - 2.0 * f0 + fm) / (hi * hi);
        for j in 0..i {
            let hj = steps[j];
            let mut eval = |si: f64, sj: f64| {
                p[i] = x[i] + si * hi;
                p[j] = x[j] + sj * hj;
                let v = f(&p);
                p[i] = x[i];
                p[j] = x[j];
                v
            };
            let v = (eval(1.0, 1.0) - eval(1.0, -1.0) - eval(-1.0, 1.0) + eval(-1.0, -1.0)) / (4.0 * hi * hj);
            h[i][j] = v;
            h[j][i] = v;
        }
    }
    h
}
