//! GUE kernel from orthonormal Hermite functions.
//!
//! `p_k` are orthonormal for the weight `e^{-N x^2/2}`:
//! `x p_k = sqrt((k+1)/N) p_{k+1} + sqrt(k/N) p_{k-1}`, `p_0 = (N/2pi)^{1/4}`.
//! The recurrence runs on `phi_k = p_k e^{-N x^2/4}` with a separate
//! logarithmic scale so neither factor over- or underflows.

use super::contour::REMOVABLE_THRESHOLD;
use std::f64::consts::PI;

/// `phi_0(x), ..., phi_kmax(x)`.
pub fn hermite_functions(x: f64, n: usize, kmax: usize) -> Vec<f64> {
    let nf = n as f64;
    let mut out = Vec::with_capacity(kmax + 1);
    let mut log_scale = 0.25 * (nf / (2.0 * PI)).ln() - nf * x * x / 4.0;
    let (mut prev, mut cur) = (0.0, 1.0);
    out.push(log_scale.exp());
    for k in 0..kmax {
        let kf = k as f64;
        let next = (x * cur - (kf / nf).sqrt() * prev) / ((kf + 1.0) / nf).sqrt();
        prev = cur;
        cur = next;
        let m = cur.abs().max(prev.abs());
        if m > 1e100 || (m < 1e-100 && m > 0.0) {
            prev /= m;
            cur /= m;
            log_scale += m.ln();
        }
        out.push(cur * log_scale.exp());
    }
    out
}

/// `K_N(x, y) = sum_{k<N} phi_k(x) phi_k(y)` in Christoffel–Darboux form,
/// the derivative form on the diagonal and the direct sum for
/// `0 < |x - y| < 1e-4`.
pub fn gue_kernel(x: f64, y: f64, n: usize) -> f64 {
    assert!(n >= 1, "GUE kernel needs N >= 1");
    let nf = n as f64;
    let px = hermite_functions(x, n, n);
    if x == y {
        let pm2 = if n >= 2 { px[n - 2] } else { 0.0 };
        return nf * px[n - 1] * px[n - 1] - (nf * (nf - 1.0)).sqrt() * pm2 * px[n];
    }
    let py = hermite_functions(y, n, n);
    if (x - y).abs() < REMOVABLE_THRESHOLD {
        return px[..n].iter().zip(&py[..n]).map(|(a, b)| a * b).sum();
    }
    (px[n] * py[n - 1] - px[n - 1] * py[n]) / (x - y)
}

/// Direct sum form, for testing the Christoffel–Darboux evaluation.
pub fn gue_kernel_direct(x: f64, y: f64, n: usize) -> f64 {
    let px = hermite_functions(x, n, n - 1);
    let py = hermite_functions(y, n, n - 1);
    px.iter().zip(&py).map(|(a, b)| a * b).sum()
}

/// `(1/(N rho)) K_N(u + s/(N rho), u + t/(N rho))` with the GUE density
/// `rho(u) = sqrt(4 - u^2)/(2 pi)` of this weight.
pub fn gue_kernel_rescaled(u: f64, s: f64, t: f64, n: usize) -> f64 {
    let rho = (4.0 - u * u).max(0.0).sqrt() / (2.0 * PI);
    let scale = n as f64 * rho;
    gue_kernel(u + s / scale, u + t / scale, n) / scale
}
