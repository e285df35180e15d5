//! Correlation kernels: the deformed-GUE double contour integral, the GUE
//! Hermite kernel, the sine kernel and biorthogonal finite-rank kernels.

mod biorthogonal;
mod contour;
mod hermite;

pub use biorthogonal::{fredholm_ratio_check, BiorthogonalSystem, FredholmRatio, RealFn};
pub use contour::{
    build_big_gamma, build_big_gamma_with, build_gamma, build_gamma_with, cexpm1, contour_geometry,
    deformed_kernel, deformed_kernel_at, deformed_kernel_scan, eval_h_gn, phi1, ContourGeometry,
    ContourQuadrature, KernelContext, KernelScan, PathKind, QuadratureSettings, REMOVABLE_THRESHOLD,
};
pub use hermite::{gue_kernel, gue_kernel_direct, gue_kernel_rescaled, hermite_functions};

use crate::linalg::Matrix;
use std::f64::consts::PI;

/// `sin(pi tau)/(pi tau)`.
pub fn sine_kernel(tau: f64) -> f64 {
    if tau.abs() < 1e-4 {
        let x = PI * tau;
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        (PI * tau).sin() / (PI * tau)
    }
}

/// Largest point count accepted by [`correlation_det`].
pub const MAX_CORRELATION_POINTS: usize = 12;

/// `det(K(x_i, x_j))`.
pub fn correlation_det(points: &[f64], kernel: impl Fn(f64, f64) -> f64) -> f64 {
    assert!(points.len() <= MAX_CORRELATION_POINTS, "at most {MAX_CORRELATION_POINTS} points");
    if points.is_empty() {
        return 1.0;
    }
    Matrix::from_fn(points.len(), |i, j| kernel(points[i], points[j])).det()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_kernel_values() {
        assert_eq!(sine_kernel(0.0), 1.0);
        assert!(sine_kernel(1.0).abs() < 1e-16);
        assert!((sine_kernel(0.5) - 2.0 / PI).abs() < 1e-15);
        assert!((sine_kernel(0.9e-4) - (PI * 0.9e-4).sin() / (PI * 0.9e-4)).abs() < 1e-15);
    }

    #[test]
    fn sine_correlations() {
        let k = |x: f64, y: f64| sine_kernel(x - y);
        assert_eq!(correlation_det(&[0.3], k), 1.0);
        assert!(correlation_det(&[0.2, 0.2], k).abs() < 1e-15);
        let v = correlation_det(&[0.0, 0.5], k);
        assert!((v - (1.0 - 4.0 / (PI * PI))).abs() < 1e-14);
        assert!((v - 0.594715).abs() < 1e-6);
    }
}
