//! Critical points of the limit potential.

use super::potential::{joukowski, limit_potential_f};
use super::semicircle_rho;
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Saddle-point data at bulk point `u` for GUE strength `a`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaddleData {
    pub u: f64,
    pub a: f64,
    /// `u = sqrt(1+4a^2) cos(theta_c)`, `theta_c` in `[0, pi]`.
    pub theta_c: f64,
    pub w_c_plus: Complex64,
    pub z_c_plus: Complex64,
    /// Real part of `z_c / (a^2 rho(u))`.
    pub omega0: f64,
    pub rho_u: f64,
}

impl SaddleData {
    pub fn w_c_minus(&self) -> Complex64 {
        self.w_c_plus.conj()
    }

    pub fn z_c_minus(&self) -> Complex64 {
        self.z_c_plus.conj()
    }
}

/// Largest `|u|` accepted by [`saddle_data`]: `sqrt(1/2 + 2a^2)`.
pub fn u_bound(a: f64) -> f64 {
    (0.5 + 2.0 * a * a).sqrt()
}

pub fn saddle_data(u: f64, a: f64) -> Result<SaddleData> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain(format!("saddle data needs a > 0, got {a}")));
    }
    if !u.is_finite() || u.abs() > u_bound(a) {
        return Err(Error::Domain(format!(
            "|u| = {} exceeds sqrt(1/2 + 2a^2) = {}",
            u.abs(),
            u_bound(a)
        )));
    }
    let r = (1.0 + 4.0 * a * a).sqrt();
    let cos_t = u / r;
    let sin_t = (1.0 - cos_t * cos_t).sqrt();
    let theta_c = cos_t.acos();
    let w_c_plus = Complex64::new(r * cos_t, r * sin_t);
    let z_c_plus = joukowski(w_c_plus);
    let a2 = a * a;
    let omega0 = PI * (1.0 + 2.0 * a2) / (2.0 * a2) * (cos_t / sin_t);
    let rho_u = semicircle_rho(u, a);

    for z in [z_c_plus, z_c_plus.conj()] {
        let (_, d1) = limit_potential_f(z, u, a)?;
        if d1.norm() > 1e-12 * (1.0 + z.norm() / a2) {
            return Err(Error::Numerical(format!("f'(z_c) = {d1} is not zero")));
        }
    }
    let scaled = z_c_plus / (a2 * rho_u);
    if (scaled - Complex64::new(omega0, PI)).norm() > 1e-10 * (1.0 + omega0.abs()) {
        return Err(Error::Numerical(format!(
            "z_c/(a^2 rho) = {scaled} disagrees with omega0 + i pi = {omega0} + i pi"
        )));
    }
    Ok(SaddleData { u, a, theta_c, w_c_plus, z_c_plus, omega0, rho_u })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_point() {
        let s = saddle_data(0.0, 0.5).unwrap();
        assert!((s.theta_c - PI / 2.0).abs() < 1e-15);
        assert_eq!(s.omega0, 0.0);
        assert!(s.z_c_plus.re.abs() < 1e-15);
        assert!((s.z_c_plus.im - 0.353553).abs() < 1e-6);
        assert!((s.z_c_plus.im - 2.0 * 0.25 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn imaginary_part_is_pi_at_center() {
        for a in [0.2, 0.7, 1.0, 2.5] {
            let s = saddle_data(0.0, a).unwrap();
            assert!((s.z_c_plus.im / (a * a * s.rho_u) - PI).abs() < 1e-12);
        }
    }

    #[test]
    fn critical_point_residual_off_center() {
        let s = saddle_data(0.5, 1.0).unwrap();
        let (_, d1) = limit_potential_f(s.z_c_plus, 0.5, 1.0).unwrap();
        assert!(d1.norm() < 1e-12);
        let r = (1.0 + 4.0f64).sqrt();
        assert!((r * s.theta_c.cos() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(saddle_data(0.0, 0.0), Err(Error::Domain(_))));
        let a = 1.0;
        assert!(saddle_data(u_bound(a), a).is_ok());
        assert!(matches!(saddle_data(u_bound(a) + 1e-9, a), Err(Error::Domain(_))));
    }
}
