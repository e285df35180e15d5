//! Eigenvalues, semicircle densities, log-potentials and saddle-point data.

mod eigen;
mod potential;
mod saddle;

pub use eigen::{hermitian_eigenvalues, tridiagonal_ql, EigenWorkspace, HERMITIAN_TOL, MAX_QL_SWEEPS};
pub use potential::{
    convergence_grid, inverse_joukowski, joukowski, limit_potential_f, log_potential_fn,
    potential_convergence_sup, semicircle_log_transform, semicircle_stieltjes, Potential,
};
pub use saddle::{saddle_data, u_bound, SaddleData};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Real eigenvalues in ascending order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    pub fn from_unsorted(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        Self(values)
    }

    /// Checks the ascending order instead of sorting.
    pub fn from_sorted(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("spectrum contains non-finite values".into()));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Validation("spectrum is not sorted ascending".into()));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum()
    }

    /// Smallest gap between neighbours, `+inf` below two points.
    pub fn min_gap(&self) -> f64 {
        self.0.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    /// Spectrum of the negated matrix.
    pub fn negated(&self) -> Self {
        Self(self.0.iter().rev().map(|x| -x).collect())
    }
}

/// Limiting eigenvalue density of `M = (W + aV)/sqrt(N)`:
/// `2/(pi(1+4a^2)) sqrt((1+4a^2-u^2)_+)`.
pub fn semicircle_rho(u: f64, a: f64) -> f64 {
    let e = semicircle_edge(a);
    2.0 / (PI * e * e) * ((e - u.abs()).max(0.0) * (e + u.abs())).sqrt()
}

/// Right edge of the support of [`semicircle_rho`].
pub fn semicircle_edge(a: f64) -> f64 {
    (1.0 + 4.0 * a * a).sqrt()
}

/// Semicircle law of `H = W/sqrt(N)` on `[-1, 1]`.
pub fn semicircle_sigma(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        2.0 / PI * (1.0 - t * t).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussLegendre;

    #[test]
    fn rho_center_value() {
        assert!((semicircle_rho(0.0, 0.5) - 2f64.sqrt() / PI).abs() < 1e-15);
        assert!((semicircle_rho(0.0, 0.5) - 0.450158).abs() < 1e-6);
    }

    #[test]
    fn rho_vanishes_at_edge_and_outside() {
        for a in [0.1, 0.5, 1.0, 3.0] {
            assert_eq!(semicircle_rho(semicircle_edge(a), a), 0.0);
            assert_eq!(semicircle_rho(-semicircle_edge(a) - 0.1, a), 0.0);
        }
    }

    #[test]
    fn sigma_values() {
        assert!((semicircle_sigma(0.0) - 2.0 / PI).abs() < 1e-15);
        assert_eq!(semicircle_sigma(1.0), 0.0);
        assert_eq!(semicircle_sigma(-1.0), 0.0);
    }

    #[test]
    fn densities_integrate_to_one() {
        // t = E cos(phi) removes the square-root endpoint behaviour.
        let g = GaussLegendre::new(40);
        let sig = g.integrate(0.0, PI, |p| semicircle_sigma(p.cos()) * p.sin());
        assert!((sig - 1.0).abs() < 1e-12);
        for a in [0.3, 1.0, 2.0] {
            let e = semicircle_edge(a);
            let m = g.integrate(0.0, PI, |p| semicircle_rho(e * p.cos(), a) * e * p.sin());
            assert!((m - 1.0).abs() < 1e-10, "a={a}: {m}");
        }
    }

    #[test]
    fn spectrum_validation() {
        assert!(Spectrum::from_sorted(vec![1.0, 0.0]).is_err());
        assert!(Spectrum::from_sorted(vec![0.0, f64::NAN]).is_err());
        let s = Spectrum::from_unsorted(vec![2.0, -1.0, 0.5]);
        assert_eq!(s.values(), &[-1.0, 0.5, 2.0]);
        assert_eq!(s.negated().values(), &[-2.0, -0.5, 1.0]);
        assert!((s.min_gap() - 1.5).abs() < 1e-15);
    }
}
