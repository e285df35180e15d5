//! The log-potentials of the kernel's double contour integral.
//!
//! `f_N(z) = (z^2 - 2uz)/(2a^2) + (1/N) sum_j log(z - y_j)` for a finite
//! spectrum and its large-N limit with the sum replaced by the semicircle
//! integral over `[-1, 1]`. Principal logarithms throughout.

use super::Spectrum;
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Closest approach to an eigenvalue tolerated by [`log_potential_fn`].
pub const SINGULAR_DISTANCE: f64 = 1e-14;

/// Gauss–Legendre order for the semicircle log-integral.
const LIMIT_RULE_NODES: usize = 64;

/// Value of a potential together with its first two derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Potential {
    pub value: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
}

/// `f_N` and its derivatives at `z`, the derivatives by the explicit rational sums.
pub fn log_potential_fn(z: Complex64, u: f64, a: f64, y: &Spectrum) -> Result<Potential> {
    let n = y.len();
    if n == 0 {
        return Err(Error::Validation("empty spectrum".into()));
    }
    let a2 = a * a;
    let mut log_sum = Complex64::new(0.0, 0.0);
    let mut r1 = Complex64::new(0.0, 0.0);
    let mut r2 = Complex64::new(0.0, 0.0);
    for &yj in y.values() {
        let d = z - yj;
        if d.norm() < SINGULAR_DISTANCE {
            return Err(Error::Singular(format!("z = {z} coincides with eigenvalue {yj}")));
        }
        log_sum += d.ln();
        let inv = d.inv();
        r1 += inv;
        r2 += inv * inv;
    }
    let nf = n as f64;
    Ok(Potential {
        value: (z * z - 2.0 * u * z) / (2.0 * a2) + log_sum / nf,
        d1: (z - u) / a2 + r1 / nf,
        d2: Complex64::new(1.0 / a2, 0.0) - r2 / nf,
    })
}

/// Joukowski map `S(w) = (w + 1/w)/2`.
pub fn joukowski(w: Complex64) -> Complex64 {
    0.5 * (w + w.inv())
}

/// `sqrt(z - 1) sqrt(z + 1)` with principal square roots; analytic off `[-1, 1]`
/// and asymptotic to `z`.
fn sqrt_z2_minus_1(z: Complex64) -> Complex64 {
    (z - 1.0).sqrt() * (z + 1.0).sqrt()
}

/// Inverse of [`joukowski`] from `C \ [-1, 1]` onto `|w| > 1`.
pub fn inverse_joukowski(z: Complex64) -> Complex64 {
    z + sqrt_z2_minus_1(z)
}

/// Stieltjes transform `int sigma(t)/(z-t) dt = 2(z - sqrt(z^2-1))`.
pub fn semicircle_stieltjes(z: Complex64) -> Complex64 {
    2.0 * (z - sqrt_z2_minus_1(z))
}

fn limit_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        // t = cos(phi) puts the sqrt(1 - t^2) endpoint behaviour into a smooth weight.
        GaussLegendre::new(LIMIT_RULE_NODES)
            .mapped(0.0, PI)
            .map(|(phi, w)| {
                let s = phi.sin();
                (phi.cos(), w * 2.0 / PI * s * s)
            })
            .collect()
    })
}

/// `int_{-1}^{1} log(z - t) sigma(t) dt` by the mapped Gauss–Legendre rule.
pub fn semicircle_log_transform(z: Complex64) -> Complex64 {
    limit_rule().iter().map(|&(t, w)| w * (z - t).ln()).sum()
}

fn on_cut(z: Complex64) -> bool {
    z.im == 0.0 && z.re.abs() <= 1.0
}

/// The limit potential `f` and `f'` at `z` off the cut `[-1, 1]`.
pub fn limit_potential_f(z: Complex64, u: f64, a: f64) -> Result<(Complex64, Complex64)> {
    if on_cut(z) {
        return Err(Error::Domain(format!("z = {z} lies on the branch cut [-1, 1]")));
    }
    let a2 = a * a;
    let value = (z * z - 2.0 * u * z) / (2.0 * a2) + semicircle_log_transform(z);
    let d1 = (z - u) / a2 + semicircle_stieltjes(z);
    Ok((value, d1))
}

/// The fixed diagnostic grid: `Re z` in `[-3, 3]` step `0.25`, `Im z` in `{+-0.5, +-1}`.
pub fn convergence_grid() -> Vec<Complex64> {
    let mut g = Vec::new();
    for i in 0..=24 {
        let x = -3.0 + 0.25 * i as f64;
        for y in [-1.0, -0.5, 0.5, 1.0] {
            g.push(Complex64::new(x, y));
        }
    }
    g
}

/// `sup_z |(1/N) sum log(z - y_j) - int log(z - t) sigma(t) dt|` over `grid`.
pub fn potential_convergence_sup(y: &Spectrum, grid: &[Complex64]) -> f64 {
    let nf = y.len() as f64;
    grid.iter()
        .map(|&z| {
            let emp: Complex64 = y.values().iter().map(|&yj| (z - yj).ln()).sum::<Complex64>() / nf;
            (emp - semicircle_log_transform(z)).norm()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_eigenvalue_closed_form() {
        let y = Spectrum::from_sorted(vec![0.0]).unwrap();
        let p = log_potential_fn(c(0.0, 1.0), 0.0, 1.0, &y).unwrap();
        assert!((p.value - c(-0.5, PI / 2.0)).norm() < 1e-15);
    }

    #[test]
    fn singular_point_rejected() {
        let y = Spectrum::from_sorted(vec![-0.5, 0.25]).unwrap();
        assert!(matches!(
            log_potential_fn(c(0.25, 0.0), 0.0, 1.0, &y),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let y = Spectrum::from_sorted(vec![-0.9, -0.3, 0.1, 0.4, 0.8]).unwrap();
        let h = 1e-5;
        for z in [c(0.3, 0.4), c(-1.2, -0.7), c(2.0, 0.1)] {
            let p = log_potential_fn(z, 0.2, 0.7, &y).unwrap();
            let fp = log_potential_fn(z + h, 0.2, 0.7, &y).unwrap();
            let fm = log_potential_fn(z - h, 0.2, 0.7, &y).unwrap();
            let d1 = (fp.value - fm.value) / (2.0 * h);
            let d2 = (fp.d1 - fm.d1) / (2.0 * h);
            assert!((d1 - p.d1).norm() < 1e-8 * p.d1.norm(), "{z}");
            assert!((d2 - p.d2).norm() < 1e-7 * p.d2.norm(), "{z}");
        }
    }

    #[test]
    fn limit_derivative_at_two() {
        let (_, d1) = limit_potential_f(c(2.0, 0.0), 0.0, 1.0).unwrap();
        let expected = 2.0 + 2.0 * (2.0 - 3f64.sqrt());
        assert!((d1.re - expected).abs() < 1e-14);
        assert!((d1.re - 2.535898).abs() < 1e-6);
        assert!(d1.im.abs() < 1e-15);
    }

    #[test]
    fn stieltjes_matches_quadrature() {
        // direct quadrature of sigma(t)/(z - t) with the same substitution
        let g = GaussLegendre::new(200);
        for z in [c(2.0, 0.0), c(0.3, 0.5), c(-1.5, -0.2)] {
            let q: Complex64 = g
                .mapped(0.0, PI)
                .map(|(p, w)| w * 2.0 / PI * p.sin().powi(2) / (z - p.cos()))
                .sum();
            assert!((q - semicircle_stieltjes(z)).norm() < 1e-9, "{z}");
        }
    }

    #[test]
    fn log_transform_closed_form() {
        // int log(z-t) sigma(t) dt = log(w/2) + 1/(2 w^2) with w = S^{-1}(z)
        for z in [c(0.0, 1.0), c(1.5, 0.3), c(-0.7, -0.8), c(2.5, 0.0)] {
            let w = inverse_joukowski(z);
            let exact = (w / 2.0).ln() + 0.5 / (w * w);
            assert!((semicircle_log_transform(z) - exact).norm() < 1e-12, "{z}");
        }
    }

    #[test]
    fn schwarz_reflection() {
        for z in [c(0.4, 0.9), c(-2.0, 0.3)] {
            let (f, _) = limit_potential_f(z, 0.3, 0.8).unwrap();
            let (g, _) = limit_potential_f(z.conj(), 0.3, 0.8).unwrap();
            assert!((f.conj() - g).norm() < 1e-13);
        }
    }

    #[test]
    fn cut_rejected() {
        assert!(matches!(limit_potential_f(c(0.5, 0.0), 0.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn joukowski_maps_circle_into_interval() {
        for k in 0..360 {
            let th = k as f64 * PI / 180.0;
            let z = joukowski(Complex64::from_polar(1.0, th));
            assert!(z.norm() <= 1.0 + 1e-15);
            assert!(z.im.abs() < 1e-15);
        }
        let w = c(1.3, 2.1);
        assert!((inverse_joukowski(joukowski(w)) - w).norm() < 1e-14);
    }

    #[test]
    fn grid_shape() {
        assert_eq!(convergence_grid().len(), 100);
    }
}
