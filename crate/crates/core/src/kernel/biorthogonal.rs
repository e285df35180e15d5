//! Finite-rank biorthogonal kernels and the Fredholm ratio identity
//! `Z_N[1+g]/Z_N[1] = det(I + K_N g)`, where
//! `Z_N[f] = (1/N!) ∫ det(phi_j(x_k)) det(psi_j(x_k)) prod f(x_k) dx`.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::quadrature::GaussLegendre;
use serde::Serialize;

pub type RealFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// Functions `phi_j`, `psi_k` on `[lo, hi]` with the Gram matrix
/// `A_jk = ∫ phi_j psi_k` computed by Gauss–Legendre quadrature.
pub struct BiorthogonalSystem {
    phi: Vec<RealFn>,
    psi: Vec<RealFn>,
    pub lo: f64,
    pub hi: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    pub gram: Matrix,
    gram_inv: Matrix,
    /// Infinity-norm condition number of the Gram matrix.
    pub condition: f64,
}

impl BiorthogonalSystem {
    pub fn new(phi: Vec<RealFn>, psi: Vec<RealFn>, lo: f64, hi: f64, quad_nodes: usize) -> Result<Self> {
        let n = phi.len();
        if n == 0 || psi.len() != n {
            return Err(Error::Validation(format!(
                "need equally many phi and psi functions, got {} and {}",
                phi.len(),
                psi.len()
            )));
        }
        if !(hi > lo) {
            return Err(Error::Validation(format!("empty domain [{lo}, {hi}]")));
        }
        let (nodes, weights): (Vec<f64>, Vec<f64>) = GaussLegendre::new(quad_nodes).mapped(lo, hi).unzip();
        let mut sys = Self {
            phi,
            psi,
            lo,
            hi,
            nodes,
            weights,
            gram: Matrix::zeros(n),
            gram_inv: Matrix::zeros(n),
            condition: f64::INFINITY,
        };
        sys.gram = sys.weighted_gram(|_| 1.0);
        sys.gram_inv = sys
            .gram
            .inverse()
            .map_err(|_| Error::Singular("Gram matrix of the biorthogonal system has deficient rank".into()))?;
        sys.condition = sys.gram.condition_number();
        if !sys.condition.is_finite() || sys.condition > 1e14 {
            return Err(Error::Singular(format!(
                "Gram matrix is numerically rank deficient (condition {:e})",
                sys.condition
            )));
        }
        Ok(sys)
    }

    pub fn rank(&self) -> usize {
        self.phi.len()
    }

    /// `B_jk = ∫ phi_j psi_k g`.
    pub fn weighted_gram(&self, g: impl Fn(f64) -> f64) -> Matrix {
        let n = self.rank();
        let vals: Vec<(Vec<f64>, Vec<f64>, f64)> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| {
                (self.phi.iter().map(|f| f(x)).collect(), self.psi.iter().map(|f| f(x)).collect(), w * g(x))
            })
            .collect();
        Matrix::from_fn(n, |j, k| vals.iter().map(|(p, q, w)| p[j] * q[k] * w).sum())
    }

    /// `K_N(t, s) = sum_{k,j} psi_k(t) (A^{-1})_{kj} phi_j(s)`.
    pub fn kernel(&self, t: f64, s: f64) -> f64 {
        let n = self.rank();
        let mut acc = 0.0;
        for k in 0..n {
            let pk = (self.psi[k])(t);
            for j in 0..n {
                acc += pk * self.gram_inv.get(k, j) * (self.phi[j])(s);
            }
        }
        acc
    }

    /// `∫ K_N(t, t) dt` by the system's quadrature.
    pub fn trace(&self) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * self.kernel(x, x)).sum()
    }

    /// `det(I + A^{-1} B)` with `B` weighted by `g`.
    pub fn fredholm_det(&self, g: impl Fn(f64) -> f64) -> f64 {
        let b = self.weighted_gram(g);
        let m = self.gram_inv.mul(&b);
        Matrix::from_fn(self.rank(), |i, j| m.get(i, j) + if i == j { 1.0 } else { 0.0 }).det()
    }

    /// `N! Z_N[f]` by tensor-product quadrature over `dim` free coordinates,
    /// the remaining ones fixed to `fixed`.
    fn tensor_integral(&self, fixed: &[f64], f: &dyn Fn(f64) -> f64) -> f64 {
        let n = self.rank();
        let free = n - fixed.len();
        let q = self.nodes.len();
        let phi_at: Vec<Vec<f64>> = self.nodes.iter().map(|&x| self.phi.iter().map(|g| g(x)).collect()).collect();
        let psi_at: Vec<Vec<f64>> = self.nodes.iter().map(|&x| self.psi.iter().map(|g| g(x)).collect()).collect();
        let f_at: Vec<f64> = self.nodes.iter().map(|&x| f(x)).collect();
        let fixed_phi: Vec<Vec<f64>> = fixed.iter().map(|&x| self.phi.iter().map(|g| g(x)).collect()).collect();
        let fixed_psi: Vec<Vec<f64>> = fixed.iter().map(|&x| self.psi.iter().map(|g| g(x)).collect()).collect();
        let fixed_f: f64 = fixed.iter().map(|&x| f(x)).product();

        let mut idx = vec![0usize; free];
        let mut total = 0.0;
        let mut a = Matrix::zeros(n);
        let mut b = Matrix::zeros(n);
        loop {
            let mut w = fixed_f;
            for (col, row) in fixed_phi.iter().enumerate() {
                for j in 0..n {
                    a.set(j, col, row[j]);
                    b.set(j, col, fixed_psi[col][j]);
                }
            }
            for (c, &i) in idx.iter().enumerate() {
                let col = fixed.len() + c;
                for j in 0..n {
                    a.set(j, col, phi_at[i][j]);
                    b.set(j, col, psi_at[i][j]);
                }
                w *= self.weights[i] * f_at[i];
            }
            total += w * a.det() * b.det();
            let mut c = 0;
            while c < free {
                idx[c] += 1;
                if idx[c] < q {
                    break;
                }
                idx[c] = 0;
                c += 1;
            }
            if c == free {
                break;
            }
        }
        total
    }

    /// `Z_N[1+g]/Z_N[1]` by direct `N`-dimensional quadrature.
    pub fn ratio_by_quadrature(&self, g: impl Fn(f64) -> f64) -> f64 {
        let one = |_: f64| 1.0;
        let pert = |x: f64| 1.0 + g(x);
        self.tensor_integral(&[], &pert) / self.tensor_integral(&[], &one)
    }

    /// One-point function `N ∫ u_N(x, x_2, ..., x_N) dx_2 ... dx_N` by
    /// brute-force marginalisation of the symmetric density.
    pub fn one_point_by_quadrature(&self, x: f64) -> f64 {
        let n = self.rank() as f64;
        let one = |_: f64| 1.0;
        let factorial: f64 = (1..=self.rank()).map(|k| k as f64).product();
        n * self.tensor_integral(&[x], &one) / (factorial * self.gram.det())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FredholmRatio {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

/// Compares the quadrature ratio `Z_N[1+g]/Z_N[1]` with `det(I + A^{-1}B)`.
pub fn fredholm_ratio_check(sys: &BiorthogonalSystem, g: impl Fn(f64) -> f64 + Copy) -> Result<FredholmRatio> {
    if !(2..=3).contains(&sys.rank()) {
        return Err(Error::Validation(format!("brute-force check supports N = 2 or 3, got {}", sys.rank())));
    }
    let lhs = sys.ratio_by_quadrature(g);
    let rhs = sys.fredholm_det(g);
    if !lhs.is_finite() || !rhs.is_finite() {
        return Err(Error::Numerical("quadrature of the Fredholm ratio is not finite".into()));
    }
    Ok(FredholmRatio { lhs, rhs, gap: (lhs - rhs).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn monomials(n: usize) -> Vec<RealFn> {
        (0..n).map(|k| Box::new(move |x: f64| x.powi(k as i32)) as RealFn).collect()
    }

    #[test]
    fn hand_computed_gram() {
        let s = BiorthogonalSystem::new(monomials(2), monomials(2), 0.0, 1.0, 10).unwrap();
        let expect = [[1.0, 0.5], [0.5, 1.0 / 3.0]];
        for j in 0..2 {
            for k in 0..2 {
                assert!((s.gram.get(j, k) - expect[j][k]).abs() < 1e-15);
            }
        }
        assert!((s.trace() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn projection_property() {
        let s = BiorthogonalSystem::new(monomials(3), monomials(3), 0.0, 1.0, 12).unwrap();
        let g = GaussLegendre::new(12);
        for (t, u) in [(0.1, 0.7), (0.5, 0.5), (0.9, 0.2)] {
            let lhs = g.integrate(0.0, 1.0, |r| s.kernel(t, r) * s.kernel(r, u));
            assert!((lhs - s.kernel(t, u)).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_and_constant_perturbations() {
        let s = BiorthogonalSystem::new(monomials(3), monomials(3), 0.0, 1.0, 8).unwrap();
        assert!((s.fredholm_det(|_| 0.0) - 1.0).abs() < 1e-14);
        assert!((s.ratio_by_quadrature(|_| 0.0) - 1.0).abs() < 1e-14);
        let c = 0.7;
        assert!((s.fredholm_det(|_| c) - (1.0f64 + c).powi(3)).abs() < 1e-12);
        let r = fredholm_ratio_check(&s, |_| c).unwrap();
        assert!(r.gap < 1e-10);
    }

    #[test]
    fn singular_gram_rejected() {
        let phi: Vec<RealFn> = vec![Box::new(|x| x), Box::new(|x| 2.0 * x)];
        let r = BiorthogonalSystem::new(phi, monomials(2), 0.0, 1.0, 8);
        assert!(matches!(r, Err(Error::Singular(_))));
    }

    #[test]
    fn linear_perturbation_two_points() {
        let s = BiorthogonalSystem::new(monomials(2), monomials(2), 0.0, 1.0, 8).unwrap();
        let r = fredholm_ratio_check(&s, |x| x).unwrap();
        assert!(r.gap < 1e-10, "{r:?}");
    }
}
