//! Dense complex Hermitian matrices.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Dense `n x n` Hermitian matrix stored row-major.
///
/// Constructors only produce matrices whose lower triangle is the exact
/// conjugate of the upper one and whose diagonal is real.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    /// Builds a matrix from its upper triangle; `f(j, k)` is called for `j <= k`
    /// in row-major order and the imaginary part of diagonal values is dropped.
    pub fn from_upper(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n);
        for j in 0..n {
            let d = f(j, j);
            m.data[j * n + j] = Complex64::new(d.re, 0.0);
            for k in j + 1..n {
                let z = f(j, k);
                m.data[j * n + k] = z;
                m.data[k * n + j] = z.conj();
            }
        }
        m
    }

    pub fn from_real_diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n);
        for (j, &v) in values.iter().enumerate() {
            m.data[j * n + j] = Complex64::new(v, 0.0);
        }
        m
    }

    /// Wraps row-major data after checking Hermitian symmetry to `rel_tol`
    /// relative to the largest entry.
    pub fn from_row_major(n: usize, data: Vec<Complex64>, rel_tol: f64) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Validation(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        let scale = data.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        for j in 0..n {
            for k in j..n {
                let d = (data[j * n + k] - data[k * n + j].conj()).norm();
                if d > rel_tol * scale {
                    return Err(Error::Validation(format!(
                        "matrix is not Hermitian at ({j},{k}): mismatch {d:e}"
                    )));
                }
            }
        }
        Ok(Self { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.data[j * self.n + k]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// Exact (bitwise) conjugate symmetry with a real diagonal.
    pub fn is_exactly_hermitian(&self) -> bool {
        let n = self.n;
        (0..n).all(|j| {
            self.data[j * n + j].im == 0.0
                && (j + 1..n).all(|k| self.data[j * n + k] == self.data[k * n + j].conj())
        })
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|j| self.data[j * self.n + j].re).sum()
    }

    /// `Tr H^2`, the squared Frobenius norm.
    pub fn trace_of_square(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max).sqrt()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|z| z * c).collect() }
    }

    /// `(self + c * other) * s`, entrywise.
    pub fn add_scaled(&self, other: &Self, c: f64, s: f64) -> Result<Self> {
        if other.n != self.n {
            return Err(Error::Validation(format!(
                "dimension mismatch: {} vs {}",
                self.n, other.n
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| (a + b * c) * s).collect();
        Ok(Self { n: self.n, data })
    }

    pub fn negated(&self) -> Self {
        self.scaled(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upper_builder_mirrors() {
        let m = HermitianMatrix::from_upper(3, |j, k| Complex64::new((j + k) as f64, (k as f64) - (j as f64) + 0.5));
        assert!(m.is_exactly_hermitian());
        assert_eq!(m.get(2, 0), m.get(0, 2).conj());
        assert_eq!(m.get(1, 1).im, 0.0);
    }

    #[test]
    fn rejects_non_hermitian() {
        let data = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(2.0, 0.0),
        ];
        assert!(matches!(
            HermitianMatrix::from_row_major(2, data, 1e-12),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn traces() {
        let m = HermitianMatrix::from_upper(2, |j, k| if j == k { Complex64::new(2.0, 0.0) } else { Complex64::new(1.0, 1.0) });
        assert_eq!(m.trace(), 4.0);
        assert!((m.trace_of_square() - (4.0 + 4.0 + 2.0 + 2.0)).abs() < 1e-15);
    }
}
