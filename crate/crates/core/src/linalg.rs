//! Small dense real linear algebra: LU with partial or full pivoting.

use crate::error::{Error, Result};

/// Square row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Validation("matrix rows must all have length n".into()));
        }
        Ok(Self { n, data: rows.concat() })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        self.data.chunks(self.n.max(1)).map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn lu(&self) -> Lu {
        Lu::partial(self)
    }

    pub fn det(&self) -> f64 {
        self.lu().det()
    }

    pub fn inverse(&self) -> Result<Matrix> {
        self.lu().inverse()
    }

    /// Infinity-norm condition number via the explicit inverse.
    pub fn condition_number(&self) -> f64 {
        match self.inverse() {
            Ok(inv) => self.norm_inf() * inv.norm_inf(),
            Err(_) => f64::INFINITY,
        }
    }
}

/// `P A Q = L U` factorization; `Q` is the identity under partial pivoting.
#[derive(Clone, Debug)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    row_perm: Vec<usize>,
    col_perm: Vec<usize>,
    sign: f64,
}

impl Lu {
    pub fn partial(a: &Matrix) -> Self {
        Self::factor(a, false)
    }

    pub fn full(a: &Matrix) -> Self {
        Self::factor(a, true)
    }

    fn factor(a: &Matrix, full: bool) -> Self {
        let n = a.n;
        let mut lu = a.data.clone();
        let mut row_perm: Vec<usize> = (0..n).collect();
        let mut col_perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let (mut pr, mut pc, mut best) = (k, k, -1.0);
            let cols = if full { k..n } else { k..k + 1 };
            for i in k..n {
                for j in cols.clone() {
                    let v = lu[i * n + j].abs();
                    if v > best {
                        best = v;
                        pr = i;
                        pc = j;
                    }
                }
            }
            if pr != k {
                for j in 0..n {
                    lu.swap(k * n + j, pr * n + j);
                }
                row_perm.swap(k, pr);
                sign = -sign;
            }
            if pc != k {
                for i in 0..n {
                    lu.swap(i * n + k, i * n + pc);
                }
                col_perm.swap(k, pc);
                sign = -sign;
            }
            let piv = lu[k * n + k];
            if piv == 0.0 {
                continue;
            }
            for i in k + 1..n {
                let f = lu[i * n + k] / piv;
                lu[i * n + k] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        lu[i * n + j] -= f * lu[k * n + j];
                    }
                }
            }
        }
        Self { n, lu, row_perm, col_perm, sign }
    }

    pub fn det(&self) -> f64 {
        let (s, l) = self.log_abs_det();
        s * l.exp()
    }

    /// `(sign, log|det|)`; sign is 0 for a singular matrix.
    pub fn log_abs_det(&self) -> (f64, f64) {
        let mut sign = self.sign;
        let mut log = 0.0;
        for k in 0..self.n {
            let p = self.lu[k * self.n + k];
            if p == 0.0 {
                return (0.0, f64::NEG_INFINITY);
            }
            sign *= p.signum();
            log += p.abs().ln();
        }
        (sign, log)
    }

    fn is_singular(&self) -> bool {
        (0..self.n).any(|k| self.lu[k * self.n + k] == 0.0)
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if self.is_singular() {
            return Err(Error::Singular("matrix is singular".into()));
        }
        let n = self.n;
        let mut y: Vec<f64> = self.row_perm.iter().map(|&r| b[r]).collect();
        for i in 0..n {
            for j in 0..i {
                y[i] -= self.lu[i * n + j] * y[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                y[i] -= self.lu[i * n + j] * y[j];
            }
            y[i] /= self.lu[i * n + i];
        }
        let mut x = vec![0.0; n];
        for (k, &c) in self.col_perm.iter().enumerate() {
            x[c] = y[k];
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<Matrix> {
        let n = self.n;
        let mut inv = Matrix::zeros(n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.fill(0.0);
            e[j] = 1.0;
            let col = self.solve(&e)?;
            for i in 0..n {
                inv.set(i, j, col[i]);
            }
        }
        Ok(inv)
    }
}

/// `log|det A|` with its sign after scaling each row by its largest entry;
/// useful when rows differ by many orders of magnitude.
pub fn scaled_log_det(a: &Matrix) -> (f64, f64) {
    let n = a.n;
    let mut b = a.clone();
    let mut shift = 0.0;
    for i in 0..n {
        let m = b.data[i * n..(i + 1) * n].iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if m == 0.0 {
            return (0.0, f64::NEG_INFINITY);
        }
        for x in &mut b.data[i * n..(i + 1) * n] {
            *x /= m;
        }
        shift += m.ln();
    }
    let (s, l) = Lu::full(&b).log_abs_det();
    (s, l + shift)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hilbert(n: usize) -> Matrix {
        Matrix::from_fn(n, |i, j| 1.0 / (i + j + 1) as f64)
    }

    #[test]
    fn determinant_of_small_matrices() {
        let a = Matrix::from_rows(&[vec![0.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert!((a.det() + 6.0).abs() < 1e-14);
        assert!((Lu::full(&a).det() + 6.0).abs() < 1e-14);
        // det H_4 = 1/6048000
        assert!((hilbert(4).det() * 6048000.0 - 1.0).abs() < 1e-9);
        assert!((Lu::full(&hilbert(4)).det() * 6048000.0 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn inverse_roundtrip() {
        let a = Matrix::from_fn(5, |i, j| ((i * 7 + j * 3) % 5) as f64 + if i == j { 4.0 } else { 0.0 });
        for lu in [Lu::partial(&a), Lu::full(&a)] {
            let p = a.mul(&lu.inverse().unwrap());
            for i in 0..5 {
                for j in 0..5 {
                    assert!((p.get(i, j) - if i == j { 1.0 } else { 0.0 }).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn singular_detected() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert_eq!(a.det(), 0.0);
        assert!(matches!(a.inverse(), Err(Error::Singular(_))));
        assert!(a.condition_number().is_infinite());
    }

    #[test]
    fn scaled_determinant_handles_wide_ranges() {
        let a = Matrix::from_rows(&[vec![1e-200, 2e-200], vec![3e150, 1e150]]).unwrap();
        let (s, l) = scaled_log_det(&a);
        assert_eq!(s, -1.0);
        assert!((l - (5e-50f64).ln()).abs() < 1e-12);
    }
}
