//! Fredholm determinants on `L^2(0, s)`, the sine-process gap probability
//! `H(s)`, the Gaudin spacing density `p = H''` and the spacing CDF
//! `H'(s) + 1`.

use crate::error::{Error, Result};
use crate::kernel::sine_kernel;
use crate::linalg::Matrix;
use crate::quadrature::GaussLegendre;
use serde_json::json;

/// Gauss–Legendre nodes used for `H`. Fixed so that `H` is a smooth function
/// of `s` under finite differencing.
pub const GAP_NODES: usize = 64;

/// Largest node count tried by [`fredholm_det_converged`].
pub const MAX_NYSTROM_NODES: usize = 1024;

/// Finite-difference step for derivatives of `H`.
pub const FD_STEP: f64 = 1e-3;

/// Truncation point of the improper spacing integrals.
pub const S_MAX: f64 = 6.0;

/// Gauss–Legendre discretisation of `[0, s]`. For `s < 0` the weights are
/// negative, which continues `H` analytically to the left of 0.
#[derive(Clone, Debug)]
pub struct NystromGrid {
    pub s: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl NystromGrid {
    pub fn new(s: f64, n: usize) -> Self {
        let g = GaussLegendre::new(n);
        let nodes = g.nodes().iter().map(|x| 0.5 * s * (x + 1.0)).collect();
        let weights = g.weights().iter().map(|w| 0.5 * s * w).collect();
        Self { s, nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `det(I - K)` on the grid: symmetrised `W^{1/2} K W^{1/2}` for `s >= 0`,
/// `K W` otherwise.
fn nystrom_det(kernel: &impl Fn(f64, f64) -> f64, grid: &NystromGrid) -> f64 {
    let n = grid.len();
    let (x, w) = (&grid.nodes, &grid.weights);
    let m = if grid.s >= 0.0 {
        let r: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
        Matrix::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 } - r[i] * kernel(x[i], x[j]) * r[j])
    } else {
        Matrix::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 } - kernel(x[i], x[j]) * w[j])
    };
    m.det()
}

/// `det(I - K)_{L^2(0,s)}` with `n` Nyström nodes.
pub fn fredholm_det(kernel: impl Fn(f64, f64) -> f64, s: f64, n: usize) -> Result<f64> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::Domain(format!("interval length must be >= 0, got {s}")));
    }
    if n < 4 {
        return Err(Error::Validation(format!("need at least 4 Nyström nodes, got {n}")));
    }
    if s == 0.0 {
        return Ok(1.0);
    }
    Ok(nystrom_det(&kernel, &NystromGrid::new(s, n)))
}

/// Doubles the node count from `n` until two successive determinants agree
/// to `1e-12`.
pub fn fredholm_det_converged(kernel: impl Fn(f64, f64) -> f64, s: f64, n: usize) -> Result<f64> {
    let mut n = n.max(4);
    let mut prev = fredholm_det(&kernel, s, n)?;
    while 2 * n <= MAX_NYSTROM_NODES {
        let next = fredholm_det(&kernel, s, 2 * n)?;
        let change = (next - prev).abs();
        if change < 1e-12 {
            return Ok(next);
        }
        prev = next;
        n *= 2;
    }
    Err(Error::Accuracy {
        message: "Nyström determinant did not self-converge".into(),
        diagnostics: json!({ "s": s, "max_nodes": MAX_NYSTROM_NODES }),
    })
}

fn sine(x: f64, y: f64) -> f64 {
    sine_kernel(x - y)
}

fn check_s(s: f64, what: &str) -> Result<()> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::Domain(format!("{what} must be >= 0, got {s}")));
    }
    Ok(())
}

/// Sine-process gap probability and its derivatives on a fixed Nyström grid.
#[derive(Clone, Copy, Debug)]
pub struct SineGap {
    nodes: usize,
}

impl Default for SineGap {
    fn default() -> Self {
        Self { nodes: GAP_NODES }
    }
}

impl SineGap {
    pub fn new(nodes: usize) -> Result<Self> {
        if !(4..=MAX_NYSTROM_NODES).contains(&nodes) {
            return Err(Error::Validation(format!("node count must be in 4..={MAX_NYSTROM_NODES}, got {nodes}")));
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// `H(s)` for any real `s`, negative values by analytic continuation.
    fn h_signed(&self, s: f64) -> f64 {
        if s == 0.0 {
            1.0
        } else {
            nystrom_det(&sine, &NystromGrid::new(s, self.nodes))
        }
    }

    fn d1(&self, s: f64, h: f64) -> f64 {
        let f = |x| self.h_signed(x);
        (f(s - 2.0 * h) - 8.0 * f(s - h) + 8.0 * f(s + h) - f(s + 2.0 * h)) / (12.0 * h)
    }

    fn d2(&self, s: f64, h: f64) -> f64 {
        let f = |x| self.h_signed(x);
        (-f(s - 2.0 * h) + 16.0 * f(s - h) - 30.0 * f(s) + 16.0 * f(s + h) - f(s + 2.0 * h)) / (12.0 * h * h)
    }

    /// Probability that the sine process has no point in `[0, s]`.
    pub fn h(&self, s: f64) -> Result<f64> {
        check_s(s, "gap length")?;
        Ok(self.h_signed(s))
    }

    /// `H'(s)` by five-point differences with one Richardson step.
    pub fn derivative(&self, s: f64) -> Result<f64> {
        check_s(s, "gap length")?;
        Ok((16.0 * self.d1(s, FD_STEP) - self.d1(s, 2.0 * FD_STEP)) / 15.0)
    }

    /// Gaudin density `p(s) = H''(s)`; values in `[-1e-6, 0)` are clamped to 0.
    pub fn density(&self, s: f64) -> Result<f64> {
        check_s(s, "spacing")?;
        let p = (16.0 * self.d2(s, FD_STEP) - self.d2(s, 2.0 * FD_STEP)) / 15.0;
        if p < -1e-6 {
            return Err(Error::Numerical(format!("Gaudin density {p:e} is negative at s = {s}")));
        }
        if p < 0.0 {
            log::warn!("clamping Gaudin density {p:e} at s = {s} to 0");
            return Ok(0.0);
        }
        Ok(p)
    }

    /// `∫_0^s p = H'(s) - H'(0) = H'(s) + 1`.
    pub fn cdf(&self, s: f64) -> Result<f64> {
        Ok(self.derivative(s)? + 1.0)
    }
}

pub fn gap_probability_h(s: f64) -> Result<f64> {
    SineGap::default().h(s)
}

pub fn gap_probability_derivative(s: f64) -> Result<f64> {
    SineGap::default().derivative(s)
}

pub fn gaudin_density(s: f64) -> Result<f64> {
    SineGap::default().density(s)
}

pub fn spacing_cdf(s: f64) -> Result<f64> {
    SineGap::default().cdf(s)
}

/// Small-`s` oracle: `H(s) = 1 + sum_{m=1}^{terms} (-1)^m/m! ∫_{[0,s]^m} det(K(x_i,x_j)) dx`.
pub fn gap_probability_series(s: f64, terms: usize) -> f64 {
    let g = GaussLegendre::new(10);
    let (x, w): (Vec<f64>, Vec<f64>) = g.mapped(0.0, s).unzip();
    let mut total = 1.0;
    let mut factorial = 1.0;
    for m in 1..=terms {
        factorial *= m as f64;
        let mut idx = vec![0usize; m];
        let mut integral = 0.0;
        loop {
            let pts: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
            let wt: f64 = idx.iter().map(|&i| w[i]).product();
            integral += wt * Matrix::from_fn(m, |i, j| sine(pts[i], pts[j])).det();
            let mut c = 0;
            while c < m {
                idx[c] += 1;
                if idx[c] < x.len() {
                    break;
                }
                idx[c] = 0;
                c += 1;
            }
            if c == m {
                break;
            }
        }
        total += if m % 2 == 1 { -integral } else { integral } / factorial;
    }
    total
}
