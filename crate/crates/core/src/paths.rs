//! Non-intersecting Brownian paths: Karlin–McGregor densities, their
//! `T -> infinity` limit, the eigenvalue density of `diag(y) + (a/sqrt N) V`
//! and Dyson's eigenvalue SDE.

use crate::error::{Error, Result};
use crate::linalg::{scaled_log_det, Matrix};
use crate::quadrature::GaussLegendre;
use crate::rng::RngSeed;
use crate::spectral::Spectrum;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use std::f64::consts::PI;

/// Largest `N` for the determinant densities.
pub const MAX_PATHS: usize = 6;

/// Brownian transition density `(2 pi t)^{-1/2} exp(-(x-y)^2/(2t))`.
pub fn heat_kernel(t: f64, x: f64, y: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("heat kernel needs t > 0, got {t}")));
    }
    Ok((-(x - y).powi(2) / (2.0 * t)).exp() / (2.0 * PI * t).sqrt())
}

/// Start points `y`, end points `z` and the two time spans.
#[derive(Clone, Debug, Serialize)]
pub struct PathConfig {
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub s: f64,
    pub t: f64,
}

impl PathConfig {
    /// End points default to `z_j = j - 1`.
    pub fn new(y: Vec<f64>, s: f64, t: f64) -> Result<Self> {
        let z = (0..y.len()).map(|j| j as f64).collect();
        Self::with_end_points(y, z, s, t)
    }

    pub fn with_end_points(y: Vec<f64>, z: Vec<f64>, s: f64, t: f64) -> Result<Self> {
        let c = Self { y, z, s, t };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.y.len();
        if n == 0 || n > MAX_PATHS {
            return Err(Error::Validation(format!("need 1..={MAX_PATHS} paths, got {n}")));
        }
        if self.z.len() != n {
            return Err(Error::Validation("start and end point counts differ".into()));
        }
        strictly_ascending(&self.y, "start points")?;
        strictly_ascending(&self.z, "end points")?;
        if !(self.s > 0.0 && self.t > 0.0) {
            return Err(Error::Domain(format!("times must be positive, got S={} T={}", self.s, self.t)));
        }
        Ok(())
    }
}

fn strictly_ascending(v: &[f64], what: &str) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Validation(format!("{what} contain non-finite values")));
    }
    if v.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Singular(format!("{what} must be strictly ascending")));
    }
    Ok(())
}

/// Step of `z` if it is an arithmetic progression.
fn arithmetic_step(z: &[f64]) -> Option<f64> {
    if z.len() < 2 {
        return Some(0.0);
    }
    let d = z[1] - z[0];
    let ok = z.iter().enumerate().all(|(k, &v)| (v - z[0] - k as f64 * d).abs() <= 1e-12 * (1.0 + v.abs()));
    ok.then_some(d)
}

/// `log det(p_t(x_j, z_k))` and its sign. For arithmetic `z` the matrix
/// factors into Gaussians times a Vandermonde matrix in `e^{d x_j/t}`, whose
/// differences are formed with `expm1` so large `t` stays accurate.
fn log_det_heat(t: f64, x: &[f64], z: &[f64]) -> (f64, f64) {
    let n = x.len();
    if let Some(d) = arithmetic_step(z) {
        // p_t(x, z_k) = (2 pi t)^{-1/2} e^{-(x - z_0)^2/2t} e^{-(k d)^2/2t} e^{(x - z_0) k d / t}
        let z0 = z[0];
        let mut log = -0.5 * n as f64 * (2.0 * PI * t).ln();
        log -= x.iter().map(|xi| (xi - z0).powi(2) / (2.0 * t)).sum::<f64>();
        log -= (0..n).map(|k| (k as f64 * d).powi(2) / (2.0 * t)).sum::<f64>();
        let mut sign = 1.0;
        for j in 0..n {
            for i in 0..j {
                // e^{c_j} - e^{c_i} with c = (x - z0) d / t
                let ci = (x[i] - z0) * d / t;
                let diff = ci.exp() * ((x[j] - x[i]) * d / t).exp_m1();
                if diff == 0.0 {
                    return (0.0, f64::NEG_INFINITY);
                }
                sign *= diff.signum();
                log += diff.abs().ln();
            }
        }
        return (sign, log);
    }
    let m = Matrix::from_fn(n, |j, k| (-(x[j] - z[k]).powi(2) / (2.0 * t)).exp() / (2.0 * PI * t).sqrt());
    scaled_log_det(&m)
}

/// `q_{S,T}(x; y; z) = det(p_S(y_j, x_k)) det(p_T(x_j, z_k)) / det(p_{S+T}(y_j, z_k))`,
/// the density of the paths at time `S` given they end at `z` at time `S+T`.
pub fn km_conditional_density(x: &[f64], cfg: &PathConfig) -> Result<f64> {
    cfg.validate()?;
    if x.len() != cfg.y.len() {
        return Err(Error::Validation("x has the wrong length".into()));
    }
    let (s1, l1) = log_det_heat(cfg.s, x, &cfg.y);
    let (s2, l2) = log_det_heat(cfg.t, x, &cfg.z);
    let (s3, l3) = log_det_heat(cfg.s + cfg.t, &cfg.y, &cfg.z);
    if !(s3 > 0.0) {
        return Err(Error::Singular("normalising determinant is not positive".into()));
    }
    if s1 == 0.0 || s2 == 0.0 {
        return Ok(0.0);
    }
    Ok(s1 * s2 * (l1 + l2 - l3).exp())
}

/// Vandermonde `prod_{i<j} (x_i - x_j)`.
pub fn vandermonde(x: &[f64]) -> f64 {
    let mut v = 1.0;
    for j in 0..x.len() {
        for i in 0..j {
            v *= x[i] - x[j];
        }
    }
    v
}

/// `q_S(x; y) = (2 pi S)^{-N/2} (Delta(x)/Delta(y)) det(e^{-(x_j - y_k)^2/2S})`.
///
/// Symmetric in `x`; integrates to `N!` over `R^N`, i.e. to 1 over the
/// ordered chamber. Negative values on ascending `x` are reported as errors.
pub fn km_limit_density_qs(x: &[f64], y: &[f64], s: f64) -> Result<f64> {
    let n = y.len();
    if n == 0 || x.len() != n {
        return Err(Error::Validation("x and y must have the same positive length".into()));
    }
    if !(s > 0.0) {
        return Err(Error::Domain(format!("S must be positive, got {s}")));
    }
    strictly_ascending(y, "start points")?;
    let dx = vandermonde(x);
    if dx == 0.0 {
        return Ok(0.0);
    }
    let m = Matrix::from_fn(n, |j, k| (-(x[j] - y[k]).powi(2) / (2.0 * s)).exp());
    let (sign, log) = scaled_log_det(&m);
    if sign == 0.0 {
        return Ok(0.0);
    }
    let dy = vandermonde(y);
    let val = sign * (dx / dy) * (log - 0.5 * n as f64 * (2.0 * PI * s).ln()).exp();
    if val < 0.0 && x.windows(2).all(|w| w[0] <= w[1]) && val < -1e-12 * val.abs().max(1e-300) {
        return Err(Error::Numerical(format!("density {val:e} is negative on ordered input")));
    }
    Ok(val)
}

/// Eigenvalue density of `diag(y) + (a/sqrt N) V`: `q_{a^2/N}(x; y)`.
pub fn eigen_density_rho_n(x: &[f64], y: &Spectrum, a: f64, n: usize) -> Result<f64> {
    if y.len() != n {
        return Err(Error::Validation(format!("spectrum has {} values, expected {n}", y.len())));
    }
    km_limit_density_qs(x, y.values(), a * a / n as f64)
}

const INNER_PANEL_WIDTH: f64 = 0.25;

/// Marginal CDFs of the smaller and larger point of a two-point density on
/// the ordered chamber, tabulated on a uniform grid.
#[derive(Clone, Debug)]
pub struct PairMarginals {
    pub grid: Vec<f64>,
    pub cdf_low: Vec<f64>,
    pub cdf_high: Vec<f64>,
}

impl PairMarginals {
    /// Tabulates from `density(x1, x2)` (for `x1 < x2`) on `[lo, hi]`.
    pub fn tabulate(density: impl Fn(f64, f64) -> f64, lo: f64, hi: f64, cells: usize) -> Self {
        let outer = GaussLegendre::new(8);
        let inner = GaussLegendre::new(16);
        let h = (hi - lo) / cells as f64;
        let grid: Vec<f64> = (0..=cells).map(|i| lo + i as f64 * h).collect();
        // m_low(x) = ∫_x^hi q(x, t) dt, m_high(x) = ∫_lo^x q(t, x) dt, both composite.
        let panels = |a: f64, b: f64| ((b - a) / INNER_PANEL_WIDTH).ceil().max(1.0) as usize;
        let m_low = |x: f64| inner.integrate_composite(x, hi, panels(x, hi), |t| density(x, t));
        let m_high = |x: f64| inner.integrate_composite(lo, x, panels(lo, x), |t| density(t, x));
        let mut cdf_low = vec![0.0];
        let mut cdf_high = vec![0.0];
        for w in grid.windows(2) {
            let (a, b) = (w[0], w[1]);
            cdf_low.push(cdf_low.last().unwrap() + outer.integrate(a, b, m_low));
            cdf_high.push(cdf_high.last().unwrap() + outer.integrate(a, b, m_high));
        }
        Self { grid, cdf_low, cdf_high }
    }

    fn interp(&self, table: &[f64], x: f64) -> f64 {
        let (lo, hi) = (self.grid[0], *self.grid.last().unwrap());
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return *table.last().unwrap();
        }
        let h = (hi - lo) / (self.grid.len() - 1) as f64;
        let i = (((x - lo) / h) as usize).min(self.grid.len() - 2);
        let f = (x - self.grid[i]) / h;
        table[i] * (1.0 - f) + table[i + 1] * f
    }

    pub fn cdf_low_at(&self, x: f64) -> f64 {
        self.interp(&self.cdf_low, x)
    }

    pub fn cdf_high_at(&self, x: f64) -> f64 {
        self.interp(&self.cdf_high, x)
    }
}

/// Terminal state of one Dyson path.
#[derive(Clone, Debug, Serialize)]
pub struct DysonPath {
    pub terminal: Vec<f64>,
    /// Smallest gap seen at any accepted step.
    pub min_gap: f64,
    pub steps: usize,
}

/// Maximum number of step halvings before giving up.
pub const MAX_HALVINGS: u32 = 30;

/// Euler–Maruyama for `d lambda_i = dB_i + sum_{k != i} dt/(lambda_i - lambda_k)`.
///
/// A step that breaks the ordering, or whose drift moves a point by more
/// than a tenth of its nearest gap, is split in two with the Brownian
/// increment refined by bridge sampling.
pub fn dyson_evolve(y: &[f64], t_final: f64, dt: f64, seed: RngSeed) -> Result<DysonPath> {
    if y.is_empty() {
        return Err(Error::Validation("no starting points".into()));
    }
    strictly_ascending(y, "starting points")?;
    if !(t_final >= 0.0) || !(dt > 0.0) {
        return Err(Error::Domain(format!("need t_final >= 0 and dt > 0, got {t_final}, {dt}")));
    }
    let gap0 = y.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    if y.len() > 1 && dt > 1e-4 * gap0 * gap0 {
        return Err(Error::Validation(format!(
            "dt = {dt} exceeds 1e-4 * (min gap)^2 = {}",
            1e-4 * gap0 * gap0
        )));
    }
    let mut rng = seed.rng();
    let n = y.len();
    let mut lam = y.to_vec();
    let mut db = vec![0.0; n];
    let mut t = 0.0;
    let mut path = DysonPath { terminal: Vec::new(), min_gap: gap0, steps: 0 };
    while t < t_final {
        let h = dt.min(t_final - t);
        for b in db.iter_mut() {
            *b = h.sqrt() * rng.sample::<f64, _>(StandardNormal);
        }
        advance(&mut lam, h, &db, 0, &mut rng, &mut path)?;
        t += h;
    }
    path.terminal = lam;
    Ok(path)
}

fn drift(lam: &[f64], i: usize) -> f64 {
    lam.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, &l)| 1.0 / (lam[i] - l)).sum()
}

fn advance<R: Rng>(lam: &mut [f64], h: f64, db: &[f64], depth: u32, rng: &mut R, path: &mut DysonPath) -> Result<()> {
    let n = lam.len();
    let trial: Vec<f64> = (0..n).map(|i| lam[i] + db[i] + h * drift(lam, i)).collect();
    let gap = |v: &[f64]| v.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let old_gap = gap(lam);
    let stiff = (0..n).any(|i| (h * drift(lam, i)).abs() > 0.1 * old_gap);
    let new_gap = gap(&trial);
    if new_gap > 0.0 && !stiff {
        lam.copy_from_slice(&trial);
        path.min_gap = path.min_gap.min(new_gap);
        path.steps += 1;
        return Ok(());
    }
    if depth >= MAX_HALVINGS {
        return Err(Error::Numerical(format!(
            "Dyson integration stiff: ordering violated after {MAX_HALVINGS} step halvings"
        )));
    }
    // Brownian bridge: first half increment given the full one.
    let half = 0.5 * h;
    let first: Vec<f64> = db.iter().map(|&b| 0.5 * b + (0.25 * h).sqrt() * rng.sample::<f64, _>(StandardNormal)).collect();
    let second: Vec<f64> = db.iter().zip(&first).map(|(b, f)| b - f).collect();
    advance(lam, half, &first, depth + 1, rng, path)?;
    advance(lam, half, &second, depth + 1, rng, path)
}
