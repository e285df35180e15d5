//! The windowed nearest-neighbour spacing statistic and its Monte Carlo mean.

use crate::ensembles::{sample_deformed, sample_gue, WignerSpec};
use crate::error::{Error, Result};
use crate::fredholm::spacing_cdf;
use crate::rng::{RngSeed, ROLE_GUE};
use crate::spectral::{hermitian_eigenvalues, semicircle_rho, Spectrum};
use crate::stats::mean_se;
use rayon::prelude::*;
use serde::Serialize;

/// Centre, scale and bulk density of the counting window, plus the
/// threshold `s` in units of the mean spacing.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SpacingWindow {
    pub u: f64,
    pub t_n: f64,
    pub rho: f64,
    pub s: f64,
}

impl SpacingWindow {
    pub fn new(u: f64, t_n: f64, rho: f64, s: f64) -> Result<Self> {
        if !(t_n > 0.0) || !(rho > 0.0) || !(s >= 0.0) {
            return Err(Error::Validation(format!("bad window: t_N={t_n}, rho={rho}, s={s}")));
        }
        Ok(Self { u, t_n, rho, s })
    }
}

/// Default window scale `ceil(sqrt N)`.
pub fn default_window_scale(n: usize) -> f64 {
    (n as f64).sqrt().ceil()
}

/// `(1/2t_N) #{j : x_{j+1} - x_j <= s/(N rho), |x_j - u| <= t_N/(N rho)}`.
/// A gap belongs to the window when its left endpoint does.
pub fn spacing_statistic(x: &Spectrum, win: &SpacingWindow) -> f64 {
    let n = x.len() as f64;
    let unit = 1.0 / (n * win.rho);
    let (gap, half) = (win.s * unit, win.t_n * unit);
    let count = x
        .values()
        .windows(2)
        .filter(|w| (w[0] - win.u).abs() <= half && w[1] - w[0] <= gap)
        .count();
    count as f64 / (2.0 * win.t_n)
}

/// Statistic for every threshold in `s_grid` at once.
pub fn spacing_statistics(x: &Spectrum, u: f64, t_n: f64, rho: f64, s_grid: &[f64]) -> Vec<f64> {
    let unit = 1.0 / (x.len() as f64 * rho);
    let half = t_n * unit;
    let gaps: Vec<f64> = x
        .values()
        .windows(2)
        .filter(|w| (w[0] - u).abs() <= half)
        .map(|w| (w[1] - w[0]) / unit)
        .collect();
    s_grid
        .iter()
        .map(|&s| gaps.iter().filter(|&&g| g <= s).count() as f64 / (2.0 * t_n))
        .collect()
}

/// Matrix ensemble for the spacing experiment.
#[derive(Clone, Debug, Serialize)]
pub enum SpacingEnsemble {
    /// `(W + aV)/sqrt N`.
    Deformed { spec: WignerSpec, a: f64 },
    /// `V/sqrt N` alone, density `sqrt(4 - u^2)/(2 pi)`.
    GueControl,
}

impl SpacingEnsemble {
    pub fn density(&self, u: f64) -> f64 {
        match self {
            SpacingEnsemble::Deformed { a, .. } => semicircle_rho(u, *a),
            SpacingEnsemble::GueControl => (4.0 - u * u).max(0.0).sqrt() / (2.0 * std::f64::consts::PI),
        }
    }

    pub fn spectrum(&self, n: usize, master: u64, trial: u64) -> Result<Spectrum> {
        let m = match self {
            SpacingEnsemble::Deformed { spec, a } => sample_deformed(spec, *a, n, master, trial)?,
            SpacingEnsemble::GueControl => {
                sample_gue(n, RngSeed::for_trial(master, trial, ROLE_GUE))?.scaled(1.0 / (n as f64).sqrt())
            }
        };
        hermitian_eigenvalues(&m)
    }
}

/// Inputs of one spacing run.
#[derive(Clone, Debug, Serialize)]
pub struct SpacingRun {
    pub ensemble: SpacingEnsemble,
    pub n: usize,
    pub trials: usize,
    pub s_grid: Vec<f64>,
    pub u: f64,
    pub t_n: Option<f64>,
    pub seed: u64,
}

/// Monte Carlo estimate against the limiting CDF at one threshold.
#[derive(Clone, Debug, Serialize)]
pub struct SpacingEstimate {
    pub s: f64,
    pub mean: f64,
    pub se: f64,
    pub limit: f64,
}

impl SpacingEstimate {
    pub fn gap(&self) -> f64 {
        self.mean - self.limit
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpacingReport {
    pub t_n: f64,
    pub rho: f64,
    pub estimates: Vec<SpacingEstimate>,
}

/// Mean of the spacing statistic over independent draws, with standard
/// errors, next to `spacing_cdf`. Trials run in parallel; results are
/// reduced in trial order so the output does not depend on scheduling.
pub fn mc_expected_spacing(run: &SpacingRun) -> Result<SpacingReport> {
    if run.trials < 100 {
        return Err(Error::Validation(format!("need at least 100 trials, got {}", run.trials)));
    }
    if run.n < 2 {
        return Err(Error::Validation("need N >= 2".into()));
    }
    if let SpacingEnsemble::Deformed { spec, a } = &run.ensemble {
        spec.validate()?;
        if !(*a >= 0.0) {
            return Err(Error::Domain(format!("a must be >= 0, got {a}")));
        }
    }
    let rho = run.ensemble.density(run.u);
    let t_n = run.t_n.unwrap_or_else(|| default_window_scale(run.n));
    SpacingWindow::new(run.u, t_n, rho, 0.0)?;
    let per_trial: Vec<Vec<f64>> = (0..run.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let x = run.ensemble.spectrum(run.n, run.seed, trial)?;
            Ok(spacing_statistics(&x, run.u, t_n, rho, &run.s_grid))
        })
        .collect::<Result<_>>()?;
    let mut estimates = Vec::with_capacity(run.s_grid.len());
    for (k, &s) in run.s_grid.iter().enumerate() {
        let col: Vec<f64> = per_trial.iter().map(|v| v[k]).collect();
        let (mean, se) = mean_se(&col);
        estimates.push(SpacingEstimate { s, mean, se, limit: spacing_cdf(s)? });
    }
    Ok(SpacingReport { t_n, rho, estimates })
}
