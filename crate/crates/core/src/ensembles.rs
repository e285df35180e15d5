//! Wigner, GUE and Gaussian-divisible random matrices.
//!
//! Entries of a Wigner matrix are independent on and above the diagonal. The
//! total off-diagonal variance `E|w_jk|^2 = 1/4` is split evenly between the
//! real and imaginary parts, and the diagonal is real with variance `1/4`.

use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;
use crate::rng::RngSeed;
use crate::stats::{ks_two_sample, variance_se};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Total entry variance `E|w_jk|^2`.
pub const ENTRY_VARIANCE: f64 = 0.25;

/// Moment order used for the declared moment bound unless configured.
pub const DEFAULT_MOMENT_ORDER: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LawKind {
    /// `+-sqrt(v)` with equal probability.
    Bernoulli,
    /// Uniform on `[-sqrt(3v), sqrt(3v)]`.
    Uniform,
    Gaussian,
    /// Two atoms with mean zero: the positive one carries probability `q`.
    TwoPointAsymmetric { q: f64 },
}

impl LawKind {
    pub fn parse(kind: &str, params: &[(String, f64)]) -> Result<Self> {
        let get = |key: &str| params.iter().find(|(k, _)| k == key).map(|(_, v)| *v);
        match kind.to_ascii_lowercase().as_str() {
            "bernoulli" => Ok(LawKind::Bernoulli),
            "uniform" => Ok(LawKind::Uniform),
            "gaussian" | "normal" => Ok(LawKind::Gaussian),
            "two_point" | "two-point" | "twopointasymmetric" | "two_point_asymmetric" => {
                Ok(LawKind::TwoPointAsymmetric { q: get("q").unwrap_or(0.25) })
            }
            other => Err(Error::Config(format!("unknown law kind '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LawKind::Bernoulli => "bernoulli",
            LawKind::Uniform => "uniform",
            LawKind::Gaussian => "gaussian",
            LawKind::TwoPointAsymmetric { .. } => "two_point",
        }
    }
}

/// A zero-mean real law with declared variance and `p`-th absolute moment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementLaw {
    pub kind: LawKind,
    pub variance: f64,
    pub moment_order: f64,
    pub moment_bound: f64,
}

impl ElementLaw {
    pub fn new(kind: LawKind, variance: f64, moment_order: f64) -> Result<Self> {
        if !(variance >= 0.0) || !variance.is_finite() {
            return Err(Error::Config(format!("law variance must be finite and >= 0, got {variance}")));
        }
        if !(moment_order > 0.0) || !moment_order.is_finite() {
            return Err(Error::Config(format!("moment order must be positive, got {moment_order}")));
        }
        if let LawKind::TwoPointAsymmetric { q } = kind {
            if !(q > 0.0 && q < 1.0) {
                return Err(Error::Config(format!("two-point law needs 0 < q < 1, got {q}")));
            }
        }
        let law = Self { kind, variance, moment_order, moment_bound: 0.0 };
        Ok(Self { moment_bound: law.absolute_moment(moment_order), ..law })
    }

    /// Point mass at zero.
    pub fn zero() -> Self {
        Self { kind: LawKind::Bernoulli, variance: 0.0, moment_order: DEFAULT_MOMENT_ORDER, moment_bound: 0.0 }
    }

    /// `E|X|^p` in closed form.
    pub fn absolute_moment(&self, p: f64) -> f64 {
        let s = self.variance.sqrt();
        match self.kind {
            LawKind::Bernoulli => s.powf(p),
            LawKind::Uniform => (3f64.sqrt() * s).powf(p) / (p + 1.0),
            LawKind::Gaussian => s.powf(p) * 2f64.powf(p / 2.0) * libm::tgamma((p + 1.0) / 2.0) / PI.sqrt(),
            LawKind::TwoPointAsymmetric { q } => {
                let (hi, lo) = two_point_atoms(self.variance, q);
                q * hi.abs().powf(p) + (1.0 - q) * lo.abs().powf(p)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let s = self.variance.sqrt();
        match self.kind {
            LawKind::Bernoulli => {
                if rng.gen::<bool>() {
                    s
                } else {
                    -s
                }
            }
            LawKind::Uniform => (2.0 * rng.gen::<f64>() - 1.0) * 3f64.sqrt() * s,
            LawKind::Gaussian => s * rng.sample::<f64, _>(StandardNormal),
            LawKind::TwoPointAsymmetric { q } => {
                let (hi, lo) = two_point_atoms(self.variance, q);
                if rng.gen::<f64>() < q {
                    hi
                } else {
                    lo
                }
            }
        }
    }
}

fn two_point_atoms(variance: f64, q: f64) -> (f64, f64) {
    ((variance * (1.0 - q) / q).sqrt(), -(variance * q / (1.0 - q)).sqrt())
}

/// Entry laws of a Wigner matrix: one law per off-diagonal real or imaginary
/// component and one for the (real) diagonal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WignerSpec {
    pub off_diagonal: ElementLaw,
    pub diagonal: ElementLaw,
}

impl WignerSpec {
    /// The same law family on and off the diagonal with the standard variances.
    pub fn from_kind(kind: LawKind) -> Result<Self> {
        Ok(Self {
            off_diagonal: ElementLaw::new(kind, ENTRY_VARIANCE / 2.0, DEFAULT_MOMENT_ORDER)?,
            diagonal: ElementLaw::new(kind, ENTRY_VARIANCE, DEFAULT_MOMENT_ORDER)?,
        })
    }

    pub fn bernoulli() -> Self {
        Self::from_kind(LawKind::Bernoulli).expect("valid default law")
    }

    pub fn uniform() -> Self {
        Self::from_kind(LawKind::Uniform).expect("valid default law")
    }

    pub fn gaussian() -> Self {
        Self::from_kind(LawKind::Gaussian).expect("valid default law")
    }

    pub fn validate(&self) -> Result<()> {
        let off = 2.0 * self.off_diagonal.variance;
        if (off - ENTRY_VARIANCE).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "off-diagonal real and imaginary variances sum to {off}, expected {ENTRY_VARIANCE}"
            )));
        }
        if (self.diagonal.variance - ENTRY_VARIANCE).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "diagonal variance is {}, expected {ENTRY_VARIANCE}",
                self.diagonal.variance
            )));
        }
        for law in [&self.off_diagonal, &self.diagonal] {
            if !law.moment_bound.is_finite() {
                return Err(Error::Config("declared moment bound is not finite".into()));
            }
        }
        Ok(())
    }
}

/// Wigner matrix with entries drawn from `spec`, upper triangle in row-major
/// order (real part before imaginary part).
pub fn sample_wigner(spec: &WignerSpec, n: usize, seed: RngSeed) -> Result<HermitianMatrix> {
    if n == 0 {
        return Err(Error::Validation("matrix dimension must be at least 1".into()));
    }
    spec.validate()?;
    let mut rng = seed.rng();
    Ok(HermitianMatrix::from_upper(n, |j, k| {
        if j == k {
            Complex64::new(spec.diagonal.sample(&mut rng), 0.0)
        } else {
            let re = spec.off_diagonal.sample(&mut rng);
            let im = spec.off_diagonal.sample(&mut rng);
            Complex64::new(re, im)
        }
    }))
}

/// GUE matrix with density proportional to `exp(-Tr V^2 / 2)`: unit-variance
/// diagonal, off-diagonal real and imaginary parts of variance `1/2`.
pub fn sample_gue(n: usize, seed: RngSeed) -> Result<HermitianMatrix> {
    if n == 0 {
        return Err(Error::Validation("matrix dimension must be at least 1".into()));
    }
    let mut rng = seed.rng();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Ok(HermitianMatrix::from_upper(n, |j, k| {
        if j == k {
            Complex64::new(rng.sample(StandardNormal), 0.0)
        } else {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(h * re, h * im)
        }
    }))
}

/// `M = (W + aV)/sqrt(N)` with a fresh GUE matrix `V` drawn from `seed`.
/// `a = 0` gives `W/sqrt(N)` without drawing `V`.
pub fn assemble_deformed(w: &HermitianMatrix, a: f64, seed: RngSeed) -> Result<HermitianMatrix> {
    if !(a >= 0.0) || !a.is_finite() {
        return Err(Error::Domain(format!("GUE strength must be finite and >= 0, got {a}")));
    }
    let n = w.dim();
    let s = 1.0 / (n as f64).sqrt();
    if a == 0.0 {
        return Ok(w.scaled(s));
    }
    let v = sample_gue(n, seed)?;
    w.add_scaled(&v, a, s)
}

/// One Monte Carlo draw of the deformed matrix for trial `trial`.
pub fn sample_deformed(spec: &WignerSpec, a: f64, n: usize, master: u64, trial: u64) -> Result<HermitianMatrix> {
    use crate::rng::{ROLE_GUE, ROLE_WIGNER};
    let w = sample_wigner(spec, n, RngSeed::for_trial(master, trial, ROLE_WIGNER))?;
    assemble_deformed(&w, a, RngSeed::for_trial(master, trial, ROLE_GUE))
}

/// Variance and distribution comparison for one entry class.
#[derive(Clone, Debug, Serialize)]
pub struct ComponentCheck {
    pub expected_variance: f64,
    pub sample_variance: f64,
    pub variance_se: f64,
    pub ks_statistic: f64,
    pub ks_p_value: f64,
}

impl ComponentCheck {
    fn passed(&self, z: f64, alpha: f64) -> bool {
        (self.sample_variance - self.expected_variance).abs() <= z * self.variance_se && self.ks_p_value > alpha
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvolutionReport {
    pub a: f64,
    pub n: usize,
    pub trials: usize,
    pub diagonal: ComponentCheck,
    pub off_diagonal_re: ComponentCheck,
    pub off_diagonal_im: ComponentCheck,
    pub passed: bool,
}

/// Compares the entries of `W + aV` with direct draws from the convolved
/// laws `phi_a * P` (off-diagonal components) and `phi_{a sqrt 2} * P`
/// (diagonal): variances within 4 standard errors and a two-sample
/// Kolmogorov–Smirnov test at level `1e-3` for each entry class.
pub fn convolution_equivalence_check(
    spec: &WignerSpec,
    a: f64,
    n: usize,
    trials: usize,
    master: u64,
) -> Result<ConvolutionReport> {
    if trials < 1000 {
        return Err(Error::Validation(format!("need at least 1000 trials, got {trials}")));
    }
    spec.validate()?;
    if !(a >= 0.0) {
        return Err(Error::Domain(format!("GUE strength must be >= 0, got {a}")));
    }
    let (mut md, mut mre, mut mim) = (Vec::new(), Vec::new(), Vec::new());
    let (mut cd, mut cre, mut cim) = (Vec::new(), Vec::new(), Vec::new());
    let sq = (n as f64).sqrt();
    for t in 0..trials as u64 {
        let m = sample_deformed(spec, a, n, master, t)?;
        for j in 0..n {
            md.push(m.get(j, j).re * sq);
            for k in j + 1..n {
                let z = m.get(j, k) * sq;
                mre.push(z.re);
                mim.push(z.im);
            }
        }
        let mut rng = RngSeed::for_trial(master, t, crate::rng::ROLE_AUX).rng();
        for j in 0..n {
            let g: f64 = rng.sample(StandardNormal);
            cd.push(spec.diagonal.sample(&mut rng) + a * g);
            for _ in j + 1..n {
                for out in [&mut cre, &mut cim] {
                    let g: f64 = rng.sample(StandardNormal);
                    out.push(spec.off_diagonal.sample(&mut rng) + a * std::f64::consts::FRAC_1_SQRT_2 * g);
                }
            }
        }
    }
    let a2 = a * a;
    let check = |m: &mut Vec<f64>, c: &mut Vec<f64>, expected: f64| {
        let (v, se) = variance_se(m);
        let (d, p) = ks_two_sample(m, c);
        ComponentCheck { expected_variance: expected, sample_variance: v, variance_se: se, ks_statistic: d, ks_p_value: p }
    };
    let diagonal = check(&mut md, &mut cd, spec.diagonal.variance + a2);
    let off_re = check(&mut mre, &mut cre, spec.off_diagonal.variance + a2 / 2.0);
    let off_im = check(&mut mim, &mut cim, spec.off_diagonal.variance + a2 / 2.0);
    // Bonferroni over the three classes.
    let passed = [&diagonal, &off_re, &off_im].iter().all(|c| c.passed(4.0, 1e-3 / 3.0));
    Ok(ConvolutionReport {
        a,
        n,
        trials,
        diagonal,
        off_diagonal_re: off_re,
        off_diagonal_im: off_im,
        passed,
    })
}
