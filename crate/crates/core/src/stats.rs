//! Small statistics helpers for the Monte Carlo experiments.

/// Sample mean and standard error of the mean.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Unbiased sample variance with the standard error of that estimate,
/// `sqrt((m4 - s^4 (n-3)/(n-1)) / n)` using the fourth central moment.
pub fn variance_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    let se = ((m4 - var * var * (n - 3.0) / (n - 1.0)) / n).max(0.0).sqrt();
    (var, se)
}

/// Asymptotic Kolmogorov tail `P(sqrt(n) D > lambda)`.
pub fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov–Smirnov statistic and its asymptotic p-value.
/// The inputs are sorted in place.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> (f64, f64) {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let sq = ne.sqrt();
    // Stephens' small-sample correction.
    let p = kolmogorov_tail((sq + 0.12 + 0.11 / sq) * d);
    (d, p)
}

/// One-sample Kolmogorov–Smirnov distance against a continuous CDF.
/// The sample is sorted in place.
pub fn ks_one_sample(xs: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Equal-width histogram on `[lo, hi)` normalised as a density with respect
/// to `total` observations. Values outside the range are ignored.
#[derive(Clone, Debug)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Self {
        Self { lo, hi, counts: vec![0; bins] }
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.counts.len() as f64
    }

    pub fn add(&mut self, x: f64) {
        if x >= self.lo && x < self.hi {
            let last = self.counts.len() - 1;
            let b = ((x - self.lo) / self.width()) as usize;
            self.counts[b.min(last)] += 1;
        }
    }

    pub fn merge(&mut self, other: &Histogram) {
        for (c, o) in self.counts.iter_mut().zip(&other.counts) {
            *c += o;
        }
    }

    pub fn edges(&self, b: usize) -> (f64, f64) {
        let w = self.width();
        (self.lo + b as f64 * w, self.lo + (b + 1) as f64 * w)
    }

    pub fn densities(&self, total: u64) -> Vec<f64> {
        let norm = total as f64 * self.width();
        self.counts.iter().map(|&c| c as f64 / norm).collect()
    }
}
