//! Eigenvalues of complex Hermitian matrices.
//!
//! Householder reduction to a real symmetric tridiagonal matrix followed by
//! implicit-shift QL, eigenvalues only. The reduction works on the lower
//! triangle held as separate real and imaginary planes so that the inner
//! loops are plain contiguous slices the compiler can vectorize.

use super::Spectrum;
use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;

/// QL sweeps allowed per eigenvalue before giving up.
pub const MAX_QL_SWEEPS: usize = 30;

/// Relative tolerance of the Hermitian input check.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Reusable scratch space; keep one per thread.
#[derive(Default)]
pub struct EigenWorkspace {
    re: Vec<f64>,
    im: Vec<f64>,
    vr: Vec<f64>,
    vi: Vec<f64>,
    pr: Vec<f64>,
    pi: Vec<f64>,
    wr: Vec<f64>,
    wi: Vec<f64>,
    qr: Vec<f64>,
    qi: Vec<f64>,
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl EigenWorkspace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn eigenvalues(&mut self, h: &HermitianMatrix) -> Result<Spectrum> {
        check_hermitian(h)?;
        let n = h.dim();
        if n == 0 {
            return Ok(Spectrum::from_unsorted(Vec::new()));
        }
        self.load(h);
        self.tridiagonalize(n);
        let mut d = std::mem::take(&mut self.diag);
        let mut e = std::mem::take(&mut self.off);
        let res = tridiagonal_ql(&mut d, &mut e);
        let out = d.clone();
        self.diag = d;
        self.off = e;
        res?;
        Ok(Spectrum::from_unsorted(out))
    }

    fn load(&mut self, h: &HermitianMatrix) {
        let n = h.dim();
        self.re.clear();
        self.im.clear();
        // Packed lower triangle, row i holding columns 0..=i.
        for i in 0..n {
            let row = &h.as_slice()[i * n..i * n + i + 1];
            self.re.extend(row.iter().map(|z| z.re));
            self.im.extend(row.iter().map(|z| z.im));
        }
        for v in [&mut self.vr, &mut self.vi, &mut self.pr, &mut self.pi, &mut self.wr, &mut self.wi] {
            v.clear();
            v.resize(n, 0.0);
        }
        self.diag.clear();
        self.diag.resize(n, 0.0);
        self.off.clear();
        self.off.resize(n, 0.0);
    }

    /// Householder sweeps. The rank-2 update of step `k` is deferred and
    /// applied row by row inside the mat-vec of step `k + 1`, so the trailing
    /// block is streamed through memory once per step.
    fn tridiagonalize(&mut self, n: usize) {
        let (re, im) = (&mut self.re, &mut self.im);
        // Pending update over rows/cols `pbase..n`, stored at offset 0 in w*/v*.
        let mut pending = false;
        let at = |i: usize, j: usize| i * (i + 1) / 2 + j;
        for k in 0..n.saturating_sub(1) {
            if pending {
                // Bring column k (rows k..n) up to date; pbase == k.
                let (vkr, vki, wkr, wki) = (self.vr[0], self.vi[0], self.wr[0], self.wi[0]);
                for t in 0..n - k {
                    let idx = at(k + t, k);
                    let (v_r, v_i, w_r, w_i) = (self.vr[t], self.vi[t], self.wr[t], self.wi[t]);
                    re[idx] -= v_r * wkr + v_i * wki + w_r * vkr + w_i * vki;
                    im[idx] -= v_i * wkr - v_r * wki + w_i * vkr - w_r * vki;
                }
                im[at(k, k)] = 0.0;
            }
            self.diag[k] = re[at(k, k)];
            let m = n - k - 1;
            let base = k + 1;
            let (xr, xi) = (&mut self.pr[..m], &mut self.pi[..m]);
            let mut tail = 0.0;
            for t in 0..m {
                let idx = at(base + t, k);
                xr[t] = re[idx];
                xi[t] = im[idx];
                if t > 0 {
                    tail += xr[t] * xr[t] + xi[t] * xi[t];
                }
            }
            let alpha_abs = xr[0].hypot(xi[0]);
            if tail == 0.0 {
                // Already tridiagonal in this column; a diagonal phase makes it real.
                self.off[k] = alpha_abs;
                if pending {
                    flush_pending(re, im, &self.vr[1..n - k], &self.vi[1..n - k], &self.wr[1..n - k], &self.wi[1..n - k], base);
                    pending = false;
                }
                continue;
            }
            let xnorm = (alpha_abs * alpha_abs + tail).sqrt();
            let (ph_r, ph_i) = if alpha_abs > 0.0 { (xr[0] / alpha_abs, xi[0] / alpha_abs) } else { (1.0, 0.0) };
            xr[0] += ph_r * xnorm;
            xi[0] += ph_i * xnorm;
            let beta = 1.0 / (xnorm * (xnorm + alpha_abs));
            self.off[k] = xnorm;

            // Old pending vectors restricted to the new block live at offset 1.
            let mut pr = std::mem::take(&mut self.pr);
            let mut pi = std::mem::take(&mut self.pi);
            let mut nvr = std::mem::take(&mut self.qr);
            let mut nvi = std::mem::take(&mut self.qi);
            nvr.resize(n, 0.0);
            nvi.resize(n, 0.0);
            nvr[..m].copy_from_slice(&pr[..m]);
            nvi[..m].copy_from_slice(&pi[..m]);
            pr[..m].fill(0.0);
            pi[..m].fill(0.0);
            let (ovr, ovi, owr, owi) = (&self.vr[1..], &self.vi[1..], &self.wr[1..], &self.wi[1..]);
            for t in 0..m {
                let row = at(base + t, base);
                let ar = &mut re[row..=row + t];
                let ai = &mut im[row..=row + t];
                if pending {
                    rank2_row_update(ar, ai, &ovr[..=t], &ovi[..=t], &owr[..=t], &owi[..=t]);
                    ai[t] = 0.0;
                }
                let (sr, si) = hermitian_row_pass(&ar[..t], &ai[..t], &nvr[..t], &nvi[..t], &mut pr[..t], &mut pi[..t], nvr[t], nvi[t]);
                let d = ar[t];
                pr[t] += sr + d * nvr[t];
                pi[t] += si + d * nvi[t];
            }
            let mut vhp = 0.0;
            for t in 0..m {
                pr[t] *= beta;
                pi[t] *= beta;
                vhp += nvr[t] * pr[t] + nvi[t] * pi[t];
            }
            let kk = 0.5 * beta * vhp;
            for t in 0..m {
                pr[t] -= kk * nvr[t];
                pi[t] -= kk * nvi[t];
            }
            // New pending update: v = nv, w = p, over rows base..n.
            self.wr[..m].copy_from_slice(&pr[..m]);
            self.wi[..m].copy_from_slice(&pi[..m]);
            self.vr[..m].copy_from_slice(&nvr[..m]);
            self.vi[..m].copy_from_slice(&nvi[..m]);
            self.pr = pr;
            self.pi = pi;
            self.qr = nvr;
            self.qi = nvi;
            pending = true;
        }
        if pending {
            let last = at(n - 1, n - 1);
            re[last] -= 2.0 * (self.vr[0] * self.wr[0] + self.vi[0] * self.wi[0]);
        }
        self.diag[n - 1] = re[at(n - 1, n - 1)];
        self.off[n - 1] = 0.0;
    }
}

/// Applies a deferred rank-2 update to the block starting at row/column `base`.
fn flush_pending(re: &mut [f64], im: &mut [f64], vr: &[f64], vi: &[f64], wr: &[f64], wi: &[f64], base: usize) {
    for t in 0..vr.len() {
        let i = base + t;
        let row = i * (i + 1) / 2 + base;
        rank2_row_update(&mut re[row..=row + t], &mut im[row..=row + t], &vr[..=t], &vi[..=t], &wr[..=t], &wi[..=t]);
        im[row + t] = 0.0;
    }
}

const LANES: usize = 8;

/// One row of the Hermitian mat-vec: returns `sum_j B_tj v_j` and adds
/// `conj(B_tj) v_t` into `p_j`.
#[inline(always)]
#[allow(clippy::too_many_arguments)]
fn hermitian_row_pass(
    ar: &[f64],
    ai: &[f64],
    vr: &[f64],
    vi: &[f64],
    pr: &mut [f64],
    pi: &mut [f64],
    vtr: f64,
    vti: f64,
) -> (f64, f64) {
    let n = ar.len();
    let body = n - n % LANES;
    let mut sr = [0.0; LANES];
    let mut si = [0.0; LANES];
    for ((((ar, ai), (vr, vi)), pr), pi) in ar[..body]
        .chunks_exact(LANES)
        .zip(ai[..body].chunks_exact(LANES))
        .zip(vr[..body].chunks_exact(LANES).zip(vi[..body].chunks_exact(LANES)))
        .zip(pr[..body].chunks_exact_mut(LANES))
        .zip(pi[..body].chunks_exact_mut(LANES))
    {
        for l in 0..LANES {
            sr[l] = ar[l].mul_add(vr[l], (-ai[l]).mul_add(vi[l], sr[l]));
            si[l] = ar[l].mul_add(vi[l], ai[l].mul_add(vr[l], si[l]));
            pr[l] = ar[l].mul_add(vtr, ai[l].mul_add(vti, pr[l]));
            pi[l] = ar[l].mul_add(vti, (-ai[l]).mul_add(vtr, pi[l]));
        }
    }
    let mut tr: f64 = sr.iter().sum();
    let mut ti: f64 = si.iter().sum();
    for j in body..n {
        let (a_r, a_i, v_r, v_i) = (ar[j], ai[j], vr[j], vi[j]);
        tr += a_r * v_r - a_i * v_i;
        ti += a_r * v_i + a_i * v_r;
        pr[j] += a_r * vtr + a_i * vti;
        pi[j] += a_r * vti - a_i * vtr;
    }
    (tr, ti)
}

/// `B_tj -= v_t conj(w_j) + w_t conj(v_j)` for one row of the lower triangle.
#[inline(always)]
fn rank2_row_update(br: &mut [f64], bi: &mut [f64], vr: &[f64], vi: &[f64], wr: &[f64], wi: &[f64]) {
    let n = br.len();
    let t = n - 1;
    let (vtr, vti, wtr, wti) = (vr[t], vi[t], wr[t], wi[t]);
    let body = n - n % LANES;
    for ((((br, bi), (vr, vi)), wr), wi) in br[..body]
        .chunks_exact_mut(LANES)
        .zip(bi[..body].chunks_exact_mut(LANES))
        .zip(vr[..body].chunks_exact(LANES).zip(vi[..body].chunks_exact(LANES)))
        .zip(wr[..body].chunks_exact(LANES))
        .zip(wi[..body].chunks_exact(LANES))
    {
        for l in 0..LANES {
            let re = vtr.mul_add(wr[l], vti.mul_add(wi[l], wtr.mul_add(vr[l], wti * vi[l])));
            let im = vti.mul_add(wr[l], (-vtr).mul_add(wi[l], wti.mul_add(vr[l], -wtr * vi[l])));
            br[l] -= re;
            bi[l] -= im;
        }
    }
    for j in body..n {
        br[j] -= vtr * wr[j] + vti * wi[j] + wtr * vr[j] + wti * vi[j];
        bi[j] -= vti * wr[j] - vtr * wi[j] + wti * vr[j] - wtr * vi[j];
    }
}

fn check_hermitian(h: &HermitianMatrix) -> Result<()> {
    let n = h.dim();
    let a = h.as_slice();
    let scale = h.max_abs().max(f64::MIN_POSITIVE);
    let tol2 = (HERMITIAN_TOL * scale).powi(2);
    for j in 0..n {
        if a[j * n + j].im.abs() > HERMITIAN_TOL * scale {
            return Err(Error::Validation(format!("diagonal entry {j} is not real")));
        }
        for k in 0..j {
            if (a[j * n + k] - a[k * n + j].conj()).norm_sqr() > tol2 {
                return Err(Error::Validation(format!("matrix is not Hermitian at ({k},{j})")));
            }
        }
    }
    Ok(())
}

/// `sqrt(a^2 + b^2)`, falling back to `hypot` only when squaring could over- or underflow.
#[inline(always)]
fn pythag(a: f64, b: f64) -> f64 {
    let s = a * a + b * b;
    if s.is_finite() && s > 1e-300 {
        s.sqrt()
    } else {
        a.hypot(b)
    }
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `d` and
/// off-diagonal `e[i] = T[i+1][i]` (`e[n-1]` is scratch). Overwrites `d` with
/// the unsorted eigenvalues.
pub fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            if sweeps == MAX_QL_SWEEPS {
                return Err(Error::Numerical(format!(
                    "implicit QL did not converge for eigenvalue {l} after {MAX_QL_SWEEPS} sweeps"
                )));
            }
            sweeps += 1;
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = pythag(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = pythag(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Convenience wrapper allocating a fresh workspace.
pub fn hermitian_eigenvalues(h: &HermitianMatrix) -> Result<Spectrum> {
    EigenWorkspace::new().eigenvalues(h)
}
