//! The deformed-GUE kernel as a double contour integral.
//!
//! For a spectrum `y` of `H = W/sqrt(N)` the rescaled, conjugated kernel is
//!
//! ```text
//! K(tau) = N ∮_γ dz/2πi ∫_Γ dw/2πi h(z,w) g_N(z,w) exp(N f_N(w) - N f_N(z))
//! ```
//!
//! with `γ` a rectangle around the real axis (counterclockwise) and `Γ` the
//! vertical line `Re w = Re z_c` traversed upwards. Everything is evaluated in
//! the log domain; the `tau` dependence factorises through `exp(-c w)` and
//! `expm1(c z)/(c z)`, `c = tau/(a^2 rho)`, so a whole `tau` grid costs one
//! pass over the node pairs.

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::spectral::{log_potential_fn, saddle_data, SaddleData, Spectrum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;
use std::f64::consts::PI;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Below this `|z - w|` the difference quotient in `g_N` is replaced by `f_N''`
/// at the midpoint; below this `|c z|` `expm1(cz)/(cz)` uses its series.
pub const REMOVABLE_THRESHOLD: f64 = 1e-4;

/// Quadrature controls for the double integral.
#[derive(Clone, Debug, Serialize)]
pub struct QuadratureSettings {
    pub panel_nodes: usize,
    pub initial_panels: usize,
    /// Relative change between panel doublings at which refinement stops.
    pub rel_tol: f64,
    /// Largest change accepted when the node cap is reached.
    pub accept_tol: f64,
    /// Node cap per contour.
    pub max_nodes: usize,
    /// Required drop of the integrand's log-modulus at the truncation points
    /// (`ln 1e18`).
    pub tail_log_drop: f64,
    /// Largest `|tau|` the contours are sized for.
    pub tau_max: f64,
    /// Smallest height of the horizontal lines of `γ`.
    pub min_height: f64,
    /// Overrides `Re w` of `Γ`; defaults to `Re z_c`.
    pub big_gamma_re: Option<f64>,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            panel_nodes: 24,
            initial_panels: 4,
            rel_tol: 1e-8,
            accept_tol: 1e-5,
            max_nodes: 1 << 14,
            tail_log_drop: 18.0 * std::f64::consts::LN_10,
            tau_max: 4.0,
            min_height: 0.05,
            big_gamma_re: None,
        }
    }
}

/// Everything needed to evaluate the kernel at one bulk point.
#[derive(Clone, Debug)]
pub struct KernelContext {
    pub u: f64,
    pub a: f64,
    pub n: usize,
    pub y: Spectrum,
    pub saddle: SaddleData,
    pub settings: QuadratureSettings,
}

impl KernelContext {
    pub fn new(u: f64, a: f64, y: Spectrum, settings: QuadratureSettings) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::Domain(format!("kernel evaluation needs a > 0, got {a}")));
        }
        if y.is_empty() {
            return Err(Error::Validation("empty spectrum".into()));
        }
        let saddle = saddle_data(u, a)?;
        Ok(Self { u, a, n: y.len(), y, saddle, settings })
    }

    pub fn rho(&self) -> f64 {
        self.saddle.rho_u
    }

    /// `omega_0 / (N rho(u))`.
    pub fn omega(&self) -> f64 {
        self.saddle.omega0 / (self.n as f64 * self.rho())
    }

    /// Height of the horizontal lines of `γ`.
    pub fn gamma_height(&self) -> f64 {
        self.saddle.z_c_plus.im.abs().max(self.settings.min_height)
    }

    pub fn big_gamma_re(&self) -> f64 {
        self.settings.big_gamma_re.unwrap_or(self.saddle.z_c_plus.re)
    }

    /// `N f_N` and `f_N'` at `z`.
    fn potential(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let p = log_potential_fn(z, self.u, self.a, &self.y)?;
        Ok((self.n as f64 * p.value, p.d1))
    }

    fn log_modulus_z(&self, z: Complex64, c_max: f64) -> Result<f64> {
        Ok(-self.potential(z)?.0.re + c_max * (z.re - self.big_gamma_re()).abs())
    }

    fn log_modulus_w(&self, w: Complex64) -> Result<f64> {
        Ok(self.potential(w)?.0.re)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PathKind {
    /// Rectangle around the real axis: lines `Im z = ±height` closed by
    /// vertical sides at `Re z = center ± radius`.
    HorizontalPair,
    /// `Re w = offset`, `|Im w| <= radius`, upwards.
    VerticalLine,
}

/// Nodes and orientation-signed weights of a truncated contour.
#[derive(Clone, Debug, Serialize)]
pub struct ContourQuadrature {
    pub kind: PathKind,
    /// Height of the lines for `γ`, real part for `Γ`.
    pub offset: f64,
    /// Centre of `γ` on the real axis (equal to `offset` for `Γ`).
    pub center: f64,
    pub radius: f64,
    #[serde(skip)]
    pub nodes: Vec<Complex64>,
    #[serde(skip)]
    pub weights: Vec<Complex64>,
}

impl ContourQuadrature {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(Complex64) -> Complex64) -> Complex64 {
        self.nodes.iter().zip(&self.weights).map(|(&z, &w)| w * f(z)).sum()
    }

    /// Appends the straight segment from `p` to `q` split into `panels` panels.
    fn push_segment(&mut self, rule: &GaussLegendre, p: Complex64, q: Complex64, panels: usize) {
        let d = q - p;
        for k in 0..panels {
            let (s0, s1) = (k as f64 / panels as f64, (k + 1) as f64 / panels as f64);
            for (s, w) in rule.mapped(s0, s1) {
                self.nodes.push(p + d * s);
                self.weights.push(d * w);
            }
        }
    }
}

/// Truncation of both contours, found once per context.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ContourGeometry {
    pub center: f64,
    pub height: f64,
    pub radius_gamma: f64,
    pub radius_big_gamma: f64,
}

/// Finds truncation radii where the integrand's log-modulus has dropped by
/// `tail_log_drop` below its peak on the contour and the sides of `γ` lie
/// outside the spectrum.
pub fn contour_geometry(ctx: &KernelContext) -> Result<ContourGeometry> {
    let s = &ctx.settings;
    let x0 = ctx.big_gamma_re();
    let eta = ctx.gamma_height();
    let c_max = s.tau_max.abs() / (ctx.a * ctx.a * ctx.rho());
    let step = 0.1 * ctx.a / (ctx.n as f64).sqrt();
    let (ymin, ymax) = (ctx.y.values()[0], ctx.y.values()[ctx.n - 1]);
    let limit = 10_000;

    let mut peak = f64::NEG_INFINITY;
    for t in [-eta, eta] {
        peak = peak.max(ctx.log_modulus_z(Complex64::new(x0, t), c_max)?);
    }
    let side_ts = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let mut radius_gamma = None;
    for k in 1..=limit {
        let r = k as f64 * step;
        let mut ends = f64::NEG_INFINITY;
        for x in [x0 - r, x0 + r] {
            for t in [-eta, eta] {
                let v = ctx.log_modulus_z(Complex64::new(x, t), c_max)?;
                peak = peak.max(v);
                ends = ends.max(v);
            }
        }
        let outside = x0 - r < ymin - 2.0 * step && x0 + r > ymax + 2.0 * step;
        if outside && ends < peak - s.tail_log_drop {
            let mut sides = f64::NEG_INFINITY;
            for x in [x0 - r, x0 + r] {
                for f in side_ts {
                    sides = sides.max(ctx.log_modulus_z(Complex64::new(x, f * eta), c_max)?);
                }
            }
            if sides < peak - s.tail_log_drop {
                radius_gamma = Some(r);
                break;
            }
        }
    }

    let mut peak_w = ctx.log_modulus_w(Complex64::new(x0, eta))?;
    peak_w = peak_w.max(ctx.log_modulus_w(Complex64::new(x0, -eta))?);
    let mut radius_big_gamma = None;
    for k in 1..=limit {
        let t = eta + k as f64 * step;
        let mut ends = f64::NEG_INFINITY;
        for tt in [-t, t] {
            let v = ctx.log_modulus_w(Complex64::new(x0, tt))?;
            peak_w = peak_w.max(v);
            ends = ends.max(v);
        }
        if ends < peak_w - s.tail_log_drop {
            radius_big_gamma = Some(t);
            break;
        }
    }
    match (radius_gamma, radius_big_gamma) {
        (Some(radius_gamma), Some(radius_big_gamma)) => {
            Ok(ContourGeometry { center: x0, height: eta, radius_gamma, radius_big_gamma })
        }
        _ => Err(Error::Accuracy {
            message: "no truncation radius found for the contours".into(),
            diagnostics: json!({ "u": ctx.u, "a": ctx.a, "N": ctx.n, "step": step }),
        }),
    }
}

/// `γ` at `panels` panels per segment. Panel boundaries sit on the points
/// where `Γ` crosses the lines.
pub fn build_gamma_with(geom: &ContourGeometry, panel_nodes: usize, panels: usize) -> ContourQuadrature {
    let rule = GaussLegendre::new(panel_nodes);
    let (x0, eta, r) = (geom.center, geom.height, geom.radius_gamma);
    let mut c = ContourQuadrature {
        kind: PathKind::HorizontalPair,
        offset: eta,
        center: x0,
        radius: r,
        nodes: Vec::new(),
        weights: Vec::new(),
    };
    let pt = |x: f64, y: f64| Complex64::new(x, y);
    // counterclockwise: bottom left→right, right side up, top right→left, left side down
    c.push_segment(&rule, pt(x0 - r, -eta), pt(x0, -eta), panels);
    c.push_segment(&rule, pt(x0, -eta), pt(x0 + r, -eta), panels);
    c.push_segment(&rule, pt(x0 + r, -eta), pt(x0 + r, eta), panels);
    c.push_segment(&rule, pt(x0 + r, eta), pt(x0, eta), panels);
    c.push_segment(&rule, pt(x0, eta), pt(x0 - r, eta), panels);
    c.push_segment(&rule, pt(x0 - r, eta), pt(x0 - r, -eta), panels);
    c
}

/// `Γ` at `panels` panels per segment, split at the crossings with `γ`.
pub fn build_big_gamma_with(geom: &ContourGeometry, panel_nodes: usize, panels: usize) -> ContourQuadrature {
    let rule = GaussLegendre::new(panel_nodes);
    let (x0, eta, t) = (geom.center, geom.height, geom.radius_big_gamma);
    let mut c = ContourQuadrature {
        kind: PathKind::VerticalLine,
        offset: x0,
        center: x0,
        radius: t,
        nodes: Vec::new(),
        weights: Vec::new(),
    };
    let pt = |y: f64| Complex64::new(x0, y);
    c.push_segment(&rule, pt(-t), pt(-eta), panels);
    c.push_segment(&rule, pt(-eta), pt(eta), panels);
    c.push_segment(&rule, pt(eta), pt(t), panels);
    c
}

/// `γ` with the context's initial panel count.
pub fn build_gamma(ctx: &KernelContext) -> Result<ContourQuadrature> {
    let g = contour_geometry(ctx)?;
    Ok(build_gamma_with(&g, ctx.settings.panel_nodes, ctx.settings.initial_panels))
}

/// `Γ` with the context's initial panel count.
pub fn build_big_gamma(ctx: &KernelContext) -> Result<ContourQuadrature> {
    let g = contour_geometry(ctx)?;
    Ok(build_big_gamma_with(&g, ctx.settings.panel_nodes, ctx.settings.initial_panels))
}

/// `expm1` for complex arguments without cancellation in the real part.
pub fn cexpm1(z: Complex64) -> Complex64 {
    let s = (0.5 * z.im).sin();
    Complex64::new(z.re.exp_m1() * z.im.cos() - 2.0 * s * s, z.re.exp() * z.im.sin())
}

/// `(e^x - 1)/x`, equal to 1 at 0.
pub fn phi1(x: Complex64) -> Complex64 {
    if x.norm() < REMOVABLE_THRESHOLD {
        Complex64::new(1.0, 0.0) + x * (0.5 + x * (1.0 / 6.0 + x / 24.0))
    } else {
        cexpm1(x) / x
    }
}

fn f_second(ctx: &KernelContext, z: Complex64) -> Complex64 {
    let s: Complex64 = ctx.y.values().iter().map(|&y| (z - y).powi(-2)).sum();
    Complex64::new(1.0 / (ctx.a * ctx.a), 0.0) - s / ctx.n as f64
}

/// `(f'(z) - f'(w))/(z - w)` with the confluent limit.
fn divided_difference(ctx: &KernelContext, z: Complex64, w: Complex64, dz: Complex64, dw: Complex64) -> Complex64 {
    let d = z - w;
    if d.norm() < REMOVABLE_THRESHOLD {
        f_second(ctx, 0.5 * (z + w))
    } else {
        (dz - dw) / d
    }
}

/// `h(z, w)` and `g_N(z, w)` at `tau`.
///
/// `h = (e^{omega0 tau}/tau)(e^{-c w} - e^{-c(w - z)})`, `c = tau/(a^2 rho)`,
/// evaluated as `-e^{omega0 tau} e^{-c w} (z/(a^2 rho)) expm1(cz)/(cz)`.
/// `g_N = f_N'(w)/z + (f_N'(z) - f_N'(w))/(z - w) - tau/(N rho a^2 z)`, which
/// is the explicit sum form with `v = u + tau/(N rho)`.
pub fn eval_h_gn(z: Complex64, w: Complex64, tau: f64, ctx: &KernelContext) -> Result<(Complex64, Complex64)> {
    let (a2, rho) = (ctx.a * ctx.a, ctx.rho());
    let c = tau / (a2 * rho);
    let h = -(ctx.saddle.omega0 * tau).exp() * (-c * w).exp() * (z / (a2 * rho)) * phi1(c * z);
    let dz = log_potential_fn(z, ctx.u, ctx.a, &ctx.y)?.d1;
    let dw = log_potential_fn(w, ctx.u, ctx.a, &ctx.y)?.d1;
    let delta = tau / (ctx.n as f64 * rho);
    let g = dw / z + divided_difference(ctx, z, w, dz, dw) - delta / (a2 * z);
    Ok((h, g))
}

/// Node data of one contour: potentials and stabilised exponentials.
struct NodeData {
    nodes: Vec<Complex64>,
    /// weight * exp(±N f - shift)
    scaled: Vec<Complex64>,
    d1: Vec<Complex64>,
    shift: f64,
}

fn node_data(ctx: &KernelContext, c: &ContourQuadrature, sign: f64) -> Result<NodeData> {
    let mut nf = Vec::with_capacity(c.len());
    let mut d1 = Vec::with_capacity(c.len());
    for &z in &c.nodes {
        let (v, d) = ctx.potential(z)?;
        nf.push(sign * v);
        d1.push(d);
    }
    let shift = nf.iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max);
    let scaled = nf.iter().zip(&c.weights).map(|(v, &w)| w * (v - shift).exp()).collect();
    Ok(NodeData { nodes: c.nodes.clone(), scaled, d1, shift })
}

/// Complex kernel values at the given panel count (no refinement).
pub fn deformed_kernel_at(taus: &[f64], ctx: &KernelContext, geom: &ContourGeometry, panels: usize) -> Result<Vec<Complex64>> {
    let gz = build_gamma_with(geom, ctx.settings.panel_nodes, panels);
    let gw = build_big_gamma_with(geom, ctx.settings.panel_nodes, panels);
    let zd = node_data(ctx, &gz, -1.0)?;
    let wd = node_data(ctx, &gw, 1.0)?;
    let (a2, rho, nf) = (ctx.a * ctx.a, ctx.rho(), ctx.n as f64);
    let two_pi_i_sq = (2.0 * PI * I).powi(2);
    let nw = wd.nodes.len();

    // beta[t][w] = scaled_w e^{-c_t w}
    let cs: Vec<f64> = taus.iter().map(|t| t / (a2 * rho)).collect();
    let beta: Vec<Vec<Complex64>> = cs
        .iter()
        .map(|&c| wd.nodes.iter().zip(&wd.scaled).map(|(&w, &b)| b * (-c * w).exp()).collect())
        .collect();
    let s0: Vec<Complex64> = beta.iter().map(|b| b.iter().sum()).collect();
    let s1: Vec<Complex64> = beta.iter().map(|b| b.iter().zip(&wd.d1).map(|(x, d)| x * d).sum()).collect();

    let mut acc = vec![Complex64::new(0.0, 0.0); taus.len()];
    let mut drow = vec![Complex64::new(0.0, 0.0); nw];
    for (iz, &z) in zd.nodes.iter().enumerate() {
        let dz = zd.d1[iz];
        for (j, d) in drow.iter_mut().enumerate() {
            *d = divided_difference(ctx, z, wd.nodes[j], dz, wd.d1[j]);
        }
        for (it, b) in beta.iter().enumerate() {
            let t: Complex64 = drow.iter().zip(b).map(|(d, x)| d * x).sum();
            let delta = taus[it] / (nf * rho);
            let bracket = s1[it] - delta / a2 * s0[it] + z * t;
            acc[it] += zd.scaled[iz] * phi1(cs[it] * z) * bracket;
        }
    }
    let scale = (zd.shift + wd.shift).exp();
    Ok(taus
        .iter()
        .zip(acc)
        .map(|(&tau, s)| -nf * (ctx.saddle.omega0 * tau).exp() / (a2 * rho) * scale * s / two_pi_i_sq)
        .collect())
}

/// Result of a refined kernel evaluation over a `tau` grid.
#[derive(Clone, Debug, Serialize)]
pub struct KernelScan {
    pub taus: Vec<f64>,
    pub values: Vec<f64>,
    pub imag: Vec<f64>,
    pub panels: usize,
    pub nodes_gamma: usize,
    pub nodes_big_gamma: usize,
    /// Largest change in the last panel doubling, relative to `max(1, |K|)`.
    pub self_convergence: f64,
    pub geometry: ContourGeometry,
}

/// Kernel values on a `tau` grid with panel doubling until the relative
/// change drops below `rel_tol` or the node cap is reached.
pub fn deformed_kernel_scan(taus: &[f64], ctx: &KernelContext) -> Result<KernelScan> {
    let s = &ctx.settings;
    let tau_max = taus.iter().fold(s.tau_max, |m, t| m.max(t.abs()));
    let sized;
    let ctx = if tau_max > s.tau_max {
        let mut c = ctx.clone();
        c.settings.tau_max = tau_max;
        sized = c;
        &sized
    } else {
        ctx
    };
    let s = &ctx.settings;
    let geom = contour_geometry(ctx)?;
    let mut panels = s.initial_panels.max(1);
    let mut max_panels = panels;
    while 6 * 2 * max_panels * s.panel_nodes <= s.max_nodes {
        max_panels *= 2;
    }
    let mut prev = deformed_kernel_at(taus, ctx, &geom, panels)?;
    let mut change = f64::INFINITY;
    while 2 * panels <= max_panels {
        let next = deformed_kernel_at(taus, ctx, &geom, 2 * panels)?;
        change = relative_change(&prev, &next);
        prev = next;
        panels *= 2;
        if change < s.rel_tol {
            break;
        }
    }
    if change <= s.accept_tol {
        finish(taus, ctx, geom, panels, prev, change)
    } else {
        Err(accuracy_error(ctx, &geom, panels, change, "node-doubling change above tolerance"))
    }
}

fn relative_change(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm() / y.norm().max(1.0)).fold(0.0, f64::max)
}

fn accuracy_error(ctx: &KernelContext, geom: &ContourGeometry, panels: usize, change: f64, msg: &str) -> Error {
    Error::Accuracy {
        message: msg.into(),
        diagnostics: json!({
            "u": ctx.u, "a": ctx.a, "N": ctx.n,
            "panels": panels, "change": change,
            "geometry": geom, "settings": ctx.settings,
        }),
    }
}

fn finish(
    taus: &[f64],
    ctx: &KernelContext,
    geom: ContourGeometry,
    panels: usize,
    vals: Vec<Complex64>,
    change: f64,
) -> Result<KernelScan> {
    let worst = vals.iter().map(|v| v.im.abs() / v.re.abs().max(1.0)).fold(0.0, f64::max);
    if worst > 1e-6 {
        return Err(accuracy_error(ctx, &geom, panels, change, &format!("imaginary residual {worst:e} above 1e-6")));
    }
    let s = &ctx.settings;
    Ok(KernelScan {
        taus: taus.to_vec(),
        values: vals.iter().map(|v| v.re).collect(),
        imag: vals.iter().map(|v| v.im).collect(),
        panels,
        nodes_gamma: 6 * panels * s.panel_nodes,
        nodes_big_gamma: 3 * panels * s.panel_nodes,
        self_convergence: change,
        geometry: geom,
    })
}

/// `(1/(N rho)) K_N(u, u + tau/(N rho); y)` including the `e^{omega0 tau}` conjugation.
pub fn deformed_kernel(tau: f64, ctx: &KernelContext) -> Result<f64> {
    Ok(deformed_kernel_scan(&[tau], ctx)?.values[0])
}
