//! One function per subcommand. Each resolves its parameters, computes,
//! and hands tables and figures to [`Artifacts`].

use crate::artifacts::{num, Artifacts};
use crate::plot::PlotSpec;
use crate::CliError;
use rayon::prelude::*;
use rmtlab::config::{parse_f64_list, parse_params, parse_usize_list, ExperimentConfig};
use rmtlab::ensembles::{sample_deformed, sample_gue, sample_wigner, LawKind, WignerSpec};
use rmtlab::fredholm::{SineGap, MAX_NYSTROM_NODES};
use rmtlab::io;
use rmtlab::kernel::{deformed_kernel_scan, fredholm_ratio_check, sine_kernel, BiorthogonalSystem, KernelContext, QuadratureSettings, RealFn};
use rmtlab::paths::{dyson_evolve, km_conditional_density, km_limit_density_qs, PairMarginals, PathConfig};
use rmtlab::quadrature::GaussLegendre;
use rmtlab::rng::{RngSeed, ROLE_AUX, ROLE_WIGNER};
use rmtlab::spacing::{mc_expected_spacing, SpacingEnsemble, SpacingRun};
use rmtlab::spectral::{hermitian_eigenvalues, semicircle_edge, semicircle_rho, Spectrum};
use rmtlab::stats::{ks_one_sample, Histogram};
use rmtlab::{HermitianMatrix, Result as LabResult};
use serde_json::{json, Map, Value};
use std::path::Path;

/// Ensemble parameters shared by several commands, after merging the
/// command line over the config file.
pub struct Ensemble {
    pub law: LawKind,
    pub params: String,
    pub spec: WignerSpec,
    pub a: f64,
    pub n_ladder: Vec<usize>,
    pub seed: u64,
    pub trials: usize,
}

#[derive(Default)]
pub struct EnsembleFlags {
    pub law: Option<String>,
    pub params: Option<String>,
    pub a: Option<f64>,
    pub n: Option<String>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
}

impl EnsembleFlags {
    pub fn resolve(&self, cfg: &ExperimentConfig) -> Result<Ensemble, CliError> {
        let params = self.params.clone().unwrap_or_default();
        let law = match &self.law {
            Some(kind) => LawKind::parse(kind, &parse_params(&params)?)?,
            None => cfg.law,
        };
        let spec = WignerSpec::from_kind(law).map_err(|e| CliError::Usage(e.to_string()))?;
        let n_ladder = match &self.n {
            Some(s) => parse_usize_list("N", s)?,
            None => cfg.n_ladder.clone(),
        };
        if n_ladder.is_empty() || n_ladder.contains(&0) {
            return Err(CliError::Usage("N must list positive sizes".into()));
        }
        let a = self.a.unwrap_or(cfg.a);
        if !(a >= 0.0) || !a.is_finite() {
            return Err(CliError::Usage(format!("a must be finite and >= 0, got {a}")));
        }
        let params = match law {
            LawKind::TwoPointAsymmetric { q } => format!("q={q}"),
            _ => String::new(),
        };
        Ok(Ensemble {
            law,
            params,
            spec,
            a,
            n_ladder,
            seed: self.seed.unwrap_or(cfg.seed),
            trials: self.trials.unwrap_or(cfg.trials),
        })
    }
}

impl Ensemble {
    fn law_params(&self) -> Vec<(&'static str, Value)> {
        vec![("law", json!(self.law.name())), ("params", json!(self.params)), ("a", json!(self.a))]
    }
}

/// Parameter object whose keys are flag names, so the run can be replayed
/// from the summary alone.
fn params(pairs: Vec<(&str, Value)>) -> Value {
    let mut m = Map::new();
    for (k, v) in pairs {
        m.insert(k.to_string(), v);
    }
    Value::Object(m)
}

fn list<T: ToString>(v: &[T]) -> Value {
    json!(v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
}

/// Turns a parameter object back into command-line arguments.
pub fn argv_from_params(command: &str, p: &Value) -> Vec<String> {
    let mut argv = vec![command.to_string()];
    if let Value::Object(m) = p {
        for (k, v) in m {
            match v {
                Value::Bool(true) => argv.push(format!("--{k}")),
                Value::Bool(false) | Value::Null => {}
                Value::String(s) => argv.push(format!("--{k}={s}")),
                other => argv.push(format!("--{k}={other}")),
            }
        }
    }
    argv
}

fn start(out: &Path, command: &str, p: Value, seed: Option<u64>) -> Result<Artifacts, CliError> {
    let argv = argv_from_params(command, &p);
    Ok(Artifacts::new(out, command, argv, p, seed)?)
}

fn spectra<F>(trials: usize, f: F) -> LabResult<Vec<Spectrum>>
where
    F: Fn(u64) -> LabResult<HermitianMatrix> + Sync,
{
    (0..trials as u64).into_par_iter().map(|t| hermitian_eigenvalues(&f(t)?)).collect()
}

// ---------------------------------------------------------------- sample

pub struct SampleArgs {
    pub ens: Ensemble,
    pub trial: u64,
    pub format: String,
    pub spectrum: bool,
}

pub fn sample(out: &Path, a: SampleArgs) -> Result<Value, CliError> {
    let n = a.ens.n_ladder[0];
    if !["bin", "csv", "both"].contains(&a.format.as_str()) {
        return Err(CliError::Usage(format!("format must be bin, csv or both, got '{}'", a.format)));
    }
    if a.format != "bin" && n > io::MAX_CSV_DIM {
        return Err(CliError::Usage(format!("CSV export is limited to N <= {}", io::MAX_CSV_DIM)));
    }
    let mut p = a.ens.law_params();
    p.extend([("N", json!(n.to_string())), ("seed", json!(a.ens.seed)), ("trial", json!(a.trial))]);
    p.extend([("format", json!(a.format)), ("spectrum", json!(a.spectrum))]);
    let mut art = start(out, "sample", params(p), Some(a.ens.seed))?;
    let m = sample_deformed(&a.ens.spec, a.ens.a, n, a.ens.seed, a.trial)?;
    if a.format != "csv" {
        let mut buf = Vec::new();
        io::write_matrix_binary(&m, &mut buf)?;
        art.bytes("sample-matrix.bin", &buf)?;
    }
    if a.format != "bin" {
        let mut buf = Vec::new();
        io::write_matrix_csv(&m, &mut buf)?;
        art.bytes("sample-matrix.csv", &buf)?;
    }
    let mut metrics = json!({ "N": n, "trace": m.trace(), "trace_of_square": m.trace_of_square() });
    if a.spectrum {
        let x = hermitian_eigenvalues(&m)?;
        let mut buf = Vec::new();
        io::write_spectrum_binary(&x, &mut buf)?;
        art.bytes("sample-spectrum.bin", &buf)?;
        let mut buf = Vec::new();
        io::write_spectrum_csv(&x, &mut buf)?;
        art.bytes("sample-spectrum.csv", &buf)?;
        metrics["min_eigenvalue"] = json!(x.values()[0]);
        metrics["max_eigenvalue"] = json!(x.values()[n - 1]);
    }
    Ok(art.finish(metrics)?)
}

// -------------------------------------------------------------- spectrum

pub fn spectrum(out: &Path, ens: Ensemble, bins: usize) -> Result<Value, CliError> {
    if bins == 0 {
        return Err(CliError::Usage("bins must be positive".into()));
    }
    let mut p = ens.law_params();
    p.extend([("N", list(&ens.n_ladder)), ("trials", json!(ens.trials)), ("seed", json!(ens.seed)), ("bins", json!(bins))]);
    let mut art = start(out, "spectrum", params(p), Some(ens.seed))?;
    let edge = semicircle_edge(ens.a);
    let gl = GaussLegendre::new(16);
    let mut rows = Vec::new();
    let mut sups = Vec::new();
    for &n in &ens.n_ladder {
        let xs = spectra(ens.trials, |t| sample_deformed(&ens.spec, ens.a, n, ens.seed, t))?;
        let mut h = Histogram::new(-edge, edge, bins);
        for x in &xs {
            for &v in x.values() {
                h.add(v);
            }
        }
        let dens = h.densities((n * ens.trials) as u64);
        let mut sup = 0.0f64;
        for (b, d) in dens.iter().enumerate() {
            let (lo, hi) = h.edges(b);
            let rho = gl.integrate(lo, hi, |u| semicircle_rho(u, ens.a)) / (hi - lo);
            sup = sup.max((d - rho).abs());
            rows.push(vec![n.to_string(), num(lo), num(hi), num(0.5 * (lo + hi)), num(*d), num(rho), num((d - rho).abs())]);
        }
        sups.push(json!({ "N": n, "sup_abs_error": sup }));
    }
    let header = ["N", "bin_lo", "bin_hi", "center", "empirical", "semicircle", "abs_error"];
    let text = art.csv("spectrum", &header, &rows)?;
    let last = ens.n_ladder.last().unwrap().to_string();
    let spec = PlotSpec::new(&format!("eigenvalue density, N = {last}"), "center").points("empirical").line("semicircle").only("N", &last);
    art.plot("spectrum", &text, spec)?;
    Ok(art.finish(json!({ "per_N": sups }))?)
}

// ----------------------------------------------------------- kernel-scan

pub struct KernelScanArgs {
    pub ens: Ensemble,
    pub u: f64,
    pub spectra: usize,
    pub tau_max: f64,
    pub tau_step: f64,
}

pub fn kernel_scan(out: &Path, k: KernelScanArgs) -> Result<Value, CliError> {
    if !(k.tau_step > 0.0) || !(k.tau_max > 0.0) || k.spectra == 0 {
        return Err(CliError::Usage("need tau-step > 0, tau-max > 0 and spectra >= 1".into()));
    }
    if !(k.ens.a > 0.0) {
        return Err(CliError::Usage("kernel evaluation needs a > 0".into()));
    }
    let ens = &k.ens;
    let mut p = ens.law_params();
    p.extend([("N", list(&ens.n_ladder)), ("u", json!(k.u)), ("seed", json!(ens.seed)), ("spectra", json!(k.spectra))]);
    p.extend([("tau-max", json!(k.tau_max)), ("tau-step", json!(k.tau_step))]);
    let mut art = start(out, "kernel-scan", params(p), Some(ens.seed))?;
    let steps = (k.tau_max / k.tau_step).round() as i64;
    let taus: Vec<f64> = (-steps..=steps).map(|i| i as f64 * k.tau_step).collect();
    let mut rows = Vec::new();
    let mut per_n = Vec::new();
    for &n in &ens.n_ladder {
        let scans = (0..k.spectra as u64)
            .into_par_iter()
            .map(|t| {
                let w = sample_wigner(&ens.spec, n, RngSeed::for_trial(ens.seed, t, ROLE_WIGNER))?;
                let y = hermitian_eigenvalues(&w.scaled(1.0 / (n as f64).sqrt()))?;
                let ctx = KernelContext::new(k.u, ens.a, y, QuadratureSettings::default())?;
                deformed_kernel_scan(&taus, &ctx)
            })
            .collect::<LabResult<Vec<_>>>()?;
        let mean: Vec<f64> = (0..taus.len()).map(|i| scans.iter().map(|s| s.values[i]).sum::<f64>() / scans.len() as f64).collect();
        let sup_each: Vec<f64> = scans
            .iter()
            .map(|s| s.values.iter().zip(&taus).map(|(v, &t)| (v - sine_kernel(t)).abs()).fold(0.0, f64::max))
            .collect();
        let mut sup_mean = 0.0f64;
        for (i, &t) in taus.iter().enumerate() {
            let sk = sine_kernel(t);
            let err = (mean[i] - sk).abs();
            sup_mean = sup_mean.max(err);
            rows.push(vec![num(t), num(mean[i]), num(sk), num(err), n.to_string(), num(ens.a), num(k.u), ens.seed.to_string()]);
        }
        per_n.push(json!({
            "N": n,
            "sup_error_of_mean": sup_mean,
            "mean_sup_error": sup_each.iter().sum::<f64>() / sup_each.len() as f64,
            "max_self_convergence": scans.iter().map(|s| s.self_convergence).fold(0.0, f64::max),
            "max_panels": scans.iter().map(|s| s.panels).max(),
        }));
    }
    let header = ["tau", "kernel_value", "sine_value", "abs_error", "N", "a", "u", "seed"];
    let text = art.csv("kernel-scan", &header, &rows)?;
    let last = ens.n_ladder.last().unwrap().to_string();
    let spec = PlotSpec::new(&format!("kernel at u = {}, N = {last}", k.u), "tau").points("kernel_value").line("sine_value").only("N", &last);
    art.plot("kernel-scan", &text, spec)?;
    Ok(art.finish(json!({ "per_N": per_n }))?)
}

// ------------------------------------------------------------ spacing-mc

pub struct SpacingArgs {
    pub ens: Ensemble,
    pub s_grid: Vec<f64>,
    pub u: f64,
    pub t_n: Option<String>,
    pub control: bool,
}

fn window_scales(spec: &Option<String>, n: usize) -> Result<Vec<Option<f64>>, CliError> {
    match spec.as_deref() {
        None => Ok(vec![None]),
        Some("sweep") => Ok([1.0 / 3.0, 0.5, 2.0 / 3.0].iter().map(|e| Some((n as f64).powf(*e))).collect()),
        Some(s) => Ok(parse_f64_list("tN", s)?.into_iter().map(Some).collect()),
    }
}

pub fn spacing_mc(out: &Path, s: SpacingArgs) -> Result<Value, CliError> {
    let ens = &s.ens;
    let mut p = ens.law_params();
    p.extend([("N", list(&ens.n_ladder)), ("trials", json!(ens.trials)), ("s-grid", list(&s.s_grid)), ("u", json!(s.u))]);
    p.extend([("tN", json!(s.t_n)), ("seed", json!(ens.seed)), ("control", json!(s.control))]);
    let mut art = start(out, "spacing-mc", params(p), Some(ens.seed))?;
    let ensemble = if s.control { SpacingEnsemble::GueControl } else { SpacingEnsemble::Deformed { spec: ens.spec, a: ens.a } };
    let mut rows = Vec::new();
    let mut per = Vec::new();
    for &n in &ens.n_ladder {
        for t_n in window_scales(&s.t_n, n)? {
            let run = SpacingRun { ensemble: ensemble.clone(), n, trials: ens.trials, s_grid: s.s_grid.clone(), u: s.u, t_n, seed: ens.seed };
            let rep = mc_expected_spacing(&run)?;
            let mut worst = 0.0f64;
            for e in &rep.estimates {
                worst = worst.max(e.gap().abs());
                rows.push(vec![num(e.s), num(e.mean), num(e.se), num(e.limit), num(e.gap()), num(rep.t_n), n.to_string()]);
            }
            per.push(json!({ "N": n, "t_N": rep.t_n, "rho": rep.rho, "max_abs_gap": worst }));
        }
    }
    let text = art.csv("spacing-mc", &["s", "mc_mean", "mc_se", "gaudin_cdf", "gap", "t_n", "N"], &rows)?;
    let first = &rows[0];
    let spec = PlotSpec::new("spacing CDF", "s").points("mc_mean").line("gaudin_cdf").only("t_n", &first[5]);
    art.plot("spacing-mc", &text, spec)?;
    Ok(art.finish(json!({ "runs": per }))?)
}

// -------------------------------------------------------------- fredholm

pub fn fredholm(out: &Path, nodes: usize, smax: f64, step: f64) -> Result<Value, CliError> {
    if !(step > 0.0) || !(smax > 0.0) || smax > 20.0 {
        return Err(CliError::Usage("need step > 0 and 0 < smax <= 20".into()));
    }
    if !(4..=MAX_NYSTROM_NODES).contains(&nodes) {
        return Err(CliError::Usage(format!("nodes must be in 4..={MAX_NYSTROM_NODES}")));
    }
    let p = params(vec![("nodes", json!(nodes)), ("smax", json!(smax)), ("step", json!(step))]);
    let mut art = start(out, "fredholm", p, None)?;
    let gap = SineGap::new(nodes)?;
    let count = (smax / step + 1e-9).floor() as usize;
    let mut rows = Vec::new();
    let (mut sp, mut mass, mut mean) = (Vec::new(), 0.0, 0.0);
    for i in 0..=count {
        let s = i as f64 * step;
        let (h, dh, pd, cdf) = (gap.h(s)?, gap.derivative(s)?, gap.density(s)?, gap.cdf(s)?);
        rows.push(vec![num(s), num(h), num(dh), num(pd), num(cdf)]);
        sp.push((s, pd));
    }
    for w in sp.windows(2) {
        let d = w[1].0 - w[0].0;
        mass += 0.5 * d * (w[0].1 + w[1].1);
        mean += 0.5 * d * (w[0].0 * w[0].1 + w[1].0 * w[1].1);
    }
    let text = art.csv("fredholm", &["s", "H", "Hprime", "p", "cdf"], &rows)?;
    art.plot("fredholm", &text, PlotSpec::new("sine-process gap probability", "s").line("H").line("p").line("cdf"))?;
    Ok(art.finish(json!({ "trapezoid_mass": mass, "trapezoid_mean": mean, "cdf_at_smax": rows.last().unwrap()[4] }))?)
}

// -------------------------------------------------------------- km-check

pub struct KmArgs {
    pub n: usize,
    pub s: f64,
    pub t_grid: Vec<f64>,
    pub y: Vec<f64>,
    pub grid: usize,
    pub seed: u64,
}

pub fn km_check(out: &Path, k: KmArgs) -> Result<Value, CliError> {
    if k.y.len() != k.n {
        return Err(CliError::Usage(format!("--y has {} points but N = {}", k.y.len(), k.n)));
    }
    let p = params(vec![
        ("N", json!(k.n.to_string())),
        ("S", json!(k.s)),
        ("T-grid", list(&k.t_grid)),
        ("y", list(&k.y)),
        ("grid", json!(k.grid)),
        ("seed", json!(k.seed)),
    ]);
    let mut art = start(out, "km-check", p, Some(k.seed))?;
    // ordered evaluation points: a full grid for N = 2, random draws otherwise
    let lo = k.y[0] - 2.0;
    let hi = k.y[k.n - 1] + 2.0;
    let mut points: Vec<Vec<f64>> = Vec::new();
    if k.n == 2 {
        for i in 0..k.grid {
            for j in 0..k.grid {
                let f = |m: usize| lo + (hi - lo) * m as f64 / (k.grid - 1).max(1) as f64;
                let (a, b) = (f(i), f(j));
                points.push(if a <= b { vec![a, b] } else { vec![b, a] });
            }
        }
    } else {
        use rand::Rng;
        let mut rng = RngSeed::new(k.seed, 0).rng();
        for _ in 0..k.grid * k.grid {
            let mut x: Vec<f64> = (0..k.n).map(|_| rng.gen_range(lo..hi)).collect();
            x.sort_by(f64::total_cmp);
            points.push(x);
        }
    }
    let limit: Vec<f64> = points.iter().map(|x| km_limit_density_qs(x, &k.y, k.s)).collect::<LabResult<_>>()?;
    let mut rows = Vec::new();
    let mut gaps = Vec::new();
    for &t in &k.t_grid {
        let cfg = PathConfig::new(k.y.clone(), k.s, t)?;
        let mut sup = 0.0f64;
        for (x, l) in points.iter().zip(&limit) {
            sup = sup.max((km_conditional_density(x, &cfg)? - l).abs());
        }
        gaps.push(sup);
        rows.push(vec![num(t), num(sup)]);
    }
    let monotone = gaps.windows(2).all(|w| w[1] <= w[0]);
    let text = art.csv("km-check", &["T", "sup_pointwise_gap"], &rows)?;
    art.plot("km-check", &text, PlotSpec::new("conditional vs limit density", "T").line("sup_pointwise_gap").log_log())?;
    Ok(art.finish(json!({ "monotone": monotone, "final_gap": gaps.last(), "points": points.len() }))?)
}

// --------------------------------------------------- pair marginals (N=2)

fn marginal_rows(marg: &PairMarginals, lo: &mut [f64], hi: &mut [f64]) -> (Vec<Vec<String>>, f64, f64) {
    let d_lo = ks_one_sample(lo, |x| marg.cdf_low_at(x));
    let d_hi = ks_one_sample(hi, |x| marg.cdf_high_at(x));
    let ecdf = |v: &[f64], x: f64| v.partition_point(|&s| s <= x) as f64 / v.len() as f64;
    let (a, b) = (marg.grid[0], *marg.grid.last().unwrap());
    let rows = (0..=200)
        .map(|i| {
            let x = a + (b - a) * i as f64 / 200.0;
            vec![num(x), num(ecdf(lo, x)), num(marg.cdf_low_at(x)), num(ecdf(hi, x)), num(marg.cdf_high_at(x))]
        })
        .collect();
    (rows, d_lo, d_hi)
}

const MARGINAL_HEADER: [&str; 5] = ["x", "mc_low", "density_low", "mc_high", "density_high"];

fn pair_marginals(y: &[f64], s: f64) -> PairMarginals {
    let w = 6.0 * s.sqrt() + 1.0;
    PairMarginals::tabulate(|a, b| km_limit_density_qs(&[a, b], y, s).unwrap_or(0.0), y[0] - w, y[1] + w, 600)
}

fn marginal_plot(title: &str) -> PlotSpec {
    PlotSpec::new(title, "x").points("mc_low").line("density_low").points("mc_high").line("density_high")
}

// ----------------------------------------------------------------- dyson

pub struct DysonArgs {
    pub y: Vec<f64>,
    pub a: f64,
    pub t: Option<f64>,
    pub dt: Option<f64>,
    pub paths: usize,
    pub seed: u64,
}

pub fn dyson(out: &Path, d: DysonArgs) -> Result<Value, CliError> {
    let n = d.y.len();
    if n == 0 || d.paths == 0 {
        return Err(CliError::Usage("need at least one starting point and one path".into()));
    }
    let t_final = d.t.unwrap_or(d.a * d.a / n as f64);
    let gap = d.y.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let dt = d.dt.unwrap_or(if n > 1 { 1e-4 * gap * gap } else { 1e-3 });
    let p = params(vec![
        ("y", list(&d.y)),
        ("a", json!(d.a)),
        ("t", json!(t_final)),
        ("dt", json!(dt)),
        ("paths", json!(d.paths)),
        ("seed", json!(d.seed)),
    ]);
    let mut art = start(out, "dyson", p, Some(d.seed))?;
    let paths = (0..d.paths as u64)
        .into_par_iter()
        .map(|i| dyson_evolve(&d.y, t_final, dt, RngSeed::new(d.seed, i)))
        .collect::<LabResult<Vec<_>>>()?;
    let mut header: Vec<String> = vec!["path".into()];
    header.extend((1..=n).map(|i| format!("lambda_{i}")));
    header.extend(["min_gap".into(), "steps".into()]);
    let rows: Vec<Vec<String>> = paths
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut r = vec![i.to_string()];
            r.extend(p.terminal.iter().map(|v| num(*v)));
            r.extend([num(p.min_gap), p.steps.to_string()]);
            r
        })
        .collect();
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    art.csv("dyson", &h, &rows)?;
    let min_gap = paths.iter().map(|p| p.min_gap).fold(f64::INFINITY, f64::min);
    let mut metrics = json!({ "t_final": t_final, "dt": dt, "min_gap": min_gap });
    if n == 2 {
        let marg = pair_marginals(&d.y, t_final);
        let mut lo: Vec<f64> = paths.iter().map(|p| p.terminal[0]).collect();
        let mut hi: Vec<f64> = paths.iter().map(|p| p.terminal[1]).collect();
        let (rows, d_lo, d_hi) = marginal_rows(&marg, &mut lo, &mut hi);
        let text = art.csv("dyson-marginals", &MARGINAL_HEADER, &rows)?;
        art.plot("dyson-marginals", &text, marginal_plot("Dyson terminal marginals"))?;
        metrics["ks_low"] = json!(d_lo);
        metrics["ks_high"] = json!(d_hi);
    }
    Ok(art.finish(metrics)?)
}

// ---------------------------------------------------------- prop11-check

pub fn prop11_check(out: &Path, y: Vec<f64>, a: f64, samples: usize, seed: u64) -> Result<Value, CliError> {
    if y.len() != 2 {
        return Err(CliError::Usage("the marginal comparison is implemented for N = 2".into()));
    }
    if !(a > 0.0) || samples == 0 {
        return Err(CliError::Usage("need a > 0 and samples >= 1".into()));
    }
    let p = params(vec![("y", list(&y)), ("a", json!(a)), ("samples", json!(samples)), ("seed", json!(seed))]);
    let mut art = start(out, "prop11-check", p, Some(seed))?;
    Spectrum::from_sorted(y.clone())?;
    let base = HermitianMatrix::from_real_diagonal(&y);
    let scale = a / 2f64.sqrt();
    let xs = spectra(samples, |t| sample_gue(2, RngSeed::for_trial(seed, t, ROLE_AUX))?.scaled(scale).add_scaled(&base, 1.0, 1.0))?;
    let mut lo: Vec<f64> = xs.iter().map(|x| x.values()[0]).collect();
    let mut hi: Vec<f64> = xs.iter().map(|x| x.values()[1]).collect();
    let marg = pair_marginals(&y, a * a / 2.0);
    let (rows, d_lo, d_hi) = marginal_rows(&marg, &mut lo, &mut hi);
    let text = art.csv("prop11-check", &MARGINAL_HEADER, &rows)?;
    art.plot("prop11-check", &text, marginal_plot("eigenvalue marginals of diag(y) + (a/sqrt 2) V"))?;
    Ok(art.finish(json!({ "ks_low": d_lo, "ks_high": d_hi }))?)
}

// ---------------------------------------------------------- prop22-check

/// `phi_k = x^k` and `psi_k = cos(k x)` on `[0, 1]`.
pub fn demo_system(n: usize) -> LabResult<BiorthogonalSystem> {
    let phi = (0..n).map(|k| Box::new(move |x: f64| x.powi(k as i32)) as RealFn).collect();
    let psi = (0..n).map(|k| Box::new(move |x: f64| (k as f64 * x).cos()) as RealFn).collect();
    BiorthogonalSystem::new(phi, psi, 0.0, 1.0, 24)
}

pub const PERTURBATIONS: [&str; 3] = ["linear", "constant", "bump"];

pub fn perturbation(name: &str) -> fn(f64) -> f64 {
    match name {
        "linear" => |x| x,
        "constant" => |_| 0.5,
        _ => |x| -0.6 * (-(x - 0.4).powi(2) / 0.05).exp(),
    }
}

pub fn prop22_check(out: &Path, ns: Vec<usize>) -> Result<Value, CliError> {
    if ns.iter().any(|n| !(2..=3).contains(n)) {
        return Err(CliError::Usage("N must be 2 or 3".into()));
    }
    let mut art = start(out, "prop22-check", params(vec![("N", list(&ns))]), None)?;
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for &n in &ns {
        let sys = demo_system(n)?;
        for g in PERTURBATIONS {
            let r = fredholm_ratio_check(&sys, perturbation(g))?;
            worst = worst.max(r.gap);
            rows.push(vec![n.to_string(), g.to_string(), num(r.lhs), num(r.rhs), num(r.gap)]);
        }
    }
    art.csv("prop22-check", &["N", "g", "lhs", "rhs", "gap"], &rows)?;
    Ok(art.finish(json!({ "max_gap": worst }))?)
}
