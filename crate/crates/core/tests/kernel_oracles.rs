use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rmtlab::kernel::*;
use rmtlab::paths::km_limit_density_qs;
use rmtlab::quadrature::GaussLegendre;
use rmtlab::spectral::{log_potential_fn, Spectrum};
use std::f64::consts::PI;

fn ctx(u: f64, a: f64, y: Vec<f64>) -> KernelContext {
    KernelContext::new(u, a, Spectrum::from_unsorted(y), QuadratureSettings::default()).unwrap()
}

fn spread(n: usize) -> Vec<f64> {
    (0..n).map(|j| -1.0 + 2.0 * (j as f64 + 0.5) / n as f64 + 0.01 * ((j * 7) % 5) as f64).collect()
}

#[test]
fn gamma_encloses_real_points_counterclockwise() {
    let c = ctx(0.2, 1.0, spread(20));
    let g = build_gamma(&c).unwrap();
    let v = g.integrate(|z| (z - 0.3).inv());
    assert!((v - Complex64::new(0.0, 2.0 * PI)).norm() < 1e-8, "{v}");
    // a point outside the rectangle contributes nothing
    let far = g.center + g.radius + 1.0;
    assert!(g.integrate(|z| (z - far).inv()).norm() < 1e-8);
}

#[test]
fn gamma_nodes_lie_on_the_rectangle() {
    let c = ctx(0.0, 1.0, spread(30));
    let g = build_gamma(&c).unwrap();
    let h = c.gamma_height();
    for z in &g.nodes {
        let on_line = (z.im.abs() - h).abs() < 1e-12;
        let on_side = ((z.re - g.center).abs() - g.radius).abs() < 1e-9 && z.im.abs() <= h + 1e-12;
        assert!(on_line || on_side, "{z}");
    }
}

#[test]
fn big_gamma_sits_on_the_saddle_line() {
    let c = ctx(0.0, 1.0, spread(30));
    let g = build_big_gamma(&c).unwrap();
    assert!(c.saddle.z_c_plus.re.abs() < 1e-15);
    assert!(g.nodes.iter().all(|w| w.re.abs() < 1e-15));
    // Gaussian decay at the ends
    let ends = [g.nodes[0], *g.nodes.last().unwrap()];
    let n = c.n as f64;
    let peak = g.nodes.iter().map(|&w| n * log_potential_fn(w, c.u, c.a, &c.y).unwrap().value.re).fold(f64::MIN, f64::max);
    for w in ends {
        let e = n * log_potential_fn(w, c.u, c.a, &c.y).unwrap().value.re;
        assert!(e - peak < (1e-18f64).ln(), "{e} vs {peak}");
    }
}

/// `g_N` straight from the sum definition with `v = u + tau/(N rho)`.
fn g_explicit(z: Complex64, w: Complex64, tau: f64, c: &KernelContext) -> Complex64 {
    let n = c.n as f64;
    let v = c.u + tau / (n * c.rho());
    let a2 = c.a * c.a;
    let s: Complex64 = c.y.values().iter().map(|&y| y / ((w - y) * (z - y))).sum();
    (w + z - v - a2 / n * s) / (a2 * z)
}

#[test]
fn g_matches_sum_definition_at_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for n in [5usize, 60] {
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c = ctx(0.3, 0.8, y);
        for _ in 0..1000 {
            let z = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(0.05..1.0) * if rng.gen() { 1.0 } else { -1.0 });
            let w = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-3.0..3.0));
            let tau = rng.gen_range(-4.0..4.0);
            let (_, g) = eval_h_gn(z, w, tau, &c).unwrap();
            let e = g_explicit(z, w, tau, &c);
            assert!((g - e).norm() < 1e-10 * e.norm().max(1.0), "{g} vs {e}");
        }
    }
}

#[test]
fn g_confluent_limit() {
    let c = ctx(0.1, 1.0, spread(8));
    let z = Complex64::new(0.2, 0.4);
    let p = log_potential_fn(z, c.u, c.a, &c.y).unwrap();
    let (_, g) = eval_h_gn(z, z, 0.0, &c).unwrap();
    assert!((g - (p.d1 / z + p.d2)).norm() < 1e-12);
    let (_, g_near) = eval_h_gn(z, z + 1e-7, 0.0, &c).unwrap();
    assert!((g_near - g).norm() < 1e-6);
}

#[test]
fn h_is_smooth_through_tau_zero() {
    let c = ctx(0.4, 1.0, spread(8));
    let (z, w) = (Complex64::new(0.3, 0.5), Complex64::new(0.4, -1.2));
    let (h0, _) = eval_h_gn(z, w, 0.0, &c).unwrap();
    assert!((h0 + z / (c.a * c.a * c.rho())).norm() < 1e-14);
    // h'(0) = -(z/(a^2 rho)) (omega0 - w/(a^2 rho) + z/(2 a^2 rho))
    let k0 = 1.0 / (c.a * c.a * c.rho());
    let dh = -z * k0 * (c.saddle.omega0 - w * k0 + 0.5 * z * k0);
    for tau in [1e-9, 1e-6] {
        let (h, _) = eval_h_gn(z, w, tau, &c).unwrap();
        assert!((h - h0 - tau * dh).norm() < 100.0 * tau * tau + 1e-14, "{h} at {tau}");
    }
    // direct difference formula where it is well conditioned
    let tau = 0.7;
    let k = tau / (c.a * c.a * c.rho());
    let direct = (c.saddle.omega0 * tau).exp() / tau * ((-k * w).exp() - (-k * (w - z)).exp());
    let (h, _) = eval_h_gn(z, w, tau, &c).unwrap();
    assert!((h - direct).norm() < 1e-13 * direct.norm());
}

#[test]
fn kernel_reproduces_two_point_density() {
    // N = 2: R_1(x) = ∫ q_S(x, t) dt and R_2(x, t) = q_S(x, t), S = a^2/2.
    let (a, y) = (1.0, vec![-0.45, 0.35]);
    let s = a * a / 2.0;
    let gl = GaussLegendre::new(40);
    let diag = |x: f64| {
        let c = ctx(x, a, y.clone());
        let scan = deformed_kernel_scan(&[0.0], &c).unwrap();
        2.0 * c.rho() * scan.values[0]
    };
    // off-diagonal without the e^{omega0 tau} conjugation, which cancels in R_2
    let off = |x: f64, t: f64| {
        let c = ctx(x, a, y.clone());
        let tau = (t - x) * 2.0 * c.rho();
        let scan = deformed_kernel_scan(&[tau], &c).unwrap();
        2.0 * c.rho() * scan.values[0] / (c.saddle.omega0 * tau).exp()
    };
    for x in [-0.3, 0.0, 0.25] {
        let r1 = gl.integrate_composite(x - 10.0, x + 10.0, 16, |t| km_limit_density_qs(&[x, t], &y, s).unwrap());
        let k = diag(x);
        assert!((k - r1).abs() < 1e-8 * r1, "R1 at {x}: {k} vs {r1}");
    }
    for (x, t) in [(-0.3, 0.2), (0.0, 0.6), (0.1, 0.15)] {
        let r2 = km_limit_density_qs(&[x, t], &y, s).unwrap();
        let k = diag(x) * diag(t) - off(x, t) * off(t, x);
        assert!((k - r2).abs() < 1e-8 * r2.max(1e-3), "R2 at ({x},{t}): {k} vs {r2}");
    }
}

#[test]
fn vertical_line_position_is_irrelevant() {
    let y = spread(12);
    let taus = [-2.0, -0.5, 0.0, 1.0, 3.0];
    let moved = KernelContext::new(
        0.5,
        1.0,
        Spectrum::from_unsorted(y.clone()),
        QuadratureSettings { big_gamma_re: Some(0.0), ..Default::default() },
    )
    .unwrap();
    let a = deformed_kernel_scan(&taus, &ctx(0.5, 1.0, y)).unwrap();
    let b = deformed_kernel_scan(&taus, &moved).unwrap();
    for (p, q) in a.values.iter().zip(&b.values) {
        assert!((p - q).abs() < 1e-8, "{p} vs {q}");
    }
}

#[test]
fn symmetric_spectrum_gives_even_kernel_at_zero() {
    let half = spread(40);
    let y: Vec<f64> = half.iter().flat_map(|&v| [v.abs() + 0.01, -v.abs() - 0.01]).collect();
    let c = ctx(0.0, 1.0, y);
    let taus = [-3.0, -1.3, -0.2, 0.2, 1.3, 3.0];
    let scan = deformed_kernel_scan(&taus, &c).unwrap();
    for i in 0..3 {
        assert!((scan.values[i] - scan.values[5 - i]).abs() < 1e-9);
    }
    assert!(scan.self_convergence < 1e-8);
    assert!(scan.imag.iter().zip(&scan.values).all(|(i, v)| i.abs() <= 1e-6 * v.abs().max(1.0)));
}

#[test]
fn large_n_kernel_near_sine() {
    let n = 400;
    let y: Vec<f64> = (0..n).map(|j| {
        // semicircle quantiles
        let p = (j as f64 + 0.5) / n as f64;
        let (mut lo, mut hi) = (-1.0f64, 1.0f64);
        for _ in 0..60 {
            let m = 0.5 * (lo + hi);
            let cdf = 0.5 + (m * (1.0 - m * m).sqrt() + m.asin()) / PI;
            if cdf < p { lo = m } else { hi = m }
        }
        0.5 * (lo + hi)
    }).collect();
    let c = ctx(0.0, 1.0, y);
    let v = deformed_kernel(0.0, &c).unwrap();
    assert!((v - 1.0).abs() < 0.05, "{v}");
}

#[test]
fn kernel_rejects_bad_inputs() {
    assert!(KernelContext::new(0.0, 0.0, Spectrum::from_unsorted(vec![0.0]), QuadratureSettings::default()).is_err());
    assert!(KernelContext::new(5.0, 1.0, Spectrum::from_unsorted(vec![0.0]), QuadratureSettings::default()).is_err());
    let c = ctx(0.0, 1.0, vec![-0.5, 0.5]);
    assert!(eval_h_gn(Complex64::new(0.5, 0.0), Complex64::new(0.0, 1.0), 0.1, &c).is_err());
}
