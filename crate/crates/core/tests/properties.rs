use proptest::prelude::*;
use rmtlab::ensembles::{sample_deformed, WignerSpec};
use rmtlab::kernel::{correlation_det, gue_kernel, sine_kernel};
use rmtlab::paths::{km_conditional_density, km_limit_density_qs, PathConfig};
use rmtlab::spacing::{spacing_statistic, SpacingWindow};
use rmtlab::spectral::{hermitian_eigenvalues, Spectrum};

fn ascending(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, n).prop_map(|steps| {
        let mut acc = -1.0;
        steps.iter().map(|s| { acc += s; acc }).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spacing_monotone_in_threshold(xs in prop::collection::vec(-1.0f64..1.0, 2..200), s1 in 0.0f64..4.0, ds in 0.0f64..4.0) {
        let x = Spectrum::from_unsorted(xs);
        let w1 = SpacingWindow::new(0.0, 4.0, 0.3, s1).unwrap();
        let w2 = SpacingWindow::new(0.0, 4.0, 0.3, s1 + ds).unwrap();
        prop_assert!(spacing_statistic(&x, &w1) <= spacing_statistic(&x, &w2));
    }

    #[test]
    fn spacing_ignores_points_beyond_window(xs in prop::collection::vec(-0.5f64..0.5, 2..100), s in 0.0f64..5.0) {
        // 0.9 sits outside the window, so anything right of it cannot form a
        // gap with a window point
        let mut base = xs;
        base.push(0.9);
        let n = base.len() as f64;
        let before = spacing_statistic(&Spectrum::from_unsorted(base.clone()), &SpacingWindow::new(0.0, 2.0, 1.0, s).unwrap());
        base.extend([5.0, 6.0, 7.0]);
        // keep N rho fixed so the spacing unit does not move
        let win = SpacingWindow::new(0.0, 2.0, n / base.len() as f64, s).unwrap();
        let after = spacing_statistic(&Spectrum::from_unsorted(base), &win);
        prop_assert_eq!(before, after);
    }

    #[test]
    fn limit_density_permutation_symmetric(y in ascending(3), x in prop::collection::vec(-2.0f64..2.0, 3), s in 0.05f64..2.0) {
        let a = km_limit_density_qs(&x, &y, s).unwrap();
        for p in [[1, 0, 2], [2, 1, 0], [1, 2, 0]] {
            let xp = [x[p[0]], x[p[1]], x[p[2]]];
            let b = km_limit_density_qs(&xp, &y, s).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300));
        }
    }

    #[test]
    fn densities_nonnegative_on_ordered_input(y in ascending(3), x in ascending(3), s in 0.05f64..2.0, t in 0.1f64..100.0) {
        prop_assert!(km_limit_density_qs(&x, &y, s).unwrap() >= 0.0);
        let cfg = PathConfig::new(y, s, t).unwrap();
        prop_assert!(km_conditional_density(&x, &cfg).unwrap() >= 0.0);
    }

    #[test]
    fn sine_correlations_symmetric_and_nonnegative(pts in prop::collection::vec(-3.0f64..3.0, 1..7)) {
        let k = |a: f64, b: f64| sine_kernel(a - b);
        let d = correlation_det(&pts, k);
        prop_assert!(d >= -1e-10);
        let mut rev = pts.clone();
        rev.reverse();
        prop_assert!((correlation_det(&rev, k) - d).abs() < 1e-10);
    }

    #[test]
    fn gue_correlations_nonnegative(pts in prop::collection::vec(-2.5f64..2.5, 1..7), n in 1usize..40) {
        prop_assert!(correlation_det(&pts, |a, b| gue_kernel(a, b, n)) >= -1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn eigenvalues_preserve_trace_invariants(n in 1usize..40, seed in any::<u64>(), a in 0.0f64..2.0) {
        let m = sample_deformed(&WignerSpec::bernoulli(), a, n, seed, 0).unwrap();
        let e = hermitian_eigenvalues(&m).unwrap();
        prop_assert!((e.sum() - m.trace()).abs() < 1e-10 * (1.0 + m.trace().abs()));
        let tr2 = m.trace_of_square();
        prop_assert!((e.sum_of_squares() - tr2).abs() < 1e-10 * (1.0 + tr2));
        prop_assert!(e.values().windows(2).all(|w| w[0] <= w[1]));
    }
}
