//! Gauss–Legendre rules.

use std::f64::consts::PI;

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Rule with `n >= 1` nodes, computed by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..(n + 1) / 2 {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped affinely onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Composite rule over `panels` equal sub-intervals of `[a, b]`.
    pub fn integrate_composite(&self, a: f64, b: f64, panels: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|p| {
                let lo = a + h * p as f64;
                self.integrate(lo, lo + h, &mut f)
            })
            .sum()
    }

    /// Nodes and weights of the composite rule, concatenated.
    pub fn composite_points(&self, a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
        let h = (b - a) / panels as f64;
        let mut xs = Vec::with_capacity(panels * self.len());
        let mut ws = Vec::with_capacity(panels * self.len());
        for p in 0..panels {
            let lo = a + h * p as f64;
            for (x, w) in self.mapped(lo, lo + h) {
                xs.push(x);
                ws.push(w);
            }
        }
        (xs, ws)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 5, 24, 64, 200] {
            let g = GaussLegendre::new(n);
            let s: f64 = g.weights().iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n} sum={s}");
        }
    }

    #[test]
    fn exact_for_polynomials() {
        let g = GaussLegendre::new(10);
        // exact up to degree 19
        let v = g.integrate(0.0, 2.0, |x| x.powi(19));
        assert!((v - 2f64.powi(20) / 20.0).abs() < 1e-9 * 2f64.powi(20) / 20.0);
    }

    #[test]
    fn nodes_sorted_and_symmetric() {
        let g = GaussLegendre::new(7);
        assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
        for i in 0..7 {
            assert!((g.nodes()[i] + g.nodes()[6 - i]).abs() < 1e-15);
        }
    }

    #[test]
    fn composite_gaussian() {
        let g = GaussLegendre::new(24);
        let v = g.integrate_composite(-10.0, 10.0, 8, |x| (-x * x).exp());
        assert!((v - PI.sqrt()).abs() < 1e-13);
    }
}
