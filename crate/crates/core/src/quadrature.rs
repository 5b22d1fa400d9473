//! Composite Gauss–Legendre and trapezoid rules.

use std::sync::OnceLock;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes from Newton iteration on `P_n`, starting from the Chebyshev-like
    /// guess `cos(pi (i - 1/4) / (n + 1/2))`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Shared 32-point rule.
    pub fn panel32() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(32))
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

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Composite rule with `panels` equal panels on `[a, b]`.
    pub fn composite<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, panels: usize, mut f: F) -> f64 {
        composite_points(self, a, b, panels).map(|(x, w)| w * f(x)).sum()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// All nodes and weights of a composite rule on `[a, b]`.
pub fn composite_points(rule: &GaussLegendre, a: f64, b: f64, panels: usize) -> impl Iterator<Item = (f64, f64)> + '_ {
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    (0..panels).flat_map(move |p| {
        let lo = a + width * p as f64;
        let hi = if p + 1 == panels { b } else { lo + width };
        rule.mapped(lo, hi)
    })
}

/// Composite trapezoid rule with `n` intervals.
pub fn trapezoid<F: FnMut(f64) -> f64>(a: f64, b: f64, n: usize, mut f: F) -> f64 {
    let n = n.max(1);
    let h = (b - a) / n as f64;
    let mut sum = 0.5 * (f(a) + f(b));
    for i in 1..n {
        sum += f(a + h * i as f64);
    }
    sum * h
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 5, 16, 32, 64] {
            let r = GaussLegendre::new(n);
            assert_relative_eq!(r.weights().iter().sum::<f64>(), 2.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        let r = GaussLegendre::new(8);
        for deg in 0..16u32 {
            let got = r.integrate(-1.0, 2.0, |x| x.powi(deg as i32));
            let want = (2f64.powi(deg as i32 + 1) - (-1f64).powi(deg as i32 + 1)) / (deg as f64 + 1.0);
            assert_relative_eq!(got, want, max_relative = 1e-13, epsilon = 1e-13);
        }
    }

    #[test]
    fn known_low_order_nodes() {
        let r = GaussLegendre::new(2);
        assert_relative_eq!(r.nodes()[1], 1.0 / 3f64.sqrt(), max_relative = 1e-15);
        let r = GaussLegendre::new(3);
        assert_relative_eq!(r.nodes()[2], (0.6f64).sqrt(), max_relative = 1e-15);
        assert_relative_eq!(r.weights()[1], 8.0 / 9.0, max_relative = 1e-15);
    }

    #[test]
    fn composite_gaussian() {
        let r = GaussLegendre::panel32();
        let got = r.composite(-10.0, 10.0, 8, |x| (-x * x / 2.0).exp());
        assert_relative_eq!(got, (2.0 * std::f64::consts::PI).sqrt(), max_relative = 1e-14);
        let trap = trapezoid(-10.0, 10.0, 400, |x| (-x * x / 2.0).exp());
        assert_relative_eq!(trap, got, max_relative = 1e-13);
    }
}
