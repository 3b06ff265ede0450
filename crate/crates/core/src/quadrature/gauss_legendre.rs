//! Gauss–Legendre rules on [-1, 1], nodes by Newton iteration on `P_n`.

use std::f64::consts::PI;
use std::sync::OnceLock;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be >= 1");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1e-3) {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
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

    /// Shared rule of order `n` for `n` a power of two up to 1024.
    pub fn cached(n: usize) -> &'static GaussLegendre {
        static CACHE: [OnceLock<GaussLegendre>; 11] = [const { OnceLock::new() }; 11];
        assert!(
            n.is_power_of_two() && n <= 1024,
            "cached Gauss-Legendre orders are powers of two up to 1024"
        );
        CACHE[n.trailing_zeros() as usize].get_or_init(|| GaussLegendre::new(n))
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Applies the rule on `[a, b]`.
    pub fn integrate<T, F>(&self, a: f64, b: f64, f: F) -> T
    where
        T: super::QuadValue,
        F: Fn(f64) -> T,
    {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let sum = self
            .nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (&x, &w)| acc + f(c + h * x) * w);
        sum * h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_polynomials() {
        for n in [1usize, 2, 5, 10, 33, 64] {
            let rule = GaussLegendre::new(n);
            for k in 0..(2 * n) as i32 {
                let v: f64 = rule.integrate(-1.0, 1.0, |x| x.powi(k));
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert!((v - exact).abs() < 1e-13, "n = {n}, k = {k}: {v}");
            }
        }
    }

    #[test]
    fn nodes_sorted_and_weights_sum_to_two() {
        let rule = GaussLegendre::new(40);
        assert!(rule.nodes().windows(2).all(|w| w[0] < w[1]));
        let s: f64 = rule.weights().iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn matches_kronrod_gauss_nodes() {
        // 10-point nodes embedded in the G10/K21 pair
        let rule = GaussLegendre::new(10);
        assert!((rule.nodes()[9] - 0.973906528517171720077964012084452).abs() < 1e-15);
        assert!((rule.weights()[9] - 0.066671344308688137593568809893332).abs() < 1e-15);
    }
}
