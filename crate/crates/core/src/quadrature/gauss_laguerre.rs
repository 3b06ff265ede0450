//! Gauss–Laguerre rules for `∫₀^∞ e^{-x} g(x) dx`.
//!
//! Nodes are the eigenvalues of the Jacobi matrix (diagonal `2k+1`,
//! off-diagonal `k`), isolated by Sturm-sequence bisection and then polished
//! with Newton steps on `L_n`. Weights are Christoffel numbers
//! `1 / Σ_k L_k(x)²`, accumulated with rescaling so large nodes do not
//! overflow.

use std::sync::OnceLock;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussLaguerre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Number of Jacobi-matrix eigenvalues strictly below `x`.
fn sturm_count(n: usize, x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0 - x; // alpha_0 - x
    if q < 0.0 {
        count += 1;
    }
    for k in 1..n {
        let kf = k as f64;
        let alpha = 2.0 * kf + 1.0;
        let beta2 = kf * kf;
        let prev = if q == 0.0 { f64::EPSILON } else { q };
        q = alpha - x - beta2 / prev;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// `(L_n(x), L_{n-1}(x))` scaled by a common positive factor.
fn laguerre_pair_scaled(n: usize, x: f64) -> (f64, f64) {
    let mut l0 = 1.0;
    let mut l1 = 1.0 - x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let l2 = ((2.0 * kf + 1.0 - x) * l1 - kf * l0) / (kf + 1.0);
        l0 = l1;
        l1 = l2;
        if l1.abs() > 1e100 {
            l0 *= 1e-100;
            l1 *= 1e-100;
        }
    }
    (l1, l0)
}

/// Christoffel weight `1 / Σ_{k<n} L_k(x)²` in log-safe form.
fn christoffel_weight(n: usize, x: f64) -> f64 {
    let mut l0 = 1.0;
    let mut l1 = 1.0 - x;
    let mut sum = 1.0;
    let mut log_scale = 0.0; // values are multiplied by exp(-log_scale)
    if n > 1 {
        sum += l1 * l1;
    }
    for k in 1..n.saturating_sub(1) {
        let kf = k as f64;
        let l2 = ((2.0 * kf + 1.0 - x) * l1 - kf * l0) / (kf + 1.0);
        l0 = l1;
        l1 = l2;
        sum += l1 * l1;
        if l1.abs() > 1e100 {
            l0 *= 1e-100;
            l1 *= 1e-100;
            sum *= 1e-200;
            log_scale += 100.0 * std::f64::consts::LN_10;
        }
    }
    (-(sum.ln() + 2.0 * log_scale)).exp()
}

impl GaussLaguerre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Laguerre order must be >= 1");
        // Gershgorin: all eigenvalues lie in [0, 4n]
        let upper = 4.0 * n as f64;
        let mut nodes = Vec::with_capacity(n);
        for i in 0..n {
            // i-th eigenvalue: smallest x with count(x) > i
            let (mut lo, mut hi) = (0.0f64, upper);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if sturm_count(n, mid) > i {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let mut x = 0.5 * (lo + hi);
            for _ in 0..4 {
                let (ln, lnm1) = laguerre_pair_scaled(n, x);
                let dln = n as f64 * (ln - lnm1) / x;
                if dln == 0.0 || !dln.is_finite() {
                    break;
                }
                let step = ln / dln;
                let candidate = x - step;
                // stay inside the bisection bracket
                if candidate > lo && candidate < hi {
                    x = candidate;
                } else {
                    break;
                }
                if step.abs() <= 1e-16 * x {
                    break;
                }
            }
            nodes.push(x);
        }
        let weights = nodes.iter().map(|&x| christoffel_weight(n, x)).collect();
        Self { nodes, weights }
    }

    /// Shared rule of order `n` (computed once per process).
    pub fn cached(n: usize) -> &'static GaussLaguerre {
        static CACHE: [OnceLock<GaussLaguerre>; 10] = [const { OnceLock::new() }; 10];
        // orders 2^1 ..= 2^10 are cached; anything else is leaked on demand
        if n.is_power_of_two() && (2..=1024).contains(&n) {
            let slot = n.trailing_zeros() as usize - 1;
            CACHE[slot].get_or_init(|| GaussLaguerre::new(n))
        } else {
            Box::leak(Box::new(GaussLaguerre::new(n)))
        }
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

    /// `Σ w_i g(x_i + shift) ≈ ∫₀^∞ e^{-x} g(x + shift) dx`.
    pub fn integrate_shifted<T, F>(&self, shift: f64, g: F) -> T
    where
        T: super::QuadValue,
        F: Fn(f64) -> T,
    {
        self.nodes
            .iter()
            .zip(&self.weights)
            .filter(|(_, &w)| w > 0.0)
            .fold(T::zero(), |acc, (&x, &w)| acc + g(x + shift) * w)
    }

    pub fn integrate<T, F>(&self, g: F) -> T
    where
        T: super::QuadValue,
        F: Fn(f64) -> T,
    {
        self.integrate_shifted(0.0, g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(k: u32) -> f64 {
        (1..=k).map(f64::from).product()
    }

    #[test]
    fn small_rule_matches_known_nodes() {
        // L_2 roots: 2 ± √2, weights (2 ∓ √2)/4
        let r = GaussLaguerre::new(2);
        let s = 2f64.sqrt();
        assert!((r.nodes()[0] - (2.0 - s)).abs() < 1e-15);
        assert!((r.nodes()[1] - (2.0 + s)).abs() < 1e-14);
        assert!((r.weights()[0] - (2.0 + s) / 4.0).abs() < 1e-15);
        assert!((r.weights()[1] - (2.0 - s) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn exact_for_moments() {
        for n in [4usize, 8, 16] {
            let rule = GaussLaguerre::new(n);
            for k in 0..(2 * n as u32).min(20) {
                let v: f64 = rule.integrate(|x| x.powi(k as i32));
                let exact = factorial(k);
                assert!((v / exact - 1.0).abs() < 1e-12, "n = {n}, k = {k}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn large_orders_are_well_formed() {
        for n in [64usize, 256, 512] {
            let rule = GaussLaguerre::cached(n);
            assert_eq!(rule.order(), n);
            assert!(rule.nodes().windows(2).all(|w| w[0] < w[1]), "n = {n}");
            let s: f64 = rule.weights().iter().sum();
            assert!((s - 1.0).abs() < 1e-13, "n = {n}: sum {s}");
            let first: f64 = rule.integrate(|x| x);
            assert!((first - 1.0).abs() < 1e-12, "n = {n}: first moment {first}");
            let smooth: f64 = rule.integrate(|x| 1.0 / (1.0 + x));
            // ∫ e^{-x}/(1+x) = e E1(1) = 0.596347362323194...
            assert!((smooth - 0.5963473623231940743).abs() < 1e-12, "n = {n}: {smooth}");
        }
    }

    #[test]
    fn nodes_are_roots() {
        let n = 128;
        let rule = GaussLaguerre::cached(n);
        for &x in rule.nodes().iter().take(20) {
            let (ln, lnm1) = laguerre_pair_scaled(n, x);
            // relative to the scale of neighbouring polynomial values
            assert!(ln.abs() <= 1e-10 * lnm1.abs().max(1e-300), "x = {x}");
        }
    }
}
