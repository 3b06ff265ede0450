//! Time evolution of the population `⟨−1/2|ρ(t)|−1/2⟩`.
//!
//! The population is the Markovian decay `exp(−2γt)` plus the non-Markovian
//! correction
//!
//! ```text
//! NM(t) = κ / (ω₀² t) · (A(t) sin ω₀t + B(t) cos ω₀t),   κ = γ_p² H₁² / (2πδ) = 2γ/π
//! ```
//!
//! where, with `a = ω₀t` and `b = (ω₀/δ)²`,
//!
//! ```text
//! A = ∫₀^∞ e^{-ξ} a⁴(a⁴(1+b) − a²(1+6b)ξ² + bξ⁴) / D(ξ) dξ
//! B = ∫₀^∞ e^{-ξ} (−a⁷(2+4b)ξ + 4a⁵bξ³) / D(ξ) dξ
//! ```
//!
//! and `D` is [`d_poly`]. The two rational parts are the real and imaginary
//! parts of `g(ξ) = 1/[(1 + b(1+iξ/a)²)(1+iξ/a)²]`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::quadrature::{integrate_breakpoints, GaussLaguerre, GaussLegendre, Tolerance};
use crate::spectral::{decay_width, CouplingParams};
use crate::units::gyromagnetic_ratio;

/// Below `T_FLOOR_OMEGA_T / ω₀` the non-Markovian term is defined as zero.
pub const T_FLOOR_OMEGA_T: f64 = 1e-6;

/// Gauss–Laguerre orders tried in turn.
pub const LAGUERRE_ORDERS: [usize; 6] = [16, 32, 64, 128, 256, 512];

/// Agreement required between successive Gauss–Laguerre orders.
pub const LAGUERRE_REL_TOL: f64 = 1e-10;

/// Truncation point of the adaptive route (`e^{-40} < 5e-18`).
pub const ADAPTIVE_UPPER: f64 = 40.0;

/// For `a` below this the Laguerre route resolves `[0, max(16a, 4)]` with
/// Gauss–Legendre panels graded down to `a/4` and applies Gauss–Laguerre to
/// the shifted tail.
const HEAD_SPLIT_BELOW: f64 = 1.0;
const HEAD_EXTENT: f64 = 16.0;
const HEAD_MIN: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionParams {
    omega0: f64,
    delta: f64,
    gamma: f64,
    kappa: f64,
}

impl EvolutionParams {
    /// `omega0` (ω₀), `delta` (δ) and `gamma` (γ) in MeV.
    pub fn new(omega0: f64, delta: f64, gamma: f64) -> Result<Self> {
        ensure_positive("omega0", omega0)?;
        ensure_positive("delta", delta)?;
        ensure_non_negative("gamma", gamma)?;
        Ok(Self {
            omega0,
            delta,
            gamma,
            kappa: 2.0 * gamma / PI,
        })
    }

    /// Takes ω₀, δ and γ from the coupling and cross-checks the prefactor
    /// `γ_p² H₁² / (2πδ)` against `2γ/π`.
    pub fn from_coupling(c: &CouplingParams) -> Result<Self> {
        let p = Self::new(c.omega0(), c.line().delta(), decay_width(c))?;
        let gh = gyromagnetic_ratio(c.particle()) * c.h1_tesla();
        let kappa_direct = gh * gh / (2.0 * PI * p.delta);
        if (kappa_direct - p.kappa).abs() > 1e-12 * p.kappa.max(f64::MIN_POSITIVE) {
            return Err(Error::invalid(
                "kappa",
                format!("prefactor {kappa_direct:e} inconsistent with 2*gamma/pi = {:e}", p.kappa),
            ));
        }
        Ok(p)
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Prefactor `γ_p² H₁² / (2πδ)`, equal to `2γ/π`.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `b = (ω₀/δ)²`.
    pub fn ratio_sq(&self) -> f64 {
        let r = self.omega0 / self.delta;
        r * r
    }

    /// `a = ω₀ t`.
    pub fn omega_t(&self, t: f64) -> f64 {
        self.omega0 * t
    }

    /// Squared coupling `(γ_p H₁/2)² = γδ` in MeV².
    pub fn coupling_squared(&self) -> f64 {
        self.gamma * self.delta
    }

    /// Markovian relaxation time `1/(2γ)`; infinite without drive.
    pub fn relaxation_time(&self) -> f64 {
        1.0 / (2.0 * self.gamma)
    }

    pub fn t_floor(&self) -> f64 {
        T_FLOOR_OMEGA_T / self.omega0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionPoint {
    pub t: f64,
    pub markovian: f64,
    pub non_markovian: f64,
    pub total: f64,
}

/// `exp(−2γt)`.
pub fn markovian_term(p: &EvolutionParams, t: f64) -> Result<f64> {
    ensure_non_negative("t", t)?;
    Ok((-2.0 * p.gamma * t).exp())
}

/// The closed-form integrand, with optional multipliers on the five terms
/// of `D(ξ)`. The genuine polynomial has every multiplier equal to one;
/// anything else exists to check that verification notices the change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    d_terms: [f64; 5],
}

impl Default for ClosedForm {
    fn default() -> Self {
        Self { d_terms: [1.0; 5] }
    }
}

impl ClosedForm {
    /// Scales term `index` (0 = `a⁸(1+b)²` … 4 = `b²ξ⁸`) of `D` by `factor`.
    pub fn with_scaled_d_term(index: usize, factor: f64) -> Result<Self> {
        if index >= 5 {
            return Err(Error::invalid("index", format!("D has five terms, got index {index}")));
        }
        let mut d_terms = [1.0; 5];
        d_terms[index] = factor;
        Ok(Self { d_terms })
    }

    pub fn is_genuine(&self) -> bool {
        self.d_terms == [1.0; 5]
    }

    pub fn d(&self, xi: f64, a: f64, b: f64) -> f64 {
        let (a2, x2) = (a * a, xi * xi);
        let (a4, x4) = (a2 * a2, x2 * x2);
        let m = &self.d_terms;
        m[0] * a4 * a4 * (1.0 + b) * (1.0 + b)
            + m[1] * a4 * a2 * (2.0 + b * (2.0 + 4.0 * b)) * x2
            + m[2] * a4 * (1.0 + b * (-2.0 + 6.0 * b)) * x4
            + m[3] * a2 * b * (-2.0 + 4.0 * b) * x4 * x2
            + m[4] * b * b * x4 * x4
    }

    /// `(A-integrand, B-integrand)` without the `e^{-ξ}` weight, packed as
    /// real and imaginary parts.
    pub fn rational(&self, xi: f64, a: f64, b: f64) -> Complex64 {
        let d = self.d(xi, a, b);
        Complex64::new(numerator_a(xi, a, b) / d, numerator_b(xi, a, b) / d)
    }
}

/// `D(ξ) = a⁸(1+b)² + a⁶(2+b(2+4b))ξ² + a⁴(1+b(−2+6b))ξ⁴ + a²b(−2+4b)ξ⁶ + b²ξ⁸`.
pub fn d_poly(xi: f64, a: f64, b: f64) -> f64 {
    ClosedForm::default().d(xi, a, b)
}

/// `a⁴(a⁴(1+b) − a²(1+6b)ξ² + bξ⁴)`.
pub fn numerator_a(xi: f64, a: f64, b: f64) -> f64 {
    let (a2, x2) = (a * a, xi * xi);
    a2 * a2 * (a2 * a2 * (1.0 + b) - a2 * (1.0 + 6.0 * b) * x2 + b * x2 * x2)
}

/// `−a⁷(2+4b)ξ + 4a⁵bξ³`.
pub fn numerator_b(xi: f64, a: f64, b: f64) -> f64 {
    let a2 = a * a;
    let a5 = a2 * a2 * a;
    -a5 * a2 * (2.0 + 4.0 * b) * xi + 4.0 * a5 * b * xi * xi * xi
}

/// How the `A`, `B` integrals are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuadratureRoute {
    /// Gauss–Laguerre with order doubling, adaptive Gauss–Kronrod if that
    /// does not converge.
    Auto,
    /// Gauss–Laguerre only; an error if orders up to 512 disagree.
    GaussLaguerre,
    /// Adaptive Gauss–Kronrod on `[0, 40]`.
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    /// `A(t)`, the `sin ω₀t` coefficient.
    pub a: f64,
    /// `B(t)`, the `cos ω₀t` coefficient.
    pub b: f64,
    /// Laguerre order that converged, or `None` for the adaptive route.
    pub laguerre_order: Option<usize>,
}

fn laguerre_estimate(form: &ClosedForm, a: f64, b: f64, n: usize) -> Complex64 {
    let rule = GaussLaguerre::cached(n);
    if a >= HEAD_SPLIT_BELOW {
        return rule.integrate(|xi| form.rational(xi, a, b));
    }
    // graded head [0, c] resolves the structure on scale a
    let c = (HEAD_EXTENT * a).max(HEAD_MIN);
    let legendre = GaussLegendre::cached((n / 2).min(128));
    let weighted = |xi: f64| form.rational(xi, a, b) * (-xi).exp();
    let mut edges = vec![c];
    while edges[edges.len() - 1] > a / 4.0 {
        edges.push(0.5 * edges[edges.len() - 1]);
    }
    edges.push(0.0);
    let head = edges
        .windows(2)
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, w| acc + legendre.integrate(w[1], w[0], weighted));
    let tail: Complex64 = rule.integrate_shifted(c, |xi| form.rational(xi, a, b));
    head + tail * (-c).exp()
}

fn components_agree(x: Complex64, y: Complex64, rel: f64) -> bool {
    let floor = 1e-15 * y.norm();
    (x.re - y.re).abs() <= rel * y.re.abs().max(floor) && (x.im - y.im).abs() <= rel * y.im.abs().max(floor)
}

fn laguerre_route(form: &ClosedForm, a: f64, b: f64) -> Option<(Complex64, usize)> {
    let mut previous = laguerre_estimate(form, a, b, LAGUERRE_ORDERS[0]);
    for &n in &LAGUERRE_ORDERS[1..] {
        let current = laguerre_estimate(form, a, b, n);
        if components_agree(previous, current, LAGUERRE_REL_TOL) {
            return Some((current, n));
        }
        previous = current;
    }
    None
}

fn adaptive_breakpoints(a: f64) -> Vec<f64> {
    let mut pts = vec![0.0];
    let mut x = a / 4.0;
    while x < 1.0 {
        pts.push(x);
        x *= 2.0;
    }
    pts.extend([1.0, 2.0, 5.0, 10.0, 20.0, ADAPTIVE_UPPER]);
    pts.dedup();
    pts
}

fn adaptive_route(form: &ClosedForm, a: f64, b: f64) -> Result<Complex64> {
    let pts = adaptive_breakpoints(a);
    let tol = Tolerance::relative(1e-13).with_abs(1e-300);
    let re = integrate_breakpoints(|xi| form.rational(xi, a, b).re * (-xi).exp(), &pts, tol)?.value;
    let im = integrate_breakpoints(|xi| form.rational(xi, a, b).im * (-xi).exp(), &pts, tol)?.value;
    Ok(Complex64::new(re, im))
}

/// `A` and `B` for dimensionless `omega_t = ω₀t > 0` and `ratio_sq = (ω₀/δ)² ≥ 0`.
pub fn coefficients_with(form: &ClosedForm, omega_t: f64, ratio_sq: f64, route: QuadratureRoute) -> Result<Coefficients> {
    ensure_positive("omega_t", omega_t)?;
    ensure_non_negative("ratio_sq", ratio_sq)?;
    let (a, b) = (omega_t, ratio_sq);
    let laguerre = || {
        laguerre_route(form, a, b).map(|(z, n)| Coefficients {
            a: z.re,
            b: z.im,
            laguerre_order: Some(n),
        })
    };
    let adaptive = || {
        adaptive_route(form, a, b).map(|z| Coefficients {
            a: z.re,
            b: z.im,
            laguerre_order: None,
        })
    };
    match route {
        QuadratureRoute::GaussLaguerre => laguerre().ok_or_else(|| {
            Error::Quadrature(format!("Gauss-Laguerre orders up to 512 disagree at a = {a:e}, b = {b:e}"))
        }),
        QuadratureRoute::Adaptive => adaptive(),
        QuadratureRoute::Auto => match laguerre() {
            Some(c) => Ok(c),
            None => adaptive(),
        },
    }
}

pub fn coefficients(p: &EvolutionParams, t: f64) -> Result<Coefficients> {
    ensure_positive("t", t)?;
    coefficients_with(&ClosedForm::default(), p.omega_t(t), p.ratio_sq(), QuadratureRoute::Auto)
}

/// `A(t)`.
pub fn coefficient_a(p: &EvolutionParams, t: f64) -> Result<f64> {
    Ok(coefficients(p, t)?.a)
}

/// `B(t)`.
pub fn coefficient_b(p: &EvolutionParams, t: f64) -> Result<f64> {
    Ok(coefficients(p, t)?.b)
}

/// Non-Markovian correction using a given closed form.
pub fn non_markovian_term_with(form: &ClosedForm, p: &EvolutionParams, t: f64) -> Result<f64> {
    ensure_non_negative("t", t)?;
    if t <= p.t_floor() || p.kappa == 0.0 {
        return Ok(0.0);
    }
    let a = p.omega_t(t);
    let c = coefficients_with(form, a, p.ratio_sq(), QuadratureRoute::Auto)?;
    let (s, co) = a.sin_cos();
    Ok(p.kappa / (p.omega0 * p.omega0 * t) * (c.a * s + c.b * co))
}

/// `κ/(ω₀² t) · (A sin ω₀t + B cos ω₀t)`; zero for `t ≤ 10⁻⁶/ω₀`.
pub fn non_markovian_term(p: &EvolutionParams, t: f64) -> Result<f64> {
    non_markovian_term_with(&ClosedForm::default(), p, t)
}

/// `lim_{t→0⁺}` of the closed-form correction:
/// `−(κ/ω₀)(1 − √b·atan(1/√b))`.
///
/// For small `a`, `A = O(a²)` while `B ≈ −a(1 − √b·atan(1/√b))`, so the
/// `1/t` prefactor leaves a finite offset. [`non_markovian_term`] jumps from
/// zero to about this value across `t_floor`.
pub fn non_markovian_small_time_limit(p: &EvolutionParams) -> f64 {
    let sb = p.ratio_sq().sqrt();
    let tail = if sb == 0.0 { 1.0 } else { 1.0 - sb * (1.0 / sb).atan() };
    -p.kappa / p.omega0 * tail
}

pub fn density_element(p: &EvolutionParams, t: f64) -> Result<f64> {
    Ok(evaluate_point(&ClosedForm::default(), p, t)?.total)
}

fn evaluate_point(form: &ClosedForm, p: &EvolutionParams, t: f64) -> Result<EvolutionPoint> {
    let markovian = markovian_term(p, t)?;
    let non_markovian = non_markovian_term_with(form, p, t)?;
    Ok(EvolutionPoint {
        t,
        markovian,
        non_markovian,
        total: markovian + non_markovian,
    })
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if let Some(bad) = grid.iter().find(|t| !t.is_finite() || **t < 0.0) {
        return Err(Error::invalid("grid", format!("times must be finite and >= 0, found {bad}")));
    }
    if let Some(i) = grid.windows(2).position(|w| w[1] < w[0]) {
        return Err(Error::invalid(
            "grid",
            format!("times must be ascending, {} follows {}", grid[i + 1], grid[i]),
        ));
    }
    Ok(())
}

/// Evaluates every time point (in parallel); output order matches input.
pub fn evolve_grid(p: &EvolutionParams, grid: &[f64]) -> Result<Vec<EvolutionPoint>> {
    evolve_grid_with(&ClosedForm::default(), p, grid)
}

pub fn evolve_grid_with(form: &ClosedForm, p: &EvolutionParams, grid: &[f64]) -> Result<Vec<EvolutionPoint>> {
    check_grid(grid)?;
    grid.par_iter().map(|&t| evaluate_point(form, p, t)).collect()
}

/// `points` equally spaced times on `[0, t_max]`.
pub fn uniform_grid(t_max: f64, points: usize) -> Result<Vec<f64>> {
    ensure_non_negative("t_max", t_max)?;
    if points < 2 {
        return Err(Error::invalid("points", format!("need at least 2, got {points}")));
    }
    let last = (points - 1) as f64;
    Ok((0..points).map(|i| t_max * (i as f64 / last)).collect())
}
