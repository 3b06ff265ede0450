//! Independent checks of the closed-form non-Markovian term.
//!
//! * [`non_markovian_contour`] integrates the rotated-contour integrand
//!   `e^{-ξ} g(ξ)` with complex adaptive quadrature, before any reduction to
//!   the `A`, `B` polynomials.
//! * [`non_markovian_direct`] integrates the original oscillatory integral
//!   over `ω ∈ [0, Λ]` with the double pole moved off the axis by `iε`.
//!
//! The rotation from the positive real axis to the negative imaginary axis
//! sweeps across the Lorentzian pole at `ω₀ − iδ`. The direct integral
//! therefore equals the contour result plus [`lorentzian_pole_contribution`],
//! which is `O(e^{−δt})` and negligible once `δt ≳ 20`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{ensure_positive, Error, Result};
use crate::evolution::EvolutionParams;
use crate::numerics::richardson;
use crate::quadrature::{integrate, integrate_breakpoints, integrate_semi_infinite, GaussLegendre, Tolerance};

/// Smallest admissible `|(1 + b(1+iξ/a)²)(1+iξ/a)²|`.
pub const MIN_DENOMINATOR: f64 = 1e-12;

/// Points per panel in the direct oracle.
const DIRECT_ORDER: usize = 16;
const DIRECT_CHUNK: usize = 4096;
const CONTOUR_CUTOFF: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    epsilon: f64,
    cutoff_lambda: f64,
    tolerance: f64,
}

impl OracleConfig {
    /// `epsilon` and `cutoff_lambda` in MeV; `tolerance` is a relative target.
    pub fn new(p: &EvolutionParams, epsilon: f64, cutoff_lambda: f64, tolerance: f64) -> Result<Self> {
        ensure_positive("epsilon", epsilon)?;
        let floor = p.omega0() + 100.0 * p.delta();
        if !(cutoff_lambda.is_finite() && cutoff_lambda > floor) {
            return Err(Error::invalid(
                "cutoff_lambda",
                format!("must exceed omega0 + 100 delta = {floor:e}, got {cutoff_lambda:e}"),
            ));
        }
        if !(tolerance > 0.0 && tolerance <= 1e-4) {
            return Err(Error::invalid("tolerance", format!("must lie in (0, 1e-4], got {tolerance:e}")));
        }
        Ok(Self {
            epsilon,
            cutoff_lambda,
            tolerance,
        })
    }

    /// `ε = δ/100`, `Λ = ω₀ + 10⁴δ`, tolerance `1e-10`.
    pub fn for_params(p: &EvolutionParams) -> Self {
        Self {
            epsilon: p.delta() / 100.0,
            cutoff_lambda: p.omega0() + 1e4 * p.delta(),
            tolerance: 1e-10,
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn cutoff_lambda(&self) -> f64 {
        self.cutoff_lambda
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn with_epsilon(self, epsilon: f64) -> Result<Self> {
        ensure_positive("epsilon", epsilon)?;
        Ok(Self { epsilon, ..self })
    }

    pub fn with_cutoff(self, p: &EvolutionParams, cutoff_lambda: f64) -> Result<Self> {
        Self::new(p, self.epsilon, cutoff_lambda, self.tolerance)
    }
}

fn denominator(xi: f64, a: f64, b: f64) -> Complex64 {
    let z = Complex64::new(1.0, xi / a);
    let z2 = z * z;
    (1.0 + b * z2) * z2
}

/// `e^{-ξ} / [(1 + b(1+iξ/a)²)(1+iξ/a)²]`.
pub fn contour_integrand(xi: f64, a: f64, b: f64) -> Result<Complex64> {
    ensure_positive("a", a)?;
    if !(b >= 0.0 && b.is_finite()) {
        return Err(Error::invalid("b", format!("must be finite and >= 0, got {b}")));
    }
    if !(xi >= 0.0) {
        return Err(Error::invalid("xi", format!("must be >= 0, got {xi}")));
    }
    let den = denominator(xi, a, b);
    let modulus = den.norm();
    if modulus < MIN_DENOMINATOR {
        return Err(Error::SingularIntegrand { xi, modulus });
    }
    Ok((-xi).exp() / den)
}

/// Smallest `|denominator|` over `samples` log-spaced points of `[0, xi_max]`
/// (plus `ξ = 0`).
pub fn min_denominator_modulus(a: f64, b: f64, xi_max: f64, samples: usize) -> f64 {
    let lo = (a * 1e-6).min(xi_max).ln();
    let hi = xi_max.ln();
    let n = samples.max(2);
    (0..n)
        .map(|k| (lo + (hi - lo) * k as f64 / (n - 1) as f64).exp())
        .chain(std::iter::once(0.0))
        .map(|xi| denominator(xi, a, b).norm())
        .fold(f64::INFINITY, f64::min)
}

fn contour_breakpoints(a: f64, extra: &[f64]) -> Vec<f64> {
    let mut pts = vec![0.0, CONTOUR_CUTOFF];
    let mut x = a / 4.0;
    while x < CONTOUR_CUTOFF {
        pts.push(x);
        x *= 2.0;
    }
    pts.extend([1.0, 4.0, 16.0]);
    pts.extend(extra.iter().copied().filter(|x| *x > 0.0 && *x < CONTOUR_CUTOFF));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// `∫₀^∞ contour_integrand dξ`, split additionally at `extra` points.
pub fn contour_integral(a: f64, b: f64, extra: &[f64], rel_tol: f64) -> Result<Complex64> {
    contour_integrand(0.0, a, b)?;
    let tol = Tolerance::relative(rel_tol).with_abs(1e-300);
    let f = |xi: f64| contour_integrand(xi, a, b).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
    let head = integrate_breakpoints(f, &contour_breakpoints(a, extra), tol)?.value;
    let tail = integrate_semi_infinite(f, CONTOUR_CUTOFF, &[], tol.with_abs(1e-18 * head.norm()))?.value;
    let total = head + tail;
    if !(total.re.is_finite() && total.im.is_finite()) {
        return Err(Error::Quadrature(format!("contour integral not finite at a = {a:e}, b = {b:e}")));
    }
    Ok(total)
}

/// `(γ_pH₁/2)² · [−i e^{iω₀t}/(πδω₀²t) · I + c.c.]` with `I` from
/// [`contour_integral`]; the conjugate branch is integrated separately and
/// the imaginary remainder must stay below `cfg.tolerance`.
pub fn non_markovian_contour(p: &EvolutionParams, t: f64, cfg: &OracleConfig) -> Result<f64> {
    ensure_positive("t", t)?;
    let coupling = p.coupling_squared();
    if coupling == 0.0 {
        return Ok(0.0);
    }
    let (a, b) = (p.omega_t(t), p.ratio_sq());
    let forward = contour_integral(a, b, &[], cfg.tolerance)?;
    let tol = Tolerance::relative(cfg.tolerance).with_abs(1e-300);
    let conj_f = |xi: f64| contour_integrand(xi, a, b).map(|z| z.conj()).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
    let backward = integrate_breakpoints(conj_f, &contour_breakpoints(a, &[]), tol)?.value
        + integrate_semi_infinite(conj_f, CONTOUR_CUTOFF, &[], tol.with_abs(1e-18 * forward.norm()))?.value;

    let scale = coupling / (PI * p.delta() * p.omega0() * p.omega0() * t);
    let phase = Complex64::new(0.0, a).exp();
    let i = Complex64::i();
    let total = (-i * phase * forward + i * phase.conj() * backward) * scale;
    let magnitude = 2.0 * scale * forward.norm();
    if total.im.abs() > cfg.tolerance * magnitude.max(f64::MIN_POSITIVE) {
        return Err(Error::Quadrature(format!(
            "contour result not real at t = {t:e}: imaginary part {:e}",
            total.im
        )));
    }
    Ok(total.re)
}

/// `−(2γ/δ) e^{−δt}`: the residue of the Lorentzian pole at `ω₀ − iδ`
/// picked up between the real axis and the rotated contour.
pub fn lorentzian_pole_contribution(p: &EvolutionParams, t: f64) -> f64 {
    -2.0 * p.gamma() / p.delta() * (-p.delta() * t).exp()
}

fn direct_panels(lo: f64, hi: f64, epsilon: f64, period: f64) -> Vec<f64> {
    // graded towards the pole at u = 0, then one oscillation per panel
    let mut right = vec![0.0];
    let mut x = epsilon / 8.0;
    while x < period {
        right.push(x);
        x *= 2.0;
    }
    let mut left: Vec<f64> = right.iter().map(|u| -u).collect();
    let mut x = *right.last().unwrap_or(&0.0);
    while x + period < hi {
        x += period;
        right.push(x);
    }
    right.retain(|u| *u < hi);
    right.push(hi);
    let mut x = *left.last().unwrap_or(&0.0);
    while x - period > lo {
        x -= period;
        left.push(x);
    }
    left.retain(|u| *u > lo);
    left.push(lo);
    left.reverse();
    left.pop();
    left.extend(right);
    left
}

/// `(γ_pH₁/2)² · 2 Re ∫₀^Λ f(ω) e^{−i(ω−ω₀)t} / (ω−ω₀−iε)² dω` at the
/// configured `ε`.
///
/// Sixteen-point Gauss–Legendre panels, one oscillation period wide, graded
/// geometrically towards `ω₀`. Slow: the work grows like `Λt`.
pub fn non_markovian_direct(p: &EvolutionParams, t: f64, cfg: &OracleConfig) -> Result<f64> {
    ensure_positive("t", t)?;
    ensure_positive("epsilon", cfg.epsilon)?;
    let coupling = p.coupling_squared();
    if coupling == 0.0 {
        return Ok(0.0);
    }
    let (w0, d, eps) = (p.omega0(), p.delta(), cfg.epsilon);
    let period = (2.0 * PI / t).min(d);
    let pts = direct_panels(-w0, cfg.cutoff_lambda - w0, eps, period);
    let rule = GaussLegendre::cached(DIRECT_ORDER);
    let ie = Complex64::new(0.0, eps);
    let integrand = |u: f64| {
        let lorentz = (d / PI) / (d * d + u * u);
        let pole = u - ie;
        Complex64::new(0.0, -u * t).exp() * lorentz / (pole * pole)
    };
    let partial: Vec<Complex64> = pts
        .par_windows(2)
        .chunks(DIRECT_CHUNK)
        .map(|chunk| {
            chunk
                .iter()
                .fold(Complex64::new(0.0, 0.0), |acc, w| acc + rule.integrate(w[0], w[1], integrand))
        })
        .collect();
    let sum: Complex64 = partial.iter().sum();
    Ok(coupling * 2.0 * sum.re)
}

/// [`non_markovian_direct`] at `ε, ε/2, …` (`levels` values), extrapolated
/// to `ε → 0⁺`.
pub fn non_markovian_direct_extrapolated(p: &EvolutionParams, t: f64, cfg: &OracleConfig, levels: usize) -> Result<f64> {
    if levels == 0 {
        return Err(Error::invalid("levels", "need at least one epsilon"));
    }
    let values = (0..levels)
        .map(|k| {
            let c = cfg.with_epsilon(cfg.epsilon / 2f64.powi(k as i32))?;
            non_markovian_direct(p, t, &c)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(richardson(&values, 2.0))
}

/// `∫ |e^{−i(z−ω₀)t} f(z)/(z−ω₀)²| |dz|` over the quarter arc
/// `z = R e^{iθ}`, `θ ∈ [−π/2, 0]`.
///
/// This bounds the arc's share of the rotated integral; it must vanish as
/// `R → ∞`.
pub fn arc_decay_check(radius: f64, p: &EvolutionParams, t: f64) -> Result<f64> {
    ensure_positive("t", t)?;
    let (w0, d) = (p.omega0(), p.delta());
    if !(radius.is_finite() && radius > w0 + 10.0 * d) {
        return Err(Error::invalid(
            "radius",
            format!("must exceed omega0 + 10 delta = {:e}, got {radius:e}", w0 + 10.0 * d),
        ));
    }
    let modulus = |theta: f64| {
        let z = Complex64::from_polar(radius, theta);
        let u = z - w0;
        let lorentz = (d / PI) / (u * u + d * d);
        let damping = (z.im * t).exp();
        damping * (lorentz / (u * u)).norm() * radius
    };
    let tol = Tolerance::relative(1e-10).with_abs(1e-300);
    Ok(integrate(modulus, -FRAC_PI_2, 0.0, tol)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{coefficients_with, non_markovian_term, ClosedForm, QuadratureRoute};
    use crate::spectral::CouplingParams;
    use crate::units::{inverse_meter_to_mev, oersted_to_tesla, ParticleSpec};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn reference() -> EvolutionParams {
        let c = CouplingParams::from_fields(
            ParticleSpec::proton(),
            oersted_to_tesla(1e4),
            oersted_to_tesla(1e2),
            inverse_meter_to_mev(0.033),
        )
        .unwrap();
        EvolutionParams::from_coupling(&c).unwrap()
    }

    #[test]
    fn integrand_values() {
        for b in [0.0, 1.0, 729.0] {
            let v = contour_integrand(0.0, 1.0, b).unwrap();
            assert_relative_eq!(v.re, 1.0 / (1.0 + b), max_relative = 1e-15);
            assert_eq!(v.im, 0.0);
        }
        let v = contour_integrand(1.0, 1.0, 0.0).unwrap();
        assert!(v.re.abs() < 1e-16);
        assert_relative_eq!(v.im, -0.5 * (-1.0f64).exp(), max_relative = 1e-15);
        assert!(contour_integrand(1.0, 0.0, 1.0).is_err());
        assert!(contour_integrand(1.0, -1.0, 1.0).is_err());
        assert!(contour_integrand(-1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn denominator_stays_away_from_zero() {
        for b in [0.0, 0.5, 1.0, 2.0, 729.0, 1e6] {
            for a in [1e-2, 1.0, 1e4] {
                let m = min_denominator_modulus(a, b, 1e3, 20_000);
                assert!(m >= 1.0 - 1e-12, "a = {a}, b = {b}: {m}");
            }
        }
    }

    #[test]
    fn contour_matches_reference_integral() {
        let z = contour_integral(1.0, 0.0, &[], 1e-12).unwrap();
        assert_relative_eq!(z.re, 0.343377961556427032832533, max_relative = 1e-11);
        assert_relative_eq!(z.im, -0.378550375764186642360734, max_relative = 1e-11);
    }

    #[test]
    fn contour_agrees_with_closed_form() {
        let p = reference();
        let cfg = OracleConfig::for_params(&p);
        let envelope = non_markovian_term(&p, 1.01 * p.t_floor()).unwrap().abs();
        for a in [1e-3, 0.3, 2.0, 17.5, 400.0, 3000.0] {
            let t = a / p.omega0();
            let closed = non_markovian_term(&p, t).unwrap();
            let oracle = non_markovian_contour(&p, t, &cfg).unwrap();
            assert!((closed - oracle).abs() < 1e-8 * envelope, "a = {a}: {closed} vs {oracle}");
        }
    }

    #[test]
    fn contour_small_time_limit_is_finite() {
        let p = reference();
        let cfg = OracleConfig::for_params(&p);
        let limit = crate::evolution::non_markovian_small_time_limit(&p);
        let v = non_markovian_contour(&p, 1e-5 / p.omega0(), &cfg).unwrap();
        assert_relative_eq!(v, limit, max_relative = 1e-4);
    }

    #[test]
    fn zero_drive_gives_zero() {
        let p = EvolutionParams::new(reference().omega0(), reference().delta(), 0.0).unwrap();
        let cfg = OracleConfig::for_params(&p);
        assert_eq!(non_markovian_contour(&p, 1e14, &cfg).unwrap(), 0.0);
        assert_eq!(non_markovian_direct(&p, 1e14, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn config_validation() {
        let p = reference();
        let (w0, d) = (p.omega0(), p.delta());
        assert!(OracleConfig::new(&p, 0.0, w0 + 1e3 * d, 1e-8).is_err());
        assert!(OracleConfig::new(&p, d, w0 + 50.0 * d, 1e-8).is_err());
        assert!(OracleConfig::new(&p, d, w0 + 1e3 * d, 0.0).is_err());
        assert!(OracleConfig::new(&p, d, w0 + 1e3 * d, 1e-3).is_err());
        assert!(OracleConfig::new(&p, d, w0 + 1e3 * d, 1e-4).is_ok());
        assert!(non_markovian_contour(&p, 0.0, &OracleConfig::for_params(&p)).is_err());
        assert!(non_markovian_direct(&p, -1.0, &OracleConfig::for_params(&p)).is_err());
    }

    #[test]
    fn panels_are_ordered_and_cover_range() {
        let pts = direct_panels(-27.0, 1e3, 0.01, 0.05);
        assert_eq!(pts[0], -27.0);
        assert_eq!(*pts.last().unwrap(), 1e3);
        assert!(pts.windows(2).all(|w| w[1] > w[0] && w[1] - w[0] <= 0.05 + 1e-12));
        assert!(pts.contains(&0.0));
    }

    #[test]
    fn direct_equals_contour_plus_pole_at_early_times() {
        let p = reference();
        let cfg = OracleConfig::for_params(&p);
        for dt in [0.5, 2.0] {
            let t = dt / p.delta();
            let direct = non_markovian_direct_extrapolated(&p, t, &cfg, 3).unwrap();
            let expected = non_markovian_contour(&p, t, &cfg).unwrap() + lorentzian_pole_contribution(&p, t);
            assert!((direct - expected).abs() < 1e-4 * expected.abs(), "δt = {dt}: {direct} vs {expected}");
        }
    }

    #[test]
    fn direct_matches_contour_at_mid_range() {
        let p = reference();
        let cfg = OracleConfig::for_params(&p);
        let t = 0.5 * 5.0 * p.relaxation_time();
        let c = coefficients_with(&ClosedForm::default(), p.omega_t(t), p.ratio_sq(), QuadratureRoute::Auto).unwrap();
        let amplitude = p.kappa() / (p.omega0() * p.omega0() * t) * c.a.hypot(c.b);
        let contour = non_markovian_contour(&p, t, &cfg).unwrap();
        let direct = non_markovian_direct(&p, t, &cfg).unwrap();
        assert!((direct - contour).abs() < 0.01 * amplitude, "{direct} vs {contour}");
    }

    #[test]
    fn arc_bound_decays() {
        let p = reference();
        let t = 10.0 / p.omega0();
        let mut r = p.omega0() + 20.0 * p.delta();
        let mut last = arc_decay_check(r, &p, t).unwrap();
        assert!(last.is_finite() && last > 0.0);
        for _ in 0..12 {
            r *= 2.0;
            let next = arc_decay_check(r, &p, t).unwrap();
            assert!(next < last);
            last = next;
        }
        let r = 2.0 * p.omega0();
        assert!(arc_decay_check(r, &p, 2.0 * t).unwrap() < arc_decay_check(r, &p, t).unwrap());
        assert!(arc_decay_check(p.omega0(), &p, t).is_err());
        assert!(arc_decay_check(r, &p, 0.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn contour_integral_is_additive(a in 1e-2f64..1e3, b in prop_oneof![Just(0.0), Just(729.0), 0.0f64..1e3], s in 0.0f64..40.0, s2 in 0.0f64..5.0) {
            let base = contour_integral(a, b, &[], 1e-12).unwrap();
            let split = contour_integral(a, b, &[s, s2], 1e-12).unwrap();
            prop_assert!((base - split).norm() <= 1e-10 * base.norm());
        }
    }
}
