//! Decay width, transition rate and energy renormalisation of the `−1/2`
//! level, plus the ε-regularised collision element whose `ε → 0⁺` limit is
//! `−2iγ`.
//!
//! Every use of the line profile goes through [`LorentzianLine::density`]; the
//! squared coupling profile `g²(ω)` is the same function.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::lineshape::LorentzianLine;
use crate::numerics::richardson;
use crate::quadrature::{integrate_breakpoints, integrate_semi_infinite, Tolerance};
use crate::units::{gyromagnetic_ratio, larmor_frequency, ParticleSpec};

/// The rotating field should stay well below the static one.
const WEAK_FIELD_RATIO: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingParams {
    particle: ParticleSpec,
    h1_tesla: f64,
    line: LorentzianLine,
}

impl CouplingParams {
    pub fn new(particle: ParticleSpec, h1_tesla: f64, line: LorentzianLine) -> Result<Self> {
        ensure_non_negative("h1", h1_tesla)?;
        Ok(Self {
            particle,
            h1_tesla,
            line,
        })
    }

    /// Builds the line from the static field: centre `γ_p H_z`, half-width `delta_mev`.
    pub fn from_fields(particle: ParticleSpec, hz_tesla: f64, h1_tesla: f64, delta_mev: f64) -> Result<Self> {
        ensure_non_negative("hz", hz_tesla)?;
        let omega0 = larmor_frequency(&particle, hz_tesla);
        let line = LorentzianLine::new(omega0, delta_mev)?;
        Self::new(particle, h1_tesla, line)
    }

    pub fn particle(&self) -> &ParticleSpec {
        &self.particle
    }

    pub fn h1_tesla(&self) -> f64 {
        self.h1_tesla
    }

    pub fn line(&self) -> &LorentzianLine {
        &self.line
    }

    pub fn omega0(&self) -> f64 {
        self.line.omega0()
    }

    /// Squared matrix element `(γ_p H₁ / 2)²` in MeV².
    pub fn coupling_squared(&self) -> f64 {
        let half = 0.5 * gyromagnetic_ratio(&self.particle) * self.h1_tesla;
        half * half
    }

    /// Message when `H₁` leaves the weak-drive regime (`H₁ > 0.1 H_z`).
    pub fn validity_warning(&self) -> Option<String> {
        let gp = gyromagnetic_ratio(&self.particle);
        if gp <= 0.0 {
            return None;
        }
        let hz = self.line.omega0() / gp;
        (self.h1_tesla > WEAK_FIELD_RATIO * hz).then(|| {
            format!(
                "H1 = {:e} T exceeds {WEAK_FIELD_RATIO} x Hz = {:e} T; the weak-drive results may not apply",
                self.h1_tesla,
                WEAK_FIELD_RATIO * hz
            )
        })
    }
}

/// Which part of the frequency axis the principal-value integral covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LowerLimit {
    NegativeInfinity,
    Zero,
}

/// Physical content of the complex eigenvalue `Z = Ē − iγ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralResult {
    /// Decay width γ (MeV).
    pub gamma: f64,
    /// Transition rate at resonance, `W = 2γ` (MeV).
    pub rate_w: f64,
    /// Renormalisation `Ē − E` of the `−1/2` level (MeV).
    pub energy_shift: f64,
}

impl SpectralResult {
    pub fn compute(c: &CouplingParams, lower_limit: LowerLimit) -> Result<Self> {
        Ok(Self {
            gamma: decay_width(c),
            rate_w: transition_rate(c, c.omega0()),
            energy_shift: energy_shift_pv(c, lower_limit)?,
        })
    }

    /// Complex eigenvalue offset `Z − E = shift − iγ`.
    pub fn eigenvalue_offset(&self) -> Complex64 {
        Complex64::new(self.energy_shift, -self.gamma)
    }
}

/// `(π/4) γ_p² H₁² f(ω)`: the golden-rule kernel shared by γ and W.
fn golden_rule_kernel(c: &CouplingParams, omega: f64) -> f64 {
    PI * c.coupling_squared() * c.line.density(omega)
}

/// γ₋₁/₂ = (π/4) γ_p² H₁² f(ω₀) = γ_p² H₁² / (4δ).
pub fn decay_width(c: &CouplingParams) -> f64 {
    golden_rule_kernel(c, c.omega0())
}

/// W(ω) = (π/2) γ_p² H₁² f(ω); equals `2 · decay_width` at ω₀.
pub fn transition_rate(c: &CouplingParams, omega: f64) -> f64 {
    2.0 * golden_rule_kernel(c, omega)
}

/// Level shift `−(γ_p H₁/2)² · PV∫ f(ω)/(ω − ω₀) dω`.
///
/// The pole is handled by pairing `ω₀ ± u`: the integrand
/// `[f(ω₀+u) − f(ω₀−u)]/u` is regular at `u = 0`. For the half line the
/// unpaired piece `u > ω₀` is added separately.
pub fn energy_shift_pv(c: &CouplingParams, lower_limit: LowerLimit) -> Result<f64> {
    let coupling = c.coupling_squared();
    if coupling == 0.0 {
        return Ok(0.0);
    }
    let line = c.line;
    let w0 = line.omega0();
    let d = line.delta();
    let paired = |u: f64| {
        if u == 0.0 {
            0.0
        } else {
            (line.density(w0 + u) - line.density(w0 - u)) / u
        }
    };
    // absolute floor: the PV integral is O(1/δ) at most
    let tol = Tolerance::relative(1e-12).with_abs(1e-15 / d);
    let pv = match lower_limit {
        LowerLimit::NegativeInfinity => {
            integrate_semi_infinite(paired, 0.0, &[d, 10.0 * d, 100.0 * d], tol)?.value
        }
        LowerLimit::Zero => {
            if w0 <= 0.0 {
                return Err(Error::invalid(
                    "omega0",
                    format!("half-line principal value needs omega0 > 0, got {w0}"),
                ));
            }
            let mut pts: Vec<f64> = [0.0, d, 10.0 * d, 100.0 * d]
                .into_iter()
                .filter(|&u| u < w0)
                .collect();
            pts.push(w0);
            let inner = integrate_breakpoints(paired, &pts, tol)?.value;
            let tail = integrate_semi_infinite(|u: f64| line.density(w0 + u) / u, w0, &[2.0 * w0], tol)?.value;
            inner + tail
        }
    };
    Ok(-coupling * pv)
}

/// `(γ_p H₁/2)² ∫ f(ω) [1/(ω−ω₀+iε) − 1/(ω−ω₀−iε)] dω` over the real line.
///
/// Breakpoints are placed geometrically around the pole starting at
/// `min(ε, δ)/8`. Tends to `−2iγ` as `ε → 0⁺`.
pub fn collision_element(c: &CouplingParams, epsilon: f64) -> Result<Complex64> {
    ensure_positive("epsilon", epsilon)?;
    let coupling = c.coupling_squared();
    if coupling == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let line = c.line;
    let w0 = line.omega0();
    let d = line.delta();
    let eps = Complex64::new(0.0, epsilon);
    let integrand = |u: f64| {
        let resolvent = 1.0 / (u + eps) - 1.0 / (u - eps);
        resolvent * line.density(w0 + u)
    };

    let scale = epsilon.max(d);
    let outer = 256.0 * scale;
    let mut step = epsilon.min(d) / 8.0;
    let mut positive = vec![0.0];
    while step < outer {
        positive.push(step);
        step *= 2.0;
    }
    positive.push(outer);
    let mut pts: Vec<f64> = positive.iter().rev().map(|&u| -u).collect();
    pts.extend_from_slice(&positive[1..]);

    // magnitude of the result is ~ 2/(δ + ε)
    let tol = Tolerance::relative(1e-12).with_abs(1e-16 / scale);
    let centre = integrate_breakpoints(integrand, &pts, tol)?.value;
    let right = integrate_semi_infinite(integrand, outer, &[], tol)?.value;
    let left = integrate_semi_infinite(|u: f64| integrand(-u), outer, &[], tol)?.value;
    Ok((centre + right + left) * coupling)
}

/// `ε → 0⁺` limit of [`collision_element`] by Richardson extrapolation over
/// `ε₀, ε₀/10, …` (`levels` values).
pub fn collision_element_limit(c: &CouplingParams, epsilon0: f64, levels: usize) -> Result<Complex64> {
    ensure_positive("epsilon0", epsilon0)?;
    if levels == 0 {
        return Err(Error::invalid("levels", "need at least one epsilon"));
    }
    let values = (0..levels)
        .map(|k| collision_element(c, epsilon0 / 10f64.powi(k as i32)))
        .collect::<Result<Vec<_>>>()?;
    Ok(richardson(&values, 10.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{inverse_meter_to_mev, oersted_to_tesla, ChargeSign};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn reference() -> CouplingParams {
        CouplingParams::from_fields(
            ParticleSpec::proton(),
            oersted_to_tesla(1e4),
            oersted_to_tesla(1e2),
            inverse_meter_to_mev(0.033),
        )
        .unwrap()
    }

    fn with_h1(c: &CouplingParams, h1: f64) -> CouplingParams {
        CouplingParams::new(*c.particle(), h1, *c.line()).unwrap()
    }

    #[test]
    fn reference_decay_width() {
        // one-line recomputation: (5.58 · 3.15245e-14 · 0.01)² / (4 · 0.033 · 1.973269804e-13)
        let gp: f64 = 5.58 * 3.15245e-14;
        let expected = (gp * 0.01).powi(2) / (4.0 * 0.033 * 1.973269804e-13);
        let g = decay_width(&reference());
        assert_relative_eq!(g, expected, max_relative = 1e-13);
        assert!((g - 1.19e-16).abs() < 0.01e-16, "{g}");
    }

    #[test]
    fn width_scaling_and_zero_drive() {
        let c = reference();
        assert_eq!(decay_width(&with_h1(&c, 0.0)), 0.0);
        assert_eq!(transition_rate(&with_h1(&c, 0.0), c.omega0()), 0.0);
        assert_relative_eq!(decay_width(&with_h1(&c, 0.02)), 4.0 * decay_width(&c), max_relative = 1e-14);
    }

    #[test]
    fn rate_off_resonance() {
        let c = reference();
        let w0 = c.omega0();
        let d = c.line().delta();
        assert_eq!(transition_rate(&c, w0), 2.0 * decay_width(&c));
        assert_relative_eq!(transition_rate(&c, w0 + d), decay_width(&c), max_relative = 1e-12);
        assert_relative_eq!(transition_rate(&c, w0 - d), decay_width(&c), max_relative = 1e-12);
    }

    #[test]
    fn pv_shift_full_line_vanishes() {
        let c = reference();
        let shift = energy_shift_pv(&c, LowerLimit::NegativeInfinity).unwrap();
        let scale = c.coupling_squared() / c.line().delta();
        assert!(shift.abs() <= 1e-12 * scale, "{shift}");
    }

    #[test]
    fn pv_shift_half_line_matches_closed_form() {
        // PV∫₀^∞ f/(ω−ω₀) dω = ln(1 + δ²/ω₀²) / (2πδ), so the shift is −γ ln(1 + δ²/ω₀²)/(2π)
        let c = reference();
        let (w0, d) = (c.omega0(), c.line().delta());
        let expected = -c.coupling_squared() * (d * d / (w0 * w0)).ln_1p() / (2.0 * PI * d);
        let shift = energy_shift_pv(&c, LowerLimit::Zero).unwrap();
        assert_relative_eq!(shift, expected, max_relative = 1e-9);
        assert!(shift < 0.0 && shift.abs() < 1e-2 * decay_width(&c));
    }

    #[test]
    fn pv_shift_edge_cases() {
        let c = reference();
        assert_eq!(energy_shift_pv(&with_h1(&c, 0.0), LowerLimit::Zero).unwrap(), 0.0);
        let line = LorentzianLine::new(-1.0, 0.1).unwrap();
        let bad = CouplingParams::new(ParticleSpec::proton(), 1.0, line).unwrap();
        assert!(energy_shift_pv(&bad, LowerLimit::Zero).is_err());
        assert!(energy_shift_pv(&bad, LowerLimit::NegativeInfinity).is_ok());
    }

    #[test]
    fn collision_element_at_finite_epsilon() {
        // Lorentzian ⊗ Lorentzian: exact value −2iγ δ/(δ + ε)
        let c = reference();
        let d = c.line().delta();
        let g = decay_width(&c);
        for eps in [d / 10.0, d / 100.0] {
            let z = collision_element(&c, eps).unwrap();
            assert_relative_eq!(z.im, -2.0 * g * d / (d + eps), max_relative = 1e-10);
            assert!(z.re.abs() < 1e-3 * g);
        }
        let z = collision_element(&c, d / 100.0).unwrap();
        assert!((z.im / (-2.0 * g) - 1.0).abs() < 0.02);
    }

    #[test]
    fn collision_element_errors_and_zero() {
        let c = reference();
        assert!(collision_element(&c, 0.0).is_err());
        assert!(collision_element(&c, -1.0).is_err());
        assert_eq!(collision_element(&with_h1(&c, 0.0), 1e-16).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn weak_field_warning() {
        let c = reference();
        assert!(c.validity_warning().is_none());
        assert!(with_h1(&c, 0.5).validity_warning().is_some());
    }

    #[test]
    fn spectral_result_bundle() {
        let c = reference();
        let r = SpectralResult::compute(&c, LowerLimit::Zero).unwrap();
        assert_eq!(r.rate_w, 2.0 * r.gamma);
        assert_eq!(r.eigenvalue_offset().im, -r.gamma);
    }

    #[test]
    fn rate_module_has_no_private_lorentzian() {
        let src = include_str!("spectral.rs");
        let body = src.split("#[cfg(test)]").next().unwrap();
        assert!(body.contains("line.density("));
        assert!(!body.contains("FRAC_1_PI"));
        assert!(!body.contains("delta * delta"));
    }

    proptest! {
        #[test]
        fn width_scales_exactly(h1 in 1e-6f64..1.0, k in 0.1f64..10.0, d in 1e-16f64..1e-13, g in 0.5f64..6.0) {
            let p = ParticleSpec::new(938.27, g, ChargeSign::Positive).unwrap();
            let c = CouplingParams::from_fields(p, 1.0, h1, d).unwrap();
            let ck = CouplingParams::from_fields(p, 1.0, k * h1, d).unwrap();
            let cd = CouplingParams::from_fields(p, 1.0, h1, k * d).unwrap();
            let base = decay_width(&c);
            prop_assert!(base >= 0.0);
            prop_assert!((decay_width(&ck) / (k * k * base) - 1.0).abs() < 1e-13);
            prop_assert!((decay_width(&cd) * k / base - 1.0).abs() < 1e-13);
        }
    }
}
