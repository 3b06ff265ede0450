//! The Lorentzian spectral density of the driving field,
//! `f(ω) = (δ/π) / (δ² + (ω − ω₀)²)` with half-width `δ`.

use std::f64::consts::{FRAC_1_PI, PI};

use num_complex::Complex64;

use crate::error::{ensure_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianLine {
    omega0: f64,
    delta: f64,
}

impl LorentzianLine {
    /// `omega0` is the line centre and `delta` the half-width, both in MeV.
    pub fn new(omega0: f64, delta: f64) -> Result<Self> {
        if !omega0.is_finite() {
            return Err(Error::invalid("omega0", format!("must be finite, got {omega0}")));
        }
        ensure_positive("delta", delta)?;
        Ok(Self { omega0, delta })
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Full width at half maximum `Δ = 2δ`.
    pub fn full_width(&self) -> f64 {
        2.0 * self.delta
    }

    pub fn peak(&self) -> f64 {
        FRAC_1_PI / self.delta
    }

    pub fn density(&self, omega: f64) -> f64 {
        let u = omega - self.omega0;
        (self.delta * FRAC_1_PI) / (self.delta * self.delta + u * u)
    }

    /// Analytic continuation of [`density`](Self::density) off the real axis;
    /// poles at `ω₀ ± iδ`.
    pub fn density_complex(&self, z: Complex64) -> Complex64 {
        let u = z - self.omega0;
        (self.delta * FRAC_1_PI) / (u * u + self.delta * self.delta)
    }

    /// Probability mass on `[a, b]` from the arctan antiderivative.
    /// Infinite limits are allowed.
    pub fn mass_between(&self, a: f64, b: f64) -> Result<f64> {
        if a.is_nan() || b.is_nan() {
            return Err(Error::invalid("interval", "limits must not be NaN"));
        }
        if a > b {
            return Err(Error::invalid("interval", format!("lower limit {a} exceeds upper limit {b}")));
        }
        let cdf = |x: f64| ((x - self.omega0) / self.delta).atan();
        Ok((cdf(b) - cdf(a)) / PI)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::Tolerance;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn peak_and_half_maximum() {
        let line = LorentzianLine::new(3.0, 0.5).unwrap();
        assert_relative_eq!(line.density(3.0), 1.0 / (PI * 0.5), max_relative = 1e-15);
        assert_relative_eq!(line.density(3.5), 1.0 / (2.0 * PI * 0.5), max_relative = 1e-15);
        assert_relative_eq!(line.density(2.5), 1.0 / (2.0 * PI * 0.5), max_relative = 1e-15);
        assert_eq!(line.density(3.0), line.peak());
        let wide = LorentzianLine::new(0.0, 2.0).unwrap();
        assert_relative_eq!(wide.density(0.0), 0.1591549430918953, max_relative = 1e-14);
    }

    #[test]
    fn mass_on_standard_intervals() {
        let line = LorentzianLine::new(1.0, 0.2).unwrap();
        assert_relative_eq!(line.mass_between(f64::NEG_INFINITY, f64::INFINITY).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(line.mass_between(f64::NEG_INFINITY, 1.0).unwrap(), 0.5, max_relative = 1e-15);
    }

    #[test]
    fn positive_half_line_mass_at_ratio_27() {
        // ω₀ = 27δ: 1 − atan(1/27)/π, recomputed by hand: atan(1/27) = 0.0370201...
        let line = LorentzianLine::new(27.0, 1.0).unwrap();
        let m = line.mass_between(0.0, f64::INFINITY).unwrap();
        let expected = 1.0 - (1.0f64 / 27.0).atan() / PI;
        assert_relative_eq!(m, expected, max_relative = 1e-15);
        assert!((m - 0.9882).abs() < 1e-4, "{m}");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(LorentzianLine::new(1.0, 0.0).is_err());
        assert!(LorentzianLine::new(1.0, -1.0).is_err());
        assert!(LorentzianLine::new(f64::NAN, 1.0).is_err());
        let line = LorentzianLine::new(0.0, 1.0).unwrap();
        assert!(line.mass_between(2.0, 1.0).is_err());
    }

    #[test]
    fn complex_density_agrees_on_real_axis() {
        let line = LorentzianLine::new(2.0, 0.3).unwrap();
        for x in [-1.0, 0.0, 1.7, 2.0, 5.0] {
            let z = line.density_complex(Complex64::new(x, 0.0));
            assert_relative_eq!(z.re, line.density(x), max_relative = 1e-14);
            assert!(z.im.abs() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn symmetric_about_centre(w0 in -10.0f64..10.0, d in 1e-3f64..10.0, x in 0.0f64..100.0) {
            let line = LorentzianLine::new(w0, d).unwrap();
            let (l, r) = (line.density(w0 - x), line.density(w0 + x));
            prop_assert!((l - r).abs() <= 4.0 * f64::EPSILON * l.max(r));
            prop_assert!(l > 0.0);
            prop_assert!(line.density(w0) >= l);
        }

        #[test]
        fn mass_matches_quadrature(w0 in -5.0f64..5.0, d in 0.01f64..3.0, a in -20.0f64..20.0, len in 0.0f64..30.0) {
            let line = LorentzianLine::new(w0, d).unwrap();
            let b = a + len;
            let exact = line.mass_between(a, b).unwrap();
            let mut pts = vec![a, b];
            if w0 > a && w0 < b { pts.insert(1, w0); }
            let q = crate::quadrature::integrate_breakpoints(|x| line.density(x), &pts, Tolerance::relative(1e-13)).unwrap();
            prop_assert!((q.value - exact).abs() <= 1e-10 * exact.abs().max(1e-300) + 1e-15, "{} vs {}", q.value, exact);
        }
    }
}
