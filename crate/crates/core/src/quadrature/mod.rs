//! Quadrature rules used throughout the crate.
//!
//! * [`gauss_kronrod`]: globally adaptive 10/21-point Gauss–Kronrod for real
//!   or complex integrands, with breakpoints and a semi-infinite mapping.
//! * [`gauss_legendre`]: fixed Gauss–Legendre rules of any order.
//! * [`gauss_laguerre`]: Gauss–Laguerre rules for `∫₀^∞ e^{-x} g(x) dx`.

pub mod gauss_kronrod;
pub mod gauss_laguerre;
pub mod gauss_legendre;

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

pub use gauss_kronrod::{integrate, integrate_breakpoints, integrate_semi_infinite, Estimate, Tolerance};
pub use gauss_laguerre::GaussLaguerre;
pub use gauss_legendre::GaussLegendre;

/// Values a quadrature can accumulate: real or complex scalars.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn zero() -> Self;
    fn norm(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }

    fn norm(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn norm(self) -> f64 {
        Complex64::norm(self)
    }
}
