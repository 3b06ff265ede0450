//! Physical constants and conversions between natural units (MeV, MeV⁻¹)
//! and laboratory units (Oe, T, s, m⁻¹, Hz).
//!
//! Every constant used anywhere in the crate is defined in [`constants`].

use std::fmt;
use std::ops::{Div, Mul, Neg};

use crate::error::{ensure_positive, Error, Result};

/// The single constants table.
pub mod constants {
    /// Nuclear magneton μ_N in MeV/T.
    pub const NUCLEAR_MAGNETON_MEV_PER_T: f64 = 3.15245e-14;
    /// Reduced Planck constant ħ in MeV·s.
    pub const HBAR_MEV_S: f64 = 6.582119569e-22;
    /// ħc in MeV·m.
    pub const HBAR_C_MEV_M: f64 = 1.973269804e-13;
    /// Tesla per Oersted (Oe treated as Gauss).
    pub const TESLA_PER_OERSTED: f64 = 1e-4;
    /// Proton rest energy in MeV.
    pub const PROTON_MASS_MEV: f64 = 938.27;
    /// Proton g-factor.
    pub const PROTON_G_FACTOR: f64 = 5.58;
}

use constants::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChargeSign {
    Positive,
    Negative,
}

impl ChargeSign {
    pub fn as_f64(self) -> f64 {
        match self {
            ChargeSign::Positive => 1.0,
            ChargeSign::Negative => -1.0,
        }
    }
}

/// Spin-1/2 carrier: rest energy, g-factor and sign of the charge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleSpec {
    mass_mev: f64,
    g_factor: f64,
    charge: ChargeSign,
}

impl ParticleSpec {
    pub fn new(mass_mev: f64, g_factor: f64, charge: ChargeSign) -> Result<Self> {
        ensure_positive("mass", mass_mev)?;
        if !g_factor.is_finite() || g_factor < 0.0 {
            return Err(Error::invalid(
                "g_factor",
                format!("must be finite and >= 0, got {g_factor}"),
            ));
        }
        Ok(Self {
            mass_mev,
            g_factor,
            charge,
        })
    }

    /// Proton preset: 938.27 MeV, g = 5.58, positive charge.
    pub fn proton() -> Self {
        Self {
            mass_mev: PROTON_MASS_MEV,
            g_factor: PROTON_G_FACTOR,
            charge: ChargeSign::Positive,
        }
    }

    /// Looks up a named preset. Only `"proton"` is known.
    pub fn preset(name: &str) -> Option<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "proton" | "p" => Some(Self::proton()),
            _ => None,
        }
    }

    pub fn mass_mev(&self) -> f64 {
        self.mass_mev
    }

    pub fn g_factor(&self) -> f64 {
        self.g_factor
    }

    pub fn charge(&self) -> ChargeSign {
        self.charge
    }

    pub fn is_proton(&self) -> bool {
        *self == Self::proton()
    }
}

/// Gyromagnetic ratio `γ_p = g e / 2m` in MeV/T.
///
/// Expressed through the nuclear magneton scaled by `m_proton / m`, so the
/// proton preset gives exactly `g · μ_N`. The magnitude is returned; the sign
/// of the charge only sets the sense of precession, which the rates do not
/// depend on.
pub fn gyromagnetic_ratio(p: &ParticleSpec) -> f64 {
    p.g_factor * NUCLEAR_MAGNETON_MEV_PER_T * (PROTON_MASS_MEV / p.mass_mev)
}

/// Level splitting `ω₀ = γ_p H_z` in MeV for a static field in tesla.
pub fn larmor_frequency(p: &ParticleSpec, hz_tesla: f64) -> f64 {
    debug_assert!(hz_tesla >= 0.0, "static field must be non-negative");
    gyromagnetic_ratio(p) * hz_tesla
}

pub fn oersted_to_tesla(h_oe: f64) -> f64 {
    h_oe * TESLA_PER_OERSTED
}

pub fn tesla_to_oersted(h_t: f64) -> f64 {
    h_t / TESLA_PER_OERSTED
}

/// Inverse length to energy through ħc.
pub fn inverse_meter_to_mev(x: f64) -> f64 {
    x * HBAR_C_MEV_M
}

pub fn mev_to_inverse_meter(e: f64) -> f64 {
    e / HBAR_C_MEV_M
}

/// Natural time (MeV⁻¹) to seconds through ħ.
pub fn mev_inverse_to_seconds(t: f64) -> f64 {
    t * HBAR_MEV_S
}

pub fn seconds_to_mev_inverse(s: f64) -> f64 {
    s / HBAR_MEV_S
}

/// Energy to angular frequency in rad/s.
pub fn mev_to_angular_frequency(e: f64) -> f64 {
    e / HBAR_MEV_S
}

/// Energy to ordinary frequency in Hz.
pub fn mev_to_hertz(e: f64) -> f64 {
    mev_to_angular_frequency(e) / std::f64::consts::TAU
}

/// Physical dimension as integer exponents of energy and magnetic field.
///
/// Time is energy⁻¹ in natural units, and a gyromagnetic ratio is
/// energy·field⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dimension {
    pub energy: i8,
    pub field: i8,
}

impl Dimension {
    pub const DIMENSIONLESS: Dimension = Dimension { energy: 0, field: 0 };
    pub const ENERGY: Dimension = Dimension { energy: 1, field: 0 };
    pub const TIME: Dimension = Dimension { energy: -1, field: 0 };
    pub const MAGNETIC_FIELD: Dimension = Dimension { energy: 0, field: 1 };
    pub const MOMENT_PER_FIELD: Dimension = Dimension { energy: 1, field: -1 };

    fn inverse(self) -> Dimension {
        Dimension {
            energy: -self.energy,
            field: -self.field,
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let part = |unit: &str, exp: i8| match exp {
            0 => String::new(),
            1 => unit.to_string(),
            e => format!("{unit}^{e}"),
        };
        let s = [part("MeV", self.energy), part("T", self.field)]
            .into_iter()
            .filter(|s| !s.is_empty())
            .collect::<Vec<_>>()
            .join("·");
        if s.is_empty() {
            f.write_str("1")
        } else {
            f.write_str(&s)
        }
    }
}

/// A value tagged with its dimension (natural units: MeV and T).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity {
    pub value: f64,
    pub dimension: Dimension,
}

impl Quantity {
    pub fn new(value: f64, dimension: Dimension) -> Self {
        Self { value, dimension }
    }

    pub fn energy(mev: f64) -> Self {
        Self::new(mev, Dimension::ENERGY)
    }

    pub fn time(inverse_mev: f64) -> Self {
        Self::new(inverse_mev, Dimension::TIME)
    }

    pub fn field(tesla: f64) -> Self {
        Self::new(tesla, Dimension::MAGNETIC_FIELD)
    }

    pub fn dimensionless(x: f64) -> Self {
        Self::new(x, Dimension::DIMENSIONLESS)
    }

    fn same_dimension(&self, other: &Quantity) -> Result<()> {
        if self.dimension == other.dimension {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                left: self.dimension.to_string(),
                right: other.dimension.to_string(),
            })
        }
    }

    pub fn checked_add(self, other: Quantity) -> Result<Quantity> {
        self.same_dimension(&other)?;
        Ok(Quantity::new(self.value + other.value, self.dimension))
    }

    pub fn checked_sub(self, other: Quantity) -> Result<Quantity> {
        self.same_dimension(&other)?;
        Ok(Quantity::new(self.value - other.value, self.dimension))
    }

    /// Returns the value if the quantity has the expected dimension.
    pub fn expect(self, dimension: Dimension) -> Result<f64> {
        self.same_dimension(&Quantity::new(0.0, dimension))?;
        Ok(self.value)
    }
}

impl Mul for Quantity {
    type Output = Quantity;

    fn mul(self, rhs: Quantity) -> Quantity {
        Quantity::new(
            self.value * rhs.value,
            Dimension {
                energy: self.dimension.energy + rhs.dimension.energy,
                field: self.dimension.field + rhs.dimension.field,
            },
        )
    }
}

impl Div for Quantity {
    type Output = Quantity;

    fn div(self, rhs: Quantity) -> Quantity {
        let inv = Quantity::new(1.0 / rhs.value, rhs.dimension.inverse());
        self * inv
    }
}

impl Neg for Quantity {
    type Output = Quantity;

    fn neg(self) -> Quantity {
        Quantity::new(-self.value, self.dimension)
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} {}", self.value, self.dimension)
    }
}
