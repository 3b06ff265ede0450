//! Relaxation of a spin-1/2 magnetic moment in a static field `H_z` driven by a
//! weak rotating field `H_1` whose spectrum is a Lorentzian line.
//!
//! All internal quantities use natural units (`ħ = c = 1`): energies in MeV and
//! times in MeV⁻¹. Conversions to laboratory units live in [`units`].
//!
//! The crate is organised bottom-up:
//!
//! * [`units`]: constants table, particle presets, unit conversions.
//! * [`lineshape`]: the Lorentzian spectral density `f(ω)`.
//! * [`spectral`]: decay width, transition rate, principal-value shift and the
//!   ε-regularised collision element.
//! * [`evolution`]: the population `⟨−1/2|ρ(t)|−1/2⟩` as a Markovian
//!   exponential plus the closed-form non-Markovian correction.
//! * [`oracle`]: independent quadratures that check the closed form.
//! * [`quadrature`]: Gauss–Kronrod, Gauss–Legendre and Gauss–Laguerre rules.

pub mod error;
pub mod evolution;
pub mod lineshape;
pub mod numerics;
pub mod oracle;
pub mod quadrature;
pub mod spectral;
pub mod units;

pub use error::{Error, Result};
pub use num_complex;
pub use evolution::{EvolutionParams, EvolutionPoint};
pub use lineshape::LorentzianLine;
pub use oracle::OracleConfig;
pub use spectral::{CouplingParams, LowerLimit, SpectralResult};
pub use units::{ChargeSign, ParticleSpec, Quantity};
