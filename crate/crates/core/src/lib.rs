//! Analysis and simulation toolkit for trapped-ion motional heating measurements.
//!
//! The crate covers the full inference chain used in sideband-ratio thermometry:
//!
//! - [`thermal`] / [`sideband`]: thermal motional states and the red/blue
//!   sideband excitation lineshapes that form the forward model of the
//!   measurement.
//! - [`scan`] / [`heating`]: weighted lineshape fits with projection-noise
//!   errors, occupation extraction from sideband amplitude ratios, heating-rate
//!   linear fits, and segmented power-law fits in temperature.
//! - [`noise`]: conversions between heating rate and electric-field noise
//!   spectral density, distance/frequency normalizations, Johnson and voltage
//!   noise bounds, and heating-limited gate-error estimates.
//! - [`collisions`]: apparent heating from rare elastic collisions with
//!   background gas, elastic-rate/density inversion, Langevin rates, collision
//!   energy-transfer bounds, and the lifetime-based safety check.
//! - [`sim`]: a seeded, bit-reproducible Monte-Carlo generator of synthetic
//!   sideband scan datasets for end-to-end validation of the inference chain.
//!
//! All functions are pure; nothing holds shared mutable state.

pub mod collisions;
pub mod constants;
pub mod error;
#[cfg(test)]
pub(crate) mod testutil;
pub mod fitting;
pub mod heating;
pub mod noise;
pub mod rng;
pub mod scan;
pub mod sideband;
pub mod sim;
pub mod species;
pub mod thermal;

pub use constants::Constants;
pub use error::{Error, Result};
pub use sideband::Sideband;
pub use species::{GasSpecies, IonSpecies, TrapConfig};
pub use thermal::ThermalState;
