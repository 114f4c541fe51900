//! Shared fixtures for unit tests.

use crate::rng::SplitMix64;
use crate::species::{GasSpecies, IonSpecies, TrapConfig};

pub fn sr88() -> IonSpecies {
    IonSpecies {
        name: "Sr-88".into(),
        mass_amu: 87.905_612,
        charge: 1,
        probe_wavelength_m: 674e-9,
    }
}

pub fn trap_1p32mhz() -> TrapConfig {
    TrapConfig {
        species: sr88(),
        axial_frequency_hz: 1.32e6,
        ion_electrode_distance_m: 50e-6,
        electrode_temperature_k: 4.0,
        beam_projection: 1.0,
        lamb_dicke: None,
        trap_id: "test".into(),
    }
}

pub fn hydrogen(temperature_k: f64) -> GasSpecies {
    GasSpecies {
        name: "H2".into(),
        mass_amu: 2.015_88,
        polarizability_cm3: 0.8045e-24,
        temperature_k,
    }
}

pub fn nitrogen(temperature_k: f64) -> GasSpecies {
    GasSpecies {
        name: "N2".into(),
        mass_amu: 28.0134,
        polarizability_cm3: 1.7403e-24,
        temperature_k,
    }
}

pub fn oxygen(temperature_k: f64) -> GasSpecies {
    GasSpecies {
        name: "O2".into(),
        mass_amu: 31.9988,
        polarizability_cm3: 1.5812e-24,
        temperature_k,
    }
}

/// Standard normal via Box-Muller, deterministic given the generator state.
pub fn normal(rng: &mut SplitMix64) -> f64 {
    let mut u1 = rng.next_f64();
    if u1 <= 0.0 {
        u1 = f64::MIN_POSITIVE;
    }
    let u2 = rng.next_f64();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
