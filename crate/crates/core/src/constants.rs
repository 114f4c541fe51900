use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical constants in SI units.
///
/// Defaults are the 2018 CODATA values. Every entry can be overridden from a
/// config file so that a result document records exactly which values were
/// used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Constants {
    /// Reduced Planck constant, J s.
    pub hbar: f64,
    /// Boltzmann constant, J/K.
    pub boltzmann: f64,
    /// Elementary charge, C.
    pub elementary_charge: f64,
    /// Vacuum permittivity, F/m.
    pub vacuum_permittivity: f64,
    /// Atomic mass unit, kg.
    pub atomic_mass_unit: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            hbar: 1.054_571_817e-34,
            boltzmann: 1.380_649e-23,
            elementary_charge: 1.602_176_634e-19,
            vacuum_permittivity: 8.854_187_812_8e-12,
            atomic_mass_unit: 1.660_539_066_60e-27,
        }
    }
}

impl Constants {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("hbar", self.hbar),
            ("boltzmann", self.boltzmann),
            ("elementary_charge", self.elementary_charge),
            ("vacuum_permittivity", self.vacuum_permittivity),
            ("atomic_mass_unit", self.atomic_mass_unit),
        ];
        for (name, value) in fields {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::invalid(
                    "constants",
                    format!("{name} must be strictly positive, got {value}"),
                ));
            }
        }
        Ok(())
    }
}
