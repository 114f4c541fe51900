//! Conversions between motional heating rate and electric-field noise
//! spectral density, plus the derived bounds and estimates built on them.

use serde::{Deserialize, Serialize};

use crate::constants::Constants;
use crate::error::{Error, Result};
use crate::species::TrapConfig;

/// One electric-field noise measurement suitable for cross-experiment tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldNoisePoint {
    /// S_E at the trap frequency, V^2 m^-2 Hz^-1.
    pub spectral_density: f64,
    /// Angular trap frequency, rad/s.
    pub angular_frequency: f64,
    pub temperature_k: f64,
    pub distance_m: f64,
    pub label: String,
}

impl FieldNoisePoint {
    pub fn validate(&self) -> Result<()> {
        if !(self.spectral_density >= 0.0) {
            return Err(Error::invalid("field noise", "spectral density must be >= 0"));
        }
        if !(self.angular_frequency > 0.0) {
            return Err(Error::invalid("field noise", "angular frequency must be > 0"));
        }
        Ok(())
    }
}

/// Voltage-to-field coupling scale of the electrode geometry: a voltage
/// spectral density S_V maps to a field spectral density S_V / D_eff^2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryFactor {
    pub effective_distance_m: f64,
}

impl GeometryFactor {
    pub fn validate(&self) -> Result<()> {
        if !(self.effective_distance_m > 0.0) {
            return Err(Error::invalid("geometry", "effective distance must be > 0"));
        }
        Ok(())
    }
}

/// Conversion factor between heating rate and S_E: 4 m hbar omega / q^2.
fn rate_conversion(trap: &TrapConfig, constants: &Constants) -> f64 {
    let m = trap.species.mass_kg(constants);
    let q = trap.species.charge_coulomb(constants);
    4.0 * m * constants.hbar * trap.angular_frequency() / (q * q)
}

/// Electric-field noise spectral density that drives a given heating rate:
/// S_E(omega) = (4 m hbar omega / q^2) * d<n>/dt, in V^2 m^-2 Hz^-1.
pub fn rate_to_se(rate_quanta_per_s: f64, trap: &TrapConfig, constants: &Constants) -> Result<f64> {
    if !(rate_quanta_per_s >= 0.0) {
        return Err(Error::invalid("rate", "must be >= 0"));
    }
    trap.validate()?;
    Ok(rate_conversion(trap, constants) * rate_quanta_per_s)
}

/// Heating rate implied by a field noise spectral density; exact inverse of
/// [`rate_to_se`].
pub fn se_to_rate(se: f64, trap: &TrapConfig, constants: &Constants) -> Result<f64> {
    if !(se >= 0.0) {
        return Err(Error::invalid("spectral density", "must be >= 0"));
    }
    trap.validate()?;
    Ok(se / rate_conversion(trap, constants))
}

/// Frequency-normalized noise omega * S_E, V^2 m^-2, for comparing traps
/// operated at different frequencies.
pub fn frequency_normalized_se(point: &FieldNoisePoint) -> Result<f64> {
    point.validate()?;
    Ok(point.angular_frequency * point.spectral_density)
}

/// Rescale S_E between ion-electrode distances assuming S_E ~ d^-exponent.
/// The default exponent of 4 matches surface patch-potential noise.
pub fn distance_rescale(se: f64, d_from_m: f64, d_to_m: f64, exponent: f64) -> Result<f64> {
    if !(d_from_m > 0.0) || !(d_to_m > 0.0) {
        return Err(Error::invalid("distance", "distances must be > 0"));
    }
    if !(se >= 0.0) {
        return Err(Error::invalid("spectral density", "must be >= 0"));
    }
    Ok(se * (d_from_m / d_to_m).powf(exponent))
}

/// Johnson noise of a resistance R at temperature T seen by the ion:
/// S_E = 4 kB T R / D_eff^2.
pub fn johnson_se(
    resistance_ohm: f64,
    temperature_k: f64,
    geometry: &GeometryFactor,
    constants: &Constants,
) -> Result<f64> {
    if !(resistance_ohm >= 0.0) {
        return Err(Error::invalid("resistance", "must be >= 0"));
    }
    if !(temperature_k > 0.0) {
        return Err(Error::invalid("temperature", "must be > 0"));
    }
    geometry.validate()?;
    let d2 = geometry.effective_distance_m * geometry.effective_distance_m;
    Ok(4.0 * constants.boltzmann * temperature_k * resistance_ohm / d2)
}

/// Electrode voltage noise to field noise at the ion: S_E = S_V / D_eff^2.
pub fn voltage_to_field(sv_v2_per_hz: f64, geometry: &GeometryFactor) -> Result<f64> {
    if !(sv_v2_per_hz >= 0.0) {
        return Err(Error::invalid("voltage noise", "must be >= 0"));
    }
    geometry.validate()?;
    let d2 = geometry.effective_distance_m * geometry.effective_distance_m;
    Ok(sv_v2_per_hz / d2)
}

/// Inverse of [`voltage_to_field`].
pub fn field_to_voltage(se: f64, geometry: &GeometryFactor) -> Result<f64> {
    if !(se >= 0.0) {
        return Err(Error::invalid("spectral density", "must be >= 0"));
    }
    geometry.validate()?;
    let d2 = geometry.effective_distance_m * geometry.effective_distance_m;
    Ok(se * d2)
}

/// First-order heating-limited two-qubit gate error: rate * gate time.
pub fn gate_error(rate_quanta_per_s: f64, gate_time_s: f64) -> Result<f64> {
    if !(rate_quanta_per_s >= 0.0) || !(gate_time_s >= 0.0) {
        return Err(Error::invalid("gate error", "rate and gate time must be >= 0"));
    }
    Ok(rate_quanta_per_s * gate_time_s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::trap_1p32mhz;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn se_conversion_reference_point() {
        // Direct evaluation of 4 m hbar omega / q^2 as the oracle.
        let c = Constants::default();
        let trap = trap_1p32mhz();
        let m = 87.905_612 * c.atomic_mass_unit;
        let omega = 2.0 * std::f64::consts::PI * 1.32e6;
        let factor = 4.0 * m * c.hbar * omega / (c.elementary_charge * c.elementary_charge);
        let rate = se_to_rate(7e-14, &trap, &c).unwrap();
        assert_relative_eq!(rate, 7e-14 / factor, max_relative = 1e-12);
        // A 7e-14 V^2/m^2/Hz floor corresponds to about 3.5 quanta/s here.
        assert!((rate - 3.5).abs() < 0.1, "rate = {rate}");
    }

    #[test]
    fn se_rate_linear_and_zero() {
        let c = Constants::default();
        let trap = trap_1p32mhz();
        assert_eq!(rate_to_se(0.0, &trap, &c).unwrap(), 0.0);
        let one = rate_to_se(1.0, &trap, &c).unwrap();
        let two = rate_to_se(2.0, &trap, &c).unwrap();
        assert_relative_eq!(two, 2.0 * one, max_relative = 1e-12);
        assert!(rate_to_se(-1.0, &trap, &c).is_err());
    }

    #[test]
    fn frequency_normalization() {
        let point = FieldNoisePoint {
            spectral_density: 7e-14,
            angular_frequency: 2.0 * std::f64::consts::PI * 1.32e6,
            temperature_k: 4.0,
            distance_m: 50e-6,
            label: "test".into(),
        };
        let v = frequency_normalized_se(&point).unwrap();
        assert_relative_eq!(v, 5.806e-7, max_relative = 1e-3);
        let zero = FieldNoisePoint {
            spectral_density: 0.0,
            ..point
        };
        assert_eq!(frequency_normalized_se(&zero).unwrap(), 0.0);
    }

    #[test]
    fn distance_rescaling() {
        assert_relative_eq!(
            distance_rescale(1.0, 50e-6, 50e-6, 4.0).unwrap(),
            1.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            distance_rescale(1.0, 50e-6, 100e-6, 4.0).unwrap(),
            1.0 / 16.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            distance_rescale(1.0, 50e-6, 75e-6, 4.0).unwrap(),
            (50.0f64 / 75.0).powi(4),
            max_relative = 1e-12
        );
        assert!(distance_rescale(1.0, 0.0, 75e-6, 4.0).is_err());
    }

    #[test]
    fn johnson_structure() {
        let c = Constants::default();
        let g = GeometryFactor {
            effective_distance_m: 4.157e-3,
        };
        let base = johnson_se(1.0, 4.0, &g, &c).unwrap();
        assert_relative_eq!(johnson_se(2.0, 4.0, &g, &c).unwrap(), 2.0 * base, max_relative = 1e-12);
        assert_relative_eq!(johnson_se(1.0, 8.0, &g, &c).unwrap(), 2.0 * base, max_relative = 1e-12);
        assert_eq!(johnson_se(0.0, 4.0, &g, &c).unwrap(), 0.0);
    }

    #[test]
    fn voltage_field_pair() {
        // 1.1 nV/rtHz over the calibrated geometry sits at the 7e-14 level.
        let g = GeometryFactor {
            effective_distance_m: (1.21e-18f64 / 7e-14).sqrt(),
        };
        let se = voltage_to_field(1.21e-18, &g).unwrap();
        assert_relative_eq!(se, 7e-14, max_relative = 1e-12);
        assert!((g.effective_distance_m - 4.2e-3).abs() < 0.1e-3);
        assert_eq!(voltage_to_field(0.0, &g).unwrap(), 0.0);
        let sv4 = voltage_to_field(4.0 * 1.21e-18, &g).unwrap();
        assert_relative_eq!(sv4, 4.0 * se, max_relative = 1e-12);
    }

    #[test]
    fn gate_error_estimate() {
        let e = gate_error(3.52, 10e-6).unwrap();
        assert!((3e-5..=5e-5).contains(&e), "error = {e}");
        assert_eq!(gate_error(0.0, 10e-6).unwrap(), 0.0);
        assert_relative_eq!(
            gate_error(3.52, 20e-6).unwrap(),
            2.0 * e,
            max_relative = 1e-12
        );
    }

    proptest! {
        #[test]
        fn se_round_trip(rate in 1e-3..1e6f64) {
            let c = Constants::default();
            let trap = trap_1p32mhz();
            let se = rate_to_se(rate, &trap, &c).unwrap();
            let back = se_to_rate(se, &trap, &c).unwrap();
            prop_assert!((back - rate).abs() <= 1e-12 * rate);
        }

        #[test]
        fn field_voltage_round_trip(sv in 1e-22..1e-12f64, d in 1e-4..1e-1f64) {
            let g = GeometryFactor { effective_distance_m: d };
            let se = voltage_to_field(sv, &g).unwrap();
            let back = field_to_voltage(se, &g).unwrap();
            prop_assert!((back - sv).abs() <= 1e-12 * sv);
        }

        #[test]
        fn rescale_composes(se in 1e-16..1e-10f64, a in 1e-5..1e-3f64, b in 1e-5..1e-3f64, c in 1e-5..1e-3f64) {
            let direct = distance_rescale(se, a, c, 4.0).unwrap();
            let via_b = distance_rescale(distance_rescale(se, a, b, 4.0).unwrap(), b, c, 4.0).unwrap();
            prop_assert!((direct - via_b).abs() <= 1e-12 * direct.max(via_b));
        }
    }
}
