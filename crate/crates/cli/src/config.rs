//! Flat TOML configuration: constants, species tables, geometry and filter
//! calibrations, fit tolerances, thresholds, and simulation inputs. Unknown
//! keys are rejected so typos cannot silently fall back to defaults.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use ionheat_core::collisions::SafetyThresholds;
use ionheat_core::fitting::FitOptions;
use ionheat_core::sim::{Schedule, TruthParams};
use ionheat_core::{Constants, GasSpecies, IonSpecies, TrapConfig};

/// Ion species defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IonSection {
    pub name: String,
    pub mass_amu: f64,
    pub charge: u32,
    pub probe_wavelength_m: f64,
    /// Where the numbers come from; recorded, never parsed.
    pub source: String,
}

impl Default for IonSection {
    fn default() -> Self {
        IonSection {
            name: "Sr-88".into(),
            mass_amu: 87.905_612,
            charge: 1,
            probe_wavelength_m: 674.025_6e-9,
            source: "AME2020 mass; S1/2-D5/2 quadrupole transition".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrapSection {
    pub axial_frequency_hz: f64,
    pub ion_electrode_distance_m: f64,
    pub electrode_temperature_k: f64,
    pub beam_projection: f64,
    pub lamb_dicke: Option<f64>,
    pub trap_id: String,
}

impl Default for TrapSection {
    fn default() -> Self {
        TrapSection {
            axial_frequency_hz: 1.32e6,
            ion_electrode_distance_m: 50e-6,
            electrode_temperature_k: 4.0,
            beam_projection: 1.0,
            lamb_dicke: None,
            trap_id: "trap".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSection {
    pub duration_s: f64,
    pub rabi_rad_per_s: f64,
}

impl Default for ProbeSection {
    fn default() -> Self {
        ProbeSection {
            duration_s: 100e-6,
            // ~pi/2 pulse area on the blue sideband for eta ~ 0.0615.
            rabi_rad_per_s: 2.5531e5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometrySection {
    /// Voltage-to-field coupling scale D_eff.
    pub effective_distance_m: f64,
    pub source: String,
}

impl Default for GeometrySection {
    fn default() -> Self {
        GeometrySection {
            // sqrt(S_V / S_E) for the 1.1 nV/rtHz <-> 7e-14 V^2/m^2/Hz pair.
            effective_distance_m: 4.157_6e-3,
            source: "calibrated from the voltage-noise/field-noise pair".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JohnsonSection {
    /// Effective filter resistance seen by an electrode.
    pub resistance_ohm: f64,
    pub source: String,
}

impl Default for JohnsonSection {
    fn default() -> Self {
        JohnsonSection {
            // Reproduces 1e-17 V^2/m^2/Hz at 4 K over the default geometry.
            resistance_ohm: 0.782_5,
            source: "calibrated from the 4 K Johnson-noise estimate".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdSection {
    pub safety_pass_ratio: f64,
    pub safety_margin_ratio: f64,
    pub power_law_breakpoint_k: f64,
}

impl Default for ThresholdSection {
    fn default() -> Self {
        ThresholdSection {
            safety_pass_ratio: 100.0,
            safety_margin_ratio: 1000.0,
            power_law_breakpoint_k: 70.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CollisionSection {
    /// Coefficient of the elastic rate constant (cm^3/s units; see core docs).
    pub elastic_rate_coefficient: f64,
    /// Temperature assigned to background gas when not given on the command
    /// line; the coldest surfaces facing the ion set it.
    pub gas_temperature_k: f64,
    /// When set, the pipeline also fits the elastic rate with this anomalous
    /// rate held fixed.
    pub assumed_anomalous_rate_quanta_per_s: Option<f64>,
}

impl Default for CollisionSection {
    fn default() -> Self {
        CollisionSection {
            elastic_rate_coefficient: ionheat_core::collisions::ELASTIC_RATE_COEFFICIENT,
            gas_temperature_k: 55.0,
            assumed_anomalous_rate_quanta_per_s: None,
        }
    }
}

/// One background-gas entry of the species table.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasEntry {
    pub mass_amu: f64,
    /// Polarizability volume, cm^3.
    pub polarizability_cm3: f64,
    #[serde(default)]
    pub source: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruthSection {
    pub heating_rate_quanta_per_s: f64,
    pub nbar0: f64,
    pub gamma_e_per_s: f64,
    pub saturated_excitation: f64,
}

impl Default for TruthSection {
    fn default() -> Self {
        TruthSection {
            heating_rate_quanta_per_s: 13.0,
            nbar0: 0.05,
            gamma_e_per_s: 0.0,
            saturated_excitation: 0.5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleSection {
    pub delays_s: Vec<f64>,
    pub detunings_hz: Vec<f64>,
    pub shots: u32,
    pub seed: u64,
}

impl Default for ScheduleSection {
    fn default() -> Self {
        ScheduleSection {
            delays_s: vec![0.003, 0.012, 0.021, 0.030],
            detunings_hz: (0..21).map(|i| -8_000.0 + 800.0 * f64::from(i)).collect(),
            shots: 300,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LifetimeSection {
    pub lifetime_s: f64,
    pub delay_s: f64,
}

/// Whole configuration document.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub constants: Constants,
    pub ion: IonSection,
    pub trap: TrapSection,
    pub probe: ProbeSection,
    pub geometry: GeometrySection,
    pub johnson: JohnsonSection,
    pub fit: FitOptions,
    pub thresholds: ThresholdSection,
    pub collisions: CollisionSection,
    pub gas: BTreeMap<String, GasEntry>,
    pub truth: TruthSection,
    pub schedule: ScheduleSection,
    pub lifetime: Option<LifetimeSection>,
}

/// CRC-style defaults for the species table.
pub fn default_gas_table() -> BTreeMap<String, GasEntry> {
    let mut table = BTreeMap::new();
    table.insert(
        "H2".to_string(),
        GasEntry {
            mass_amu: 2.015_88,
            polarizability_cm3: 0.804_5e-24,
            source: "CRC Handbook, molecular polarizabilities".into(),
        },
    );
    table.insert(
        "N2".to_string(),
        GasEntry {
            mass_amu: 28.013_4,
            polarizability_cm3: 1.740_3e-24,
            source: "CRC Handbook, molecular polarizabilities".into(),
        },
    );
    table.insert(
        "O2".to_string(),
        GasEntry {
            mass_amu: 31.998_8,
            polarizability_cm3: 1.581_2e-24,
            source: "CRC Handbook, molecular polarizabilities".into(),
        },
    );
    table
}

impl Config {
    /// Parse a TOML config, fill defaults, and validate.
    pub fn from_toml(text: &str) -> Result<Config> {
        let mut config: Config = toml::from_str(text).context("failed to parse config")?;
        if config.gas.is_empty() {
            config.gas = default_gas_table();
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::from_toml(&text)
    }

    /// Defaults with the species table populated.
    pub fn builtin() -> Config {
        Config {
            gas: default_gas_table(),
            ..Config::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        self.ion_species().validate()?;
        self.trap_config().validate()?;
        if !(self.probe.duration_s > 0.0) || !(self.probe.rabi_rad_per_s > 0.0) {
            anyhow::bail!("probe duration and Rabi frequency must be > 0");
        }
        if !(self.collisions.gas_temperature_k > 0.0) {
            anyhow::bail!("gas temperature must be > 0");
        }
        for (name, gas) in &self.gas {
            self.gas_species(name, self.collisions.gas_temperature_k)?
                .validate()
                .with_context(|| format!("gas entry {name}"))?;
            let _ = gas;
        }
        Ok(())
    }

    pub fn ion_species(&self) -> IonSpecies {
        IonSpecies {
            name: self.ion.name.clone(),
            mass_amu: self.ion.mass_amu,
            charge: self.ion.charge,
            probe_wavelength_m: self.ion.probe_wavelength_m,
        }
    }

    pub fn trap_config(&self) -> TrapConfig {
        TrapConfig {
            species: self.ion_species(),
            axial_frequency_hz: self.trap.axial_frequency_hz,
            ion_electrode_distance_m: self.trap.ion_electrode_distance_m,
            electrode_temperature_k: self.trap.electrode_temperature_k,
            beam_projection: self.trap.beam_projection,
            lamb_dicke: self.trap.lamb_dicke,
            trap_id: self.trap.trap_id.clone(),
        }
    }

    pub fn gas_species(&self, name: &str, temperature_k: f64) -> Result<GasSpecies> {
        let entry = self.gas.get(name).with_context(|| {
            let known: Vec<&str> = self.gas.keys().map(String::as_str).collect();
            format!("unknown gas species \"{name}\"; configured: {}", known.join(", "))
        })?;
        Ok(GasSpecies {
            name: name.to_string(),
            mass_amu: entry.mass_amu,
            polarizability_cm3: entry.polarizability_cm3,
            temperature_k,
        })
    }

    pub fn truth_params(&self) -> TruthParams {
        TruthParams {
            heating_rate_quanta_per_s: self.truth.heating_rate_quanta_per_s,
            nbar0: self.truth.nbar0,
            gamma_e_per_s: self.truth.gamma_e_per_s,
            probe_rabi_rad_s: self.probe.rabi_rad_per_s,
            probe_duration_s: self.probe.duration_s,
            saturated_excitation: self.truth.saturated_excitation,
        }
    }

    pub fn sim_schedule(&self, seed_override: Option<u64>) -> Schedule {
        Schedule {
            delays_s: self.schedule.delays_s.clone(),
            detunings_hz: self.schedule.detunings_hz.clone(),
            shots: self.schedule.shots,
            seed: seed_override.unwrap_or(self.schedule.seed),
        }
    }

    pub fn safety_thresholds(&self) -> SafetyThresholds {
        SafetyThresholds {
            pass_ratio: self.thresholds.safety_pass_ratio,
            margin_ratio: self.thresholds.safety_margin_ratio,
        }
    }

    /// Canonical serialized form; digested into result documents so reruns
    /// can prove they used the same configuration.
    pub fn canonical_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}
