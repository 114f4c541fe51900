//! The structured result document. One JSON file records everything a
//! pipeline run computed, with units in the field names and enough
//! provenance (digests, seed, tool version) to reproduce it byte for byte.
//! The timestamp is the single nondeterministic field and sits alone at the
//! top level.

use std::collections::BTreeMap;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl Default for ToolInfo {
    fn default() -> Self {
        ToolInfo {
            name: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: Option<u64>,
    pub config_digest_sha256: String,
    pub inputs_digest_sha256: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrapSummary {
    pub trap_id: String,
    pub ion: String,
    pub axial_frequency_hz: f64,
    pub ion_electrode_distance_m: f64,
    pub electrode_temperature_k: f64,
}

/// Outcome of one pipeline stage. Failures are recorded, not fatal, so a
/// document always says what happened at every stage.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Stage<T> {
    Ok { value: T },
    Failed { category: String, message: String },
    Skipped { reason: String },
}

impl<T> Stage<T> {
    pub fn value(&self) -> Option<&T> {
        match self {
            Stage::Ok { value } => Some(value),
            _ => None,
        }
    }

    pub fn from_result(result: ionheat_core::Result<T>) -> Self {
        match result {
            Ok(value) => Stage::Ok { value },
            Err(e) => Stage::Failed {
                category: e.category().to_string(),
                message: e.to_string(),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanFitRow {
    pub delay_s: f64,
    pub sideband: String,
    pub amplitude: f64,
    pub amplitude_sigma: f64,
    pub center_hz: f64,
    pub center_sigma_hz: f64,
    pub width_hz: f64,
    pub width_sigma_hz: f64,
    pub chi2_per_dof: f64,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NbarRow {
    pub delay_s: f64,
    pub nbar: Option<f64>,
    pub sigma: Option<f64>,
    pub excluded: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeatingRateOut {
    pub rate_quanta_per_s: f64,
    pub rate_sigma_quanta_per_s: f64,
    pub intercept_nbar: f64,
    pub intercept_sigma_nbar: f64,
    pub chi2_per_dof: f64,
    pub negative_intercept: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldNoiseOut {
    pub se_v2_per_m2_hz: f64,
    pub se_sigma_v2_per_m2_hz: f64,
    pub angular_frequency_rad_per_s: f64,
    pub omega_se_v2_per_m2: f64,
    pub distance_m: f64,
    pub electrode_temperature_k: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerLawSegmentOut {
    pub exponent: f64,
    pub exponent_sigma: f64,
    pub prefactor_quanta_per_s: f64,
    pub prefactor_sigma_quanta_per_s: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerLawOut {
    pub breakpoint_k: f64,
    pub below: Option<PowerLawSegmentOut>,
    pub above: Option<PowerLawSegmentOut>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GammaFitOut {
    pub assumed_gamma_a_quanta_per_s: f64,
    pub gamma_e_per_s: f64,
    pub gamma_e_sigma_per_s: f64,
    pub nbar0: f64,
    pub nbar0_sigma: f64,
    pub chi2_per_dof: f64,
    pub at_validity_boundary: bool,
    /// Background density each configured gas species would need to supply
    /// the fitted elastic rate, cm^-3.
    pub implied_density_per_cm3: BTreeMap<String, f64>,
    pub gas_temperature_k: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SafetyOut {
    pub lifetime_s: f64,
    pub delay_s: f64,
    pub rate_quanta_per_s: f64,
    pub lifetime_to_delay: f64,
    pub lifetime_heating_product: f64,
    pub passed: bool,
    pub marginal: bool,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Stages {
    pub scan_fits: Vec<ScanFitRow>,
    pub nbar_points: Vec<NbarRow>,
    pub heating_rate: Option<Stage<HeatingRateOut>>,
    pub field_noise: Option<Stage<FieldNoiseOut>>,
    pub power_law: Option<Stage<PowerLawOut>>,
    pub gamma_e_fit: Option<Stage<GammaFitOut>>,
    pub collision_safety: Option<Stage<SafetyOut>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultDocument {
    pub schema_version: u32,
    /// Wall-clock creation time; the only field excluded from byte-level
    /// reproducibility comparisons.
    pub generated_at_unix_s: u64,
    pub tool: ToolInfo,
    pub provenance: Provenance,
    pub trap: TrapSummary,
    pub stages: Stages,
    pub notes: Vec<String>,
}

impl ResultDocument {
    pub fn new(trap: TrapSummary, provenance: Provenance) -> Self {
        ResultDocument {
            schema_version: SCHEMA_VERSION,
            generated_at_unix_s: unix_now(),
            tool: ToolInfo::default(),
            provenance,
            trap,
            stages: Stages::default(),
            notes: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("document serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ResultDocument =
            serde_json::from_str(text).context("failed to parse result document")?;
        if doc.schema_version != SCHEMA_VERSION {
            anyhow::bail!(
                "unsupported result document schema_version {} (this tool reads {})",
                doc.schema_version,
                SCHEMA_VERSION
            );
        }
        Ok(doc)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

pub fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
