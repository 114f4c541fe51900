//! The measurement pipeline: lineshape fits per sideband per delay,
//! occupations from amplitude ratios, the heating-rate fit, and the field-
//! noise conversion, with optional collision stages. Every stage outcome is
//! recorded in the result document; a failed stage never aborts the rest.

use std::collections::BTreeMap;

use anyhow::{bail, Result};

use ionheat_core::collisions::{
    collision_safety_check, density_from_elastic_rate_with_coefficient, fit_gamma_e,
    LifetimeObservation,
};
use ionheat_core::heating::{fit_heating_rate, HeatingPoint, HeatingSeries};
use ionheat_core::noise::{frequency_normalized_se, rate_to_se, FieldNoisePoint};
use ionheat_core::scan::{fit_scan, nbar_from_scans, ScanFitResult, SidebandScan};
use ionheat_core::{Error as CoreError, Sideband};

use crate::config::Config;
use crate::resultdoc::{
    FieldNoiseOut, GammaFitOut, HeatingRateOut, NbarRow, Provenance, ResultDocument, SafetyOut,
    ScanFitRow, Stage, TrapSummary,
};

fn flag_names(fit: &ScanFitResult) -> Vec<String> {
    let mut flags = Vec::new();
    if fit.flags.low_signal {
        flags.push("low-signal".to_string());
    }
    if fit.flags.amplitude_at_bound {
        flags.push("amplitude-at-bound".to_string());
    }
    if fit.flags.width_at_bound {
        flags.push("width-at-bound".to_string());
    }
    if fit.flags.degenerate_covariance {
        flags.push("degenerate-covariance".to_string());
    }
    flags
}

/// Document row for one fitted sideband scan.
pub fn scan_fit_row(delay_s: f64, which: Sideband, fit: &ScanFitResult) -> ScanFitRow {
    ScanFitRow {
        delay_s,
        sideband: which.as_str().to_string(),
        amplitude: fit.amplitude,
        amplitude_sigma: fit.amplitude_sigma,
        center_hz: fit.center_hz,
        center_sigma_hz: fit.center_sigma_hz,
        width_hz: fit.width_hz,
        width_sigma_hz: fit.width_sigma_hz,
        chi2_per_dof: fit.chi2_per_dof,
        flags: flag_names(fit),
    }
}

pub fn trap_summary(config: &Config) -> TrapSummary {
    TrapSummary {
        trap_id: config.trap.trap_id.clone(),
        ion: config.ion.name.clone(),
        axial_frequency_hz: config.trap.axial_frequency_hz,
        ion_electrode_distance_m: config.trap.ion_electrode_distance_m,
        electrode_temperature_k: config.trap.electrode_temperature_k,
    }
}

/// Run the full chain over a set of scans and assemble the result document.
///
/// Requires at least two delays carrying both sidebands; everything after
/// that degrades gracefully into per-stage failure records.
pub fn run_pipeline(
    scans: &[SidebandScan],
    config: &Config,
    provenance: Provenance,
) -> Result<ResultDocument> {
    // Group by delay; nonnegative f64 bit patterns order numerically.
    let mut by_delay: BTreeMap<u64, [Option<&SidebandScan>; 2]> = BTreeMap::new();
    for scan in scans {
        let slot = &mut by_delay.entry(scan.delay_s.to_bits()).or_insert([None, None])
            [scan.which as usize];
        if slot.is_some() {
            bail!(
                "duplicate scan for delay {} s, {} sideband",
                scan.delay_s,
                scan.which
            );
        }
        *slot = Some(scan);
    }
    let complete = by_delay
        .values()
        .filter(|pair| pair[0].is_some() && pair[1].is_some())
        .count();
    if complete < 2 {
        bail!("pipeline needs at least 2 delays with both sidebands, got {complete}");
    }

    let mut doc = ResultDocument::new(trap_summary(config), provenance);
    let mut series_points: Vec<HeatingPoint> = Vec::new();

    for (&bits, pair) in &by_delay {
        let delay_s = f64::from_bits(bits);
        let (red_scan, blue_scan) = match (pair[0], pair[1]) {
            (Some(r), Some(b)) => (r, b),
            (red, _) => {
                let missing = if red.is_none() { "red" } else { "blue" };
                doc.notes
                    .push(format!("delay {delay_s} s: missing {missing} sideband; skipped"));
                doc.stages.nbar_points.push(NbarRow {
                    delay_s,
                    nbar: None,
                    sigma: None,
                    excluded: true,
                    note: Some(format!("missing {missing} sideband")),
                });
                continue;
            }
        };

        let red_fit = fit_scan(red_scan, &config.fit);
        let blue_fit = fit_scan(blue_scan, &config.fit);
        let (red_fit, blue_fit) = match (red_fit, blue_fit) {
            (Ok(r), Ok(b)) => {
                doc.stages.scan_fits.push(scan_fit_row(delay_s, Sideband::Red, &r));
                doc.stages.scan_fits.push(scan_fit_row(delay_s, Sideband::Blue, &b));
                (r, b)
            }
            (red, blue) => {
                let mut reasons = Vec::new();
                for (which, result) in [("red", &red), ("blue", &blue)] {
                    if let Err(e) = result {
                        reasons.push(format!("{which}: {e}"));
                    }
                }
                if let Ok(r) = &red {
                    doc.stages.scan_fits.push(scan_fit_row(delay_s, Sideband::Red, r));
                }
                if let Ok(b) = &blue {
                    doc.stages.scan_fits.push(scan_fit_row(delay_s, Sideband::Blue, b));
                }
                let note = format!("lineshape fit failed ({})", reasons.join("; "));
                doc.stages.nbar_points.push(NbarRow {
                    delay_s,
                    nbar: None,
                    sigma: None,
                    excluded: true,
                    note: Some(note),
                });
                continue;
            }
        };

        match nbar_from_scans(&red_fit, &blue_fit) {
            Ok((nbar, sigma)) => {
                series_points.push(HeatingPoint {
                    delay_s,
                    nbar,
                    sigma,
                });
                doc.stages.nbar_points.push(NbarRow {
                    delay_s,
                    nbar: Some(nbar),
                    sigma: Some(sigma),
                    excluded: false,
                    note: None,
                });
            }
            Err(e @ CoreError::SaturatedRatio { .. }) => {
                doc.stages.nbar_points.push(NbarRow {
                    delay_s,
                    nbar: None,
                    sigma: None,
                    excluded: true,
                    note: Some(e.to_string()),
                });
                doc.notes.push(format!(
                    "delay {delay_s} s excluded: saturated sideband ratio; possible collision contamination"
                ));
            }
            Err(e) => {
                doc.stages.nbar_points.push(NbarRow {
                    delay_s,
                    nbar: None,
                    sigma: None,
                    excluded: true,
                    note: Some(e.to_string()),
                });
            }
        }
    }

    let series = HeatingSeries {
        points: series_points,
        temperature_k: config.trap.electrode_temperature_k,
        trap_id: config.trap.trap_id.clone(),
    };

    let heating_stage = Stage::from_result(fit_heating_rate(&series).map(|fit| HeatingRateOut {
        rate_quanta_per_s: fit.rate_quanta_per_s,
        rate_sigma_quanta_per_s: fit.rate_sigma,
        intercept_nbar: fit.intercept,
        intercept_sigma_nbar: fit.intercept_sigma,
        chi2_per_dof: fit.chi2_per_dof,
        negative_intercept: fit.negative_intercept,
    }));

    let field_noise_stage = match heating_stage.value() {
        Some(h) if h.rate_quanta_per_s >= 0.0 => {
            let trap = config.trap_config();
            Stage::from_result(
                rate_to_se(h.rate_quanta_per_s, &trap, &config.constants).and_then(|se| {
                    let se_sigma =
                        rate_to_se(h.rate_sigma_quanta_per_s, &trap, &config.constants)?;
                    let point = FieldNoisePoint {
                        spectral_density: se,
                        angular_frequency: trap.angular_frequency(),
                        temperature_k: config.trap.electrode_temperature_k,
                        distance_m: config.trap.ion_electrode_distance_m,
                        label: config.trap.trap_id.clone(),
                    };
                    Ok(FieldNoiseOut {
                        se_v2_per_m2_hz: se,
                        se_sigma_v2_per_m2_hz: se_sigma,
                        angular_frequency_rad_per_s: trap.angular_frequency(),
                        omega_se_v2_per_m2: frequency_normalized_se(&point)?,
                        distance_m: config.trap.ion_electrode_distance_m,
                        electrode_temperature_k: config.trap.electrode_temperature_k,
                    })
                }),
            )
        }
        Some(h) => Stage::Failed {
            category: "input".to_string(),
            message: format!(
                "fitted rate {} quanta/s is negative (consistent with zero); no field-noise conversion",
                h.rate_quanta_per_s
            ),
        },
        None => Stage::Skipped {
            reason: "heating-rate stage did not succeed".to_string(),
        },
    };

    let gamma_stage = config.collisions.assumed_anomalous_rate_quanta_per_s.map(|gamma_a| {
        Stage::from_result(fit_gamma_e(&series, gamma_a, &config.fit).map(|fit| {
            let gas_temperature_k = config.collisions.gas_temperature_k;
            let mut implied = BTreeMap::new();
            for name in config.gas.keys() {
                if let Ok(gas) = config.gas_species(name, gas_temperature_k) {
                    if let Ok(density) = density_from_elastic_rate_with_coefficient(
                        fit.gamma_e,
                        &gas,
                        &config.ion_species(),
                        &config.constants,
                        config.collisions.elastic_rate_coefficient,
                    ) {
                        implied.insert(name.clone(), density);
                    }
                }
            }
            GammaFitOut {
                assumed_gamma_a_quanta_per_s: gamma_a,
                gamma_e_per_s: fit.gamma_e,
                gamma_e_sigma_per_s: fit.gamma_e_sigma,
                nbar0: fit.nbar0,
                nbar0_sigma: fit.nbar0_sigma,
                chi2_per_dof: fit.chi2_per_dof,
                at_validity_boundary: fit.at_validity_boundary,
                implied_density_per_cm3: implied,
                gas_temperature_k,
            }
        }))
    });

    let safety_stage = config.lifetime.as_ref().map(|lt| match heating_stage.value() {
        Some(h) if h.rate_quanta_per_s > 0.0 => Stage::from_result(
            collision_safety_check(
                &LifetimeObservation {
                    lifetime_s: lt.lifetime_s,
                    delay_s: lt.delay_s,
                    heating_rate_quanta_per_s: h.rate_quanta_per_s,
                },
                &config.safety_thresholds(),
            )
            .map(|check| SafetyOut {
                lifetime_s: lt.lifetime_s,
                delay_s: lt.delay_s,
                rate_quanta_per_s: h.rate_quanta_per_s,
                lifetime_to_delay: check.lifetime_to_delay,
                lifetime_heating_product: check.lifetime_heating_product,
                passed: check.passed,
                marginal: check.marginal,
            }),
        ),
        _ => Stage::Skipped {
            reason: "needs a positive fitted heating rate".to_string(),
        },
    });

    doc.stages.heating_rate = Some(heating_stage);
    doc.stages.field_noise = Some(field_noise_stage);
    doc.stages.gamma_e_fit = gamma_stage;
    doc.stages.collision_safety = safety_stage;
    Ok(doc)
}
