//! Command definitions and dispatch.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ionheat_core::collisions::{
    collision_safety_check, density_from_elastic_rate_with_coefficient,
    elastic_rate_with_coefficient, fit_gamma_e, langevin_rate, max_energy_transfer,
    LifetimeObservation,
};
use ionheat_core::heating::{fit_power_law, HeatingSeries};
use ionheat_core::noise::{
    distance_rescale, gate_error, johnson_se, rate_to_se, se_to_rate, GeometryFactor,
};
use ionheat_core::scan::fit_scan;
use ionheat_core::sim::simulate_dataset;

use crate::config::Config;
use crate::pipeline::{run_pipeline, trap_summary};
use crate::report::{report, ReportMode};
use crate::resultdoc::{
    sha256_hex, GammaFitOut, PowerLawOut, PowerLawSegmentOut, Provenance, ResultDocument, Stage,
};
use crate::scanfile;

#[derive(Debug, Parser)]
#[command(
    name = "ionheat",
    version,
    about = "Trapped-ion motional heating analysis: simulate sideband datasets, fit heating rates, convert to field noise, and quantify background-gas collisions"
)]
pub struct Cli {
    /// TOML configuration; built-in defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic scan dataset from the configured ground truth.
    Simulate {
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// Output scan CSV.
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Fit a Rabi lineshape to every (delay, sideband) scan in a file.
    FitScan {
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Full pipeline: scan fits, occupations, heating rate, field noise.
    HeatingRate {
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Segmented power-law fit of heating rate versus temperature.
    PowerLaw {
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        /// Segment split temperature; defaults to the configured breakpoint.
        #[arg(long)]
        breakpoint_k: Option<f64>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Field-noise conversions and bounds.
    #[command(subcommand)]
    Noise(NoiseCommand),
    /// Background-gas collision calculations.
    #[command(subcommand)]
    Collisions(CollisionsCommand),
    /// Plot-ready tables and figures from result documents.
    Report {
        #[arg(long, value_enum)]
        mode: ReportModeArg,
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
        /// Result documents (JSON) to aggregate.
        #[arg(required = true, value_name = "DOC")]
        inputs: Vec<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum NoiseCommand {
    /// Convert between heating rate and S_E for the configured trap.
    Convert {
        #[arg(
            long,
            conflicts_with = "se_v2_per_m2_hz",
            required_unless_present = "se_v2_per_m2_hz"
        )]
        rate_quanta_per_s: Option<f64>,
        #[arg(long)]
        se_v2_per_m2_hz: Option<f64>,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Johnson-noise field spectral density of the filtered electrodes.
    Johnson {
        #[arg(long)]
        temperature_k: f64,
        /// Defaults to the calibrated filter resistance in the config.
        #[arg(long)]
        resistance_ohm: Option<f64>,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Heating-limited two-qubit gate error estimate.
    GateError {
        #[arg(long)]
        rate_quanta_per_s: f64,
        #[arg(long)]
        gate_time_s: f64,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Rescale S_E between ion-electrode distances (default d^-4).
    Rescale {
        #[arg(long)]
        se_v2_per_m2_hz: f64,
        #[arg(long)]
        d_from_m: f64,
        #[arg(long)]
        d_to_m: f64,
        #[arg(long, default_value_t = 4.0)]
        exponent: f64,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum CollisionsCommand {
    /// Background density implied by an elastic collision rate.
    Density {
        #[arg(long)]
        gamma_e_per_s: f64,
        #[arg(long)]
        gas: String,
        #[arg(long)]
        gas_temperature_k: Option<f64>,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Elastic collision rate at a given background density.
    Elastic {
        #[arg(long)]
        density_per_cm3: f64,
        #[arg(long)]
        gas: String,
        #[arg(long)]
        gas_temperature_k: Option<f64>,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Langevin (capture) rate at a given background density.
    Langevin {
        #[arg(long)]
        density_per_cm3: f64,
        #[arg(long)]
        gas: String,
        #[arg(long)]
        gas_temperature_k: Option<f64>,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Fit the elastic rate to an occupation series with gamma_a held fixed.
    Fit {
        /// Occupation series CSV (delay_s,nbar,sigma).
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        #[arg(long)]
        gamma_a_quanta_per_s: f64,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Lifetime-based rule of thumb for neglecting collisions.
    Check {
        #[arg(long)]
        lifetime_s: f64,
        #[arg(long)]
        delay_s: f64,
        #[arg(long)]
        rate_quanta_per_s: f64,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Maximum single-collision energy transfer to the ion.
    Energy {
        #[arg(long)]
        gas: String,
        #[arg(long)]
        gas_temperature_k: Option<f64>,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportModeArg {
    Heating,
    Distance,
}

/// A scalar output with its unit; `Text` carries verdicts and labels.
pub enum Scalar {
    Number(f64),
    Text(String),
}

fn emit_values(
    entries: &[(&str, Scalar, &str)],
    format: OutputFormat,
    out: Option<&Path>,
) -> Result<()> {
    let text = match format {
        OutputFormat::Json => {
            let mut map = serde_json::Map::new();
            for (name, scalar, unit) in entries {
                let mut inner = serde_json::Map::new();
                let value = match scalar {
                    Scalar::Number(x) => serde_json::json!(x),
                    Scalar::Text(s) => serde_json::json!(s),
                };
                inner.insert("value".to_string(), value);
                inner.insert("unit".to_string(), serde_json::json!(unit));
                map.insert((*name).to_string(), serde_json::Value::Object(inner));
            }
            let mut text = serde_json::to_string_pretty(&serde_json::Value::Object(map))?;
            text.push('\n');
            text
        }
        OutputFormat::Csv => {
            let mut text = String::from("quantity,value,unit\n");
            for (name, scalar, unit) in entries {
                let value = match scalar {
                    Scalar::Number(x) => format!("{x}"),
                    Scalar::Text(s) => s.clone(),
                };
                text.push_str(&format!("{name},{value},{unit}\n"));
            }
            text
        }
    };
    write_output(out, &text)
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<Config> {
    match path {
        Some(p) => Config::load(p),
        None => Ok(Config::builtin()),
    }
}

fn file_digest(path: &Path) -> Result<String> {
    let bytes =
        std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

fn gas_temperature(config: &Config, flag: Option<f64>) -> f64 {
    flag.unwrap_or(config.collisions.gas_temperature_k)
}

#[derive(Serialize)]
struct FlatScanFitRow<'a> {
    delay_s: f64,
    sideband: &'a str,
    amplitude: f64,
    amplitude_sigma: f64,
    center_hz: f64,
    center_sigma_hz: f64,
    width_hz: f64,
    width_sigma_hz: f64,
    chi2_per_dof: f64,
    flags: String,
}

fn doc_to_csv(doc: &ResultDocument, command: &str) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    match command {
        "fit-scan" => {
            for row in &doc.stages.scan_fits {
                writer.serialize(FlatScanFitRow {
                    delay_s: row.delay_s,
                    sideband: &row.sideband,
                    amplitude: row.amplitude,
                    amplitude_sigma: row.amplitude_sigma,
                    center_hz: row.center_hz,
                    center_sigma_hz: row.center_sigma_hz,
                    width_hz: row.width_hz,
                    width_sigma_hz: row.width_sigma_hz,
                    chi2_per_dof: row.chi2_per_dof,
                    flags: row.flags.join("|"),
                })?;
            }
        }
        "heating-rate" => {
            #[derive(Serialize)]
            struct Row {
                delay_s: f64,
                nbar: f64,
                sigma: f64,
            }
            for row in &doc.stages.nbar_points {
                if let (false, Some(nbar), Some(sigma)) = (row.excluded, row.nbar, row.sigma) {
                    writer.serialize(Row {
                        delay_s: row.delay_s,
                        nbar,
                        sigma,
                    })?;
                }
            }
        }
        "power-law" => {
            #[derive(Serialize)]
            struct Row<'a> {
                segment: &'a str,
                exponent: f64,
                exponent_sigma: f64,
                prefactor_quanta_per_s: f64,
                prefactor_sigma_quanta_per_s: f64,
                n_points: usize,
            }
            if let Some(stage) = &doc.stages.power_law {
                if let Some(fit) = stage.value() {
                    for (name, seg) in [("below", &fit.below), ("above", &fit.above)] {
                        if let Some(seg) = seg {
                            writer.serialize(Row {
                                segment: name,
                                exponent: seg.exponent,
                                exponent_sigma: seg.exponent_sigma,
                                prefactor_quanta_per_s: seg.prefactor_quanta_per_s,
                                prefactor_sigma_quanta_per_s: seg.prefactor_sigma_quanta_per_s,
                                n_points: seg.n_points,
                            })?;
                        }
                    }
                }
            }
        }
        "collisions-fit" => {
            #[derive(Serialize)]
            struct Row<'a> {
                quantity: &'a str,
                value: f64,
                unit: &'a str,
            }
            if let Some(stage) = &doc.stages.gamma_e_fit {
                if let Some(fit) = stage.value() {
                    writer.serialize(Row { quantity: "gamma_e", value: fit.gamma_e_per_s, unit: "1/s" })?;
                    writer.serialize(Row { quantity: "gamma_e_sigma", value: fit.gamma_e_sigma_per_s, unit: "1/s" })?;
                    writer.serialize(Row { quantity: "nbar0", value: fit.nbar0, unit: "quanta" })?;
                    writer.serialize(Row { quantity: "nbar0_sigma", value: fit.nbar0_sigma, unit: "quanta" })?;
                    for (gas, density) in &fit.implied_density_per_cm3 {
                        writer.serialize(Row { quantity: gas, value: *density, unit: "1/cm^3" })?;
                    }
                }
            }
        }
        other => bail!("no CSV form for {other}"),
    }
    Ok(String::from_utf8(writer.into_inner()?)?)
}

fn emit_document(
    doc: &ResultDocument,
    format: OutputFormat,
    out: Option<&Path>,
    command: &str,
) -> Result<()> {
    let text = match format {
        OutputFormat::Json => doc.to_json(),
        OutputFormat::Csv => doc_to_csv(doc, command)?,
    };
    write_output(out, &text)
}

pub fn run(cli: Cli) -> Result<()> {
    let config = load_config(cli.config.as_deref())?;
    let config_digest = sha256_hex(config.canonical_toml().as_bytes());

    match cli.command {
        Command::Simulate { seed, out } => {
            let schedule = config.sim_schedule(seed);
            let dataset = simulate_dataset(
                &config.trap_config(),
                &config.truth_params(),
                &schedule,
                &config.constants,
            )?;
            scanfile::write_scans(&out, &dataset.scans)?;
            eprintln!(
                "wrote {} scans ({} delays x 2 sidebands, {} shots/point, seed {}) to {}",
                dataset.scans.len(),
                schedule.delays_s.len(),
                schedule.shots,
                schedule.seed,
                out.display()
            );
            Ok(())
        }

        Command::FitScan { input, out, format } => {
            let scans = scanfile::ingest_scans(&input, &config.probe)?;
            let mut doc = ResultDocument::new(
                trap_summary(&config),
                Provenance {
                    seed: None,
                    config_digest_sha256: config_digest,
                    inputs_digest_sha256: Some(file_digest(&input)?),
                },
            );
            for scan in &scans {
                let fit = fit_scan(scan, &config.fit)?;
                doc.stages
                    .scan_fits
                    .push(crate::pipeline::scan_fit_row(scan.delay_s, scan.which, &fit));
            }
            emit_document(&doc, format, out.as_deref(), "fit-scan")
        }

        Command::HeatingRate { input, out, format } => {
            let scans = scanfile::ingest_scans(&input, &config.probe)?;
            let provenance = Provenance {
                seed: None,
                config_digest_sha256: config_digest,
                inputs_digest_sha256: Some(file_digest(&input)?),
            };
            let doc = run_pipeline(&scans, &config, provenance)?;
            emit_document(&doc, format, out.as_deref(), "heating-rate")
        }

        Command::PowerLaw {
            input,
            breakpoint_k,
            out,
            format,
        } => {
            let points = scanfile::read_rate_points(&input)?;
            let breakpoint = breakpoint_k.unwrap_or(config.thresholds.power_law_breakpoint_k);
            let fit = fit_power_law(&points, breakpoint)?;
            let to_out = |seg: &ionheat_core::heating::PowerLawSegment| PowerLawSegmentOut {
                exponent: seg.exponent,
                exponent_sigma: seg.exponent_sigma,
                prefactor_quanta_per_s: seg.prefactor,
                prefactor_sigma_quanta_per_s: seg.prefactor_sigma,
                n_points: seg.n_points,
            };
            let mut doc = ResultDocument::new(
                trap_summary(&config),
                Provenance {
                    seed: None,
                    config_digest_sha256: config_digest,
                    inputs_digest_sha256: Some(file_digest(&input)?),
                },
            );
            doc.stages.power_law = Some(Stage::Ok {
                value: PowerLawOut {
                    breakpoint_k: breakpoint,
                    below: fit.below.as_ref().map(to_out),
                    above: fit.above.as_ref().map(to_out),
                },
            });
            emit_document(&doc, format, out.as_deref(), "power-law")
        }

        Command::Noise(noise) => run_noise(noise, &config),
        Command::Collisions(collisions) => run_collisions(collisions, &config, &config_digest),

        Command::Report {
            mode,
            out_dir,
            inputs,
        } => {
            let mut docs = Vec::with_capacity(inputs.len());
            for path in &inputs {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("cannot read {}", path.display()))?;
                docs.push(
                    ResultDocument::from_json(&text)
                        .with_context(|| format!("{}", path.display()))?,
                );
            }
            let mode = match mode {
                ReportModeArg::Heating => ReportMode::Heating,
                ReportModeArg::Distance => ReportMode::Distance,
            };
            let written = report(&docs, mode, &out_dir, &config)?;
            for path in written {
                eprintln!("wrote {}", path.display());
            }
            Ok(())
        }
    }
}

fn run_noise(command: NoiseCommand, config: &Config) -> Result<()> {
    let trap = config.trap_config();
    let constants = &config.constants;
    let geometry = GeometryFactor {
        effective_distance_m: config.geometry.effective_distance_m,
    };
    match command {
        NoiseCommand::Convert {
            rate_quanta_per_s,
            se_v2_per_m2_hz,
            format,
            out,
        } => {
            let (rate, se) = match (rate_quanta_per_s, se_v2_per_m2_hz) {
                (Some(rate), None) => (rate, rate_to_se(rate, &trap, constants)?),
                (None, Some(se)) => (se_to_rate(se, &trap, constants)?, se),
                _ => bail!("give exactly one of --rate-quanta-per-s and --se-v2-per-m2-hz"),
            };
            emit_values(
                &[
                    ("rate", Scalar::Number(rate), "quanta/s"),
                    ("se", Scalar::Number(se), "V^2 m^-2 Hz^-1"),
                    (
                        "omega_se",
                        Scalar::Number(se * trap.angular_frequency()),
                        "V^2 m^-2",
                    ),
                    (
                        "angular_frequency",
                        Scalar::Number(trap.angular_frequency()),
                        "rad/s",
                    ),
                ],
                format,
                out.as_deref(),
            )
        }
        NoiseCommand::Johnson {
            temperature_k,
            resistance_ohm,
            format,
            out,
        } => {
            let resistance = resistance_ohm.unwrap_or(config.johnson.resistance_ohm);
            let se = johnson_se(resistance, temperature_k, &geometry, constants)?;
            emit_values(
                &[
                    ("se_johnson", Scalar::Number(se), "V^2 m^-2 Hz^-1"),
                    ("resistance", Scalar::Number(resistance), "ohm"),
                    ("temperature", Scalar::Number(temperature_k), "K"),
                    (
                        "effective_distance",
                        Scalar::Number(geometry.effective_distance_m),
                        "m",
                    ),
                ],
                format,
                out.as_deref(),
            )
        }
        NoiseCommand::GateError {
            rate_quanta_per_s,
            gate_time_s,
            format,
            out,
        } => {
            let error = gate_error(rate_quanta_per_s, gate_time_s)?;
            emit_values(
                &[
                    ("gate_error", Scalar::Number(error), "dimensionless"),
                    ("rate", Scalar::Number(rate_quanta_per_s), "quanta/s"),
                    ("gate_time", Scalar::Number(gate_time_s), "s"),
                ],
                format,
                out.as_deref(),
            )
        }
        NoiseCommand::Rescale {
            se_v2_per_m2_hz,
            d_from_m,
            d_to_m,
            exponent,
            format,
            out,
        } => {
            let rescaled = distance_rescale(se_v2_per_m2_hz, d_from_m, d_to_m, exponent)?;
            emit_values(
                &[
                    ("se_rescaled", Scalar::Number(rescaled), "V^2 m^-2 Hz^-1"),
                    ("d_from", Scalar::Number(d_from_m), "m"),
                    ("d_to", Scalar::Number(d_to_m), "m"),
                    ("exponent", Scalar::Number(exponent), "dimensionless"),
                ],
                format,
                out.as_deref(),
            )
        }
    }
}

fn run_collisions(command: CollisionsCommand, config: &Config, config_digest: &str) -> Result<()> {
    let ion = config.ion_species();
    let constants = &config.constants;
    let coefficient = config.collisions.elastic_rate_coefficient;
    match command {
        CollisionsCommand::Density {
            gamma_e_per_s,
            gas,
            gas_temperature_k,
            format,
            out,
        } => {
            let temperature = gas_temperature(config, gas_temperature_k);
            let species = config.gas_species(&gas, temperature)?;
            let density =
                density_from_elastic_rate_with_coefficient(gamma_e_per_s, &species, &ion, constants, coefficient)?;
            emit_values(
                &[
                    ("density", Scalar::Number(density), "1/cm^3"),
                    ("gamma_e", Scalar::Number(gamma_e_per_s), "1/s"),
                    ("gas", Scalar::Text(gas), ""),
                    ("gas_temperature", Scalar::Number(temperature), "K"),
                ],
                format,
                out.as_deref(),
            )
        }
        CollisionsCommand::Elastic {
            density_per_cm3,
            gas,
            gas_temperature_k,
            format,
            out,
        } => {
            let temperature = gas_temperature(config, gas_temperature_k);
            let species = config.gas_species(&gas, temperature)?;
            let gamma =
                elastic_rate_with_coefficient(density_per_cm3, &species, &ion, constants, coefficient)?;
            emit_values(
                &[
                    ("gamma_e", Scalar::Number(gamma), "1/s"),
                    ("density", Scalar::Number(density_per_cm3), "1/cm^3"),
                    ("gas", Scalar::Text(gas), ""),
                    ("gas_temperature", Scalar::Number(temperature), "K"),
                ],
                format,
                out.as_deref(),
            )
        }
        CollisionsCommand::Langevin {
            density_per_cm3,
            gas,
            gas_temperature_k,
            format,
            out,
        } => {
            let temperature = gas_temperature(config, gas_temperature_k);
            let species = config.gas_species(&gas, temperature)?;
            let gamma = langevin_rate(density_per_cm3, &species, &ion, constants)?;
            emit_values(
                &[
                    ("gamma_i", Scalar::Number(gamma), "1/s"),
                    ("density", Scalar::Number(density_per_cm3), "1/cm^3"),
                    ("gas", Scalar::Text(gas), ""),
                    ("gas_temperature", Scalar::Number(temperature), "K"),
                ],
                format,
                out.as_deref(),
            )
        }
        CollisionsCommand::Fit {
            input,
            gamma_a_quanta_per_s,
            out,
            format,
        } => {
            let points = scanfile::read_series(&input)?;
            let series = HeatingSeries {
                points,
                temperature_k: config.trap.electrode_temperature_k,
                trap_id: config.trap.trap_id.clone(),
            };
            let fit = fit_gamma_e(&series, gamma_a_quanta_per_s, &config.fit)?;
            let gas_temperature_k = config.collisions.gas_temperature_k;
            let mut implied = BTreeMap::new();
            for name in config.gas.keys() {
                let species = config.gas_species(name, gas_temperature_k)?;
                implied.insert(
                    name.clone(),
                    density_from_elastic_rate_with_coefficient(
                        fit.gamma_e,
                        &species,
                        &ion,
                        constants,
                        coefficient,
                    )?,
                );
            }
            let mut doc = ResultDocument::new(
                trap_summary(config),
                Provenance {
                    seed: None,
                    config_digest_sha256: config_digest.to_string(),
                    inputs_digest_sha256: Some(file_digest(&input)?),
                },
            );
            doc.stages.gamma_e_fit = Some(Stage::Ok {
                value: GammaFitOut {
                    assumed_gamma_a_quanta_per_s: gamma_a_quanta_per_s,
                    gamma_e_per_s: fit.gamma_e,
                    gamma_e_sigma_per_s: fit.gamma_e_sigma,
                    nbar0: fit.nbar0,
                    nbar0_sigma: fit.nbar0_sigma,
                    chi2_per_dof: fit.chi2_per_dof,
                    at_validity_boundary: fit.at_validity_boundary,
                    implied_density_per_cm3: implied,
                    gas_temperature_k,
                },
            });
            emit_document(&doc, format, out.as_deref(), "collisions-fit")
        }
        CollisionsCommand::Check {
            lifetime_s,
            delay_s,
            rate_quanta_per_s,
            format,
            out,
        } => {
            let check = collision_safety_check(
                &LifetimeObservation {
                    lifetime_s,
                    delay_s,
                    heating_rate_quanta_per_s: rate_quanta_per_s,
                },
                &config.safety_thresholds(),
            )?;
            let verdict = if !check.passed {
                "fail"
            } else if check.marginal {
                "marginal"
            } else {
                "pass"
            };
            emit_values(
                &[
                    ("verdict", Scalar::Text(verdict.to_string()), ""),
                    (
                        "lifetime_to_delay",
                        Scalar::Number(check.lifetime_to_delay),
                        "dimensionless",
                    ),
                    (
                        "lifetime_heating_product",
                        Scalar::Number(check.lifetime_heating_product),
                        "quanta",
                    ),
                    (
                        "pass_ratio",
                        Scalar::Number(config.thresholds.safety_pass_ratio),
                        "dimensionless",
                    ),
                    (
                        "margin_ratio",
                        Scalar::Number(config.thresholds.safety_margin_ratio),
                        "dimensionless",
                    ),
                ],
                format,
                out.as_deref(),
            )
        }
        CollisionsCommand::Energy {
            gas,
            gas_temperature_k,
            format,
            out,
        } => {
            let temperature = gas_temperature(config, gas_temperature_k);
            let species = config.gas_species(&gas, temperature)?;
            let energy = max_energy_transfer(&species, &ion, constants)?;
            emit_values(
                &[
                    ("max_energy_transfer", Scalar::Number(energy), "eV"),
                    ("gas", Scalar::Text(gas), ""),
                    ("gas_temperature", Scalar::Number(temperature), "K"),
                ],
                format,
                out.as_deref(),
            )
        }
    }
}
