//! CSV schemas. All files carry explicit headers with SI-unit suffixes and
//! parse strictly: a malformed row or broken invariant is an error naming the
//! line.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use ionheat_core::heating::HeatingPoint;
use ionheat_core::scan::{ScanPoint, SidebandScan};
use ionheat_core::Sideband;

use crate::config::ProbeSection;

/// Header of a sideband scan file.
pub const SCAN_HEADER: [&str; 5] = ["delay_s", "sideband", "detuning_hz", "shots", "bright"];
/// Header of an occupation-versus-delay series file.
pub const SERIES_HEADER: [&str; 3] = ["delay_s", "nbar", "sigma"];
/// Header of a heating-rate-versus-temperature file.
pub const RATES_HEADER: [&str; 3] = ["temperature_k", "rate_quanta_per_s", "sigma_quanta_per_s"];

/// One row of a scan file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanFileRow {
    pub delay_s: f64,
    pub sideband: Sideband,
    pub detuning_hz: f64,
    pub shots: u32,
    pub bright: u32,
}

fn check_header(reader: &mut csv::Reader<std::fs::File>, expected: &[&str], path: &Path) -> Result<()> {
    let headers = reader
        .headers()
        .with_context(|| format!("cannot read header of {}", path.display()))?;
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        bail!(
            "{}: header mismatch\n  expected: {}\n  found:    {}",
            path.display(),
            expected.join(","),
            got.join(",")
        );
    }
    Ok(())
}

/// Read a scan file and group rows into per-(delay, sideband) scans, ordered
/// by delay then sideband, points ordered by detuning. Probe metadata comes
/// from the config, not the file.
pub fn ingest_scans(path: &Path, probe: &ProbeSection) -> Result<Vec<SidebandScan>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    check_header(&mut reader, &SCAN_HEADER, path)?;

    // Keyed by (delay bits, sideband); nonnegative f64 bits order numerically.
    let mut groups: std::collections::BTreeMap<(u64, u8), Vec<ScanPoint>> =
        std::collections::BTreeMap::new();
    let mut rows = 0usize;
    for (index, record) in reader.deserialize::<ScanFileRow>().enumerate() {
        let line = index + 2; // header is line 1
        let row = record.with_context(|| format!("{}: line {line}: malformed row", path.display()))?;
        if !(row.delay_s >= 0.0) {
            bail!("{}: line {line}: delay_s must be >= 0", path.display());
        }
        if row.shots == 0 {
            bail!("{}: line {line}: shots must be >= 1", path.display());
        }
        if row.bright > row.shots {
            bail!(
                "{}: line {line}: bright {} exceeds shots {}",
                path.display(),
                row.bright,
                row.shots
            );
        }
        let key = (row.delay_s.to_bits(), row.sideband as u8);
        groups.entry(key).or_default().push(ScanPoint {
            detuning_hz: row.detuning_hz,
            shots: row.shots,
            bright: row.bright,
        });
        rows += 1;
    }
    if rows == 0 {
        eprintln!("warning: {}: no data rows", path.display());
        return Ok(Vec::new());
    }

    let mut scans = Vec::with_capacity(groups.len());
    for ((delay_bits, sideband_index), mut points) in groups {
        points.sort_by(|a, b| a.detuning_hz.total_cmp(&b.detuning_hz));
        let scan = SidebandScan {
            delay_s: f64::from_bits(delay_bits),
            probe_duration_s: probe.duration_s,
            probe_rabi_rad_s: Some(probe.rabi_rad_per_s),
            which: if sideband_index == 0 { Sideband::Red } else { Sideband::Blue },
            points,
        };
        scan.validate()
            .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        scans.push(scan);
    }
    Ok(scans)
}

/// Write scans in the same row order the simulator produced them.
pub fn write_scans(path: &Path, scans: &[SidebandScan]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    for scan in scans {
        for point in &scan.points {
            writer.serialize(ScanFileRow {
                delay_s: scan.delay_s,
                sideband: scan.which,
                detuning_hz: point.detuning_hz,
                shots: point.shots,
                bright: point.bright,
            })?;
        }
    }
    writer.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SeriesRow {
    delay_s: f64,
    nbar: f64,
    sigma: f64,
}

/// Read an occupation series (delay_s, nbar, sigma).
pub fn read_series(path: &Path) -> Result<Vec<HeatingPoint>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    check_header(&mut reader, &SERIES_HEADER, path)?;
    let mut points = Vec::new();
    for (index, record) in reader.deserialize::<SeriesRow>().enumerate() {
        let line = index + 2;
        let row = record.with_context(|| format!("{}: line {line}: malformed row", path.display()))?;
        points.push(HeatingPoint {
            delay_s: row.delay_s,
            nbar: row.nbar,
            sigma: row.sigma,
        });
    }
    Ok(points)
}

/// Write an occupation series.
pub fn write_series(path: &Path, points: &[HeatingPoint]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    for p in points {
        writer.serialize(SeriesRow {
            delay_s: p.delay_s,
            nbar: p.nbar,
            sigma: p.sigma,
        })?;
    }
    writer.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RateRow {
    temperature_k: f64,
    rate_quanta_per_s: f64,
    sigma_quanta_per_s: f64,
}

/// Read heating-rate-versus-temperature points.
pub fn read_rate_points(path: &Path) -> Result<Vec<(f64, f64, f64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    check_header(&mut reader, &RATES_HEADER, path)?;
    let mut points = Vec::new();
    for (index, record) in reader.deserialize::<RateRow>().enumerate() {
        let line = index + 2;
        let row = record.with_context(|| format!("{}: line {line}: malformed row", path.display()))?;
        points.push((row.temperature_k, row.rate_quanta_per_s, row.sigma_quanta_per_s));
    }
    Ok(points)
}
