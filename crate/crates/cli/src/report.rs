//! Plot-ready tables (CSV) and static figures (SVG) from result documents:
//! heating rate versus temperature with power-law overlays, and frequency-
//! normalized field noise versus ion-electrode distance with a d^-4 guide.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use ionheat_core::heating::fit_power_law;

use crate::config::Config;
use crate::resultdoc::ResultDocument;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportMode {
    Heating,
    Distance,
}

#[derive(Debug, Serialize)]
struct HeatingTableRow {
    temperature_k: f64,
    rate_quanta_per_s: f64,
    sigma_quanta_per_s: f64,
    trap_id: String,
}

#[derive(Debug, Serialize)]
struct OverlayRow {
    segment: String,
    temperature_k: f64,
    rate_quanta_per_s: f64,
}

#[derive(Debug, Serialize)]
struct DistanceTableRow {
    distance_m: f64,
    omega_se_v2_per_m2: f64,
    label: String,
}

#[derive(Debug, Serialize)]
struct GuideRow {
    distance_m: f64,
    omega_se_v2_per_m2: f64,
}

/// Emit tables and a figure for the requested mode. Returns the files
/// written.
pub fn report(
    docs: &[ResultDocument],
    mode: ReportMode,
    out_dir: &Path,
    config: &Config,
) -> Result<Vec<PathBuf>> {
    if docs.is_empty() {
        bail!("report needs at least one result document");
    }
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create {}", out_dir.display()))?;
    match mode {
        ReportMode::Heating => heating_report(docs, out_dir, config),
        ReportMode::Distance => distance_report(docs, out_dir),
    }
}

fn heating_report(docs: &[ResultDocument], out_dir: &Path, config: &Config) -> Result<Vec<PathBuf>> {
    let mut rows: Vec<HeatingTableRow> = Vec::new();
    for doc in docs {
        let Some(stage) = doc.stages.heating_rate.as_ref() else {
            continue;
        };
        let Some(rate) = stage.value() else { continue };
        if rate.rate_quanta_per_s <= 0.0 {
            eprintln!(
                "warning: {}: nonpositive rate {}; dropped from log-log report",
                doc.trap.trap_id, rate.rate_quanta_per_s
            );
            continue;
        }
        rows.push(HeatingTableRow {
            temperature_k: doc.trap.electrode_temperature_k,
            rate_quanta_per_s: rate.rate_quanta_per_s,
            sigma_quanta_per_s: rate.rate_sigma_quanta_per_s.max(1e-12),
            trap_id: doc.trap.trap_id.clone(),
        });
    }
    if rows.is_empty() {
        bail!("no documents with a positive fitted heating rate");
    }
    rows.sort_by(|a, b| {
        a.temperature_k
            .total_cmp(&b.temperature_k)
            .then_with(|| a.trap_id.cmp(&b.trap_id))
    });

    let table_path = out_dir.join("heating_table.csv");
    write_csv(&table_path, &rows)?;

    // Per-segment overlay; a segment needs two points to be drawable.
    let points: Vec<(f64, f64, f64)> = rows
        .iter()
        .map(|r| (r.temperature_k, r.rate_quanta_per_s, r.sigma_quanta_per_s))
        .collect();
    let breakpoint = config.thresholds.power_law_breakpoint_k;
    let mut overlay: Vec<OverlayRow> = Vec::new();
    if let Ok(fit) = fit_power_law(&points, breakpoint) {
        let t_min = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let t_max = points.iter().map(|p| p.0).fold(0.0f64, f64::max);
        for (name, segment, lo, hi) in [
            ("below", &fit.below, t_min, breakpoint.min(t_max)),
            ("above", &fit.above, breakpoint.max(t_min), t_max),
        ] {
            let Some(seg) = segment else { continue };
            if !(hi > lo) {
                continue;
            }
            for i in 0..=50 {
                let t = lo * (hi / lo).powf(f64::from(i) / 50.0);
                overlay.push(OverlayRow {
                    segment: name.to_string(),
                    temperature_k: t,
                    rate_quanta_per_s: seg.prefactor * t.powf(seg.exponent),
                });
            }
        }
    }
    let overlay_path = out_dir.join("heating_power_law.csv");
    write_csv(&overlay_path, &overlay)?;

    let svg_path = out_dir.join("heating.svg");
    let scatter: Vec<(f64, f64, String)> = rows
        .iter()
        .map(|r| (r.temperature_k, r.rate_quanta_per_s, r.trap_id.clone()))
        .collect();
    let mut curves: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for name in ["below", "above"] {
        let pts: Vec<(f64, f64)> = overlay
            .iter()
            .filter(|r| r.segment == name)
            .map(|r| (r.temperature_k, r.rate_quanta_per_s))
            .collect();
        if !pts.is_empty() {
            curves.push((name.to_string(), pts));
        }
    }
    std::fs::write(
        &svg_path,
        loglog_svg(
            "electrode temperature (K)",
            "heating rate (quanta/s)",
            &scatter,
            &curves,
        ),
    )?;

    Ok(vec![table_path, overlay_path, svg_path])
}

fn distance_report(docs: &[ResultDocument], out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut rows: Vec<DistanceTableRow> = Vec::new();
    for doc in docs {
        let Some(stage) = doc.stages.field_noise.as_ref() else {
            continue;
        };
        let Some(noise) = stage.value() else { continue };
        if noise.omega_se_v2_per_m2 <= 0.0 {
            continue;
        }
        rows.push(DistanceTableRow {
            distance_m: noise.distance_m,
            omega_se_v2_per_m2: noise.omega_se_v2_per_m2,
            label: doc.trap.trap_id.clone(),
        });
    }
    if rows.is_empty() {
        bail!("no documents with a field-noise stage");
    }
    rows.sort_by(|a, b| {
        a.distance_m
            .total_cmp(&b.distance_m)
            .then_with(|| a.label.cmp(&b.label))
    });

    let table_path = out_dir.join("distance_table.csv");
    write_csv(&table_path, &rows)?;

    // d^-4 guide anchored at the closest-in point, spanning the data range
    // (widened when all points sit at one distance).
    let d_ref = rows[0].distance_m;
    let v_ref = rows[0].omega_se_v2_per_m2;
    let d_min = rows.iter().map(|r| r.distance_m).fold(f64::INFINITY, f64::min);
    let mut d_max = rows.iter().map(|r| r.distance_m).fold(0.0f64, f64::max);
    if d_max <= d_min {
        d_max = d_min * 4.0;
    }
    let mut guide = Vec::with_capacity(51);
    for i in 0..=50 {
        let d = d_min * (d_max / d_min).powf(f64::from(i) / 50.0);
        guide.push(GuideRow {
            distance_m: d,
            omega_se_v2_per_m2: v_ref * (d_ref / d).powi(4),
        });
    }
    let guide_path = out_dir.join("distance_guide.csv");
    write_csv(&guide_path, &guide)?;

    let svg_path = out_dir.join("distance.svg");
    let scatter: Vec<(f64, f64, String)> = rows
        .iter()
        .map(|r| (r.distance_m, r.omega_se_v2_per_m2, r.label.clone()))
        .collect();
    let curves = vec![(
        "d^-4".to_string(),
        guide
            .iter()
            .map(|g| (g.distance_m, g.omega_se_v2_per_m2))
            .collect::<Vec<_>>(),
    )];
    std::fs::write(
        &svg_path,
        loglog_svg(
            "ion-electrode distance (m)",
            "omega * S_E (V^2/m^2)",
            &scatter,
            &curves,
        ),
    )?;

    Ok(vec![table_path, guide_path, svg_path])
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut writer =
        csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Minimal deterministic log-log figure: scatter points plus overlay curves.
fn loglog_svg(
    x_label: &str,
    y_label: &str,
    scatter: &[(f64, f64, String)],
    curves: &[(String, Vec<(f64, f64)>)],
) -> String {
    let (width, height, margin) = (640.0, 440.0, 60.0);
    let mut xs: Vec<f64> = scatter.iter().map(|p| p.0).collect();
    let mut ys: Vec<f64> = scatter.iter().map(|p| p.1).collect();
    for (_, pts) in curves {
        xs.extend(pts.iter().map(|p| p.0));
        ys.extend(pts.iter().map(|p| p.1));
    }
    let (x_min, x_max) = padded_log_bounds(&xs);
    let (y_min, y_max) = padded_log_bounds(&ys);
    let map_x = |x: f64| {
        margin + (x.log10() - x_min) / (x_max - x_min) * (width - 2.0 * margin)
    };
    let map_y = |y: f64| {
        height - margin - (y.log10() - y_min) / (y_max - y_min) * (height - 2.0 * margin)
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    );
    let _ = writeln!(svg, "  <rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "  <rect x=\"{margin}\" y=\"{margin}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        width - 2.0 * margin,
        height - 2.0 * margin
    );
    let _ = writeln!(
        svg,
        "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"13\">{}</text>",
        width / 2.0,
        height - margin / 3.0,
        x_label
    );
    let _ = writeln!(
        svg,
        "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 {:.1} {:.1})\">{}</text>",
        margin / 3.0,
        height / 2.0,
        margin / 3.0,
        height / 2.0,
        y_label
    );
    // Decade ticks.
    for decade in (x_min.ceil() as i64)..=(x_max.floor() as i64) {
        let x = map_x(10f64.powi(decade as i32));
        let _ = writeln!(
            svg,
            "  <line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#cccccc\"/>",
            margin,
            height - margin
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"11\">1e{decade}</text>",
            height - margin + 16.0
        );
    }
    for decade in (y_min.ceil() as i64)..=(y_max.floor() as i64) {
        let y = map_y(10f64.powi(decade as i32));
        let _ = writeln!(
            svg,
            "  <line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#cccccc\"/>",
            margin,
            width - margin
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{:.2}\" y=\"{y:.2}\" text-anchor=\"end\" font-size=\"11\">1e{decade}</text>",
            margin - 6.0
        );
    }
    for (index, (name, pts)) in curves.iter().enumerate() {
        let color = PALETTE[index % PALETTE.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", map_x(x), map_y(y)))
            .collect();
        let _ = writeln!(
            svg,
            "  <polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"><title>{name}</title></polyline>",
            path.join(" ")
        );
    }
    // Stable label -> color assignment in first-appearance order.
    let mut labels: Vec<&str> = Vec::new();
    for (_, _, label) in scatter {
        if !labels.contains(&label.as_str()) {
            labels.push(label);
        }
    }
    for &(x, y, ref label) in scatter {
        let color_index = labels.iter().position(|&l| l == label).unwrap_or(0);
        let color = PALETTE[(color_index + curves.len()) % PALETTE.len()];
        let _ = writeln!(
            svg,
            "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"{color}\"><title>{label}</title></circle>",
            map_x(x),
            map_y(y)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn padded_log_bounds(values: &[f64]) -> (f64, f64) {
    let positive: Vec<f64> = values.iter().copied().filter(|&v| v > 0.0).collect();
    if positive.is_empty() {
        return (0.0, 1.0);
    }
    let min = positive.iter().copied().fold(f64::INFINITY, f64::min).log10();
    let max = positive.iter().copied().fold(f64::NEG_INFINITY, f64::max).log10();
    if (max - min).abs() < 1e-9 {
        (min - 0.5, max + 0.5)
    } else {
        let pad = 0.05 * (max - min);
        (min - pad, max + pad)
    }
}
