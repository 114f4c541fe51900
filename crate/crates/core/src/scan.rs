//! Sideband scan records, projection-noise errors, lineshape fits, and
//! occupation extraction from red/blue amplitude ratios.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitting::{fit_least_squares, FitOptions};
use crate::sideband::{rabi_lineshape, Sideband};

/// One detuning point of a sideband scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    /// Offset from the nominal sideband frequency, Hz.
    pub detuning_hz: f64,
    pub shots: u32,
    pub bright: u32,
}

/// Raw shot data for one sideband at one probe delay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidebandScan {
    pub delay_s: f64,
    pub probe_duration_s: f64,
    /// Carrier Rabi frequency when known, rad/s. Not needed for fitting.
    pub probe_rabi_rad_s: Option<f64>,
    pub which: Sideband,
    pub points: Vec<ScanPoint>,
}

impl SidebandScan {
    pub fn validate(&self) -> Result<()> {
        if !(self.delay_s >= 0.0) {
            return Err(Error::invalid("scan", "delay must be >= 0"));
        }
        if !(self.probe_duration_s > 0.0) {
            return Err(Error::invalid("scan", "probe duration must be > 0"));
        }
        for (i, p) in self.points.iter().enumerate() {
            if p.shots == 0 {
                return Err(Error::invalid("scan", format!("point {i}: shots must be >= 1")));
            }
            if p.bright > p.shots {
                return Err(Error::invalid(
                    "scan",
                    format!("point {i}: bright {} exceeds shots {}", p.bright, p.shots),
                ));
            }
        }
        Ok(())
    }
}

/// Standard error of a binomial bright fraction including projection noise.
///
/// Returns sqrt(p(1-p)/N). At k = 0 or k = N the estimate is regularized by
/// the rule of succession, p = (k+1)/(N+2), so that degenerate points keep a
/// nonzero weight in downstream fits.
pub fn projection_sigma(bright: u32, shots: u32) -> Result<f64> {
    if shots == 0 {
        return Err(Error::invalid("shots", "must be >= 1"));
    }
    if bright > shots {
        return Err(Error::invalid(
            "bright",
            format!("{bright} exceeds shots {shots}"),
        ));
    }
    let n = f64::from(shots);
    let p = if bright == 0 || bright == shots {
        (f64::from(bright) + 1.0) / (n + 2.0)
    } else {
        f64::from(bright) / n
    };
    Ok((p * (1.0 - p) / n).sqrt())
}

/// Fit diagnostics carried alongside the parameters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanFlags {
    /// Amplitude indistinguishable from zero (below two sigma).
    pub low_signal: bool,
    /// Amplitude ended pinned at 0 or 1.
    pub amplitude_at_bound: bool,
    /// Width ended pinned at its allowed range.
    pub width_at_bound: bool,
    /// Covariance needed regularization; uncertainties are approximate.
    pub degenerate_covariance: bool,
}

/// Parameters of a fitted sideband resonance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanFitResult {
    /// Peak excitation probability.
    pub amplitude: f64,
    pub amplitude_sigma: f64,
    pub center_hz: f64,
    pub center_sigma_hz: f64,
    /// Effective Rabi coupling of the lineshape, Hz.
    pub width_hz: f64,
    pub width_sigma_hz: f64,
    pub chi2_per_dof: f64,
    pub iterations: usize,
    pub flags: ScanFlags,
}

/// Minimum number of detuning points for a lineshape fit.
pub const MIN_SCAN_POINTS: usize = 5;

/// Weighted fit of `amplitude * lineshape(detuning; center, width)` to
/// excitation estimates with known uncertainties.
///
/// `points` holds (detuning Hz, excitation estimate, sigma). Uncertainties on
/// the returned parameters come from the quadratic approximation at the
/// optimum; the per-point sigmas are treated as known.
pub fn fit_lineshape(
    points: &[(f64, f64, f64)],
    probe_duration_s: f64,
    options: &FitOptions,
) -> Result<ScanFitResult> {
    if points.len() < MIN_SCAN_POINTS {
        return Err(Error::InsufficientData {
            what: "detuning points",
            needed: MIN_SCAN_POINTS,
            got: points.len(),
        });
    }
    if !(probe_duration_s > 0.0) {
        return Err(Error::invalid("probe_duration", "must be > 0"));
    }
    for &(_, p, s) in points {
        if !p.is_finite() || !(s > 0.0) || !s.is_finite() {
            return Err(Error::invalid("scan", "excitation estimates and sigmas must be finite, sigma > 0"));
        }
    }

    let mut detunings: Vec<f64> = points.iter().map(|p| p.0).collect();
    detunings.sort_by(f64::total_cmp);
    let span = detunings[detunings.len() - 1] - detunings[0];
    let min_step = detunings
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|&d| d > 0.0)
        .fold(f64::INFINITY, f64::min);
    if !(span > 0.0) || !min_step.is_finite() {
        return Err(Error::RankDeficient {
            message: "scan needs distinct detunings".into(),
        });
    }

    // Data-driven initialization: center at the maximum excitation, amplitude
    // at that maximum, width from the second moment of the excess signal.
    let &(peak_detuning, peak_p, _) = points
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty");
    let floor = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min).max(0.0);
    let mut m0 = 0.0;
    let mut m2 = 0.0;
    for &(d, p, _) in points {
        let excess = (p - floor).max(0.0);
        m0 += excess;
        m2 += excess * (d - peak_detuning) * (d - peak_detuning);
    }
    let width_cap = 0.95 / probe_duration_s;
    let width_floor = (min_step / 10.0).min(width_cap / 100.0);
    let width_init = if m0 > 0.0 {
        (m2 / m0).sqrt().clamp(width_floor, width_cap)
    } else {
        (span / 4.0).clamp(width_floor, width_cap)
    };
    let amplitude_init = peak_p.clamp(0.0, 1.0);

    let initial = [amplitude_init, peak_detuning, width_init];
    let lower = [0.0, detunings[0] - span / 2.0, width_floor];
    let upper = [1.0, detunings[detunings.len() - 1] + span / 2.0, width_cap];
    let scales = [0.1, min_step.max(span / 100.0), width_init];

    let residuals = |p: &[f64]| -> Vec<f64> {
        points
            .iter()
            .map(|&(d, y, s)| (p[0] * rabi_lineshape(d - p[1], p[2], probe_duration_s) - y) / s)
            .collect()
    };

    let outcome = fit_least_squares(residuals, &initial, &lower, &upper, &scales, options)?;
    let dof = points.len().saturating_sub(3).max(1);

    let amplitude = outcome.params[0];
    let amplitude_sigma = outcome.sigmas[0];
    let flags = ScanFlags {
        low_signal: amplitude < 2.0 * amplitude_sigma,
        amplitude_at_bound: outcome.at_lower_bound[0] || outcome.at_upper_bound[0],
        width_at_bound: outcome.at_lower_bound[2] || outcome.at_upper_bound[2],
        degenerate_covariance: outcome.degenerate_covariance,
    };

    Ok(ScanFitResult {
        amplitude,
        amplitude_sigma,
        center_hz: outcome.params[1],
        center_sigma_hz: outcome.sigmas[1],
        width_hz: outcome.params[2],
        width_sigma_hz: outcome.sigmas[2],
        chi2_per_dof: outcome.chi2 / dof as f64,
        iterations: outcome.iterations,
        flags,
    })
}

/// Fit a sideband scan: bright fractions with projection-noise sigmas, then
/// [`fit_lineshape`].
pub fn fit_scan(scan: &SidebandScan, options: &FitOptions) -> Result<ScanFitResult> {
    scan.validate()?;
    let points: Result<Vec<(f64, f64, f64)>> = scan
        .points
        .iter()
        .map(|p| {
            let sigma = projection_sigma(p.bright, p.shots)?;
            Ok((p.detuning_hz, f64::from(p.bright) / f64::from(p.shots), sigma))
        })
        .collect();
    fit_lineshape(&points?, scan.probe_duration_s, options)
}

/// Mean occupation and its uncertainty from a red/blue amplitude pair.
///
/// r = A_red / A_blue, nbar = r / (1 - r), with first-order propagation of
/// the two independent amplitude uncertainties:
/// sigma_nbar = sigma_r / (1 - r)^2.
pub fn nbar_from_scans(red: &ScanFitResult, blue: &ScanFitResult) -> Result<(f64, f64)> {
    if !(blue.amplitude > 0.0) {
        return Err(Error::invalid(
            "blue amplitude",
            format!("must be > 0 to form a ratio, got {}", blue.amplitude),
        ));
    }
    if red.amplitude < 0.0 {
        return Err(Error::invalid("red amplitude", "must be >= 0"));
    }
    let r = red.amplitude / blue.amplitude;
    if r >= 1.0 {
        return Err(Error::SaturatedRatio { ratio: r });
    }
    let dr_red = 1.0 / blue.amplitude;
    let dr_blue = r / blue.amplitude;
    let sigma_r = ((red.amplitude_sigma * dr_red).powi(2)
        + (blue.amplitude_sigma * dr_blue).powi(2))
    .sqrt();
    let nbar = r / (1.0 - r);
    let sigma_nbar = sigma_r / ((1.0 - r) * (1.0 - r));
    Ok((nbar, sigma_nbar))
}
