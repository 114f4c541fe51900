//! Heating-rate extraction from occupation-versus-delay series and segmented
//! power-law fits of heating rate versus electrode temperature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitting::weighted_linear_fit;

/// One (delay, occupation) measurement with uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatingPoint {
    pub delay_s: f64,
    pub nbar: f64,
    pub sigma: f64,
}

/// Occupation versus probe delay at a fixed electrode temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatingSeries {
    pub points: Vec<HeatingPoint>,
    pub temperature_k: f64,
    pub trap_id: String,
}

impl HeatingSeries {
    pub fn validate(&self) -> Result<()> {
        for (i, p) in self.points.iter().enumerate() {
            if !(p.delay_s >= 0.0) {
                return Err(Error::invalid("series", format!("point {i}: delay must be >= 0")));
            }
            if !(p.sigma > 0.0) || !p.sigma.is_finite() {
                return Err(Error::invalid("series", format!("point {i}: sigma must be > 0")));
            }
        }
        Ok(())
    }
}

/// Fitted heating rate d<n>/dt with its zero-delay intercept.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeatingRateResult {
    /// quanta per second
    pub rate_quanta_per_s: f64,
    pub rate_sigma: f64,
    /// Occupation extrapolated to zero delay (imperfect preparation).
    pub intercept: f64,
    pub intercept_sigma: f64,
    /// [[var(intercept), cov], [cov, var(rate)]]
    pub covariance: [[f64; 2]; 2],
    pub chi2_per_dof: f64,
    /// The intercept came out negative. Physically it should be >= 0; the
    /// value is reported as fitted rather than clipped.
    pub negative_intercept: bool,
}

/// Weighted linear fit `<n>(t) = intercept + rate * t` over a delay series.
pub fn fit_heating_rate(series: &HeatingSeries) -> Result<HeatingRateResult> {
    series.validate()?;
    if series.points.len() < 3 {
        return Err(Error::InsufficientData {
            what: "delay points",
            needed: 3,
            got: series.points.len(),
        });
    }
    let first = series.points[0].delay_s;
    if series.points.iter().all(|p| p.delay_s == first) {
        return Err(Error::RankDeficient {
            message: "all delays equal; the rate is unconstrained".into(),
        });
    }
    let mut seen = series.points.iter().map(|p| p.delay_s).collect::<Vec<_>>();
    seen.sort_by(f64::total_cmp);
    if seen.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::invalid("series", "delays must be distinct"));
    }

    let x: Vec<f64> = series.points.iter().map(|p| p.delay_s).collect();
    let y: Vec<f64> = series.points.iter().map(|p| p.nbar).collect();
    let s: Vec<f64> = series.points.iter().map(|p| p.sigma).collect();
    let fit = weighted_linear_fit(&x, &y, &s)?;

    Ok(HeatingRateResult {
        rate_quanta_per_s: fit.slope,
        rate_sigma: fit.slope_sigma,
        intercept: fit.intercept,
        intercept_sigma: fit.intercept_sigma,
        covariance: fit.covariance,
        chi2_per_dof: fit.chi2 / fit.dof.max(1) as f64,
        negative_intercept: fit.intercept < 0.0,
    })
}

/// Power-law fit of one temperature segment: rate = prefactor * T^exponent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerLawSegment {
    pub exponent: f64,
    pub exponent_sigma: f64,
    pub prefactor: f64,
    pub prefactor_sigma: f64,
    pub n_points: usize,
}

/// Two-segment power-law result split at a fixed breakpoint temperature.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerLawResult {
    pub breakpoint_k: f64,
    /// Segment with T < breakpoint, when that side has data.
    pub below: Option<PowerLawSegment>,
    /// Segment with T >= breakpoint, when that side has data.
    pub above: Option<PowerLawSegment>,
}

/// Independent weighted log-log line fits on each side of `breakpoint_k`.
///
/// `points` holds (temperature K, rate quanta/s, sigma quanta/s); all three
/// must be strictly positive. A side with no data is skipped; a side with a
/// single point is an error (its exponent would be unconstrained).
pub fn fit_power_law(points: &[(f64, f64, f64)], breakpoint_k: f64) -> Result<PowerLawResult> {
    if !(breakpoint_k > 0.0) {
        return Err(Error::invalid("breakpoint", "must be > 0"));
    }
    for &(t, rate, sigma) in points {
        if !(t > 0.0) || !(rate > 0.0) || !(sigma > 0.0) {
            return Err(Error::invalid(
                "power law",
                format!("temperatures, rates, and sigmas must be > 0 (got T={t}, rate={rate}, sigma={sigma})"),
            ));
        }
    }

    let below: Vec<_> = points.iter().copied().filter(|p| p.0 < breakpoint_k).collect();
    let above: Vec<_> = points.iter().copied().filter(|p| p.0 >= breakpoint_k).collect();
    if below.is_empty() && above.is_empty() {
        return Err(Error::InsufficientData {
            what: "power-law points",
            needed: 2,
            got: 0,
        });
    }

    let fit_segment = |segment: &[(f64, f64, f64)]| -> Result<Option<PowerLawSegment>> {
        if segment.is_empty() {
            return Ok(None);
        }
        if segment.len() < 2 {
            return Err(Error::InsufficientData {
                what: "points in a power-law segment",
                needed: 2,
                got: segment.len(),
            });
        }
        let x: Vec<f64> = segment.iter().map(|p| p.0.ln()).collect();
        let y: Vec<f64> = segment.iter().map(|p| p.1.ln()).collect();
        // First-order transform of the uncertainty into log space.
        let s: Vec<f64> = segment.iter().map(|p| p.2 / p.1).collect();
        let fit = weighted_linear_fit(&x, &y, &s)?;
        let prefactor = fit.intercept.exp();
        Ok(Some(PowerLawSegment {
            exponent: fit.slope,
            exponent_sigma: fit.slope_sigma,
            prefactor,
            prefactor_sigma: prefactor * fit.intercept_sigma,
            n_points: segment.len(),
        }))
    };

    Ok(PowerLawResult {
        breakpoint_k,
        below: fit_segment(&below)?,
        above: fit_segment(&above)?,
    })
}
