//! Apparent motional heating from rare elastic collisions with background
//! gas: the combined-rate sideband ratio, elastic-rate/density inversion,
//! Langevin capture rates, collision energy-transfer bounds, and the
//! lifetime-based rule of thumb for when collisions can be neglected.

use serde::{Deserialize, Serialize};

use crate::constants::Constants;
use crate::error::{Error, Result};
use crate::fitting::{fit_least_squares, unweighted_slope, FitOptions};
use crate::heating::HeatingSeries;
use crate::species::{GasSpecies, IonSpecies};

/// Rates entering the combined collision-plus-heating model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionModel {
    /// Elastic collision rate, s^-1.
    pub gamma_e: f64,
    /// Ordinary (anomalous) heating rate, quanta/s.
    pub gamma_a: f64,
}

impl CollisionModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_e >= 0.0) || !(self.gamma_a >= 0.0) {
            return Err(Error::invalid("collision model", "rates must be >= 0"));
        }
        Ok(())
    }
}

/// Ion lifetime alongside the probe timing and measured heating rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifetimeObservation {
    pub lifetime_s: f64,
    pub delay_s: f64,
    pub heating_rate_quanta_per_s: f64,
}

fn check_validity(gamma_e: f64, t_d: f64) -> Result<f64> {
    if !(gamma_e >= 0.0) {
        return Err(Error::invalid("gamma_e", "must be >= 0"));
    }
    if !(t_d >= 0.0) {
        return Err(Error::invalid("t_d", "must be >= 0"));
    }
    let x = gamma_e * t_d;
    if x >= 1.0 {
        return Err(Error::ModelValidity { value: x });
    }
    Ok(x)
}

/// Occupation inferred by the sideband ratio when the only signal is rare
/// elastic collisions: <n> = x / (1 - x) with x = gamma_e * t_D.
///
/// The ensemble is not thermal here; this is what the thermal-state formula
/// reports anyway, which is exactly how collisions fake a heating rate.
pub fn nbar_collisions_only(gamma_e: f64, t_d: f64) -> Result<f64> {
    let x = check_validity(gamma_e, t_d)?;
    Ok(x / (1.0 - x))
}

/// Sideband ratio when elastic collisions (rate gamma_e) ride on ordinary
/// heating (rate gamma_a):
/// r = x + (1 - x) * y / (1 + y), x = gamma_e t_D, y = gamma_a t_D.
pub fn sideband_ratio_combined(model: &CollisionModel, t_d: f64) -> Result<f64> {
    model.validate()?;
    let x = check_validity(model.gamma_e, t_d)?;
    let y = model.gamma_a * t_d;
    Ok(x + (1.0 - x) * y / (1.0 + y))
}

/// Measured occupation under the combined model:
/// <n> = (gamma_e + gamma_a) t_D / (1 - gamma_e t_D).
///
/// Algebraically identical to r/(1 - r) applied to
/// [`sideband_ratio_combined`].
pub fn nbar_combined(model: &CollisionModel, t_d: f64) -> Result<f64> {
    model.validate()?;
    let x = check_validity(model.gamma_e, t_d)?;
    Ok((model.gamma_e + model.gamma_a) * t_d / (1.0 - x))
}

/// Apparent heating rate from a naive straight-line fit of the combined
/// occupation over a delay grid. Always at least gamma_e + gamma_a, and
/// approaches that sum as the grid shrinks toward zero delay; longer grids
/// inflate the slope through the 1/(1 - gamma_e t) denominator.
pub fn apparent_linear_rate(model: &CollisionModel, delays_s: &[f64]) -> Result<f64> {
    if delays_s.len() < 2 {
        return Err(Error::InsufficientData {
            what: "delays",
            needed: 2,
            got: delays_s.len(),
        });
    }
    let nbars: Result<Vec<f64>> = delays_s.iter().map(|&t| nbar_combined(model, t)).collect();
    unweighted_slope(delays_s, &nbars?)
}

/// Elastic-rate fit with the anomalous rate held fixed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GammaFitResult {
    pub gamma_e: f64,
    pub gamma_e_sigma: f64,
    pub nbar0: f64,
    pub nbar0_sigma: f64,
    pub chi2_per_dof: f64,
    /// Best fit ran into gamma_e t_D -> 1; the model is not trustworthy there.
    pub at_validity_boundary: bool,
}

/// Weighted fit of `<n>(t) = nbar0 + (gamma_e + gamma_a) t / (1 - gamma_e t)`
/// to a heating series, with `gamma_a` fixed.
pub fn fit_gamma_e(
    series: &HeatingSeries,
    gamma_a: f64,
    options: &FitOptions,
) -> Result<GammaFitResult> {
    if !(gamma_a >= 0.0) {
        return Err(Error::invalid("gamma_a", "must be >= 0"));
    }
    series.validate()?;
    if series.points.len() < 3 {
        return Err(Error::InsufficientData {
            what: "delay points",
            needed: 3,
            got: series.points.len(),
        });
    }
    let max_delay = series
        .points
        .iter()
        .map(|p| p.delay_s)
        .fold(0.0f64, f64::max);
    if !(max_delay > 0.0) {
        return Err(Error::RankDeficient {
            message: "series needs a nonzero delay span".into(),
        });
    }
    let gamma_cap = 0.999 / max_delay;

    // Data-driven start: the naive slope minus the fixed anomalous rate.
    let x: Vec<f64> = series.points.iter().map(|p| p.delay_s).collect();
    let y: Vec<f64> = series.points.iter().map(|p| p.nbar).collect();
    let naive = unweighted_slope(&x, &y).unwrap_or(gamma_a);
    let gamma_init = (naive - gamma_a).clamp(0.0, 0.9 * gamma_cap);
    let nbar0_init = series
        .points
        .iter()
        .map(|p| p.nbar)
        .fold(f64::INFINITY, f64::min)
        .clamp(-0.5, 10.0);

    let residuals = |p: &[f64]| -> Vec<f64> {
        series
            .points
            .iter()
            .map(|pt| {
                let x = p[1] * pt.delay_s;
                let model = p[0] + (p[1] + gamma_a) * pt.delay_s / (1.0 - x);
                (model - pt.nbar) / pt.sigma
            })
            .collect()
    };

    // nbar0 is allowed slightly negative so noise does not pin it at zero.
    let outcome = fit_least_squares(
        residuals,
        &[nbar0_init, gamma_init],
        &[-1.0, 0.0],
        &[100.0, gamma_cap],
        &[0.1, 0.1 / max_delay],
        options,
    )?;

    let dof = series.points.len().saturating_sub(2).max(1);
    Ok(GammaFitResult {
        gamma_e: outcome.params[1],
        gamma_e_sigma: outcome.sigmas[1],
        nbar0: outcome.params[0],
        nbar0_sigma: outcome.sigmas[0],
        chi2_per_dof: outcome.chi2 / dof as f64,
        at_validity_boundary: outcome.at_upper_bound[1],
    })
}

/// Coefficient of the thermally averaged elastic rate constant for the
/// ion--induced-dipole interaction,
///
/// ```text
/// <sigma v> = C * vbar^(1/3) * alpha^(2/3)
/// ```
///
/// with `vbar = sqrt(2 kB T / mu)` in m/s, `alpha` the polarizability volume
/// in 1e-24 cm^3, and the rate constant in cm^3/s. The value is pinned so
/// that a 10 s^-1 elastic rate at 55 K maps to the benchmark background
/// density of ~1e9 cm^-3 for the H2/N2/O2 species table.
pub const ELASTIC_RATE_COEFFICIENT: f64 = 1.23e-9;

/// Elastic collision rate gamma_e = n_d <sigma v>, s^-1, for a background
/// density in cm^-3.
pub fn elastic_rate(
    density_per_cm3: f64,
    gas: &GasSpecies,
    ion: &IonSpecies,
    constants: &Constants,
) -> Result<f64> {
    elastic_rate_with_coefficient(density_per_cm3, gas, ion, constants, ELASTIC_RATE_COEFFICIENT)
}

/// [`elastic_rate`] with an explicit rate-constant coefficient (config
/// override).
pub fn elastic_rate_with_coefficient(
    density_per_cm3: f64,
    gas: &GasSpecies,
    ion: &IonSpecies,
    constants: &Constants,
    coefficient: f64,
) -> Result<f64> {
    if !(density_per_cm3 >= 0.0) {
        return Err(Error::invalid("density", "must be >= 0"));
    }
    Ok(density_per_cm3 * elastic_rate_constant(gas, ion, constants, coefficient)?)
}

/// Background density in cm^-3 implied by an elastic collision rate; exact
/// inverse of [`elastic_rate`].
pub fn density_from_elastic_rate(
    gamma_e: f64,
    gas: &GasSpecies,
    ion: &IonSpecies,
    constants: &Constants,
) -> Result<f64> {
    density_from_elastic_rate_with_coefficient(gamma_e, gas, ion, constants, ELASTIC_RATE_COEFFICIENT)
}

/// [`density_from_elastic_rate`] with an explicit coefficient.
pub fn density_from_elastic_rate_with_coefficient(
    gamma_e: f64,
    gas: &GasSpecies,
    ion: &IonSpecies,
    constants: &Constants,
    coefficient: f64,
) -> Result<f64> {
    if !(gamma_e >= 0.0) {
        return Err(Error::invalid("gamma_e", "must be >= 0"));
    }
    Ok(gamma_e / elastic_rate_constant(gas, ion, constants, coefficient)?)
}

/// <sigma v> in cm^3/s.
fn elastic_rate_constant(
    gas: &GasSpecies,
    ion: &IonSpecies,
    constants: &Constants,
    coefficient: f64,
) -> Result<f64> {
    gas.validate()?;
    ion.validate()?;
    if !(coefficient > 0.0) {
        return Err(Error::invalid("coefficient", "must be > 0"));
    }
    let vbar = gas.relative_speed(ion, constants);
    let alpha = gas.polarizability_cm3 / 1e-24;
    Ok(coefficient * vbar.powf(1.0 / 3.0) * alpha.powf(2.0 / 3.0))
}

/// Langevin (capture) collision rate gamma_i = n_d q sqrt(pi alpha / (eps0 mu)),
/// s^-1, with the polarizability volume converted to SI. An upper bound on
/// the inelastic rate.
pub fn langevin_rate(
    density_per_cm3: f64,
    gas: &GasSpecies,
    ion: &IonSpecies,
    constants: &Constants,
) -> Result<f64> {
    if !(density_per_cm3 >= 0.0) {
        return Err(Error::invalid("density", "must be >= 0"));
    }
    gas.validate()?;
    ion.validate()?;
    let alpha_m3 = gas.polarizability_cm3 * 1e-6;
    let mu = gas.reduced_mass_kg(ion, constants);
    let q = ion.charge_coulomb(constants);
    let rate_constant_m3 =
        q * (std::f64::consts::PI * alpha_m3 / (constants.vacuum_permittivity * mu)).sqrt();
    Ok(density_per_cm3 * 1e6 * rate_constant_m3)
}

/// Maximum kinetic energy an ion can pick up in one elastic collision, eV:
/// the head-on transfer fraction 4 m M / (m + M)^2 times the characteristic
/// thermal energy kB T of the gas.
pub fn max_energy_transfer(gas: &GasSpecies, ion: &IonSpecies, constants: &Constants) -> Result<f64> {
    gas.validate()?;
    ion.validate()?;
    let m = gas.mass_amu;
    let big_m = ion.mass_amu;
    let fraction = 4.0 * m * big_m / ((m + big_m) * (m + big_m));
    let energy_joule = fraction * constants.boltzmann * gas.temperature_k;
    Ok(energy_joule / constants.elementary_charge)
}

/// Thresholds for the collision rule of thumb. Both lifetime ratios must
/// exceed `pass_ratio`; a pass with either ratio under `margin_ratio` is
/// flagged marginal because the criterion is a "much greater than".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SafetyThresholds {
    pub pass_ratio: f64,
    pub margin_ratio: f64,
}

impl Default for SafetyThresholds {
    fn default() -> Self {
        SafetyThresholds {
            pass_ratio: 100.0,
            margin_ratio: 1000.0,
        }
    }
}

/// Outcome of the collision rule of thumb.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SafetyCheck {
    /// tau_L / t_D
    pub lifetime_to_delay: f64,
    /// tau_L * d<n>/dt
    pub lifetime_heating_product: f64,
    pub passed: bool,
    pub marginal: bool,
}

/// Rule of thumb: background collisions are insignificant when both
/// tau_L / t_D and tau_L * d<n>/dt greatly exceed the pass threshold.
pub fn collision_safety_check(
    obs: &LifetimeObservation,
    thresholds: &SafetyThresholds,
) -> Result<SafetyCheck> {
    if !(obs.lifetime_s > 0.0) || !(obs.delay_s > 0.0) || !(obs.heating_rate_quanta_per_s > 0.0) {
        return Err(Error::invalid(
            "lifetime observation",
            "lifetime, delay, and heating rate must be > 0",
        ));
    }
    if !(thresholds.pass_ratio > 0.0) || !(thresholds.margin_ratio >= thresholds.pass_ratio) {
        return Err(Error::invalid(
            "thresholds",
            "need 0 < pass_ratio <= margin_ratio",
        ));
    }
    let lifetime_to_delay = obs.lifetime_s / obs.delay_s;
    let lifetime_heating_product = obs.lifetime_s * obs.heating_rate_quanta_per_s;
    let passed =
        lifetime_to_delay > thresholds.pass_ratio && lifetime_heating_product > thresholds.pass_ratio;
    let marginal = passed
        && (lifetime_to_delay <= thresholds.margin_ratio
            || lifetime_heating_product <= thresholds.margin_ratio);
    Ok(SafetyCheck {
        lifetime_to_delay,
        lifetime_heating_product,
        passed,
        marginal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heating::HeatingPoint;
    use crate::rng::SplitMix64;
    use crate::testutil::{hydrogen, nitrogen, normal, oxygen, sr88};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const MODEL: CollisionModel = CollisionModel {
        gamma_e: 10.0,
        gamma_a: 13.0,
    };

    #[test]
    fn collisions_only_examples() {
        assert_relative_eq!(nbar_collisions_only(12.5, 0.04).unwrap(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(
            nbar_collisions_only(10.0, 0.04).unwrap(),
            0.4 / 0.6,
            max_relative = 1e-12
        );
        assert_eq!(nbar_collisions_only(0.0, 0.04).unwrap(), 0.0);
        assert!(matches!(
            nbar_collisions_only(10.0, 0.1),
            Err(Error::ModelValidity { .. })
        ));
    }

    #[test]
    fn combined_ratio_examples() {
        // gamma_e = 0 reduces to the thermal ratio.
        let thermal = CollisionModel { gamma_e: 0.0, gamma_a: 13.0 };
        let y = 13.0 * 0.02;
        assert_relative_eq!(
            sideband_ratio_combined(&thermal, 0.02).unwrap(),
            y / (1.0 + y),
            max_relative = 1e-12
        );
        // gamma_a = 0 reduces to x itself.
        let bare = CollisionModel { gamma_e: 10.0, gamma_a: 0.0 };
        assert_relative_eq!(sideband_ratio_combined(&bare, 0.02).unwrap(), 0.2, max_relative = 1e-12);
        // Combined value at 20 ms.
        let expected = 0.2 + 0.8 * (0.26 / 1.26);
        assert_relative_eq!(
            sideband_ratio_combined(&MODEL, 0.02).unwrap(),
            expected,
            max_relative = 1e-12
        );
        assert!((expected - 0.365).abs() < 1e-3);
    }

    #[test]
    fn combined_nbar_examples() {
        let thermal = CollisionModel { gamma_e: 0.0, gamma_a: 13.0 };
        assert_relative_eq!(nbar_combined(&thermal, 0.02).unwrap(), 0.26, max_relative = 1e-12);
        let bare = CollisionModel { gamma_e: 10.0, gamma_a: 0.0 };
        assert_relative_eq!(
            nbar_combined(&bare, 0.02).unwrap(),
            nbar_collisions_only(10.0, 0.02).unwrap(),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            nbar_combined(&MODEL, 0.02).unwrap(),
            23.0 * 0.02 / 0.8,
            max_relative = 1e-12
        );
        assert_relative_eq!(nbar_combined(&MODEL, 0.02).unwrap(), 0.575, max_relative = 1e-12);
    }

    #[test]
    fn ratio_monotone_in_rates_and_delay() {
        let base = sideband_ratio_combined(&MODEL, 0.02).unwrap();
        let more_e = CollisionModel { gamma_e: 12.0, gamma_a: 13.0 };
        let more_a = CollisionModel { gamma_e: 10.0, gamma_a: 16.0 };
        assert!(sideband_ratio_combined(&more_e, 0.02).unwrap() > base);
        assert!(sideband_ratio_combined(&more_a, 0.02).unwrap() > base);
        assert!(sideband_ratio_combined(&MODEL, 0.03).unwrap() > base);
    }

    #[test]
    fn apparent_rate_reductions_and_benchmark() {
        let thermal = CollisionModel { gamma_e: 0.0, gamma_a: 13.0 };
        let delays = [0.005, 0.010, 0.015, 0.020, 0.025];
        assert_relative_eq!(
            apparent_linear_rate(&thermal, &delays).unwrap(),
            13.0,
            max_relative = 1e-12
        );

        // Short grids approach gamma_e + gamma_a.
        let tiny = [1e-5, 2e-5, 3e-5];
        assert_relative_eq!(
            apparent_linear_rate(&MODEL, &tiny).unwrap(),
            23.0,
            max_relative = 1e-3
        );

        // Independent slope oracle over the documented 5-25 ms grid.
        let y: Vec<f64> = delays.iter().map(|&t| nbar_combined(&MODEL, t).unwrap()).collect();
        let xm = delays.iter().sum::<f64>() / 5.0;
        let ym = y.iter().sum::<f64>() / 5.0;
        let num: f64 = delays.iter().zip(&y).map(|(&x, &v)| (x - xm) * (v - ym)).sum();
        let den: f64 = delays.iter().map(|&x| (x - xm) * (x - xm)).sum();
        let oracle = num / den;
        let slope = apparent_linear_rate(&MODEL, &delays).unwrap();
        assert_relative_eq!(slope, oracle, max_relative = 1e-12);
        // This grid reproduces the LT-stage-heated apparent rate of ~32.
        assert!((slope - 32.0).abs() / 32.0 < 0.15, "slope = {slope}");

        // A grid reaching 40 ms inflates well past the bare sum.
        let longer = [0.010, 0.020, 0.030, 0.040];
        assert!(apparent_linear_rate(&MODEL, &longer).unwrap() > 23.0);
    }

    #[test]
    fn apparent_rate_monotone_in_max_delay() {
        let mut last = 23.0;
        for max_ms in [10.0, 20.0, 30.0, 40.0, 60.0, 80.0] {
            let delays: Vec<f64> = (1..=4).map(|i| i as f64 / 4.0 * max_ms * 1e-3).collect();
            let slope = apparent_linear_rate(&MODEL, &delays).unwrap();
            assert!(slope >= last - 1e-9, "slope {slope} fell below {last}");
            last = slope;
        }
    }

    fn model_series(model: &CollisionModel, nbar0: f64, delays: &[f64], sigma: f64) -> HeatingSeries {
        HeatingSeries {
            points: delays
                .iter()
                .map(|&t| HeatingPoint {
                    delay_s: t,
                    nbar: nbar0 + nbar_combined(model, t).unwrap(),
                    sigma,
                })
                .collect(),
            temperature_k: 25.0,
            trap_id: "test".into(),
        }
    }

    #[test]
    fn gamma_e_noise_free_recovery() {
        let delays = [0.005, 0.013, 0.022, 0.031, 0.040];
        let series = model_series(&MODEL, 0.05, &delays, 0.05);
        let fit = fit_gamma_e(&series, 13.0, &FitOptions::default()).unwrap();
        assert_relative_eq!(fit.gamma_e, 10.0, max_relative = 1e-6);
        assert_relative_eq!(fit.nbar0, 0.05, max_relative = 1e-6);
        assert!(!fit.at_validity_boundary);
    }

    #[test]
    fn gamma_e_noisy_recovery() {
        let delays = [0.005, 0.013, 0.022, 0.031, 0.040];
        let mut rng = SplitMix64::new(20_240_207);
        let mut series = model_series(&MODEL, 0.05, &delays, 0.05);
        for p in &mut series.points {
            p.nbar += 0.05 * normal(&mut rng);
        }
        let fit = fit_gamma_e(&series, 13.0, &FitOptions::default()).unwrap();
        assert!(
            (fit.gamma_e - 10.0).abs() <= 3.0 * fit.gamma_e_sigma,
            "gamma_e {} +- {}",
            fit.gamma_e,
            fit.gamma_e_sigma
        );
    }

    #[test]
    fn gamma_e_zero_truth() {
        let thermal = CollisionModel { gamma_e: 0.0, gamma_a: 13.0 };
        let delays = [0.005, 0.013, 0.022, 0.031, 0.040];
        let mut rng = SplitMix64::new(8);
        let mut series = model_series(&thermal, 0.05, &delays, 0.02);
        for p in &mut series.points {
            p.nbar += 0.02 * normal(&mut rng);
        }
        let fit = fit_gamma_e(&series, 13.0, &FitOptions::default()).unwrap();
        assert!(fit.gamma_e <= 3.0 * fit.gamma_e_sigma, "gamma_e = {}", fit.gamma_e);
    }

    #[test]
    fn density_benchmark_and_species_agreement() {
        let c = Constants::default();
        let ion = sr88();
        let gases = [hydrogen(55.0), nitrogen(55.0), oxygen(55.0)];
        let densities: Vec<f64> = gases
            .iter()
            .map(|g| density_from_elastic_rate(10.0, g, &ion, &c).unwrap())
            .collect();
        for (gas, &n) in gases.iter().zip(&densities) {
            assert!(
                (n - 1.0e9).abs() / 1.0e9 < 0.15,
                "{}: n_d = {n:.3e}",
                gas.name
            );
        }
        // Species equivalence: all three within 6% of the spread midpoint.
        let max = densities.iter().copied().fold(f64::MIN, f64::max);
        let min = densities.iter().copied().fold(f64::MAX, f64::min);
        let half_span = (max - min) / (max + min);
        assert!(half_span < 0.06, "half span = {half_span:.4}");
    }

    #[test]
    fn elastic_rate_scalings() {
        let c = Constants::default();
        let ion = sr88();
        assert_eq!(elastic_rate(0.0, &hydrogen(55.0), &ion, &c).unwrap(), 0.0);
        let one = elastic_rate(1e9, &hydrogen(55.0), &ion, &c).unwrap();
        let two = elastic_rate(2e9, &hydrogen(55.0), &ion, &c).unwrap();
        assert_relative_eq!(two, 2.0 * one, max_relative = 1e-12);
        // Rate grows as T^(1/6) through the relative speed.
        let hot = elastic_rate(1e9, &hydrogen(110.0), &ion, &c).unwrap();
        assert_relative_eq!(hot / one, 2.0f64.powf(1.0 / 6.0), max_relative = 1e-12);
    }

    #[test]
    fn langevin_range() {
        let c = Constants::default();
        let ion = sr88();
        let h2 = langevin_rate(1.0e9, &hydrogen(55.0), &ion, &c).unwrap();
        let n2 = langevin_rate(1.0e9, &nitrogen(55.0), &ion, &c).unwrap();
        let o2 = langevin_rate(1.0e9, &oxygen(55.0), &ion, &c).unwrap();
        // H2 carries the largest alpha/mu and tops the range.
        assert!(h2 > n2 && h2 > o2);
        let lo = h2.min(n2).min(o2);
        assert!((h2 - 1.6).abs() / 1.6 < 0.2, "top = {h2}");
        assert!((lo - 0.6).abs() / 0.6 < 0.2, "bottom = {lo}");
        assert_eq!(langevin_rate(0.0, &hydrogen(55.0), &ion, &c).unwrap(), 0.0);
    }

    #[test]
    fn energy_transfer_anchors() {
        let c = Constants::default();
        let ion = sr88();
        let h2 = max_energy_transfer(&hydrogen(55.0), &ion, &c).unwrap();
        assert!(h2 / 0.4e-3 < 2.0 && 0.4e-3 / h2 < 2.0, "H2: {h2:.3e} eV");
        let n2 = max_energy_transfer(&nitrogen(55.0), &ion, &c).unwrap();
        let o2 = max_energy_transfer(&oxygen(55.0), &ion, &c).unwrap();
        for (name, e) in [("N2", n2), ("O2", o2)] {
            assert!(e / 5e-3 < 2.0 && 5e-3 / e < 2.0, "{name}: {e:.3e} eV");
        }
    }

    #[test]
    fn equal_masses_transfer_everything() {
        let c = Constants::default();
        let ion = sr88();
        let twin = GasSpecies {
            name: "Sr-like".into(),
            mass_amu: ion.mass_amu,
            polarizability_cm3: 1e-24,
            temperature_k: 55.0,
        };
        let e = max_energy_transfer(&twin, &ion, &c).unwrap();
        let kt_ev = c.boltzmann * 55.0 / c.elementary_charge;
        assert_relative_eq!(e, kt_ev, max_relative = 1e-12);
    }

    #[test]
    fn safety_check_verdicts() {
        let thresholds = SafetyThresholds::default();
        // Unheated cryopumping stage: ~10 min lifetimes pass cleanly.
        let good = collision_safety_check(
            &LifetimeObservation {
                lifetime_s: 600.0,
                delay_s: 0.05,
                heating_rate_quanta_per_s: 2.0,
            },
            &thresholds,
        )
        .unwrap();
        assert!(good.passed && !good.marginal);
        assert_relative_eq!(good.lifetime_to_delay, 12_000.0, max_relative = 1e-12);
        assert_relative_eq!(good.lifetime_heating_product, 1_200.0, max_relative = 1e-12);

        // Ten-second lifetimes pass the letter of the rule but sit well
        // inside the margin band.
        let short = collision_safety_check(
            &LifetimeObservation {
                lifetime_s: 10.0,
                delay_s: 0.05,
                heating_rate_quanta_per_s: 13.0,
            },
            &thresholds,
        )
        .unwrap();
        assert!(short.passed && short.marginal);
        assert_relative_eq!(short.lifetime_to_delay, 200.0, max_relative = 1e-12);
        assert_relative_eq!(short.lifetime_heating_product, 130.0, max_relative = 1e-12);

        let bad = collision_safety_check(
            &LifetimeObservation {
                lifetime_s: 1.0,
                delay_s: 0.05,
                heating_rate_quanta_per_s: 13.0,
            },
            &thresholds,
        )
        .unwrap();
        assert!(!bad.passed);

        assert!(collision_safety_check(
            &LifetimeObservation {
                lifetime_s: 0.0,
                delay_s: 0.05,
                heating_rate_quanta_per_s: 13.0
            },
            &thresholds
        )
        .is_err());
    }

    proptest! {
        // nbar_combined == r/(1-r) applied to the combined ratio.
        #[test]
        fn nbar_matches_ratio_identity(
            gamma_e in 0.0..50.0f64,
            gamma_a in 0.0..50.0f64,
            t in 0.0..0.02f64,
        ) {
            prop_assume!(gamma_e * t < 0.99);
            let model = CollisionModel { gamma_e, gamma_a };
            let r = sideband_ratio_combined(&model, t).unwrap();
            let n = nbar_combined(&model, t).unwrap();
            let via_r = r / (1.0 - r);
            prop_assert!((n - via_r).abs() <= 1e-12 * n.abs().max(1.0));
        }

        #[test]
        fn density_rate_round_trip(gamma in 0.01..1e3f64, temp in 10.0..300.0f64) {
            let c = Constants::default();
            let ion = sr88();
            let gas = hydrogen(temp);
            let n = density_from_elastic_rate(gamma, &gas, &ion, &c).unwrap();
            let back = elastic_rate(n, &gas, &ion, &c).unwrap();
            prop_assert!((back - gamma).abs() <= 1e-12 * gamma);
        }
    }
}
