//! Seeded synthetic-experiment generator. Produces sideband scan datasets
//! from known ground truth so the whole inference chain can be validated by
//! round trip.
//!
//! Per shot: a collision happens with probability 1 - exp(-gamma_e t_D)
//! (at most one per experiment); without a collision the ion is thermal at
//! nbar(t_D) = nbar0 + rate * t_D and the detection outcome is Bernoulli in
//! the sideband excitation probability; after a collision the ion is far
//! outside the Lamb-Dicke regime and both sidebands saturate at a common
//! excitation level.
//!
//! Every shot draws from its own counter-derived stream, so the output is
//! bit-identical for a given seed regardless of evaluation order.

use serde::{Deserialize, Serialize};

use crate::constants::Constants;
use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::scan::{ScanPoint, SidebandScan};
use crate::sideband::{sideband_excitation, Sideband};
use crate::species::TrapConfig;
use crate::thermal::{fock_cutoff, ThermalState};

fn default_p_sat() -> f64 {
    0.5
}

fn default_shots() -> u32 {
    300
}

/// Ground truth driving a simulated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthParams {
    /// quanta per second
    pub heating_rate_quanta_per_s: f64,
    /// Occupation right after cooling (imperfect preparation).
    pub nbar0: f64,
    /// Elastic collision rate, s^-1.
    pub gamma_e_per_s: f64,
    /// Carrier Rabi frequency, rad/s.
    pub probe_rabi_rad_s: f64,
    pub probe_duration_s: f64,
    /// Common red/blue excitation level after a collision.
    #[serde(default = "default_p_sat")]
    pub saturated_excitation: f64,
}

impl TruthParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.heating_rate_quanta_per_s >= 0.0) {
            return Err(Error::invalid("truth", "heating rate must be >= 0"));
        }
        if !(self.nbar0 >= 0.0) {
            return Err(Error::invalid("truth", "nbar0 must be >= 0"));
        }
        if !(self.gamma_e_per_s >= 0.0) {
            return Err(Error::invalid("truth", "gamma_e must be >= 0"));
        }
        if !(self.probe_rabi_rad_s > 0.0) {
            return Err(Error::invalid("truth", "probe Rabi frequency must be > 0"));
        }
        if !(self.probe_duration_s > 0.0) {
            return Err(Error::invalid("truth", "probe duration must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.saturated_excitation) {
            return Err(Error::invalid("truth", "saturated excitation must be in [0, 1]"));
        }
        Ok(())
    }
}

/// Measurement schedule: which delays and detunings to probe, how many shots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub delays_s: Vec<f64>,
    /// Detuning grid relative to the nominal sideband center, applied to
    /// both sidebands.
    pub detunings_hz: Vec<f64>,
    #[serde(default = "default_shots")]
    pub shots: u32,
    pub seed: u64,
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        if self.delays_s.is_empty() {
            return Err(Error::invalid("schedule", "need at least one delay"));
        }
        if self.detunings_hz.is_empty() {
            return Err(Error::invalid("schedule", "need at least one detuning"));
        }
        if self.shots == 0 {
            return Err(Error::invalid("schedule", "shots must be >= 1"));
        }
        if self.delays_s.iter().any(|&t| !(t >= 0.0)) {
            return Err(Error::invalid("schedule", "delays must be >= 0"));
        }
        Ok(())
    }
}

/// Collision bookkeeping for one (delay, sideband) scan; diagnostic output
/// that real experiments do not have.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionTally {
    pub delay_s: f64,
    pub which: Sideband,
    pub collisions: u64,
    pub total_shots: u64,
}

/// A simulated dataset: the scans an experiment would record plus the hidden
/// collision counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedDataset {
    pub scans: Vec<SidebandScan>,
    pub collision_tallies: Vec<CollisionTally>,
}

/// Generate red and blue sideband scans for every scheduled delay.
pub fn simulate_dataset(
    trap: &TrapConfig,
    truth: &TruthParams,
    schedule: &Schedule,
    constants: &Constants,
) -> Result<SimulatedDataset> {
    trap.validate()?;
    truth.validate()?;
    schedule.validate()?;

    let max_delay = schedule.delays_s.iter().copied().fold(0.0f64, f64::max);
    let worst = truth.gamma_e_per_s * max_delay;
    if worst >= 1.0 {
        return Err(Error::ModelValidity { value: worst });
    }

    let eta = trap.lamb_dicke(constants)?;
    let mut scans = Vec::with_capacity(schedule.delays_s.len() * 2);
    let mut tallies = Vec::with_capacity(schedule.delays_s.len() * 2);

    for (delay_index, &delay) in schedule.delays_s.iter().enumerate() {
        let nbar = truth.nbar0 + truth.heating_rate_quanta_per_s * delay;
        let state = ThermalState::new(nbar)?;
        let n_max = fock_cutoff(nbar);
        let p_collision = 1.0 - (-truth.gamma_e_per_s * delay).exp();

        for (sideband_index, which) in [Sideband::Red, Sideband::Blue].into_iter().enumerate() {
            let mut points = Vec::with_capacity(schedule.detunings_hz.len());
            let mut collisions = 0u64;
            for (detuning_index, &detuning_hz) in schedule.detunings_hz.iter().enumerate() {
                let p_thermal = sideband_excitation(
                    state,
                    eta,
                    truth.probe_rabi_rad_s,
                    truth.probe_duration_s,
                    2.0 * std::f64::consts::PI * detuning_hz,
                    which,
                    n_max,
                )?;
                let mut bright = 0u32;
                for shot in 0..schedule.shots {
                    let mut rng = SplitMix64::stream(
                        schedule.seed,
                        &[
                            delay_index as u64,
                            sideband_index as u64,
                            detuning_index as u64,
                            u64::from(shot),
                        ],
                    );
                    let collided = rng.next_f64() < p_collision;
                    let p = if collided {
                        collisions += 1;
                        truth.saturated_excitation
                    } else {
                        p_thermal
                    };
                    if rng.next_f64() < p {
                        bright += 1;
                    }
                }
                points.push(ScanPoint {
                    detuning_hz,
                    shots: schedule.shots,
                    bright,
                });
            }
            scans.push(SidebandScan {
                delay_s: delay,
                probe_duration_s: truth.probe_duration_s,
                probe_rabi_rad_s: Some(truth.probe_rabi_rad_s),
                which,
                points,
            });
            tallies.push(CollisionTally {
                delay_s: delay,
                which,
                collisions,
                total_shots: u64::from(schedule.shots) * schedule.detunings_hz.len() as u64,
            });
        }
    }

    Ok(SimulatedDataset {
        scans,
        collision_tallies: tallies,
    })
}

/// Exponential survival times for a loss (Langevin) rate, seconds.
pub fn simulate_lifetime(gamma_i_per_s: f64, n_experiments: usize, seed: u64) -> Result<Vec<f64>> {
    if !(gamma_i_per_s > 0.0) {
        return Err(Error::invalid("gamma_i", "must be > 0"));
    }
    Ok((0..n_experiments as u64)
        .map(|index| {
            let mut rng = SplitMix64::stream(seed, &[index]);
            -rng.next_f64_open().ln() / gamma_i_per_s
        })
        .collect())
}
