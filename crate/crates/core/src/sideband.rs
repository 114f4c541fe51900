//! Sideband excitation lineshapes: the forward model of the probe.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::thermal::{thermal_pn, ThermalState, TAIL_LIMIT};

/// Which motional sideband is being probed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sideband {
    Red,
    Blue,
}

impl Sideband {
    pub fn as_str(&self) -> &'static str {
        match self {
            Sideband::Red => "red",
            Sideband::Blue => "blue",
        }
    }
}

impl fmt::Display for Sideband {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Sideband {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "red" => Ok(Sideband::Red),
            "blue" => Ok(Sideband::Blue),
            other => Err(Error::invalid(
                "sideband",
                format!("expected \"red\" or \"blue\", got \"{other}\""),
            )),
        }
    }
}

/// Excitation probability of a sideband probe on a thermal state.
///
/// First-order coupling: the Rabi frequency on Fock state n is
/// `eta * omega0 * sqrt(n)` on the red sideband (n -> n-1) and
/// `eta * omega0 * sqrt(n+1)` on the blue (n -> n+1). Each Fock component
/// contributes a detuned Rabi flop
///
/// ```text
/// P_n = Omega_n^2 / (Omega_n^2 + delta^2) * sin^2(sqrt(Omega_n^2 + delta^2) * t / 2)
/// ```
///
/// and the result is the thermal average over n up to `n_max`.
///
/// * `eta` - Lamb-Dicke parameter, in [0, 1)
/// * `omega0` - carrier Rabi angular frequency, rad/s
/// * `t` - probe duration, s
/// * `detuning` - offset from the sideband resonance, rad/s
/// * `n_max` - Fock cutoff; must keep the thermal tail below 1e-9
pub fn sideband_excitation(
    state: ThermalState,
    eta: f64,
    omega0: f64,
    t: f64,
    detuning: f64,
    which: Sideband,
    n_max: usize,
) -> Result<f64> {
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::invalid("eta", format!("must be in [0, 1), got {eta}")));
    }
    if !(t >= 0.0) {
        return Err(Error::invalid("t", format!("must be >= 0, got {t}")));
    }
    if !(omega0 >= 0.0) {
        return Err(Error::invalid("omega0", format!("must be >= 0, got {omega0}")));
    }
    let tail = state.tail_probability(n_max);
    if tail >= TAIL_LIMIT {
        return Err(Error::FockCutoff {
            n_max,
            tail,
            limit: TAIL_LIMIT,
            nbar: state.nbar,
        });
    }

    let mut p = 0.0;
    for n in 0..=n_max as u32 {
        let coupling = match which {
            Sideband::Red => {
                if n == 0 {
                    continue; // no state below the ground state
                }
                eta * omega0 * f64::from(n).sqrt()
            }
            Sideband::Blue => eta * omega0 * f64::from(n + 1).sqrt(),
        };
        p += thermal_pn(state, n) * rabi_flop(coupling, detuning, t);
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Detuned Rabi oscillation probability for a single two-level coupling.
fn rabi_flop(omega: f64, detuning: f64, t: f64) -> f64 {
    let total_sq = omega * omega + detuning * detuning;
    if total_sq == 0.0 {
        return 0.0;
    }
    let total = total_sq.sqrt();
    (omega * omega / total_sq) * (total * t / 2.0).sin().powi(2)
}

/// Single-resonance Rabi lineshape versus detuning, normalized to 1 at the
/// peak. This is the shape the scan fitter scales by a free amplitude.
///
/// * `detuning_hz` - offset from the fitted center, Hz
/// * `width_hz` - effective Rabi coupling expressed in Hz (Omega / 2 pi)
/// * `probe_s` - probe duration, s
///
/// Only meaningful for `0 < width_hz * probe_s < 1`, where the on-resonance
/// normalization `sin^2(pi * width * t)` is nonzero.
pub fn rabi_lineshape(detuning_hz: f64, width_hz: f64, probe_s: f64) -> f64 {
    let w2 = width_hz * width_hz;
    let total_sq = w2 + detuning_hz * detuning_hz;
    if total_sq == 0.0 || width_hz <= 0.0 {
        return 0.0;
    }
    let peak = (PI * probe_s * width_hz).sin().powi(2);
    if peak <= 0.0 {
        return 0.0;
    }
    (w2 / total_sq) * (PI * probe_s * total_sq.sqrt()).sin().powi(2) / peak
}
