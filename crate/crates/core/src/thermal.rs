//! Thermal motional states and the sideband-ratio occupation formula.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cumulative thermal tail kept below this bound by [`fock_cutoff`].
pub const TAIL_LIMIT: f64 = 1e-9;

/// Floor on the Fock-space cutoff regardless of occupation.
pub const MIN_CUTOFF: usize = 30;

/// A thermal state of a harmonic mode, parameterized by its mean occupation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalState {
    pub nbar: f64,
}

impl ThermalState {
    pub fn new(nbar: f64) -> Result<Self> {
        if !(nbar >= 0.0) || !nbar.is_finite() {
            return Err(Error::invalid("nbar", format!("must be >= 0, got {nbar}")));
        }
        Ok(ThermalState { nbar })
    }

    /// Boltzmann ratio p_{n+1} / p_n = nbar / (nbar + 1).
    pub fn boltzmann_ratio(&self) -> f64 {
        self.nbar / (self.nbar + 1.0)
    }

    /// Probability of tail beyond a cutoff: sum of p_n for n > n_max.
    pub fn tail_probability(&self, n_max: usize) -> f64 {
        self.boltzmann_ratio().powi(n_max as i32 + 1)
    }
}

/// Occupation probability p_n = nbar^n / (nbar + 1)^(n+1) of a thermal state.
pub fn thermal_pn(state: ThermalState, n: u32) -> f64 {
    let r = state.boltzmann_ratio();
    r.powi(n as i32) / (state.nbar + 1.0)
}

/// Smallest Fock cutoff that keeps the truncated thermal tail below
/// [`TAIL_LIMIT`], floored at [`MIN_CUTOFF`].
pub fn fock_cutoff(nbar: f64) -> usize {
    let mut n_max = MIN_CUTOFF;
    let state = ThermalState { nbar };
    while state.tail_probability(n_max) >= TAIL_LIMIT {
        n_max *= 2;
        if n_max > 1 << 24 {
            break; // nbar this large is outside any regime we model
        }
    }
    if n_max == MIN_CUTOFF {
        return n_max;
    }
    // Tighten back down from the doubled bound.
    let mut lo = n_max / 2;
    let mut hi = n_max;
    while lo + 1 < hi {
        let mid = (lo + hi) / 2;
        if state.tail_probability(mid) < TAIL_LIMIT {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Mean occupation from the red-to-blue sideband amplitude ratio,
/// nbar = r / (1 - r).
pub fn nbar_from_ratio(r: f64) -> Result<ThermalState> {
    if !r.is_finite() || r < 0.0 {
        return Err(Error::invalid("ratio", format!("must be in [0, 1), got {r}")));
    }
    if r >= 1.0 {
        return Err(Error::SaturatedRatio { ratio: r });
    }
    ThermalState::new(r / (1.0 - r))
}

/// Inverse of [`nbar_from_ratio`]: r = nbar / (nbar + 1).
pub fn ratio_from_nbar(nbar: f64) -> f64 {
    nbar / (nbar + 1.0)
}
