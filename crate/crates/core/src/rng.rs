//! Counter-splittable pseudo-random streams for reproducible simulation.
//!
//! SplitMix64 with streams derived by hashing an index path into the master
//! seed. Two evaluations with the same seed and path produce identical draws
//! no matter how the surrounding loops are ordered or parallelized.

/// SplitMix64 (Vigna). Non-cryptographic; plenty for measurement simulation.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Stream keyed by `seed` and an index path (e.g. delay, sideband,
    /// detuning, shot). Distinct fixed-length paths give independent streams.
    pub fn stream(seed: u64, path: &[u64]) -> Self {
        let mut state = mix64(seed ^ GOLDEN);
        for &index in path {
            state = mix64(state.wrapping_add(GOLDEN) ^ mix64(index.wrapping_add(GOLDEN)));
        }
        SplitMix64 { state }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        const DEN: f64 = (1u64 << 53) as f64;
        (self.next_u64() >> 11) as f64 / DEN
    }

    /// Uniform in (0, 1]; safe to pass through `ln`.
    #[inline]
    pub fn next_f64_open(&mut self) -> f64 {
        const DEN: f64 = (1u64 << 53) as f64;
        ((self.next_u64() >> 11) + 1) as f64 / DEN
    }
}
