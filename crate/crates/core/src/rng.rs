//! SplitMix64 stream and the seed-derivation contract.
//!
//! Seeds are derived bit-exactly so that a replica can be re-run in isolation:
//! `replica_seed(base, i) = mix64(base ^ i·0x9E3779B97F4A7C15)`.

use rand_core::{impls, RngCore, SeedableRng};

/// Golden-ratio increment of the SplitMix64 counter.
pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// 64-bit finalizer (Stafford variant 13, as used by SplitMix64).
#[inline]
pub const fn mix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for replica `index` under `base`.
#[inline]
pub const fn replica_seed(base: u64, index: u64) -> u64 {
    mix64(base ^ index.wrapping_mul(GOLDEN_GAMMA))
}

/// Seed for replica `replica` of the experiment at sample size `n`.
///
/// `mix64(base ^ h(n, replica))` with `h(n, r) = mix64(n·γ ^ mix64(r))`.
/// For fixed `n` the map `r ↦ seed` is injective because `mix64` is a bijection.
#[inline]
pub const fn derive_seed(base: u64, n: u64, replica: u64) -> u64 {
    let h = mix64(n.wrapping_mul(GOLDEN_GAMMA) ^ mix64(replica));
    mix64(base ^ h)
}

/// SplitMix64 generator: the state advances by [`GOLDEN_GAMMA`] and each
/// output is the finalizer of the new state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngState {
    state: u64,
}

impl RngState {
    pub const fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub const fn state(&self) -> u64 {
        self.state
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on the open interval `(0, 1)`.
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for RngState {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        impls::fill_bytes_via_next(self, dest)
    }
}

impl SeedableRng for RngState {
    type Seed = [u8; 8];

    fn from_seed(seed: Self::Seed) -> Self {
        Self::new(u64::from_le_bytes(seed))
    }

    fn seed_from_u64(state: u64) -> Self {
        Self::new(state)
    }
}
