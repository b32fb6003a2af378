//! Seed derivation for reproducible Monte Carlo runs.
//!
//! Every stochastic step takes an explicit 64-bit seed. Trial seeds are a pure
//! function of a master seed and a path of integers (stream tag, condition
//! indices, trial index), so trials can run in any order or in parallel and
//! still produce identical draws.

/// Stream tags that keep seeds for different purposes apart.
pub mod stream {
    pub const FIELD: u64 = 0x0066_6965_6c64; // "field"
    pub const SAMPLING: u64 = 0x7361_6d70; // "samp"
    pub const NOISE: u64 = 0x006e_6f69_7365; // "noise"
    pub const VERIFY: u64 = 0x7665_7269_6679; // "verify"
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// The SplitMix64 output function: a bijective 64-bit mixer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds `path` into `master` one component at a time:
/// `h₀ = mix64(master + γ)`, `hᵢ₊₁ = mix64(hᵢ ⊕ mix64(pᵢ + (i+1)·γ))`.
/// The position term makes the result order-sensitive.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    let mut h = mix64(master.wrapping_add(GOLDEN_GAMMA));
    for (i, &p) in path.iter().enumerate() {
        let offset = GOLDEN_GAMMA.wrapping_mul(i as u64 + 1);
        h = mix64(h ^ mix64(p.wrapping_add(offset)));
    }
    h
}
