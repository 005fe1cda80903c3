//! Counter-based Gaussian noise.
//!
//! The generator is fully specified so traces can be reproduced bit-exactly
//! outside this crate:
//!
//! * `word(seed, k) = splitmix64_finalize(seed + (k + 1)·0x9E3779B97F4A7C15)`
//!   with wrapping arithmetic and the standard SplitMix64 finalizer
//!   (`x ^= x >> 30; x *= 0xBF58476D1CE4E5B9; x ^= x >> 27; x *= 0x94D049BB133111EB; x ^= x >> 31`).
//! * `uniform(seed, k) = ((word(seed, k) >> 11) + 1) · 2⁻⁵³`, which lies in `(0, 1]`.
//! * Gaussian pair `j` uses `u₁ = uniform(seed, 2j)`, `u₂ = uniform(seed, 2j + 1)`,
//!   `r = √(−2 ln u₁)`, giving `z₂ⱼ = r cos(2πu₂)` and `z₂ⱼ₊₁ = r sin(2πu₂)`.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn finalize(mut x: u64) -> u64 {
    x ^= x >> 30;
    x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// The `k`-th 64-bit word of stream `seed`.
pub fn word(seed: u64, k: u64) -> u64 {
    finalize(seed.wrapping_add(k.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// The `k`-th uniform variate of stream `seed`, in `(0, 1]`.
pub fn uniform(seed: u64, k: u64) -> f64 {
    ((word(seed, k) >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// The `k`-th standard normal variate of stream `seed`.
pub fn normal(seed: u64, k: u64) -> f64 {
    let pair = k / 2;
    let r = (-2.0 * uniform(seed, 2 * pair).ln()).sqrt();
    let angle = std::f64::consts::TAU * uniform(seed, 2 * pair + 1);
    if k.is_multiple_of(2) {
        r * angle.cos()
    } else {
        r * angle.sin()
    }
}

/// First `n` standard normal variates of stream `seed`.
pub fn normals(seed: u64, n: usize) -> Vec<f64> {
    (0..n as u64).map(|k| normal(seed, k)).collect()
}
