//! Deterministic sampling helpers on top of any [`Rng`].
//!
//! Implemented directly from raw 64-bit draws so that seeded runs reproduce
//! bit for bit regardless of distribution-crate versions.

use rand_core::Rng;

/// Uniform draw in [0, 1) with 53 bits of precision.
pub fn uniform01(rng: &mut impl Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw in [lo, hi).
pub fn uniform_range(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * uniform01(rng)
}

/// Standard normal draw via Box-Muller (one value per call).
pub fn std_normal(rng: &mut impl Rng) -> f64 {
    // u1 in (0, 1] so the log stays finite.
    let u1 = ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
    let u2 = uniform01(rng);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
