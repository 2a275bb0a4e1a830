//! Test-only support for the persopt crates: reference oracles computed by
//! independent algorithms, random instance generators, and finite-difference
//! helpers.

pub mod f2;
pub mod oracle;

use persopt_core::{Complex, Filtration, PointCloud};
use rand_chacha::ChaCha8Rng;
use rand_core::{Rng, SeedableRng};

pub use oracle::{
    brute_force_bottleneck, brute_force_bottleneck_in, brute_force_wasserstein,
    brute_force_wasserstein_in, oracle_diagram, positive_part, ValueDiagram,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random monotone filtration: draw a value per cell, then push it up to
/// the max of its faces. Cell ids are face-before-coface, so one ascending
/// pass suffices.
pub fn random_monotone_filtration(c: &Complex, rng: &mut impl Rng) -> Filtration {
    let mut values = vec![0.0f64; c.len()];
    for cell in c.cells() {
        let mut v = persopt_core::sample::uniform01(rng);
        for &b in &cell.boundary {
            v = v.max(values[b]);
        }
        values[cell.id] = v;
    }
    Filtration::new(values).expect("uniform draws are finite")
}

/// Uniform point cloud in [lo, hi]^d.
pub fn random_cloud(rng: &mut impl Rng, n: usize, d: usize, lo: f64, hi: f64) -> PointCloud {
    let data: Vec<f64> = (0..n * d)
        .map(|_| persopt_core::sample::uniform_range(rng, lo, hi))
        .collect();
    PointCloud::from_flat(data, d).expect("finite draws")
}

/// Random diagram points with positive persistence.
pub fn random_points(rng: &mut impl Rng, n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|_| {
            let b = persopt_core::sample::uniform_range(rng, 0.0, 2.0);
            let gap = persopt_core::sample::uniform_range(rng, 0.05, 1.5);
            (b, b + gap)
        })
        .collect()
}

/// Central finite difference of `f` in coordinate `k` at `x`.
pub fn central_diff(f: &mut impl FnMut(&[f64]) -> f64, x: &[f64], k: usize, eps: f64) -> f64 {
    let mut plus = x.to_vec();
    plus[k] += eps;
    let mut minus = x.to_vec();
    minus[k] -= eps;
    (f(&plus) - f(&minus)) / (2.0 * eps)
}

/// Relative agreement check with an absolute floor for near-zero values.
pub fn close_rel(actual: f64, expected: f64, rel: f64, abs: f64) -> bool {
    (actual - expected).abs() <= rel * actual.abs().max(expected.abs()) + abs
}
