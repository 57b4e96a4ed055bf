//! Deterministic inputs for kernel benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semline_core::frontend::IntensityMap;

/// Map with roughly `density` of its pixels set to values in (0, 1].
pub fn sparse_map(width: usize, height: usize, density: f64, seed: u64) -> IntensityMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..width * height)
        .map(|_| {
            if rng.random_bool(density.clamp(0.0, 1.0)) {
                rng.random_range(0.01f32..=1.0)
            } else {
                0.0
            }
        })
        .collect();
    IntensityMap::new(width, height, values).expect("values are finite and non-negative")
}

/// Map with every pixel nonzero.
pub fn dense_map(width: usize, height: usize, seed: u64) -> IntensityMap {
    sparse_map(width, height, 1.0, seed)
}
