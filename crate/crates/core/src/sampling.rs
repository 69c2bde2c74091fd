//! Seeded sample points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 20_170_827;
pub const DEFAULT_RADIUS: f64 = 0.3;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `count` points drawn uniformly from the Euclidean ball of `radius` in
/// `dim` dimensions.
pub fn ball_points(dim: usize, count: usize, radius: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng(seed);
    (0..count)
        .map(|_| loop {
            let p: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let r2: f64 = p.iter().map(|v| v * v).sum();
            if r2 <= 1.0 {
                break p.into_iter().map(|v| v * radius).collect();
            }
        })
        .collect()
}

pub fn random_vector(rng: &mut ChaCha8Rng, dim: usize) -> crate::Vector {
    crate::Vector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0))
}
