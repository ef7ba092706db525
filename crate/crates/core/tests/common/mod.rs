#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use treecover_core::geometry::PointSet;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` points uniform in `[0, side)^d`.
pub fn uniform(dim: usize, n: usize, side: f64, seed: u64) -> PointSet {
    let mut r = rng(seed);
    PointSet::new(dim, (0..dim * n).map(|_| r.gen::<f64>() * side).collect()).unwrap()
}

/// A uniformly random unit vector.
pub fn unit_vector(r: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| r.gen::<f64>() * 2.0 - 1.0).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}
