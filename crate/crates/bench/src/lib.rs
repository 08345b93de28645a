//! Seeded inputs for the benchmarks.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use triway_core::{Conditionality, SymmetryDecl, ThreeWayDissimilarity};

/// `l` asymmetric `n x n` dissimilarity matrices with uniform entries.
pub fn three_way(n: usize, l: usize, seed: u64) -> ThreeWayDissimilarity {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let matrices = (0..l)
        .map(|_| {
            let mut m = Array2::from_shape_fn((n, n), |_| rng.gen_range(0.0..100.0));
            m.diag_mut().fill(0.0);
            m
        })
        .collect();
    ThreeWayDissimilarity::new(
        (0..n).map(|i| format!("o{i}")).collect(),
        (0..l).map(|i| format!("t{i}")).collect(),
        matrices,
        SymmetryDecl::Auto,
        Conditionality::Unconditional,
    )
    .expect("generated data is valid")
}

/// `n x w` matrix with uniform entries in `[-1, 1)`.
pub fn profiles(n: usize, w: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((n, w), |_| rng.gen_range(-1.0..1.0))
}
