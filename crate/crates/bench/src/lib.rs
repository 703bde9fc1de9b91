//! Fixture builders shared by the benchmark suite.

use mdkern_core::embedding::PointConfiguration;
use mdkern_core::{Kernel, Pattern};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).collect()
}

/// Nonnegative combination of `count` distinct canonical cuts on `n` labels.
pub fn random_cut_kernel(n: usize, count: usize, seed: u64) -> Kernel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cuts: Vec<Pattern> = Pattern::cuts(n).expect("cut enumeration").collect();
    let chosen = rand::seq::index::sample(&mut rng, cuts.len(), count.min(cuts.len()));
    let weights: Vec<(Pattern, f64)> = chosen
        .iter()
        .map(|i| (cuts[i], rng.random_range(0.0..10.0)))
        .collect();
    Kernel::from_fn(labels(n), |i, j| {
        weights
            .iter()
            .map(|(cut, w)| if cut.separates(i, j) { *w } else { 0.0 })
            .sum()
    })
    .expect("cut combinations are symmetric")
}

/// Uniform random points in the cube [-1, 1]^d, labeled x0..x{n-1}.
pub fn random_configuration(n: usize, d: usize, seed: u64) -> PointConfiguration {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    PointConfiguration::new(labels(n), points).expect("cube points are finite")
}
