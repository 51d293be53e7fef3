//! Seeded synthetic decision systems for tests, benchmarks and examples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::{DecisionSystem, FeatureMatrix};

fn system(rows: Vec<Vec<f64>>, classes: Vec<usize>, n_classes: usize) -> DecisionSystem {
    let n_features = rows.first().map_or(0, Vec::len);
    DecisionSystem::new(
        FeatureMatrix::from_rows(&rows).expect("rectangular rows"),
        classes,
        (0..n_classes).map(|c| format!("c{c}")).collect(),
        (0..n_features).map(|j| format!("x{j}")).collect(),
    )
    .expect("valid synthetic system")
}

/// Two isotropic unit-variance Gaussian classes whose means lie
/// `separation` standard deviations apart along the main diagonal.
/// Samples alternate between the classes, so both get `n / 2` (± 1).
pub fn two_gaussians(n: usize, n_features: usize, separation: f64, seed: u64) -> DecisionSystem {
    assert!(n >= 2 && n_features >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let shift = separation / (n_features as f64).sqrt();
    let mut rows = Vec::with_capacity(n);
    let mut classes = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % 2;
        let offset = if c == 1 { shift } else { 0.0 };
        rows.push((0..n_features).map(|_| normal.sample(&mut rng) + offset).collect());
        classes.push(c);
    }
    system(rows, classes, 2)
}

/// Two classes told apart by direction only: points in the positive
/// quadrant with angle in `[2°, 42°]` or `[48°, 88°]` and a log-uniform
/// radius in `[0.001, 1]`. Cosine distance separates them perfectly;
/// coordinate-wise distances confuse the many points near the origin.
pub fn angular_classes(n: usize, seed: u64) -> DecisionSystem {
    assert!(n >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    let mut classes = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % 2;
        let lo = if c == 0 { 2.0f64 } else { 48.0 };
        let angle = rng.random_range(lo..lo + 40.0).to_radians();
        let radius = 10f64.powf(rng.random_range(-3.0..0.0));
        rows.push(vec![radius * angle.cos(), radius * angle.sin()]);
        classes.push(c);
    }
    system(rows, classes, 2)
}

/// Uniform features in `[0, 1)` with uniformly drawn labels; every class is
/// guaranteed at least `min_per_class` members.
pub fn uniform_random(
    n: usize,
    n_features: usize,
    n_classes: usize,
    min_per_class: usize,
    seed: u64,
) -> DecisionSystem {
    assert!(n_classes >= 2 && n >= n_classes * min_per_class.max(1));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n_features).map(|_| rng.random::<f64>()).collect())
        .collect();
    let fixed = n_classes * min_per_class.max(1);
    let mut classes: Vec<usize> = (0..fixed).map(|i| i % n_classes).collect();
    classes.extend((fixed..n).map(|_| rng.random_range(0..n_classes)));
    system(rows, classes, n_classes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_and_balance() {
        let ds = two_gaussians(201, 3, 3.0, 4);
        assert_eq!(ds.n_samples(), 201);
        assert_eq!(ds.n_features(), 3);
        assert_eq!(ds.class_counts(), vec![101, 100]);
        assert_eq!(two_gaussians(50, 2, 3.0, 9), two_gaussians(50, 2, 3.0, 9));
        assert_ne!(two_gaussians(50, 2, 3.0, 9), two_gaussians(50, 2, 3.0, 10));

        let ds = uniform_random(30, 4, 3, 3, 1);
        assert!(ds.class_counts().iter().all(|&c| c >= 3));
    }

    #[test]
    fn angular_classes_split_on_the_diagonal() {
        let ds = angular_classes(100, 2);
        for (row, &c) in ds.features.rows().zip(&ds.classes) {
            assert_eq!(row[1] > row[0], c == 1);
        }
    }
}
