#![allow(dead_code)]

pub mod oracles;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rhbox::{Dataset, MaxFeatures, RhConfig, Sensitivity};

/// Uniform points in the unit cube with random labels.
pub fn random_dataset(seed: u64, n: usize, p: usize, classes: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| rng.random()).collect()).collect();
    let mut labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..classes)).collect();
    // make sure the highest class id appears
    labels[0] = classes - 1;
    Dataset::from_crisp(rows, labels).unwrap()
}

/// Points whose class depends on the first coordinate, with some label noise.
pub fn structured_dataset(seed: u64, n: usize, p: usize, classes: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let row: Vec<f64> = (0..p).map(|_| rng.random()).collect();
        let mut c = ((row[0] * classes as f64) as usize).min(classes - 1);
        if rng.random::<f64>() < 0.1 {
            c = rng.random_range(0..classes);
        }
        if i == 0 {
            c = classes - 1;
        }
        rows.push(row);
        labels.push(c);
    }
    Dataset::from_crisp(rows, labels).unwrap()
}

pub fn config(m: usize, mf: usize, theta: f64, seed: u64) -> RhConfig {
    RhConfig {
        n_estimators: m,
        sample_rate: 0.5,
        max_features: MaxFeatures::Count(mf),
        theta,
        gamma: Sensitivity::Uniform(1.0),
        seed,
    }
}
