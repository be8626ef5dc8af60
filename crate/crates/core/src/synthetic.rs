//! Seeded synthetic classification tasks used by tests and studies.
//!
//! All generators return raw (unnormalized) tables with class names `0..C`.

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::data::RawTable;
use crate::error::Result;
use crate::rng::data_stream;
use crate::scalar::Scalar;
use crate::ClassId;

fn table<T: Scalar>(rows: Vec<Vec<f64>>, labels: Vec<ClassId>) -> Result<RawTable<T>> {
    let rows = rows
        .into_iter()
        .map(|r| r.into_iter().map(T::lit).collect())
        .collect();
    RawTable::from_crisp(rows, labels)
}

/// Two unit-variance 2-D Gaussians whose means are `separation` apart along the diagonal.
/// Classes alternate, so any prefix is balanced.
pub fn two_gaussians<T: Scalar>(n: usize, separation: f64, seed: u64) -> Result<RawTable<T>> {
    let mut rng = data_stream(seed);
    let offset = separation / std::f64::consts::SQRT_2;
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % 2;
        let shift = if c == 1 { offset } else { 0.0 };
        let x: f64 = StandardNormal.sample(&mut rng);
        let y: f64 = StandardNormal.sample(&mut rng);
        rows.push(vec![x + shift, y + shift]);
        labels.push(c);
    }
    table(rows, labels)
}

/// Many small classes in moderately high dimension, in the spirit of leaf-shape
/// descriptors: each class is a random prototype in `[0,1]^p` plus Gaussian noise.
pub fn leaf_like<T: Scalar>(
    n_classes: usize,
    per_class: usize,
    p: usize,
    noise: f64,
    seed: u64,
) -> Result<RawTable<T>> {
    let mut rng = data_stream(seed);
    let protos: Vec<Vec<f64>> = (0..n_classes)
        .map(|_| (0..p).map(|_| rng.random::<f64>()).collect())
        .collect();
    let normal = Normal::new(0.0, noise).expect("noise is finite and non-negative");
    let mut rows = Vec::with_capacity(n_classes * per_class);
    let mut labels = Vec::with_capacity(n_classes * per_class);
    for _ in 0..per_class {
        for (c, proto) in protos.iter().enumerate() {
            rows.push(proto.iter().map(|&m| m + normal.sample(&mut rng)).collect());
            labels.push(c);
        }
    }
    table(rows, labels)
}

/// Class 0 ~ N(0, 4I), class 1 ~ N(a, I) with `a = 2 / sqrt(p)` per coordinate.
pub fn ringnorm_like<T: Scalar>(n: usize, p: usize, seed: u64) -> Result<RawTable<T>> {
    let mut rng = data_stream(seed);
    let a = 2.0 / (p as f64).sqrt();
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % 2;
        let row = (0..p)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                if c == 0 {
                    2.0 * z
                } else {
                    z + a
                }
            })
            .collect();
        rows.push(row);
        labels.push(c);
    }
    table(rows, labels)
}

/// Few samples, many features, of which only the first `informative` carry signal.
pub fn sparse_high_dim<T: Scalar>(
    n: usize,
    p: usize,
    informative: usize,
    seed: u64,
) -> Result<RawTable<T>> {
    let mut rng = data_stream(seed);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % 2;
        let row = (0..p)
            .map(|j| {
                let z: f64 = StandardNormal.sample(&mut rng);
                if j < informative && c == 1 {
                    z + 1.0
                } else {
                    z
                }
            })
            .collect();
        rows.push(row);
        labels.push(c);
    }
    table(rows, labels)
}
