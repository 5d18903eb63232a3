//! Seeded synthetic datasets used by tests, examples and the CLI `generate`
//! subcommand.

use nalgebra::DMatrix;
use rand::Rng as _;
use rand_distr::{Distribution, LogNormal, StandardNormal};

use crate::dataset::Dataset;
use crate::rng;

/// Standard-normal features with alternating labels `a`/`b`.
pub fn gaussian(n: usize, d: usize, seed: u64) -> Dataset {
    let mut rng = rng::seeded(seed);
    let features = DMatrix::from_fn(n, d, |_, _| StandardNormal.sample(&mut rng));
    let labels = (0..n).map(|i| if i % 2 == 0 { "a" } else { "b" }.to_string()).collect();
    let names = (0..d).map(|j| format!("x{j}")).collect();
    Dataset::new("gaussian", features, labels, names, "class").expect("valid shape")
}

/// Two spherical unit-variance Gaussian classes whose centres sit
/// `separation` apart along the all-ones diagonal. Classes alternate by row.
pub fn two_blobs(n: usize, d: usize, separation: f64, seed: u64) -> Dataset {
    let mut rng = rng::seeded(seed);
    let offset = separation / 2.0 / (d as f64).sqrt();
    let mut labels = Vec::with_capacity(n);
    let features = DMatrix::from_fn(n, d, |i, _| {
        let centre = if i % 2 == 0 { -offset } else { offset };
        centre + <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
    });
    for i in 0..n {
        labels.push(if i % 2 == 0 { "blob0" } else { "blob1" }.to_string());
    }
    let names = (0..d).map(|j| format!("x{j}")).collect();
    Dataset::new("blobs", features, labels, names, "class").expect("valid shape")
}

/// The default acceptance dataset: 400 records, 4 features, centres 6σ apart.
pub fn blobs(seed: u64) -> Dataset {
    two_blobs(400, 4, 6.0, seed)
}

/// Independent zero-mean uniform sources on `[-√3, √3]` (unit variance).
pub fn uniform_sources(n: usize, d: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = rng::seeded(seed);
    let h = 3f64.sqrt();
    DMatrix::from_fn(n, d, |_, _| rng.random_range(-h..h))
}

/// 440 records shaped like the UCI wholesale-customers table: `Channel`
/// (label, 298 × "1" / 142 × "2"), `Region` and six skewed spending columns.
pub fn wholesale_like(seed: u64) -> Dataset {
    const N: usize = 440;
    const HORECA: usize = 298;
    // log-means per channel for Fresh, Milk, Grocery, Frozen, Detergents_Paper, Delicassen
    const LOG_MEANS: [[f64; 6]; 2] = [
        [9.1, 7.9, 8.1, 7.6, 6.2, 6.9],
        [8.6, 9.0, 9.5, 6.9, 8.6, 7.1],
    ];
    let mut rng = rng::seeded(seed);
    let mut values = Vec::with_capacity(N * 7);
    let mut labels = Vec::with_capacity(N);
    for i in 0..N {
        let channel = usize::from(i >= HORECA);
        labels.push((channel + 1).to_string());
        let region = match rng.random_range(0..100) {
            0..18 => 1.0,
            18..29 => 2.0,
            _ => 3.0,
        };
        values.push(region);
        for mu in LOG_MEANS[channel] {
            let ln = LogNormal::new(mu, 1.0).expect("valid");
            let v: f64 = ln.sample(&mut rng);
            values.push(v.round().max(3.0));
        }
    }
    let names = [
        "Region",
        "Fresh",
        "Milk",
        "Grocery",
        "Frozen",
        "Detergents_Paper",
        "Delicassen",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let features = DMatrix::from_row_slice(N, 7, &values);
    Dataset::new("wholesale_like", features, labels, names, "Channel").expect("valid shape")
}
