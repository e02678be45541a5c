//! Random and structured configurations for the property and drift suites.

use rand::Rng;

use crate::configuration::{Configuration, SignedConfiguration};

/// Up to `max_atoms` distinct uniform atoms with integer weights in
/// `[-max_weight, max_weight] \ {0}`.
pub fn random_signed<R: Rng + ?Sized>(rng: &mut R, ell: f64, max_atoms: usize, max_weight: i64) -> SignedConfiguration {
    let n = rng.random_range(1..=max_atoms);
    let pairs: Vec<(f64, i64)> = (0..n)
        .map(|_| {
            let mut w = rng.random_range(-max_weight..=max_weight);
            if w == 0 {
                w = 1;
            }
            (rng.random::<f64>() * ell, w)
        })
        .collect();
    SignedConfiguration::from_weights(ell, pairs).expect("valid circle")
}

/// Up to `max_atoms` distinct uniform atoms with multiplicities in
/// `1..=max_count`.
pub fn random_positive<R: Rng + ?Sized>(rng: &mut R, ell: f64, max_atoms: usize, max_count: u32) -> Configuration {
    let n = rng.random_range(1..=max_atoms);
    let pairs: Vec<(f64, u32)> = (0..n)
        .map(|_| (rng.random::<f64>() * ell, rng.random_range(1..=max_count)))
        .collect();
    Configuration::from_counts(ell, pairs).expect("valid circle")
}

/// `n` i.i.d. uniform customers.
pub fn uniform<R: Rng + ?Sized>(rng: &mut R, ell: f64, n: usize) -> Configuration {
    Configuration::from_locations(ell, (0..n).map(|_| rng.random::<f64>() * ell)).expect("valid circle")
}

/// `n` customers at one random location.
pub fn cluster<R: Rng + ?Sized>(rng: &mut R, ell: f64, n: u32) -> Configuration {
    Configuration::cluster(ell, rng.random::<f64>() * ell, n).expect("valid circle")
}

/// Two clusters of sizes `n` and `m` at random locations.
pub fn two_cluster<R: Rng + ?Sized>(rng: &mut R, ell: f64, n: u32, m: u32) -> Configuration {
    let x = rng.random::<f64>() * ell;
    let y = rng.random::<f64>() * ell;
    Configuration::from_counts(ell, [(x, n), (y, m)]).expect("valid circle")
}

/// Structured drift corpus of exactly `size` configurations: clusters with
/// sizes spread over `1..=max_cluster`, two-cluster, uniform and random
/// configurations in roughly equal shares.
pub fn drift_corpus<R: Rng + ?Sized>(rng: &mut R, ell: f64, size: usize, max_cluster: u32) -> Vec<(&'static str, Configuration)> {
    let mut out = Vec::with_capacity(size);
    let sizes = cluster_sizes(max_cluster);
    for &n in sizes.iter().take(size) {
        out.push(("cluster", cluster(rng, ell, n)));
    }
    while out.len() < size {
        let half = max_cluster / 2 + 1;
        let entry = match out.len() % 4 {
            0 => {
                let n = rng.random_range(1..=max_cluster);
                ("cluster", cluster(rng, ell, n))
            }
            1 => {
                let (n, m) = (rng.random_range(1..=half), rng.random_range(1..=half));
                ("two-cluster", two_cluster(rng, ell, n, m))
            }
            2 => {
                let n = rng.random_range(0..=30);
                ("uniform", uniform(rng, ell, n))
            }
            _ => ("random", random_positive(rng, ell, 20, 50)),
        };
        out.push(entry);
    }
    out
}

/// Cluster sizes `1, 2, 5, 10, 20, 50, ...` up to and including `max`.
pub fn cluster_sizes(max: u32) -> Vec<u32> {
    let mut v = Vec::new();
    let mut base = 1u32;
    'outer: loop {
        for m in [1, 2, 5] {
            let n = base.saturating_mul(m);
            if n > max {
                break 'outer;
            }
            v.push(n);
        }
        base = base.saturating_mul(10);
    }
    if v.last() != Some(&max) {
        v.push(max);
    }
    v
}
