#![allow(dead_code)]

use graphon_core::WeightedGraph;
use rand::Rng;

/// Random nodeweights bounded away from zero, normalized to sum to one.
pub fn random_alpha(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|a| a / total).collect()
}

/// Random edge values, mirrored when `symmetric`, upper-triangular otherwise.
pub fn random_beta(n: usize, symmetric: bool, rng: &mut impl Rng) -> Vec<f64> {
    let mut beta = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let b: f64 = rng.random();
            beta[i * n + j] = b;
            if symmetric {
                beta[j * n + i] = b;
            }
        }
    }
    beta
}

pub fn random_uniform(n: usize, symmetric: bool, rng: &mut impl Rng) -> WeightedGraph {
    WeightedGraph::uniform(random_beta(n, symmetric, rng), symmetric).unwrap()
}

pub fn random_weighted(n: usize, symmetric: bool, rng: &mut impl Rng) -> WeightedGraph {
    let alpha = random_alpha(n, rng);
    WeightedGraph::new(alpha, random_beta(n, symmetric, rng), symmetric).unwrap()
}
