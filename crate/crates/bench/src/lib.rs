//! Seeded fixtures shared by the benchmarks.

use graphon_core::rng::rng_from_seed;
use graphon_core::WeightedGraph;
use rand::Rng;

/// Uniform-weight graph with i.i.d. uniform edge values.
pub fn random_graph(n: usize, symmetric: bool, seed: u64) -> WeightedGraph {
    let mut rng = rng_from_seed(seed);
    let mut beta = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let b: f64 = rng.random();
            beta[i * n + j] = b;
            if symmetric {
                beta[j * n + i] = b;
            } else {
                beta[j * n + i] = 0.0;
            }
        }
    }
    WeightedGraph::uniform(beta, symmetric).expect("valid fixture")
}
