//! Bernoulli sampling of graphs from weighted graphs and digraphons, and the
//! sampling-concentration experiment.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cut::{d_box, CutConfig};
use crate::error::Result;
use crate::graph::{DagGraph, Digraphon, SimpleGraph, WeightedGraph};
use crate::rng::{rng_from_seed, split_seed};
use crate::scaling::{fractional_blowup, ScalePlan};

/// Independent Bernoulli draw for every pair `i < j` in row-major order.
pub fn draw_symmetric<R: Rng + ?Sized>(
    n: usize,
    p: impl Fn(usize, usize) -> f64,
    rng: &mut R,
) -> SimpleGraph {
    let mut g = SimpleGraph::empty(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < p(i, j) {
                g.add_edge(i, j);
            }
        }
    }
    g
}

/// A graph drawn by [`sample_simple`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sample {
    Simple(SimpleGraph),
    Dag(DagGraph),
}

impl Sample {
    pub fn n(&self) -> usize {
        match self {
            Sample::Simple(g) => g.n(),
            Sample::Dag(d) => d.n(),
        }
    }

    pub fn edge_count(&self) -> usize {
        match self {
            Sample::Simple(g) => g.edge_count(),
            Sample::Dag(d) => d.edge_count(),
        }
    }

    /// DAG view; undirected samples are oriented from lower to higher index.
    pub fn to_dag(&self) -> DagGraph {
        match self {
            Sample::Simple(g) => g.orient(),
            Sample::Dag(d) => d.clone(),
        }
    }

    /// 0/1 weighted graph in the same orientation convention as the source.
    pub fn to_weighted(&self, alpha: Vec<f64>) -> Result<WeightedGraph> {
        match self {
            Sample::Simple(g) => g.to_weighted(alpha),
            Sample::Dag(d) => {
                WeightedGraph::new(alpha, d.to_matrix(), false)
            }
        }
    }
}

/// Draws every edge independently with probability `beta_ij`. Symmetric
/// graphs give undirected samples; graphs with `symmetric = false` follow
/// the DAG convention and only pairs `i < j` are drawn.
pub fn sample_simple(g: &WeightedGraph, seed: u64) -> Sample {
    let mut rng = rng_from_seed(seed);
    let s = draw_symmetric(g.n(), |i, j| g.beta(i, j), &mut rng);
    if g.is_symmetric() {
        Sample::Simple(s)
    } else {
        Sample::Dag(s.orient())
    }
}

/// Fractional blow-up to `target` nodes followed by [`sample_simple`].
pub fn scale_and_sample(g: &WeightedGraph, target: usize, seed: u64) -> Result<(Sample, ScalePlan)> {
    let (big, plan) = fractional_blowup(g, target)?;
    Ok((sample_simple(&big, seed), plan))
}

/// Measured distances between a weighted graph and its samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub n: usize,
    pub trials: usize,
    pub distances: Vec<f64>,
    pub threshold: f64,
    pub violations: usize,
    /// False when the distances are local-search lower bounds.
    pub exact: bool,
}

/// Samples `trials` graphs (trial `t` uses seed `split_seed(seed, t)`) and
/// measures `d_box(g, sample)` for each against the threshold `4/sqrt(n)`.
pub fn concentration_experiment(
    g: &WeightedGraph,
    trials: usize,
    seed: u64,
    config: &CutConfig,
) -> Result<SampleReport> {
    let n = g.n();
    let results: Vec<Result<(f64, bool)>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let trial_seed = split_seed(seed, t as u64);
            let sample = sample_simple(g, trial_seed).to_weighted(g.alpha().to_vec())?;
            let cfg = CutConfig {
                seed: trial_seed,
                ..*config
            };
            let r = d_box(g, &sample, &cfg)?;
            Ok((r.value, r.exact))
        })
        .collect();
    let mut distances = Vec::with_capacity(trials);
    let mut exact = true;
    for r in results {
        let (d, e) = r?;
        distances.push(d);
        exact &= e;
    }
    let threshold = 4.0 / (n as f64).sqrt();
    let violations = distances.iter().filter(|&&d| d >= threshold).count();
    Ok(SampleReport {
        n,
        trials,
        distances,
        threshold,
        violations,
        exact,
    })
}

/// Directed sample of a digraphon: `adj[i][j]` is the edge `i -> j`, loops
/// sit on the diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedSample {
    pub n: usize,
    pub adj: Vec<bool>,
}

/// For every pair `i < j` (row-major) picks one of no edge, `i -> j`,
/// `j -> i` or both with probabilities `W00, W01, W10, W11` at `(i, j)`,
/// then adds a loop at each node `i` with probability `w_i`.
pub fn sample_digraphon(d: &Digraphon, seed: u64) -> DirectedSample {
    let n = d.resolution;
    let mut rng = rng_from_seed(seed);
    let mut adj = vec![false; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let u: f64 = rng.random();
            let [_, p01, p10, p11] = d.categories(i, j);
            // cumulative from the top so that rounding never selects a
            // zero-probability category
            let (fwd, back) = if u < p11 {
                (true, true)
            } else if u < p11 + p10 {
                (false, true)
            } else if u < p11 + p10 + p01 {
                (true, false)
            } else {
                (false, false)
            };
            adj[i * n + j] = fwd;
            adj[j * n + i] = back;
        }
    }
    for i in 0..n {
        adj[i * n + i] = rng.random::<f64>() < d.w[i];
    }
    DirectedSample { n, adj }
}
