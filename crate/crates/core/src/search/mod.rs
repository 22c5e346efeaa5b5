//! Subset-competition search over stage-wise DAGs.
//!
//! Every node owns a few candidate input subsets, each with its own copy of
//! the member nodes' parameters and a structural weight `pi`. A Gumbel
//! softmax over `pi` mixes the subsets during training; the subset with the
//! highest `pi` wins. Averaging the winning adjacency matrices over the last
//! training phase estimates a graphon.

mod network;
mod task;
mod train;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use network::{Activation, Aggregation, Forward, Mixing, NetworkSpec, StageNetwork};
pub use task::{Dataset, LabelKind, SearchSetup, TaskSpec, ToyTask};
pub use train::{
    estimate_graphon, train_fixed, train_search, EpochRecord, FixedOutcome, SearchConfig, SearchOutcome,
    SearchTrace,
};

use crate::error::{Error, Result};
use crate::graph::DagGraph;
use crate::rng::stream_rng;

/// Temperature schedule `tau(e) = max(tau_min, tau0 * exp(-anneal_rate * e))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GumbelConfig {
    pub tau0: f64,
    pub tau_min: f64,
    pub anneal_rate: f64,
}

impl Default for GumbelConfig {
    fn default() -> Self {
        GumbelConfig {
            tau0: 1.0,
            tau_min: 0.1,
            anneal_rate: 0.03,
        }
    }
}

impl GumbelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_min > 0.0 && self.tau0 >= self.tau_min && self.anneal_rate >= 0.0) {
            return Err(Error::Param(format!("invalid temperature schedule {self:?}")));
        }
        Ok(())
    }

    pub fn temperature(&self, epoch: usize) -> f64 {
        (self.tau0 * (-self.anneal_rate * epoch as f64).exp()).max(self.tau_min)
    }
}

/// Candidate input subsets of node `v`: the start set, the start set with one
/// input removed, and the start set with one more predecessor added. When
/// there are more than `k` candidates the start set is kept and `k - 1` of
/// the others are drawn uniformly without replacement from
/// `stream_rng(seed, v)`. Subsets are sorted; the start set comes first.
pub fn enumerate_subsets(start: &DagGraph, v: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k == 0 {
        return Err(Error::Param("at least one candidate subset is required".into()));
    }
    if v >= start.n() {
        return Err(Error::NodeIndex { index: v, n: start.n() });
    }
    let base = start.inputs(v);
    let mut others = Vec::new();
    for &u in &base {
        others.push(base.iter().copied().filter(|&w| w != u).collect::<Vec<_>>());
    }
    for u in (0..v).filter(|u| !base.contains(u)) {
        let mut s = base.clone();
        s.push(u);
        s.sort_unstable();
        others.push(s);
    }
    if others.len() > k - 1 {
        let mut rng = stream_rng(seed, v as u64);
        let mut keep = sample(&mut rng, others.len(), k - 1).into_vec();
        keep.sort_unstable();
        others = keep.into_iter().map(|i| others[i].clone()).collect();
    }
    let mut out = vec![base];
    out.extend(others);
    Ok(out)
}

/// Softmax of `(log_pi + gamma) / tau` with the maximum subtracted first.
pub fn gumbel_softmax_with_noise(log_pi: &[f64], gamma: &[f64], tau: f64) -> Vec<f64> {
    let z: Vec<f64> = log_pi.iter().zip(gamma).map(|(l, g)| (l + g) / tau).collect();
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|x| (x - max).exp()).collect();
    let sum: f64 = e.iter().sum();
    e.into_iter().map(|x| x / sum).collect()
}

/// Standard Gumbel noise `-ln(-ln U)` with `U` uniform on `(0, 1)`.
pub fn gumbel_noise<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    (0..k)
        .map(|_| {
            let u = loop {
                let u: f64 = rng.random();
                if u > 0.0 {
                    break u;
                }
            };
            -(-u.ln()).ln()
        })
        .collect()
}

/// Gumbel-softmax coefficients for positive weights `pi`.
pub fn gumbel_softmax<R: Rng + ?Sized>(pi: &[f64], tau: f64, rng: &mut R) -> Result<Vec<f64>> {
    if pi.is_empty() || pi.iter().any(|&p| !(p > 0.0)) || !(tau > 0.0) {
        return Err(Error::Param("Gumbel softmax needs positive weights and temperature".into()));
    }
    let log_pi: Vec<f64> = pi.iter().map(|p| p.ln()).collect();
    let gamma = gumbel_noise(pi.len(), rng);
    Ok(gumbel_softmax_with_noise(&log_pi, &gamma, tau))
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn subsets_by_hand() {
        let start = DagGraph::from_edges(5, [(1, 4), (3, 4)]).unwrap();
        let c = enumerate_subsets(&start, 4, 8, 0).unwrap();
        assert_eq!(
            c,
            vec![vec![1, 3], vec![3], vec![1], vec![0, 1, 3], vec![1, 2, 3]]
        );
        let start = DagGraph::from_edges(4, [(0, 3), (2, 3)]).unwrap();
        let c = enumerate_subsets(&start, 3, 4, 0).unwrap();
        assert_eq!(c, vec![vec![0, 2], vec![2], vec![0], vec![0, 1, 2]]);
        let start = DagGraph::from_edges(4, [(1, 3), (2, 3)]).unwrap();
        assert_eq!(enumerate_subsets(&start, 0, 4, 0).unwrap(), vec![Vec::<usize>::new()]);
        assert_eq!(enumerate_subsets(&start, 3, 1, 0).unwrap(), vec![vec![1, 2]]);
        assert!(enumerate_subsets(&start, 3, 0, 0).is_err());
    }

    #[test]
    fn subsets_respect_order() {
        let start = DagGraph::from_edges(6, [(0, 2), (1, 2), (2, 5), (0, 5)]).unwrap();
        for v in 0..6 {
            for s in enumerate_subsets(&start, v, 3, 7).unwrap() {
                assert!(s.iter().all(|&u| u < v));
            }
        }
    }

    #[test]
    fn zero_noise_low_temperature_is_argmax() {
        let pi = [0.7f64, 0.2, 0.1];
        let log_pi: Vec<f64> = pi.iter().map(|p| p.ln()).collect();
        let a = gumbel_softmax_with_noise(&log_pi, &[0.0; 3], 0.01);
        assert!((a[0] - 1.0).abs() < 1e-6 && a[1] < 1e-6 && a[2] < 1e-6);
    }

    #[test]
    fn coefficients_sum_to_one() {
        let mut rng = rng_from_seed(1);
        for tau in [0.05, 0.3, 1.0, 5.0] {
            let a = gumbel_softmax(&[3.0, 1e-3, 0.5, 2.0], tau, &mut rng).unwrap();
            assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert!(gumbel_softmax(&[1.0, 0.0], 1.0, &mut rng).is_err());
    }

    #[test]
    fn schedule() {
        let g = GumbelConfig::default();
        assert_eq!(g.temperature(0), 1.0);
        assert!((g.temperature(10) - (-0.3f64).exp()).abs() < 1e-15);
        assert_eq!(g.temperature(100), 0.1);
        assert!(GumbelConfig { tau_min: 0.0, ..g }.validate().is_err());
    }
}
