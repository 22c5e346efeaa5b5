//! Synthetic classification task with a planted input structure.
//!
//! Every node `v` sees a private feature slice `x_v ~ N(0, I)` of width `d`
//! and carries its own label. For the planted task the label of `v` buckets
//! the score
//!
//! ```text
//! s_v = x_v[0] + sum_{u in planted(v)} x_u[d - 1] + noise * eps
//! ```
//!
//! into `classes` train-quantile bins. With `d >= 2` the routed channel
//! `x_u[d - 1]` plays no part in `u`'s own label, so a node only sees it
//! cleanly through a direct edge from `u`.

use ndarray::{Array2, ArrayView2};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::enumerate_subsets;
use crate::error::{Error, Result};
use crate::graph::DagGraph;
use crate::models::{ws_graphon, WsParams};
use crate::rng::{split_seed, stream_rng};
use crate::sampler::sample_simple;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelKind {
    Planted,
    /// Uniform labels independent of the inputs.
    Random,
}

/// Task and search-space description, as read from a task file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskSpec {
    pub nodes: usize,
    pub feature_dim: usize,
    pub classes: usize,
    pub train: usize,
    pub val: usize,
    pub noise: f64,
    pub labels: LabelKind,
    /// Candidate subsets per node.
    pub candidates: usize,
    pub kappa: f64,
    pub p: f64,
}

impl Default for TaskSpec {
    fn default() -> Self {
        TaskSpec {
            nodes: 8,
            feature_dim: 2,
            classes: 2,
            train: 1024,
            val: 512,
            noise: 0.1,
            labels: LabelKind::Planted,
            candidates: 4,
            kappa: 0.4,
            p: 0.75,
        }
    }
}

impl TaskSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nodes == 0 || self.feature_dim == 0 || self.classes < 2 {
            return Err(Error::Param("task needs nodes, features and at least two classes".into()));
        }
        if self.train == 0 || self.val == 0 {
            return Err(Error::Param("task needs training and validation examples".into()));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::Param(format!("noise level {} is invalid", self.noise)));
        }
        if self.candidates == 0 {
            return Err(Error::Param("at least one candidate subset is required".into()));
        }
        WsParams::new(self.kappa, self.p).map(|_| ())
    }
}

/// Inputs (`count x nodes * feature_dim`) and per-node labels (`count x nodes`).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Array2<f64>,
    pub y: Array2<usize>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.nrows() == 0
    }

    pub fn rows(&self, idx: &[usize]) -> (Array2<f64>, Array2<usize>) {
        (self.x.select(ndarray::Axis(0), idx), self.y.select(ndarray::Axis(0), idx))
    }

    pub fn view(&self) -> (ArrayView2<'_, f64>, ArrayView2<'_, usize>) {
        (self.x.view(), self.y.view())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyTask {
    pub nodes: usize,
    pub feature_dim: usize,
    pub classes: usize,
    pub planted: DagGraph,
    pub train: usize,
    pub val: usize,
    pub noise: f64,
    pub labels: LabelKind,
    pub seed: u64,
}

fn gaussian(rows: usize, cols: usize, rng: &mut impl Rng) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| StandardNormal.sample(rng))
}

impl ToyTask {
    pub fn new(spec: &TaskSpec, planted: DagGraph, seed: u64) -> Result<Self> {
        spec.validate()?;
        if planted.n() != spec.nodes {
            return Err(Error::SizeMismatch(planted.n(), spec.nodes));
        }
        Ok(ToyTask {
            nodes: spec.nodes,
            feature_dim: spec.feature_dim,
            classes: spec.classes,
            planted,
            train: spec.train,
            val: spec.val,
            noise: spec.noise,
            labels: spec.labels,
            seed,
        })
    }

    fn scores(&self, x: &Array2<f64>, eps: &Array2<f64>) -> Array2<f64> {
        let f = self.feature_dim;
        Array2::from_shape_fn((x.nrows(), self.nodes), |(r, v)| {
            let routed: f64 = self.planted.inputs(v).iter().map(|&u| x[[r, u * f + f - 1]]).sum();
            x[[r, v * f]] + routed + self.noise * eps[[r, v]]
        })
    }

    /// Training and validation sets; identical for equal seeds.
    pub fn data(&self) -> (Dataset, Dataset) {
        let width = self.nodes * self.feature_dim;
        let mut rngs = [stream_rng(self.seed, 1), stream_rng(self.seed, 2)];
        let xs: Vec<Array2<f64>> = [self.train, self.val]
            .iter()
            .zip(&mut rngs)
            .map(|(&count, rng)| gaussian(count, width, rng))
            .collect();
        let ys: Vec<Array2<usize>> = match self.labels {
            LabelKind::Random => [self.train, self.val]
                .iter()
                .zip(&mut rngs)
                .map(|(&count, rng)| Array2::from_shape_fn((count, self.nodes), |_| rng.random_range(0..self.classes)))
                .collect(),
            LabelKind::Planted => {
                let scores: Vec<Array2<f64>> = [self.train, self.val]
                    .iter()
                    .zip(&mut rngs)
                    .zip(&xs)
                    .map(|((&count, rng), x)| self.scores(x, &gaussian(count, self.nodes, rng)))
                    .collect();
                // class boundaries: quantiles of the training scores, per node
                let cuts: Vec<Vec<f64>> = (0..self.nodes)
                    .map(|v| {
                        let mut col = scores[0].column(v).to_vec();
                        col.sort_by(f64::total_cmp);
                        (1..self.classes).map(|c| col[c * col.len() / self.classes]).collect()
                    })
                    .collect();
                scores
                    .iter()
                    .map(|s| Array2::from_shape_fn(s.dim(), |(r, v)| cuts[v].iter().filter(|&&c| s[[r, v]] >= c).count()))
                    .collect()
            }
        };
        let mut it = xs.into_iter().zip(ys).map(|(x, y)| Dataset { x, y });
        (it.next().expect("train"), it.next().expect("val"))
    }
}

/// Starting graph, candidate subsets and task of one search run.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSetup {
    pub start: DagGraph,
    pub candidates: Vec<Vec<Vec<usize>>>,
    pub task: ToyTask,
}

impl SearchSetup {
    /// Draws the starting DAG from the Watts-Strogatz graphon, enumerates
    /// candidates around it and plants, for each node, the start inputs plus
    /// one predecessor taken from a candidate that adds an edge (the start set
    /// itself when no such candidate exists).
    pub fn new(spec: &TaskSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let ws = ws_graphon(WsParams::new(spec.kappa, spec.p)?, spec.nodes)?;
        let start = sample_simple(&ws.to_weighted()?, split_seed(seed, 0)).to_dag();
        let cseed = split_seed(seed, 1);
        let candidates = (0..spec.nodes)
            .map(|v| enumerate_subsets(&start, v, spec.candidates, cseed))
            .collect::<Result<Vec<_>>>()?;
        let tseed = split_seed(seed, 2);
        let mut edges = Vec::new();
        for (v, cands) in candidates.iter().enumerate() {
            let base = &cands[0];
            let grown: Vec<&Vec<usize>> = cands.iter().filter(|c| c.len() > base.len()).collect();
            let chosen = grown.choose(&mut stream_rng(tseed, v as u64)).copied().unwrap_or(base);
            edges.extend(chosen.iter().map(|&u| (u, v)));
        }
        let planted = DagGraph::from_edges(spec.nodes, edges)?;
        let task = ToyTask::new(spec, planted, tseed)?;
        Ok(SearchSetup {
            start,
            candidates,
            task,
        })
    }

    /// Index of the planted subset among the candidates of `v`.
    pub fn planted_index(&self, v: usize) -> usize {
        let want = self.task.planted.inputs(v);
        self.candidates[v]
            .iter()
            .position(|c| *c == want)
            .expect("planted set is a candidate")
    }
}
