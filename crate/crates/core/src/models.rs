//! Graphons of classic random graph models and an empirical graphon estimator.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DagGraph, SimpleGraph, StepGraphon};
use crate::rng::stream_rng;
use crate::sampler::draw_symmetric;

/// Erdős–Rényi edge probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErParams {
    pub p: f64,
}

impl ErParams {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Param(format!("ER probability {p} outside [0,1]")));
        }
        Ok(ErParams { p })
    }
}

/// Watts–Strogatz parameters: neighbourhood fraction `kappa = k/n` and
/// rewiring probability `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WsParams {
    pub kappa: f64,
    pub p: f64,
}

impl WsParams {
    pub fn new(kappa: f64, p: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa < 1.0) {
            return Err(Error::Param(format!("WS kappa {kappa} outside (0,1)")));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Param(format!("WS probability {p} outside [0,1]")));
        }
        Ok(WsParams { kappa, p })
    }
}

/// Barabási–Albert parameters: complete seed graph on `m0` nodes, `m`
/// preferential edges per new node, `n` nodes in total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaParams {
    pub m0: usize,
    pub m: usize,
    pub n: usize,
}

impl BaParams {
    pub fn new(m0: usize, m: usize, n: usize) -> Result<Self> {
        if !(1 <= m && m <= m0 && m0 < n) {
            return Err(Error::Param(format!(
                "BA parameters need 1 <= m <= m0 < n, got m={m}, m0={m0}, n={n}"
            )));
        }
        Ok(BaParams { m0, m, n })
    }
}

/// Constant graphon: `p` off the diagonal, zero on it.
pub fn er_graphon(params: ErParams, resolution: usize) -> Result<StepGraphon> {
    let n = resolution;
    let values = (0..n * n)
        .map(|k| if k / n == k % n { 0.0 } else { params.p })
        .collect();
    StepGraphon::new(n, values)
}

fn ring_distance(i: usize, j: usize, n: usize) -> usize {
    let d = i.abs_diff(j);
    d.min(n - d)
}

/// Band structure of the WS ring lattice after rewiring.
///
/// Pairs within ring distance `kappa * n / 2` keep their lattice edge with
/// probability `1 - p`. The rewired mass `p * b` (with `b` the lattice degree
/// at this resolution) is spread evenly over the `n - 1 - b` off-band pairs
/// of each row, so every node keeps expected degree `b`. As `n` grows the
/// off-band value tends to `p * kappa / (1 - kappa)`.
pub fn ws_graphon(params: WsParams, resolution: usize) -> Result<StepGraphon> {
    let n = resolution;
    let half_width = params.kappa * n as f64 / 2.0;
    if params.kappa * (n as f64) < 1.0 {
        return Err(Error::Param(format!(
            "WS kappa * n must be at least 1 (kappa = {}, n = {n})",
            params.kappa
        )));
    }
    let in_band = |i: usize, j: usize| ring_distance(i, j, n) as f64 <= half_width + 1e-9;
    let band_degree = (1..n).filter(|&j| in_band(0, j)).count();
    let off_band = n - 1 - band_degree;
    let off_value = if off_band == 0 {
        0.0
    } else {
        (params.p * band_degree as f64 / off_band as f64).min(1.0)
    };
    let values = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            if i == j {
                0.0
            } else if in_band(i, j) {
                1.0 - params.p
            } else {
                off_value
            }
        })
        .collect();
    StepGraphon::new(n, values)
}

/// Samples a BA graph. Nodes are numbered by insertion time; every edge is
/// oriented from the older to the newer node.
///
/// Each new node draws its `m` targets sequentially without replacement with
/// probability proportional to degree; degrees are frozen for the duration of
/// one insertion. If every remaining candidate has degree zero (only possible
/// when `m0 = 1`), the draw is uniform.
pub fn ba_sample<R: Rng + ?Sized>(params: BaParams, rng: &mut R) -> DagGraph {
    let BaParams { m0, m, n } = params;
    let mut edges = Vec::with_capacity(m0 * (m0 - 1) / 2 + m * (n - m0));
    let mut degree = vec![0usize; n];
    for i in 0..m0 {
        for j in (i + 1)..m0 {
            edges.push((i, j));
        }
        degree[i] = m0 - 1;
    }
    for t in m0..n {
        let mut weights: Vec<f64> = degree[..t].iter().map(|&d| d as f64).collect();
        let mut chosen = Vec::with_capacity(m);
        for _ in 0..m {
            let total: f64 = weights.iter().sum();
            let pick = if total > 0.0 {
                let mut r = rng.random::<f64>() * total;
                let mut pick = None;
                for (u, &w) in weights.iter().enumerate() {
                    if w > 0.0 {
                        pick = Some(u);
                        if r < w {
                            break;
                        }
                        r -= w;
                    }
                }
                pick.expect("positive total weight")
            } else {
                let free: Vec<usize> = (0..t).filter(|u| !chosen.contains(u)).collect();
                free[rng.random_range(0..free.len())]
            };
            weights[pick] = 0.0;
            chosen.push(pick);
        }
        for &u in &chosen {
            edges.push((u, t));
            degree[u] += 1;
        }
        degree[t] = m;
    }
    DagGraph::from_edges(n, edges).expect("BA edges go from older to newer nodes")
}

/// A random graph model usable by [`empirical_graphon`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum RandomModel {
    Er(ErParams),
    Ws(WsParams),
    Ba(BaParams),
}

impl RandomModel {
    /// One undirected sample on `n` nodes.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<SimpleGraph> {
        match self {
            RandomModel::Er(p) => {
                let g = er_graphon(*p, n)?;
                Ok(draw_symmetric(n, |i, j| g.value(i, j), rng))
            }
            RandomModel::Ws(p) => {
                let g = ws_graphon(*p, n)?;
                Ok(draw_symmetric(n, |i, j| g.value(i, j), rng))
            }
            RandomModel::Ba(p) => {
                if p.n != n {
                    return Err(Error::Param(format!(
                        "BA model was configured for {} nodes, asked for {n}",
                        p.n
                    )));
                }
                Ok(SimpleGraph::from(&ba_sample(*p, rng)))
            }
        }
    }
}

/// Averages the symmetric 0/1 adjacency matrices of `trials` samples and
/// block-averages the result into `resolution x resolution` cells.
///
/// Trial `t` draws from `stream_rng(seed, t)`; counts are integers, so the
/// result does not depend on how trials are spread over threads.
pub fn empirical_graphon(
    model: &RandomModel,
    n: usize,
    trials: usize,
    resolution: usize,
    seed: u64,
) -> Result<StepGraphon> {
    if trials == 0 {
        return Err(Error::Param("empirical graphon needs at least one trial".into()));
    }
    if resolution == 0 || !n.is_multiple_of(resolution) {
        return Err(Error::Param(format!(
            "resolution {resolution} does not divide node count {n}"
        )));
    }
    // validate once up front so worker threads cannot fail
    model.sample(n, &mut stream_rng(seed, 0))?;

    let counts = (0..trials)
        .into_par_iter()
        .fold(
            || vec![0u32; n * n],
            |mut acc, t| {
                let g = model
                    .sample(n, &mut stream_rng(seed, t as u64))
                    .expect("model validated above");
                for (c, &e) in acc.iter_mut().zip(g.adjacency()) {
                    *c += e as u32;
                }
                acc
            },
        )
        .reduce(
            || vec![0u32; n * n],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );

    let block = n / resolution;
    let scale = 1.0 / (trials as f64 * (block * block) as f64);
    let mut values = vec![0.0; resolution * resolution];
    for a in 0..resolution {
        for b in 0..resolution {
            let mut total = 0u64;
            for i in a * block..(a + 1) * block {
                for j in b * block..(b + 1) * block {
                    total += counts[i * n + j] as u64;
                }
            }
            values[a * resolution + b] = total as f64 * scale;
        }
    }
    StepGraphon::new(resolution, values)
}
