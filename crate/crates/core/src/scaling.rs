//! Upscaling weighted graphs: k-fold blow-up, k-way node split, weight
//! shifting, fractional blow-up to an arbitrary node count, and the 1-D
//! linear interpolation baseline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{uniform_weights, WeightedGraph};

/// How a graph on `n` nodes is scaled to `target = k*n + m` nodes, with the
/// cut-distance bound `beta_spread * (kn - m) * m / (kn * (kn + m))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalePlan {
    pub n: usize,
    pub target: usize,
    pub k: usize,
    pub m: usize,
    pub beta_spread: f64,
    pub bound: f64,
}

impl ScalePlan {
    pub fn new(g: &WeightedGraph, target: usize) -> Result<Self> {
        Self::from_spread(g.n(), target, g.edge_weight_spread())
    }

    pub fn from_spread(n: usize, target: usize, beta_spread: f64) -> Result<Self> {
        if n == 0 || target < n {
            return Err(Error::Infeasible(format!(
                "cannot scale {n} nodes down to {target}"
            )));
        }
        let k = target / n;
        let m = target - k * n;
        let kn = (k * n) as f64;
        let mf = m as f64;
        let bound = beta_spread * (kn - mf) * mf / (kn * (kn + mf));
        Ok(ScalePlan {
            n,
            target,
            k,
            m,
            beta_spread,
            bound,
        })
    }
}

/// Replaces node `i` by `counts[i]` mutually unconnected copies that inherit
/// all of its edges. Copies are contiguous and keep the original order.
/// Returns the graph data and, for every new node, its source node.
fn expand(g: &WeightedGraph, counts: &[usize], alpha: Vec<f64>) -> (WeightedGraph, Vec<usize>) {
    let source: Vec<usize> = counts
        .iter()
        .enumerate()
        .flat_map(|(i, &c)| std::iter::repeat_n(i, c))
        .collect();
    let big = source.len();
    let mut beta = vec![0.0; big * big];
    for (a, &i) in source.iter().enumerate() {
        for (b, &j) in source.iter().enumerate() {
            if i != j {
                beta[a * big + b] = g.beta(i, j);
            }
        }
    }
    (
        WeightedGraph::new_unchecked(alpha, beta, g.is_symmetric()),
        source,
    )
}

/// k-fold blow-up: every node becomes `k` unconnected copies of weight
/// `alpha_i / k`, ordered as all copies of node 0, then node 1, ...
pub fn blowup_k(g: &WeightedGraph, k: usize) -> Result<WeightedGraph> {
    if k == 0 {
        return Err(Error::Param("blow-up factor must be at least 1".into()));
    }
    let alpha = g
        .alpha()
        .iter()
        .flat_map(|&a| std::iter::repeat_n(a / k as f64, k))
        .collect();
    Ok(expand(g, &vec![k; g.n()], alpha).0)
}

/// k-way split of node `i`: copies occupy indices `i..i+k`, later nodes move
/// up by `k - 1`.
pub fn split_node(g: &WeightedGraph, i: usize, k: usize) -> Result<WeightedGraph> {
    let n = g.n();
    if i >= n {
        return Err(Error::NodeIndex { index: i, n });
    }
    if k < 2 {
        return Err(Error::Param("a split needs at least 2 copies".into()));
    }
    let mut counts = vec![1; n];
    counts[i] = k;
    let alpha = g
        .alpha()
        .iter()
        .enumerate()
        .flat_map(|(j, &a)| {
            let c = counts[j];
            std::iter::repeat_n(a / c as f64, c)
        })
        .collect();
    Ok(expand(g, &counts, alpha).0)
}

/// Gives the first `m` nodes weight `2/(n+m)` and the others `1/(n+m)`.
pub fn shift_weights(g: &WeightedGraph, m: usize) -> Result<WeightedGraph> {
    let n = g.n();
    if !g.has_uniform_weights() {
        return Err(Error::Param("weight shifting needs uniform nodeweights".into()));
    }
    if m == 0 || m >= n {
        return Err(Error::Param(format!("shift count {m} must lie in 1..{n}")));
    }
    let total = (n + m) as f64;
    let alpha = (0..n)
        .map(|i| if i < m { 2.0 / total } else { 1.0 / total })
        .collect();
    g.with_alpha(alpha)
}

/// Scales `g` to `target` nodes: k-fold blow-up to `kn` nodes, weight shift
/// of the first `m`, then a 2-way split of each shifted node. The result has
/// uniform nodeweights `1/target`; when `m > 0` the input must have uniform
/// nodeweights too.
pub fn fractional_blowup(g: &WeightedGraph, target: usize) -> Result<(WeightedGraph, ScalePlan)> {
    let plan = ScalePlan::new(g, target)?;
    let blown = blowup_k(g, plan.k)?;
    if plan.m == 0 {
        return Ok((blown, plan));
    }
    let mut out = shift_weights(&blown, plan.m)?;
    // splitting from the back keeps the indices of the remaining shifted nodes
    for i in (0..plan.m).rev() {
        out = split_node(&out, i, 2)?;
    }
    Ok((out, plan))
}

/// Number of copies each node of an `n`-node graph receives in
/// [`fractional_blowup`] to `target` nodes.
pub fn fractional_counts(n: usize, target: usize) -> Result<Vec<usize>> {
    let plan = ScalePlan::from_spread(n, target, 0.0)?;
    let mut counts = vec![plan.k; n];
    for t in 0..plan.m {
        counts[t / plan.k] += 1;
    }
    Ok(counts)
}

/// Original node of every node of the fractional blow-up to `target`.
pub fn fractional_source(n: usize, target: usize) -> Result<Vec<usize>> {
    Ok(fractional_counts(n, target)?
        .into_iter()
        .enumerate()
        .flat_map(|(i, c)| std::iter::repeat_n(i, c))
        .collect())
}

/// Horizontal linear interpolation of one row to `k` times its length. Each
/// entry is followed by `k - 1` values ramping linearly to the next entry; the
/// last entry ramps down to zero.
pub fn interpolate_row(row: &[f64], k: usize) -> Vec<f64> {
    let n = row.len();
    let kf = k as f64;
    (0..n * k)
        .map(|c| {
            let (j, t) = (c / k, (c % k) as f64);
            let next = if j + 1 < n { row[j + 1] } else { 0.0 };
            ((kf - t) * row[j] + t * next) / kf
        })
        .collect()
}

/// 1-D linear interpolation of an upper-triangular graph to `kn` nodes: every
/// row is repeated `k` times and interpolated with [`interpolate_row`].
/// Entries on or below the diagonal are zeroed so the result is again a
/// DAG-oriented graph without self-loops. Nodeweights are uniform.
pub fn interpolate_1d(g: &WeightedGraph, k: usize) -> Result<WeightedGraph> {
    if !g.is_upper_triangular() {
        return Err(Error::Param("interpolation needs an upper-triangular graph".into()));
    }
    if k == 0 {
        return Err(Error::Param("interpolation factor must be at least 1".into()));
    }
    let n = g.n();
    let big = n * k;
    let mut beta = vec![0.0; big * big];
    for i in 0..n {
        let row = interpolate_row(g.beta_row(i), k);
        for r in i * k..(i + 1) * k {
            for c in (r + 1)..big {
                beta[r * big + c] = row[c];
            }
        }
    }
    WeightedGraph::new(uniform_weights(big), beta, false)
}
