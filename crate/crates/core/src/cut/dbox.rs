use rand::Rng;
use rayon::prelude::*;

use super::{check_same_nodes, CutConfig, CutResult, Witness};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::rng::stream_rng;

/// Hard ceiling for subset bitmasks.
const MAX_ENUM_NODES: usize = 63;
/// Near-maximal subsets kept for exact re-evaluation after enumeration.
const NEAR_TIE: f64 = 1e-11;
const MAX_NEAR_TIES: usize = 64;

/// Signed cut-difference matrix: `f(S) = sum_{i in S, j not in S} d_ij` is
/// `cut(S, T, G) - cut(S, T, G')` with `T` the complement of `S`.
#[derive(Debug, Clone)]
pub(crate) struct Diff {
    pub n: usize,
    pub d: Vec<f64>,
    pub symmetric: bool,
}

impl Diff {
    pub fn between(g: &WeightedGraph, g2: &WeightedGraph) -> Self {
        let n = g.n();
        let (a, b) = (g.alpha(), g2.alpha());
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    d[i * n + j] = a[i] * a[j] * g.beta(i, j) - b[i] * b[j] * g2.beta(i, j);
                }
            }
        }
        Diff {
            n,
            d,
            symmetric: g.is_symmetric() && g2.is_symmetric(),
        }
    }

    /// Complement-free representative of a subset: for symmetric matrices
    /// `f(S) = f(V \ S)`, so the last node is always placed outside `S`.
    pub fn canonical(&self, mut mask: Vec<bool>) -> Vec<bool> {
        if self.symmetric && self.n > 0 && mask[self.n - 1] {
            mask.iter_mut().for_each(|m| *m = !*m);
        }
        mask
    }

    /// `|f(S)|` evaluated directly in a fixed summation order.
    pub fn eval(&self, mask: &[bool]) -> f64 {
        let mask = self.canonical(mask.to_vec());
        let n = self.n;
        let mut total = 0.0;
        for i in (0..n).filter(|&i| mask[i]) {
            for j in (0..n).filter(|&j| !mask[j]) {
                total += self.d[i * n + j];
            }
        }
        total.abs()
    }
}

/// Incremental state for single-node flips.
struct Walker<'a> {
    diff: &'a Diff,
    in_s: Vec<bool>,
    f: f64,
    /// `sum_{j not in S} d_uj`
    row_out: Vec<f64>,
    /// `sum_{i in S} d_iu`
    col_in: Vec<f64>,
}

impl<'a> Walker<'a> {
    fn new(diff: &'a Diff, in_s: Vec<bool>) -> Self {
        let n = diff.n;
        let d = &diff.d;
        let mut row_out = vec![0.0; n];
        let mut col_in = vec![0.0; n];
        for u in 0..n {
            for w in 0..n {
                if !in_s[w] {
                    row_out[u] += d[u * n + w];
                }
                if in_s[w] {
                    col_in[u] += d[w * n + u];
                }
            }
        }
        let f = (0..n).filter(|&u| in_s[u]).map(|u| row_out[u]).sum();
        Walker {
            diff,
            in_s,
            f,
            row_out,
            col_in,
        }
    }

    fn delta(&self, v: usize) -> f64 {
        let dvv = self.diff.d[v * self.diff.n + v];
        if self.in_s[v] {
            self.col_in[v] - dvv - self.row_out[v]
        } else {
            self.row_out[v] - dvv - self.col_in[v]
        }
    }

    fn flip(&mut self, v: usize) {
        let n = self.diff.n;
        let d = &self.diff.d;
        self.f += self.delta(v);
        let sign = if self.in_s[v] { 1.0 } else { -1.0 };
        for u in 0..n {
            self.row_out[u] += sign * d[u * n + v];
            self.col_in[u] -= sign * d[v * n + u];
        }
        self.in_s[v] = !self.in_s[v];
    }
}

fn mask_from_bits(bits: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| bits >> i & 1 == 1).collect()
}

/// Gray-code walk over one block of subsets. Returns near-maximal bitmasks
/// in visiting order.
fn enumerate_block(diff: &Diff, fixed_bits: u64, low: usize) -> (f64, Vec<u64>) {
    let mut walker = Walker::new(diff, mask_from_bits(fixed_bits, diff.n));
    let mut bits = fixed_bits;
    let mut best = walker.f.abs();
    let mut near = vec![bits];
    for step in 1u64..(1u64 << low) {
        let v = step.trailing_zeros() as usize;
        walker.flip(v);
        bits ^= 1 << v;
        let value = walker.f.abs();
        if value > best + NEAR_TIE {
            best = value;
            near.clear();
            near.push(bits);
        } else if value >= best - NEAR_TIE {
            best = best.max(value);
            if near.len() < MAX_NEAR_TIES {
                near.push(bits);
            }
        }
    }
    (best, near)
}

/// Exhaustive maximization of `|f(S)|`. Blocks of subsets are walked in
/// parallel; the candidates are then re-evaluated directly and combined in
/// block order, so the answer does not depend on the thread count.
pub(crate) fn exact_max(diff: &Diff) -> (f64, Vec<bool>) {
    let n = diff.n;
    let free = if diff.symmetric && n > 0 { n - 1 } else { n };
    let block_bits = if free > 14 { 6 } else { 0 };
    let low = free - block_bits;
    let blocks: Vec<(f64, Vec<u64>)> = (0u64..(1u64 << block_bits))
        .into_par_iter()
        .map(|b| enumerate_block(diff, b << low, low))
        .collect();
    let top = blocks.iter().map(|(v, _)| *v).fold(0.0, f64::max);
    let mut best = (-1.0, vec![false; n]);
    for (value, near) in &blocks {
        if *value < top - 2.0 * NEAR_TIE {
            continue;
        }
        for &bits in near {
            let mask = diff.canonical(mask_from_bits(bits, n));
            let v = diff.eval(&mask);
            if v > best.0 {
                best = (v, mask);
            }
        }
    }
    best
}

/// Best-improvement single-flip ascent of `sign * f(S)`; ties go to the
/// lowest node index.
fn local_search(diff: &Diff, start: Vec<bool>, sign: f64) -> Vec<bool> {
    let mut walker = Walker::new(diff, start);
    loop {
        let mut best: Option<(usize, f64)> = None;
        for v in 0..diff.n {
            let gain = sign * walker.delta(v);
            if gain > best.map_or(1e-15, |b| b.1) {
                best = Some((v, gain));
            }
        }
        match best {
            Some((v, _)) => walker.flip(v),
            None => return walker.in_s,
        }
    }
}

/// Local search from `restarts` random subsets (restart `r` draws from
/// `stream_rng(seed, r)`), ascending both `f` and `-f` from each start.
pub(crate) fn heuristic_max(diff: &Diff, restarts: usize, seed: u64) -> (f64, Vec<bool>) {
    let n = diff.n;
    let runs: Vec<(f64, Vec<bool>)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, r as u64);
            let start: Vec<bool> = (0..n).map(|_| rng.random::<bool>()).collect();
            let mut best = (-1.0, Vec::new());
            for sign in [1.0, -1.0] {
                let mask = diff.canonical(local_search(diff, start.clone(), sign));
                let v = diff.eval(&mask);
                if v > best.0 {
                    best = (v, mask);
                }
            }
            best
        })
        .collect();
    let empty = vec![false; n];
    let mut best = (diff.eval(&empty), empty);
    for run in runs {
        if run.0 > best.0 {
            best = run;
        }
    }
    best
}

pub(crate) fn subset_of(mask: &[bool]) -> Vec<usize> {
    (0..mask.len()).filter(|&i| mask[i]).collect()
}

/// Evaluates `diff` exhaustively when it has at most `limit` nodes, else by
/// local search.
pub(crate) fn max_cut_diff(diff: &Diff, limit: usize, restarts: usize, seed: u64) -> (f64, Vec<bool>, bool) {
    if diff.n <= limit.min(MAX_ENUM_NODES) {
        let (v, m) = exact_max(diff);
        (v, m, true)
    } else {
        let (v, m) = heuristic_max(diff, restarts, seed);
        (v, m, false)
    }
}

/// `max_S |cut(S, V \ S, G) - cut(S, V \ S, G')|` over all `2^n` subsets.
/// For two symmetric graphs only subsets excluding the last node are
/// visited.
pub fn d_box_exact(g: &WeightedGraph, g2: &WeightedGraph, config: &CutConfig) -> Result<CutResult> {
    check_same_nodes(g, g2)?;
    let limit = config.dbox_limit.min(MAX_ENUM_NODES);
    if g.n() > limit {
        return Err(Error::TooLarge {
            what: "exact d_box node count",
            got: g.n(),
            limit,
        });
    }
    let (value, mask) = exact_max(&Diff::between(g, g2));
    Ok(CutResult {
        value,
        exact: true,
        witness: Witness::Subset(subset_of(&mask)),
    })
}

/// Lower bound on [`d_box_exact`] by single-node-flip local search.
pub fn d_box_heuristic(
    g: &WeightedGraph,
    g2: &WeightedGraph,
    restarts: usize,
    seed: u64,
) -> Result<CutResult> {
    check_same_nodes(g, g2)?;
    let (value, mask) = heuristic_max(&Diff::between(g, g2), restarts, seed);
    Ok(CutResult {
        value,
        exact: false,
        witness: Witness::Subset(subset_of(&mask)),
    })
}

/// Exact below `config.dbox_limit` nodes, heuristic above.
pub fn d_box(g: &WeightedGraph, g2: &WeightedGraph, config: &CutConfig) -> Result<CutResult> {
    if g.n() <= config.dbox_limit.min(MAX_ENUM_NODES) {
        d_box_exact(g, g2, config)
    } else {
        d_box_heuristic(g, g2, config.restarts, config.seed)
    }
}

/// `|cut(S, T, G) - cut(S, T, G')|` for `S = subset` and `T` its complement.
pub fn evaluate_subset(g: &WeightedGraph, g2: &WeightedGraph, subset: &[usize]) -> Result<f64> {
    check_same_nodes(g, g2)?;
    let n = g.n();
    let mut mask = vec![false; n];
    for &i in subset {
        if i >= n {
            return Err(Error::NodeIndex { index: i, n });
        }
        mask[i] = true;
    }
    Ok(Diff::between(g, g2).eval(&mask))
}
