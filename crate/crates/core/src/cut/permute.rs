use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dbox::{max_cut_diff, Diff};
use super::{CutConfig, CutResult, Witness};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeltaMode {
    Exact,
    Heuristic,
}

/// `d_box` between `g` relabelled by `perm` and `g2`. Each graph keeps its
/// own nodeweights in its cuts.
pub fn evaluate_permutation(
    g: &WeightedGraph,
    g2: &WeightedGraph,
    perm: &[usize],
    config: &CutConfig,
) -> Result<f64> {
    if g.n() != g2.n() {
        return Err(Error::SizeMismatch(g.n(), g2.n()));
    }
    let mut seen = vec![false; g.n()];
    for &p in perm {
        if p >= g.n() || std::mem::replace(&mut seen[p], true) {
            return Err(Error::Param(format!("{perm:?} is not a permutation")));
        }
    }
    if perm.len() != g.n() {
        return Err(Error::Param(format!("{perm:?} is not a permutation")));
    }
    Ok(eval(g, g2, perm, config).0)
}

fn eval(g: &WeightedGraph, g2: &WeightedGraph, perm: &[usize], config: &CutConfig) -> (f64, bool) {
    let diff = Diff::between(&g.permuted(perm), g2);
    let (v, _, exact) = max_cut_diff(&diff, config.dbox_limit, config.restarts, config.seed);
    (v, exact)
}

/// Lexicographic successor; false once the last permutation is reached.
fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn weighted_degrees(g: &WeightedGraph) -> Vec<f64> {
    let n = g.n();
    let a = g.alpha();
    (0..n)
        .map(|i| (0..n).map(|j| a[j] * (g.beta(i, j) + g.beta(j, i))).sum())
        .collect()
}

fn degree_order(g: &WeightedGraph) -> Vec<usize> {
    let deg = weighted_degrees(g);
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.sort_by(|&a, &b| deg[a].total_cmp(&deg[b]).then(a.cmp(&b)));
    order
}

/// `min` over node permutations of `g` of `d_box(g permuted, g2)`.
///
/// `Exact` enumerates all `n!` permutations (at most `config.dhat_limit`
/// nodes). `Heuristic` matches nodes by weighted degree, then applies
/// best-improvement pairwise swaps; its value is the distance under the
/// permutation it ends on, hence an upper bound on the exact minimum.
pub fn delta_hat(
    g: &WeightedGraph,
    g2: &WeightedGraph,
    mode: DeltaMode,
    config: &CutConfig,
) -> Result<CutResult> {
    let n = g.n();
    if n != g2.n() {
        return Err(Error::SizeMismatch(n, g2.n()));
    }
    match mode {
        DeltaMode::Exact => {
            if n > config.dhat_limit {
                return Err(Error::TooLarge {
                    what: "exact delta_hat node count",
                    got: n,
                    limit: config.dhat_limit,
                });
            }
            let branches: Vec<(f64, Vec<usize>, bool)> = (0..n)
                .into_par_iter()
                .map(|first| {
                    let mut rest: Vec<usize> = (0..n).filter(|&u| u != first).collect();
                    let mut best = (f64::INFINITY, Vec::new(), true);
                    loop {
                        let perm: Vec<usize> = std::iter::once(first).chain(rest.iter().copied()).collect();
                        let (v, exact) = eval(g, g2, &perm, config);
                        if v < best.0 {
                            best = (v, perm, exact);
                        }
                        if !next_permutation(&mut rest) {
                            return best;
                        }
                    }
                })
                .collect();
            let mut best = (f64::INFINITY, Vec::new(), true);
            for b in branches {
                if b.0 < best.0 {
                    best = b;
                }
            }
            Ok(CutResult {
                value: best.0,
                exact: best.2,
                witness: Witness::Permutation(best.1),
            })
        }
        DeltaMode::Heuristic => {
            let identity: Vec<usize> = (0..n).collect();
            let (o1, o2) = (degree_order(g), degree_order(g2));
            let mut matched = vec![0; n];
            for r in 0..n {
                matched[o2[r]] = o1[r];
            }
            let mut perm = identity.clone();
            let mut value = eval(g, g2, &perm, config).0;
            let v = eval(g, g2, &matched, config).0;
            if v < value {
                perm = matched;
                value = v;
            }
            for _ in 0..4 * n {
                let mut best: Option<(usize, usize, f64)> = None;
                for a in 0..n {
                    for b in (a + 1)..n {
                        perm.swap(a, b);
                        let v = eval(g, g2, &perm, config).0;
                        perm.swap(a, b);
                        if v < value - 1e-15 && best.is_none_or(|x| v < x.2) {
                            best = Some((a, b, v));
                        }
                    }
                }
                match best {
                    Some((a, b, v)) => {
                        perm.swap(a, b);
                        value = v;
                    }
                    None => break,
                }
            }
            Ok(CutResult {
                value,
                exact: false,
                witness: Witness::Permutation(perm),
            })
        }
    }
}
