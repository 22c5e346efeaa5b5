//! Cut size and the cut-distance family: `d_box` under a fixed node
//! correspondence, `delta_hat` over node permutations and upper bounds on
//! `delta` through overlay matrices.
//!
//! Nodeweights sum to one, so `cut(S, T)` is already normalized and `d_box`
//! carries no extra `1/|V|^2` factor.

mod dbox;
mod interp;
mod overlay;
mod permute;

use serde::{Deserialize, Serialize};

pub use dbox::{d_box, d_box_exact, d_box_heuristic, evaluate_subset};
pub use interp::{borgs_inequality_check, hypothesis_column, interpolation_partition_bound, InterpolationBound};
pub use overlay::{delta_ub_optimize, delta_ub_overlay, twin_classes, OverlayMatrix};
pub use permute::{delta_hat, evaluate_permutation, DeltaMode};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Size limits and search knobs shared by the distance computations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutConfig {
    /// Largest node count for exhaustive `d_box`.
    pub dbox_limit: usize,
    /// Largest node count for exhaustive `delta_hat`.
    pub dhat_limit: usize,
    /// Largest reduced overlay support evaluated exhaustively.
    pub overlay_limit: usize,
    /// Local-search restarts whenever a heuristic `d_box` is needed.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for CutConfig {
    fn default() -> Self {
        CutConfig {
            dbox_limit: 20,
            dhat_limit: 8,
            overlay_limit: 20,
            restarts: 50,
            seed: 0,
        }
    }
}

/// What achieves a reported distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum Witness {
    /// The side `S` of the maximizing cut (`T` is the complement).
    Subset(Vec<usize>),
    /// Node `p` of the relabelled first graph is its old node `perm[p]`.
    Permutation(Vec<usize>),
    Overlay(OverlayMatrix),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutResult {
    pub value: f64,
    pub exact: bool,
    pub witness: Witness,
}

/// `sum_{i in S, j in T} alpha_i alpha_j beta_ij`.
pub fn cut_size(s: &[usize], t: &[usize], g: &WeightedGraph) -> Result<f64> {
    let n = g.n();
    let mut in_s = vec![false; n];
    for &i in s {
        if i >= n {
            return Err(Error::NodeIndex { index: i, n });
        }
        in_s[i] = true;
    }
    for &j in t {
        if j >= n {
            return Err(Error::NodeIndex { index: j, n });
        }
        if in_s[j] {
            return Err(Error::Overlap(j));
        }
    }
    let alpha = g.alpha();
    let mut total = 0.0;
    for &i in s {
        for &j in t {
            total += alpha[i] * alpha[j] * g.beta(i, j);
        }
    }
    Ok(total)
}

pub(crate) fn check_same_nodes(g: &WeightedGraph, g2: &WeightedGraph) -> Result<()> {
    if g.n() != g2.n() {
        return Err(Error::SizeMismatch(g.n(), g2.n()));
    }
    for (i, (a, b)) in g.alpha().iter().zip(g2.alpha()).enumerate() {
        if (a - b).abs() > 1e-12 {
            return Err(Error::NodeweightMismatch(i));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cut_size_examples() {
        let g = WeightedGraph::uniform(vec![0.0, 1.0, 1.0, 0.0], true).unwrap();
        assert_eq!(cut_size(&[0], &[1], &g).unwrap(), 0.25);
        assert_eq!(cut_size(&[], &[0, 1], &g).unwrap(), 0.0);
        let full = WeightedGraph::uniform(
            (0..16).map(|k| if k / 4 == k % 4 { 0.0 } else { 1.0 }).collect(),
            true,
        )
        .unwrap();
        assert_eq!(cut_size(&[0, 1], &[2, 3], &full).unwrap(), 0.25);
        assert!(matches!(cut_size(&[0, 1], &[1], &g), Err(Error::Overlap(1))));
        assert!(cut_size(&[5], &[1], &g).is_err());
    }
}
