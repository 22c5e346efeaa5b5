use serde::{Deserialize, Serialize};

use super::cut_size;
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::scaling::{blowup_k, interpolate_1d};

/// Cut difference between the k-fold blow-up and the 1-D interpolation of an
/// upper-triangular graph under the partition `S' = {0, .., km - 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterpolationBound {
    pub k: usize,
    pub m: usize,
    /// `(k - 1) / (2 k n^2) * sum_{i < m} beta_im`
    pub closed_form: f64,
    /// `|cut(S', T', G[k]) - cut(S', T', G_itpl[k])|` summed entry by entry.
    pub direct: f64,
}

fn column_sum(g: &WeightedGraph, m: usize) -> f64 {
    (0..m).map(|i| g.beta(i, m)).sum()
}

/// First column `m >= 1` with a non-zero sum above the diagonal.
pub fn hypothesis_column(g: &WeightedGraph) -> Option<usize> {
    (1..g.n()).find(|&m| column_sum(g, m) > 0.0)
}

/// Evaluates the partition bound for column `m` (0-based; `S'` holds the
/// copies of nodes `0..m`, `T'` those of `m..n`).
///
/// Inside `T'` the interpolation carries the same mass as the blow-up except
/// for the ramp into column `m`, which lies on the copies of column `m - 1`
/// inside `S'`: every row copy of a node `i < m` loses `(k - 1)/2 * beta_im`.
/// With `k` row copies and nodeweights `1/(kn)` this gives the closed form.
pub fn interpolation_partition_bound(g: &WeightedGraph, k: usize, m: usize) -> Result<InterpolationBound> {
    let n = g.n();
    if !g.is_upper_triangular() {
        return Err(Error::Param("interpolation bound needs an upper-triangular graph".into()));
    }
    if k == 0 {
        return Err(Error::Param("blow-up factor must be at least 1".into()));
    }
    if hypothesis_column(g).is_none() {
        return Err(Error::Infeasible("every column sums to zero".into()));
    }
    if m == 0 || m >= n {
        return Err(Error::Param(format!("column {m} must lie in 1..{n}")));
    }
    let col = column_sum(g, m);
    if col == 0.0 {
        return Err(Error::Infeasible(format!("column {m} sums to zero")));
    }
    let (kf, nf) = (k as f64, n as f64);
    let closed_form = (kf - 1.0) / (2.0 * kf * nf * nf) * col;

    let blown = blowup_k(g, k)?;
    let itpl = interpolate_1d(g, k)?;
    let s: Vec<usize> = (0..k * m).collect();
    let t: Vec<usize> = (k * m..k * n).collect();
    let direct = (cut_size(&s, &t, &blown)? - cut_size(&s, &t, &itpl)?).abs();
    Ok(InterpolationBound {
        k,
        m,
        closed_form,
        direct,
    })
}

/// `(delta_hat / 32)^67 <= delta + 1e-15`, compared in log space.
pub fn borgs_inequality_check(delta_hat: f64, delta: f64) -> bool {
    if delta_hat <= 0.0 {
        return true;
    }
    67.0 * (delta_hat.ln() - 32f64.ln()) <= (delta + 1e-15).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_node_example() {
        let (a, b, c) = (0.9, 0.3, 0.6);
        let g = WeightedGraph::uniform(vec![0.0, a, b, 0.0, 0.0, c, 0.0, 0.0, 0.0], false).unwrap();
        for m in 1..3 {
            let r = interpolation_partition_bound(&g, 2, m).unwrap();
            assert!(r.closed_form > 0.0);
            assert!((r.closed_form - r.direct).abs() < 1e-12);
        }
        // m = 1: column 1 holds only a, so the bound is a / (4 * 9)
        let r = interpolation_partition_bound(&g, 2, 1).unwrap();
        assert!((r.closed_form - a / 36.0).abs() < 1e-15);
        assert_eq!(interpolation_partition_bound(&g, 1, 2).unwrap().closed_form, 0.0);
    }

    #[test]
    fn hypothesis_failures() {
        let zero = WeightedGraph::uniform(vec![0.0; 9], false).unwrap();
        assert!(matches!(interpolation_partition_bound(&zero, 2, 1), Err(Error::Infeasible(_))));
        let g = WeightedGraph::uniform(vec![0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], false).unwrap();
        assert_eq!(hypothesis_column(&g), Some(2));
        assert!(matches!(interpolation_partition_bound(&g, 2, 1), Err(Error::Infeasible(_))));
    }

    #[test]
    fn borgs_examples() {
        assert!(borgs_inequality_check(0.0, 0.0));
        assert!(borgs_inequality_check(0.5, 1e-10));
        assert!(!borgs_inequality_check(32.0, 0.0));
    }
}
