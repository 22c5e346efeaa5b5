//! Value types for weighted graphs, step-function graphons, DAGs and digraphons.
//!
//! Matrices are dense, row-major `Vec<f64>` of length `n * n`. Nodeweights
//! always sum to one; a step graphon of resolution `n` is the weighted graph
//! with uniform nodeweights `1/n`.
//!
//! Two edge conventions coexist. A *symmetric* graph stores `beta[i][j] ==
//! beta[j][i]`. A *DAG-oriented* graph (`symmetric == false`) stores directed
//! weights; graphs produced from [`DagGraph`]s are strictly upper-triangular,
//! which encodes the total node order `i < j` of a stage-wise architecture.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const NODEWEIGHT_SUM_TOL: f64 = 1e-12;
pub const DIGRAPHON_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    Shape { expected: usize, got: usize },
    NodeweightSum { sum: f64 },
    NodeweightRange { index: usize, value: f64 },
    EdgeweightRange { i: usize, j: usize, value: f64 },
    Asymmetric { i: usize, j: usize },
    SelfLoop { index: usize, value: f64 },
    NotUpperTriangular { i: usize, j: usize },
    CategorySum { i: usize, j: usize, sum: f64 },
    CategoryAsymmetric { which: &'static str, i: usize, j: usize },
    DirectionMismatch { i: usize, j: usize },
    SelfLoopProbability { index: usize, value: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Shape { expected, got } => {
                write!(f, "matrix has {got} entries, expected {expected}")
            }
            Violation::NodeweightSum { sum } => write!(f, "nodeweights sum ≠ 1 (sum = {sum})"),
            Violation::NodeweightRange { index, value } => {
                write!(f, "nodeweight {index} out of (0,1]: {value}")
            }
            Violation::EdgeweightRange { i, j, value } => {
                write!(f, "edgeweight out of [0,1] at ({i},{j}): {value}")
            }
            Violation::Asymmetric { i, j } => {
                write!(f, "symmetric graph has beta[{i}][{j}] ≠ beta[{j}][{i}]")
            }
            Violation::SelfLoop { index, value } => {
                write!(f, "self-loop at node {index}: {value}")
            }
            Violation::NotUpperTriangular { i, j } => {
                write!(f, "DAG edge ({i},{j}) is not above the diagonal")
            }
            Violation::CategorySum { i, j, sum } => {
                write!(f, "W00+W01+W10+W11 ≠ 1 at ({i},{j}): {sum}")
            }
            Violation::CategoryAsymmetric { which, i, j } => {
                write!(f, "{which} not symmetric at ({i},{j})")
            }
            Violation::DirectionMismatch { i, j } => write!(f, "W01[{i}][{j}] ≠ W10[{j}][{i}]"),
            Violation::SelfLoopProbability { index, value } => {
                write!(f, "self-loop probability {index} out of [0,1]: {value}")
            }
        }
    }
}

/// Outcome of a validation pass: empty means the object is valid.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.passed() {
            Ok(())
        } else {
            Err(Error::Invalid(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return write!(f, "pass");
        }
        for (idx, v) in self.violations.iter().enumerate() {
            if idx > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Finite weighted graph: nodeweights `alpha` summing to one and an
/// `n x n` edgeweight matrix `beta` with entries in `[0,1]` and a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    symmetric: bool,
}

impl WeightedGraph {
    /// Builds and validates a graph.
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>, symmetric: bool) -> Result<Self> {
        let g = Self::new_unchecked(alpha, beta, symmetric);
        g.validate().into_result()?;
        Ok(g)
    }

    /// Builds a graph without checking invariants. Use [`WeightedGraph::validate`]
    /// to inspect the result.
    pub fn new_unchecked(alpha: Vec<f64>, beta: Vec<f64>, symmetric: bool) -> Self {
        WeightedGraph {
            alpha,
            beta,
            symmetric,
        }
    }

    /// Uniform nodeweights `1/n`; `n` is inferred from the matrix length.
    pub fn uniform(beta: Vec<f64>, symmetric: bool) -> Result<Self> {
        let n = (beta.len() as f64).sqrt().round() as usize;
        Self::new(uniform_weights(n), beta, symmetric)
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self, i: usize, j: usize) -> f64 {
        self.beta[i * self.n() + j]
    }

    /// Row-major edgeweights.
    pub fn beta_matrix(&self) -> &[f64] {
        &self.beta
    }

    pub fn beta_row(&self, i: usize) -> &[f64] {
        let n = self.n();
        &self.beta[i * n..(i + 1) * n]
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// True when every entry on or below the diagonal is zero.
    pub fn is_upper_triangular(&self) -> bool {
        let n = self.n();
        (0..n).all(|i| (0..=i).all(|j| self.beta[i * n + j] == 0.0))
    }

    /// True when all nodeweights equal `1/n` to within `1e-12`.
    pub fn has_uniform_weights(&self) -> bool {
        let target = 1.0 / self.n() as f64;
        self.alpha.iter().all(|a| (a - target).abs() <= 1e-12)
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }

    /// Maximum absolute difference between any two edgeweight entries of the
    /// full `n x n` matrix. The zero diagonal and, for DAG-oriented graphs, the
    /// zero lower triangle are entries too (non-edges weigh 0), so for `n >= 2`
    /// this equals the largest edgeweight.
    pub fn edge_weight_spread(&self) -> f64 {
        weight_spread(self.beta.iter().copied())
    }

    /// Same graph with the given nodeweights.
    pub fn with_alpha(&self, alpha: Vec<f64>) -> Result<Self> {
        Self::new(alpha, self.beta.clone(), self.symmetric)
    }

    /// Symmetric closure `max(beta, beta^T)` with the symmetric flag set.
    pub fn symmetrized(&self) -> Self {
        let n = self.n();
        let mut beta = self.beta.clone();
        for i in 0..n {
            for j in 0..n {
                beta[i * n + j] = self.beta[i * n + j].max(self.beta[j * n + i]);
            }
        }
        WeightedGraph::new_unchecked(self.alpha.clone(), beta, true)
    }

    /// Graph with nodes relabelled so that new node `p` is old node `perm[p]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.n();
        assert_eq!(perm.len(), n);
        let alpha = perm.iter().map(|&p| self.alpha[p]).collect();
        let mut beta = vec![0.0; n * n];
        for p in 0..n {
            for q in 0..n {
                beta[p * n + q] = self.beta[perm[p] * n + perm[q]];
            }
        }
        WeightedGraph::new_unchecked(alpha, beta, self.symmetric)
    }

    /// Edges with weight at least `threshold`, oriented from lower to higher index.
    pub fn threshold(&self, threshold: f64) -> DagGraph {
        let n = self.n();
        let mut dag = DagGraph::empty(n);
        for i in 0..n {
            for j in (i + 1)..n {
                let w = if self.symmetric {
                    self.beta(i, j)
                } else {
                    self.beta(i, j).max(self.beta(j, i))
                };
                if w >= threshold {
                    dag.adj[i * n + j] = true;
                }
            }
        }
        dag
    }
}

pub fn uniform_weights(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

/// `max - min` over a set of values; zero for an empty set.
pub fn weight_spread(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if hi < lo {
        0.0
    } else {
        hi - lo
    }
}

/// Checks every [`WeightedGraph`] invariant and reports all violations found.
pub fn validate(g: &WeightedGraph) -> ValidationReport {
    let mut violations = Vec::new();
    let n = g.alpha.len();
    if n == 0 || g.beta.len() != n * n {
        violations.push(Violation::Shape {
            expected: n * n,
            got: g.beta.len(),
        });
        return ValidationReport { violations };
    }
    let sum: f64 = g.alpha.iter().sum();
    if !((sum - 1.0).abs() <= NODEWEIGHT_SUM_TOL) {
        violations.push(Violation::NodeweightSum { sum });
    }
    for (index, &value) in g.alpha.iter().enumerate() {
        if !(value > 0.0 && value <= 1.0) {
            violations.push(Violation::NodeweightRange { index, value });
        }
    }
    for i in 0..n {
        for j in 0..n {
            let value = g.beta[i * n + j];
            if !(0.0..=1.0).contains(&value) {
                violations.push(Violation::EdgeweightRange { i, j, value });
            }
            if g.symmetric && j > i && value != g.beta[j * n + i] {
                violations.push(Violation::Asymmetric { i, j });
            }
        }
        let d = g.beta[i * n + i];
        if d != 0.0 {
            violations.push(Violation::SelfLoop { index: i, value: d });
        }
    }
    ValidationReport { violations }
}

/// Step function on an `n x n` grid: `values[i][j]` is the mean of the
/// graphon over the corresponding `1/n x 1/n` square.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepGraphon {
    resolution: usize,
    values: Vec<f64>,
}

impl StepGraphon {
    pub fn new(resolution: usize, values: Vec<f64>) -> Result<Self> {
        if resolution == 0 || values.len() != resolution * resolution {
            return Err(Error::Param(format!(
                "step graphon of resolution {resolution} needs {} values, got {}",
                resolution * resolution,
                values.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Param(format!(
                "step graphon value {} at ({}, {}) is outside [0,1]",
                values[bad],
                bad / resolution,
                bad % resolution
            )));
        }
        Ok(StepGraphon { resolution, values })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.resolution + j]
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.resolution;
        (0..n).all(|i| (0..i).all(|j| self.values[i * n + j] == self.values[j * n + i]))
    }

    /// Uniform-nodeweight weighted graph; fails if the diagonal is not zero.
    pub fn to_weighted(&self) -> Result<WeightedGraph> {
        WeightedGraph::new(
            uniform_weights(self.resolution),
            self.values.clone(),
            self.is_symmetric(),
        )
    }
}

impl TryFrom<&StepGraphon> for WeightedGraph {
    type Error = Error;

    fn try_from(s: &StepGraphon) -> Result<Self> {
        s.to_weighted()
    }
}

impl TryFrom<&WeightedGraph> for StepGraphon {
    type Error = Error;

    fn try_from(g: &WeightedGraph) -> Result<Self> {
        if !g.has_uniform_weights() {
            return Err(Error::Param(
                "only graphs with uniform nodeweights are step graphons".into(),
            ));
        }
        StepGraphon::new(g.n(), g.beta.clone())
    }
}

/// Directed acyclic graph under the total order of node indices: an edge
/// `i -> j` may exist only for `i < j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DagGraph {
    n: usize,
    adj: Vec<bool>,
}

impl DagGraph {
    pub fn empty(n: usize) -> Self {
        DagGraph {
            n,
            adj: vec![false; n * n],
        }
    }

    /// Validates the strictly-upper-triangular shape.
    pub fn new(n: usize, adj: Vec<bool>) -> Result<Self> {
        if adj.len() != n * n {
            return Err(Error::Invalid(ValidationReport {
                violations: vec![Violation::Shape {
                    expected: n * n,
                    got: adj.len(),
                }],
            }));
        }
        let violations: Vec<_> = (0..n)
            .flat_map(|i| (0..=i).map(move |j| (i, j)))
            .filter(|&(i, j)| adj[i * n + j])
            .map(|(i, j)| Violation::NotUpperTriangular { i, j })
            .collect();
        ValidationReport { violations }.into_result()?;
        Ok(DagGraph { n, adj })
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut adj = vec![false; n * n];
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::NodeIndex { index: i.max(j), n });
            }
            adj[i * n + j] = true;
        }
        Self::new(n, adj)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.n + j]
    }

    pub fn adjacency(&self) -> &[bool] {
        &self.adj
    }

    /// Predecessors of `v` in increasing order.
    pub fn inputs(&self, v: usize) -> Vec<usize> {
        (0..v).filter(|&u| self.has_edge(u, v)).collect()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        (0..n).flat_map(move |i| ((i + 1)..n).filter(move |&j| self.adj[i * n + j]).map(move |j| (i, j)))
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().filter(|&&e| e).count()
    }

    /// 0/1 matrix as `f64`, upper-triangular.
    pub fn to_matrix(&self) -> Vec<f64> {
        self.adj.iter().map(|&e| if e { 1.0 } else { 0.0 }).collect()
    }

    /// Weighted graph with uniform nodeweights. With `symmetric` the edge set
    /// is mirrored below the diagonal; otherwise it is kept upper-triangular.
    pub fn to_weighted(&self, symmetric: bool) -> WeightedGraph {
        let n = self.n;
        let mut beta = self.to_matrix();
        if symmetric {
            for i in 0..n {
                for j in (i + 1)..n {
                    beta[j * n + i] = beta[i * n + j];
                }
            }
        }
        WeightedGraph::new_unchecked(uniform_weights(n), beta, symmetric)
    }
}

/// Convenience for [`DagGraph::to_weighted`] with the DAG (upper-triangular) convention.
pub fn dag_to_weighted(d: &DagGraph) -> WeightedGraph {
    d.to_weighted(false)
}

/// Undirected simple graph (symmetric 0/1 adjacency, no self-loops).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleGraph {
    n: usize,
    adj: Vec<bool>,
}

impl SimpleGraph {
    pub fn empty(n: usize) -> Self {
        SimpleGraph {
            n,
            adj: vec![false; n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn add_edge(&mut self, i: usize, j: usize) {
        assert!(i != j, "simple graphs have no self-loops");
        self.adj[i * self.n + j] = true;
        self.adj[j * self.n + i] = true;
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.n + j]
    }

    pub fn adjacency(&self) -> &[bool] {
        &self.adj
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().filter(|&&e| e).count() / 2
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v * self.n..(v + 1) * self.n].iter().filter(|&&e| e).count()
    }

    /// Orients every edge from the lower to the higher index.
    pub fn orient(&self) -> DagGraph {
        let n = self.n;
        let mut dag = DagGraph::empty(n);
        for i in 0..n {
            for j in (i + 1)..n {
                dag.adj[i * n + j] = self.adj[i * n + j];
            }
        }
        dag
    }

    /// Symmetric 0/1 weighted graph carrying the supplied nodeweights.
    pub fn to_weighted(&self, alpha: Vec<f64>) -> Result<WeightedGraph> {
        let beta = self.adj.iter().map(|&e| if e { 1.0 } else { 0.0 }).collect();
        WeightedGraph::new(alpha, beta, true)
    }
}

impl From<&DagGraph> for SimpleGraph {
    fn from(d: &DagGraph) -> Self {
        let mut g = SimpleGraph::empty(d.n());
        for (i, j) in d.edges() {
            g.add_edge(i, j);
        }
        g
    }
}

/// Directed-graph limit object `(W00, W01, W10, W11, w)`: for a pair of
/// nodes, the probabilities of no edge, `i -> j`, `j -> i` and both
/// directions, plus per-node self-loop probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Digraphon {
    pub resolution: usize,
    pub w00: Vec<f64>,
    pub w01: Vec<f64>,
    pub w10: Vec<f64>,
    pub w11: Vec<f64>,
    pub w: Vec<f64>,
}

impl Digraphon {
    pub fn new(
        resolution: usize,
        w00: Vec<f64>,
        w01: Vec<f64>,
        w10: Vec<f64>,
        w11: Vec<f64>,
        w: Vec<f64>,
    ) -> Result<Self> {
        let d = Digraphon {
            resolution,
            w00,
            w01,
            w10,
            w11,
            w,
        };
        validate_digraphon(&d).into_result()?;
        Ok(d)
    }

    /// The four category probabilities at `(i, j)` in the order `00, 01, 10, 11`.
    pub fn categories(&self, i: usize, j: usize) -> [f64; 4] {
        let k = i * self.resolution + j;
        [self.w00[k], self.w01[k], self.w10[k], self.w11[k]]
    }
}

pub fn validate_digraphon(d: &Digraphon) -> ValidationReport {
    let n = d.resolution;
    let mut violations = Vec::new();
    for m in [&d.w00, &d.w01, &d.w10, &d.w11] {
        if m.len() != n * n {
            violations.push(Violation::Shape {
                expected: n * n,
                got: m.len(),
            });
        }
    }
    if d.w.len() != n {
        violations.push(Violation::Shape {
            expected: n,
            got: d.w.len(),
        });
    }
    if !violations.is_empty() {
        return ValidationReport { violations };
    }
    for i in 0..n {
        for j in 0..n {
            let k = i * n + j;
            let t = j * n + i;
            for (m, _) in [(&d.w00, "W00"), (&d.w01, "W01"), (&d.w10, "W10"), (&d.w11, "W11")] {
                if !(0.0..=1.0).contains(&m[k]) {
                    violations.push(Violation::EdgeweightRange { i, j, value: m[k] });
                }
            }
            let sum = d.w00[k] + d.w01[k] + d.w10[k] + d.w11[k];
            if !((sum - 1.0).abs() <= DIGRAPHON_SUM_TOL) {
                violations.push(Violation::CategorySum { i, j, sum });
            }
            if j > i {
                if d.w00[k] != d.w00[t] {
                    violations.push(Violation::CategoryAsymmetric { which: "W00", i, j });
                }
                if d.w11[k] != d.w11[t] {
                    violations.push(Violation::CategoryAsymmetric { which: "W11", i, j });
                }
            }
            if d.w01[k] != d.w10[t] {
                violations.push(Violation::DirectionMismatch { i, j });
            }
        }
    }
    for (index, &value) in d.w.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            violations.push(Violation::SelfLoopProbability { index, value });
        }
    }
    ValidationReport { violations }
}
