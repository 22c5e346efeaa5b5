//! The toy stage network and its hand-written backward pass.
//!
//! Node `v` reads its private input slice `x_v` (the stage input is broadcast
//! to every node) and the mixed output of its candidate subsets `in(v)`:
//!
//! ```text
//! out(u, k) = act(W_{v,k,u} [x_u, in(u)] + b_{v,k,u})   for u in subset k
//! out(k)    = aggregate_u out(u, k)
//! in(v)     = sum_k a_k out(k),   a = softmax((log pi_v + gamma) / tau)
//! h_v       = act(H_v [x_v, in(v)] + c_v)
//! logits_v  = R_v h_v + r_v
//! ```
//!
//! Concatenation gives every predecessor appearing in some candidate a fixed
//! slot of width `hidden`; members absent from a subset leave their slot at
//! zero. The stage output (the input of the dummy sink) is `[h_0, .., h_{n-1}]`
//! and each `h_v` feeds a softmax cross-entropy head for the label of node `v`.

use ndarray::{concatenate, s, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{argmax, gumbel_noise, gumbel_softmax_with_noise};
use crate::error::{Error, Result};
use crate::graph::DagGraph;
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    Concat,
    Sum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    fn apply(self, pre: &Array2<f64>) -> Array2<f64> {
        match self {
            Activation::Relu => pre.mapv(|x| x.max(0.0)),
            Activation::Identity => pre.clone(),
        }
    }

    /// Multiplies `grad` by the derivative at `pre`.
    fn backward(self, grad: &mut Array2<f64>, pre: &Array2<f64>) {
        if self == Activation::Relu {
            grad.zip_mut_with(pre, |g, &p| {
                if p <= 0.0 {
                    *g = 0.0;
                }
            });
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub hidden: usize,
    /// Width of each node's private input slice.
    pub features: usize,
    pub classes: usize,
    pub aggregation: Aggregation,
    pub activation: Activation,
}

/// Dense layer stored row-major as `rows x cols` weights followed by `rows`
/// biases.
#[derive(Debug, Clone, Copy)]
struct Block {
    offset: usize,
    rows: usize,
    cols: usize,
}

impl Block {
    fn len(&self) -> usize {
        self.rows * self.cols + self.rows
    }

    fn weight<'a>(&self, p: &'a [f64]) -> ArrayView2<'a, f64> {
        ArrayView2::from_shape((self.rows, self.cols), &p[self.offset..self.offset + self.rows * self.cols])
            .expect("block shape")
    }

    fn bias<'a>(&self, p: &'a [f64]) -> ArrayView1<'a, f64> {
        let start = self.offset + self.rows * self.cols;
        ArrayView1::from(&p[start..start + self.rows])
    }

    fn apply(&self, p: &[f64], input: &Array2<f64>) -> Array2<f64> {
        input.dot(&self.weight(p).t()) + self.bias(p)
    }

    /// Accumulates the gradients of `out = input W^T + b` given `d out`.
    fn accumulate(&self, grad: &mut [f64], dout: &Array2<f64>, input: &Array2<f64>) {
        let gw = dout.t().dot(input);
        let w = &mut grad[self.offset..self.offset + self.rows * self.cols];
        for (g, x) in w.iter_mut().zip(gw.iter()) {
            *g += x;
        }
        let start = self.offset + self.rows * self.cols;
        for (g, x) in grad[start..start + self.rows].iter_mut().zip(dout.sum_axis(Axis(0))) {
            *g += x;
        }
    }
}

#[derive(Debug, Clone)]
struct Node {
    source: usize,
    candidates: Vec<Vec<usize>>,
    /// Predecessors that appear in some candidate, ascending.
    slots: Vec<usize>,
    in_dim: usize,
    members: Vec<Vec<Block>>,
    head: Block,
    readout: Block,
    logits: usize,
}

/// Parameter layout and forward/backward passes of a stage network. The
/// parameters themselves live in a flat `Vec<f64>` owned by the caller.
#[derive(Debug, Clone)]
pub struct StageNetwork {
    spec: NetworkSpec,
    nodes: Vec<Node>,
    n_params: usize,
}

/// How subset coefficients are formed in a forward pass.
#[derive(Debug, Clone, Copy)]
pub enum Mixing<'a> {
    /// Gumbel softmax with the given per-node noise.
    Gumbel { noise: &'a [Vec<f64>], tau: f64 },
    /// One-hot on the subset with the highest `pi`.
    Argmax,
    /// Caller-supplied coefficients per node.
    Fixed(&'a [Vec<f64>]),
}

#[derive(Debug, Clone)]
struct NodeForward {
    /// `[x_v, in(v)]`
    xin: Array2<f64>,
    coefficients: Vec<f64>,
    outs: Vec<Array2<f64>>,
    member_pre: Vec<Vec<Array2<f64>>>,
    head_pre: Array2<f64>,
    head_out: Array2<f64>,
    log_probs: Array2<f64>,
}

/// Cached activations of one forward pass.
#[derive(Debug, Clone)]
pub struct Forward {
    features: usize,
    nodes: Vec<NodeForward>,
}

impl Forward {
    /// Mixed input `in(v)`.
    pub fn input(&self, v: usize) -> ArrayView2<'_, f64> {
        self.nodes[v].xin.slice(s![.., self.features..])
    }

    /// Aggregated output `out(k)` of candidate subset `k` of node `v`.
    pub fn subset_output(&self, v: usize, k: usize) -> &Array2<f64> {
        &self.nodes[v].outs[k]
    }

    pub fn coefficients(&self, v: usize) -> &[f64] {
        &self.nodes[v].coefficients
    }

    /// Stage output: the hidden states of all nodes side by side.
    pub fn output(&self) -> Array2<f64> {
        let views: Vec<_> = self.nodes.iter().map(|n| n.head_out.view()).collect();
        concatenate(Axis(1), &views).expect("equal batch sizes")
    }

    pub fn log_probs(&self, v: usize) -> &Array2<f64> {
        &self.nodes[v].log_probs
    }
}

fn log_softmax_rows(z: &Array2<f64>) -> Array2<f64> {
    let mut out = z.clone();
    for mut row in out.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let lse = max + row.mapv(|x| (x - max).exp()).sum().ln();
        row.mapv_inplace(|x| x - lse);
    }
    out
}

impl StageNetwork {
    /// `candidates[v]` lists the input subsets of node `v`; `source[v]` is the
    /// task node whose input slice and label node `v` uses.
    pub fn new(spec: NetworkSpec, candidates: Vec<Vec<Vec<usize>>>, source: Vec<usize>) -> Result<Self> {
        if source.len() != candidates.len() {
            return Err(Error::Param("one source index per node is required".into()));
        }
        if spec.hidden == 0 || spec.features == 0 || spec.classes < 2 {
            return Err(Error::Param(format!("degenerate network shape {spec:?}")));
        }
        let mut nodes: Vec<Node> = Vec::with_capacity(candidates.len());
        let mut offset = 0;
        let mut take = |rows: usize, cols: usize| {
            let b = Block { offset, rows, cols };
            offset += b.len();
            b
        };
        for (v, cands) in candidates.into_iter().enumerate() {
            if cands.is_empty() {
                return Err(Error::Param(format!("node {v} has no candidate subsets")));
            }
            let mut slots: Vec<usize> = cands.iter().flatten().copied().collect();
            slots.sort_unstable();
            slots.dedup();
            if let Some(&u) = slots.iter().find(|&&u| u >= v) {
                return Err(Error::Param(format!("node {u} cannot feed node {v}")));
            }
            let in_dim = match (spec.aggregation, slots.is_empty()) {
                (_, true) => 0,
                (Aggregation::Concat, false) => spec.hidden * slots.len(),
                (Aggregation::Sum, false) => spec.hidden,
            };
            let members = cands
                .iter()
                .map(|c| {
                    c.iter()
                        .map(|&u| take(spec.hidden, spec.features + nodes[u].in_dim))
                        .collect()
                })
                .collect();
            let head = take(spec.hidden, spec.features + in_dim);
            let readout = take(spec.classes, spec.hidden);
            let logits = take(cands.len(), 0).offset;
            nodes.push(Node {
                source: source[v],
                candidates: cands,
                slots,
                in_dim,
                members,
                head,
                readout,
                logits,
            });
        }
        Ok(StageNetwork {
            spec,
            nodes,
            n_params: offset,
        })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn candidates(&self, v: usize) -> &[Vec<usize>] {
        &self.nodes[v].candidates
    }

    /// Structural logits `log pi_v`.
    pub fn logits<'a>(&self, params: &'a [f64], v: usize) -> &'a [f64] {
        let node = &self.nodes[v];
        &params[node.logits..node.logits + node.candidates.len()]
    }

    /// Parameter range of the readout bias of node `v`, one entry per class.
    pub fn readout_bias(&self, v: usize) -> std::ops::Range<usize> {
        let b = &self.nodes[v].readout;
        let start = b.offset + b.rows * b.cols;
        start..start + b.rows
    }

    /// Parameter ranges holding structural logits (excluded from weight decay).
    pub fn logit_ranges(&self) -> Vec<std::ops::Range<usize>> {
        self.nodes
            .iter()
            .map(|n| n.logits..n.logits + n.candidates.len())
            .collect()
    }

    /// He-scaled Gaussian weights, zero biases, logits uniform in `[-0.01, 0.01]`.
    pub fn init_params(&self, seed: u64) -> Vec<f64> {
        let mut rng = rng_from_seed(seed);
        let mut p = vec![0.0; self.n_params];
        let gain = match self.spec.activation {
            Activation::Relu => 2.0,
            Activation::Identity => 1.0,
        };
        let mut fill = |b: &Block, gain: f64, rng: &mut rand_chacha::ChaCha8Rng| {
            if b.cols == 0 {
                return;
            }
            let normal = Normal::new(0.0, (gain / b.cols as f64).sqrt()).expect("positive std");
            for x in &mut p[b.offset..b.offset + b.rows * b.cols] {
                *x = normal.sample(rng);
            }
        };
        for node in &self.nodes {
            for b in node.members.iter().flatten() {
                fill(b, gain, &mut rng);
            }
            fill(&node.head, gain, &mut rng);
            fill(&node.readout, 1.0, &mut rng);
        }
        for node in &self.nodes {
            for k in 0..node.candidates.len() {
                p[node.logits + k] = rng.random_range(-0.01..0.01);
            }
        }
        p
    }

    /// Fresh Gumbel noise for every node's subsets.
    pub fn sample_noise<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Vec<f64>> {
        self.nodes
            .iter()
            .map(|n| gumbel_noise(n.candidates.len(), rng))
            .collect()
    }

    /// Per node, the subset with the highest `pi` (lowest index on ties).
    pub fn argmax_subsets(&self, params: &[f64]) -> Vec<usize> {
        (0..self.nodes.len()).map(|v| argmax(self.logits(params, v))).collect()
    }

    /// Adjacency formed by the winning subsets.
    pub fn argmax_dag(&self, params: &[f64]) -> DagGraph {
        let n = self.nodes.len();
        let edges = self.argmax_subsets(params).into_iter().enumerate().flat_map(|(v, k)| {
            self.nodes[v].candidates[k].iter().map(move |&u| (u, v)).collect::<Vec<_>>()
        });
        DagGraph::from_edges(n, edges).expect("candidates respect the node order")
    }

    fn slot_cols(&self, node: &Node, u: usize) -> std::ops::Range<usize> {
        let h = self.spec.hidden;
        match self.spec.aggregation {
            Aggregation::Concat => {
                let slot = node.slots.binary_search(&u).expect("member has a slot");
                slot * h..(slot + 1) * h
            }
            Aggregation::Sum => 0..h,
        }
    }

    /// Forward pass on a batch; `x` has `features` columns per task node.
    pub fn forward(&self, params: &[f64], x: ArrayView2<'_, f64>, mixing: Mixing<'_>) -> Forward {
        let f = self.spec.features;
        let b = x.nrows();
        let act = self.spec.activation;
        let mut done: Vec<NodeForward> = Vec::with_capacity(self.nodes.len());
        for (v, node) in self.nodes.iter().enumerate() {
            let logits = self.logits(params, v);
            let coefficients = match mixing {
                Mixing::Gumbel { noise, tau } => gumbel_softmax_with_noise(logits, &noise[v], tau),
                Mixing::Argmax => {
                    let mut a = vec![0.0; logits.len()];
                    a[argmax(logits)] = 1.0;
                    a
                }
                Mixing::Fixed(a) => a[v].clone(),
            };
            let mut in_v = Array2::zeros((b, node.in_dim));
            let mut outs = Vec::with_capacity(node.candidates.len());
            let mut member_pre = Vec::with_capacity(node.candidates.len());
            for (k, subset) in node.candidates.iter().enumerate() {
                let mut out_k = Array2::zeros((b, node.in_dim));
                let mut pres = Vec::with_capacity(subset.len());
                if matches!(mixing, Mixing::Argmax) && coefficients[k] == 0.0 {
                    outs.push(out_k);
                    member_pre.push(pres);
                    continue;
                }
                for (idx, &u) in subset.iter().enumerate() {
                    let pre = node.members[k][idx].apply(params, &done[u].xin);
                    let o = act.apply(&pre);
                    let mut slot = out_k.slice_mut(s![.., self.slot_cols(node, u)]);
                    slot += &o;
                    pres.push(pre);
                }
                in_v.scaled_add(coefficients[k], &out_k);
                outs.push(out_k);
                member_pre.push(pres);
            }
            let xv = x.slice(s![.., node.source * f..(node.source + 1) * f]);
            let xin = concatenate(Axis(1), &[xv, in_v.view()]).expect("equal batch sizes");
            let head_pre = node.head.apply(params, &xin);
            let head_out = act.apply(&head_pre);
            let log_probs = log_softmax_rows(&node.readout.apply(params, &head_out));
            done.push(NodeForward {
                xin,
                coefficients,
                outs,
                member_pre,
                head_pre,
                head_out,
                log_probs,
            });
        }
        Forward { features: f, nodes: done }
    }

    /// Mean over nodes of the mean cross-entropy over the batch.
    pub fn loss(&self, forward: &Forward, y: ArrayView2<'_, usize>) -> f64 {
        let b = y.nrows() as f64;
        let mut total = 0.0;
        for (node, nf) in self.nodes.iter().zip(&forward.nodes) {
            let mut l = 0.0;
            for (r, row) in nf.log_probs.rows().into_iter().enumerate() {
                l -= row[y[[r, node.source]]];
            }
            total += l / b;
        }
        total / self.nodes.len() as f64
    }

    /// Fraction of correct node labels under the argmax architecture.
    pub fn accuracy(&self, params: &[f64], x: ArrayView2<'_, f64>, y: ArrayView2<'_, usize>) -> f64 {
        let fwd = self.forward(params, x, Mixing::Argmax);
        let mut correct = 0usize;
        for (node, nf) in self.nodes.iter().zip(&fwd.nodes) {
            for (r, row) in nf.log_probs.rows().into_iter().enumerate() {
                let pred = argmax(&row.to_vec());
                correct += (pred == y[[r, node.source]]) as usize;
            }
        }
        correct as f64 / (x.nrows() * self.nodes.len()) as f64
    }

    /// Loss and exact gradients for all weights and structural logits. The
    /// Gumbel noise is held fixed, so the logits receive the reparameterized
    /// gradient through the softmax coefficients.
    pub fn gradients(
        &self,
        params: &[f64],
        x: ArrayView2<'_, f64>,
        y: ArrayView2<'_, usize>,
        noise: &[Vec<f64>],
        tau: f64,
    ) -> (f64, Vec<f64>) {
        let fwd = self.forward(params, x, Mixing::Gumbel { noise, tau });
        let loss = self.loss(&fwd, y);
        let f = self.spec.features;
        let act = self.spec.activation;
        let b = x.nrows();
        let scale = 1.0 / (b * self.nodes.len()) as f64;
        let mut grad = vec![0.0; self.n_params];
        let mut g_in: Vec<Array2<f64>> = self.nodes.iter().map(|n| Array2::zeros((b, n.in_dim))).collect();

        for v in (0..self.nodes.len()).rev() {
            let node = &self.nodes[v];
            let nf = &fwd.nodes[v];

            let mut dz = nf.log_probs.mapv(f64::exp);
            for r in 0..b {
                dz[[r, y[[r, node.source]]]] -= 1.0;
            }
            dz *= scale;
            node.readout.accumulate(&mut grad, &dz, &nf.head_out);
            let mut dh = dz.dot(&node.readout.weight(params));
            act.backward(&mut dh, &nf.head_pre);
            node.head.accumulate(&mut grad, &dh, &nf.xin);
            let dxin = dh.dot(&node.head.weight(params));
            g_in[v] += &dxin.slice(s![.., f..]);

            if node.in_dim == 0 {
                continue;
            }
            let gv = std::mem::take(&mut g_in[v]);
            let a = &nf.coefficients;
            let gk: Vec<f64> = nf.outs.iter().map(|o| (&gv * o).sum()).collect();
            let mean: f64 = a.iter().zip(&gk).map(|(a, g)| a * g).sum();
            for k in 0..a.len() {
                grad[node.logits + k] += a[k] * (gk[k] - mean) / tau;
            }
            for (k, subset) in node.candidates.iter().enumerate() {
                for (idx, &u) in subset.iter().enumerate() {
                    let block = node.members[k][idx];
                    let mut dpre = gv.slice(s![.., self.slot_cols(node, u)]).to_owned() * a[k];
                    act.backward(&mut dpre, &nf.member_pre[k][idx]);
                    block.accumulate(&mut grad, &dpre, &fwd.nodes[u].xin);
                    let dxu = dpre.dot(&block.weight(params));
                    g_in[u] += &dxu.slice(s![.., f..]);
                }
            }
        }
        (loss, grad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(activation: Activation, aggregation: Aggregation) -> NetworkSpec {
        NetworkSpec {
            hidden: 3,
            features: 2,
            classes: 2,
            aggregation,
            activation,
        }
    }

    fn chain_candidates() -> Vec<Vec<Vec<usize>>> {
        vec![
            vec![vec![]],
            vec![vec![0], vec![]],
            vec![vec![0, 1], vec![1], vec![0]],
        ]
    }

    #[test]
    fn rejects_forward_edges() {
        let bad = vec![vec![vec![1]], vec![vec![]]];
        assert!(StageNetwork::new(spec(Activation::Relu, Aggregation::Concat), bad, vec![0, 1]).is_err());
    }

    #[test]
    fn zero_input_gives_zero_output() {
        let net = StageNetwork::new(
            spec(Activation::Identity, Aggregation::Concat),
            chain_candidates(),
            vec![0, 1, 2],
        )
        .unwrap();
        let mut p = net.init_params(3);
        // zero every bias
        for node in &net.nodes {
            for blk in node.members.iter().flatten().chain([&node.head]) {
                let start = blk.offset + blk.rows * blk.cols;
                p[start..start + blk.rows].iter_mut().for_each(|b| *b = 0.0);
            }
        }
        let x = Array2::zeros((4, 6));
        let noise = net.sample_noise(&mut rng_from_seed(0));
        let fwd = net.forward(&p, x.view(), Mixing::Gumbel { noise: &noise, tau: 1.0 });
        assert!(fwd.output().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn argmax_dag_uses_winning_subsets() {
        let net = StageNetwork::new(
            spec(Activation::Relu, Aggregation::Sum),
            chain_candidates(),
            vec![0, 1, 2],
        )
        .unwrap();
        let mut p = net.init_params(0);
        let r2 = net.nodes[2].logits;
        p[r2..r2 + 3].copy_from_slice(&[0.0, 0.0, 1.0]);
        let r1 = net.nodes[1].logits;
        p[r1..r1 + 2].copy_from_slice(&[1.0, 0.0]);
        let d = net.argmax_dag(&p);
        assert_eq!(d.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2)]);
    }
}
