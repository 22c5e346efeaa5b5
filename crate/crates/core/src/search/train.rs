use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::network::{Activation, Aggregation, NetworkSpec, StageNetwork};
use super::task::{SearchSetup, ToyTask};
use super::GumbelConfig;
use crate::error::{Error, Result};
use crate::graph::{DagGraph, StepGraphon};
use crate::rng::{split_seed, stream_rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub epochs: usize,
    pub batch: usize,
    pub lr: f64,
    pub momentum: f64,
    /// L2 penalty on weights; structural logits are exempt.
    pub weight_decay: f64,
    pub hidden: usize,
    pub gumbel: GumbelConfig,
    pub aggregation: Aggregation,
    pub activation: Activation,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            epochs: 60,
            batch: 32,
            lr: 0.05,
            momentum: 0.9,
            weight_decay: 0.0,
            hidden: 8,
            gumbel: GumbelConfig::default(),
            aggregation: Aggregation::Concat,
            activation: Activation::Relu,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch == 0 || self.hidden == 0 {
            return Err(Error::Param("epochs, batch and hidden must be positive".into()));
        }
        if !(self.lr > 0.0 && (0.0..1.0).contains(&self.momentum) && self.weight_decay >= 0.0) {
            return Err(Error::Param("invalid optimizer settings".into()));
        }
        self.gumbel.validate()
    }

    /// Step schedule dropping by 10 at half and three quarters of training.
    pub fn learning_rate(&self, epoch: usize) -> f64 {
        let drops = [self.epochs / 2, 3 * self.epochs / 4]
            .iter()
            .filter(|&&d| epoch >= d)
            .count();
        self.lr * 0.1f64.powi(drops as i32)
    }

    /// First epoch after the last learning-rate drop.
    pub fn last_phase(&self) -> usize {
        3 * self.epochs / 4
    }

    fn network_spec(&self, task: &ToyTask) -> NetworkSpec {
        NetworkSpec {
            hidden: self.hidden,
            features: task.feature_dim,
            classes: task.classes,
            aggregation: self.aggregation,
            activation: self.activation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub val_accuracy: f64,
    pub tau: f64,
    pub lr: f64,
}

/// Argmax adjacency matrices recorded during the last phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchTrace {
    pub n: usize,
    pub epochs_recorded: usize,
    /// Row-major 0/1 matrices, one per recorded epoch.
    pub matrices: Vec<Vec<u8>>,
    pub average: StepGraphon,
}

impl SearchTrace {
    pub fn from_dags(dags: &[DagGraph]) -> Result<Self> {
        let first = dags.first().ok_or_else(|| Error::Param("empty search trace".into()))?;
        let n = first.n();
        if let Some(d) = dags.iter().find(|d| d.n() != n) {
            return Err(Error::SizeMismatch(n, d.n()));
        }
        let matrices: Vec<Vec<u8>> = dags
            .iter()
            .map(|d| d.adjacency().iter().map(|&e| e as u8).collect())
            .collect();
        let average = mean_matrix(n, &matrices)?;
        Ok(SearchTrace {
            n,
            epochs_recorded: matrices.len(),
            matrices,
            average,
        })
    }
}

fn mean_matrix(n: usize, matrices: &[Vec<u8>]) -> Result<StepGraphon> {
    if matrices.is_empty() {
        return Err(Error::Param("empty search trace".into()));
    }
    let mut sum = vec![0u32; n * n];
    for m in matrices {
        if m.len() != n * n {
            return Err(Error::SizeMismatch(n * n, m.len()));
        }
        for (s, &e) in sum.iter_mut().zip(m) {
            *s += e as u32;
        }
    }
    let t = matrices.len() as f64;
    StepGraphon::new(n, sum.into_iter().map(|s| s as f64 / t).collect())
}

/// Entrywise mean of the recorded matrices.
pub fn estimate_graphon(trace: &SearchTrace) -> Result<StepGraphon> {
    mean_matrix(trace.n, &trace.matrices)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub trace: SearchTrace,
    pub final_dag: DagGraph,
    pub history: Vec<EpochRecord>,
    pub candidates: Vec<Vec<Vec<usize>>>,
    /// Final structural logits `log pi`, per node.
    pub logits: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedOutcome {
    pub history: Vec<EpochRecord>,
    pub val_accuracy: f64,
}

struct Run {
    history: Vec<EpochRecord>,
    recorded: Vec<DagGraph>,
    params: Vec<f64>,
}

fn run(net: &StageNetwork, task: &ToyTask, config: &SearchConfig, seed: u64) -> Result<Run> {
    config.validate()?;
    let (train, val) = task.data();
    let mut params = net.init_params(split_seed(seed, 0));
    let mut velocity = vec![0.0; params.len()];
    let mut decay = vec![config.weight_decay; params.len()];
    for r in net.logit_ranges() {
        decay[r].iter_mut().for_each(|d| *d = 0.0);
    }
    let mut noise_rng = stream_rng(seed, 1);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    let mut recorded = Vec::new();

    for epoch in 0..config.epochs {
        let tau = config.gumbel.temperature(epoch);
        let lr = config.learning_rate(epoch);
        order.shuffle(&mut stream_rng(seed, 100 + epoch as u64));
        let mut total = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(config.batch) {
            let (x, y) = train.rows(chunk);
            let noise = net.sample_noise(&mut noise_rng);
            let (loss, grad) = net.gradients(&params, x.view(), y.view(), &noise, tau);
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch, loss });
            }
            total += loss;
            batches += 1;
            for i in 0..params.len() {
                velocity[i] = config.momentum * velocity[i] + grad[i] + decay[i] * params[i];
                params[i] -= lr * velocity[i];
            }
        }
        let loss = total / batches as f64;
        if !loss.is_finite() || params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Diverged { epoch, loss });
        }
        let (vx, vy) = val.view();
        history.push(EpochRecord {
            epoch,
            loss,
            val_accuracy: net.accuracy(&params, vx, vy),
            tau,
            lr,
        });
        if epoch >= config.last_phase() {
            recorded.push(net.argmax_dag(&params));
        }
    }
    Ok(Run {
        history,
        recorded,
        params,
    })
}

/// Joint SGD over weights and structural logits. Each batch draws fresh
/// Gumbel noise; after every epoch of the last phase the argmax DAG is
/// recorded.
pub fn train_search(setup: &SearchSetup, config: &SearchConfig, seed: u64) -> Result<SearchOutcome> {
    let task = &setup.task;
    let net = StageNetwork::new(
        config.network_spec(task),
        setup.candidates.clone(),
        (0..task.nodes).collect(),
    )?;
    let r = run(&net, task, config, seed)?;
    let trace = SearchTrace::from_dags(&r.recorded)?;
    Ok(SearchOutcome {
        trace,
        final_dag: net.argmax_dag(&r.params),
        history: r.history,
        candidates: setup.candidates.clone(),
        logits: (0..task.nodes).map(|v| net.logits(&r.params, v).to_vec()).collect(),
    })
}

/// Trains the weights of a fixed DAG. Node `v` of `dag` reads and predicts
/// task node `source[v]`.
pub fn train_fixed(
    task: &ToyTask,
    dag: &DagGraph,
    source: &[usize],
    config: &SearchConfig,
    seed: u64,
) -> Result<FixedOutcome> {
    if let Some(&s) = source.iter().find(|&&s| s >= task.nodes) {
        return Err(Error::NodeIndex { index: s, n: task.nodes });
    }
    let candidates = (0..dag.n()).map(|v| vec![dag.inputs(v)]).collect();
    let net = StageNetwork::new(config.network_spec(task), candidates, source.to_vec())?;
    let r = run(&net, task, config, seed)?;
    let val_accuracy = r.history.last().map_or(0.0, |h| h.val_accuracy);
    Ok(FixedOutcome {
        history: r.history,
        val_accuracy,
    })
}
