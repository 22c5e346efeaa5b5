//! JSON graph documents.
//!
//! ```json
//! {"version":1, "kind":"weighted", "n":2, "alpha":[0.5,0.5],
//!  "beta":[[0,1],[1,0]], "symmetric":true}
//! ```
//!
//! `kind` is one of `weighted`, `dag` (0/1 `adj` matrix, upper-triangular)
//! or `digraphon` (`w00`, `w01`, `w10`, `w11` matrices plus self-loop vector
//! `w`). Matrices are written row by row as full `n x n` arrays, zeros
//! included. Documents with a `version` other than 1 are rejected.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{uniform_weights, DagGraph, Digraphon, StepGraphon, WeightedGraph};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum GraphDocument {
    Weighted(WeightedGraph),
    Dag(DagGraph),
    Digraphon(Digraphon),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    version: u32,
    kind: String,
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    adj: Option<Vec<Vec<u8>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    symmetric: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    w00: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    w01: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    w10: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    w11: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    w: Option<Vec<f64>>,
}

impl RawDocument {
    fn empty(kind: &str, n: usize) -> Self {
        RawDocument {
            version: FORMAT_VERSION,
            kind: kind.to_string(),
            n,
            alpha: None,
            beta: None,
            adj: None,
            symmetric: None,
            w00: None,
            w01: None,
            w10: None,
            w11: None,
            w: None,
        }
    }
}

fn to_rows<T: Copy>(flat: &[T], n: usize) -> Vec<Vec<T>> {
    flat.chunks(n.max(1)).map(|r| r.to_vec()).collect()
}

fn from_rows<T: Copy>(rows: Vec<Vec<T>>, n: usize, field: &str) -> Result<Vec<T>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Format(format!("`{field}` must be a full {n}x{n} matrix")));
    }
    Ok(rows.into_iter().flatten().collect())
}

fn require<T>(v: Option<T>, field: &str, kind: &str) -> Result<T> {
    v.ok_or_else(|| Error::Format(format!("`{kind}` document is missing `{field}`")))
}

impl GraphDocument {
    pub fn to_json(&self) -> Result<String> {
        let raw = match self {
            GraphDocument::Weighted(g) => {
                let mut raw = RawDocument::empty("weighted", g.n());
                raw.alpha = Some(g.alpha().to_vec());
                raw.beta = Some(to_rows(g.beta_matrix(), g.n()));
                raw.symmetric = Some(g.is_symmetric());
                raw
            }
            GraphDocument::Dag(d) => {
                let mut raw = RawDocument::empty("dag", d.n());
                raw.alpha = Some(uniform_weights(d.n()));
                let adj: Vec<u8> = d.adjacency().iter().map(|&e| e as u8).collect();
                raw.adj = Some(to_rows(&adj, d.n()));
                raw.symmetric = Some(false);
                raw
            }
            GraphDocument::Digraphon(d) => {
                let n = d.resolution;
                let mut raw = RawDocument::empty("digraphon", n);
                raw.w00 = Some(to_rows(&d.w00, n));
                raw.w01 = Some(to_rows(&d.w01, n));
                raw.w10 = Some(to_rows(&d.w10, n));
                raw.w11 = Some(to_rows(&d.w11, n));
                raw.w = Some(d.w.clone());
                raw
            }
        };
        Ok(serde_json::to_string_pretty(&raw)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v == FORMAT_VERSION as u64 => {}
            Some(v) => return Err(Error::Format(format!("unsupported version {v}"))),
            None => return Err(Error::Format("missing `version`".into())),
        }
        let raw: RawDocument = serde_json::from_value(value)?;
        let n = raw.n;
        match raw.kind.as_str() {
            "weighted" => {
                let alpha = require(raw.alpha, "alpha", "weighted")?;
                if alpha.len() != n {
                    return Err(Error::Format(format!("`alpha` must have {n} entries")));
                }
                let beta = from_rows(require(raw.beta, "beta", "weighted")?, n, "beta")?;
                let symmetric = raw.symmetric.unwrap_or(true);
                Ok(GraphDocument::Weighted(WeightedGraph::new(alpha, beta, symmetric)?))
            }
            "dag" => {
                let adj = from_rows(require(raw.adj, "adj", "dag")?, n, "adj")?;
                if adj.iter().any(|&a| a > 1) {
                    return Err(Error::Format("`adj` entries must be 0 or 1".into()));
                }
                Ok(GraphDocument::Dag(DagGraph::new(
                    n,
                    adj.into_iter().map(|a| a == 1).collect(),
                )?))
            }
            "digraphon" => Ok(GraphDocument::Digraphon(Digraphon::new(
                n,
                from_rows(require(raw.w00, "w00", "digraphon")?, n, "w00")?,
                from_rows(require(raw.w01, "w01", "digraphon")?, n, "w01")?,
                from_rows(require(raw.w10, "w10", "digraphon")?, n, "w10")?,
                from_rows(require(raw.w11, "w11", "digraphon")?, n, "w11")?,
                require(raw.w, "w", "digraphon")?,
            )?)),
            other => Err(Error::Format(format!("unknown kind `{other}`"))),
        }
    }

    /// Weighted view: DAGs become upper-triangular 0/1 weighted graphs.
    pub fn into_weighted(self) -> Result<WeightedGraph> {
        match self {
            GraphDocument::Weighted(g) => Ok(g),
            GraphDocument::Dag(d) => Ok(d.to_weighted(false)),
            GraphDocument::Digraphon(_) => Err(Error::Format(
                "a digraphon cannot be used where a weighted graph is expected".into(),
            )),
        }
    }
}

impl From<WeightedGraph> for GraphDocument {
    fn from(g: WeightedGraph) -> Self {
        GraphDocument::Weighted(g)
    }
}

impl From<DagGraph> for GraphDocument {
    fn from(d: DagGraph) -> Self {
        GraphDocument::Dag(d)
    }
}

impl TryFrom<&StepGraphon> for GraphDocument {
    type Error = Error;

    fn try_from(s: &StepGraphon) -> Result<Self> {
        Ok(GraphDocument::Weighted(s.to_weighted()?))
    }
}
