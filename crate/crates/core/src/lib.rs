//! Graphons as step functions, the cut-distance family, blow-up scaling of
//! stage-wise DAGs, sampling, and a Gumbel-softmax subset search whose
//! late-phase argmax graphs are averaged into a graphon estimate.

pub mod cut;
pub mod error;
pub mod graph;
pub mod io;
pub mod models;
pub mod rng;
pub mod sampler;
pub mod scaling;
pub mod search;

pub use cut::{CutConfig, CutResult, DeltaMode, OverlayMatrix, Witness};
pub use error::{Error, Result};
pub use graph::{DagGraph, Digraphon, SimpleGraph, StepGraphon, ValidationReport, Violation, WeightedGraph};
pub use io::GraphDocument;
pub use models::{BaParams, ErParams, RandomModel, WsParams};
pub use scaling::ScalePlan;
pub use search::{GumbelConfig, SearchConfig, SearchSetup, SearchTrace, TaskSpec, ToyTask};
