mod manifest;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use graphon_core::cut::{d_box, d_box_exact, d_box_heuristic, delta_hat, delta_ub_optimize};
use graphon_core::models::{ba_sample, empirical_graphon, er_graphon, ws_graphon};
use graphon_core::rng::{rng_from_seed, split_seed};
use graphon_core::sampler::{concentration_experiment, sample_digraphon, sample_simple, Sample, SampleReport};
use graphon_core::scaling::{blowup_k, fractional_blowup, interpolate_1d};
use graphon_core::search::train_search;
use graphon_core::{
    BaParams, CutConfig, CutResult, DeltaMode, ErParams, GraphDocument, RandomModel, ScalePlan, SearchConfig,
    SearchSetup, TaskSpec, WeightedGraph, WsParams,
};
use serde::{Deserialize, Serialize};

use manifest::{Ctx, RunManifest};

#[derive(Parser, Debug)]
#[command(name = "graphon", version, about = "Graphon toolkit for scaling and searching network wiring")]
struct Cli {
    /// Root seed; every random stream is derived from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = all cores). Outputs do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Generate a graph from a random graph model.
    Gen(GenArgs),
    /// Scale a graph to a larger node count.
    Scale(ScaleArgs),
    /// Draw graphs from a weighted graph or digraphon.
    Sample(SampleArgs),
    /// Cut distance between two graphs.
    Distance(DistanceArgs),
    /// Differentiable wiring search on the toy task.
    Search(SearchArgs),
    /// Sampling concentration experiment.
    Concentration(ConcentrationArgs),
    /// Rerun a manifest and check that its outputs are reproduced.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Gen(_) => "gen",
            Command::Scale(_) => "scale",
            Command::Sample(_) => "sample",
            Command::Distance(_) => "distance",
            Command::Search(_) => "search",
            Command::Concentration(_) => "concentration",
            Command::Replay(_) => "replay",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelName {
    Er,
    Ws,
    Ba,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArgs {
    /// Edge probability (er) or rewiring probability (ws).
    #[arg(long)]
    p: Option<f64>,
    /// Lattice degree fraction k/n (ws).
    #[arg(long)]
    kappa: Option<f64>,
    /// Seed clique size (ba).
    #[arg(long)]
    m0: Option<usize>,
    /// Edges added per node (ba).
    #[arg(long)]
    m: Option<usize>,
}

impl ModelArgs {
    fn model(&self, name: ModelName, n: usize) -> Result<RandomModel> {
        let need = |v: Option<f64>, flag: &str| {
            v.ok_or_else(|| graphon_core::Error::Param(format!("--{flag} is required for this model")))
        };
        let needu = |v: Option<usize>, flag: &str| {
            v.ok_or_else(|| graphon_core::Error::Param(format!("--{flag} is required for this model")))
        };
        Ok(match name {
            ModelName::Er => RandomModel::Er(ErParams::new(need(self.p, "p")?)?),
            ModelName::Ws => RandomModel::Ws(WsParams::new(need(self.kappa, "kappa")?, need(self.p, "p")?)?),
            ModelName::Ba => RandomModel::Ba(BaParams::new(needu(self.m0, "m0")?, needu(self.m, "m")?, n)?),
        })
    }
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenArgs {
    #[arg(value_enum)]
    model: ModelName,
    #[command(flatten)]
    params: ModelArgs,
    #[arg(long)]
    n: usize,
    /// Average this many samples into an empirical graphon instead.
    #[arg(long)]
    trials: Option<usize>,
    /// Block resolution of the empirical graphon (defaults to n). The file
    /// always has n nodes; each node takes the value of its block.
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleMethod {
    Blowup,
    Fractional,
    Interpolate,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleArgs {
    #[arg(long)]
    input: PathBuf,
    /// Target node count.
    #[arg(long = "N")]
    target: usize,
    #[arg(long, value_enum, default_value_t = ScaleMethod::Fractional)]
    method: ScaleMethod,
    #[arg(long)]
    out: PathBuf,
    /// Where to write the scale plan (defaults to `<out stem>.plan.json`).
    #[arg(long)]
    plan: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleArgs {
    #[arg(long)]
    input: PathBuf,
    /// Fractionally blow the input up to this many nodes before sampling.
    #[arg(long = "N")]
    target: Option<usize>,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Sampled graphs: one document, or an array when `--trials` > 1.
    #[arg(long)]
    out: PathBuf,
    /// Per-trial CSV (trial, edges, distance, threshold).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMode {
    /// Exact below the size limit, local search above.
    Dbox,
    DboxExact,
    DboxHeuristic,
    DhatExact,
    DhatHeuristic,
    OverlayOptimize,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceArgs {
    first: PathBuf,
    second: PathBuf,
    #[arg(long, value_enum, default_value_t = DistanceMode::Dbox)]
    mode: DistanceMode,
    /// Local-search restarts.
    #[arg(long, default_value_t = 50)]
    restarts: usize,
    /// Overlay optimizer steps.
    #[arg(long, default_value_t = 200)]
    iters: usize,
    /// Largest node count for exhaustive d_box.
    #[arg(long, default_value_t = 20)]
    dbox_limit: usize,
    /// Largest node count for exhaustive delta_hat.
    #[arg(long, default_value_t = 8)]
    dhat_limit: usize,
    /// Written to stdout when absent (no manifest then).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchArgs {
    /// JSON file with optional `task` and `config` objects.
    #[arg(long)]
    task: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Directory for trace.json, graphon.json, final_dag.json and history.csv.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationArgs {
    /// Graph to sample from; otherwise a model is swept over `--sizes`.
    #[arg(long, conflicts_with = "model")]
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: Option<ModelName>,
    #[command(flatten)]
    params: ModelArgs,
    #[arg(long, value_delimiter = ',', default_value = "8,12,16")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 50)]
    restarts: usize,
    /// Reports as a JSON array, one per size.
    #[arg(long)]
    out: PathBuf,
    /// Per-trial CSV (n, trial, distance, threshold).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayArgs {
    manifest: PathBuf,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SearchFile {
    task: TaskSpec,
    config: SearchConfig,
}

fn json<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text.into_bytes())
}

fn document(doc: &GraphDocument) -> Result<Vec<u8>> {
    let mut text = doc.to_json()?;
    text.push('\n');
    Ok(text.into_bytes())
}

fn read_doc(ctx: &mut Ctx, path: &Path) -> Result<GraphDocument> {
    let text = ctx.read(path)?;
    GraphDocument::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_weighted(ctx: &mut Ctx, path: &Path) -> Result<WeightedGraph> {
    Ok(read_doc(ctx, path)?.into_weighted()?)
}

fn csv_bytes<R: Serialize>(rows: impl IntoIterator<Item = R>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))
}

fn cmd_gen(a: &GenArgs, ctx: &mut Ctx) -> Result<()> {
    let model = a.params.model(a.model, a.n)?;
    let doc = match (a.trials, model) {
        (Some(trials), _) => {
            let g = empirical_graphon(&model, a.n, trials, a.resolution.unwrap_or(a.n), ctx.seed)?;
            // coarse cells on the diagonal carry within-block edges, which a
            // weighted graph only represents between distinct nodes
            let block = a.n / g.resolution();
            let beta = (0..a.n * a.n)
                .map(|k| {
                    let (i, j) = (k / a.n, k % a.n);
                    if i == j { 0.0 } else { g.value(i / block, j / block) }
                })
                .collect();
            GraphDocument::Weighted(WeightedGraph::uniform(beta, true)?)
        }
        (None, RandomModel::Er(p)) => GraphDocument::try_from(&er_graphon(p, a.n)?)?,
        (None, RandomModel::Ws(p)) => GraphDocument::try_from(&ws_graphon(p, a.n)?)?,
        (None, RandomModel::Ba(p)) => GraphDocument::Dag(ba_sample(p, &mut rng_from_seed(ctx.seed))),
    };
    ctx.write(&a.out, &document(&doc)?)
}

fn cmd_scale(a: &ScaleArgs, ctx: &mut Ctx) -> Result<()> {
    let g = read_weighted(ctx, &a.input)?;
    let n = g.n();
    let (big, plan) = match a.method {
        ScaleMethod::Fractional => fractional_blowup(&g, a.target)?,
        ScaleMethod::Blowup | ScaleMethod::Interpolate => {
            if n == 0 || a.target < n || !a.target.is_multiple_of(n) {
                let hint = match a.method {
                    ScaleMethod::Blowup => "use --method fractional for other node counts",
                    _ => "interpolation needs an integer factor",
                };
                return Err(graphon_core::Error::Infeasible(format!(
                    "target {} is not a multiple of {n}; {hint}",
                    a.target
                ))
                .into());
            }
            let k = a.target / n;
            let big = if a.method == ScaleMethod::Blowup {
                blowup_k(&g, k)?
            } else {
                interpolate_1d(&g, k)?
            };
            (big, ScalePlan::new(&g, a.target)?)
        }
    };
    ctx.write(&a.out, &document(&GraphDocument::Weighted(big))?)?;
    let plan_path = a.plan.clone().unwrap_or_else(|| a.out.with_extension("plan.json"));
    ctx.write(&plan_path, &json(&plan)?)
}

#[derive(Serialize)]
struct DirectedDocument {
    version: u32,
    kind: &'static str,
    n: usize,
    adj: Vec<Vec<u8>>,
}

#[derive(Serialize)]
struct SampleRow {
    trial: usize,
    edges: usize,
    distance: f64,
    threshold: f64,
}

fn cmd_sample(a: &SampleArgs, ctx: &mut Ctx) -> Result<()> {
    if a.trials == 0 {
        return Err(graphon_core::Error::Param("--trials must be positive".into()).into());
    }
    let seeds: Vec<u64> = (0..a.trials).map(|t| split_seed(ctx.seed, t as u64)).collect();
    let mut docs = Vec::new();
    match read_doc(ctx, &a.input)? {
        GraphDocument::Digraphon(d) => {
            if a.target.is_some() || a.csv.is_some() {
                bail!(graphon_core::Error::Param("digraphon sampling supports neither --N nor --csv".into()));
            }
            for &s in &seeds {
                let x = sample_digraphon(&d, s);
                let adj = (0..x.n).map(|i| x.adj[i * x.n..(i + 1) * x.n].iter().map(|&e| e as u8).collect()).collect();
                docs.push(serde_json::to_value(DirectedDocument {
                    version: graphon_core::io::FORMAT_VERSION,
                    kind: "directed",
                    n: x.n,
                    adj,
                })?);
            }
        }
        doc => {
            let g = doc.into_weighted()?;
            let g = match a.target {
                Some(t) => fractional_blowup(&g, t)?.0,
                None => g,
            };
            let samples: Vec<Sample> = seeds.iter().map(|&s| sample_simple(&g, s)).collect();
            for s in &samples {
                let doc = match s {
                    Sample::Dag(d) => GraphDocument::Dag(d.clone()),
                    Sample::Simple(_) => GraphDocument::Weighted(s.to_weighted(g.alpha().to_vec())?),
                };
                docs.push(serde_json::from_str(&doc.to_json()?)?);
            }
            if let Some(csv_path) = &a.csv {
                let report = concentration_experiment(&g, a.trials, ctx.seed, &CutConfig::default())?;
                let rows = samples.iter().zip(&report.distances).enumerate().map(|(trial, (s, &distance))| SampleRow {
                    trial,
                    edges: s.edge_count(),
                    distance,
                    threshold: report.threshold,
                });
                let bytes = csv_bytes(rows)?;
                ctx.write(&a.out, &sample_json(docs)?)?;
                return ctx.write(csv_path, &bytes);
            }
        }
    }
    ctx.write(&a.out, &sample_json(docs)?)
}

fn sample_json(mut docs: Vec<serde_json::Value>) -> Result<Vec<u8>> {
    if docs.len() == 1 {
        json(&docs.pop())
    } else {
        json(&docs)
    }
}

fn cut_config(a: &DistanceArgs, seed: u64) -> CutConfig {
    CutConfig {
        dbox_limit: a.dbox_limit,
        dhat_limit: a.dhat_limit,
        restarts: a.restarts,
        seed,
        ..CutConfig::default()
    }
}

fn cmd_distance(a: &DistanceArgs, ctx: &mut Ctx) -> Result<CutResult> {
    let g = read_weighted(ctx, &a.first)?;
    let h = read_weighted(ctx, &a.second)?;
    let cfg = cut_config(a, ctx.seed);
    let r = match a.mode {
        DistanceMode::Dbox => d_box(&g, &h, &cfg)?,
        DistanceMode::DboxExact => d_box_exact(&g, &h, &cfg)?,
        DistanceMode::DboxHeuristic => d_box_heuristic(&g, &h, a.restarts, ctx.seed)?,
        DistanceMode::DhatExact => delta_hat(&g, &h, DeltaMode::Exact, &cfg)?,
        DistanceMode::DhatHeuristic => delta_hat(&g, &h, DeltaMode::Heuristic, &cfg)?,
        DistanceMode::OverlayOptimize => delta_ub_optimize(&g, &h, a.iters, ctx.seed, &cfg)?,
    };
    if let Some(out) = &a.out {
        ctx.write(out, &json(&r)?)?;
    }
    Ok(r)
}

#[derive(Serialize)]
struct HistoryRow {
    epoch: usize,
    loss: f64,
    val_accuracy: f64,
    tau: f64,
}

fn cmd_search(a: &SearchArgs, ctx: &mut Ctx) -> Result<PathBuf> {
    let mut file: SearchFile = match &a.task {
        Some(p) => {
            let text = ctx.read(p)?;
            serde_json::from_str(&text)
                .map_err(|e| graphon_core::Error::Format(format!("{}: {e}", p.display())))?
        }
        None => SearchFile::default(),
    };
    if let Some(e) = a.epochs {
        file.config.epochs = e;
    }
    let setup = SearchSetup::new(&file.task, split_seed(ctx.seed, 0))?;
    let out = train_search(&setup, &file.config, split_seed(ctx.seed, 1))?;
    let recovered = (0..setup.task.nodes)
        .filter(|&v| out.final_dag.inputs(v) == setup.task.planted.inputs(v))
        .count();
    eprintln!(
        "search: {} epochs, final val accuracy {:.3}, {recovered}/{} nodes match the planted inputs",
        out.history.len(),
        out.history.last().map_or(0.0, |h| h.val_accuracy),
        setup.task.nodes
    );
    let trace_path = a.out_dir.join("trace.json");
    ctx.write(&trace_path, &json(&out.trace)?)?;
    ctx.write(&a.out_dir.join("graphon.json"), &document(&GraphDocument::try_from(&out.trace.average)?)?)?;
    ctx.write(&a.out_dir.join("final_dag.json"), &document(&GraphDocument::Dag(out.final_dag.clone()))?)?;
    let rows = out.history.iter().map(|h| HistoryRow {
        epoch: h.epoch,
        loss: h.loss,
        val_accuracy: h.val_accuracy,
        tau: h.tau,
    });
    ctx.write(&a.out_dir.join("history.csv"), &csv_bytes(rows)?)?;
    Ok(trace_path)
}

#[derive(Serialize)]
struct ConcentrationRow {
    n: usize,
    trial: usize,
    distance: f64,
    threshold: f64,
}

fn cmd_concentration(a: &ConcentrationArgs, ctx: &mut Ctx) -> Result<()> {
    let cfg = CutConfig {
        restarts: a.restarts,
        ..CutConfig::default()
    };
    let graphs: Vec<WeightedGraph> = match (&a.input, a.model) {
        (Some(p), _) => vec![read_weighted(ctx, p)?],
        (None, Some(name)) => a
            .sizes
            .iter()
            .map(|&n| match a.params.model(name, n)? {
                RandomModel::Er(p) => Ok(er_graphon(p, n)?.to_weighted()?),
                RandomModel::Ws(p) => Ok(ws_graphon(p, n)?.to_weighted()?),
                RandomModel::Ba(_) => Err(graphon_core::Error::Param(
                    "ba has no closed-form graphon; generate one with `gen ba --trials` and pass --input".into(),
                )
                .into()),
            })
            .collect::<Result<_>>()?,
        (None, None) => bail!(graphon_core::Error::Param("give --input or --model".into())),
    };
    let reports: Vec<SampleReport> = graphs
        .iter()
        .enumerate()
        .map(|(i, g)| concentration_experiment(g, a.trials, split_seed(ctx.seed, i as u64), &cfg))
        .collect::<graphon_core::Result<_>>()?;
    for r in &reports {
        let mean = r.distances.iter().sum::<f64>() / r.trials.max(1) as f64;
        eprintln!(
            "n={}: mean distance {mean:.4}, threshold {:.4}, {} violations{}",
            r.n,
            r.threshold,
            r.violations,
            if r.exact { "" } else { " (local-search lower bounds)" }
        );
    }
    ctx.write(&a.out, &json(&reports)?)?;
    if let Some(csv_path) = &a.csv {
        let rows = reports.iter().flat_map(|r| {
            r.distances.iter().enumerate().map(|(trial, &distance)| ConcentrationRow {
                n: r.n,
                trial,
                distance,
                threshold: r.threshold,
            })
        });
        ctx.write(csv_path, &csv_bytes(rows)?)?;
    }
    Ok(())
}

/// Runs `command` and writes its manifest; returns the manifest when one was
/// written.
fn execute(command: &Command, seed: u64) -> Result<Option<RunManifest>> {
    let mut ctx = Ctx::new(seed);
    let primary = match command {
        Command::Gen(a) => {
            cmd_gen(a, &mut ctx)?;
            a.out.clone()
        }
        Command::Scale(a) => {
            cmd_scale(a, &mut ctx)?;
            a.out.clone()
        }
        Command::Sample(a) => {
            cmd_sample(a, &mut ctx)?;
            a.out.clone()
        }
        Command::Distance(a) => {
            let r = cmd_distance(a, &mut ctx)?;
            match &a.out {
                Some(out) => out.clone(),
                None => {
                    println!("{}", serde_json::to_string_pretty(&r)?);
                    return Ok(None);
                }
            }
        }
        Command::Search(a) => cmd_search(a, &mut ctx)?,
        Command::Concentration(a) => {
            cmd_concentration(a, &mut ctx)?;
            a.out.clone()
        }
        Command::Replay(a) => {
            replay(&a.manifest)?;
            return Ok(None);
        }
    };
    Ok(Some(ctx.finish(command, &primary)?))
}

fn replay(path: &Path) -> Result<()> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let recorded: RunManifest =
        serde_json::from_str(&text).map_err(|e| graphon_core::Error::Format(format!("{}: {e}", path.display())))?;
    if matches!(recorded.params, Command::Replay(_)) {
        bail!(graphon_core::Error::Param("a replay manifest cannot be replayed".into()));
    }
    if recorded.version != env!("CARGO_PKG_VERSION") {
        eprintln!("warning: manifest written by version {}", recorded.version);
    }
    let fresh = execute(&recorded.params, recorded.seed)?.context("replayed command wrote no manifest")?;
    let mismatched: Vec<String> = recorded
        .outputs
        .iter()
        .zip(&fresh.outputs)
        .filter(|(a, b)| a != b)
        .map(|(a, _)| a.path.display().to_string())
        .collect();
    if !mismatched.is_empty() || recorded.outputs.len() != fresh.outputs.len() || recorded.inputs != fresh.inputs {
        bail!("replay differs from the manifest: {}", mismatched.join(", "));
    }
    eprintln!("replay: {} outputs reproduced", fresh.outputs.len());
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use graphon_core::Error as E;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::Infeasible(_) | E::TooLarge { .. } => 3,
                E::Diverged { .. } => 4,
                _ => 2,
            };
        }
        if cause.is::<serde_json::Error>() {
            return 2;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match execute(&cli.command, cli.seed) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
