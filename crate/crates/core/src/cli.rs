//! Command-line front end. Every option may also come from a JSON config
//! file (`--config`), keyed by the option name with `_` for `-`; flags win.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::bounds::{bound_without_supergraph, bound_with_supergraph, entropy_bound, h_bar};
use crate::cascade::{simulate, CascadeSet};
use crate::error::Error;
use crate::graph::{
    correlation_decay_alpha, embed_supergraph, generate, moralize, EdgeProbLaw, GraphKind, SuperGraph,
    WeightedDigraph,
};
use crate::greedy_estimator::greedy_all;
use crate::markov_check::{check_markov_blanket, enumerate_joint};
use crate::metrics::{recovery_experiment, Method};
use crate::ml_estimator::{exact_recovery_eta, solve_all, solve_node_generalized, Init, MlConfig};

#[derive(Debug, Parser)]
#[command(name = "epigraph", version, about = "Learn epidemic networks from infection times")]
pub struct Cli {
    /// Worker threads for simulation trials and per-node solves.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// JSON file of option defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one-step cascades; writes JSONL.
    Simulate(SimulateArgs),
    /// Per-node maximum-likelihood parent estimates; writes JSONL.
    EstimateMl(MlArgs),
    /// Per-node greedy parent estimates; writes JSONL.
    EstimateGreedy(GreedyArgs),
    /// Sample-complexity lower bounds; writes JSON.
    Bound(BoundArgs),
    /// Moral graph of a directed graph; writes JSON.
    Moralize(MoralizeArgs),
    /// Exact Markov-blanket check on a graph with at most 4 nodes; writes JSON.
    VerifyMarkov(MarkovArgs),
    /// Recovery success versus m.
    #[command(long_about = "Recovery success versus m. Writes CSV with the fixed header\n\
        method,m,p_init,trials,exact_success_rate,per_node_rate,mean_edit,mean_infections\n\
        and one row per (m, method). Numbers use '.' as decimal separator.")]
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct GraphSource {
    /// Graph JSON file: {"n": N, "edges": [[j, i, p], ...]}.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Generate instead: grid2d:W,H | regular:N,D | tree:N,C | er:N,P.
    #[arg(long)]
    pub generator: Option<String>,
    /// Edge probability law for --generator: P or uniform:LO,HI.
    #[arg(long)]
    pub edge_prob: Option<String>,
    /// Seed for --generator (default 0).
    #[arg(long)]
    pub graph_seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub source: GraphSource,
    #[arg(long)]
    pub p_init: Option<f64>,
    /// Number of cascades.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the simulated graph as JSON.
    #[arg(long)]
    pub save_graph: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct DataArgs {
    /// Cascades JSONL file.
    #[arg(long)]
    pub cascades: Option<PathBuf>,
    /// Candidate parents JSON: {"candidates": {"0": [...], ...}}; default all other nodes.
    #[arg(long)]
    pub supergraph: Option<PathBuf>,
    /// Graph JSON, used only for the node count.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Node count when neither --supergraph nor --graph is given.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct SolverArgs {
    /// Selection threshold on estimated theta.
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub theta_cap: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Initial value of every theta (default 1e-3).
    #[arg(long)]
    pub init: Option<f64>,
}

impl SolverArgs {
    fn config(&self, eta: Option<f64>) -> MlConfig {
        let d = MlConfig::default();
        MlConfig {
            eta: eta.or(self.eta).unwrap_or(d.eta),
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            tol: self.tol.unwrap_or(d.tol),
            theta_cap: self.theta_cap.unwrap_or(d.theta_cap),
            init: self.init.map(Init::Constant).unwrap_or(d.init),
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct MlArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
    /// Fit the delayed model with delays 1..=HORIZON.
    #[arg(long)]
    pub horizon: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct GreedyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct BoundArgs {
    /// entropy | no-supergraph | supergraph
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub p_init: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Maximum in-degree.
    #[arg(long)]
    pub d: Option<usize>,
    /// Candidate-set size (supergraph bound).
    #[arg(long)]
    pub big_d: Option<usize>,
    /// Allowed edit distance (no-supergraph bound, default 0).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Per-node error allowances: one value for all nodes, or n comma-separated values (default 0).
    #[arg(long)]
    pub s: Option<String>,
    /// Tolerated error probability.
    #[arg(long)]
    pub pe: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct MoralizeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub source: GraphSource,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct MarkovArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub source: GraphSource,
    #[arg(long)]
    pub p_init: Option<f64>,
    /// Remove the moral edge A,B before checking (negative control).
    #[arg(long)]
    pub drop_edge: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct ExperimentArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub source: GraphSource,
    /// Candidate parents JSON; default all other nodes.
    #[arg(long)]
    pub supergraph: Option<PathBuf>,
    /// Build candidates as true parents plus this many random non-parents.
    #[arg(long)]
    pub extra_candidates: Option<usize>,
    #[arg(long)]
    pub p_init: Option<f64>,
    /// Comma-separated cascade counts.
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<usize>>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// ml | greedy | both
    #[arg(long)]
    pub method: Option<String>,
    /// Threshold, or `auto` for ½ ln(1 + α p_min / 8) of the true graph (default auto).
    #[arg(long)]
    pub eta: Option<String>,
    #[arg(long)]
    pub theta_cap: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Why a command failed, mapped to the process exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Lib(Error),
    NonConverged(Vec<usize>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Lib(Error::Format(e.to_string()))
    }
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Lib(Error::DataInconsistency(_)) => 3,
            Failure::NonConverged(_) => 4,
            _ => 2,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Failure::Usage(msg) => json!({ "error": "usage", "message": msg }),
            Failure::Lib(e) => json!({ "error": e.kind(), "message": e.to_string() }),
            Failure::NonConverged(nodes) => json!({
                "error": "non_convergence",
                "message": "solver hit max_iters; last iterates were written",
                "nodes": nodes,
            }),
        }
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code. Errors go to stderr as one JSON line.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = e.print();
                return 0;
            }
            return report(&Failure::Usage(e.to_string().trim_end().to_string()));
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(f) => report(&f),
    }
}

fn report(f: &Failure) -> i32 {
    eprintln!("{}", f.to_json());
    f.exit_code()
}

fn execute(cli: Cli) -> CmdResult {
    let config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
            match serde_json::from_str::<Value>(&text).map_err(Error::from)? {
                Value::Object(map) => map,
                _ => return Err(Failure::Usage("config file must hold a JSON object".into())),
            }
        }
        None => Map::new(),
    };
    let workers = match cli.workers {
        Some(w) => Some(w),
        None => config
            .get("workers")
            .map(|v| v.as_u64().map(|w| w as usize).ok_or_else(|| Failure::Usage("workers must be an integer".into())))
            .transpose()?,
    };
    let run = move || -> CmdResult {
        match cli.command {
            Command::Simulate(a) => cmd_simulate(merge(a, &config)?),
            Command::EstimateMl(a) => cmd_estimate_ml(merge(a, &config)?),
            Command::EstimateGreedy(a) => cmd_estimate_greedy(merge(a, &config)?),
            Command::Bound(a) => cmd_bound(merge(a, &config)?),
            Command::Moralize(a) => cmd_moralize(merge(a, &config)?),
            Command::VerifyMarkov(a) => cmd_verify_markov(merge(a, &config)?),
            Command::Experiment(a) => cmd_experiment(merge(a, &config)?),
        }
    };
    match workers {
        Some(0) => Err(Failure::Usage("--workers must be >= 1".into())),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Failure::Usage(e.to_string()))?
            .install(run),
        None => run(),
    }
}

/// Fills options left unset on the command line from the config map.
fn merge<T: Serialize + DeserializeOwned>(args: T, config: &Map<String, Value>) -> Result<T, Failure> {
    let mut value = serde_json::to_value(&args).map_err(Error::from)?;
    if let Value::Object(fields) = &mut value {
        for (key, slot) in fields.iter_mut() {
            if slot.is_null() {
                if let Some(v) = config.get(key).or_else(|| config.get(&key.replace('_', "-"))) {
                    *slot = v.clone();
                }
            }
        }
    }
    serde_json::from_value(value).map_err(|e| Failure::Usage(format!("config: {e}")))
}

fn need<T: Clone>(v: &Option<T>, flag: &str) -> Result<T, Failure> {
    v.clone().ok_or_else(|| Failure::Usage(format!("missing --{flag}")))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_graph(src: &GraphSource) -> Result<WeightedDigraph, Failure> {
    match (&src.graph, &src.generator) {
        (Some(_), Some(_)) => Err(Failure::Usage("give either --graph or --generator, not both".into())),
        (Some(path), None) => Ok(WeightedDigraph::from_json(&read_text(path)?)?),
        (None, Some(text)) => {
            let kind: GraphKind = text.parse()?;
            let law: EdgeProbLaw = need(&src.edge_prob, "edge-prob")?.parse()?;
            Ok(generate(kind, law, src.graph_seed.unwrap_or(0))?)
        }
        (None, None) => Err(Failure::Usage("missing --graph or --generator".into())),
    }
}

fn load_data(a: &DataArgs) -> Result<(SuperGraph, CascadeSet), Failure> {
    let sg = match (&a.supergraph, &a.graph, a.n) {
        (Some(p), _, _) => SuperGraph::from_json(&read_text(p)?)?,
        (None, Some(p), _) => SuperGraph::full(WeightedDigraph::from_json(&read_text(p)?)?.n()),
        (None, None, Some(n)) => SuperGraph::full(n),
        (None, None, None) => return Err(Failure::Usage("need --supergraph, --graph or --n for the node count".into())),
    };
    let path = need(&a.cascades, "cascades")?;
    let file = File::open(&path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let cs = CascadeSet::read_jsonl(BufReader::new(file), sg.n())?;
    Ok((sg, cs))
}

fn write_line(out: &mut dyn Write, v: &Value) -> io::Result<()> {
    serde_json::to_writer(&mut *out, v)?;
    out.write_all(b"\n")
}

pub fn cmd_simulate(a: SimulateArgs) -> CmdResult {
    let g = load_graph(&a.source)?;
    let cs = simulate(&g, need(&a.p_init, "p-init")?, need(&a.m, "m")?, need(&a.seed, "seed")?)?;
    if let Some(path) = &a.save_graph {
        std::fs::write(path, g.to_json()? + "\n")?;
    }
    let mut out = output(&a.out)?;
    cs.write_jsonl(&mut out)?;
    out.flush()?;
    Ok(())
}

/// Writes the successful per-node lines, then reports the first failure class.
fn finish_estimates(out: &mut dyn Write, results: Vec<Result<(Value, bool), Error>>) -> CmdResult {
    let mut errors = Vec::new();
    let mut unconverged = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok((line, converged)) => {
                write_line(out, &line)?;
                if !converged {
                    unconverged.push(i);
                }
            }
            Err(e) => errors.push((i, e)),
        }
    }
    out.flush()?;
    if let Some(pos) = errors.iter().position(|(_, e)| matches!(e, Error::DataInconsistency(_))) {
        let (_, e) = errors.swap_remove(pos);
        return Err(e.into());
    }
    if let Some((_, e)) = errors.into_iter().next() {
        return Err(e.into());
    }
    if !unconverged.is_empty() {
        return Err(Failure::NonConverged(unconverged));
    }
    Ok(())
}

pub fn cmd_estimate_ml(a: MlArgs) -> CmdResult {
    let (sg, cs) = load_data(&a.data)?;
    let cfg = a.solver.config(None);
    let results: Vec<_> = match a.horizon {
        None => solve_all(&sg, &cs, &cfg),
        Some(h) => {
            use rayon::prelude::*;
            (0..sg.n())
                .into_par_iter()
                .map(|i| solve_node_generalized(i, sg.candidates(i), h, &cs, &cfg))
                .collect()
        }
    };
    let mut out = output(&a.data.out)?;
    finish_estimates(
        &mut out,
        results.into_iter().map(|r| r.map(|e| (e.to_json(), e.converged))).collect(),
    )
}

pub fn cmd_estimate_greedy(a: GreedyArgs) -> CmdResult {
    let (sg, cs) = load_data(&a.data)?;
    let mut out = output(&a.data.out)?;
    finish_estimates(
        &mut out,
        greedy_all(&sg, &cs).into_iter().map(|r| r.map(|e| (e.to_json(), true))).collect(),
    )
}

fn parse_allowances(text: &Option<String>, n: usize) -> Result<Vec<f64>, Failure> {
    let Some(text) = text else { return Ok(vec![0.0; n]) };
    let values = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| Failure::Usage(format!("--s: cannot parse `{s}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    match values.len() {
        1 => Ok(vec![values[0]; n]),
        len if len == n => Ok(values),
        len => Err(Failure::Usage(format!("--s: expected 1 or {n} values, got {len}"))),
    }
}

pub fn cmd_bound(a: BoundArgs) -> CmdResult {
    let alpha = need(&a.alpha, "alpha")?;
    let p_init = need(&a.p_init, "p-init")?;
    let kind = need(&a.kind, "kind")?;
    let value = match kind.as_str() {
        "entropy" => json!({
            "alpha": alpha,
            "p_init": p_init,
            "h_bar": h_bar(alpha, p_init)?,
            "per_node_entropy_bound": entropy_bound(alpha, p_init)?,
        }),
        "no-supergraph" => serde_json::to_value(bound_without_supergraph(
            need(&a.n, "n")?,
            need(&a.d, "d")?,
            a.gamma.unwrap_or(0.0),
            alpha,
            p_init,
            need(&a.pe, "pe")?,
        )?)
        .map_err(Error::from)?,
        "supergraph" => {
            let n = need(&a.n, "n")?;
            let s = parse_allowances(&a.s, n)?;
            serde_json::to_value(bound_with_supergraph(
                n,
                need(&a.big_d, "big-d")?,
                need(&a.d, "d")?,
                &s,
                alpha,
                p_init,
                need(&a.pe, "pe")?,
            )?)
            .map_err(Error::from)?
        }
        other => {
            return Err(Failure::Usage(format!(
                "--kind must be entropy, no-supergraph or supergraph, got `{other}`"
            )))
        }
    };
    let mut out = output(&a.out)?;
    write_line(&mut out, &value)?;
    out.flush()?;
    Ok(())
}

pub fn cmd_moralize(a: MoralizeArgs) -> CmdResult {
    let g = load_graph(&a.source)?;
    let mut out = output(&a.out)?;
    writeln!(out, "{}", moralize(&g).to_json()?)?;
    out.flush()?;
    Ok(())
}

pub fn cmd_verify_markov(a: MarkovArgs) -> CmdResult {
    let g = load_graph(&a.source)?;
    let joint = enumerate_joint(&g, need(&a.p_init, "p-init")?)?;
    let mut moral = moralize(&g);
    if let Some(text) = &a.drop_edge {
        let ends: Vec<usize> = text
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| Failure::Usage(format!("--drop-edge: cannot parse `{s}`"))))
            .collect::<Result<_, _>>()?;
        if ends.len() != 2 || !moral.remove(ends[0], ends[1]) {
            return Err(Failure::Usage(format!("--drop-edge `{text}` is not an edge of the moral graph")));
        }
    }
    let report = check_markov_blanket(&joint, &moral)?;
    let mut out = output(&a.out)?;
    write_line(&mut out, &report.to_json())?;
    out.flush()?;
    Ok(())
}

pub fn cmd_experiment(a: ExperimentArgs) -> CmdResult {
    let g = load_graph(&a.source)?;
    let seed = need(&a.seed, "seed")?;
    let sg = match (&a.supergraph, a.extra_candidates) {
        (Some(_), Some(_)) => return Err(Failure::Usage("give either --supergraph or --extra-candidates".into())),
        (Some(p), None) => SuperGraph::from_json(&read_text(p)?)?,
        (None, Some(extra)) => embed_supergraph(&g, extra, seed)?,
        (None, None) => SuperGraph::full(g.n()),
    };
    let p_init = need(&a.p_init, "p-init")?;
    let ms = need(&a.m, "m")?;
    let trials = need(&a.trials, "trials")?;
    let eta = match a.eta.as_deref().unwrap_or("auto") {
        "auto" => exact_recovery_eta(correlation_decay_alpha(&g), g.min_prob().unwrap_or(0.0)).ok_or_else(|| {
            Failure::Usage("eta=auto needs a graph with correlation decay (alpha > 0) and at least one edge".into())
        })?,
        s => s.parse().map_err(|_| Failure::Usage(format!("--eta: cannot parse `{s}`")))?,
    };
    let solver = SolverArgs {
        eta: Some(eta),
        theta_cap: a.theta_cap,
        tol: a.tol,
        max_iters: a.max_iters,
        init: None,
    };
    let methods = match a.method.as_deref().unwrap_or("both") {
        "ml" => vec![Method::Ml(solver.config(None))],
        "greedy" => vec![Method::Greedy],
        "both" => vec![Method::Ml(solver.config(None)), Method::Greedy],
        other => return Err(Failure::Usage(format!("--method must be ml, greedy or both, got `{other}`"))),
    };
    let mut writer = csv::Writer::from_writer(output(&a.out)?);
    let mut unconverged = 0;
    for &m in &ms {
        for method in &methods {
            let stats = recovery_experiment(&g, &sg, p_init, m, trials, *method, seed)?;
            unconverged += stats.unconverged_solves;
            writer.serialize(stats.csv_row(method.name(), m, p_init))?;
        }
    }
    writer.flush()?;
    if unconverged > 0 {
        return Err(Failure::NonConverged(Vec::new()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_fills_unset_flags_only() {
        let args = SimulateArgs {
            m: Some(5),
            ..Default::default()
        };
        let config: Map<String, Value> = serde_json::from_str(r#"{"m": 99, "p_init": 0.2, "seed": 4, "generator": "grid2d:2,2"}"#).unwrap();
        let merged = merge(args, &config).unwrap();
        assert_eq!(merged.m, Some(5));
        assert_eq!(merged.p_init, Some(0.2));
        assert_eq!(merged.seed, Some(4));
        assert_eq!(merged.source.generator.as_deref(), Some("grid2d:2,2"));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Failure::Lib(Error::DataInconsistency("x".into())).exit_code(), 3);
        assert_eq!(Failure::NonConverged(vec![1]).exit_code(), 4);
        assert_eq!(Failure::Lib(Error::Format("x".into())).exit_code(), 2);
        assert_eq!(Failure::Usage("x".into()).exit_code(), 2);
    }

    #[test]
    fn allowances() {
        assert_eq!(parse_allowances(&None, 3).unwrap(), vec![0.0; 3]);
        assert_eq!(parse_allowances(&Some("2".into()), 2).unwrap(), vec![2.0, 2.0]);
        assert_eq!(parse_allowances(&Some("1,2,0".into()), 3).unwrap(), vec![1.0, 2.0, 0.0]);
        assert!(parse_allowances(&Some("1,2".into()), 3).is_err());
    }

    #[test]
    fn missing_arguments_exit_two() {
        assert_eq!(run(["epigraph", "simulate", "--m", "3"]), 2);
        assert_eq!(run(["epigraph", "bound", "--kind", "nope", "--alpha", "0.5", "--p-init", "0.1"]), 2);
        assert_eq!(run(["epigraph", "frobnicate"]), 2);
    }
}
