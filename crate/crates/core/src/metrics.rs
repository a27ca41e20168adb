//! Graph distances and Monte-Carlo recovery experiments.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cascade::{simulate, CascadeSet};
use crate::error::{Error, Result};
use crate::graph::{NodeId, SuperGraph, WeightedDigraph};
use crate::greedy_estimator::greedy_all;
use crate::ml_estimator::{solve_all, MlConfig};

pub type EdgeSet = BTreeSet<(NodeId, NodeId)>;

/// Number of directed edges present in exactly one of the two sets.
pub fn edit_distance(a: &EdgeSet, b: &EdgeSet) -> usize {
    a.symmetric_difference(b).count()
}

/// Edge set induced by per-node parent selections (entry `i` lists the parents of `i`).
pub fn estimate_edges(selected: &[Vec<NodeId>]) -> EdgeSet {
    selected
        .iter()
        .enumerate()
        .flat_map(|(i, parents)| parents.iter().map(move |&j| (j, i)))
        .collect()
}

/// `|V_i △ V̂_i|` for every node.
pub fn per_node_symdiff(truth: &WeightedDigraph, est: &[Vec<NodeId>]) -> Vec<usize> {
    (0..truth.n())
        .map(|i| {
            let actual: BTreeSet<NodeId> = truth.parent_set(i).into_iter().collect();
            let guess: BTreeSet<NodeId> = est.get(i).into_iter().flatten().copied().collect();
            actual.symmetric_difference(&guess).count()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Ml(MlConfig),
    Greedy,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Ml(_) => "ml",
            Method::Greedy => "greedy",
        }
    }

    /// Per-node parent selections for one cascade set, with the number of
    /// non-converged solves.
    pub fn estimate(&self, g_super: &SuperGraph, cs: &CascadeSet) -> Result<(Vec<Vec<NodeId>>, usize)> {
        match self {
            Method::Ml(cfg) => {
                let mut unconverged = 0;
                let mut out = Vec::with_capacity(g_super.n());
                for r in solve_all(g_super, cs, cfg) {
                    let est = r?;
                    unconverged += usize::from(!est.converged);
                    out.push(est.selected);
                }
                Ok((out, unconverged))
            }
            Method::Greedy => {
                let out = greedy_all(g_super, cs)
                    .into_iter()
                    .map(|r| r.map(|e| e.selected))
                    .collect::<Result<Vec<_>>>()?;
                Ok((out, 0))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryStats {
    pub trials: usize,
    pub exact_successes: usize,
    pub per_node_success_fraction: f64,
    pub mean_edit_distance: f64,
    pub mean_infections_per_node: f64,
    /// Failed trials by error kind.
    pub failures: BTreeMap<String, usize>,
    pub unconverged_solves: usize,
}

impl RecoveryStats {
    pub fn exact_success_rate(&self) -> f64 {
        self.exact_successes as f64 / self.trials as f64
    }

    pub fn csv_row(&self, method: &str, m: usize, p_init: f64) -> CsvRow {
        CsvRow {
            method: method.to_string(),
            m,
            p_init,
            trials: self.trials,
            exact_success_rate: self.exact_success_rate(),
            per_node_rate: self.per_node_success_fraction,
            mean_edit: self.mean_edit_distance,
            mean_infections: self.mean_infections_per_node,
        }
    }
}

/// One experiment CSV line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsvRow {
    pub method: String,
    pub m: usize,
    pub p_init: f64,
    pub trials: usize,
    pub exact_success_rate: f64,
    pub per_node_rate: f64,
    pub mean_edit: f64,
    pub mean_infections: f64,
}

struct Trial {
    edit: usize,
    nodes_ok: usize,
    infections: usize,
    unconverged: usize,
    failure: Option<&'static str>,
}

/// Seeds for `trials` independent trials derived from `seed`.
pub fn trial_seeds(seed: u64, trials: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials).map(|_| rng.gen()).collect()
}

/// Runs `trials` independent simulate-then-estimate rounds on `truth` and
/// aggregates exact-recovery statistics. Estimator errors fail the trial
/// and are tallied by kind.
pub fn recovery_experiment(
    truth: &WeightedDigraph,
    g_super: &SuperGraph,
    p_init: f64,
    m: usize,
    trials: usize,
    method: Method,
    seed: u64,
) -> Result<RecoveryStats> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    if g_super.n() != truth.n() {
        return Err(Error::InvalidParameter("supergraph and graph sizes differ".into()));
    }
    if let Method::Ml(cfg) = &method {
        cfg.validate()?;
    }
    let n = truth.n();
    let truth_edges = truth.edge_set();
    let results: Vec<Trial> = trial_seeds(seed, trials)
        .into_par_iter()
        .map(|s| -> Result<Trial> {
            let cs = simulate(truth, p_init, m, s)?;
            let infections = cs.total_infections();
            Ok(match method.estimate(g_super, &cs) {
                Ok((selected, unconverged)) => {
                    let diffs = per_node_symdiff(truth, &selected);
                    Trial {
                        edit: edit_distance(&truth_edges, &estimate_edges(&selected)),
                        nodes_ok: diffs.iter().filter(|&&d| d == 0).count(),
                        infections,
                        unconverged,
                        failure: None,
                    }
                }
                Err(e) => Trial {
                    edit: 0,
                    nodes_ok: 0,
                    infections,
                    unconverged: 0,
                    failure: Some(e.kind()),
                },
            })
        })
        .collect::<Result<_>>()?;

    let mut failures = BTreeMap::new();
    for r in &results {
        if let Some(kind) = r.failure {
            *failures.entry(kind.to_string()).or_insert(0) += 1;
        }
    }
    let ok: Vec<&Trial> = results.iter().filter(|r| r.failure.is_none()).collect();
    let t = trials as f64;
    Ok(RecoveryStats {
        trials,
        exact_successes: ok.iter().filter(|r| r.edit == 0).count(),
        per_node_success_fraction: ok.iter().map(|r| r.nodes_ok as f64 / n.max(1) as f64).sum::<f64>() / t,
        mean_edit_distance: if ok.is_empty() {
            f64::NAN
        } else {
            ok.iter().map(|r| r.edit as f64).sum::<f64>() / ok.len() as f64
        },
        mean_infections_per_node: results.iter().map(|r| r.infections as f64).sum::<f64>() / (t * n.max(1) as f64),
        failures,
        unconverged_solves: results.iter().map(|r| r.unconverged).sum(),
    })
}
