//! Greedy parent selection: repeatedly pick the candidate that was active
//! exactly one step before the target in the most still-unexplained
//! cascades, then drop those cascades.

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::cascade::{CascadeSet, InfectionTime};
use crate::error::{Error, Result};
use crate::graph::{NodeId, SuperGraph};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GreedyTrace {
    /// `(node, cascades newly explained)` in pick order.
    pub picks: Vec<(NodeId, usize)>,
    /// Unexplained cascades before each round, then after the last one.
    pub remaining: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyEstimate {
    pub target: NodeId,
    pub selected: Vec<NodeId>,
    pub trace: GreedyTrace,
}

impl GreedyEstimate {
    pub fn to_json(&self) -> Value {
        json!({
            "node": self.target,
            "selected": self.selected,
            "theta": {},
            "converged": true,
            "iters": self.trace.picks.len(),
            "trace": self.trace.picks.iter().map(|&(k, c)| json!([k, c])).collect::<Vec<_>>(),
        })
    }
}

/// Runs the greedy cover for node `i`. Only cascades with `1 <= t_i < ∞`
/// need explaining. `selected` is sorted; pick order lives in the trace.
pub fn greedy_node(i: NodeId, candidates: &[NodeId], cs: &CascadeSet) -> Result<GreedyEstimate> {
    if i >= cs.n() || candidates.iter().any(|&j| j >= cs.n() || j == i) {
        return Err(Error::InvalidParameter(format!("invalid candidates for node {i}")));
    }
    // For every open cascade, indices of the candidates infected exactly one step earlier.
    let mut open: Vec<(usize, Vec<usize>)> = Vec::new();
    for (u, c) in cs.cascades().iter().enumerate() {
        if let InfectionTime::At(ti) = c.time(i) {
            if ti >= 1 {
                let prev = InfectionTime::At(ti - 1);
                let infectors = (0..candidates.len()).filter(|&k| c.time(candidates[k]) == prev).collect();
                open.push((u, infectors));
            }
        }
    }

    let mut trace = GreedyTrace::default();
    let mut selected = Vec::new();
    let mut counts = vec![0usize; candidates.len()];
    while !open.is_empty() {
        trace.remaining.push(open.len());
        counts.iter_mut().for_each(|c| *c = 0);
        for (_, infectors) in &open {
            for &k in infectors {
                counts[k] += 1;
            }
        }
        let (best, &count) = counts
            .iter()
            .enumerate()
            .max_by_key(|&(k, &c)| (c, std::cmp::Reverse(candidates[k])))
            .unwrap_or((0, &0));
        if count == 0 {
            let ids: Vec<String> = open.iter().map(|(u, _)| u.to_string()).collect();
            return Err(Error::DataInconsistency(format!(
                "node {i}: no candidate explains cascades [{}]",
                ids.join(", ")
            )));
        }
        let k = candidates[best];
        open.retain(|(_, infectors)| !infectors.contains(&best));
        trace.picks.push((k, count));
        selected.push(k);
    }
    trace.remaining.push(0);
    selected.sort_unstable();
    Ok(GreedyEstimate {
        target: i,
        selected,
        trace,
    })
}

/// Runs [`greedy_node`] for every node in parallel; entry `i` is node `i`.
pub fn greedy_all(g_super: &SuperGraph, cs: &CascadeSet) -> Vec<Result<GreedyEstimate>> {
    (0..g_super.n())
        .into_par_iter()
        .map(|i| greedy_node(i, g_super.candidates(i), cs))
        .collect()
}
