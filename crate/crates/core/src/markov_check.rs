//! Exhaustive check, on graphs of at most four nodes, that each node's
//! infection time is independent of the rest given its neighbors in the
//! moral graph.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;
use serde_json::{json, Value};

use crate::cascade::{InfectionTime, ModelTag};
use crate::error::{Error, Result};
use crate::graph::{NodeId, UndirectedGraph, WeightedDigraph};

pub const MAX_NODES: usize = 4;
pub const MAX_EDGES: usize = 8;
const TOLERANCE: f64 = 1e-10;

/// Exact law of the infection-time vector; zero-probability outcomes are omitted.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactJoint {
    pub n: usize,
    pub support: Vec<(Vec<InfectionTime>, f64)>,
    pub model: ModelTag,
}

impl ExactJoint {
    pub fn prob(&self, t: &[InfectionTime]) -> f64 {
        self.support
            .binary_search_by(|(s, _)| s.as_slice().cmp(t))
            .map(|k| self.support[k].1)
            .unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.support.iter().map(|(_, p)| p).sum()
    }
}

/// Enumerates every seed set and every live/blocked pattern of the edges.
/// Infection times are BFS distances from the seeds over live edges.
pub fn enumerate_joint(g: &WeightedDigraph, p_init: f64) -> Result<ExactJoint> {
    let n = g.n();
    let edges: Vec<(NodeId, NodeId, f64)> = g.edges().collect();
    if n > MAX_NODES || edges.len() > MAX_EDGES {
        return Err(Error::TooLarge(format!(
            "exact enumeration needs n <= {MAX_NODES} and at most {MAX_EDGES} edges, got n = {n}, {} edges",
            edges.len()
        )));
    }
    if !(0.0..=1.0).contains(&p_init) {
        return Err(Error::InvalidParameter(format!("p_init {p_init} outside [0, 1]")));
    }
    let mut law: BTreeMap<Vec<InfectionTime>, f64> = BTreeMap::new();
    for seeds in 0u32..(1 << n) {
        let s = seeds.count_ones() as i32;
        let p_seeds = p_init.powi(s) * (1.0 - p_init).powi(n as i32 - s);
        if p_seeds == 0.0 {
            continue;
        }
        for live in 0u32..(1 << edges.len()) {
            let mut p = p_seeds;
            let mut adj = vec![Vec::new(); n];
            for (k, &(j, i, q)) in edges.iter().enumerate() {
                if live >> k & 1 == 1 {
                    p *= q;
                    adj[j].push(i);
                } else {
                    p *= 1.0 - q;
                }
            }
            if p == 0.0 {
                continue;
            }
            *law.entry(bfs_times(n, seeds, &adj)).or_insert(0.0) += p;
        }
    }
    Ok(ExactJoint {
        n,
        support: law.into_iter().filter(|&(_, p)| p > 0.0).collect(),
        model: ModelTag::OneStep,
    })
}

fn bfs_times(n: usize, seeds: u32, adj: &[Vec<NodeId>]) -> Vec<InfectionTime> {
    let mut times = vec![InfectionTime::Never; n];
    let mut queue = VecDeque::new();
    for v in (0..n).filter(|&v| seeds >> v & 1 == 1) {
        times[v] = InfectionTime::At(0);
        queue.push_back((v, 0));
    }
    while let Some((v, t)) = queue.pop_front() {
        for &w in &adj[v] {
            if times[w] == InfectionTime::Never {
                times[w] = InfectionTime::At(t + 1);
                queue.push_back((w, t + 1));
            }
        }
    }
    times
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub node: NodeId,
    /// The two conditioning assignments of all other nodes (`null` marks the tested node).
    pub rest_a: Vec<Option<String>>,
    pub rest_b: Vec<Option<String>>,
    pub max_diff: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MarkovReport {
    pub violations: Vec<Violation>,
    pub pairs_checked: usize,
}

impl MarkovReport {
    pub fn to_json(&self) -> Value {
        json!({ "violations": self.violations, "pairs_checked": self.pairs_checked })
    }
}

type Conditional = BTreeMap<InfectionTime, f64>;

fn describe(rest: &[InfectionTime], skip: NodeId) -> Vec<Option<String>> {
    rest.iter()
        .enumerate()
        .map(|(k, t)| (k != skip).then(|| t.to_string()))
        .collect()
}

/// For every node `i`, compares `P[T_i | T_rest]` across all pairs of
/// supported assignments that agree on the moral neighbors of `i`.
pub fn check_markov_blanket(joint: &ExactJoint, moral: &UndirectedGraph) -> Result<MarkovReport> {
    if moral.n() != joint.n {
        return Err(Error::InvalidParameter("joint and moral graph sizes differ".into()));
    }
    let mut report = MarkovReport::default();
    for i in 0..joint.n {
        let neighbors = moral.neighbors(i);
        // Unnormalized conditionals keyed by the full assignment with T_i masked.
        let mut rests: BTreeMap<Vec<InfectionTime>, Conditional> = BTreeMap::new();
        for (t, p) in &joint.support {
            let mut key = t.clone();
            key[i] = InfectionTime::Never;
            *rests.entry(key).or_default().entry(t[i]).or_insert(0.0) += p;
        }
        let mut groups: BTreeMap<Vec<InfectionTime>, Vec<(Vec<InfectionTime>, Conditional)>> = BTreeMap::new();
        for (rest, mut cond) in rests {
            let total: f64 = cond.values().sum();
            cond.values_mut().for_each(|v| *v /= total);
            let blanket = neighbors.iter().map(|&k| rest[k]).collect();
            groups.entry(blanket).or_default().push((rest, cond));
        }
        for members in groups.values() {
            for (a, (rest_a, ca)) in members.iter().enumerate() {
                for (rest_b, cb) in &members[a + 1..] {
                    report.pairs_checked += 1;
                    let max_diff = ca
                        .keys()
                        .chain(cb.keys())
                        .map(|v| (ca.get(v).unwrap_or(&0.0) - cb.get(v).unwrap_or(&0.0)).abs())
                        .fold(0.0, f64::max);
                    if max_diff > TOLERANCE {
                        report.violations.push(Violation {
                            node: i,
                            rest_a: describe(rest_a, i),
                            rest_b: describe(rest_b, i),
                            max_diff,
                        });
                    }
                }
            }
        }
    }
    Ok(report)
}
