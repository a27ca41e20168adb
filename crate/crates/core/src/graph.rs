//! Directed probabilistic graphs, candidate super-graphs, generators and
//! moralization.
//!
//! Nodes are dense integers `0..n`. An edge `(j, i, p)` means parent `j`
//! infects child `i` with probability `p` on its single attempt. Self-edges
//! are never stored.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NodeId = usize;

/// Directed graph with per-edge infection probabilities in `(0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDigraph {
    n: usize,
    edges: BTreeMap<(NodeId, NodeId), f64>,
    parents: Vec<Vec<(NodeId, f64)>>,
    children: Vec<Vec<(NodeId, f64)>>,
}

impl WeightedDigraph {
    /// Builds a graph from `(parent, child, p)` triples.
    ///
    /// Rejects self-edges, out-of-range endpoints, duplicate edges and
    /// probabilities outside `(0, 1]`.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId, f64)>,
    {
        let mut map = BTreeMap::new();
        for (j, i, p) in edges {
            if j >= n || i >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge ({j}, {i}) out of range for n = {n}"
                )));
            }
            if j == i {
                return Err(Error::InvalidParameter(format!("self-edge at node {i}")));
            }
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "edge ({j}, {i}) has probability {p} outside (0, 1]"
                )));
            }
            if map.insert((j, i), p).is_some() {
                return Err(Error::InvalidParameter(format!("duplicate edge ({j}, {i})")));
            }
        }
        Ok(Self::from_map(n, map))
    }

    /// Graph with `n` nodes and no edges.
    pub fn empty(n: usize) -> Self {
        Self::from_map(n, BTreeMap::new())
    }

    fn from_map(n: usize, edges: BTreeMap<(NodeId, NodeId), f64>) -> Self {
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for (&(j, i), &p) in &edges {
            parents[i].push((j, p));
            children[j].push((i, p));
        }
        for list in parents.iter_mut().chain(children.iter_mut()) {
            list.sort_by_key(|&(k, _)| k);
        }
        Self {
            n,
            edges,
            parents,
            children,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Infection probability of `parent -> child`, zero when absent.
    pub fn prob(&self, parent: NodeId, child: NodeId) -> f64 {
        self.edges.get(&(parent, child)).copied().unwrap_or(0.0)
    }

    pub fn has_edge(&self, parent: NodeId, child: NodeId) -> bool {
        self.edges.contains_key(&(parent, child))
    }

    /// Parents of `i` with their edge probabilities, ascending by id.
    pub fn parents(&self, i: NodeId) -> &[(NodeId, f64)] {
        &self.parents[i]
    }

    /// Children of `j` with their edge probabilities, ascending by id.
    pub fn children(&self, j: NodeId) -> &[(NodeId, f64)] {
        &self.children[j]
    }

    /// The parental neighborhood `{ j : p_ji > 0 }` of `i`, ascending.
    pub fn parent_set(&self, i: NodeId) -> Vec<NodeId> {
        self.parents[i].iter().map(|&(j, _)| j).collect()
    }

    pub fn in_degree(&self, i: NodeId) -> usize {
        self.parents[i].len()
    }

    /// Sum of incoming edge probabilities of `i`.
    pub fn in_prob_sum(&self, i: NodeId) -> f64 {
        self.parents[i].iter().map(|&(_, p)| p).sum()
    }

    /// Edges as `(parent, child, p)` in lexicographic `(parent, child)` order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        self.edges.iter().map(|(&(j, i), &p)| (j, i, p))
    }

    /// The directed edge set without probabilities.
    pub fn edge_set(&self) -> BTreeSet<(NodeId, NodeId)> {
        self.edges.keys().copied().collect()
    }

    /// Smallest edge probability, `None` for an edgeless graph.
    pub fn min_prob(&self) -> Option<f64> {
        self.edges.values().copied().reduce(f64::min)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = GraphFile {
            n: self.n,
            edges: self.edges().collect(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(s)?;
        Self::from_edges(file.n, file.edges)
    }
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    n: usize,
    edges: Vec<(NodeId, NodeId, f64)>,
}

/// `1 - max_i sum_k p_ki`. May be zero or negative; callers decide whether
/// correlation-decay arguments apply.
pub fn correlation_decay_alpha(g: &WeightedDigraph) -> f64 {
    let worst = (0..g.n())
        .map(|i| g.in_prob_sum(i))
        .fold(0.0_f64, f64::max);
    1.0 - worst
}

/// Per-node candidate parent sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperGraph {
    candidates: Vec<Vec<NodeId>>,
}

impl SuperGraph {
    /// Validates and sorts the candidate lists. Every list must exclude its
    /// own node and reference only nodes `< candidates.len()`.
    pub fn new(mut candidates: Vec<Vec<NodeId>>) -> Result<Self> {
        let n = candidates.len();
        for (i, list) in candidates.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate candidate for node {i}"
                )));
            }
            if let Some(&bad) = list.iter().find(|&&j| j == i || j >= n) {
                return Err(Error::InvalidParameter(format!(
                    "invalid candidate {bad} for node {i}"
                )));
            }
        }
        Ok(Self { candidates })
    }

    /// `S_i = V \ {i}` for every node.
    pub fn full(n: usize) -> Self {
        Self {
            candidates: (0..n)
                .map(|i| (0..n).filter(|&j| j != i).collect())
                .collect(),
        }
    }

    /// `S_i = V_i`, the true parent sets of `g`.
    pub fn exact(g: &WeightedDigraph) -> Self {
        Self {
            candidates: (0..g.n()).map(|i| g.parent_set(i)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.candidates.len()
    }

    pub fn candidates(&self, i: NodeId) -> &[NodeId] {
        &self.candidates[i]
    }

    /// `true` when every true parent set is contained in its candidate set.
    pub fn contains_graph(&self, g: &WeightedDigraph) -> bool {
        g.n() == self.n()
            && (0..g.n()).all(|i| {
                g.parent_set(i)
                    .iter()
                    .all(|j| self.candidates[i].binary_search(j).is_ok())
            })
    }

    pub fn to_json(&self) -> Result<String> {
        // Keys written in numeric order.
        let mut out = String::from("{\"candidates\":{");
        for (i, list) in self.candidates.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!("\"{i}\":{}", serde_json::to_string(list)?));
        }
        out.push_str("}}");
        Ok(out)
    }

    /// Parses `{"candidates": {"i": [j, ...]}}`. Keys must be exactly
    /// `0..n` for some `n`.
    pub fn from_json(s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct File {
            candidates: BTreeMap<String, Vec<NodeId>>,
        }
        let file: File = serde_json::from_str(s)?;
        let n = file.candidates.len();
        let mut candidates = vec![None; n];
        for (k, v) in file.candidates {
            let i: usize = k
                .parse()
                .map_err(|_| Error::Format(format!("non-integer node key {k:?}")))?;
            if i >= n {
                return Err(Error::Format(format!(
                    "node key {i} out of range: keys must be 0..{n}"
                )));
            }
            candidates[i] = Some(v);
        }
        Self::new(candidates.into_iter().map(Option::unwrap_or_default).collect())
    }
}

/// Undirected simple graph; edges stored as `(min, max)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UndirectedGraph {
    n: usize,
    edges: BTreeSet<(NodeId, NodeId)>,
}

impl UndirectedGraph {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            edges: BTreeSet::new(),
        }
    }

    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut g = Self::new(n);
        for (a, b) in edges {
            if a >= n || b >= n || a == b {
                return Err(Error::InvalidParameter(format!(
                    "invalid undirected edge {{{a}, {b}}} for n = {n}"
                )));
            }
            g.insert(a, b);
        }
        Ok(g)
    }

    fn insert(&mut self, a: NodeId, b: NodeId) {
        debug_assert_ne!(a, b);
        self.edges.insert((a.min(b), a.max(b)));
    }

    pub fn remove(&mut self, a: NodeId, b: NodeId) -> bool {
        self.edges.remove(&(a.min(b), a.max(b)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn contains(&self, a: NodeId, b: NodeId) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, i: NodeId) -> Vec<NodeId> {
        (0..self.n).filter(|&j| j != i && self.contains(i, j)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let g: Self = serde_json::from_str(s)?;
        Self::from_edges(g.n, g.edges)
    }
}

/// Connects each node with its parents and children, marries co-parents and
/// drops directions.
pub fn moralize(g: &WeightedDigraph) -> UndirectedGraph {
    let mut out = UndirectedGraph::new(g.n());
    for (j, i, _) in g.edges() {
        out.insert(j, i);
    }
    for k in 0..g.n() {
        let parents = g.parents(k);
        for (a, &(pa, _)) in parents.iter().enumerate() {
            for &(pb, _) in &parents[a + 1..] {
                out.insert(pa, pb);
            }
        }
    }
    out
}

/// Structural families produced by [`generate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphKind {
    /// `w x h` lattice, 4-neighbor, both edge directions.
    Grid2d { width: usize, height: usize },
    /// Every node has in-degree and out-degree exactly `degree`.
    RandomRegular { n: usize, degree: usize },
    /// Random recursive tree rooted at node 0, edges directed parent -> child.
    RandomTree { n: usize, max_children: usize },
    /// Each ordered pair is an edge independently with probability `p_edge`.
    ErdosRenyi { n: usize, p_edge: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeProbLaw {
    Constant(f64),
    Uniform { lo: f64, hi: f64 },
}

impl EdgeProbLaw {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            EdgeProbLaw::Constant(p) => p > 0.0 && p <= 1.0,
            EdgeProbLaw::Uniform { lo, hi } => lo > 0.0 && lo <= hi && hi <= 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "edge probability law {self:?} must lie in (0, 1]"
            )))
        }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            EdgeProbLaw::Constant(p) => p,
            EdgeProbLaw::Uniform { lo, hi } => {
                if lo == hi {
                    lo
                } else {
                    // lo + (hi - lo) * u never exceeds hi for u in [0, 1).
                    lo + (hi - lo) * rng.gen::<f64>()
                }
            }
        }
    }
}

fn split_args<T: std::str::FromStr>(text: &str, body: &str, count: usize) -> Result<Vec<T>> {
    let parts: Vec<&str> = body.split(',').map(str::trim).collect();
    if parts.len() != count {
        return Err(Error::InvalidParameter(format!("`{text}`: expected {count} comma-separated values")));
    }
    parts
        .iter()
        .map(|p| p.parse().map_err(|_| Error::InvalidParameter(format!("`{text}`: cannot parse `{p}`"))))
        .collect()
}

/// Parses `grid2d:W,H`, `regular:N,D`, `tree:N,C` or `er:N,P`.
impl std::str::FromStr for GraphKind {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let (name, body) = text
            .split_once(':')
            .ok_or_else(|| Error::InvalidParameter(format!("`{text}`: expected KIND:ARGS")))?;
        Ok(match name {
            "grid2d" => {
                let a = split_args::<usize>(text, body, 2)?;
                GraphKind::Grid2d { width: a[0], height: a[1] }
            }
            "regular" => {
                let a = split_args::<usize>(text, body, 2)?;
                GraphKind::RandomRegular { n: a[0], degree: a[1] }
            }
            "tree" => {
                let a = split_args::<usize>(text, body, 2)?;
                GraphKind::RandomTree { n: a[0], max_children: a[1] }
            }
            "er" => {
                let (n, p) = body
                    .split_once(',')
                    .ok_or_else(|| Error::InvalidParameter(format!("`{text}`: expected er:N,P")))?;
                GraphKind::ErdosRenyi {
                    n: split_args(text, n, 1)?[0],
                    p_edge: split_args(text, p, 1)?[0],
                }
            }
            _ => return Err(Error::InvalidParameter(format!("`{text}`: unknown graph kind `{name}`"))),
        })
    }
}

/// Parses `P` (constant) or `uniform:LO,HI`.
impl std::str::FromStr for EdgeProbLaw {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        match text.split_once(':') {
            Some(("uniform", body)) => {
                let a = split_args::<f64>(text, body, 2)?;
                Ok(EdgeProbLaw::Uniform { lo: a[0], hi: a[1] })
            }
            None => Ok(EdgeProbLaw::Constant(split_args::<f64>(text, text, 1)?[0])),
            _ => Err(Error::InvalidParameter(format!("`{text}`: expected P or uniform:LO,HI"))),
        }
    }
}

const REGULAR_MAX_ATTEMPTS: usize = 1000;

/// Generates a graph structure of the given kind and assigns edge
/// probabilities from `law`. Deterministic for a fixed seed.
pub fn generate(kind: GraphKind, law: EdgeProbLaw, seed: u64) -> Result<WeightedDigraph> {
    law.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, structure) = match kind {
        GraphKind::Grid2d { width, height } => (width * height, grid_edges(width, height)?),
        GraphKind::RandomRegular { n, degree } => (n, regular_edges(n, degree, &mut rng)?),
        GraphKind::RandomTree { n, max_children } => {
            (n, tree_edges(n, max_children, &mut rng)?)
        }
        GraphKind::ErdosRenyi { n, p_edge } => (n, erdos_renyi_edges(n, p_edge, &mut rng)?),
    };
    let structure: BTreeSet<_> = structure.into_iter().collect();
    let edges: Vec<_> = structure
        .into_iter()
        .map(|(j, i)| (j, i, law.draw(&mut rng)))
        .collect();
    WeightedDigraph::from_edges(n, edges)
}

fn grid_edges(width: usize, height: usize) -> Result<Vec<(NodeId, NodeId)>> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidParameter(
            "grid dimensions must be positive".into(),
        ));
    }
    let id = |x: usize, y: usize| y * width + x;
    let mut edges = Vec::new();
    for y in 0..height {
        for x in 0..width {
            if x + 1 < width {
                edges.push((id(x, y), id(x + 1, y)));
                edges.push((id(x + 1, y), id(x, y)));
            }
            if y + 1 < height {
                edges.push((id(x, y), id(x, y + 1)));
                edges.push((id(x, y + 1), id(x, y)));
            }
        }
    }
    Ok(edges)
}

/// Directed configuration model: each node owns `degree` in-stubs and
/// `degree` out-stubs. In-stubs are matched in node order to uniformly drawn
/// admissible out-stubs (no self-loop, no repeated parent); a dead end
/// restarts the whole matching.
fn regular_edges<R: Rng>(n: usize, degree: usize, rng: &mut R) -> Result<Vec<(NodeId, NodeId)>> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    if degree >= n {
        return Err(Error::Generator(format!(
            "in-degree {degree} infeasible without self-loops on {n} nodes"
        )));
    }
    'attempt: for _ in 0..REGULAR_MAX_ATTEMPTS {
        let mut out_stubs: Vec<NodeId> = (0..n).flat_map(|j| std::iter::repeat_n(j, degree)).collect();
        out_stubs.shuffle(rng);
        let mut edges = Vec::with_capacity(n * degree);
        for i in 0..n {
            let mut taken: Vec<NodeId> = Vec::with_capacity(degree);
            for _ in 0..degree {
                let admissible: Vec<usize> = out_stubs
                    .iter()
                    .enumerate()
                    .filter(|&(_, &j)| j != i && !taken.contains(&j))
                    .map(|(idx, _)| idx)
                    .collect();
                let Some(&pick) = admissible.choose(rng) else {
                    continue 'attempt;
                };
                let j = out_stubs.swap_remove(pick);
                taken.push(j);
                edges.push((j, i));
            }
        }
        return Ok(edges);
    }
    Err(Error::Generator(format!(
        "no simple {degree}-regular digraph on {n} nodes after {REGULAR_MAX_ATTEMPTS} attempts"
    )))
}

fn tree_edges<R: Rng>(n: usize, max_children: usize, rng: &mut R) -> Result<Vec<(NodeId, NodeId)>> {
    if n == 0 || max_children == 0 {
        return Err(Error::InvalidParameter(
            "random tree needs n >= 1 and max_children >= 1".into(),
        ));
    }
    let mut child_count = vec![0usize; n];
    let mut open: Vec<NodeId> = vec![0];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    for k in 1..n {
        let slot = rng.gen_range(0..open.len());
        let parent = open[slot];
        edges.push((parent, k));
        child_count[parent] += 1;
        if child_count[parent] == max_children {
            open.swap_remove(slot);
        }
        open.push(k);
    }
    Ok(edges)
}

fn erdos_renyi_edges<R: Rng>(n: usize, p_edge: f64, rng: &mut R) -> Result<Vec<(NodeId, NodeId)>> {
    if !(0.0..=1.0).contains(&p_edge) {
        return Err(Error::InvalidParameter(format!(
            "p_edge {p_edge} outside [0, 1]"
        )));
    }
    let mut edges = Vec::new();
    for j in 0..n {
        for i in 0..n {
            if i != j && rng.gen::<f64>() < p_edge {
                edges.push((j, i));
            }
        }
    }
    Ok(edges)
}

/// `S_i = V_i` plus `extra_per_node` uniformly sampled non-parents of each
/// node. Deterministic for a fixed seed.
pub fn embed_supergraph(g: &WeightedDigraph, extra_per_node: usize, seed: u64) -> Result<SuperGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates = Vec::with_capacity(g.n());
    for i in 0..g.n() {
        let mut set = g.parent_set(i);
        let pool: Vec<NodeId> = (0..g.n())
            .filter(|&j| j != i && !g.has_edge(j, i))
            .collect();
        if pool.len() < extra_per_node {
            return Err(Error::InvalidParameter(format!(
                "node {i} has only {} non-parents, {extra_per_node} requested",
                pool.len()
            )));
        }
        set.extend(pool.choose_multiple(&mut rng, extra_per_node).copied());
        candidates.push(set);
    }
    SuperGraph::new(candidates)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair_rule(g: &WeightedDigraph, a: NodeId, b: NodeId) -> bool {
        g.has_edge(a, b)
            || g.has_edge(b, a)
            || (0..g.n()).any(|k| g.has_edge(a, k) && g.has_edge(b, k))
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(correlation_decay_alpha(&WeightedDigraph::empty(3)), 1.0);
        let g = WeightedDigraph::from_edges(2, [(0, 1, 0.3)]).unwrap();
        assert!((correlation_decay_alpha(&g) - 0.7).abs() < 1e-15);
        let g = WeightedDigraph::from_edges(3, [(0, 2, 0.4), (1, 2, 0.5)]).unwrap();
        assert!((correlation_decay_alpha(&g) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn alpha_positive_iff_every_in_sum_below_one() {
        for seed in 0..50 {
            let g = generate(
                GraphKind::ErdosRenyi { n: 6, p_edge: 0.4 },
                EdgeProbLaw::Uniform { lo: 0.05, hi: 0.6 },
                seed,
            )
            .unwrap();
            let all_below = (0..g.n()).all(|i| g.parents(i).iter().map(|e| e.1).sum::<f64>() < 1.0);
            assert_eq!(correlation_decay_alpha(&g) > 0.0, all_below);
        }
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(WeightedDigraph::from_edges(2, [(0, 0, 0.5)]).is_err());
        assert!(WeightedDigraph::from_edges(2, [(0, 1, 0.0)]).is_err());
        assert!(WeightedDigraph::from_edges(2, [(0, 1, 1.5)]).is_err());
        assert!(WeightedDigraph::from_edges(2, [(0, 2, 0.5)]).is_err());
        assert!(WeightedDigraph::from_edges(2, [(0, 1, 0.5), (0, 1, 0.4)]).is_err());
        assert!(WeightedDigraph::from_edges(2, [(0, 1, 1.0), (1, 0, 0.5)]).is_ok());
    }

    #[test]
    fn moralize_single_edge_and_v_structure() {
        let g = WeightedDigraph::from_edges(2, [(0, 1, 0.5)]).unwrap();
        let m = moralize(&g);
        assert_eq!(m.edges().collect::<Vec<_>>(), vec![(0, 1)]);

        let g = WeightedDigraph::from_edges(3, [(0, 2, 0.5), (1, 2, 0.5)]).unwrap();
        let m = moralize(&g);
        assert_eq!(m.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn moralize_two_parents_two_children_matches_pair_rule() {
        // a, b both parents of c and d; plus c -> d.
        let g = WeightedDigraph::from_edges(
            4,
            [(0, 2, 0.3), (0, 3, 0.3), (1, 2, 0.3), (1, 3, 0.3), (2, 3, 0.3)],
        )
        .unwrap();
        let m = moralize(&g);
        for a in 0..4 {
            for b in (a + 1)..4 {
                assert_eq!(m.contains(a, b), pair_rule(&g, a, b), "pair {a},{b}");
            }
        }
        assert_eq!(m.edge_count(), 6);
    }

    #[test]
    fn moralize_matches_pair_rule_on_random_graphs() {
        for seed in 0..40 {
            let g = generate(
                GraphKind::ErdosRenyi { n: 7, p_edge: 0.25 },
                EdgeProbLaw::Constant(0.2),
                seed,
            )
            .unwrap();
            let m = moralize(&g);
            for a in 0..7 {
                for b in (a + 1)..7 {
                    assert_eq!(m.contains(a, b), pair_rule(&g, a, b));
                }
            }
        }
    }

    #[test]
    fn remoralizing_symmetrized_graph_adds_only_its_own_marriages() {
        for seed in 0..20 {
            let g = generate(
                GraphKind::ErdosRenyi { n: 6, p_edge: 0.3 },
                EdgeProbLaw::Constant(0.2),
                seed,
            )
            .unwrap();
            let m = moralize(&g);
            let sym = WeightedDigraph::from_edges(
                g.n(),
                m.edges().flat_map(|(a, b)| [(a, b, 0.1), (b, a, 0.1)]),
            )
            .unwrap();
            let m2 = moralize(&sym);
            for a in 0..6 {
                for b in (a + 1)..6 {
                    // Re-evaluate the rules on the symmetrized digraph directly.
                    assert_eq!(m2.contains(a, b), pair_rule(&sym, a, b));
                    if m.contains(a, b) {
                        assert!(m2.contains(a, b));
                    }
                }
            }
        }
    }

    #[test]
    fn grid_2x2() {
        let g = generate(
            GraphKind::Grid2d { width: 2, height: 2 },
            EdgeProbLaw::Constant(0.2),
            0,
        )
        .unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.edge_count(), 8);
        assert!(g.edges().all(|(_, _, p)| p == 0.2));
        assert!(g.has_edge(0, 1) && g.has_edge(1, 0) && g.has_edge(0, 2) && !g.has_edge(0, 3));
    }

    #[test]
    fn random_regular_in_degree() {
        let g = generate(
            GraphKind::RandomRegular { n: 6, degree: 2 },
            EdgeProbLaw::Uniform { lo: 0.1, hi: 0.3 },
            7,
        )
        .unwrap();
        assert!((0..6).all(|i| g.in_degree(i) == 2));
        assert!((0..6).all(|j| g.children(j).len() == 2));

        let g = generate(
            GraphKind::RandomRegular { n: 200, degree: 4 },
            EdgeProbLaw::Constant(0.1),
            3,
        )
        .unwrap();
        assert!((0..200).all(|i| g.in_degree(i) == 4));
    }

    #[test]
    fn random_regular_infeasible() {
        let err = generate(
            GraphKind::RandomRegular { n: 3, degree: 3 },
            EdgeProbLaw::Constant(0.1),
            0,
        );
        assert!(matches!(err, Err(Error::Generator(_))));
    }

    #[test]
    fn random_tree_shape() {
        let g = generate(
            GraphKind::RandomTree { n: 5, max_children: 2 },
            EdgeProbLaw::Constant(0.5),
            11,
        )
        .unwrap();
        assert_eq!(g.edge_count(), 4);
        assert_eq!(g.in_degree(0), 0);
        assert!((1..5).all(|i| g.in_degree(i) == 1));
        assert!((0..5).all(|j| g.children(j).len() <= 2));
        // Union-find over undirected edges: no cycles.
        let mut root: Vec<usize> = (0..5).collect();
        fn find(r: &mut Vec<usize>, x: usize) -> usize {
            if r[x] != x {
                let top = find(r, r[x]);
                r[x] = top;
            }
            r[x]
        }
        for (a, b, _) in g.edges() {
            let (ra, rb) = (find(&mut root, a), find(&mut root, b));
            assert_ne!(ra, rb);
            root[ra] = rb;
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let kinds = [
            GraphKind::Grid2d { width: 3, height: 4 },
            GraphKind::RandomRegular { n: 30, degree: 3 },
            GraphKind::RandomTree { n: 30, max_children: 3 },
            GraphKind::ErdosRenyi { n: 20, p_edge: 0.1 },
        ];
        for kind in kinds {
            let law = EdgeProbLaw::Uniform { lo: 0.1, hi: 0.4 };
            let a = generate(kind, law, 99).unwrap();
            let b = generate(kind, law, 99).unwrap();
            assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        }
    }

    #[test]
    fn supergraph_embedding() {
        let g = generate(
            GraphKind::RandomRegular { n: 30, degree: 4 },
            EdgeProbLaw::Constant(0.1),
            1,
        )
        .unwrap();
        let s0 = embed_supergraph(&g, 0, 5).unwrap();
        assert_eq!(s0, SuperGraph::exact(&g));
        let s = embed_supergraph(&g, 4, 5).unwrap();
        assert!((0..30).all(|i| s.candidates(i).len() == 8));
        assert!(s.contains_graph(&g));
        assert_eq!(s, embed_supergraph(&g, 4, 5).unwrap());
        let full = embed_supergraph(&g, 25, 5).unwrap();
        assert_eq!(full, SuperGraph::full(30));
        assert!(embed_supergraph(&g, 26, 5).is_err());
    }

    #[test]
    fn json_formats() {
        let g = WeightedDigraph::from_edges(3, [(0, 1, 0.25), (2, 1, 0.5)]).unwrap();
        let s = g.to_json().unwrap();
        assert_eq!(s, r#"{"n":3,"edges":[[0,1,0.25],[2,1,0.5]]}"#);
        assert_eq!(WeightedDigraph::from_json(&s).unwrap(), g);

        let sg = SuperGraph::new(vec![vec![1], vec![0, 2], vec![]]).unwrap();
        let s = sg.to_json().unwrap();
        assert_eq!(s, r#"{"candidates":{"0":[1],"1":[0,2],"2":[]}}"#);
        assert_eq!(SuperGraph::from_json(&s).unwrap(), sg);
        assert!(SuperGraph::from_json(r#"{"candidates":{"0":[0]}}"#).is_err());
        assert!(SuperGraph::from_json(r#"{"candidates":{"1":[0]}}"#).is_err());
    }

    #[test]
    fn parse_specs() {
        assert_eq!("grid2d:3,4".parse::<GraphKind>().unwrap(), GraphKind::Grid2d { width: 3, height: 4 });
        assert_eq!("regular:200,4".parse::<GraphKind>().unwrap(), GraphKind::RandomRegular { n: 200, degree: 4 });
        assert_eq!("tree:15,3".parse::<GraphKind>().unwrap(), GraphKind::RandomTree { n: 15, max_children: 3 });
        assert_eq!("er:10,0.2".parse::<GraphKind>().unwrap(), GraphKind::ErdosRenyi { n: 10, p_edge: 0.2 });
        assert!("grid2d:3".parse::<GraphKind>().is_err());
        assert!("ring:3,1".parse::<GraphKind>().is_err());
        assert_eq!("0.4".parse::<EdgeProbLaw>().unwrap(), EdgeProbLaw::Constant(0.4));
        assert_eq!("uniform:0.1,0.5".parse::<EdgeProbLaw>().unwrap(), EdgeProbLaw::Uniform { lo: 0.1, hi: 0.5 });
        assert!("beta:1,2".parse::<EdgeProbLaw>().is_err());
    }
}
