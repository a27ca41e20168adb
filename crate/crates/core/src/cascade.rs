//! One-step and delayed independent-cascade simulation, plus the
//! infection-time observations they produce.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::graph::{NodeId, WeightedDigraph};

/// Time at which a node first became active. `Never` orders after every
/// finite time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InfectionTime {
    At(u32),
    Never,
}

impl InfectionTime {
    pub fn finite(self) -> Option<u32> {
        match self {
            InfectionTime::At(t) => Some(t),
            InfectionTime::Never => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, InfectionTime::At(_))
    }
}

impl fmt::Display for InfectionTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InfectionTime::At(t) => write!(f, "{t}"),
            InfectionTime::Never => f.write_str("inf"),
        }
    }
}

/// Infection times of one cascade. Uninfected nodes are absent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Cascade {
    times: Vec<(NodeId, u32)>,
}

impl Cascade {
    pub fn new<I>(times: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, u32)>,
    {
        let mut times: Vec<_> = times.into_iter().collect();
        times.sort_unstable();
        if let Some(w) = times.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidParameter(format!(
                "node {} has more than one infection time",
                w[0].0
            )));
        }
        Ok(Self { times })
    }

    /// Builds a cascade from a dense per-node vector.
    pub fn from_dense(dense: &[InfectionTime]) -> Self {
        Self {
            times: dense
                .iter()
                .enumerate()
                .filter_map(|(i, t)| t.finite().map(|t| (i, t)))
                .collect(),
        }
    }

    pub fn time(&self, node: NodeId) -> InfectionTime {
        match self.times.binary_search_by_key(&node, |&(i, _)| i) {
            Ok(idx) => InfectionTime::At(self.times[idx].1),
            Err(_) => InfectionTime::Never,
        }
    }

    /// Infected nodes with their times, ascending by node.
    pub fn infected(&self) -> &[(NodeId, u32)] {
        &self.times
    }

    pub fn infected_count(&self) -> usize {
        self.times.len()
    }

    pub fn seed_count(&self) -> usize {
        self.times.iter().filter(|&&(_, t)| t == 0).count()
    }

    pub fn to_dense(&self, n: usize) -> Vec<InfectionTime> {
        let mut out = vec![InfectionTime::Never; n];
        for &(i, t) in &self.times {
            out[i] = InfectionTime::At(t);
        }
        out
    }

    fn max_node(&self) -> Option<NodeId> {
        self.times.last().map(|&(i, _)| i)
    }

    /// Every non-seed infected node has a parent in `g` active exactly one
    /// step earlier.
    pub fn is_one_step_consistent(&self, g: &WeightedDigraph) -> bool {
        self.times.iter().all(|&(i, t)| {
            t == 0
                || g.parents(i)
                    .iter()
                    .any(|&(j, _)| self.time(j) == InfectionTime::At(t - 1))
        })
    }
}

/// Which process generated a [`CascadeSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelTag {
    OneStep,
    Generalized { horizon: usize },
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Provenance {
    pub seed: Option<u64>,
    pub model: ModelTag,
}

/// Ordered collection of independent cascades over nodes `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeSet {
    n: usize,
    cascades: Vec<Cascade>,
    provenance: Provenance,
}

impl CascadeSet {
    pub fn new(n: usize, cascades: Vec<Cascade>, provenance: Provenance) -> Result<Self> {
        if let Some((u, c)) = cascades
            .iter()
            .enumerate()
            .find(|(_, c)| c.max_node().is_some_and(|i| i >= n))
        {
            return Err(Error::InvalidParameter(format!(
                "cascade {u} references node {} but n = {n}",
                c.max_node().unwrap_or_default()
            )));
        }
        Ok(Self {
            n,
            cascades,
            provenance,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.cascades.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cascades.is_empty()
    }

    pub fn cascades(&self) -> &[Cascade] {
        &self.cascades
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Total number of infections (seeds included) over all cascades.
    pub fn total_infections(&self) -> usize {
        self.cascades.iter().map(Cascade::infected_count).sum()
    }

    /// Writes one JSON object per cascade: `{"u": index, "t": {"node": time}}`.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for (u, c) in self.cascades.iter().enumerate() {
            let body: Vec<String> = c
                .infected()
                .iter()
                .map(|(i, t)| format!("\"{i}\":{t}"))
                .collect();
            writeln!(out, "{{\"u\":{u},\"t\":{{{}}}}}", body.join(","))?;
        }
        Ok(())
    }

    pub fn to_jsonl_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("JSONL output is ASCII")
    }

    /// Reads the JSONL format. Cascades are ordered by their `u` field,
    /// which must be unique.
    pub fn read_jsonl<R: BufRead>(input: R, n: usize) -> Result<Self> {
        #[derive(Deserialize)]
        struct Line {
            u: usize,
            t: BTreeMap<String, u32>,
        }
        let mut by_index = BTreeMap::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: Line = serde_json::from_str(&line)
                .map_err(|e| Error::Format(format!("line {}: {e}", lineno + 1)))?;
            let times = parsed
                .t
                .into_iter()
                .map(|(k, t)| {
                    k.parse::<NodeId>()
                        .map(|i| (i, t))
                        .map_err(|_| Error::Format(format!("line {}: bad node key {k:?}", lineno + 1)))
                })
                .collect::<Result<Vec<_>>>()?;
            let cascade = Cascade::new(times)?;
            if by_index.insert(parsed.u, cascade).is_some() {
                return Err(Error::Format(format!("duplicate cascade index {}", parsed.u)));
            }
        }
        Self::new(
            n,
            by_index.into_values().collect(),
            Provenance {
                seed: None,
                model: ModelTag::External,
            },
        )
    }
}

/// RNG for cascade `index` under master `seed`: one ChaCha stream per
/// cascade, so each cascade is reproducible on its own.
pub(crate) fn cascade_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn check_p_init(p_init: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p_init) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("p_init {p_init} outside [0, 1]")))
    }
}

/// Simulates `m` independent one-step cascades on `g`.
///
/// Each node seeds with probability `p_init`; a node active at `t` makes one
/// attempt on each still-susceptible child, which becomes active at `t + 1`
/// on success. Active nodes turn inactive after one step.
pub fn simulate(g: &WeightedDigraph, p_init: f64, m: usize, seed: u64) -> Result<CascadeSet> {
    check_p_init(p_init)?;
    let cascades = (0..m)
        .into_par_iter()
        .map(|u| simulate_one(g, p_init, &mut cascade_rng(seed, u as u64)))
        .collect();
    CascadeSet::new(
        g.n(),
        cascades,
        Provenance {
            seed: Some(seed),
            model: ModelTag::OneStep,
        },
    )
}

fn draw_seeds<R: Rng>(n: usize, p_init: f64, rng: &mut R) -> Vec<InfectionTime> {
    (0..n)
        .map(|_| {
            if rng.gen::<f64>() < p_init {
                InfectionTime::At(0)
            } else {
                InfectionTime::Never
            }
        })
        .collect()
}

fn simulate_one<R: Rng>(g: &WeightedDigraph, p_init: f64, rng: &mut R) -> Cascade {
    let n = g.n();
    let mut times = draw_seeds(n, p_init, rng);
    let mut frontier: Vec<NodeId> = (0..n).filter(|&i| times[i].is_finite()).collect();
    let mut t = 0u32;
    // A one-step cascade spans at most n - 1 hops.
    while !frontier.is_empty() && (t as usize) < n {
        let mut next = Vec::new();
        for &j in &frontier {
            for &(i, p) in g.children(j) {
                if times[i] == InfectionTime::Never && rng.gen::<f64>() < p {
                    times[i] = InfectionTime::At(t + 1);
                    next.push(i);
                }
            }
        }
        next.sort_unstable();
        frontier = next;
        t += 1;
    }
    Cascade::from_dense(&times)
}

/// Per-edge delay distributions: `probs[τ - 1]` is the probability that an
/// active parent infects the child exactly `τ` steps after its own infection.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayKernel {
    n: usize,
    horizon: usize,
    edges: BTreeMap<(NodeId, NodeId), Vec<f64>>,
    children: Vec<Vec<NodeId>>,
}

impl DelayKernel {
    /// Edges whose delay probabilities are all zero are dropped.
    pub fn new<I>(n: usize, horizon: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId, Vec<f64>)>,
    {
        if horizon == 0 {
            return Err(Error::InvalidParameter("delay horizon must be >= 1".into()));
        }
        let mut map = BTreeMap::new();
        for (j, i, probs) in edges {
            if j >= n || i >= n || j == i {
                return Err(Error::InvalidParameter(format!("invalid kernel edge ({j}, {i})")));
            }
            if probs.len() != horizon {
                return Err(Error::InvalidParameter(format!(
                    "edge ({j}, {i}) has {} delay probabilities, horizon is {horizon}",
                    probs.len()
                )));
            }
            let total: f64 = probs.iter().sum();
            if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) || total > 1.0 + 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "edge ({j}, {i}) delay probabilities must be >= 0 and sum to <= 1"
                )));
            }
            if total == 0.0 {
                continue;
            }
            if map.insert((j, i), probs).is_some() {
                return Err(Error::InvalidParameter(format!("duplicate kernel edge ({j}, {i})")));
            }
        }
        let mut children = vec![Vec::new(); n];
        for &(j, i) in map.keys() {
            children[j].push(i);
        }
        Ok(Self {
            n,
            horizon,
            edges: map,
            children,
        })
    }

    /// The horizon-1 kernel equivalent to a one-step graph.
    pub fn from_digraph(g: &WeightedDigraph) -> Self {
        Self::new(g.n(), 1, g.edges().map(|(j, i, p)| (j, i, vec![p])))
            .expect("a valid digraph yields a valid horizon-1 kernel")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn delay_probs(&self, parent: NodeId, child: NodeId) -> Option<&[f64]> {
        self.edges.get(&(parent, child)).map(Vec::as_slice)
    }

    pub fn parent_set(&self, i: NodeId) -> Vec<NodeId> {
        self.edges.keys().filter(|&&(_, c)| c == i).map(|&(j, _)| j).collect()
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, &[f64])> + '_ {
        self.edges.iter().map(|(&(j, i), p)| (j, i, p.as_slice()))
    }
}

/// Simulates `m` cascades under per-edge delay distributions.
///
/// When a parent `j` becomes active at `t_j`, a delay `τ` is drawn for each
/// child (`never` with the residual mass); the child's time is the minimum of
/// `t_j + τ` over its infected parents. Random numbers are consumed in the
/// same order as [`simulate`], so a horizon-1 kernel reproduces it exactly.
pub fn simulate_generalized(k: &DelayKernel, p_init: f64, m: usize, seed: u64) -> Result<CascadeSet> {
    check_p_init(p_init)?;
    let cascades = (0..m)
        .into_par_iter()
        .map(|u| simulate_generalized_one(k, p_init, &mut cascade_rng(seed, u as u64)))
        .collect();
    CascadeSet::new(
        k.n(),
        cascades,
        Provenance {
            seed: Some(seed),
            model: ModelTag::Generalized { horizon: k.horizon() },
        },
    )
}

fn simulate_generalized_one<R: Rng>(k: &DelayKernel, p_init: f64, rng: &mut R) -> Cascade {
    let n = k.n();
    let mut times = draw_seeds(n, p_init, rng);
    let max_time = n * k.horizon();
    let mut buckets: Vec<Vec<NodeId>> = vec![Vec::new(); max_time + 1];
    buckets[0] = (0..n).filter(|&i| times[i].is_finite()).collect();
    for t in 0..=max_time {
        let mut active = std::mem::take(&mut buckets[t]);
        active.sort_unstable();
        active.dedup();
        for j in active {
            if times[j] != InfectionTime::At(t as u32) {
                continue; // superseded by an earlier infection
            }
            for &i in &k.children[j] {
                if let InfectionTime::At(ti) = times[i] {
                    if ti as usize <= t + 1 {
                        continue;
                    }
                }
                let u = rng.gen::<f64>();
                let probs = &k.edges[&(j, i)];
                let mut cum = 0.0;
                let delay = probs.iter().position(|&p| {
                    cum += p;
                    u < cum
                });
                if let Some(d) = delay {
                    let ti = t + d + 1;
                    if ti <= max_time && times[i] > InfectionTime::At(ti as u32) {
                        times[i] = InfectionTime::At(ti as u32);
                        buckets[ti].push(i);
                    }
                }
            }
        }
    }
    Cascade::from_dense(&times)
}

/// Empirical distribution of a node's infection time over the cascade set.
pub fn empirical_time_pmf(cs: &CascadeSet, node: NodeId) -> BTreeMap<InfectionTime, f64> {
    let mut counts: BTreeMap<InfectionTime, usize> = BTreeMap::new();
    for c in cs.cascades() {
        *counts.entry(c.time(node)).or_default() += 1;
    }
    let m = cs.len() as f64;
    counts.into_iter().map(|(t, c)| (t, c as f64 / m)).collect()
}

/// Nodes infected in at least one cascade.
pub fn ever_infected(cs: &CascadeSet) -> BTreeSet<NodeId> {
    cs.cascades()
        .iter()
        .flat_map(|c| c.infected().iter().map(|&(i, _)| i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, EdgeProbLaw, GraphKind};

    fn chain(n: usize, p: f64) -> WeightedDigraph {
        WeightedDigraph::from_edges(n, (0..n - 1).map(|j| (j, j + 1, p))).unwrap()
    }

    #[test]
    fn cascade_lookup() {
        let c = Cascade::new([(3, 1), (0, 0)]).unwrap();
        assert_eq!(c.time(0), InfectionTime::At(0));
        assert_eq!(c.time(3), InfectionTime::At(1));
        assert_eq!(c.time(1), InfectionTime::Never);
        assert_eq!(c.seed_count(), 1);
        assert!(Cascade::new([(1, 0), (1, 2)]).is_err());
        assert!(InfectionTime::At(1_000_000) < InfectionTime::Never);
    }

    #[test]
    fn no_edges_means_seeds_only() {
        let g = WeightedDigraph::empty(5);
        let cs = simulate(&g, 0.3, 200, 4).unwrap();
        for c in cs.cascades() {
            assert_eq!(c.seed_count(), c.infected_count());
        }
    }

    #[test]
    fn certain_chain_infection() {
        let g = chain(2, 1.0);
        let cs = simulate(&g, 0.3, 2000, 1).unwrap();
        let mut seen = 0;
        for c in cs.cascades() {
            if c.time(0) == InfectionTime::At(0) && c.time(1) != InfectionTime::At(0) {
                assert_eq!(c.time(1), InfectionTime::At(1));
                seen += 1;
            }
        }
        assert!(seen > 0);
    }

    #[test]
    fn two_node_pattern_frequency() {
        // P[t_a = 0, t_b = 1] = p_init (1 - p_init) p_ab.
        let g = WeightedDigraph::from_edges(2, [(0, 1, 0.5)]).unwrap();
        let m = 1_000_000;
        let cs = simulate(&g, 0.3, m, 2024).unwrap();
        let hits = cs
            .cascades()
            .iter()
            .filter(|c| c.time(0) == InfectionTime::At(0) && c.time(1) == InfectionTime::At(1))
            .count();
        let expected = 0.3 * 0.7 * 0.5;
        let sigma = (expected * (1.0 - expected) / m as f64).sqrt();
        let freq = hits as f64 / m as f64;
        assert!((freq - expected).abs() <= 3.0 * sigma, "freq {freq}");
    }

    #[test]
    fn one_step_validity_and_determinism() {
        let g = generate(
            GraphKind::ErdosRenyi { n: 12, p_edge: 0.3 },
            EdgeProbLaw::Uniform { lo: 0.2, hi: 0.9 },
            3,
        )
        .unwrap();
        let cs = simulate(&g, 0.1, 3000, 77).unwrap();
        assert!(cs.cascades().iter().all(|c| c.is_one_step_consistent(&g)));
        assert_eq!(cs, simulate(&g, 0.1, 3000, 77).unwrap());
        assert_ne!(cs, simulate(&g, 0.1, 3000, 78).unwrap());
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let g = generate(
            GraphKind::Grid2d { width: 4, height: 4 },
            EdgeProbLaw::Constant(0.3),
            0,
        )
        .unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| simulate(&g, 0.05, 500, 9).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn seed_count_is_binomial() {
        let g = chain(20, 0.3);
        let (m, p) = (5000, 0.05);
        let cs = simulate(&g, p, m, 12).unwrap();
        let seeds: usize = cs.cascades().iter().map(Cascade::seed_count).sum();
        let trials = (20 * m) as f64;
        let mean = trials * p;
        let sd = (trials * p * (1.0 - p)).sqrt();
        assert!((seeds as f64 - mean).abs() <= 4.0 * sd);
    }

    #[test]
    fn horizon_one_kernel_reproduces_one_step() {
        let g = generate(
            GraphKind::ErdosRenyi { n: 10, p_edge: 0.3 },
            EdgeProbLaw::Uniform { lo: 0.1, hi: 1.0 },
            5,
        )
        .unwrap();
        let k = DelayKernel::from_digraph(&g);
        let a = simulate(&g, 0.15, 2000, 31).unwrap();
        let b = simulate_generalized(&k, 0.15, 2000, 31).unwrap();
        assert_eq!(a.cascades(), b.cascades());
    }

    #[test]
    fn delayed_certain_infection() {
        let k = DelayKernel::new(2, 2, [(0, 1, vec![0.0, 1.0])]).unwrap();
        let cs = simulate_generalized(&k, 0.3, 2000, 3).unwrap();
        for c in cs.cascades() {
            if c.time(0) == InfectionTime::At(0) && c.time(1) != InfectionTime::At(0) {
                assert_eq!(c.time(1), InfectionTime::At(2));
            }
        }
    }

    #[test]
    fn delay_frequency_matches_kernel() {
        let k = DelayKernel::new(2, 2, [(0, 1, vec![0.3, 0.4])]).unwrap();
        let cs = simulate_generalized(&k, 0.3, 400_000, 8).unwrap();
        let (mut base, mut hits) = (0usize, 0usize);
        for c in cs.cascades() {
            if c.time(0) == InfectionTime::At(0) && c.time(1) != InfectionTime::At(0) {
                base += 1;
                if c.time(1) == InfectionTime::At(2) {
                    hits += 1;
                }
            }
        }
        let freq = hits as f64 / base as f64;
        let sigma = (0.4 * 0.6 / base as f64).sqrt();
        assert!((freq - 0.4).abs() <= 3.0 * sigma, "freq {freq}");
    }

    #[test]
    fn kernel_validation() {
        assert!(DelayKernel::new(2, 0, []).is_err());
        assert!(DelayKernel::new(2, 2, [(0, 1, vec![0.6, 0.5])]).is_err());
        assert!(DelayKernel::new(2, 2, [(0, 1, vec![0.5])]).is_err());
        assert!(DelayKernel::new(2, 2, [(0, 1, vec![-0.1, 0.5])]).is_err());
        let k = DelayKernel::new(3, 2, [(0, 1, vec![0.0, 0.0]), (2, 1, vec![0.2, 0.1])]).unwrap();
        assert_eq!(k.parent_set(1), vec![2]);
    }

    #[test]
    fn pmf_counting() {
        let cascades = (0..10)
            .map(|u| {
                if u < 3 {
                    Cascade::new([(1, 0)]).unwrap()
                } else {
                    Cascade::default()
                }
            })
            .collect();
        let cs = CascadeSet::new(
            3,
            cascades,
            Provenance {
                seed: None,
                model: ModelTag::External,
            },
        )
        .unwrap();
        let pmf = empirical_time_pmf(&cs, 1);
        assert_eq!(pmf.len(), 2);
        assert!((pmf[&InfectionTime::At(0)] - 0.3).abs() < 1e-15);
        assert!((pmf[&InfectionTime::Never] - 0.7).abs() < 1e-15);
        let pmf = empirical_time_pmf(&cs, 0);
        assert_eq!(pmf[&InfectionTime::Never], 1.0);
    }

    #[test]
    fn pmf_respects_correlation_decay_bound() {
        let g = chain(6, 0.5);
        let p_init = 0.1;
        let m = 100_000;
        let cs = simulate(&g, p_init, m, 5).unwrap();
        for i in 0..6 {
            for (t, freq) in empirical_time_pmf(&cs, i) {
                if let InfectionTime::At(t) = t {
                    let bound = 0.5f64.powi(t as i32 - 1) * p_init;
                    let sigma = (bound.min(1.0) * (1.0 - bound.min(1.0)) / m as f64).sqrt();
                    assert!(freq <= bound + 3.0 * sigma, "node {i} t {t}: {freq} > {bound}");
                }
            }
        }
    }

    #[test]
    fn jsonl_format() {
        let cs = CascadeSet::new(
            12,
            vec![
                Cascade::new([(10, 1), (2, 0)]).unwrap(),
                Cascade::default(),
            ],
            Provenance {
                seed: None,
                model: ModelTag::External,
            },
        )
        .unwrap();
        let text = cs.to_jsonl_string();
        assert_eq!(text, "{\"u\":0,\"t\":{\"2\":0,\"10\":1}}\n{\"u\":1,\"t\":{}}\n");
        let back = CascadeSet::read_jsonl(text.as_bytes(), 12).unwrap();
        assert_eq!(back.cascades(), cs.cascades());
        assert!(CascadeSet::read_jsonl(text.as_bytes(), 5).is_err());
        assert!(CascadeSet::read_jsonl("{\"u\":0,\"t\":{}}\n{\"u\":0,\"t\":{}}".as_bytes(), 3).is_err());
    }
}
