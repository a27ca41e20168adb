//! The θ-parametrization `θ = -ln(1 - p)` and the per-node log-likelihood of
//! observed infection times, which is concave in θ and decouples across
//! target nodes.
//!
//! Boundary conventions for a target node `i`:
//!
//! * seed (`t_i = 0`): the node term is 0, the seed probability lives in the
//!   seed term of [`total_loglik`];
//! * never infected: every infected candidate made exactly one failed
//!   attempt, so the term is `-Σ_{j infected} θ_ji`;
//! * infected at `t_i >= 1`: `-Σ_{t_j <= t_i - 2} θ_ji + ln(1 - exp(-Σ_{t_j = t_i - 1} θ_ji))`.
//!
//! Candidates infected at the same step as `i` (or later) contribute nothing.

use std::collections::BTreeMap;

use crate::cascade::{Cascade, CascadeSet, DelayKernel, InfectionTime};
use crate::error::{Error, Result};
use crate::graph::{NodeId, WeightedDigraph};

/// Infector sums below this are treated as this value by the solver-facing
/// objective and gradient.
pub const MIN_INFECTOR_SUM: f64 = 1e-12;

pub fn theta_from_p(p: f64) -> Result<f64> {
    if p == 1.0 {
        return Err(Error::Domain("p = 1 has infinite theta".into()));
    }
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Domain(format!("probability {p} outside [0, 1)")));
    }
    Ok(-(-p).ln_1p())
}

/// Inverse of [`theta_from_p`] for `theta >= 0`.
pub fn p_from_theta(theta: f64) -> f64 {
    -(-theta).exp_m1()
}

/// `ln(1 - e^{-s})` for `s >= 0`; `-inf` at `s = 0`.
pub fn log1mexp(s: f64) -> f64 {
    if s <= 0.0 {
        f64::NEG_INFINITY
    } else if s < std::f64::consts::LN_2 {
        (-(-s).exp_m1()).ln()
    } else {
        (-(-s).exp()).ln_1p()
    }
}

fn check_candidates(target: NodeId, candidates: &[NodeId]) -> Result<()> {
    if candidates.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "candidates must be strictly increasing".into(),
        ));
    }
    if candidates.contains(&target) {
        return Err(Error::InvalidParameter(format!(
            "node {target} cannot be its own candidate"
        )));
    }
    Ok(())
}

fn check_values(values: &[f64]) -> Result<()> {
    if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::InvalidParameter(
            "theta values must be finite and non-negative".into(),
        ));
    }
    Ok(())
}

/// Non-negative parameters `θ_ji` for one target node over its candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaVector {
    target: NodeId,
    candidates: Vec<NodeId>,
    values: Vec<f64>,
}

impl ThetaVector {
    pub fn new(target: NodeId, candidates: Vec<NodeId>, values: Vec<f64>) -> Result<Self> {
        check_candidates(target, &candidates)?;
        if candidates.len() != values.len() {
            return Err(Error::InvalidParameter(
                "one theta value per candidate required".into(),
            ));
        }
        check_values(&values)?;
        Ok(Self {
            target,
            candidates,
            values,
        })
    }

    pub fn zeros(target: NodeId, candidates: Vec<NodeId>) -> Result<Self> {
        let values = vec![0.0; candidates.len()];
        Self::new(target, candidates, values)
    }

    /// True parameters of `g` for `target` over `candidates`; non-edges get 0.
    pub fn from_graph(g: &WeightedDigraph, target: NodeId, candidates: Vec<NodeId>) -> Result<Self> {
        let values = candidates
            .iter()
            .map(|&j| theta_from_p(g.prob(j, target)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(target, candidates, values)
    }

    pub fn target(&self) -> NodeId {
        self.target
    }

    pub fn candidates(&self) -> &[NodeId] {
        &self.candidates
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// θ for `j`, zero when `j` is not a candidate.
    pub fn get(&self, j: NodeId) -> f64 {
        self.candidates
            .binary_search(&j)
            .map(|k| self.values[k])
            .unwrap_or(0.0)
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.target, self.candidates.clone(), values)
    }
}

/// Parameters `θ_ji^τ` of the delayed model, stored candidate-major:
/// index `c * horizon + (τ - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GenThetaVector {
    target: NodeId,
    candidates: Vec<NodeId>,
    horizon: usize,
    values: Vec<f64>,
}

impl GenThetaVector {
    pub fn new(target: NodeId, candidates: Vec<NodeId>, horizon: usize, values: Vec<f64>) -> Result<Self> {
        check_candidates(target, &candidates)?;
        if horizon == 0 || values.len() != candidates.len() * horizon {
            return Err(Error::InvalidParameter(
                "need horizon >= 1 and horizon values per candidate".into(),
            ));
        }
        check_values(&values)?;
        Ok(Self {
            target,
            candidates,
            horizon,
            values,
        })
    }

    pub fn zeros(target: NodeId, candidates: Vec<NodeId>, horizon: usize) -> Result<Self> {
        let values = vec![0.0; candidates.len() * horizon];
        Self::new(target, candidates, horizon, values)
    }

    /// `θ^τ = ln(1 - P_{τ-1}) - ln(1 - P_τ)` with `P_τ` the cumulative
    /// delay mass up to `τ`.
    pub fn from_kernel(k: &DelayKernel, target: NodeId, candidates: Vec<NodeId>) -> Result<Self> {
        let h = k.horizon();
        let mut values = Vec::with_capacity(candidates.len() * h);
        for &j in &candidates {
            match k.delay_probs(j, target) {
                None => values.extend(std::iter::repeat_n(0.0, h)),
                Some(probs) => {
                    let mut cum = 0.0;
                    for &p in probs {
                        let before = cum;
                        cum += p;
                        if cum >= 1.0 && p > 0.0 {
                            return Err(Error::Domain(format!(
                                "edge ({j}, {target}) has cumulative delay mass 1: infinite theta"
                            )));
                        }
                        values.push((-before).ln_1p() - (-cum).ln_1p());
                    }
                }
            }
        }
        Self::new(target, candidates, h, values)
    }

    pub fn target(&self) -> NodeId {
        self.target
    }

    pub fn candidates(&self) -> &[NodeId] {
        &self.candidates
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `θ_j^τ`, zero for non-candidates and `τ` outside `1..=horizon`.
    pub fn get(&self, j: NodeId, tau: usize) -> f64 {
        match self.candidates.binary_search(&j) {
            Ok(c) if (1..=self.horizon).contains(&tau) => self.values[c * self.horizon + tau - 1],
            _ => 0.0,
        }
    }

    /// `Σ_τ θ_j^τ`.
    pub fn total(&self, j: NodeId) -> f64 {
        (1..=self.horizon).map(|tau| self.get(j, tau)).sum()
    }
}

fn inconsistent(node: NodeId, t: u32, cascade: Option<usize>) -> Error {
    let at = cascade.map(|u| format!("cascade {u}")).unwrap_or_else(|| "a cascade".into());
    Error::DataInconsistency(format!(
        "node {node} infected at t = {t} in {at} but no candidate could have infected it"
    ))
}

/// Index sets of one cascade's contribution to a target node: `fail` are
/// parameters with a failed attempt, `success` the parameters of candidates
/// that could have caused the infection. `success` is empty exactly when the
/// target was never infected.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
struct Terms {
    fail: Vec<u32>,
    success: Vec<u32>,
}

fn one_step_terms(target: NodeId, candidates: &[NodeId], c: &Cascade, index: Option<usize>) -> Result<Option<Terms>> {
    let ti = match c.time(target) {
        InfectionTime::At(0) => return Ok(None),
        t => t,
    };
    let mut terms = Terms::default();
    for (k, &j) in candidates.iter().enumerate() {
        if let InfectionTime::At(tj) = c.time(j) {
            match ti {
                InfectionTime::Never => terms.fail.push(k as u32),
                InfectionTime::At(ti) if tj + 2 <= ti => terms.fail.push(k as u32),
                InfectionTime::At(ti) if tj + 1 == ti => terms.success.push(k as u32),
                _ => {}
            }
        }
    }
    if let InfectionTime::At(t) = ti {
        if terms.success.is_empty() {
            return Err(inconsistent(target, t, index));
        }
    }
    Ok(Some(terms))
}

fn delayed_terms(
    target: NodeId,
    candidates: &[NodeId],
    horizon: usize,
    c: &Cascade,
    index: Option<usize>,
) -> Result<Option<Terms>> {
    let ti = match c.time(target) {
        InfectionTime::At(0) => return Ok(None),
        t => t,
    };
    let mut terms = Terms::default();
    for (k, &j) in candidates.iter().enumerate() {
        let Some(tj) = c.time(j).finite() else { continue };
        let base = (k * horizon) as u32;
        match ti {
            InfectionTime::Never => terms.fail.extend(base..base + horizon as u32),
            InfectionTime::At(ti) if tj < ti => {
                let lag = (ti - tj) as usize;
                let failed = (lag - 1).min(horizon);
                terms.fail.extend(base..base + failed as u32);
                if lag <= horizon {
                    terms.success.push(base + lag as u32 - 1);
                }
            }
            _ => {}
        }
    }
    if let InfectionTime::At(t) = ti {
        if terms.success.is_empty() {
            return Err(inconsistent(target, t, index));
        }
    }
    Ok(Some(terms))
}

fn eval_terms(terms: &Terms, values: &[f64]) -> f64 {
    let fail: f64 = terms.fail.iter().map(|&k| values[k as usize]).sum();
    if terms.success.is_empty() {
        -fail
    } else {
        let s: f64 = terms.success.iter().map(|&k| values[k as usize]).sum();
        -fail + log1mexp(s)
    }
}

/// Per-node log-likelihood of one cascade. Returns `-inf` when the target
/// was infected and every possible infector has θ = 0.
pub fn node_loglik(theta: &ThetaVector, t: &Cascade) -> Result<f64> {
    Ok(one_step_terms(theta.target, &theta.candidates, t, None)?
        .map_or(0.0, |terms| eval_terms(&terms, &theta.values)))
}

/// Log-probability of the seed pattern: `s ln p + (n - s) ln(1 - p)`.
pub fn seed_loglik(p_init: f64, seeds: usize, n: usize) -> f64 {
    let term = |count: usize, p: f64| if count == 0 { 0.0 } else { count as f64 * p.ln() };
    term(seeds, p_init) + term(n - seeds, 1.0 - p_init)
}

fn check_thetas<T>(thetas: &[T], n: usize, target: impl Fn(&T) -> NodeId) -> Result<()> {
    if thetas.len() != n || thetas.iter().enumerate().any(|(i, th)| target(th) != i) {
        return Err(Error::InvalidParameter(
            "need one parameter vector per node, in node order".into(),
        ));
    }
    Ok(())
}

/// Full log-likelihood of one cascade: seed term plus every node term.
pub fn total_loglik(thetas: &[ThetaVector], p_init: f64, t: &Cascade, n: usize) -> Result<f64> {
    check_thetas(thetas, n, |th| th.target)?;
    let mut total = seed_loglik(p_init, t.seed_count(), n);
    for th in thetas {
        total += node_loglik(th, t)?;
    }
    Ok(total)
}

/// Gradient of the mean node log-likelihood `(1/m) Σ_u ℒ_i(t^u; θ)`,
/// aligned with `theta.candidates()`. Infector sums are floored at
/// [`MIN_INFECTOR_SUM`] in the denominator `e^S - 1`.
pub fn node_grad(theta: &ThetaVector, cs: &CascadeSet) -> Result<Vec<f64>> {
    let mut grad = vec![0.0; theta.values.len()];
    for (u, c) in cs.cascades().iter().enumerate() {
        if let Some(terms) = one_step_terms(theta.target, &theta.candidates, c, Some(u))? {
            accumulate_grad(&terms, &theta.values, 1.0, &mut grad);
        }
    }
    let m = cs.len().max(1) as f64;
    grad.iter_mut().for_each(|g| *g /= m);
    Ok(grad)
}

fn accumulate_grad(terms: &Terms, values: &[f64], weight: f64, grad: &mut [f64]) {
    for &k in &terms.fail {
        grad[k as usize] -= weight;
    }
    if !terms.success.is_empty() {
        let s: f64 = terms.success.iter().map(|&k| values[k as usize]).sum();
        let share = weight / s.max(MIN_INFECTOR_SUM).exp_m1();
        for &k in &terms.success {
            grad[k as usize] += share;
        }
    }
}

/// Per-node log-likelihood under delay distributions.
pub fn gen_node_loglik(theta: &GenThetaVector, t: &Cascade) -> Result<f64> {
    Ok(delayed_terms(theta.target, &theta.candidates, theta.horizon, t, None)?
        .map_or(0.0, |terms| eval_terms(&terms, &theta.values)))
}

pub fn gen_total_loglik(thetas: &[GenThetaVector], p_init: f64, t: &Cascade, n: usize) -> Result<f64> {
    check_thetas(thetas, n, |th| th.target)?;
    let mut total = seed_loglik(p_init, t.seed_count(), n);
    for th in thetas {
        total += gen_node_loglik(th, t)?;
    }
    Ok(total)
}

/// Gradient of the mean delayed-model node log-likelihood, aligned with
/// `theta.values()`.
pub fn gen_node_grad(theta: &GenThetaVector, cs: &CascadeSet) -> Result<Vec<f64>> {
    let mut grad = vec![0.0; theta.values.len()];
    for (u, c) in cs.cascades().iter().enumerate() {
        if let Some(terms) = delayed_terms(theta.target, &theta.candidates, theta.horizon, c, Some(u))? {
            accumulate_grad(&terms, &theta.values, 1.0, &mut grad);
        }
    }
    let m = cs.len().max(1) as f64;
    grad.iter_mut().for_each(|g| *g /= m);
    Ok(grad)
}

/// A cascade set reduced to the distinct contribution patterns of one
/// target node, with multiplicities. Cascades contributing nothing (target
/// is a seed, or uninfected with no infected candidate) are dropped.
#[derive(Debug, Clone)]
pub struct NodeObservations {
    dim: usize,
    cascades: usize,
    patterns: Vec<(Terms, f64)>,
}

impl NodeObservations {
    pub fn one_step(target: NodeId, candidates: &[NodeId], cs: &CascadeSet) -> Result<Self> {
        check_candidates(target, candidates)?;
        Self::collect(candidates.len(), cs, |c, u| one_step_terms(target, candidates, c, Some(u)))
    }

    pub fn delayed(target: NodeId, candidates: &[NodeId], horizon: usize, cs: &CascadeSet) -> Result<Self> {
        check_candidates(target, candidates)?;
        if horizon == 0 {
            return Err(Error::InvalidParameter("delay horizon must be >= 1".into()));
        }
        Self::collect(candidates.len() * horizon, cs, |c, u| {
            delayed_terms(target, candidates, horizon, c, Some(u))
        })
    }

    fn collect<F>(dim: usize, cs: &CascadeSet, mut terms_of: F) -> Result<Self>
    where
        F: FnMut(&Cascade, usize) -> Result<Option<Terms>>,
    {
        let mut counts: BTreeMap<Terms, usize> = BTreeMap::new();
        for (u, c) in cs.cascades().iter().enumerate() {
            if let Some(terms) = terms_of(c, u)? {
                if !(terms.fail.is_empty() && terms.success.is_empty()) {
                    *counts.entry(terms).or_default() += 1;
                }
            }
        }
        Ok(Self {
            dim,
            cascades: cs.len(),
            patterns: counts.into_iter().map(|(t, c)| (t, c as f64)).collect(),
        })
    }

    /// Number of parameters.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of cascades summarized, including those contributing nothing.
    pub fn cascade_count(&self) -> usize {
        self.cascades
    }

    pub fn pattern_count(&self) -> usize {
        self.patterns.len()
    }

    /// `Σ_u ℒ_i(t^u; x)` with infector sums floored at [`MIN_INFECTOR_SUM`].
    pub fn objective(&self, x: &[f64]) -> f64 {
        self.patterns
            .iter()
            .map(|(terms, count)| {
                let fail: f64 = terms.fail.iter().map(|&k| x[k as usize]).sum();
                let succ = if terms.success.is_empty() {
                    0.0
                } else {
                    let s: f64 = terms.success.iter().map(|&k| x[k as usize]).sum();
                    log1mexp(s.max(MIN_INFECTOR_SUM))
                };
                count * (succ - fail)
            })
            .sum()
    }

    /// Gradient of [`Self::objective`].
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut grad = vec![0.0; self.dim];
        for (terms, count) in &self.patterns {
            accumulate_grad(terms, x, *count, &mut grad);
        }
        grad
    }
}

/// Exact `P[T_i > T_j ; T_k != T_j for every parent k of i]`, which equals
/// `-∇_j L(θ*)` for the expected node log-likelihood at the true parameters.
/// Computed by exhaustive branching over the cascade's step transitions;
/// limited to `n <= 5`.
pub fn expected_grad_probability(g: &WeightedDigraph, p_init: f64, i: NodeId, j: NodeId) -> Result<f64> {
    if g.n() > 5 {
        return Err(Error::TooLarge(format!("exact enumeration limited to n <= 5, got {}", g.n())));
    }
    if i >= g.n() || j >= g.n() || i == j {
        return Err(Error::InvalidParameter(format!("invalid node pair ({i}, {j})")));
    }
    if !(0.0..=1.0).contains(&p_init) {
        return Err(Error::InvalidParameter(format!("p_init {p_init} outside [0, 1]")));
    }
    let parents = g.parent_set(i);
    let prob = transition_law(g, p_init)
        .into_iter()
        .filter(|(t, _)| {
            t[j].is_finite() && t[i] > t[j] && parents.iter().all(|&k| t[k] != t[j])
        })
        .map(|(_, p)| p)
        .sum();
    Ok(prob)
}

/// Joint law of the infection-time vector, built by branching on which
/// susceptible nodes the currently active set infects at each step.
pub(crate) fn transition_law(g: &WeightedDigraph, p_init: f64) -> BTreeMap<Vec<InfectionTime>, f64> {
    let n = g.n();
    let mut law = BTreeMap::new();
    for mask in 0u32..(1 << n) {
        let seeds: Vec<NodeId> = (0..n).filter(|&k| mask >> k & 1 == 1).collect();
        let prob = seed_loglik(p_init, seeds.len(), n).exp();
        if prob == 0.0 {
            continue;
        }
        let mut times = vec![InfectionTime::Never; n];
        for &s in &seeds {
            times[s] = InfectionTime::At(0);
        }
        branch(g, &mut times, seeds, 0, prob, &mut law);
    }
    law
}

fn branch(
    g: &WeightedDigraph,
    times: &mut Vec<InfectionTime>,
    active: Vec<NodeId>,
    t: u32,
    prob: f64,
    law: &mut BTreeMap<Vec<InfectionTime>, f64>,
) {
    if active.is_empty() {
        *law.entry(times.clone()).or_default() += prob;
        return;
    }
    let exposed: Vec<(NodeId, f64)> = (0..g.n())
        .filter(|&i| times[i] == InfectionTime::Never)
        .map(|i| {
            let escape: f64 = active.iter().map(|&j| 1.0 - g.prob(j, i)).product();
            (i, 1.0 - escape)
        })
        .filter(|&(_, q)| q > 0.0)
        .collect();
    for mask in 0u32..(1 << exposed.len()) {
        let mut p = prob;
        let mut next = Vec::new();
        for (b, &(i, q)) in exposed.iter().enumerate() {
            if mask >> b & 1 == 1 {
                p *= q;
                next.push(i);
            } else {
                p *= 1.0 - q;
            }
        }
        if p == 0.0 {
            continue;
        }
        for &i in &next {
            times[i] = InfectionTime::At(t + 1);
        }
        branch(g, times, next.clone(), t + 1, p, law);
        for &i in &next {
            times[i] = InfectionTime::Never;
        }
    }
}
