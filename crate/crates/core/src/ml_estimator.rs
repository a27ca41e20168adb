//! Per-node maximum-likelihood estimation of parental neighborhoods:
//! projected gradient ascent of the empirical node log-likelihood over the
//! box `[0, θ_max]`, followed by thresholding at `η`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cascade::CascadeSet;
use crate::error::{Error, Result};
use crate::graph::{NodeId, SuperGraph};
use crate::likelihood::{GenThetaVector, NodeObservations, ThetaVector};

const ARMIJO_SLOPE: f64 = 1e-4;
const SHRINK: f64 = 0.5;
const MIN_STEP: f64 = 1e-30;
const FLAT_ROUNDS: usize = 5;
const EPSILON_INIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    ZerosPlusEpsilon,
    Constant(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlConfig {
    pub eta: f64,
    pub max_iters: usize,
    pub tol: f64,
    pub theta_cap: f64,
    pub init: Init,
}

impl Default for MlConfig {
    fn default() -> Self {
        Self {
            eta: 0.1,
            max_iters: 20_000,
            tol: 1e-8,
            theta_cap: 13.8,
            init: Init::Constant(1e-3),
        }
    }
}

impl MlConfig {
    pub fn with_eta(eta: f64) -> Self {
        Self { eta, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidParameter(format!("eta must be >= 0, got {}", self.eta)));
        }
        if !(self.theta_cap > self.eta && self.theta_cap.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "theta_cap {} must be finite and exceed eta {}",
                self.theta_cap, self.eta
            )));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidParameter(format!("tol must be > 0, got {}", self.tol)));
        }
        if let Init::Constant(c) = self.init {
            if !(c.is_finite() && c >= 0.0) {
                return Err(Error::InvalidParameter(format!("init constant {c} must be >= 0")));
            }
        }
        Ok(())
    }

    fn start_value(&self) -> f64 {
        let v = match self.init {
            Init::ZerosPlusEpsilon => EPSILON_INIT,
            Init::Constant(c) => c,
        };
        v.clamp(0.0, self.theta_cap)
    }
}

/// `½ ln(1 + α p_min / 8)`, the largest threshold for which the recovery
/// guarantee holds; `None` without correlation decay.
pub fn exact_recovery_eta(alpha: f64, p_min: f64) -> Option<f64> {
    (alpha > 0.0 && alpha <= 1.0 && p_min > 0.0).then(|| 0.5 * (alpha * p_min / 8.0).ln_1p())
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodEstimate {
    pub target: NodeId,
    /// One-step parameters; for the delayed model, per-candidate totals `Σ_τ θ^τ`.
    pub theta_hat: ThetaVector,
    pub delay_theta: Option<GenThetaVector>,
    pub selected: Vec<NodeId>,
    pub eta: f64,
    pub iterations: usize,
    /// Mean node log-likelihood at `theta_hat`.
    pub objective: f64,
    pub converged: bool,
}

impl NeighborhoodEstimate {
    pub fn to_json(&self) -> Value {
        let theta: serde_json::Map<String, Value> = self
            .theta_hat
            .candidates()
            .iter()
            .zip(self.theta_hat.values())
            .map(|(j, v)| (j.to_string(), json!(v)))
            .collect();
        json!({
            "node": self.target,
            "selected": self.selected,
            "theta": theta,
            "converged": self.converged,
            "iters": self.iterations,
        })
    }
}

/// Result of the box-constrained ascent; `history` holds accepted objective
/// values when recording was requested.
#[derive(Debug, Clone)]
pub struct Ascent {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<f64>,
}

fn project(v: f64, cap: f64) -> f64 {
    v.clamp(0.0, cap)
}

pub fn ascend(obs: &NodeObservations, cfg: &MlConfig, record: bool) -> Ascent {
    let dim = obs.dim();
    let scale = 1.0 / obs.cascade_count().max(1) as f64;
    let f = |x: &[f64]| obs.objective(x) * scale;
    let grad = |x: &[f64]| {
        let mut g = obs.gradient(x);
        g.iter_mut().for_each(|v| *v *= scale);
        g
    };

    let mut x = vec![cfg.start_value(); dim];
    let mut fx = f(&x);
    let mut history = if record { vec![fx] } else { Vec::new() };
    let mut flat = 0;
    let mut iterations = 0;
    let mut converged = false;
    let mut trial = vec![0.0; dim];

    while iterations < cfg.max_iters {
        let g = grad(&x);
        let pg_norm = x
            .iter()
            .zip(&g)
            .map(|(xi, gi)| (project(xi + gi, cfg.theta_cap) - xi).powi(2))
            .sum::<f64>()
            .sqrt();
        if pg_norm <= cfg.tol * (1.0 + fx.abs()) {
            converged = true;
            break;
        }

        let mut step = 1.0;
        let accepted = loop {
            for k in 0..dim {
                trial[k] = project(x[k] + step * g[k], cfg.theta_cap);
            }
            let ft = f(&trial);
            let gain: f64 = g.iter().zip(trial.iter().zip(&x)).map(|(gk, (t, xk))| gk * (t - xk)).sum();
            if ft.is_finite() && ft >= fx + ARMIJO_SLOPE * gain {
                break Some(ft);
            }
            step *= SHRINK;
            if step < MIN_STEP {
                break None;
            }
        };
        iterations += 1;
        let Some(ft) = accepted else {
            // No representable ascent step remains.
            converged = true;
            break;
        };
        debug_assert!(ft >= fx);
        let rel = (ft - fx).abs() / fx.abs().max(1.0);
        std::mem::swap(&mut x, &mut trial);
        fx = ft;
        if record {
            history.push(fx);
        }
        flat = if rel < cfg.tol { flat + 1 } else { 0 };
        if flat >= FLAT_ROUNDS {
            converged = true;
            break;
        }
    }
    Ascent {
        x,
        objective: fx,
        iterations,
        converged,
        history,
    }
}

fn check_inputs(i: NodeId, candidates: &[NodeId], cs: &CascadeSet, cfg: &MlConfig) -> Result<()> {
    cfg.validate()?;
    if cs.is_empty() {
        return Err(Error::InvalidParameter("cascade set is empty".into()));
    }
    if i >= cs.n() || candidates.iter().any(|&j| j >= cs.n()) {
        return Err(Error::InvalidParameter(format!("node ids must be < {}", cs.n())));
    }
    Ok(())
}

fn threshold(candidates: &[NodeId], scores: &[f64], eta: f64) -> Vec<NodeId> {
    candidates
        .iter()
        .zip(scores)
        .filter(|(_, &s)| s >= eta)
        .map(|(&j, _)| j)
        .collect()
}

/// Estimates the parents of `i` among `candidates` (strictly increasing).
pub fn solve_node(i: NodeId, candidates: &[NodeId], cs: &CascadeSet, cfg: &MlConfig) -> Result<NeighborhoodEstimate> {
    check_inputs(i, candidates, cs, cfg)?;
    let obs = NodeObservations::one_step(i, candidates, cs)?;
    let run = ascend(&obs, cfg, false);
    let selected = threshold(candidates, &run.x, cfg.eta);
    Ok(NeighborhoodEstimate {
        target: i,
        theta_hat: ThetaVector::new(i, candidates.to_vec(), run.x)?,
        delay_theta: None,
        selected,
        eta: cfg.eta,
        iterations: run.iterations,
        objective: run.objective,
        converged: run.converged,
    })
}

/// Solves every node of the supergraph independently, in parallel.
/// Entry `i` of the result belongs to node `i`.
pub fn solve_all(g_super: &SuperGraph, cs: &CascadeSet, cfg: &MlConfig) -> Vec<Result<NeighborhoodEstimate>> {
    (0..g_super.n())
        .into_par_iter()
        .map(|i| solve_node(i, g_super.candidates(i), cs, cfg))
        .collect()
}

/// Estimates delay-resolved parameters `θ^τ`, `τ = 1..=horizon`; `j` is
/// selected when `Σ_τ θ̂^τ_j >= η`.
pub fn solve_node_generalized(
    i: NodeId,
    candidates: &[NodeId],
    horizon: usize,
    cs: &CascadeSet,
    cfg: &MlConfig,
) -> Result<NeighborhoodEstimate> {
    check_inputs(i, candidates, cs, cfg)?;
    let obs = NodeObservations::delayed(i, candidates, horizon, cs)?;
    let run = ascend(&obs, cfg, false);
    let totals: Vec<f64> = run.x.chunks(horizon).map(|c| c.iter().sum()).collect();
    let selected = threshold(candidates, &totals, cfg.eta);
    Ok(NeighborhoodEstimate {
        target: i,
        theta_hat: ThetaVector::new(i, candidates.to_vec(), totals)?,
        delay_theta: Some(GenThetaVector::new(i, candidates.to_vec(), horizon, run.x)?),
        selected,
        eta: cfg.eta,
        iterations: run.iterations,
        objective: run.objective,
        converged: run.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::{simulate, simulate_generalized, Cascade, DelayKernel, ModelTag, Provenance};
    use crate::graph::{generate, EdgeProbLaw, GraphKind, WeightedDigraph};

    fn others(n: usize, i: usize) -> Vec<usize> {
        (0..n).filter(|&j| j != i).collect()
    }

    #[test]
    fn config_validation() {
        assert!(MlConfig::default().validate().is_ok());
        assert!(MlConfig { eta: -1.0, ..Default::default() }.validate().is_err());
        assert!(MlConfig { theta_cap: 0.05, eta: 0.1, ..Default::default() }.validate().is_err());
        assert!(MlConfig { tol: 0.0, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn recovery_eta_values() {
        assert!((exact_recovery_eta(0.5, 0.5).unwrap() - 0.5 * (1.0f64 + 0.5 * 0.5 / 8.0).ln()).abs() < 1e-15);
        assert!(exact_recovery_eta(-1.0, 0.5).is_none());
    }

    #[test]
    fn degenerate_objective_keeps_init() {
        let cs = CascadeSet::new(
            3,
            vec![Cascade::default(), Cascade::new([(2, 0)]).unwrap()],
            Provenance { seed: None, model: ModelTag::External },
        )
        .unwrap();
        let est = solve_node(0, &[1], &cs, &MlConfig::default()).unwrap();
        assert!(est.converged);
        assert_eq!(est.theta_hat.values(), &[1e-3]);
        assert!(est.selected.is_empty());
        assert_eq!(est.iterations, 0);
    }

    #[test]
    fn empty_cascades_rejected() {
        let cs = CascadeSet::new(2, vec![], Provenance { seed: None, model: ModelTag::External }).unwrap();
        assert!(solve_node(1, &[0], &cs, &MlConfig::default()).is_err());
        assert!(solve_node_generalized(1, &[0], 2, &cs, &MlConfig::default()).is_err());
    }

    #[test]
    fn two_node_recovery() {
        let g = WeightedDigraph::from_edges(2, [(0, 1, 0.8)]).unwrap();
        let cs = simulate(&g, 0.3, 20_000, 5).unwrap();
        let cfg = MlConfig::with_eta(0.1);
        let b = solve_node(1, &[0], &cs, &cfg).unwrap();
        assert_eq!(b.selected, vec![0]);
        assert!(b.converged);
        assert!((b.theta_hat.values()[0] - (0.2f64).ln().abs()).abs() < 0.1);
        let a = solve_node(0, &[1], &cs, &cfg).unwrap();
        assert!(a.selected.is_empty());
    }

    #[test]
    fn ascent_is_monotone_and_feasible() {
        let g = generate(GraphKind::ErdosRenyi { n: 8, p_edge: 0.3 }, EdgeProbLaw::Uniform { lo: 0.2, hi: 0.9 }, 11).unwrap();
        let cs = simulate(&g, 0.2, 2000, 3).unwrap();
        let cfg = MlConfig::default();
        for i in 0..8 {
            let obs = NodeObservations::one_step(i, &others(8, i), &cs).unwrap();
            let run = ascend(&obs, &cfg, true);
            assert!(run.converged);
            assert!(run.history.windows(2).all(|w| w[1] >= w[0]));
            assert!(run.x.iter().all(|&v| (0.0..=cfg.theta_cap).contains(&v)));
        }
    }

    #[test]
    fn solver_beats_grid_search() {
        let g = WeightedDigraph::from_edges(4, [(0, 3, 0.5), (1, 3, 0.3), (2, 1, 0.6)]).unwrap();
        let cs = simulate(&g, 0.3, 60, 17).unwrap();
        for cands in [vec![0, 1], vec![0, 1, 2]] {
            let obs = NodeObservations::one_step(3, &cands, &cs).unwrap();
            let est = solve_node(3, &cands, &cs, &MlConfig::default()).unwrap();
            let k = cands.len();
            let m = cs.len() as f64;
            let mut best = f64::NEG_INFINITY;
            let mut x = vec![0.0; k];
            let steps = 301usize;
            for code in 0..steps.pow(k as u32) {
                let mut c = code;
                for v in x.iter_mut() {
                    *v = (c % steps) as f64 * 0.01;
                    c /= steps;
                }
                best = best.max(obs.objective(&x) / m);
            }
            assert!(est.objective >= best - 1e-6, "{} vs {}", est.objective, best);
        }
    }

    #[test]
    fn solve_all_matches_solve_node() {
        let g = generate(GraphKind::RandomTree { n: 10, max_children: 3 }, EdgeProbLaw::Constant(0.5), 2).unwrap();
        let cs = simulate(&g, 0.1, 3000, 4).unwrap();
        let sg = SuperGraph::full(10);
        let cfg = MlConfig::default();
        let all = solve_all(&sg, &cs, &cfg);
        for (i, r) in all.into_iter().enumerate() {
            assert_eq!(r.unwrap(), solve_node(i, sg.candidates(i), &cs, &cfg).unwrap());
        }
        let one = solve_all(&SuperGraph::full(1), &simulate(&WeightedDigraph::empty(1), 0.5, 5, 0).unwrap(), &cfg);
        assert!(one[0].as_ref().unwrap().selected.is_empty());
    }

    #[test]
    fn generalized_horizon_one_matches() {
        let g = generate(GraphKind::ErdosRenyi { n: 6, p_edge: 0.4 }, EdgeProbLaw::Uniform { lo: 0.3, hi: 0.8 }, 9).unwrap();
        let cs = simulate(&g, 0.2, 3000, 1).unwrap();
        let cfg = MlConfig::with_eta(0.05);
        for i in 0..6 {
            let a = solve_node(i, &others(6, i), &cs, &cfg).unwrap();
            let b = solve_node_generalized(i, &others(6, i), 1, &cs, &cfg).unwrap();
            assert_eq!(a.selected, b.selected);
            assert_eq!(a.theta_hat, b.theta_hat);
        }
    }

    #[test]
    fn generalized_delay_two() {
        let k = DelayKernel::new(2, 2, [(0, 1, vec![0.0, 0.7])]).unwrap();
        let cs = simulate_generalized(&k, 0.3, 20_000, 3).unwrap();
        let est = solve_node_generalized(1, &[0], 2, &cs, &MlConfig::with_eta(0.1)).unwrap();
        assert_eq!(est.selected, vec![0]);
        let d = est.delay_theta.unwrap();
        assert!(d.get(0, 1) < 1e-6);
        assert!((d.get(0, 2) - 0.3f64.ln().abs()).abs() < 0.1);
    }

    #[test]
    fn json_shape() {
        let g = WeightedDigraph::from_edges(3, [(0, 2, 0.8)]).unwrap();
        let cs = simulate(&g, 0.3, 500, 5).unwrap();
        let est = solve_node(2, &[0, 1], &cs, &MlConfig::default()).unwrap();
        let v = est.to_json();
        assert_eq!(v["node"], 2);
        assert_eq!(v["selected"], json!([0]));
        assert!(v["theta"]["1"].is_number());
        assert_eq!(v["converged"], true);
    }
}
