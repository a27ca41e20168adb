//! Information-theoretic sample-complexity lower bounds. All logarithms
//! are natural.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// `ln C(n, k)` via log-gamma.
pub fn log_binomial(n: u64, k: u64) -> Result<f64> {
    if k > n {
        return Err(Error::Domain(format!("C({n}, {k}) with k > n")));
    }
    let (n, k) = (n as f64, k as f64);
    Ok(ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0))
}

/// `H̄(α, p)`: `H(T_i) <= p · H̄` for every node of a graph with correlation
/// decay `α`.
pub fn h_bar(alpha: f64, p_init: f64) -> Result<f64> {
    Ok(entropy_bound(alpha, p_init)? / p_init)
}

/// Upper bound on the entropy of one node's infection time:
/// `p/(1-α) (ln(1/p) + ((1-α)/α)² ln(1/(1-α))) - (1 - p/α) ln(1 - p/α)`.
pub fn entropy_bound(alpha: f64, p_init: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(p_init > 0.0 && p_init < (-1.0f64).exp()) {
        return Err(Error::Domain(format!("p_init must lie in (0, 1/e), got {p_init}")));
    }
    if p_init >= alpha {
        return Err(Error::Domain(format!("need p_init / alpha < 1, got {p_init} / {alpha}")));
    }
    let r = (1.0 - alpha) / alpha;
    let q = p_init / alpha;
    Ok(p_init / (1.0 - alpha) * (-p_init.ln() - r * r * (-alpha).ln_1p()) - (1.0 - q) * (-q).ln_1p())
}

/// Fano lower bound `((1 - pe)(log|G| - log|B|) - 1) / Σ_i H(T_i)`.
pub fn fano_m(log_ensemble: f64, log_ball: f64, sum_entropy: f64, pe: f64) -> Result<f64> {
    if sum_entropy.is_nan() || sum_entropy <= 0.0 {
        return Err(Error::Domain(format!("sum of entropies must be > 0, got {sum_entropy}")));
    }
    if !(0.0..=1.0).contains(&pe) {
        return Err(Error::Domain(format!("error probability {pe} outside [0, 1]")));
    }
    if log_ball > log_ensemble {
        return Err(Error::Domain("ball larger than the ensemble".into()));
    }
    Ok(((1.0 - pe) * (log_ensemble - log_ball) - 1.0) / sum_entropy)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub h_bar: f64,
    pub per_node_entropy_bound: f64,
    /// Leading-order log ensemble size used by the closed-form bound.
    pub log_ensemble: f64,
    /// Exact `n ln C(·, d)`.
    pub log_ensemble_exact: f64,
    pub log_ball: f64,
    pub m_lower: f64,
}

fn check_pe(pe: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&pe) {
        return Err(Error::Domain(format!("error probability {pe} outside [0, 1]")));
    }
    Ok(())
}

fn closed_form(alpha: f64, p_init: f64, pe: f64, per_node_gap: f64) -> Result<(f64, f64)> {
    let hb = h_bar(alpha, p_init)?;
    Ok((hb, (1.0 - pe) / p_init * (1.0 - alpha) / hb * per_node_gap - 1.0))
}

/// Bound for graphs with in-degree at most `d` and no side information,
/// recovered up to `gamma` edge edits:
/// `((1-pe)/p)((1-α)/H̄)(d ln(n/d) - (γ/n) ln(n²/γ)) - 1`.
pub fn bound_without_supergraph(n: usize, d: usize, gamma: f64, alpha: f64, p_init: f64, pe: f64) -> Result<BoundReport> {
    check_pe(pe)?;
    if d == 0 || d >= n {
        return Err(Error::Domain(format!("need 1 <= d < n, got d = {d}, n = {n}")));
    }
    let pairs = (n * (n - 1) / 2) as f64;
    if !(gamma >= 0.0 && gamma <= pairs) {
        return Err(Error::Domain(format!("gamma must lie in [0, {pairs}], got {gamma}")));
    }
    let nf = n as f64;
    let df = d as f64;
    let log_ball = if gamma > 0.0 { gamma * (nf * nf / gamma).ln() } else { 0.0 };
    let log_ensemble = nf * df * (nf / df).ln();
    let (hb, m_lower) = closed_form(alpha, p_init, pe, df * (nf / df).ln() - log_ball / nf)?;
    Ok(BoundReport {
        h_bar: hb,
        per_node_entropy_bound: p_init * hb,
        log_ensemble,
        log_ensemble_exact: nf * log_binomial(n as u64, d as u64)?,
        log_ball,
        m_lower,
    })
}

/// Bound when each node's parents are known to lie in a candidate set of
/// size `big_d`, with per-node error allowances `s` (one per node):
/// `((1-pe)/p)((1-α)/H̄)(d ln(D/d) - (1/n) Σ_i [s_i ln(eD/s_i) + ln max(s_i, 1)]) - 1`.
pub fn bound_with_supergraph(
    n: usize,
    big_d: usize,
    d: usize,
    s: &[f64],
    alpha: f64,
    p_init: f64,
    pe: f64,
) -> Result<BoundReport> {
    check_pe(pe)?;
    if d == 0 || d > big_d {
        return Err(Error::Domain(format!("need 1 <= d <= D, got d = {d}, D = {big_d}")));
    }
    if s.len() != n {
        return Err(Error::Domain(format!("need {n} error allowances, got {}", s.len())));
    }
    let df = big_d as f64;
    if let Some(bad) = s.iter().find(|&&si| !(si >= 0.0 && si <= df / 2.0)) {
        return Err(Error::Domain(format!(
            "error allowance {bad} outside [0, D/2]; the bound assumes s_i <= D/2"
        )));
    }
    let log_ball: f64 = s
        .iter()
        .filter(|&&si| si > 0.0)
        .map(|&si| si * (std::f64::consts::E * df / si).ln() + si.max(1.0).ln())
        .sum();
    let nf = n as f64;
    let dd = d as f64;
    let (hb, m_lower) = closed_form(alpha, p_init, pe, dd * (df / dd).ln() - log_ball / nf)?;
    Ok(BoundReport {
        h_bar: hb,
        per_node_entropy_bound: p_init * hb,
        log_ensemble: nf * dd * (df / dd).ln(),
        log_ensemble_exact: nf * log_binomial(big_d as u64, d as u64)?,
        log_ball,
        m_lower,
    })
}
