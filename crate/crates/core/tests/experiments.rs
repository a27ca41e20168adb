//! Monte-Carlo sweeps over the graph families used in the recovery figures.

use epigraph::graph::{
    correlation_decay_alpha, embed_supergraph, generate, EdgeProbLaw, GraphKind, SuperGraph, WeightedDigraph,
};
use epigraph::metrics::{recovery_experiment, Method, RecoveryStats};
use epigraph::ml_estimator::{exact_recovery_eta, MlConfig};

fn ml_for(g: &WeightedDigraph) -> Method {
    let eta = exact_recovery_eta(correlation_decay_alpha(g), g.min_prob().unwrap()).unwrap();
    Method::Ml(MlConfig::with_eta(eta))
}

fn sweep(g: &WeightedDigraph, sg: &SuperGraph, p_init: f64, ms: &[usize], trials: usize, method: Method) -> Vec<RecoveryStats> {
    ms.iter()
        .map(|&m| recovery_experiment(g, sg, p_init, m, trials, method, 17).unwrap())
        .collect()
}

/// Smallest swept m whose exact-recovery rate reaches `level`.
fn m_at(ms: &[usize], stats: &[RecoveryStats], level: f64) -> Option<usize> {
    ms.iter().zip(stats).find(|(_, s)| s.exact_success_rate() >= level).map(|(&m, _)| m)
}

#[test]
fn grid_success_rises_with_m() {
    let g = generate(GraphKind::Grid2d { width: 4, height: 4 }, EdgeProbLaw::Constant(0.15), 1).unwrap();
    let ms = [100, 200, 400, 800, 1600];
    let stats = sweep(&g, &SuperGraph::full(16), 0.1, &ms, 30, ml_for(&g));
    let rates: Vec<f64> = stats.iter().map(|s| s.exact_success_rate()).collect();
    assert!(rates.windows(2).filter(|w| w[1] < w[0]).count() <= 1, "{rates:?}");
    assert!(*rates.last().unwrap() >= 0.9, "{rates:?}");
}

#[test]
fn grid_sizes_agree_in_infections_per_node() {
    let ms = [100, 200, 400, 800, 1600];
    let mut needed = Vec::new();
    let mut infections = Vec::new();
    for w in [3, 4, 5] {
        let g = generate(GraphKind::Grid2d { width: w, height: w }, EdgeProbLaw::Constant(0.15), 1).unwrap();
        let stats = sweep(&g, &SuperGraph::full(w * w), 0.1, &ms, 30, ml_for(&g));
        needed.push(m_at(&ms, &stats, 0.9).expect("reaches 90%"));
        infections.push(stats[2].mean_infections_per_node);
    }
    let (lo, hi) = (*needed.iter().min().unwrap(), *needed.iter().max().unwrap());
    assert!(hi <= 2 * lo, "m at 90%: {needed:?}");
    let (lo, hi) = infections.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
    assert!(hi / lo < 1.15, "infections per node at m = 400: {infections:?}");
}

fn greedy_vs_ml(g: &WeightedDigraph, sg: &SuperGraph, p_init: f64, ms: &[usize]) {
    let ml = sweep(g, sg, p_init, ms, 20, ml_for(g));
    let greedy = sweep(g, sg, p_init, ms, 20, Method::Greedy);
    let m_ml = m_at(ms, &ml, 0.9).expect("ML reaches 90%");
    let m_greedy = m_at(ms, &greedy, 0.9).expect("greedy reaches 90%");
    assert!(m_greedy <= m_ml, "greedy {m_greedy} vs ML {m_ml}");
}

#[test]
fn regular_graph_with_candidate_sets() {
    let g = generate(GraphKind::RandomRegular { n: 200, degree: 4 }, EdgeProbLaw::Constant(0.15), 1).unwrap();
    let sg = embed_supergraph(&g, 4, 3).unwrap();
    assert!((0..200).all(|i| sg.candidates(i).len() == 8));
    greedy_vs_ml(&g, &sg, 0.05, &[250, 500, 1000, 2000]);
}

#[test]
fn tree_with_candidate_sets() {
    let g = generate(GraphKind::RandomTree { n: 200, max_children: 3 }, EdgeProbLaw::Constant(0.4), 1).unwrap();
    let parents: Vec<Vec<usize>> = (0..200).map(|i| g.parent_set(i)).collect();
    let sg = embed_supergraph(&g, 7, 3).unwrap();
    assert!(parents.iter().enumerate().all(|(i, p)| p.iter().all(|j| sg.candidates(i).contains(j))));
    greedy_vs_ml(&g, &sg, 0.05, &[125, 250, 500, 1000]);
}
