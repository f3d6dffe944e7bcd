use rand::seq::SliceRandom;
use rand::Rng;

use crate::causal::{CausalGraph, GraphKind};

/// Random DAG on `n_nodes` named `X00`, `X01`, ...
///
/// Nodes are placed in a random causal order, independent of their names,
/// and each forward pair is joined with probability
/// `min(1, expected_degree / (n_nodes - 1))`, so the mean total degree is
/// `expected_degree` when that is below `n_nodes - 1`.
pub fn random_dag(n_nodes: usize, expected_degree: f64, seed: u64) -> CausalGraph {
    let width = n_nodes.saturating_sub(1).to_string().len().max(2);
    let names: Vec<String> = (0..n_nodes).map(|i| format!("X{i:0width$}")).collect();
    let mut rng = crate::seed::rng(seed, &["random_dag", &n_nodes.to_string()]);
    let mut order: Vec<usize> = (0..n_nodes).collect();
    order.shuffle(&mut rng);
    let p = if n_nodes > 1 { (expected_degree.max(0.0) / (n_nodes - 1) as f64).min(1.0) } else { 0.0 };
    let mut g = CausalGraph::empty(names, GraphKind::Dag).expect("names are unique");
    for a in 0..n_nodes {
        for b in a + 1..n_nodes {
            if rng.random_bool(p) {
                g.add_directed(order[a], order[b]).expect("distinct nodes");
            }
        }
    }
    g
}

/// Random DAG over the nodes of `like` with exactly as many edges, for use
/// as a degree-matched null reference.
pub fn random_dag_like(like: &CausalGraph, seed: u64) -> CausalGraph {
    let n = like.n_nodes();
    let m = like.n_directed() + like.n_undirected();
    let mut rng = crate::seed::rng(seed, &["random_dag_like", &n.to_string(), &m.to_string()]);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let mut g = CausalGraph::empty(like.nodes().to_vec(), GraphKind::Dag).expect("nodes of a valid graph");
    for i in rand::seq::index::sample(&mut rng, pairs.len(), m.min(pairs.len())) {
        let (a, b) = pairs[i];
        g.add_directed(order[a], order[b]).expect("distinct nodes");
    }
    g
}
