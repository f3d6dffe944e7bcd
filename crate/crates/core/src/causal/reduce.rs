use super::graph::{CausalGraph, GraphKind};
use super::{CausalError, Result};

/// `reach[u][v]` is true when `v` is reachable from `u` in one or more
/// directed steps.
pub fn reachability(graph: &CausalGraph) -> Vec<Vec<bool>> {
    let n = graph.n_nodes();
    (0..n)
        .map(|u| {
            let suc = graph.successor_indices(u);
            let mut row = vec![false; n];
            for v in suc {
                row[v] = true;
            }
            row
        })
        .collect()
}

/// Minimal subgraph with the same reachability. Accepts a DAG, or a digraph
/// without cycles; the result is a DAG.
pub fn transitive_reduction(graph: &CausalGraph) -> Result<CausalGraph> {
    match graph.kind() {
        GraphKind::Dag | GraphKind::Digraph => {}
        other => return Err(CausalError::WrongKind { expected: "dag", found: other }),
    }
    if graph.has_directed_cycle() {
        return Err(CausalError::Cyclic);
    }
    let reach = reachability(graph);
    let mut out = graph.clone();
    for (u, v) in graph.directed_edges() {
        let bypass = graph.children(u).into_iter().any(|w| w != v && reach[w][v]);
        if bypass {
            out.remove_directed(u, v);
        }
    }
    out.set_kind(GraphKind::Dag);
    Ok(out)
}
