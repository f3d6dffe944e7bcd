use std::collections::BTreeSet;

use super::graph::{CausalGraph, GraphKind};
use super::{CausalError, Result};

/// Orients every undirected edge of a CPDAG without creating cycles or new
/// colliders.
///
/// Repeatedly removes a sink whose undirected neighbours are adjacent to all
/// of its other neighbours, orienting those undirected edges into it. Among
/// eligible sinks the largest name is taken first, so an unconstrained `A–B`
/// becomes `A→B`.
pub fn extend_to_dag(cpdag: &CausalGraph) -> Result<CausalGraph> {
    extend(cpdag, true)
}

/// Like [`extend_to_dag`], but when no consistent extension exists the
/// remaining edges are oriented into the largest-named sink anyway, which
/// may add colliders. The fallback is noted in the provenance.
pub fn extend_to_dag_lenient(cpdag: &CausalGraph) -> Result<CausalGraph> {
    extend(cpdag, false)
}

fn extend(cpdag: &CausalGraph, strict: bool) -> Result<CausalGraph> {
    if cpdag.kind() != GraphKind::Cpdag {
        return Err(CausalError::WrongKind { expected: "cpdag", found: cpdag.kind() });
    }
    cpdag.validate()?;
    let n = cpdag.n_nodes();
    let mut out = cpdag.clone();
    let mut alive: BTreeSet<usize> = (0..n).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| cpdag.nodes()[b].cmp(&cpdag.nodes()[a]));

    let mut relaxed = false;
    while !alive.is_empty() {
        let is_sink = |x: usize| !cpdag.children(x).iter().any(|c| alive.contains(c));
        let mut eligible = order.iter().copied().filter(|v| alive.contains(v)).find(|&x| {
            if !is_sink(x) {
                return false;
            }
            let nbrs: Vec<usize> = cpdag.neighbors(x).into_iter().filter(|v| alive.contains(v)).collect();
            cpdag
                .undirected_neighbors(x)
                .into_iter()
                .filter(|y| alive.contains(y))
                .all(|y| nbrs.iter().all(|&z| z == y || cpdag.adjacent(y, z)))
        });
        if eligible.is_none() && !strict {
            eligible = order.iter().copied().find(|&v| alive.contains(&v) && is_sink(v));
            relaxed = true;
        }
        let Some(x) = eligible else {
            let stuck: Vec<&str> = alive.iter().map(|&v| cpdag.nodes()[v].as_str()).collect();
            return Err(CausalError::NotExtendable(format!("no admissible sink among {}", stuck.join(", "))));
        };
        for y in cpdag.undirected_neighbors(x) {
            if alive.contains(&y) {
                out.orient(y, x);
            }
        }
        alive.remove(&x);
    }
    out.set_kind(GraphKind::Dag);
    if relaxed {
        out.provenance.push(
            "no consistent extension; some edges oriented into the largest-name sink, colliders may be added".into(),
        );
    } else if cpdag.n_undirected() > 0 {
        out.provenance.push("undirected edges oriented by consistent extension, largest-name sink first".into());
    }
    out.validate()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(nodes: &[&str], directed: &[(&str, &str)], undirected: &[(&str, &str)]) -> CausalGraph {
        CausalGraph::from_edges(nodes.iter().map(|s| s.to_string()).collect(), directed, undirected, GraphKind::Cpdag)
            .unwrap()
    }

    #[test]
    fn single_edge_breaks_tie_by_name() {
        let g = extend_to_dag(&graph(&["A", "B"], &[], &[("A", "B")])).unwrap();
        assert_eq!(g.named_directed(), vec![("A".to_string(), "B".to_string())]);
        let g = extend_to_dag(&graph(&["B", "A"], &[], &[("A", "B")])).unwrap();
        assert_eq!(g.named_directed(), vec![("A".to_string(), "B".to_string())]);
    }

    #[test]
    fn directed_input_is_identity() {
        let input = graph(&["A", "B", "C"], &[("A", "B"), ("C", "B")], &[]);
        let g = extend_to_dag(&input).unwrap();
        assert_eq!(g.named_directed(), input.named_directed());
        assert!(g.provenance.is_empty());
    }

    #[test]
    fn chordless_four_cycle_is_not_extendable() {
        let input = graph(&["A", "B", "C", "D"], &[], &[("A", "B"), ("B", "C"), ("C", "D"), ("A", "D")]);
        assert!(matches!(extend_to_dag(&input), Err(CausalError::NotExtendable(_))));
        let forced = extend_to_dag_lenient(&input).unwrap();
        assert_eq!(forced.n_directed(), 4);
        assert!(forced.provenance[0].starts_with("no consistent extension"));
    }
}
