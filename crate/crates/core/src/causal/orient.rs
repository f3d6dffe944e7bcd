use std::collections::BTreeSet;

use super::graph::{CausalGraph, GraphKind};
use super::pc::SepSets;
use super::{CausalError, Result};

/// Whether `to` can reach `from` along directed edges, so that adding
/// `from→to` would close a cycle.
fn closes_cycle(g: &CausalGraph, from: usize, to: usize) -> bool {
    let mut seen = vec![false; g.n_nodes()];
    let mut stack = vec![to];
    while let Some(x) = stack.pop() {
        if x == from {
            return true;
        }
        if !seen[x] {
            seen[x] = true;
            stack.extend(g.children(x));
        }
    }
    false
}

/// Orientation phase of PC: colliders from separating sets, then Meek rules.
///
/// When two colliders demand opposite directions on one edge the edge stays
/// undirected; a collider orientation that would close a directed cycle is
/// skipped. Both cases are noted in the graph's provenance.
pub fn orient_cpdag(skeleton: &CausalGraph, sepsets: &SepSets) -> Result<CausalGraph> {
    if skeleton.kind() != GraphKind::Skeleton {
        return Err(CausalError::WrongKind { expected: "skeleton", found: skeleton.kind() });
    }
    let mut g = skeleton.clone();
    let n = g.n_nodes();
    let mut wanted: BTreeSet<(usize, usize)> = BTreeSet::new();
    for k in 0..n {
        let nb = g.undirected_neighbors(k);
        for (x, &i) in nb.iter().enumerate() {
            for &j in &nb[x + 1..] {
                if g.adjacent(i, j) {
                    continue;
                }
                let separated_by_k = sepsets.get(i, j).is_some_and(|s| s.contains(&k));
                if !separated_by_k {
                    wanted.insert((i, k));
                    wanted.insert((j, k));
                }
            }
        }
    }
    let names = g.nodes().to_vec();
    for &(a, b) in &wanted {
        if wanted.contains(&(b, a)) {
            if a < b {
                g.provenance.push(format!("conflicting colliders on {}–{}; left undirected", names[a], names[b]));
            }
            continue;
        }
        if closes_cycle(&g, a, b) {
            g.provenance.push(format!("collider {}→{} would close a cycle; skipped", names[a], names[b]));
            continue;
        }
        g.orient(a, b);
    }
    apply_meek_rules(&mut g);
    g.set_kind(GraphKind::Cpdag);
    Ok(g)
}

fn meek_forces(g: &CausalGraph, a: usize, b: usize) -> bool {
    let parents_a = g.parents(a);
    // R1: c→a, c and b non-adjacent
    if parents_a.iter().any(|&c| c != b && !g.adjacent(c, b)) {
        return true;
    }
    // R2: a→c→b
    if g.children(a).iter().any(|&c| g.has_directed(c, b)) {
        return true;
    }
    // R3: a–c→b and a–d→b with c, d non-adjacent
    let und_a = g.undirected_neighbors(a);
    let into_b: Vec<usize> = und_a.iter().copied().filter(|&c| g.has_directed(c, b)).collect();
    for (x, &c) in into_b.iter().enumerate() {
        if into_b[x + 1..].iter().any(|&d| !g.adjacent(c, d)) {
            return true;
        }
    }
    // R4: a–c, c→d→b, a adjacent to d, c and b non-adjacent
    for &c in &und_a {
        if c == b || g.adjacent(c, b) {
            continue;
        }
        if g.children(c).iter().any(|&d| d != a && g.has_directed(d, b) && g.adjacent(a, d)) {
            return true;
        }
    }
    false
}

/// Applies Meek rules R1–R4 until no undirected edge can be oriented. An
/// edge that the rules force in both directions is left undirected.
pub fn apply_meek_rules(g: &mut CausalGraph) {
    loop {
        let mut changed = false;
        let edges: Vec<(usize, usize)> = g.undirected_edges().collect();
        for (x, y) in edges {
            if !g.has_undirected(x, y) {
                continue;
            }
            let (fwd, back) = (meek_forces(g, x, y), meek_forces(g, y, x));
            let (a, b) = match (fwd, back) {
                (true, false) => (x, y),
                (false, true) => (y, x),
                _ => continue,
            };
            if !closes_cycle(g, a, b) {
                g.orient(a, b);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
}
