use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{CausalError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    Skeleton,
    Cpdag,
    Dag,
    Digraph,
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphKind::Skeleton => "skeleton",
            GraphKind::Cpdag => "cpdag",
            GraphKind::Dag => "dag",
            GraphKind::Digraph => "digraph",
        })
    }
}

/// Graph over value dimensions with directed and undirected edges.
///
/// Edges are stored by node index; undirected pairs are kept as `(min, max)`.
/// `provenance` carries notes such as orientation conflicts or the
/// tie-breaking used to extend a CPDAG.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CausalGraph {
    nodes: Vec<String>,
    directed: BTreeSet<(usize, usize)>,
    undirected: BTreeSet<(usize, usize)>,
    kind: GraphKind,
    pub provenance: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    nodes: Vec<String>,
    directed_edges: Vec<[String; 2]>,
    undirected_edges: Vec<[String; 2]>,
    kind: GraphKind,
    #[serde(default)]
    provenance: Vec<String>,
}

impl CausalGraph {
    pub fn empty(nodes: Vec<String>, kind: GraphKind) -> Result<Self> {
        let mut seen = BTreeSet::new();
        if let Some(dup) = nodes.iter().find(|n| !seen.insert(n.as_str())) {
            return Err(CausalError::InvalidGraph(format!("duplicate node {dup}")));
        }
        Ok(CausalGraph { nodes, directed: BTreeSet::new(), undirected: BTreeSet::new(), kind, provenance: Vec::new() })
    }

    /// Builds a graph from named edges and checks the kind's invariants.
    pub fn from_edges(
        nodes: Vec<String>,
        directed: &[(&str, &str)],
        undirected: &[(&str, &str)],
        kind: GraphKind,
    ) -> Result<Self> {
        let mut g = CausalGraph::empty(nodes, kind)?;
        for (a, b) in directed {
            let (a, b) = (g.require(a)?, g.require(b)?);
            g.add_directed(a, b)?;
        }
        for (a, b) in undirected {
            let (a, b) = (g.require(a)?, g.require(b)?);
            g.add_undirected(a, b)?;
        }
        g.validate()?;
        Ok(g)
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub(crate) fn set_kind(&mut self, kind: GraphKind) {
        self.kind = kind;
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    pub(crate) fn require(&self, name: &str) -> Result<usize> {
        self.node_index(name).ok_or_else(|| CausalError::UnknownNode(name.to_string()))
    }

    pub fn directed_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.directed.iter().copied()
    }

    pub fn undirected_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.undirected.iter().copied()
    }

    pub fn n_directed(&self) -> usize {
        self.directed.len()
    }

    pub fn n_undirected(&self) -> usize {
        self.undirected.len()
    }

    pub fn named_directed(&self) -> Vec<(String, String)> {
        self.directed.iter().map(|&(a, b)| (self.nodes[a].clone(), self.nodes[b].clone())).collect()
    }

    pub fn named_undirected(&self) -> Vec<(String, String)> {
        self.undirected.iter().map(|&(a, b)| (self.nodes[a].clone(), self.nodes[b].clone())).collect()
    }

    pub fn add_directed(&mut self, from: usize, to: usize) -> Result<()> {
        self.check_pair(from, to)?;
        self.directed.insert((from, to));
        Ok(())
    }

    pub fn add_undirected(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_pair(a, b)?;
        self.undirected.insert((a.min(b), a.max(b)));
        Ok(())
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<()> {
        if a == b {
            return Err(CausalError::InvalidGraph(format!("self-loop on {}", self.nodes.get(a).map_or("?", |s| s))));
        }
        if a >= self.nodes.len() || b >= self.nodes.len() {
            return Err(CausalError::InvalidGraph("edge endpoint out of range".into()));
        }
        Ok(())
    }

    pub(crate) fn remove_undirected(&mut self, a: usize, b: usize) -> bool {
        self.undirected.remove(&(a.min(b), a.max(b)))
    }

    pub(crate) fn remove_directed(&mut self, a: usize, b: usize) -> bool {
        self.directed.remove(&(a, b))
    }

    /// Replaces the undirected edge `a–b` by `a→b`.
    pub(crate) fn orient(&mut self, from: usize, to: usize) {
        if self.remove_undirected(from, to) {
            self.directed.insert((from, to));
        }
    }

    pub fn has_directed(&self, a: usize, b: usize) -> bool {
        self.directed.contains(&(a, b))
    }

    pub fn has_undirected(&self, a: usize, b: usize) -> bool {
        self.undirected.contains(&(a.min(b), a.max(b)))
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.has_directed(a, b) || self.has_directed(b, a) || self.has_undirected(a, b)
    }

    pub fn parents(&self, v: usize) -> Vec<usize> {
        self.directed.iter().filter(|&&(_, b)| b == v).map(|&(a, _)| a).collect()
    }

    pub fn children(&self, v: usize) -> Vec<usize> {
        self.directed.range((v, 0)..(v + 1, 0)).map(|&(_, b)| b).collect()
    }

    pub fn undirected_neighbors(&self, v: usize) -> Vec<usize> {
        self.undirected
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    /// All nodes adjacent to `v` by any edge type, ascending.
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: BTreeSet<usize> = self.parents(v).into_iter().collect();
        out.extend(self.children(v));
        out.extend(self.undirected_neighbors(v));
        out.into_iter().collect()
    }

    /// Unordered adjacent pairs `(min, max)` regardless of edge type.
    pub fn skeleton_pairs(&self) -> BTreeSet<(usize, usize)> {
        self.directed.iter().map(|&(a, b)| (a.min(b), a.max(b))).chain(self.undirected.iter().copied()).collect()
    }

    /// Unshielded colliders `(i, k, j)` with `i < j`, `i→k←j`, `i` and `j` non-adjacent.
    pub fn v_structures(&self) -> BTreeSet<(usize, usize, usize)> {
        let mut out = BTreeSet::new();
        for k in 0..self.nodes.len() {
            let parents = self.parents(k);
            for (x, &i) in parents.iter().enumerate() {
                for &j in &parents[x + 1..] {
                    if !self.adjacent(i, j) {
                        out.insert((i.min(j), k, i.max(j)));
                    }
                }
            }
        }
        out
    }

    /// Topological order of the directed part, or `None` when it has a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.nodes.len();
        let mut indegree = vec![0usize; n];
        for &(_, b) in &self.directed {
            indegree[b] += 1;
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for c in self.children(v) {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    queue.push_back(c);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    pub fn has_directed_cycle(&self) -> bool {
        self.topological_order().is_none()
    }

    /// Checks the invariants implied by the graph kind.
    pub fn validate(&self) -> Result<()> {
        for &(a, b) in &self.undirected {
            if self.directed.contains(&(a, b)) || self.directed.contains(&(b, a)) {
                return Err(CausalError::InvalidGraph(format!(
                    "{}–{} is both directed and undirected",
                    self.nodes[a], self.nodes[b]
                )));
            }
        }
        match self.kind {
            GraphKind::Skeleton if !self.directed.is_empty() => {
                Err(CausalError::InvalidGraph("skeleton with directed edges".into()))
            }
            GraphKind::Dag if !self.undirected.is_empty() => {
                Err(CausalError::InvalidGraph("dag with undirected edges".into()))
            }
            GraphKind::Dag | GraphKind::Cpdag if self.has_directed_cycle() => Err(CausalError::Cyclic),
            GraphKind::Dag | GraphKind::Cpdag => {
                for &(a, b) in &self.directed {
                    if self.directed.contains(&(b, a)) {
                        return Err(CausalError::Cyclic);
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn require_directed_kind(&self) -> Result<()> {
        match self.kind {
            GraphKind::Dag | GraphKind::Digraph => Ok(()),
            other => Err(CausalError::WrongKind { expected: "dag or digraph", found: other }),
        }
    }

    fn reach_from(&self, v: usize) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = self.children(v);
        while let Some(x) = stack.pop() {
            if !seen[x] {
                seen[x] = true;
                stack.extend(self.children(x));
            }
        }
        seen
    }

    /// Nodes reachable from `v` by at least one directed step. `v` itself is
    /// included only when it lies on a directed cycle.
    pub fn successors(&self, v: &str) -> Result<BTreeSet<String>> {
        self.require_directed_kind()?;
        let idx = self.require(v)?;
        Ok(self.successor_indices(idx).into_iter().map(|i| self.nodes[i].clone()).collect())
    }

    /// Nodes that are neither `v` nor reachable from it.
    pub fn nonsuccessors(&self, v: &str) -> Result<BTreeSet<String>> {
        self.require_directed_kind()?;
        let idx = self.require(v)?;
        let suc = self.reach_from(idx);
        Ok((0..self.nodes.len()).filter(|&i| i != idx && !suc[i]).map(|i| self.nodes[i].clone()).collect())
    }

    pub(crate) fn successor_indices(&self, v: usize) -> Vec<usize> {
        let seen = self.reach_from(v);
        (0..self.nodes.len()).filter(|&i| seen[i]).collect()
    }

    /// Graph with the same edges re-indexed onto `nodes`, which must contain
    /// every current node.
    pub fn with_nodes(&self, nodes: Vec<String>) -> Result<Self> {
        let mut g = CausalGraph::empty(nodes, self.kind)?;
        for (a, b) in self.named_directed() {
            let (a, b) = (g.require(&a)?, g.require(&b)?);
            g.add_directed(a, b)?;
        }
        for (a, b) in self.named_undirected() {
            let (a, b) = (g.require(&a)?, g.require(&b)?);
            g.add_undirected(a, b)?;
        }
        if let Some(missing) = self.nodes.iter().find(|n| g.node_index(n).is_none()) {
            return Err(CausalError::UnknownNode(missing.clone()));
        }
        g.provenance = self.provenance.clone();
        Ok(g)
    }

    pub fn to_json(&self) -> String {
        let file = GraphFile {
            nodes: self.nodes.clone(),
            directed_edges: self.named_directed().into_iter().map(|(a, b)| [a, b]).collect(),
            undirected_edges: self.named_undirected().into_iter().map(|(a, b)| [a, b]).collect(),
            kind: self.kind,
            provenance: self.provenance.clone(),
        };
        serde_json::to_string_pretty(&file).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text)
            .map_err(|e| CausalError::Parse { offset: e.column(), message: e.to_string() })?;
        let directed: Vec<(&str, &str)> = file.directed_edges.iter().map(|[a, b]| (a.as_str(), b.as_str())).collect();
        let undirected: Vec<(&str, &str)> =
            file.undirected_edges.iter().map(|[a, b]| (a.as_str(), b.as_str())).collect();
        let mut g = CausalGraph::from_edges(file.nodes, &directed, &undirected, file.kind)?;
        g.provenance = file.provenance;
        Ok(g)
    }
}
