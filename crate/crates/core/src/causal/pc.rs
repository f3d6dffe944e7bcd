use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use super::ci::{CiTest, PcConfig};
use super::graph::{CausalGraph, GraphKind};
use super::numeric::NumericMatrix;
use super::{CausalError, Result};
use crate::Scalar;

/// Separating sets found during skeleton search, keyed by unordered node
/// index pair `(min, max)` of the skeleton graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SepSets {
    sets: BTreeMap<(usize, usize), BTreeSet<usize>>,
}

impl SepSets {
    pub fn new() -> Self {
        SepSets::default()
    }

    pub fn insert(&mut self, a: usize, b: usize, set: BTreeSet<usize>) {
        assert!(!set.contains(&a) && !set.contains(&b), "separating set contains an endpoint");
        self.sets.insert((a.min(b), a.max(b)), set);
    }

    pub fn get(&self, a: usize, b: usize) -> Option<&BTreeSet<usize>> {
        self.sets.get(&(a.min(b), a.max(b)))
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Named view for reports: `(a, b) -> set`, with `a < b` by index.
    pub fn named(&self, graph: &CausalGraph) -> BTreeMap<(String, String), BTreeSet<String>> {
        let n = graph.nodes();
        self.sets
            .iter()
            .map(|(&(a, b), s)| ((n[a].clone(), n[b].clone()), s.iter().map(|&c| n[c].clone()).collect()))
            .collect()
    }
}

/// Calls `f` on every `k`-subset of `items` in lexicographic order until it
/// returns `Some`.
fn first_subset<R>(items: &[usize], k: usize, mut f: impl FnMut(&[usize]) -> Result<Option<R>>) -> Result<Option<R>> {
    if k > items.len() {
        return Ok(None);
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut subset = vec![0; k];
    loop {
        for (s, &i) in subset.iter_mut().zip(&idx) {
            *s = items[i];
        }
        if let Some(r) = f(&subset)? {
            return Ok(Some(r));
        }
        let Some(pos) = (0..k).rev().find(|&p| idx[p] != p + items.len() - k) else {
            return Ok(None);
        };
        idx[pos] += 1;
        for q in pos + 1..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

/// Looks for a separating set of `(a, b)` of size `level` among the
/// neighbours of `a`, then of `b`.
fn find_sepset<T: Scalar>(
    tester: &dyn CiTest<T>,
    data: &NumericMatrix<T>,
    col: &[usize],
    adj: &[BTreeSet<usize>],
    a: usize,
    b: usize,
    level: usize,
) -> Result<Option<Vec<usize>>> {
    for (x, y) in [(a, b), (b, a)] {
        let pool: Vec<usize> = adj[x].iter().copied().filter(|&v| v != y).collect();
        let found = first_subset(&pool, level, |cond| {
            let cond_cols: Vec<usize> = cond.iter().map(|&c| col[c]).collect();
            let out = tester.test(data, col[a], col[b], &cond_cols)?;
            Ok(out.independent.then(|| cond.to_vec()))
        })?;
        if found.is_some() {
            return Ok(found);
        }
    }
    Ok(None)
}

/// Skeleton phase of the PC algorithm.
///
/// Nodes are ordered by name, pairs and conditioning subsets are visited in
/// lexicographic order. With `stable`, adjacencies are frozen at the start of
/// each level and the pair tests of a level run in parallel.
pub fn pc_skeleton<T: Scalar>(data: &NumericMatrix<T>, config: &PcConfig) -> Result<(CausalGraph, SepSets)> {
    config.validate()?;
    if data.n_columns() < 2 {
        return Err(CausalError::InvalidConfig("need at least two columns".into()));
    }
    let mut col: Vec<usize> = (0..data.n_columns()).collect();
    col.sort_by(|&x, &y| data.names()[x].cmp(&data.names()[y]));
    let nodes: Vec<String> = col.iter().map(|&c| data.names()[c].clone()).collect();
    let n = nodes.len();
    let tester = config.tester::<T>();
    let tester = tester.as_ref();

    let mut adj: Vec<BTreeSet<usize>> = (0..n).map(|v| (0..n).filter(|&u| u != v).collect()).collect();
    let mut sepsets = SepSets::new();

    for level in 0..=config.max_cond_size {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| adj[a].iter().copied().filter(move |&b| b > a).map(move |b| (a, b)))
            .filter(|&(a, b)| adj[a].len() > level || adj[b].len() > level)
            .collect();
        if pairs.is_empty() {
            break;
        }
        if config.stable {
            let frozen = &adj;
            let found: Vec<Option<Vec<usize>>> = pairs
                .par_iter()
                .map(|&(a, b)| find_sepset(tester, data, &col, frozen, a, b, level))
                .collect::<Result<_>>()?;
            for ((a, b), sep) in pairs.into_iter().zip(found) {
                if let Some(sep) = sep {
                    adj[a].remove(&b);
                    adj[b].remove(&a);
                    sepsets.insert(a, b, sep.into_iter().collect());
                }
            }
        } else {
            for (a, b) in pairs {
                if !adj[a].contains(&b) {
                    continue;
                }
                if let Some(sep) = find_sepset(tester, data, &col, &adj, a, b, level)? {
                    adj[a].remove(&b);
                    adj[b].remove(&a);
                    sepsets.insert(a, b, sep.into_iter().collect());
                }
            }
        }
    }

    let mut graph = CausalGraph::empty(nodes, GraphKind::Skeleton)?;
    for a in 0..n {
        for &b in adj[a].iter().filter(|&&b| b > a) {
            graph.add_undirected(a, b)?;
        }
    }
    Ok((graph, sepsets))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_in_lexicographic_order() {
        let mut seen = Vec::new();
        let none: Option<()> = first_subset(&[1, 4, 7, 9], 2, |s| {
            seen.push(s.to_vec());
            Ok(None)
        })
        .unwrap();
        assert!(none.is_none());
        assert_eq!(seen, vec![vec![1, 4], vec![1, 7], vec![1, 9], vec![4, 7], vec![4, 9], vec![7, 9]]);
        let mut count = 0;
        first_subset::<()>(&[3, 5], 0, |s| {
            assert!(s.is_empty());
            count += 1;
            Ok(None)
        })
        .unwrap();
        assert_eq!(count, 1);
        assert!(first_subset::<()>(&[3], 2, |_| panic!("no subsets")).unwrap().is_none());
    }

    #[test]
    fn duplicated_columns_keep_their_edge() {
        let x: Vec<f64> = (0..60).map(|i| ((i * 37 % 17) as f64).sin()).collect();
        let z: Vec<f64> = (0..60).map(|i| ((i * 11 % 13) as f64).cos()).collect();
        let data = NumericMatrix::from_columns(vec!["A".into(), "B".into(), "C".into()], vec![x.clone(), x, z]);
        let (g, _) = pc_skeleton(&data, &PcConfig::default()).unwrap();
        assert!(g.has_undirected(0, 1));
    }
}
