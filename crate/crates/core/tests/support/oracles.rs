//! Brute-force and naive-loop reference implementations.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use valuegraph::causal::{CausalGraph, GraphKind};
use valuegraph::datamodel::SteeringCondition;
use valuegraph::scoring::{MatrixRow, Orientation, OrientationMatrix};
use valuegraph::Rate;

/// Warshall closure: `r[i][j]` when a directed path of length ≥ 1 leads from i to j.
pub fn closure(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut r = vec![vec![false; n]; n];
    for &(a, b) in edges {
        r[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                for j in 0..n {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    r
}

/// Edges of `g` as index pairs over its node order.
pub fn edges_of(g: &CausalGraph) -> Vec<(usize, usize)> {
    g.directed_edges().collect()
}

/// True when removing any single edge changes the closure.
pub fn is_edge_minimal(n: usize, edges: &[(usize, usize)]) -> bool {
    let full = closure(n, edges);
    (0..edges.len()).all(|skip| {
        let rest: Vec<(usize, usize)> = edges.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &e)| e).collect();
        closure(n, &rest) != full
    })
}

/// Random DAG on `n` nodes named `N0..`, edges drawn over a random order.
pub fn random_small_dag(rng: &mut ChaCha8Rng, n: usize, p: f64) -> CausalGraph {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let names: Vec<String> = (0..n).map(|i| format!("N{i}")).collect();
    let mut g = CausalGraph::empty(names, GraphKind::Dag).unwrap();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                g.add_directed(order[i], order[j]).unwrap();
            }
        }
    }
    g
}

/// Unshielded colliders `a -> c <- b` with `a < b`, by enumeration.
pub fn colliders(n: usize, edges: &[(usize, usize)]) -> BTreeSet<(usize, usize, usize)> {
    let set: BTreeSet<(usize, usize)> = edges.iter().copied().collect();
    let adjacent = |x: usize, y: usize| set.contains(&(x, y)) || set.contains(&(y, x));
    let mut out = BTreeSet::new();
    for c in 0..n {
        for a in 0..n {
            for b in a + 1..n {
                if set.contains(&(a, c)) && set.contains(&(b, c)) && !adjacent(a, b) {
                    out.insert((a, b, c));
                }
            }
        }
    }
    out
}

/// Colliders `a -> c <- b` formed by directed edges of a pattern whose tails
/// are not adjacent through any edge, directed or not.
pub fn pattern_colliders(g: &CausalGraph) -> BTreeSet<(usize, usize, usize)> {
    let n = g.n_nodes();
    let skeleton = g.skeleton_pairs();
    let fixed: BTreeSet<(usize, usize)> = g.directed_edges().collect();
    let mut out = BTreeSet::new();
    for c in 0..n {
        for a in 0..n {
            for b in a + 1..n {
                if fixed.contains(&(a, c)) && fixed.contains(&(b, c)) && !skeleton.contains(&(a, b)) {
                    out.insert((a, b, c));
                }
            }
        }
    }
    out
}

/// Whether some orientation of the undirected edges of `cpdag` is acyclic
/// and has exactly the pattern's colliders.
pub fn has_consistent_extension(cpdag: &CausalGraph) -> bool {
    let n = cpdag.n_nodes();
    let fixed: Vec<(usize, usize)> = cpdag.directed_edges().collect();
    let free: Vec<(usize, usize)> = cpdag.undirected_edges().collect();
    assert!(free.len() <= 16, "too many undirected edges to enumerate");
    let target = pattern_colliders(cpdag);
    (0u32..1 << free.len()).any(|mask| {
        let mut edges = fixed.clone();
        for (i, &(a, b)) in free.iter().enumerate() {
            edges.push(if mask >> i & 1 == 1 { (b, a) } else { (a, b) });
        }
        let r = closure(n, &edges);
        (0..n).all(|i| !r[i][i]) && colliders(n, &edges) == target
    })
}

/// A complete orientation matrix with a baseline row `r0` and `m` steered
/// roles over `n` values, `k` questions each. Means repeat often so that
/// unchanged cells occur.
pub struct MetricFixture {
    pub values: Vec<String>,
    /// `cells[row][value] = (sum, count)`; row 0 is the baseline.
    pub cells: Vec<Vec<(i64, u32)>>,
    pub edges: Vec<(usize, usize)>,
}

impl MetricFixture {
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(2..=6);
        let m = rng.random_range(1..=8);
        let k = rng.random_range(1..=3u32);
        let values: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        let cells = (0..=m).map(|_| (0..n).map(|_| (rng.random_range(-(k as i64)..=k as i64), k)).collect()).collect();
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random_bool(0.4) {
                    edges.push((order[i], order[j]));
                }
            }
        }
        MetricFixture { values, cells, edges }
    }

    pub fn matrix(&self) -> OrientationMatrix {
        let rows = (0..self.cells.len()).map(|r| MatrixRow::new(SteeringCondition::role(format!("r{r}")))).collect();
        let cells = self
            .cells
            .iter()
            .map(|row| row.iter().map(|&(s, c)| Some(Orientation::new(s, c).unwrap())).collect())
            .collect();
        OrientationMatrix::new(self.values.clone(), rows, cells).unwrap()
    }

    pub fn graph(&self) -> CausalGraph {
        let mut g = CausalGraph::empty(self.values.clone(), GraphKind::Dag).unwrap();
        for &(a, b) in &self.edges {
            g.add_directed(a, b).unwrap();
        }
        g
    }
}

fn rate(num: usize, den: usize) -> Rate {
    Rate::new(BigInt::from(num), BigInt::from(den))
}

fn mean(rates: &[Rate]) -> Option<Rate> {
    (!rates.is_empty()).then(|| rates.iter().sum::<Rate>() / BigInt::from(rates.len()))
}

/// Per-value `(expected accuracy, unexpected frequency)` and their macro
/// averages, with every steered role against baseline row 0 and means
/// compared by cross-multiplication.
pub struct NaiveReport {
    pub per_value: Vec<(Option<Rate>, Option<Rate>)>,
    pub macro_expected: Option<Rate>,
    pub macro_unexpected: Option<Rate>,
}

pub fn naive_report(f: &MetricFixture) -> NaiveReport {
    let n = f.values.len();
    let reach = closure(n, &f.edges);
    let differs = |r: usize, v: usize| {
        let (s1, c1) = f.cells[r][v];
        let (s0, c0) = f.cells[0][v];
        s1 * i64::from(c0) != s0 * i64::from(c1)
    };
    let mut per_value = Vec::new();
    for v in 0..n {
        let changed: Vec<usize> = (1..f.cells.len()).filter(|&r| differs(r, v)).collect();
        let c = |w: usize| rate(changed.iter().filter(|&&r| differs(r, w)).count(), changed.len());
        let suc: Vec<usize> = (0..n).filter(|&w| reach[v][w]).collect();
        let nsuc: Vec<usize> = (0..n).filter(|&w| w != v && !reach[v][w]).collect();
        let e = if changed.is_empty() { None } else { mean(&suc.iter().map(|&w| c(w)).collect::<Vec<_>>()) };
        let u = if changed.is_empty() { None } else { mean(&nsuc.iter().map(|&w| c(w)).collect::<Vec<_>>()) };
        per_value.push((e, u));
    }
    let macro_expected = mean(&per_value.iter().filter_map(|p| p.0.clone()).collect::<Vec<_>>());
    let macro_unexpected = mean(&per_value.iter().filter_map(|p| p.1.clone()).collect::<Vec<_>>());
    NaiveReport { per_value, macro_expected, macro_unexpected }
}

/// Samples `n` rows from `y = b*x + noise` (and optionally a common cause),
/// returning column vectors for quick CI checks.
pub fn gaussian_columns(rng: &mut ChaCha8Rng, n: usize, dependent: bool) -> Vec<Vec<f64>> {
    use rand_distr::{Distribution, StandardNormal};
    let mut draw = || -> f64 { StandardNormal.sample(&mut *rng) };
    let z: Vec<f64> = (0..n).map(|_| draw()).collect();
    let x: Vec<f64> = z.iter().map(|zi| 0.8 * zi + draw()).collect();
    let y: Vec<f64> =
        x.iter().zip(&z).map(|(xi, zi)| if dependent { 0.6 * xi } else { 0.0 } + 0.8 * zi + draw()).collect();
    vec![x, y, z]
}
