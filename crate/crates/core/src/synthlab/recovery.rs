use std::collections::BTreeSet;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::{Result, SynthError};
use crate::causal::CausalGraph;
use crate::metrics::rate_serde;
use crate::Rate;

/// How well a discovered graph matches the true DAG. Rates whose
/// denominator is zero are absent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecoveryScore {
    pub true_edges: usize,
    pub found_edges: usize,
    pub common_edges: usize,
    #[serde(with = "rate_serde::option")]
    pub skeleton_precision: Option<Rate>,
    #[serde(with = "rate_serde::option")]
    pub skeleton_recall: Option<Rate>,
    #[serde(with = "rate_serde::option")]
    pub skeleton_f1: Option<Rate>,
    /// Among edges present in both skeletons and directed in the discovered
    /// graph, the fraction pointing the true way.
    #[serde(with = "rate_serde::option")]
    pub orientation_accuracy: Option<Rate>,
    /// Among directed edges that belong to a discovered collider
    /// `i→k←j`, the fraction pointing the true way.
    #[serde(with = "rate_serde::option")]
    pub v_structure_accuracy: Option<Rate>,
    /// Discovered colliders that are colliders of the true DAG.
    #[serde(with = "rate_serde::option")]
    pub v_structure_precision: Option<Rate>,
    /// True colliders recovered as colliders.
    #[serde(with = "rate_serde::option")]
    pub v_structure_recall: Option<Rate>,
}

fn frac(num: usize, den: usize) -> Option<Rate> {
    (den > 0).then(|| Rate::new(BigInt::from(num), BigInt::from(den)))
}

type Named = BTreeSet<(String, String)>;

fn named_skeleton(g: &CausalGraph) -> Named {
    let n = g.nodes();
    g.skeleton_pairs()
        .into_iter()
        .map(|(a, b)| {
            let (x, y) = (n[a].clone(), n[b].clone());
            if x <= y {
                (x, y)
            } else {
                (y, x)
            }
        })
        .collect()
}

fn named_colliders(g: &CausalGraph) -> BTreeSet<(String, String, String)> {
    let n = g.nodes();
    g.v_structures()
        .into_iter()
        .map(|(i, k, j)| {
            let (a, b) = (n[i].clone(), n[j].clone());
            if a <= b {
                (a, n[k].clone(), b)
            } else {
                (b, n[k].clone(), a)
            }
        })
        .collect()
}

/// Compares a discovered CPDAG or DAG with the true DAG over the same nodes.
pub fn evaluate_recovery(truth: &CausalGraph, discovered: &CausalGraph) -> Result<RecoveryScore> {
    let a: BTreeSet<&String> = truth.nodes().iter().collect();
    let b: BTreeSet<&String> = discovered.nodes().iter().collect();
    if a != b {
        let diff: Vec<&str> = a.symmetric_difference(&b).map(|s| s.as_str()).collect();
        return Err(SynthError::NodeMismatch(diff.join(", ")));
    }
    let ts = named_skeleton(truth);
    let ds = named_skeleton(discovered);
    let common = ts.intersection(&ds).count();
    let precision = frac(common, ds.len());
    let recall = frac(common, ts.len());
    let f1 = match (&precision, &recall) {
        (Some(_), Some(_)) => frac(2 * common, ds.len() + ts.len()),
        _ => None,
    };

    let true_dir: BTreeSet<(String, String)> = truth.named_directed().into_iter().collect();
    let mut oriented = 0;
    let mut correct = 0;
    for (x, y) in discovered.named_directed() {
        let key = if x <= y { (x.clone(), y.clone()) } else { (y.clone(), x.clone()) };
        if ts.contains(&key) {
            oriented += 1;
            if true_dir.contains(&(x, y)) {
                correct += 1;
            }
        }
    }

    let found_v = named_colliders(discovered);
    let true_v = named_colliders(truth);
    let mut collider_edges: BTreeSet<(String, String)> = BTreeSet::new();
    for (i, k, j) in &found_v {
        collider_edges.insert((i.clone(), k.clone()));
        collider_edges.insert((j.clone(), k.clone()));
    }
    let collider_correct = collider_edges.iter().filter(|e| true_dir.contains(*e)).count();
    let v_common = found_v.intersection(&true_v).count();

    Ok(RecoveryScore {
        true_edges: ts.len(),
        found_edges: ds.len(),
        common_edges: common,
        skeleton_precision: precision,
        skeleton_recall: recall,
        skeleton_f1: f1,
        orientation_accuracy: frac(correct, oriented),
        v_structure_accuracy: frac(collider_correct, collider_edges.len()),
        v_structure_precision: frac(v_common, found_v.len()),
        v_structure_recall: frac(v_common, true_v.len()),
    })
}
