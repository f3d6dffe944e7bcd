mod support;

use support::oracles::closure;
use valuegraph::datamodel::{Direction, SteeringCondition};
use valuegraph::synthlab::*;

/// Effect of an additive shift, by iterating `e = s + Bᵀe` to its fixpoint.
fn propagate(spec: &ScmSpec<f64>, shift: &[f64]) -> Vec<f64> {
    let n = shift.len();
    let mut e = shift.to_vec();
    for _ in 0..=n {
        let mut next = shift.to_vec();
        for (&(a, b), w) in &spec.weights {
            next[b] += w * e[a];
        }
        e = next;
    }
    e
}

#[test]
fn shifts_propagate_along_weighted_paths() {
    for seed in 0..20 {
        let spec = ScmSpec::<f64>::random(random_dag(12, 2.0, seed), seed).with_coupling(NoiseCoupling::Shared);
        let base = spec.sample_latent(&SteeringCondition::role("r0"), 0);
        for cond in [
            SteeringCondition::role("r5"),
            SteeringCondition::sae("r0", 3, 0, 1.0),
            SteeringCondition::instruction("r0", "X04", Direction::Disinclined),
        ] {
            let shift = spec.shift_vector(&cond, 0);
            let want = propagate(&spec, &shift);
            let got = spec.sample_latent(&cond, 0);
            for i in 0..want.len() {
                assert!((got[i] - base[i] - want[i]).abs() < 1e-9, "seed {seed} {cond} node {i}");
            }
        }
    }
}

#[test]
fn interventions_stay_downstream() {
    for seed in 0..20 {
        let spec = ScmSpec::<f64>::random(random_dag(15, 2.0, seed), seed).with_coupling(NoiseCoupling::Shared);
        let edges: Vec<(usize, usize)> = spec.dag.directed_edges().collect();
        let reach = closure(15, &edges);
        let cond = SteeringCondition::sae("r0", 9, 0, 1.0);
        let shift = spec.shift_vector(&cond, 0);
        let targets: Vec<usize> = (0..15).filter(|&i| shift[i] != 0.0).collect();
        assert_eq!(targets.len(), spec.interventions.sae.n_targets);
        let base = spec.sample_row(&SteeringCondition::role("r0"), 0);
        let row = spec.sample_row(&cond, 0);
        for v in 0..15 {
            let affected = targets.iter().any(|&t| t == v || reach[t][v]);
            if !affected {
                assert_eq!(row[v], base[v], "seed {seed}: node {v} changed without a shifted ancestor");
            }
        }
    }
}

#[test]
fn latent_sd_matches_simulation() {
    let spec = ScmSpec::<f64>::random(random_dag(8, 2.0, 5), 5);
    let sd = spec.latent_sd();
    let n = 20000;
    let draws: Vec<Vec<f64>> = (0..n).map(|r| spec.sample_latent(&SteeringCondition::role("r0"), r)).collect();
    for (i, want) in sd.iter().enumerate() {
        let mean = draws.iter().map(|d| d[i]).sum::<f64>() / n as f64;
        let var = draws.iter().map(|d| (d[i] - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var.sqrt() / want - 1.0).abs() < 0.03, "node {i}: {} vs {want}", var.sqrt());
    }
}

#[test]
fn sampling_is_reproducible_and_scm_round_trips() {
    let spec = ScmSpec::<f64>::random(random_dag(10, 2.0, 2), 2);
    let conds = training_conditions(5, 3);
    let a = sample_dataset(&spec, &conds, 2).unwrap();
    let b = sample_dataset(&spec, &conds, 2).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    let back = ScmSpec::<f64>::from_json(&spec.to_json()).unwrap();
    assert_eq!(back.to_json(), spec.to_json());
    assert_eq!(sample_dataset(&back, &conds, 2).unwrap(), a);
}

#[test]
fn recovery_of_the_truth_is_perfect() {
    let dag = random_dag(10, 2.0, 6);
    let score = evaluate_recovery(&dag, &dag).unwrap();
    let one = valuegraph::Rate::from_integer(1.into());
    assert_eq!(score.skeleton_f1, Some(one.clone()));
    assert_eq!(score.orientation_accuracy, Some(one));
}
