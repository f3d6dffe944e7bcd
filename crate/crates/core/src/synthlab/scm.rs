use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Result, SynthError};
use crate::causal::{CausalGraph, GraphKind};
use crate::datamodel::{ConditionKind, SteeringCondition};
use crate::scoring::{MatrixRow, Orientation, OrientationMatrix};
use crate::Scalar;

/// How many nodes a kind of condition shifts, and by how much (in units of
/// the noise scale). Each target gets an independent random sign. Graphs
/// with fewer nodes than `n_targets` have every node shifted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterventionRule {
    pub n_targets: usize,
    pub shift: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterventionModel {
    /// Applied for every non-baseline role, alone or under a feature.
    pub role: InterventionRule,
    /// Applied on top of the role shift for SAE conditions.
    pub sae: InterventionRule,
    /// Shift on the instructed value, signed by the direction.
    pub instruction_shift: f64,
}

impl Default for InterventionModel {
    fn default() -> Self {
        InterventionModel {
            role: InterventionRule { n_targets: 14, shift: 1.5 },
            sae: InterventionRule { n_targets: 4, shift: 1.5 },
            instruction_shift: 1.5,
        }
    }
}

/// Where the random draws of a row come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseCoupling {
    /// Noise, targets and signs are keyed by the full condition and
    /// replicate, so every row is an independent draw.
    Independent,
    /// Noise is keyed by the replicate only and shifts by role id and
    /// feature, so rows differ from the baseline only through their
    /// interventions.
    Shared,
}

/// Linear-Gaussian SCM over a DAG, squashed with `tanh` and quantized to
/// `question_count`-item orientations.
#[derive(Clone, Debug, PartialEq)]
pub struct ScmSpec<T> {
    pub dag: CausalGraph,
    /// Edge weight by `(from, to)` node index.
    pub weights: BTreeMap<(usize, usize), T>,
    pub noise_scale: T,
    /// Each node is squashed as `tanh(squash_gain * x / sd(x))`, with the
    /// observational standard deviation.
    pub squash_gain: T,
    pub question_count: u32,
    pub interventions: InterventionModel,
    pub coupling: NoiseCoupling,
    pub baseline_role: String,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
struct WeightedEdge {
    from: String,
    to: String,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScmFile {
    nodes: Vec<String>,
    edges: Vec<WeightedEdge>,
    noise_scale: f64,
    squash_gain: f64,
    question_count: u32,
    interventions: InterventionModel,
    coupling: NoiseCoupling,
    baseline_role: String,
    seed: u64,
}

impl<T: Scalar> ScmSpec<T> {
    /// Default model over `dag`: weights with magnitude in `[0.5, 1]` and
    /// random sign, unit noise, gain 0.4, 20 questions.
    pub fn random(dag: CausalGraph, seed: u64) -> Self {
        let mut rng = crate::seed::rng(seed, &["weights"]);
        let weights = dag
            .directed_edges()
            .map(|e| {
                let mag: f64 = rng.random_range(0.5..=1.0);
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                (e, T::of(sign * mag))
            })
            .collect();
        ScmSpec {
            dag,
            weights,
            noise_scale: T::one(),
            squash_gain: T::of(0.4),
            question_count: 20,
            interventions: InterventionModel::default(),
            coupling: NoiseCoupling::Independent,
            baseline_role: "r0".into(),
            seed,
        }
    }

    pub fn with_coupling(mut self, coupling: NoiseCoupling) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dag.kind() != GraphKind::Dag {
            return Err(SynthError::InvalidSpec(format!("graph kind is {}, expected dag", self.dag.kind())));
        }
        self.dag.validate()?;
        let edges: Vec<(usize, usize)> = self.dag.directed_edges().collect();
        if edges.len() != self.weights.len() || edges.iter().any(|e| !self.weights.contains_key(e)) {
            return Err(SynthError::InvalidSpec("weights must cover exactly the graph's edges".into()));
        }
        if self.weights.values().any(|w| !w.is_finite()) {
            return Err(SynthError::InvalidSpec("non-finite weight".into()));
        }
        if !(self.noise_scale > T::zero() && self.noise_scale.is_finite()) {
            return Err(SynthError::InvalidSpec("noise_scale must be positive".into()));
        }
        if !(self.squash_gain > T::zero() && self.squash_gain.is_finite()) {
            return Err(SynthError::InvalidSpec("squash_gain must be positive".into()));
        }
        if self.question_count == 0 {
            return Err(SynthError::InvalidSpec("question_count must be positive".into()));
        }
        let im = &self.interventions;
        if ![im.role.shift, im.sae.shift, im.instruction_shift].iter().all(|s| s.is_finite()) {
            return Err(SynthError::InvalidSpec("non-finite shift".into()));
        }
        Ok(())
    }

    fn topo(&self) -> Vec<usize> {
        self.dag.topological_order().expect("validated DAG")
    }

    fn parents_weighted(&self) -> Vec<Vec<(usize, T)>> {
        let mut out = vec![Vec::new(); self.dag.n_nodes()];
        for (&(a, b), &w) in &self.weights {
            out[b].push((a, w));
        }
        out
    }

    /// Observational standard deviation of every latent node.
    pub fn latent_sd(&self) -> Vec<T> {
        let n = self.dag.n_nodes();
        let parents = self.parents_weighted();
        // rows of (I - B)^-1: loading of each node on each exogenous term
        let mut load = vec![vec![T::zero(); n]; n];
        for j in self.topo() {
            load[j][j] = T::one();
            for &(i, w) in &parents[j] {
                for k in 0..n {
                    load[j][k] = load[j][k] + w * load[i][k];
                }
            }
        }
        load.iter().map(|row| self.noise_scale * row.iter().map(|&a| a * a).sum::<T>().sqrt()).collect()
    }

    fn add_rule(&self, shift: &mut [T], rule: InterventionRule, parts: &[&str]) {
        let n = shift.len();
        let mut rng = crate::seed::rng(self.seed, parts);
        for t in sample(&mut rng, n, rule.n_targets.min(n)).into_vec() {
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            shift[t] = shift[t] + T::of(sign * rule.shift) * self.noise_scale;
        }
    }

    /// Additive shift applied to each latent node under `cond`. An
    /// instruction naming a value outside the graph shifts nothing.
    pub fn shift_vector(&self, cond: &SteeringCondition, replicate: u32) -> Vec<T> {
        let mut shift = vec![T::zero(); self.dag.n_nodes()];
        let key = cond.key();
        let rep = replicate.to_string();
        let shared = self.coupling == NoiseCoupling::Shared;
        let role = cond.role_id();
        if role != self.baseline_role {
            let parts: Vec<&str> = if shared { vec!["role", role] } else { vec!["role", &key, &rep] };
            self.add_rule(&mut shift, self.interventions.role, &parts);
        }
        match &cond.kind {
            ConditionKind::Role { .. } => {}
            ConditionKind::Sae { feature_id, layer, .. } => {
                let feature = format!("f{feature_id}/l{layer}");
                let parts: Vec<&str> = if shared { vec!["sae", &feature] } else { vec!["sae", &key, &rep] };
                self.add_rule(&mut shift, self.interventions.sae, &parts);
            }
            ConditionKind::Instruction { value_id, direction, .. } => {
                if let Some(i) = self.dag.node_index(value_id) {
                    let s = T::of(f64::from(direction.sign()) * self.interventions.instruction_shift);
                    shift[i] = shift[i] + s * self.noise_scale;
                }
            }
        }
        shift
    }

    /// One latent draw by ancestral sampling, in node order.
    pub fn sample_latent(&self, cond: &SteeringCondition, replicate: u32) -> Vec<T> {
        let n = self.dag.n_nodes();
        let rep = replicate.to_string();
        let key = cond.key();
        let parts: Vec<&str> =
            if self.coupling == NoiseCoupling::Shared { vec!["noise", &rep] } else { vec!["noise", &key, &rep] };
        let mut rng = crate::seed::rng(self.seed, &parts);
        let eps: Vec<T> = (0..n).map(|_| T::of(rng.sample::<f64, _>(StandardNormal))).collect();
        let shift = self.shift_vector(cond, replicate);
        let parents = self.parents_weighted();
        let mut x = vec![T::zero(); n];
        for j in self.topo() {
            let mut v = self.noise_scale * eps[j] + shift[j];
            for &(i, w) in &parents[j] {
                v = v + w * x[i];
            }
            x[j] = v;
        }
        x
    }

    /// Squashes and quantizes latent values to orientations.
    pub fn quantize(&self, latent: &[T], sd: &[T]) -> Vec<Orientation> {
        let k = self.question_count;
        latent
            .iter()
            .zip(sd)
            .map(|(&x, &s)| {
                let m = (self.squash_gain * x / s).tanh().as_f64();
                let sum = (m * f64::from(k)).round().clamp(-f64::from(k), f64::from(k)) as i64;
                Orientation::new(sum, k).expect("clamped to the question count")
            })
            .collect()
    }

    pub fn sample_row(&self, cond: &SteeringCondition, replicate: u32) -> Vec<Orientation> {
        self.quantize(&self.sample_latent(cond, replicate), &self.latent_sd())
    }

    pub fn to_json(&self) -> String {
        let nodes = self.dag.nodes();
        let file = ScmFile {
            nodes: nodes.to_vec(),
            edges: self
                .weights
                .iter()
                .map(|(&(a, b), w)| WeightedEdge { from: nodes[a].clone(), to: nodes[b].clone(), weight: w.as_f64() })
                .collect(),
            noise_scale: self.noise_scale.as_f64(),
            squash_gain: self.squash_gain.as_f64(),
            question_count: self.question_count,
            interventions: self.interventions,
            coupling: self.coupling,
            baseline_role: self.baseline_role.clone(),
            seed: self.seed,
        };
        serde_json::to_string_pretty(&file).expect("spec serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScmFile = serde_json::from_str(text).map_err(|e| SynthError::InvalidSpec(e.to_string()))?;
        let pairs: Vec<(&str, &str)> = file.edges.iter().map(|e| (e.from.as_str(), e.to.as_str())).collect();
        let dag = CausalGraph::from_edges(file.nodes, &pairs, &[], GraphKind::Dag)?;
        let mut weights = BTreeMap::new();
        for e in &file.edges {
            let key = (dag.node_index(&e.from).expect("edge node"), dag.node_index(&e.to).expect("edge node"));
            weights.insert(key, T::of(e.weight));
        }
        let spec = ScmSpec {
            dag,
            weights,
            noise_scale: T::of(file.noise_scale),
            squash_gain: T::of(file.squash_gain),
            question_count: file.question_count,
            interventions: file.interventions,
            coupling: file.coupling,
            baseline_role: file.baseline_role,
            seed: file.seed,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Samples `rows_per_condition` replicates of every condition, in the given
/// order. Columns follow the graph's node order.
pub fn sample_dataset<T: Scalar>(
    spec: &ScmSpec<T>,
    conditions: &[SteeringCondition],
    rows_per_condition: u32,
) -> Result<OrientationMatrix> {
    spec.validate()?;
    let sd = spec.latent_sd();
    let jobs: Vec<(&SteeringCondition, u32)> =
        conditions.iter().flat_map(|c| (0..rows_per_condition).map(move |r| (c, r))).collect();
    let cells: Vec<Vec<Option<Orientation>>> = jobs
        .par_iter()
        .map(|&(c, r)| spec.quantize(&spec.sample_latent(c, r), &sd).into_iter().map(Some).collect())
        .collect();
    let rows = jobs.iter().map(|&(c, r)| MatrixRow { condition: c.clone(), replicate: r }).collect();
    OrientationMatrix::new(spec.dag.nodes().to_vec(), rows, cells).map_err(|e| SynthError::InvalidSpec(e.to_string()))
}

/// SAE conditions for roles `r0..r{n_roles-1}` crossed with features
/// `0..n_features`; 101 roles and 25 features give 2,525 rows.
pub fn training_conditions(n_roles: usize, n_features: u32) -> Vec<SteeringCondition> {
    (0..n_roles)
        .flat_map(|r| (0..n_features).map(move |f| SteeringCondition::sae(format!("r{r}"), f, 0, 1.0)))
        .collect()
}

/// Held-out conditions for steering metrics: the baseline role `r0`, roles
/// `r{first_role}..` and features `first_feature..` applied to `r0`. Role and
/// feature ids should not overlap the training ones.
pub fn evaluation_conditions(
    first_role: usize,
    n_roles: usize,
    first_feature: u32,
    n_features: u32,
) -> Vec<SteeringCondition> {
    let mut out = vec![SteeringCondition::role("r0")];
    out.extend((first_role..first_role + n_roles).map(|r| SteeringCondition::role(format!("r{r}"))));
    out.extend((first_feature..first_feature + n_features).map(|f| SteeringCondition::sae("r0", f, 0, 1.0)));
    out
}
