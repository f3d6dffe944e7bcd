use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{mean_of, rate_serde, ratio, MetricsError, Result};
use crate::causal::{CausalGraph, GraphKind};
use crate::datamodel::ConditionKind;
use crate::scoring::{Orientation, OrientationMatrix};
use crate::Rate;

/// Which conditions make up the steering set of a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChangeMode {
    /// Role prompts compared with the baseline role.
    Role,
    /// SAE features applied to the baseline role.
    Sae,
}

impl std::str::FromStr for ChangeMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "role" => Ok(ChangeMode::Role),
            "sae" => Ok(ChangeMode::Sae),
            other => Err(format!("unknown mode {other:?}, expected role or sae")),
        }
    }
}

/// A matrix together with its baseline row and the rows that count as
/// steering conditions for one mode.
#[derive(Clone, Debug)]
pub struct SteeringSet<'a> {
    matrix: &'a OrientationMatrix,
    baseline: usize,
    rows: Vec<usize>,
    mode: ChangeMode,
    tolerance: f64,
}

impl<'a> SteeringSet<'a> {
    /// `baseline_role` names the role whose plain role row is the reference.
    pub fn new(matrix: &'a OrientationMatrix, baseline_role: &str, mode: ChangeMode) -> Result<Self> {
        Self::build(matrix, baseline_role, mode, false)
    }

    /// Like [`SteeringSet::new`], but in SAE mode every role × feature row
    /// counts, not only the baseline role's.
    pub fn with_all_roles(matrix: &'a OrientationMatrix, baseline_role: &str, mode: ChangeMode) -> Result<Self> {
        Self::build(matrix, baseline_role, mode, true)
    }

    fn build(matrix: &'a OrientationMatrix, baseline_role: &str, mode: ChangeMode, any_role: bool) -> Result<Self> {
        let baseline = matrix
            .rows()
            .iter()
            .position(|r| r.condition.is_role_only() && r.condition.role_id() == baseline_role)
            .ok_or_else(|| MetricsError::MissingBaseline(baseline_role.to_string()))?;
        let rows = matrix
            .rows()
            .iter()
            .enumerate()
            .filter(|&(i, r)| {
                i != baseline
                    && match (&r.condition.kind, mode) {
                        (ConditionKind::Role { role_id }, ChangeMode::Role) => role_id != baseline_role,
                        (ConditionKind::Sae { role_id, .. }, ChangeMode::Sae) => any_role || role_id == baseline_role,
                        _ => false,
                    }
            })
            .map(|(i, _)| i)
            .collect();
        Ok(SteeringSet { matrix, baseline, rows, mode, tolerance: 0.0 })
    }

    /// Compares means with an absolute tolerance instead of exactly.
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance.max(0.0);
        self
    }

    pub fn matrix(&self) -> &OrientationMatrix {
        self.matrix
    }

    pub fn mode(&self) -> ChangeMode {
        self.mode
    }

    pub fn baseline_row(&self) -> usize {
        self.baseline
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub(crate) fn column(&self, value: &str) -> Result<usize> {
        self.matrix.column_index(value).ok_or_else(|| MetricsError::UnknownValue(value.to_string()))
    }

    pub(crate) fn baseline_cell(&self, col: usize) -> Result<Orientation> {
        self.matrix.cell(self.baseline, col).ok_or_else(|| {
            MetricsError::MissingBaseline(format!(
                "{} at {}",
                self.matrix.rows()[self.baseline].key(),
                self.matrix.columns()[col]
            ))
        })
    }

    pub(crate) fn differs(&self, a: Orientation, b: Orientation) -> bool {
        a.differs(b, self.tolerance)
    }
}

/// Steering rows whose cell at a value differs from the baseline.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Changed {
    pub rows: Vec<usize>,
    /// Steering rows skipped because their cell is missing.
    pub undefined: usize,
}

pub fn changed_conditions(set: &SteeringSet<'_>, value: &str) -> Result<Changed> {
    let col = set.column(value)?;
    let base = set.baseline_cell(col)?;
    let mut out = Changed { rows: Vec::new(), undefined: 0 };
    for &r in &set.rows {
        match set.matrix.cell(r, col) {
            Some(o) if set.differs(o, base) => out.rows.push(r),
            Some(_) => {}
            None => out.undefined += 1,
        }
    }
    Ok(out)
}

fn rate_over(set: &SteeringSet<'_>, changed: &[usize], target: &str, other: &str) -> Result<Rate> {
    if changed.is_empty() {
        return Err(MetricsError::EmptySteeringSet(target.to_string()));
    }
    let col = set.column(other)?;
    let base = set.baseline_cell(col)?;
    let mut hits = 0usize;
    for &r in changed {
        let cell = set
            .matrix
            .cell(r, col)
            .ok_or_else(|| MetricsError::MissingCell { row: set.matrix.rows()[r].key(), value: other.to_string() })?;
        if set.differs(cell, base) {
            hits += 1;
        }
    }
    Ok(ratio(hits, changed.len()))
}

/// Fraction of conditions that changed `v` and also changed `v_prime`.
pub fn change_rate(set: &SteeringSet<'_>, v_prime: &str, v: &str) -> Result<Rate> {
    let changed = changed_conditions(set, v)?;
    rate_over(set, &changed.rows, v, v_prime)
}

fn graph_partition(graph: &CausalGraph, set: &SteeringSet<'_>, v: &str) -> Result<(Vec<String>, Vec<String>)> {
    match graph.kind() {
        GraphKind::Dag | GraphKind::Digraph => {}
        other => {
            return Err(MetricsError::Graph(crate::causal::CausalError::WrongKind {
                expected: "dag or digraph",
                found: other,
            }))
        }
    }
    let columns = set.matrix.columns();
    if let Some(missing) = columns.iter().find(|c| graph.node_index(c).is_none()) {
        return Err(MetricsError::UnknownValue(missing.clone()));
    }
    set.column(v)?;
    let in_matrix = |n: &String| columns.contains(n);
    let suc = graph.successors(v)?.into_iter().filter(in_matrix).collect();
    let nsuc = graph.nonsuccessors(v)?.into_iter().filter(in_matrix).collect();
    Ok((suc, nsuc))
}

fn mean_rate(set: &SteeringSet<'_>, v: &str, targets: &[String]) -> Result<Option<Rate>> {
    if targets.is_empty() {
        return Ok(None);
    }
    let changed = changed_conditions(set, v)?;
    if changed.rows.is_empty() {
        return Ok(None);
    }
    let rates = targets.iter().map(|t| rate_over(set, &changed.rows, v, t)).collect::<Result<Vec<_>>>()?;
    Ok(mean_of(&rates))
}

/// Mean change rate over the graph successors of `v`; absent when `v` has no
/// successor among the matrix columns or was never steered.
pub fn expected_accuracy(graph: &CausalGraph, set: &SteeringSet<'_>, v: &str) -> Result<Option<Rate>> {
    let (suc, _) = graph_partition(graph, set, v)?;
    mean_rate(set, v, &suc)
}

/// Mean change rate over the graph nonsuccessors of `v`.
pub fn unexpected_frequency(graph: &CausalGraph, set: &SteeringSet<'_>, v: &str) -> Result<Option<Rate>> {
    let (_, nsuc) = graph_partition(graph, set, v)?;
    mean_rate(set, v, &nsuc)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueMetrics {
    pub value: String,
    #[serde(with = "rate_serde::option")]
    pub expected_accuracy: Option<Rate>,
    #[serde(with = "rate_serde::option")]
    pub unexpected_frequency: Option<Rate>,
    /// Size of the steering set that changed this value.
    pub steered: usize,
    /// Steering rows with no cell for this value.
    pub undefined_cells: usize,
    pub successors: usize,
    pub nonsuccessors: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub mode: ChangeMode,
    pub per_value: Vec<ValueMetrics>,
    #[serde(with = "rate_serde::option")]
    pub macro_expected: Option<Rate>,
    #[serde(with = "rate_serde::option")]
    pub macro_unexpected: Option<Rate>,
    /// Values left out of the expected-accuracy mean.
    pub undefined_expected: Vec<String>,
    /// Values left out of the unexpected-frequency mean.
    pub undefined_unexpected: Vec<String>,
}

impl MetricReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| MetricsError::InvalidArgument(e.to_string()))
    }

    pub fn value(&self, v: &str) -> Option<&ValueMetrics> {
        self.per_value.iter().find(|m| m.value == v)
    }

    /// Whether every rate in the report lies in `[0, 1]`.
    pub fn rates_in_unit_interval(&self) -> bool {
        let ok =
            |r: &Option<Rate>| r.as_ref().is_none_or(|r| !(r < &Rate::zero() || r > &Rate::from_integer(1.into())));
        self.per_value.iter().all(|m| ok(&m.expected_accuracy) && ok(&m.unexpected_frequency))
            && ok(&self.macro_expected)
            && ok(&self.macro_unexpected)
    }
}

/// Per-value metrics and their macro averages over values where defined.
pub fn aggregate_report(graph: &CausalGraph, set: &SteeringSet<'_>) -> Result<MetricReport> {
    let mut per_value = Vec::new();
    for v in set.matrix.columns() {
        let (suc, nsuc) = graph_partition(graph, set, v)?;
        let changed = changed_conditions(set, v)?;
        per_value.push(ValueMetrics {
            value: v.clone(),
            expected_accuracy: mean_rate(set, v, &suc)?,
            unexpected_frequency: mean_rate(set, v, &nsuc)?,
            steered: changed.rows.len(),
            undefined_cells: changed.undefined,
            successors: suc.len(),
            nonsuccessors: nsuc.len(),
        });
    }
    let collect = |f: fn(&ValueMetrics) -> &Option<Rate>| {
        let defined: Vec<Rate> = per_value.iter().filter_map(|m| f(m).clone()).collect();
        let missing: Vec<String> = per_value.iter().filter(|m| f(m).is_none()).map(|m| m.value.clone()).collect();
        (mean_of(&defined), missing)
    };
    let (macro_expected, undefined_expected) = collect(|m| &m.expected_accuracy);
    let (macro_unexpected, undefined_unexpected) = collect(|m| &m.unexpected_frequency);
    if macro_expected.is_none() && macro_unexpected.is_none() {
        return Err(MetricsError::NoDefinedMetrics);
    }
    Ok(MetricReport {
        mode: set.mode,
        per_value,
        macro_expected,
        macro_unexpected,
        undefined_expected,
        undefined_unexpected,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueDelta {
    pub value: String,
    /// `a - b` where both are defined.
    #[serde(with = "rate_serde::option")]
    pub expected: Option<Rate>,
    #[serde(with = "rate_serde::option")]
    pub unexpected: Option<Rate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphComparison {
    pub a: MetricReport,
    pub b: MetricReport,
    pub deltas: Vec<ValueDelta>,
}

impl GraphComparison {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("comparison serializes")
    }
}

fn sub(a: &Option<Rate>, b: &Option<Rate>) -> Option<Rate> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a - b),
        _ => None,
    }
}

/// Reports for two graphs over the same steering set, with per-value deltas.
pub fn compare_graphs(a: &CausalGraph, b: &CausalGraph, set: &SteeringSet<'_>) -> Result<GraphComparison> {
    let ra = aggregate_report(a, set)?;
    let rb = aggregate_report(b, set)?;
    let by_value: BTreeMap<&str, &ValueMetrics> = rb.per_value.iter().map(|m| (m.value.as_str(), m)).collect();
    let deltas = ra
        .per_value
        .iter()
        .map(|m| {
            let other = by_value[m.value.as_str()];
            ValueDelta {
                value: m.value.clone(),
                expected: sub(&m.expected_accuracy, &other.expected_accuracy),
                unexpected: sub(&m.unexpected_frequency, &other.unexpected_frequency),
            }
        })
        .collect();
    Ok(GraphComparison { a: ra, b: rb, deltas })
}
