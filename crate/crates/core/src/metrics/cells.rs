use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{mean_of, rate_serde, ratio, to_f64, MetricsError, Result};
use crate::datamodel::{ConditionKind, Direction, SteeringCondition};
use crate::scoring::{Orientation, OrientationMatrix};
use crate::Rate;

/// Proportions of roles stimulated, suppressed and maintained on one value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SteerCellStats {
    #[serde(with = "rate_serde")]
    pub p_stim: Rate,
    #[serde(with = "rate_serde")]
    pub p_supp: Rate,
    #[serde(with = "rate_serde")]
    pub p_maint: Rate,
    /// Number of roles the proportions are taken over.
    pub n: usize,
}

impl SteerCellStats {
    /// Whether the three proportions sum to exactly one and each lies in `[0, 1]`.
    pub fn is_distribution(&self) -> bool {
        let parts = [&self.p_stim, &self.p_supp, &self.p_maint];
        parts.iter().all(|p| !(**p < Rate::zero() || **p > Rate::one()))
            && (&self.p_stim + &self.p_supp + &self.p_maint).is_one()
    }

    pub fn as_f64(&self) -> [f64; 3] {
        [to_f64(&self.p_stim), to_f64(&self.p_supp), to_f64(&self.p_maint)]
    }
}

/// Tallies `(unsteered, steered)` pairs by the sign of the exact change.
pub fn cell_stats(pairs: &[(Orientation, Orientation)]) -> Result<SteerCellStats> {
    if pairs.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let (mut up, mut down) = (0usize, 0usize);
    for &(before, after) in pairs {
        match before.delta_sign(after) {
            1 => up += 1,
            -1 => down += 1,
            _ => {}
        }
    }
    let n = pairs.len();
    Ok(SteerCellStats { p_stim: ratio(up, n), p_supp: ratio(down, n), p_maint: ratio(n - up - down, n), n })
}

/// Cosine similarity of two proportion vectors.
pub fn cell_cosine(a: &SteerCellStats, b: &SteerCellStats) -> f64 {
    let (x, y) = (a.as_f64(), b.as_f64());
    let dot: f64 = x.iter().zip(&y).map(|(p, q)| p * q).sum();
    let norm = |v: &[f64; 3]| v.iter().map(|p| p * p).sum::<f64>().sqrt();
    (dot / (norm(&x) * norm(&y))).clamp(0.0, 1.0)
}

/// The smaller of the stimulated and suppressed proportions.
pub fn noise_ratio(stats: &SteerCellStats) -> Rate {
    stats.p_stim.clone().min(stats.p_supp.clone())
}

/// Mean noise ratio over the cells of one value.
pub fn value_noise(cells: &[&SteerCellStats]) -> Result<Rate> {
    let ratios: Vec<Rate> = cells.iter().map(|c| noise_ratio(c)).collect();
    mean_of(&ratios).ok_or(MetricsError::EmptyInput)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableKind {
    Sae,
    Instruction,
}

/// Per-group, per-value steering proportions over roles. A group is one SAE
/// setting or one instruction (value and direction), paired with the plain
/// role prompt of the same role, template and replicate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteeringTable {
    pub kind: TableKind,
    pub groups: Vec<String>,
    pub values: Vec<String>,
    /// Keyed by `group` then `value`; cells with no complete pair are absent.
    pub cells: BTreeMap<String, BTreeMap<String, SteerCellStats>>,
}

fn group_label(cond: &SteeringCondition, kind: TableKind) -> Option<String> {
    match (&cond.kind, kind) {
        (ConditionKind::Sae { feature_id, layer, strength, token_span, .. }, TableKind::Sae) => {
            Some(format!("f{feature_id}/l{layer}/x{strength}/{token_span}@{}", cond.template_id))
        }
        (ConditionKind::Instruction { value_id, direction, .. }, TableKind::Instruction) => {
            Some(format!("{}:{value_id}@{}", direction.word(), cond.template_id))
        }
        _ => None,
    }
}

impl SteeringTable {
    /// Builds the table from the rows whose role passes `keep_role`.
    pub fn build(matrix: &OrientationMatrix, kind: TableKind, keep_role: &dyn Fn(&str) -> bool) -> Result<Self> {
        let mut base: BTreeMap<(String, String, u32), usize> = BTreeMap::new();
        for (i, row) in matrix.rows().iter().enumerate() {
            if let ConditionKind::Role { role_id } = &row.condition.kind {
                base.insert((role_id.clone(), row.condition.template_id.clone(), row.replicate), i);
            }
        }
        let mut pairs: BTreeMap<String, Vec<(usize, usize)>> = BTreeMap::new();
        for (i, row) in matrix.rows().iter().enumerate() {
            let role = row.condition.role_id();
            if !keep_role(role) {
                continue;
            }
            let Some(label) = group_label(&row.condition, kind) else { continue };
            let key = (role.to_string(), row.condition.template_id.clone(), row.replicate);
            if let Some(&b) = base.get(&key) {
                pairs.entry(label).or_default().push((b, i));
            }
        }
        if pairs.is_empty() {
            return Err(MetricsError::EmptyInput);
        }
        let values = matrix.columns().to_vec();
        let mut cells = BTreeMap::new();
        for (label, rows) in &pairs {
            let mut per_value = BTreeMap::new();
            for (c, v) in values.iter().enumerate() {
                let complete: Vec<(Orientation, Orientation)> =
                    rows.iter().filter_map(|&(b, s)| Some((matrix.cell(b, c)?, matrix.cell(s, c)?))).collect();
                if !complete.is_empty() {
                    per_value.insert(v.clone(), cell_stats(&complete)?);
                }
            }
            cells.insert(label.clone(), per_value);
        }
        Ok(SteeringTable { kind, groups: pairs.into_keys().collect(), values, cells })
    }

    pub fn cell(&self, group: &str, value: &str) -> Option<&SteerCellStats> {
        self.cells.get(group)?.get(value)
    }

    /// Mean noise ratio per value over all groups with a cell for it.
    pub fn noise_by_value(&self) -> BTreeMap<String, Rate> {
        self.values
            .iter()
            .filter_map(|v| {
                let cells: Vec<&SteerCellStats> = self.groups.iter().filter_map(|g| self.cell(g, v)).collect();
                value_noise(&cells).ok().map(|r| (v.clone(), r))
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }
}

/// Agreement between a table built on training roles and one built on test
/// roles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityTable {
    /// Cosine per group and value, where both tables have the cell.
    pub cells: BTreeMap<String, BTreeMap<String, f64>>,
    /// Mean cosine per group.
    pub group_mean: BTreeMap<String, f64>,
    /// Mean noise ratio per value, from the training table.
    #[serde(with = "noise_serde")]
    pub noise: BTreeMap<String, Rate>,
}

mod noise_serde {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serializer};

    use crate::Rate;

    pub fn serialize<S: Serializer>(m: &BTreeMap<String, Rate>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_map(m.iter().map(|(k, v)| (k, v.to_string())))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, Rate>, D::Error> {
        BTreeMap::<String, String>::deserialize(d)?
            .into_iter()
            .map(|(k, v)| v.parse().map(|r| (k, r)).map_err(serde::de::Error::custom))
            .collect()
    }
}

impl SimilarityTable {
    pub fn between(train: &SteeringTable, test: &SteeringTable) -> Self {
        let mut cells = BTreeMap::new();
        let mut group_mean = BTreeMap::new();
        for g in &train.groups {
            let row: BTreeMap<String, f64> = train
                .values
                .iter()
                .filter_map(|v| Some((v.clone(), cell_cosine(train.cell(g, v)?, test.cell(g, v)?))))
                .collect();
            if !row.is_empty() {
                group_mean.insert(g.clone(), row.values().sum::<f64>() / row.len() as f64);
                cells.insert(g.clone(), row);
            }
        }
        SimilarityTable { cells, group_mean, noise: train.noise_by_value() }
    }
}

/// One line of the SAE-versus-instruction comparison for a target value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodRow {
    pub value: String,
    pub direction: Direction,
    /// SAE group chosen on the training table, or the instruction group.
    pub group: String,
    pub method: TableKind,
    pub stats: SteerCellStats,
}

/// For every value with an instruction group, picks the SAE group with the
/// largest training stimulation (inclined) or suppression (disinclined) on
/// that value, and reports both methods on the test roles.
pub fn method_comparison(
    sae_train: &SteeringTable,
    sae_test: &SteeringTable,
    instr_test: &SteeringTable,
) -> Vec<MethodRow> {
    let mut out = Vec::new();
    for value in &instr_test.values {
        for direction in [Direction::Inclined, Direction::Disinclined] {
            let prefix = format!("{}:{value}@", direction.word());
            let Some((instr_group, instr_stats)) = instr_test
                .groups
                .iter()
                .filter(|g| g.starts_with(&prefix))
                .find_map(|g| Some((g.clone(), instr_test.cell(g, value)?.clone())))
            else {
                continue;
            };
            let strength = |s: &SteerCellStats| match direction {
                Direction::Inclined => s.p_stim.clone(),
                Direction::Disinclined => s.p_supp.clone(),
            };
            let best = sae_train
                .groups
                .iter()
                .filter_map(|g| Some((g, strength(sae_train.cell(g, value)?))))
                .filter(|(g, _)| sae_test.cell(g, value).is_some())
                .fold(None::<(&String, Rate)>, |acc, (g, s)| match acc {
                    Some((_, ref bs)) if *bs >= s => acc,
                    _ => Some((g, s)),
                });
            if let Some((g, _)) = best {
                out.push(MethodRow {
                    value: value.clone(),
                    direction,
                    group: g.clone(),
                    method: TableKind::Sae,
                    stats: sae_test.cell(g, value).expect("filtered").clone(),
                });
            }
            out.push(MethodRow {
                value: value.clone(),
                direction,
                group: instr_group,
                method: TableKind::Instruction,
                stats: instr_stats,
            });
        }
    }
    out
}
