use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};

use super::{read_file, write_file, Catalog, DataError, Result, RoleSet, SteeringCondition};
use crate::seed;

/// Share of roles held out for testing, in percent.
pub const TEST_ROLE_PERCENT: usize = 20;
/// Share of each value's questions reserved for test roles, in percent.
pub const TEST_QUESTION_PERCENT: usize = 30;
/// Share of a value's training questions sampled per condition-value dyad, in percent.
pub const DYAD_SAMPLE_PERCENT: usize = 40;
/// Below this many questions the percentage rounds become degenerate.
pub const MIN_QUESTIONS_TO_SPLIT: usize = 4;

/// `round(n * percent / 100)` with halves rounded up, in exact integer arithmetic.
pub fn round_fraction(n: usize, percent: usize) -> usize {
    (n * percent + 50) / 100
}

/// Which question subset a matrix cell averages over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuestionScope {
    /// The 40% sample of training questions drawn for the (condition, value) dyad.
    Dyad,
    /// Every training question.
    Train,
    /// The held-out test questions.
    Test,
    /// Every question of the value.
    All,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueQuestions {
    pub train: Vec<String>,
    pub test: Vec<String>,
}

/// Role and question partitions plus per-dyad question samples.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub seed: u64,
    pub train_roles: Vec<String>,
    pub test_roles: Vec<String>,
    pub questions: BTreeMap<String, ValueQuestions>,
    /// Keyed by `"{condition key}|{value id}"`.
    #[serde(default)]
    pub dyad_samples: BTreeMap<String, Vec<String>>,
}

/// Partitions roles 80/20 (baseline always in training) and every value's
/// questions 70/30, deterministically in `seed`.
pub fn split_dataset(catalog: &Catalog, roles: &RoleSet, seed: u64) -> Result<DatasetSplit> {
    if roles.len() < 2 {
        return Err(DataError::InvalidArgument(format!("need at least 2 roles, got {}", roles.len())));
    }
    for v in catalog.values() {
        if v.question_ids.len() < MIN_QUESTIONS_TO_SPLIT {
            return Err(DataError::TooFewQuestions { value_id: v.id.clone(), count: v.question_ids.len() });
        }
    }

    let baseline = roles.baseline().id.clone();
    let mut candidates: Vec<&str> = roles.roles().iter().filter(|r| !r.is_baseline).map(|r| r.id.as_str()).collect();
    let n_test = round_fraction(roles.len(), TEST_ROLE_PERCENT).clamp(1, candidates.len());
    candidates.shuffle(&mut seed::rng(seed, &["roles"]));
    let test_set: BTreeSet<&str> = candidates[..n_test].iter().copied().collect();
    let (test_roles, train_roles): (Vec<String>, Vec<String>) =
        roles.roles().iter().map(|r| r.id.clone()).partition(|id| test_set.contains(id.as_str()) && *id != baseline);

    let mut questions = BTreeMap::new();
    for v in catalog.values() {
        let mut order: Vec<usize> = (0..v.question_ids.len()).collect();
        order.shuffle(&mut seed::rng(seed, &["questions", &v.id]));
        let n_test = round_fraction(order.len(), TEST_QUESTION_PERCENT);
        let test_idx: BTreeSet<usize> = order[..n_test].iter().copied().collect();
        let (test, train): (Vec<_>, Vec<_>) =
            v.question_ids.iter().enumerate().partition(|(i, _)| test_idx.contains(i));
        questions.insert(
            v.id.clone(),
            ValueQuestions {
                train: train.into_iter().map(|(_, q)| q.clone()).collect(),
                test: test.into_iter().map(|(_, q)| q.clone()).collect(),
            },
        );
    }

    Ok(DatasetSplit { seed, train_roles, test_roles, questions, dyad_samples: BTreeMap::new() })
}

fn dyad_key(condition_key: &str, value_id: &str) -> String {
    format!("{condition_key}|{value_id}")
}

impl DatasetSplit {
    pub fn is_test_role(&self, role_id: &str) -> bool {
        self.test_roles.iter().any(|r| r == role_id)
    }

    /// The dyad's sample of training questions, in catalog order. Uses the
    /// recorded sample when present and derives it from the seed otherwise;
    /// both paths give the same answer.
    pub fn dyad_sample(&self, condition_key: &str, value_id: &str) -> Option<Vec<String>> {
        if let Some(s) = self.dyad_samples.get(&dyad_key(condition_key, value_id)) {
            return Some(s.clone());
        }
        let train = &self.questions.get(value_id)?.train;
        let amount = round_fraction(train.len(), DYAD_SAMPLE_PERCENT);
        let mut rng = seed::rng(self.seed, &["dyad", condition_key, value_id]);
        let mut picked = index::sample(&mut rng, train.len(), amount).into_vec();
        picked.sort_unstable();
        Some(picked.into_iter().map(|i| train[i].clone()).collect())
    }

    /// Records the dyad samples of every condition, so the split file lists them.
    pub fn materialize_dyads(&mut self, conditions: &[SteeringCondition]) {
        let values: Vec<String> = self.questions.keys().cloned().collect();
        for c in conditions {
            let key = c.key();
            for v in &values {
                if let Some(sample) = self.dyad_sample(&key, v) {
                    self.dyad_samples.insert(dyad_key(&key, v), sample);
                }
            }
        }
    }

    /// Question ids a cell of `condition` at `value_id` averages over.
    pub fn question_filter(&self, condition_key: &str, value_id: &str, scope: QuestionScope) -> Option<Vec<String>> {
        let q = self.questions.get(value_id)?;
        Some(match scope {
            QuestionScope::Dyad => return self.dyad_sample(condition_key, value_id),
            QuestionScope::Train => q.train.clone(),
            QuestionScope::Test => q.test.clone(),
            QuestionScope::All => q.train.iter().chain(&q.test).cloned().collect(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("split serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| DataError::parse(Some(e.line()), e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_file(path, &self.to_json())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&read_file(path)?)
    }
}
