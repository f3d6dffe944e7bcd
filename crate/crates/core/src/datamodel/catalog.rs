use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_file, write_file, DataError, Result};

/// Keying sign of a questionnaire item: whether "yes" indicates a higher orientation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn sign(self) -> i8 {
        match self {
            Polarity::Positive => 1,
            Polarity::Negative => -1,
        }
    }
}

impl TryFrom<i8> for Polarity {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Polarity::Positive),
            -1 => Ok(Polarity::Negative),
            other => Err(format!("polarity must be +1 or -1, got {other}")),
        }
    }
}

impl From<Polarity> for i8 {
    fn from(p: Polarity) -> i8 {
        p.sign()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuestionItem {
    pub id: String,
    pub value_id: String,
    pub text: String,
    pub polarity: Polarity,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueDim {
    pub id: String,
    pub name: String,
    pub definition: String,
    pub question_ids: Vec<String>,
    /// Upper-dimension tags from the value hierarchy, possibly empty.
    pub upper_dimensions: Vec<String>,
}

/// Validated set of value dimensions and their questionnaire items.
///
/// Values keep file order; questions are indexed by id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Catalog {
    values: Vec<ValueDim>,
    questions: BTreeMap<String, QuestionItem>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogFile {
    values: Vec<ValueEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ValueEntry {
    id: String,
    name: String,
    #[serde(default)]
    definition: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    upper_dimensions: Vec<String>,
    questions: Vec<QuestionEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QuestionEntry {
    id: String,
    text: String,
    polarity: Polarity,
    /// Only needed when a question is listed outside its owning value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    value_id: Option<String>,
}

impl Catalog {
    /// Builds a catalog, enforcing id uniqueness and question ownership.
    pub fn new(values: Vec<ValueDim>, questions: Vec<QuestionItem>) -> Result<Self> {
        let mut value_ids = BTreeSet::new();
        let mut dup_values = Vec::new();
        for v in &values {
            if !value_ids.insert(v.id.clone()) {
                dup_values.push(v.id.clone());
            }
        }
        if !dup_values.is_empty() {
            return Err(DataError::integrity("duplicate value ids", dup_values));
        }

        let mut index = BTreeMap::new();
        let mut dup_questions = Vec::new();
        let mut dangling = Vec::new();
        for q in questions {
            if !value_ids.contains(&q.value_id) {
                dangling.push(format!("{}->{}", q.id, q.value_id));
                continue;
            }
            if index.contains_key(&q.id) {
                dup_questions.push(q.id.clone());
                continue;
            }
            index.insert(q.id.clone(), q);
        }
        if !dangling.is_empty() {
            return Err(DataError::integrity("questions reference unknown values", dangling));
        }
        if !dup_questions.is_empty() {
            return Err(DataError::integrity("duplicate question ids", dup_questions));
        }

        let mut mismatched = Vec::new();
        let mut empty = Vec::new();
        for v in &values {
            if v.question_ids.is_empty() {
                empty.push(v.id.clone());
            }
            let mut seen = BTreeSet::new();
            for qid in &v.question_ids {
                let owned = index.get(qid).is_some_and(|q| q.value_id == v.id);
                if !owned || !seen.insert(qid) {
                    mismatched.push(format!("{}:{}", v.id, qid));
                }
            }
        }
        if !empty.is_empty() {
            return Err(DataError::integrity("values without questions", empty));
        }
        if !mismatched.is_empty() {
            return Err(DataError::integrity("question lists do not match ownership", mismatched));
        }
        let listed: usize = values.iter().map(|v| v.question_ids.len()).sum();
        if listed != index.len() {
            let orphans = index
                .values()
                .filter(|q| !values.iter().any(|v| v.question_ids.contains(&q.id)))
                .map(|q| q.id.clone())
                .collect();
            return Err(DataError::integrity("questions not listed by their value", orphans));
        }
        Ok(Catalog { values, questions: index })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CatalogFile =
            serde_json::from_str(text).map_err(|e| DataError::parse(Some(e.line()), e.to_string()))?;
        let mut values = Vec::with_capacity(file.values.len());
        let mut questions = Vec::new();
        for entry in file.values {
            let mut question_ids = Vec::with_capacity(entry.questions.len());
            for q in entry.questions {
                let value_id = q.value_id.unwrap_or_else(|| entry.id.clone());
                if value_id == entry.id {
                    question_ids.push(q.id.clone());
                }
                questions.push(QuestionItem { id: q.id, value_id, text: q.text, polarity: q.polarity });
            }
            values.push(ValueDim {
                id: entry.id,
                name: entry.name,
                definition: entry.definition,
                question_ids,
                upper_dimensions: entry.upper_dimensions,
            });
        }
        Catalog::new(values, questions)
    }

    /// Canonical pretty JSON in the catalog file schema.
    pub fn to_json(&self) -> String {
        let file = CatalogFile {
            values: self
                .values
                .iter()
                .map(|v| ValueEntry {
                    id: v.id.clone(),
                    name: v.name.clone(),
                    definition: v.definition.clone(),
                    upper_dimensions: v.upper_dimensions.clone(),
                    questions: v
                        .question_ids
                        .iter()
                        .map(|qid| {
                            let q = &self.questions[qid];
                            QuestionEntry {
                                id: q.id.clone(),
                                text: q.text.clone(),
                                polarity: q.polarity,
                                value_id: None,
                            }
                        })
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("catalog serializes")
    }

    pub fn values(&self) -> &[ValueDim] {
        &self.values
    }

    pub fn value(&self, id: &str) -> Option<&ValueDim> {
        self.values.iter().find(|v| v.id == id)
    }

    pub fn question(&self, id: &str) -> Option<&QuestionItem> {
        self.questions.get(id)
    }

    pub fn questions(&self) -> impl Iterator<Item = &QuestionItem> {
        self.values.iter().flat_map(move |v| v.question_ids.iter().map(move |q| &self.questions[q]))
    }

    pub fn value_ids(&self) -> Vec<String> {
        self.values.iter().map(|v| v.id.clone()).collect()
    }

    /// Resolves a value by id first, then by display name.
    pub fn resolve_value(&self, key: &str) -> Option<&ValueDim> {
        self.value(key).or_else(|| self.values.iter().find(|v| v.name == key))
    }
}

pub fn load_catalog(path: &Path) -> Result<Catalog> {
    Catalog::from_json(&read_file(path)?)
}

pub fn save_catalog(catalog: &Catalog, path: &Path) -> Result<()> {
    write_file(path, &catalog.to_json())
}

/// Keeps the values with strictly more than `min_questions` questions.
pub fn filter_values(catalog: &Catalog, min_questions: usize) -> Result<Catalog> {
    if min_questions < 1 {
        return Err(DataError::InvalidArgument("min_questions must be at least 1".into()));
    }
    let values: Vec<ValueDim> =
        catalog.values.iter().filter(|v| v.question_ids.len() > min_questions).cloned().collect();
    if values.is_empty() {
        return Err(DataError::EmptyResult { min_questions });
    }
    let questions = values.iter().flat_map(|v| v.question_ids.iter().map(|q| catalog.questions[q].clone())).collect();
    Catalog::new(values, questions)
}
