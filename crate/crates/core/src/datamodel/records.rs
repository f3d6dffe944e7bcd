use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_file, write_file, Catalog, ConditionKind, DataError, Result, RoleSet, SteeringCondition};
use crate::scoring::TernaryLabel;

/// One answer to one question under one steering condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResponseRecord {
    pub condition: SteeringCondition,
    pub question_id: String,
    #[serde(default)]
    pub thought: String,
    pub answer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<TernaryLabel>,
    /// Judged inclination of the thought text, when collected.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thought_label: Option<TernaryLabel>,
}

/// Parses JSONL, one record per non-blank line.
pub fn parse_responses(text: &str) -> Result<Vec<ResponseRecord>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: ResponseRecord =
            serde_json::from_str(line).map_err(|e| DataError::parse(Some(idx + 1), e.to_string()))?;
        record.condition.check().map_err(|m| DataError::parse(Some(idx + 1), m))?;
        out.push(record);
    }
    Ok(out)
}

/// Reports every record whose question, value or role does not resolve.
pub fn validate_responses(records: &[ResponseRecord], catalog: &Catalog, roles: Option<&RoleSet>) -> Result<()> {
    let mut unknown_questions = BTreeSet::new();
    let mut unknown_values = BTreeSet::new();
    let mut unknown_roles = BTreeSet::new();
    for r in records {
        if catalog.question(&r.question_id).is_none() {
            unknown_questions.insert(r.question_id.clone());
        }
        if let ConditionKind::Instruction { value_id, .. } = &r.condition.kind {
            if catalog.value(value_id).is_none() {
                unknown_values.insert(value_id.clone());
            }
        }
        if let Some(roles) = roles {
            if roles.get(r.condition.role_id()).is_none() {
                unknown_roles.insert(r.condition.role_id().to_string());
            }
        }
    }
    if !unknown_questions.is_empty() {
        return Err(DataError::integrity(
            "responses reference unknown questions",
            unknown_questions.into_iter().collect(),
        ));
    }
    if !unknown_values.is_empty() {
        return Err(DataError::integrity(
            "instructions reference unknown values",
            unknown_values.into_iter().collect(),
        ));
    }
    if !unknown_roles.is_empty() {
        return Err(DataError::integrity("responses reference unknown roles", unknown_roles.into_iter().collect()));
    }
    Ok(())
}

pub fn load_responses(path: &Path, catalog: &Catalog, roles: Option<&RoleSet>) -> Result<Vec<ResponseRecord>> {
    let records = parse_responses(&read_file(path)?)?;
    validate_responses(&records, catalog, roles)?;
    Ok(records)
}

pub fn responses_to_jsonl(records: &[ResponseRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn save_responses(records: &[ResponseRecord], path: &Path) -> Result<()> {
    write_file(path, &responses_to_jsonl(records))
}
