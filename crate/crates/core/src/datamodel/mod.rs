//! Domain types, dataset ingestion and the train/test splitting protocol.

mod catalog;
mod condition;
mod records;
mod roles;
mod split;

use std::path::PathBuf;

use thiserror::Error;

pub use catalog::{filter_values, load_catalog, save_catalog, Catalog, Polarity, QuestionItem, ValueDim};
pub use condition::{ConditionKind, Direction, SteeringCondition, DEFAULT_TEMPLATE};
pub use records::{
    load_responses, parse_responses, responses_to_jsonl, save_responses, validate_responses, ResponseRecord,
};
pub use roles::{load_roles, Role, RoleSet};
pub use split::{round_fraction, split_dataset, DatasetSplit, QuestionScope, ValueQuestions};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse { line: Option<usize>, message: String },
    #[error("integrity error: {message} [{}]", ids.join(", "))]
    Integrity { message: String, ids: Vec<String> },
    #[error("no value has more than {min_questions} questions")]
    EmptyResult { min_questions: usize },
    #[error("value {value_id} has {count} questions, at least 4 are required to split")]
    TooFewQuestions { value_id: String, count: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl DataError {
    pub(crate) fn integrity(message: impl Into<String>, ids: Vec<String>) -> Self {
        DataError::Integrity { message: message.into(), ids }
    }

    pub(crate) fn parse(line: Option<usize>, message: impl Into<String>) -> Self {
        DataError::Parse { line, message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, DataError>;

pub(crate) fn read_file(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| DataError::Io { path: path.to_path_buf(), source })
}

pub(crate) fn write_file(path: &std::path::Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| DataError::Io { path: path.to_path_buf(), source })
}
