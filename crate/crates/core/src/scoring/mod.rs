//! Answer classification, signed scoring and exact orientation matrices.

mod classify;
mod matrix;
mod orientation;

use thiserror::Error;

pub use classify::{classify_answer, score, thought_answer_inconsistency, Classification, TernaryLabel};
pub use matrix::{build_matrix, MatrixRow, OrientationMatrix};
pub use orientation::{orientation, Orientation, OrientationVector};

#[derive(Debug, Error)]
pub enum ScoringError {
    #[error("record for {question_id} under {condition} has no label; judge escalation not completed")]
    UnlabeledRecord { condition: String, question_id: String },
    #[error("question {0} is not in the catalog")]
    UnknownQuestion(String),
    #[error("no records to build a matrix from")]
    EmptyMatrix,
    #[error("empty input")]
    EmptyInput,
    #[error("malformed matrix: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, ScoringError>;
