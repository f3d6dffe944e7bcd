//! Linear structural causal models that produce orientation matrices with a
//! known ground-truth graph.

mod dag;
mod recovery;
mod scm;

use thiserror::Error;

pub use dag::{random_dag, random_dag_like};
pub use recovery::{evaluate_recovery, RecoveryScore};
pub use scm::{
    evaluation_conditions, sample_dataset, training_conditions, InterventionModel, InterventionRule, NoiseCoupling,
    ScmSpec,
};

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("node sets differ: {0}")]
    NodeMismatch(String),
    #[error("invalid model: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Graph(#[from] crate::causal::CausalError),
}

pub type Result<T> = std::result::Result<T, SynthError>;
