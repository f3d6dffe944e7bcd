//! Conditional-independence testing, PC discovery, DAG extension,
//! transitive reduction and reference-graph construction.

mod ci;
mod discover;
mod edgelist;
mod extend;
mod graph;
mod numeric;
mod orient;
mod pc;
mod reduce;
pub mod stats;

use thiserror::Error;

pub use ci::{
    ci_test_fisher_z, ci_test_permutation, CiKind, CiOutcome, CiTest, FisherZ, PcConfig, PermutationTest,
    MIN_PERMUTATIONS,
};
pub use discover::{discover, Discovery};
pub use edgelist::{emit_edge_list, hierarchy_graph, parse_edge_list, resolve_against_catalog};
pub use extend::{extend_to_dag, extend_to_dag_lenient};
pub use graph::{CausalGraph, GraphKind};
pub use numeric::NumericMatrix;
pub use orient::{apply_meek_rules, orient_cpdag};
pub use pc::{pc_skeleton, SepSets};
pub use reduce::{reachability, transitive_reduction};

#[derive(Debug, Error, PartialEq)]
pub enum CausalError {
    #[error("column {0} is constant on the complete rows")]
    DegenerateVariance(String),
    #[error("need at least {needed} complete rows, have {available}")]
    InsufficientSamples { needed: usize, available: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("expected a {expected} graph, got {found}")]
    WrongKind { expected: &'static str, found: GraphKind },
    #[error("graph has no consistent DAG extension: {0}")]
    NotExtendable(String),
    #[error("graph contains a directed cycle")]
    Cyclic,
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("edge list parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
}

pub type Result<T> = std::result::Result<T, CausalError>;
