use super::{
    extend_to_dag_lenient, orient_cpdag, pc_skeleton, transitive_reduction, CausalGraph, NumericMatrix, PcConfig,
    Result,
};
use crate::Scalar;

/// Every stage of one discovery run.
#[derive(Clone, Debug, PartialEq)]
pub struct Discovery {
    pub skeleton: CausalGraph,
    pub cpdag: CausalGraph,
    pub dag: CausalGraph,
    /// The DAG with edges implied by longer paths removed.
    pub reduced: CausalGraph,
}

/// Skeleton search, collider orientation with Meek closure, lenient DAG
/// extension and transitive reduction.
pub fn discover<T: Scalar>(data: &NumericMatrix<T>, config: &PcConfig) -> Result<Discovery> {
    let (skeleton, sepsets) = pc_skeleton(data, config)?;
    let cpdag = orient_cpdag(&skeleton, &sepsets)?;
    let dag = extend_to_dag_lenient(&cpdag)?;
    let reduced = transitive_reduction(&dag)?;
    Ok(Discovery { skeleton, cpdag, dag, reduced })
}
