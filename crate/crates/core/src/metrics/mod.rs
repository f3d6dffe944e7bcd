//! Steering-effect statistics: change rates, graph prediction accuracy,
//! per-cell steering proportions and steering counts.

mod cells;
mod counts;
pub mod reference;
mod steering;

use num_bigint::BigInt;
use thiserror::Error;

use crate::causal::CausalError;
use crate::Rate;

pub use cells::{
    cell_cosine, cell_stats, method_comparison, noise_ratio, value_noise, MethodRow, SimilarityTable, SteerCellStats,
    SteeringTable, TableKind,
};
pub use counts::{mean_steered, question_changes, steered_count, within_value_inverse_ratio};
pub use steering::{
    aggregate_report, change_rate, changed_conditions, compare_graphs, expected_accuracy, unexpected_frequency,
    ChangeMode, Changed, GraphComparison, MetricReport, SteeringSet, ValueDelta, ValueMetrics,
};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("baseline row {0} is missing or has no cell for the value")]
    MissingBaseline(String),
    #[error("unknown value {0}")]
    UnknownValue(String),
    #[error("no steering condition changed value {0}")]
    EmptySteeringSet(String),
    #[error("cell for {value} is missing in row {row}")]
    MissingCell { row: String, value: String },
    #[error("no value has a defined metric")]
    NoDefinedMetrics,
    #[error("empty input")]
    EmptyInput,
    #[error("no question changed")]
    NoChanges,
    #[error(transparent)]
    Graph(#[from] CausalError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, MetricsError>;

pub(crate) fn ratio(num: usize, den: usize) -> Rate {
    Rate::new(BigInt::from(num), BigInt::from(den))
}

pub(crate) fn mean_of(rates: &[Rate]) -> Option<Rate> {
    if rates.is_empty() {
        return None;
    }
    let total: Rate = rates.iter().sum();
    Some(total / BigInt::from(rates.len()))
}

pub(crate) fn to_f64(r: &Rate) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Serde helpers writing rates as `"p/q"` strings.
pub(crate) mod rate_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::Rate;

    pub fn serialize<S: Serializer>(r: &Rate, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rate, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(r: &Option<Rate>, s: S) -> Result<S::Ok, S::Error> {
            match r {
                Some(r) => s.serialize_some(&r.to_string()),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rate>, D::Error> {
            let text = Option::<String>::deserialize(d)?;
            text.map(|t| t.parse().map_err(serde::de::Error::custom)).transpose()
        }
    }
}
