use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::{score, Result, ScoringError};
use crate::datamodel::{Catalog, ResponseRecord};
use crate::Rate;

/// Exact orientation of one condition towards one value: the sum of item
/// scores and the number of answered items. The mean lies in `[-1, 1]`.
///
/// Equality is structural (`1/4` and `2/8` differ); use [`Orientation::same_mean`]
/// to compare orientations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Orientation {
    sum: i64,
    count: u32,
}

impl Orientation {
    pub fn new(sum: i64, count: u32) -> Option<Self> {
        (count > 0 && sum.unsigned_abs() <= u64::from(count)).then_some(Orientation { sum, count })
    }

    pub fn sum(self) -> i64 {
        self.sum
    }

    pub fn count(self) -> u32 {
        self.count
    }

    pub fn mean(self) -> Rate {
        Rate::new(BigInt::from(self.sum), BigInt::from(self.count))
    }

    pub fn mean_f64(self) -> f64 {
        self.sum as f64 / f64::from(self.count)
    }

    /// Exact comparison of means by cross-multiplication.
    pub fn same_mean(self, other: Orientation) -> bool {
        i128::from(self.sum) * i128::from(other.count) == i128::from(other.sum) * i128::from(self.count)
    }

    /// Whether the means differ by more than `tolerance`; `0` means exact inequality.
    pub fn differs(self, other: Orientation, tolerance: f64) -> bool {
        if tolerance <= 0.0 {
            !self.same_mean(other)
        } else {
            (self.mean_f64() - other.mean_f64()).abs() > tolerance
        }
    }

    /// Sign of `other - self` in exact arithmetic.
    pub fn delta_sign(self, other: Orientation) -> i8 {
        let lhs = i128::from(other.sum) * i128::from(self.count);
        let rhs = i128::from(self.sum) * i128::from(other.count);
        match lhs.cmp(&rhs) {
            std::cmp::Ordering::Greater => 1,
            std::cmp::Ordering::Less => -1,
            std::cmp::Ordering::Equal => 0,
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.sum, self.count)
    }
}

impl FromStr for Orientation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s.split_once('/').ok_or_else(|| format!("expected sum/count, got {s:?}"))?;
        let sum: i64 = a.trim().parse().map_err(|e| format!("{s:?}: {e}"))?;
        let count: u32 = b.trim().parse().map_err(|e| format!("{s:?}: {e}"))?;
        Orientation::new(sum, count).ok_or_else(|| format!("{s:?}: need count > 0 and |sum| <= count"))
    }
}

impl Serialize for Orientation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Orientation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Per-value orientations of one condition; values without answers are absent.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrientationVector(pub BTreeMap<String, Orientation>);

impl OrientationVector {
    pub fn get(&self, value_id: &str) -> Option<Orientation> {
        self.0.get(value_id).copied()
    }
}

/// Sums signed item scores per value over records whose question passes
/// `question_filter` (`None` keeps every question).
pub fn orientation(
    records: &[&ResponseRecord],
    catalog: &Catalog,
    question_filter: Option<&BTreeSet<String>>,
) -> Result<OrientationVector> {
    let mut acc: BTreeMap<String, (i64, u32)> = BTreeMap::new();
    for r in records {
        if question_filter.is_some_and(|f| !f.contains(&r.question_id)) {
            continue;
        }
        let question =
            catalog.question(&r.question_id).ok_or_else(|| ScoringError::UnknownQuestion(r.question_id.clone()))?;
        let label = r.label.ok_or_else(|| ScoringError::UnlabeledRecord {
            condition: r.condition.key(),
            question_id: r.question_id.clone(),
        })?;
        let slot = acc.entry(question.value_id.clone()).or_insert((0, 0));
        slot.0 += i64::from(score(label, question.polarity));
        slot.1 += 1;
    }
    Ok(OrientationVector(
        acc.into_iter()
            .map(|(v, (sum, count))| (v, Orientation::new(sum, count).expect("scores are in {-1,0,1}")))
            .collect(),
    ))
}
