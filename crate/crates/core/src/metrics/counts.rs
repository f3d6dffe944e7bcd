use std::collections::BTreeMap;

use num_bigint::BigInt;

use super::steering::SteeringSet;
use super::{ratio, MetricsError, Result};
use crate::datamodel::{Catalog, ResponseRecord};
use crate::scoring::{score, OrientationMatrix};
use crate::Rate;

/// Number of values where `row` differs from `baseline`; values with a
/// missing cell in either row are not counted.
pub fn steered_count(matrix: &OrientationMatrix, row: usize, baseline: usize) -> Result<usize> {
    if baseline >= matrix.n_rows() {
        return Err(MetricsError::MissingBaseline(format!("row {baseline}")));
    }
    if row >= matrix.n_rows() {
        return Err(MetricsError::InvalidArgument(format!("row {row} out of range")));
    }
    Ok(matrix
        .row_cells(row)
        .iter()
        .zip(matrix.row_cells(baseline))
        .filter(|(a, b)| matches!((a, b), (Some(a), Some(b)) if !a.same_mean(*b)))
        .count())
}

/// Mean steered count over the steering rows of a set.
pub fn mean_steered(set: &SteeringSet<'_>) -> Result<Rate> {
    if set.rows().is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut total = 0usize;
    for &r in set.rows() {
        total += steered_count(set.matrix(), r, set.baseline_row())?;
    }
    Ok(ratio(total, set.rows().len()))
}

/// Signed score change per question of `value` answered under both the
/// unsteered and the steered records, in question-id order.
pub fn question_changes(
    unsteered: &[&ResponseRecord],
    steered: &[&ResponseRecord],
    catalog: &Catalog,
    value: &str,
) -> Result<Vec<i8>> {
    let dim = catalog.value(value).ok_or_else(|| MetricsError::UnknownValue(value.to_string()))?;
    let scores = |records: &[&ResponseRecord]| -> Result<BTreeMap<String, i8>> {
        let mut out = BTreeMap::new();
        for r in records.iter().filter(|r| dim.question_ids.contains(&r.question_id)) {
            let q = catalog.question(&r.question_id).expect("catalog question");
            let label = r
                .label
                .ok_or_else(|| MetricsError::InvalidArgument(format!("record {} has no label", r.question_id)))?;
            out.insert(r.question_id.clone(), score(label, q.polarity));
        }
        Ok(out)
    };
    let before = scores(unsteered)?;
    let after = scores(steered)?;
    Ok(before.iter().filter_map(|(q, b)| after.get(q).map(|a| (a - b).signum())).collect())
}

/// Among changed questions, the fraction moving against the majority
/// direction; `1/2` when the two directions tie.
pub fn within_value_inverse_ratio(changes: &[i8]) -> Result<Rate> {
    let up = changes.iter().filter(|&&c| c > 0).count();
    let down = changes.iter().filter(|&&c| c < 0).count();
    let total = up + down;
    if total == 0 {
        return Err(MetricsError::NoChanges);
    }
    if up == down {
        return Ok(Rate::new(BigInt::from(1), BigInt::from(2)));
    }
    Ok(ratio(up.min(down), total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::SteeringCondition;
    use crate::metrics::ChangeMode;
    use crate::scoring::{MatrixRow, Orientation};

    #[test]
    fn inverse_ratio_cases() {
        assert_eq!(within_value_inverse_ratio(&[1, 1, 1, 1, -1]).unwrap(), ratio(1, 5));
        assert_eq!(within_value_inverse_ratio(&[-1, -1, 0]).unwrap(), ratio(0, 1));
        assert_eq!(within_value_inverse_ratio(&[1, -1]).unwrap(), ratio(1, 2));
        assert_eq!(within_value_inverse_ratio(&[0, 0]).unwrap_err(), MetricsError::NoChanges);
    }

    #[test]
    fn steered_counts() {
        let o = |s| Orientation::new(s, 2);
        let rows = vec![
            MatrixRow::new(SteeringCondition::role("r0")),
            MatrixRow::new(SteeringCondition::role("r1")),
            MatrixRow::new(SteeringCondition::role("r2")),
        ];
        let cells = vec![vec![o(0), o(0), o(0), o(0)], vec![o(1), o(-1), o(0), None], vec![o(0), o(0), o(0), o(2)]];
        let m = OrientationMatrix::new(["a", "b", "c", "d"].map(String::from).to_vec(), rows, cells).unwrap();
        assert_eq!(steered_count(&m, 1, 0).unwrap(), 2);
        assert_eq!(steered_count(&m, 0, 0).unwrap(), 0);
        let set = SteeringSet::new(&m, "r0", ChangeMode::Role).unwrap();
        assert_eq!(mean_steered(&set).unwrap(), ratio(3, 2));
    }
}
