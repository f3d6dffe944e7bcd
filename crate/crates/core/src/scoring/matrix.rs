use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{orientation, Orientation, Result, ScoringError};
use crate::datamodel::{Catalog, DatasetSplit, QuestionScope, ResponseRecord, SteeringCondition};

/// Row label: the steering condition plus a replicate index (always 0 for
/// ingested data, used by simulated datasets with repeated draws).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixRow {
    pub condition: SteeringCondition,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub replicate: u32,
}

fn is_zero(v: &u32) -> bool {
    *v == 0
}

impl MatrixRow {
    pub fn new(condition: SteeringCondition) -> Self {
        MatrixRow { condition, replicate: 0 }
    }

    pub fn key(&self) -> String {
        if self.replicate == 0 {
            self.condition.key()
        } else {
            format!("{}#{}", self.condition.key(), self.replicate)
        }
    }
}

/// Conditions × values grid of exact orientations. Missing cells are allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct OrientationMatrix {
    columns: Vec<String>,
    rows: Vec<MatrixRow>,
    cells: Vec<Vec<Option<Orientation>>>,
}

#[derive(Serialize, Deserialize)]
struct MatrixFile {
    columns: Vec<String>,
    rows: Vec<RowEntry>,
}

#[derive(Serialize, Deserialize)]
struct RowEntry {
    #[serde(flatten)]
    label: MatrixRow,
    cells: Vec<Option<Orientation>>,
}

impl OrientationMatrix {
    pub fn new(columns: Vec<String>, rows: Vec<MatrixRow>, cells: Vec<Vec<Option<Orientation>>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(ScoringError::EmptyMatrix);
        }
        if rows.len() != cells.len() || cells.iter().any(|c| c.len() != columns.len()) {
            return Err(ScoringError::Malformed("cell grid does not match rows x columns".into()));
        }
        let mut seen = BTreeSet::new();
        if let Some(dup) = columns.iter().find(|c| !seen.insert(c.as_str())) {
            return Err(ScoringError::Malformed(format!("duplicate column {dup}")));
        }
        let mut keys = BTreeSet::new();
        for r in &rows {
            if !keys.insert(r.key()) {
                return Err(ScoringError::Malformed(format!("duplicate row {}", r.key())));
            }
        }
        Ok(OrientationMatrix { columns, rows, cells })
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[MatrixRow] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn column_index(&self, value_id: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == value_id)
    }

    pub fn row_index(&self, key: &str) -> Option<usize> {
        self.rows.iter().position(|r| r.key() == key)
    }

    pub fn cell(&self, row: usize, col: usize) -> Option<Orientation> {
        self.cells[row][col]
    }

    pub fn row_cells(&self, row: usize) -> &[Option<Orientation>] {
        &self.cells[row]
    }

    pub fn missing_cells(&self) -> usize {
        self.cells.iter().flatten().filter(|c| c.is_none()).count()
    }

    /// Sorts rows by key, giving the canonical form used for comparisons.
    pub fn canonicalize(&mut self) {
        let mut order: Vec<usize> = (0..self.rows.len()).collect();
        let keys: Vec<String> = self.rows.iter().map(MatrixRow::key).collect();
        order.sort_by(|a, b| keys[*a].cmp(&keys[*b]));
        self.rows = order.iter().map(|&i| self.rows[i].clone()).collect();
        self.cells = order.iter().map(|&i| self.cells[i].clone()).collect();
    }

    /// Keeps the rows accepted by `keep`, in order.
    pub fn filter_rows(&self, mut keep: impl FnMut(&MatrixRow) -> bool) -> Result<Self> {
        let (rows, cells) =
            self.rows.iter().zip(&self.cells).filter(|(r, _)| keep(r)).map(|(r, c)| (r.clone(), c.clone())).unzip();
        OrientationMatrix::new(self.columns.clone(), rows, cells)
    }

    /// Stacks the rows of two matrices with identical columns.
    pub fn concat(&self, other: &OrientationMatrix) -> Result<Self> {
        if self.columns != other.columns {
            return Err(ScoringError::Malformed("column sets differ".into()));
        }
        let rows = self.rows.iter().chain(&other.rows).cloned().collect();
        let cells = self.cells.iter().chain(&other.cells).cloned().collect();
        OrientationMatrix::new(self.columns.clone(), rows, cells)
    }

    pub fn to_json(&self) -> String {
        let file = MatrixFile {
            columns: self.columns.clone(),
            rows: self
                .rows
                .iter()
                .zip(&self.cells)
                .map(|(label, cells)| RowEntry { label: label.clone(), cells: cells.clone() })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("matrix serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: MatrixFile = serde_json::from_str(text).map_err(|e| ScoringError::Malformed(e.to_string()))?;
        let (rows, cells) = file.rows.into_iter().map(|r| (r.label, r.cells)).unzip();
        OrientationMatrix::new(file.columns, rows, cells)
    }

    /// CSV with one row per condition key; cells are `sum/count`, empty when missing.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["condition".to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        for (row, cells) in self.rows.iter().zip(&self.cells) {
            let mut rec = vec![row.key()];
            rec.extend(cells.iter().map(|c| c.map(|o| o.to_string()).unwrap_or_default()));
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8 csv")
    }
}

/// One row per distinct condition, each cell averaging the questions the
/// split assigns to that (condition, value) under `scope`. Without a split
/// every question counts. Rows are in canonical key order.
pub fn build_matrix(
    records: &[ResponseRecord],
    catalog: &Catalog,
    split: Option<&DatasetSplit>,
    scope: QuestionScope,
) -> Result<OrientationMatrix> {
    let mut groups: BTreeMap<String, (SteeringCondition, Vec<&ResponseRecord>)> = BTreeMap::new();
    for r in records {
        groups.entry(r.condition.key()).or_insert_with(|| (r.condition.clone(), Vec::new())).1.push(r);
    }
    if groups.is_empty() {
        return Err(ScoringError::EmptyMatrix);
    }
    let columns = catalog.value_ids();
    let mut rows = Vec::with_capacity(groups.len());
    let mut cells = Vec::with_capacity(groups.len());
    for (key, (condition, recs)) in groups {
        let filter: Option<BTreeSet<String>> =
            split.map(|s| columns.iter().filter_map(|v| s.question_filter(&key, v, scope)).flatten().collect());
        let vector = orientation(&recs, catalog, filter.as_ref())?;
        cells.push(columns.iter().map(|v| vector.get(v)).collect());
        rows.push(MatrixRow::new(condition));
    }
    OrientationMatrix::new(columns, rows, cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::TernaryLabel;

    fn catalog() -> Catalog {
        Catalog::from_json(
            r#"{"values":[{"id":"v","name":"V","questions":[{"id":"q1","text":"","polarity":1},{"id":"q2","text":"","polarity":-1}]},
            {"id":"w","name":"W","questions":[{"id":"w1","text":"","polarity":1}]}]}"#,
        )
        .unwrap()
    }

    fn rec(c: &SteeringCondition, q: &str, label: TernaryLabel) -> ResponseRecord {
        ResponseRecord {
            condition: c.clone(),
            question_id: q.into(),
            thought: String::new(),
            answer: String::new(),
            label: Some(label),
            thought_label: None,
        }
    }

    fn records() -> Vec<ResponseRecord> {
        let a = SteeringCondition::role("r0");
        let b = SteeringCondition::sae("r0", 7, 12, 100.0);
        vec![
            rec(&a, "q1", TernaryLabel::Yes),
            rec(&a, "q2", TernaryLabel::Yes),
            rec(&b, "q1", TernaryLabel::No),
            rec(&b, "w1", TernaryLabel::Yes),
            rec(&a, "w1", TernaryLabel::Unsure),
        ]
    }

    #[test]
    fn single_condition_single_value() {
        let c = Catalog::from_json(
            r#"{"values":[{"id":"v","name":"V","questions":[{"id":"q1","text":"","polarity":1}]}]}"#,
        )
        .unwrap();
        let m =
            build_matrix(&[rec(&SteeringCondition::role("r"), "q1", TernaryLabel::Yes)], &c, None, QuestionScope::All)
                .unwrap();
        assert_eq!((m.n_rows(), m.columns().len()), (1, 1));
        assert!(matches!(build_matrix(&[], &c, None, QuestionScope::All), Err(ScoringError::EmptyMatrix)));
    }

    #[test]
    fn cells_and_missing() {
        let m = build_matrix(&records(), &catalog(), None, QuestionScope::All).unwrap();
        assert_eq!(m.n_rows(), 2);
        let r = m.row_index("role/r0@default").unwrap();
        assert_eq!(m.cell(r, 0).unwrap().to_string(), "0/2");
        assert_eq!(m.cell(r, 1).unwrap().to_string(), "0/1");
        let s = m.row_index("sae/r0/f7/l12/x100/your values@default").unwrap();
        assert_eq!(m.cell(s, 0).unwrap().to_string(), "-1/1");
        assert_eq!(m.missing_cells(), 0);
    }

    #[test]
    fn order_independent() {
        let mut recs = records();
        let a = build_matrix(&recs, &catalog(), None, QuestionScope::All).unwrap();
        recs.reverse();
        let b = build_matrix(&recs, &catalog(), None, QuestionScope::All).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn json_round_trip_and_csv() {
        let m = build_matrix(&records(), &catalog(), None, QuestionScope::All).unwrap();
        assert_eq!(OrientationMatrix::from_json(&m.to_json()).unwrap(), m);
        let csv = m.to_csv();
        assert!(csv.starts_with("condition,v,w\n"));
        assert!(csv.contains("role/r0@default,0/2,0/1"));
    }

    #[test]
    fn rejects_bad_shapes() {
        let row = MatrixRow::new(SteeringCondition::role("a"));
        assert!(OrientationMatrix::new(vec!["v".into()], vec![row.clone()], vec![vec![]]).is_err());
        assert!(OrientationMatrix::new(vec!["v".into()], vec![row.clone(), row], vec![vec![None], vec![None]]).is_err());
        assert!(matches!(OrientationMatrix::new(vec![], vec![], vec![]), Err(ScoringError::EmptyMatrix)));
    }
}
