use crate::scoring::OrientationMatrix;
use crate::Scalar;

/// Column-major real view of a matrix, with missing cells as `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericMatrix<T> {
    names: Vec<String>,
    columns: Vec<Vec<Option<T>>>,
    n_rows: usize,
}

impl<T: Scalar> NumericMatrix<T> {
    /// Orientation means as reals.
    pub fn from_orientations(m: &OrientationMatrix) -> Self {
        let columns = (0..m.columns().len())
            .map(|c| (0..m.n_rows()).map(|r| m.cell(r, c).map(|o| T::of(o.mean_f64()))).collect())
            .collect();
        NumericMatrix { names: m.columns().to_vec(), columns, n_rows: m.n_rows() }
    }

    /// Complete data given column by column; all columns must share a length.
    pub fn from_columns(names: Vec<String>, columns: Vec<Vec<T>>) -> Self {
        let n_rows = columns.first().map_or(0, Vec::len);
        assert!(columns.iter().all(|c| c.len() == n_rows), "ragged columns");
        assert_eq!(names.len(), columns.len(), "one name per column");
        NumericMatrix {
            names,
            columns: columns.into_iter().map(|c| c.into_iter().map(Some).collect()).collect(),
            n_rows,
        }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Values of `cols` on the rows where every one of them is present,
    /// returned column by column.
    pub fn complete(&self, cols: &[usize]) -> Vec<Vec<T>> {
        let keep: Vec<usize> =
            (0..self.n_rows).filter(|&r| cols.iter().all(|&c| self.columns[c][r].is_some())).collect();
        cols.iter()
            .map(|&c| keep.iter().map(|&r| self.columns[c][r].expect("filtered to complete rows")).collect())
            .collect()
    }

    /// Copy with columns reordered by `order` (indices into the current columns).
    pub fn permuted(&self, order: &[usize]) -> Self {
        NumericMatrix {
            names: order.iter().map(|&i| self.names[i].clone()).collect(),
            columns: order.iter().map(|&i| self.columns[i].clone()).collect(),
            n_rows: self.n_rows,
        }
    }
}

impl<T: Scalar> NumericMatrix<T> {
    /// Columns that may contain missing cells.
    pub fn from_optional_columns(names: Vec<String>, columns: Vec<Vec<Option<T>>>) -> Self {
        let n_rows = columns.first().map_or(0, Vec::len);
        assert!(columns.iter().all(|c| c.len() == n_rows), "ragged columns");
        assert_eq!(names.len(), columns.len(), "one name per column");
        NumericMatrix { names, columns, n_rows }
    }
}
