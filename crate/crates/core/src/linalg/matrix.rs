use serde::{Deserialize, Serialize};

use super::ZERO_ROW_TOL;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    /// Row-major `rows * cols` buffer.
    Dense(Vec<f64>),
    /// Compressed sparse rows; column indices strictly increasing within a row.
    Sparse {
        indptr: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<f64>,
    },
}

/// An `m x n` matrix accessed one row at a time.
///
/// Squared row norms are computed once at construction. Construction rejects
/// non-finite entries and zero rows, so every value of this type satisfies
/// `row_sq_norms()[i] > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RowMatrix {
    rows: usize,
    cols: usize,
    storage: Storage,
    row_sq_norms: Vec<f64>,
    nnz: usize,
}

/// Borrowed view of one row.
#[derive(Debug, Clone, Copy)]
pub enum Row<'a> {
    Dense(&'a [f64]),
    Sparse {
        indices: &'a [usize],
        values: &'a [f64],
    },
}

impl<'a> Row<'a> {
    #[inline]
    pub fn dot(&self, x: &[f64]) -> f64 {
        match *self {
            Row::Dense(v) => super::dot(v, x),
            Row::Sparse { indices, values } => {
                indices.iter().zip(values).map(|(&j, &v)| v * x[j]).sum()
            }
        }
    }

    /// `x += alpha * row`
    #[inline]
    pub fn axpy(&self, alpha: f64, x: &mut [f64]) {
        match *self {
            Row::Dense(v) => super::axpy(alpha, v, x),
            Row::Sparse { indices, values } => {
                for (&j, &v) in indices.iter().zip(values) {
                    x[j] += alpha * v;
                }
            }
        }
    }

    #[inline]
    pub fn for_each(&self, mut f: impl FnMut(usize, f64)) {
        match *self {
            Row::Dense(v) => v.iter().enumerate().for_each(|(j, &a)| f(j, a)),
            Row::Sparse { indices, values } => {
                indices.iter().zip(values).for_each(|(&j, &a)| f(j, a))
            }
        }
    }

    /// Number of stored entries.
    pub fn stored(&self) -> usize {
        match *self {
            Row::Dense(v) => v.len(),
            Row::Sparse { indices, .. } => indices.len(),
        }
    }

    pub fn get(&self, j: usize) -> f64 {
        match *self {
            Row::Dense(v) => v[j],
            Row::Sparse { indices, values } => match indices.binary_search(&j) {
                Ok(p) => values[p],
                Err(_) => 0.0,
            },
        }
    }

    pub fn to_dense(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        self.for_each(|j, v| out[j] = v);
        out
    }
}

/// Structural density of a matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub delta: f64,
    pub per_row_delta: Vec<f64>,
}

impl RowMatrix {
    pub fn from_dense(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Self::build(rows, cols, Storage::Dense(data))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        Self::from_dense(rows.len(), cols, rows.concat())
    }

    pub fn from_csr(
        rows: usize,
        cols: usize,
        indptr: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if indptr.len() != rows + 1 || indptr[0] != 0 || indptr[rows] != indices.len() {
            return Err(Error::InvalidMatrix("malformed row pointer array".into()));
        }
        if indices.len() != values.len() {
            return Err(Error::InvalidMatrix("index/value length mismatch".into()));
        }
        for i in 0..rows {
            let (lo, hi) = (indptr[i], indptr[i + 1]);
            if lo > hi {
                return Err(Error::InvalidMatrix(format!(
                    "row {i}: decreasing row pointer"
                )));
            }
            let idx = &indices[lo..hi];
            if idx.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidMatrix(format!(
                    "row {i}: column indices not strictly increasing"
                )));
            }
            if idx.last().is_some_and(|&j| j >= cols) {
                return Err(Error::InvalidMatrix(format!(
                    "row {i}: column index out of range"
                )));
            }
        }
        Self::build(
            rows,
            cols,
            Storage::Sparse {
                indptr,
                indices,
                values,
            },
        )
    }

    /// Sparse matrix from `(row, col, value)` triplets in any order; duplicates are summed.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        mut entries: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        if let Some(&(i, j, _)) = entries.iter().find(|&&(i, j, _)| i >= rows || j >= cols) {
            return Err(Error::InvalidMatrix(format!(
                "entry ({i}, {j}) outside {rows}x{cols}"
            )));
        }
        entries.sort_by_key(|&(i, j, _)| (i, j));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in entries {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            indptr[i + 1] += 1;
            indices.push(j);
            values.push(v);
            last = Some((i, j));
        }
        for i in 0..rows {
            indptr[i + 1] += indptr[i];
        }
        Self::from_csr(rows, cols, indptr, indices, values)
    }

    /// Identity, stored sparse.
    pub fn identity(n: usize) -> Self {
        Self::from_csr(n, n, (0..=n).collect(), (0..n).collect(), vec![1.0; n])
            .expect("identity is valid")
    }

    fn build(rows: usize, cols: usize, storage: Storage) -> Result<Self> {
        let (row_sq_norms, nnz): (Vec<f64>, usize) = match &storage {
            Storage::Dense(data) => {
                if let Some(p) = data.iter().position(|v| !v.is_finite()) {
                    return Err(Error::InvalidMatrix(format!(
                        "non-finite entry at ({}, {})",
                        p / cols.max(1),
                        p % cols.max(1)
                    )));
                }
                let norms = (0..rows)
                    .map(|i| super::norm_sq(&data[i * cols..(i + 1) * cols]))
                    .collect();
                (norms, data.iter().filter(|v| **v != 0.0).count())
            }
            Storage::Sparse { indptr, values, .. } => {
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidMatrix("non-finite entry".into()));
                }
                let norms = (0..rows)
                    .map(|i| super::norm_sq(&values[indptr[i]..indptr[i + 1]]))
                    .collect();
                (norms, values.len())
            }
        };
        if let Some(i) = row_sq_norms.iter().position(|&s: &f64| s < ZERO_ROW_TOL) {
            return Err(Error::ZeroRow(i));
        }
        Ok(Self {
            rows,
            cols,
            storage,
            row_sq_norms,
            nnz,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse { .. })
    }

    /// Structural nonzeros: stored entries for sparse storage, entries with
    /// `|v| > 0` for dense storage.
    pub fn nnz(&self) -> usize {
        self.nnz
    }

    #[inline]
    pub fn row_sq_norms(&self) -> &[f64] {
        &self.row_sq_norms
    }

    #[inline]
    pub fn row(&self, i: usize) -> Row<'_> {
        match &self.storage {
            Storage::Dense(data) => Row::Dense(&data[i * self.cols..(i + 1) * self.cols]),
            Storage::Sparse {
                indptr,
                indices,
                values,
            } => {
                let (lo, hi) = (indptr[i], indptr[i + 1]);
                Row::Sparse {
                    indices: &indices[lo..hi],
                    values: &values[lo..hi],
                }
            }
        }
    }

    /// Fraction of structurally nonzero entries, overall and per row.
    pub fn density(&self) -> DensityReport {
        let n = self.cols.max(1) as f64;
        let per_row_delta: Vec<f64> = match &self.storage {
            Storage::Dense(data) => data
                .chunks(self.cols.max(1))
                .take(self.rows)
                .map(|r| r.iter().filter(|v| **v != 0.0).count() as f64 / n)
                .collect(),
            Storage::Sparse { indptr, .. } => indptr
                .windows(2)
                .map(|w| (w[1] - w[0]) as f64 / n)
                .collect(),
        };
        DensityReport {
            delta: self.delta(),
            per_row_delta,
        }
    }

    /// Overall density `nnz / (m n)`.
    pub fn delta(&self) -> f64 {
        if self.rows == 0 || self.cols == 0 {
            return 0.0;
        }
        self.nnz as f64 / (self.rows as f64 * self.cols as f64)
    }

    /// `A x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).dot(x)).collect()
    }

    /// `A^T y`
    pub fn tr_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        self.tr_mul_vec_into(y, &mut out);
        out
    }

    pub fn tr_mul_vec_into(&self, y: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (i, &yi) in y.iter().enumerate() {
            if yi != 0.0 {
                self.row(i).axpy(yi, out);
            }
        }
    }

    /// Row-major dense copy of the entries.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rows * self.cols];
        for i in 0..self.rows {
            let base = i * self.cols;
            self.row(i).for_each(|j, v| out[base + j] = v);
        }
        out
    }

    /// Same logical matrix in CSR storage (entries with value zero are dropped).
    pub fn to_sparse(&self) -> Self {
        match self.storage {
            Storage::Sparse { .. } => self.clone(),
            Storage::Dense(_) => {
                let mut entries = Vec::with_capacity(self.nnz);
                for i in 0..self.rows {
                    self.row(i).for_each(|j, v| {
                        if v != 0.0 {
                            entries.push((i, j, v));
                        }
                    });
                }
                Self::from_triplets(self.rows, self.cols, entries).expect("same matrix")
            }
        }
    }

    /// Same logical matrix in dense storage.
    pub fn to_dense_storage(&self) -> Self {
        Self::from_dense(self.rows, self.cols, self.to_dense()).expect("same matrix")
    }

    /// New matrix with row `i` multiplied by `factor(i)`, keeping the storage kind.
    pub fn scale_rows(&self, factor: impl Fn(usize) -> f64) -> Result<Self> {
        let storage = match &self.storage {
            Storage::Dense(data) => {
                let mut data = data.clone();
                for (i, row) in data
                    .chunks_mut(self.cols.max(1))
                    .take(self.rows)
                    .enumerate()
                {
                    let f = factor(i);
                    if f != 1.0 {
                        row.iter_mut().for_each(|v| *v *= f);
                    }
                }
                Storage::Dense(data)
            }
            Storage::Sparse {
                indptr,
                indices,
                values,
            } => {
                let mut values = values.clone();
                for i in 0..self.rows {
                    let f = factor(i);
                    if f != 1.0 {
                        values[indptr[i]..indptr[i + 1]]
                            .iter_mut()
                            .for_each(|v| *v *= f);
                    }
                }
                Storage::Sparse {
                    indptr: indptr.clone(),
                    indices: indices.clone(),
                    values,
                }
            }
        };
        Self::build(self.rows, self.cols, storage)
    }

    /// Matrix with the rows listed in `order` (repetition allowed).
    pub fn select_rows(&self, order: &[usize]) -> Result<Self> {
        let mut entries = Vec::new();
        for (r, &i) in order.iter().enumerate() {
            self.row(i).for_each(|j, v| entries.push((r, j, v)));
        }
        let picked = Self::from_triplets(order.len(), self.cols, entries)?;
        Ok(if self.is_sparse() {
            picked
        } else {
            picked.to_dense_storage()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero_rows() {
        let err = RowMatrix::from_dense(2, 2, vec![1.0, 0.0, 0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::ZeroRow(1)));
        let err = RowMatrix::from_csr(2, 3, vec![0, 1, 1], vec![2], vec![1.0]).unwrap_err();
        assert!(matches!(err, Error::ZeroRow(1)));
    }

    #[test]
    fn rejects_unsorted_or_out_of_range_columns() {
        assert!(RowMatrix::from_csr(1, 3, vec![0, 2], vec![2, 1], vec![1.0, 1.0]).is_err());
        assert!(RowMatrix::from_csr(1, 3, vec![0, 2], vec![1, 1], vec![1.0, 1.0]).is_err());
        assert!(RowMatrix::from_csr(1, 3, vec![0, 1], vec![3], vec![1.0]).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        assert!(RowMatrix::from_dense(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(RowMatrix::from_triplets(1, 2, vec![(0, 0, f64::INFINITY)]).is_err());
    }

    #[test]
    fn triplets_sum_duplicates() {
        let a =
            RowMatrix::from_triplets(2, 2, vec![(1, 1, 1.0), (0, 0, 2.0), (1, 1, 3.0)]).unwrap();
        assert_eq!(a.row(1).get(1), 4.0);
        assert_eq!(a.nnz(), 2);
    }

    #[test]
    fn density_examples() {
        let dense = RowMatrix::from_dense(10, 10, vec![0.5; 100]).unwrap();
        assert_eq!(dense.density().delta, 1.0);
        let eye = RowMatrix::identity(10);
        let d = eye.density();
        assert!((d.delta - 0.1).abs() < 1e-15);
        assert!(d.per_row_delta.iter().all(|&p| (p - 0.1).abs() < 1e-15));
    }

    #[test]
    fn density_counts_structure_not_values() {
        // an explicitly stored zero counts in sparse storage
        let a = RowMatrix::from_csr(1, 4, vec![0, 2], vec![0, 1], vec![1.0, 0.0]).unwrap();
        assert_eq!(a.density().delta, 0.5);
        // but not in dense storage
        let d = a.to_dense_storage();
        assert_eq!(d.density().delta, 0.25);
    }

    #[test]
    fn storage_conversions_agree() {
        let a = RowMatrix::from_triplets(
            3,
            4,
            vec![(0, 1, 2.0), (1, 3, -1.0), (2, 0, 0.5), (2, 2, 4.0)],
        )
        .unwrap();
        let d = a.to_dense_storage();
        assert!(!d.is_sparse());
        assert_eq!(d.to_sparse(), a);
        assert_eq!(a.row_sq_norms(), d.row_sq_norms());
        let y = [1.0, -2.0, 3.0];
        assert_eq!(a.tr_mul_vec(&y), d.tr_mul_vec(&y));
    }

    #[test]
    fn select_rows_duplicates() {
        let a = RowMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let s = a.select_rows(&[1, 0, 1]).unwrap();
        assert_eq!(s.to_dense(), vec![3.0, 4.0, 1.0, 2.0, 3.0, 4.0]);
        assert!(!s.is_sparse());
    }
}
