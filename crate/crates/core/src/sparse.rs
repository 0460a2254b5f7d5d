//! Compressed sparse row matrices.

use std::io::{self, Write};

use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SparseError {
    #[error("entry ({row}, {col}) lies outside a {n_rows}x{n_cols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        n_rows: usize,
        n_cols: usize,
    },
    #[error("entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
}

/// Real matrix in CSR layout. Column indices are sorted within each row and
/// every `(row, col)` pair appears at most once.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates in
    /// input order.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, T)],
    ) -> Result<Self, SparseError> {
        for &(row, col, v) in triplets {
            if row >= n_rows || col >= n_cols {
                return Err(SparseError::IndexOutOfRange {
                    row,
                    col,
                    n_rows,
                    n_cols,
                });
            }
            if !v.is_finite() {
                return Err(SparseError::NonFinite { row, col });
            }
        }
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&k| (triplets[k].0, triplets[k].1));

        let mut row_offsets = vec![0usize; n_rows + 1];
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<T> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for k in order {
            let (row, col, v) = triplets[k];
            if last == Some((row, col)) {
                *values.last_mut().expect("entry exists") += v;
            } else {
                col_indices.push(col);
                values.push(v);
                row_offsets[row + 1] += 1;
                last = Some((row, col));
            }
        }
        for i in 0..n_rows {
            row_offsets[i + 1] += row_offsets[i];
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Matrix with the given sorted column pattern per row and all values zero.
    pub fn from_pattern(n_cols: usize, rows: &[Vec<usize>]) -> Self {
        let mut row_offsets = Vec::with_capacity(rows.len() + 1);
        row_offsets.push(0);
        let mut col_indices = Vec::new();
        for cols in rows {
            debug_assert!(cols.windows(2).all(|w| w[0] < w[1]));
            col_indices.extend_from_slice(cols);
            row_offsets.push(col_indices.len());
        }
        let nnz = col_indices.len();
        Self {
            n_rows: rows.len(),
            n_cols,
            row_offsets,
            col_indices,
            values: vec![T::zero(); nnz],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![T::one(); n],
        }
    }

    /// Dense row-major input; exact zeros are not stored.
    pub fn from_dense(rows: &[Vec<T>]) -> Self {
        let n_cols = rows.first().map_or(0, Vec::len);
        let triplets: Vec<(usize, usize, T)> = rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != T::zero())
                    .map(move |(j, &v)| (i, j, v))
            })
            .collect();
        Self::from_triplets(rows.len(), n_cols, &triplets).expect("dense input is in range")
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let span = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[span.clone()], &self.values[span])
    }

    /// Storage index of entry `(i, j)`, if it is in the pattern.
    #[inline]
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let start = self.row_offsets[i];
        self.row(i).0.binary_search(&j).ok().map(|k| start + k)
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.position(i, j).map_or(T::zero(), |k| self.values[k])
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n_rows.min(self.n_cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn mul_vec_into(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.n_cols, "vector length must match column count");
        assert_eq!(y.len(), self.n_rows, "output length must match row count");
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n_rows];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// Block `rows x cols` of the matrix, re-indexed from zero.
    pub fn block(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Self {
        let mut row_offsets = Vec::with_capacity(rows.len() + 1);
        row_offsets.push(0);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        for i in rows.clone() {
            let (c, v) = self.row(i);
            for (&j, &val) in c.iter().zip(v) {
                if cols.contains(&j) {
                    col_indices.push(j - cols.start);
                    values.push(val);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Self {
            n_rows: rows.len(),
            n_cols: cols.len(),
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn transpose(&self) -> Self {
        let triplets: Vec<(usize, usize, T)> = (0..self.n_rows)
            .flat_map(|i| {
                let (c, v) = self.row(i);
                c.iter().zip(v).map(move |(&j, &val)| (j, i, val))
            })
            .collect();
        Self::from_triplets(self.n_cols, self.n_rows, &triplets).expect("transpose in range")
    }

    /// Largest `|a_ij - a_ji|` relative to `max |a_ij|`.
    pub fn asymmetry(&self) -> T {
        if self.n_rows != self.n_cols {
            return T::infinity();
        }
        let scale = self.max_abs();
        if scale == T::zero() {
            return T::zero();
        }
        let mut worst = T::zero();
        for i in 0..self.n_rows {
            let (c, v) = self.row(i);
            for (&j, &val) in c.iter().zip(v) {
                worst = worst.max((val - self.get(j, i)).abs());
            }
        }
        worst / scale
    }

    pub fn is_symmetric(&self, rel_tol: T) -> bool {
        self.asymmetry() <= rel_tol
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut dense = vec![vec![T::zero(); self.n_cols]; self.n_rows];
        for (i, row) in dense.iter_mut().enumerate() {
            let (c, v) = self.row(i);
            for (&j, &val) in c.iter().zip(v) {
                row[j] = val;
            }
        }
        dense
    }

    /// MatrixMarket `coordinate real general` format, 1-based indices.
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.n_rows, self.n_cols, self.nnz())?;
        for i in 0..self.n_rows {
            let (c, v) = self.row(i);
            for (&j, &val) in c.iter().zip(v) {
                writeln!(w, "{} {} {:e}", i + 1, j + 1, val.as_f64())?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn triplets_sum_duplicates_and_sort() {
        let m = CsrMatrix::from_triplets(
            2,
            3,
            &[(1, 2, 1.0), (0, 1, 2.0), (1, 0, 3.0), (0, 1, 0.5)],
        )
        .unwrap();
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.get(0, 1), 2.5);
        assert_eq!(m.row(1).0, &[0, 2]);
        assert_eq!(m.mul_vec(&[1.0, 1.0, 1.0]), vec![2.5, 4.0]);
    }

    #[test]
    fn triplet_errors() {
        assert!(matches!(
            CsrMatrix::from_triplets(2, 2, &[(2, 0, 1.0)]),
            Err(SparseError::IndexOutOfRange { .. })
        ));
        assert_eq!(
            CsrMatrix::from_triplets(2, 2, &[(0, 0, f64::NAN)]).unwrap_err(),
            SparseError::NonFinite { row: 0, col: 0 }
        );
    }

    #[test]
    fn block_and_symmetry() {
        let m = CsrMatrix::from_dense(&[
            vec![2.0, -1.0, 0.0],
            vec![-1.0, 2.0, -0.5],
            vec![0.0, -0.5, 1.0],
        ]);
        assert!(m.is_symmetric(0.0));
        let b = m.block(0..2, 1..3);
        assert_eq!(b.to_dense(), vec![vec![-1.0, 0.0], vec![2.0, -0.5]]);
        let skew = CsrMatrix::from_dense(&[vec![1.0, 0.3], vec![0.0, 1.0]]);
        assert!(!skew.is_symmetric(1e-12));
    }

    #[test]
    fn matrix_market_header() {
        let m = CsrMatrix::<f64>::identity(2);
        let mut out = Vec::new();
        m.write_matrix_market(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("%%MatrixMarket matrix coordinate real general"));
        assert_eq!(lines.next(), Some("2 2 2"));
        assert_eq!(lines.next(), Some("1 1 1e0"));
    }

    proptest! {
        #[test]
        fn matvec_matches_dense(
            entries in proptest::collection::vec((0usize..6, 0usize..5, -10.0f64..10.0), 0..40),
            x in proptest::collection::vec(-5.0f64..5.0, 5),
        ) {
            let m = CsrMatrix::from_triplets(6, 5, &entries).unwrap();
            let mut dense = vec![vec![0.0; 5]; 6];
            for &(i, j, v) in &entries {
                dense[i][j] += v;
            }
            let y = m.mul_vec(&x);
            for i in 0..6 {
                let expect: f64 = (0..5).map(|j| dense[i][j] * x[j]).sum();
                prop_assert!((y[i] - expect).abs() <= 1e-9);
            }
            prop_assert_eq!(m.transpose().transpose(), m);
        }
    }
}
