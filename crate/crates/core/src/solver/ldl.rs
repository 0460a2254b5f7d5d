//! Sparse `L D L^T` factorization (up-looking, elimination-tree driven) with a
//! reverse Cuthill-McKee ordering. A factorization with all pivots of `D`
//! positive certifies that a symmetric matrix is positive definite.

use std::collections::VecDeque;

use crate::scalar::Real;
use crate::sparse::CsrMatrix;

use super::LinearSolveError;

const NONE: usize = usize::MAX;

#[derive(Debug, Clone)]
pub struct LdlFactor<T> {
    /// `perm[k]` is the original index placed at position `k`.
    perm: Vec<usize>,
    col_offsets: Vec<usize>,
    row_indices: Vec<usize>,
    values: Vec<T>,
    d: Vec<T>,
}

/// Reverse Cuthill-McKee ordering of the symmetric pattern of `a`.
pub fn reverse_cuthill_mckee<T: Real>(a: &CsrMatrix<T>) -> Vec<usize> {
    let n = a.n_rows();
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).0.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    for &start in &by_degree {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = a.row(v).0.iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

impl<T: Real> LdlFactor<T> {
    /// Factors the symmetric matrix `a` (only its lower-or-upper pattern is
    /// read through the permuted upper triangle). Fails at the first pivot
    /// that is not strictly positive.
    pub fn factor(a: &CsrMatrix<T>) -> Result<Self, LinearSolveError> {
        let n = a.n_rows();
        if a.n_cols() != n {
            return Err(LinearSolveError::DimensionMismatch {
                rows: n,
                cols: a.n_cols(),
                rhs: n,
            });
        }
        let perm = reverse_cuthill_mckee(a);
        let mut pinv = vec![0usize; n];
        for (k, &p) in perm.iter().enumerate() {
            pinv[p] = k;
        }
        // column k of the permuted matrix restricted to rows <= k
        let pinv = &pinv;
        let column = |k: usize| {
            let (cols, vals) = a.row(perm[k]);
            cols.iter()
                .zip(vals)
                .map(move |(&j, &v)| (pinv[j], v))
                .filter(move |&(i, _)| i <= k)
        };

        // symbolic: elimination tree and column counts
        let mut parent = vec![NONE; n];
        let mut flag = vec![NONE; n];
        let mut counts = vec![0usize; n];
        for k in 0..n {
            flag[k] = k;
            for (mut i, _) in column(k) {
                while flag[i] != k {
                    if parent[i] == NONE {
                        parent[i] = k;
                    }
                    counts[i] += 1;
                    flag[i] = k;
                    i = parent[i];
                }
            }
        }
        let mut col_offsets = vec![0usize; n + 1];
        for k in 0..n {
            col_offsets[k + 1] = col_offsets[k] + counts[k];
        }
        let nnz = col_offsets[n];
        let mut row_indices = vec![0usize; nnz];
        let mut values = vec![T::zero(); nnz];
        let mut d = vec![T::zero(); n];

        // numeric
        let mut y = vec![T::zero(); n];
        let mut pattern = vec![0usize; n];
        let mut filled = vec![0usize; n];
        flag.iter_mut().for_each(|f| *f = NONE);
        for k in 0..n {
            let mut top = n;
            flag[k] = k;
            for (i0, v) in column(k) {
                y[i0] += v;
                let mut len = 0;
                let mut i = i0;
                while flag[i] != k {
                    pattern[len] = i;
                    len += 1;
                    flag[i] = k;
                    i = parent[i];
                }
                while len > 0 {
                    top -= 1;
                    len -= 1;
                    pattern[top] = pattern[len];
                }
            }
            d[k] = y[k];
            y[k] = T::zero();
            for &i in &pattern[top..n] {
                let yi = y[i];
                y[i] = T::zero();
                let start = col_offsets[i];
                let end = start + filled[i];
                for p in start..end {
                    y[row_indices[p]] -= values[p] * yi;
                }
                let l_ki = yi / d[i];
                d[k] -= l_ki * yi;
                row_indices[end] = k;
                values[end] = l_ki;
                filled[i] += 1;
            }
            if !(d[k] > T::zero()) || !d[k].is_finite() {
                return Err(LinearSolveError::NotPositiveDefinite {
                    pivot: perm[k],
                    value: d[k].as_f64(),
                });
            }
        }
        Ok(Self {
            perm,
            col_offsets,
            row_indices,
            values,
            d,
        })
    }

    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        let n = self.d.len();
        assert_eq!(rhs.len(), n, "right-hand side length must match the factor");
        let mut x: Vec<T> = self.perm.iter().map(|&p| rhs[p]).collect();
        for j in 0..n {
            let xj = x[j];
            for p in self.col_offsets[j]..self.col_offsets[j + 1] {
                x[self.row_indices[p]] -= self.values[p] * xj;
            }
        }
        for j in 0..n {
            x[j] /= self.d[j];
        }
        for j in (0..n).rev() {
            let mut s = x[j];
            for p in self.col_offsets[j]..self.col_offsets[j + 1] {
                s -= self.values[p] * x[self.row_indices[p]];
            }
            x[j] = s;
        }
        let mut out = vec![T::zero(); n];
        for (k, &p) in self.perm.iter().enumerate() {
            out[p] = x[k];
        }
        out
    }

    /// Pivots of `D` in factorization order.
    pub fn pivots(&self) -> &[T] {
        &self.d
    }

    pub fn factor_nnz(&self) -> usize {
        self.values.len()
    }
}

/// Factors and solves; fails with a not-positive-definite signal on a
/// nonpositive pivot.
pub fn cholesky_solve<T: Real>(a: &CsrMatrix<T>, rhs: &[T]) -> Result<Vec<T>, LinearSolveError> {
    if rhs.len() != a.n_rows() {
        return Err(LinearSolveError::DimensionMismatch {
            rows: a.n_rows(),
            cols: a.n_cols(),
            rhs: rhs.len(),
        });
    }
    Ok(LdlFactor::factor(a)?.solve(rhs))
}

/// True iff the symmetric matrix admits `L D L^T` with positive `D`.
pub fn is_positive_definite<T: Real>(a: &CsrMatrix<T>) -> bool {
    LdlFactor::factor(a).is_ok()
}
