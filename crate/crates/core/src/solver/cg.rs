//! Jacobi-preconditioned conjugate gradients.

use crate::scalar::Real;
use crate::sparse::CsrMatrix;

use super::LinearSolveError;

#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome<T> {
    pub solution: Vec<T>,
    pub iterations: usize,
    pub relative_residual: T,
}

/// Solves `A x = rhs` from a zero initial guess.
pub fn cg_solve<T: Real>(a: &CsrMatrix<T>, rhs: &[T], tol: T) -> Result<CgOutcome<T>, LinearSolveError> {
    cg_solve_from(a, rhs, vec![T::zero(); rhs.len()], tol)
}

/// Solves `A x = rhs` starting from `x0`; stops once `|rhs - A x| <= tol |rhs|`.
/// Gives up after `10 n` iterations.
pub fn cg_solve_from<T: Real>(
    a: &CsrMatrix<T>,
    rhs: &[T],
    x0: Vec<T>,
    tol: T,
) -> Result<CgOutcome<T>, LinearSolveError> {
    let n = a.n_rows();
    if a.n_cols() != n || rhs.len() != n || x0.len() != n {
        return Err(LinearSolveError::DimensionMismatch {
            rows: a.n_rows(),
            cols: a.n_cols(),
            rhs: rhs.len(),
        });
    }
    let asymmetry = a.asymmetry();
    if asymmetry > T::lit(1e-10) {
        return Err(LinearSolveError::NotSymmetric {
            relative_asymmetry: asymmetry.as_f64(),
        });
    }
    let diag = a.diagonal();
    if let Some(row) = diag.iter().position(|&d| !(d > T::zero())) {
        return Err(LinearSolveError::NonPositiveDiagonal {
            row,
            value: diag[row].as_f64(),
        });
    }
    let inv_diag: Vec<T> = diag.iter().map(|&d| T::one() / d).collect();

    let norm = |v: &[T]| v.iter().map(|&x| x * x).sum::<T>().sqrt();
    let dot = |u: &[T], v: &[T]| u.iter().zip(v).map(|(&x, &y)| x * y).sum::<T>();

    let rhs_norm = norm(rhs);
    let mut x = x0;
    if rhs_norm == T::zero() {
        return Ok(CgOutcome {
            solution: vec![T::zero(); n],
            iterations: 0,
            relative_residual: T::zero(),
        });
    }
    let mut r: Vec<T> = a.mul_vec(&x).iter().zip(rhs).map(|(&ax, &b)| b - ax).collect();
    let mut rel = norm(&r) / rhs_norm;
    if rel <= tol {
        return Ok(CgOutcome {
            solution: x,
            iterations: 0,
            relative_residual: rel,
        });
    }
    let mut z: Vec<T> = r.iter().zip(&inv_diag).map(|(&ri, &di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![T::zero(); n];
    let max_iter = 10 * n.max(1);
    for it in 1..=max_iter {
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            return Err(LinearSolveError::NotPositiveDefinite {
                pivot: it,
                value: pap.as_f64(),
            });
        }
        let alpha = rz / pap;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        rel = norm(&r) / rhs_norm;
        if rel <= tol {
            return Ok(CgOutcome {
                solution: x,
                iterations: it,
                relative_residual: rel,
            });
        }
        for k in 0..n {
            z[k] = r[k] * inv_diag[k];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    Err(LinearSolveError::Stagnation {
        iterations: max_iter,
        relative_residual: rel.as_f64(),
    })
}
