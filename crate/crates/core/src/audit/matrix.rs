//! Sign pattern, row sums and positive definiteness of the enlarged system matrix.

use serde::Serialize;

use crate::scalar::Real;
use crate::solver::LdlFactor;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignViolation {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignPatternSection {
    pub tolerance: f64,
    /// Largest off-diagonal entry over interior rows.
    pub max_off_diagonal: f64,
    pub violations: Vec<SignViolation>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowSumSection {
    pub tolerance: f64,
    pub row_sum_min: f64,
    pub violations: Vec<(usize, f64)>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpdSection {
    pub n: usize,
    pub min_pivot: Option<f64>,
    pub failure: Option<String>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixConditions {
    pub max_abs: f64,
    pub sign_pattern: SignPatternSection,
    pub row_sums: RowSumSection,
    pub spd: SpdSection,
}

impl MatrixConditions {
    pub fn pass(&self) -> bool {
        self.sign_pattern.pass && self.row_sums.pass && self.spd.pass
    }
}

/// Audits the first `n_interior` rows of `a_bar`: nonpositive off-diagonals,
/// nonnegative full row sums, and a Cholesky certificate for the interior block.
///
/// Tolerances are `1e-12 max|a|` for signs and `1e-10 max|a|` for row sums.
pub fn check_matrix_conditions<T: Real>(a_bar: &CsrMatrix<T>, n_interior: usize) -> MatrixConditions {
    let n = n_interior.min(a_bar.n_rows());
    let max_abs = a_bar.max_abs().as_f64();
    let tol_sign = 1e-12 * max_abs;
    let tol_row = 1e-10 * max_abs;

    let mut sign_violations = Vec::new();
    let mut max_off = f64::NEG_INFINITY;
    let mut row_violations = Vec::new();
    let mut row_min = f64::INFINITY;
    for i in 0..n {
        let (cols, vals) = a_bar.row(i);
        let mut sum = 0.0;
        for (&j, &v) in cols.iter().zip(vals) {
            let v = v.as_f64();
            sum += v;
            if j == i {
                continue;
            }
            max_off = max_off.max(v);
            if v > tol_sign {
                sign_violations.push(SignViolation { row: i, col: j, value: v });
            }
        }
        row_min = row_min.min(sum);
        if sum < -tol_row {
            row_violations.push((i, sum));
        }
    }

    let block = a_bar.block(0..n, 0..n);
    let spd = if n == 0 {
        SpdSection {
            n,
            min_pivot: None,
            failure: None,
            pass: true,
        }
    } else {
        match LdlFactor::factor(&block) {
            Ok(f) => SpdSection {
                n,
                min_pivot: Some(f.pivots().iter().fold(f64::INFINITY, |m, d| m.min(d.as_f64()))),
                failure: None,
                pass: true,
            },
            Err(e) => SpdSection {
                n,
                min_pivot: None,
                failure: Some(e.to_string()),
                pass: false,
            },
        }
    };

    MatrixConditions {
        max_abs,
        sign_pattern: SignPatternSection {
            tolerance: tol_sign,
            max_off_diagonal: if max_off.is_finite() { max_off } else { 0.0 },
            pass: sign_violations.is_empty(),
            violations: sign_violations,
        },
        row_sums: RowSumSection {
            tolerance: tol_row,
            row_sum_min: if row_min.is_finite() { row_min } else { 0.0 },
            pass: row_violations.is_empty(),
            violations: row_violations,
        },
        spd,
    }
}
