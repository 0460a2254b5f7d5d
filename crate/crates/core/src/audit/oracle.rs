//! Brute-force check of the matrix maximum principles on small random systems
//! of the form `[[A, A~], [0, I]]`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Largest `n + m` the dense oracle accepts.
pub const MAX_ORACLE_SIZE: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowSumMode {
    /// Row sums drawn nonnegative; the weak principle is asserted.
    Nonnegative,
    /// Row sums exactly zero; the strict weak principle is asserted.
    Zero,
}

/// One system `A c + A~ c~ = y` with `y <= 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleInstance {
    pub interior: Vec<Vec<f64>>,
    pub coupling: Vec<Vec<f64>>,
    pub boundary: Vec<f64>,
    /// Interior part of `A_bar c_bar`.
    pub rhs: Vec<f64>,
}

impl OracleInstance {
    /// Interior values `c = A^{-1} (y - A~ c~)`, or `None` if `A` is singular.
    pub fn solve(&self) -> Option<Vec<f64>> {
        let n = self.interior.len();
        let m = self.boundary.len();
        let a = DMatrix::from_fn(n, n, |i, j| self.interior[i][j]);
        let at = DMatrix::from_fn(n, m, |i, j| self.coupling[i][j]);
        let rhs = DVector::from_vec(self.rhs.clone()) - at * DVector::from_vec(self.boundary.clone());
        a.lu().solve(&rhs).map(|c| c.iter().copied().collect())
    }

    /// Amount by which the solution exceeds the bound of the given mode:
    /// `max{0, max c~}` for the weak principle, `max c~` for the strict one.
    pub fn excess(&self, mode: RowSumMode) -> Option<f64> {
        let c = self.solve()?;
        let boundary_max = self.boundary.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let bound = match mode {
            RowSumMode::Nonnegative => boundary_max.max(0.0),
            RowSumMode::Zero => boundary_max,
        };
        let overall = c.iter().copied().fold(boundary_max, f64::max);
        Some(overall - bound)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleStats {
    pub mode: RowSumMode,
    pub trials: usize,
    /// Draws discarded because `A` failed the eigenvalue test.
    pub rejected: usize,
    pub violations: usize,
    pub worst_excess: f64,
    pub counterexample: Option<OracleInstance>,
}

impl OracleStats {
    pub fn pass(&self) -> bool {
        self.violations == 0
    }
}

/// Draws `trials` systems with nonpositive off-diagonals, row sums per `mode`
/// and positive definite `A`, solves them densely and counts violations of
/// the corresponding maximum principle.
///
/// # Panics
/// If `size_bound` is outside `2..=MAX_ORACLE_SIZE`.
pub fn algebraic_dwmp_oracle(trials: usize, size_bound: usize, seed: u64, mode: RowSumMode) -> OracleStats {
    assert!(
        (2..=MAX_ORACLE_SIZE).contains(&size_bound),
        "size bound must lie in 2..={MAX_ORACLE_SIZE}"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = OracleStats {
        mode,
        trials,
        rejected: 0,
        violations: 0,
        worst_excess: f64::NEG_INFINITY,
        counterexample: None,
    };
    for _ in 0..trials {
        let instance = loop {
            match draw_instance(&mut rng, size_bound, mode) {
                Some(inst) => break inst,
                None => stats.rejected += 1,
            }
        };
        let scale = 1.0
            + instance.boundary.iter().fold(0.0f64, |m, v| m.max(v.abs()))
            + instance.rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let excess = instance.excess(mode).unwrap_or(f64::INFINITY);
        stats.worst_excess = stats.worst_excess.max(excess);
        if excess > 1e-9 * scale {
            stats.violations += 1;
            stats.counterexample.get_or_insert(instance);
        }
    }
    stats
}

fn draw_instance(rng: &mut ChaCha8Rng, size_bound: usize, mode: RowSumMode) -> Option<OracleInstance> {
    let n = rng.gen_range(1..size_bound);
    let m = rng.gen_range(1..=size_bound - n);
    let mut interior = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.6) {
                let v = -rng.gen::<f64>();
                interior[i][j] = v;
                interior[j][i] = v;
            }
        }
    }
    let mut coupling = vec![vec![0.0; m]; n];
    for row in coupling.iter_mut() {
        for v in row.iter_mut() {
            if rng.gen_bool(0.5) {
                *v = -rng.gen::<f64>();
            }
        }
    }
    for i in 0..n {
        let off: f64 = interior[i].iter().sum::<f64>() + coupling[i].iter().sum::<f64>();
        let row_sum = match mode {
            RowSumMode::Nonnegative if rng.gen_bool(0.7) => rng.gen::<f64>(),
            _ => 0.0,
        };
        interior[i][i] = row_sum - off;
    }

    let a = DMatrix::from_fn(n, n, |i, j| interior[i][j]);
    let max_abs = a.amax();
    let min_eig = a.symmetric_eigenvalues().min();
    if !(min_eig > 1e-8 * max_abs) {
        return None;
    }

    let boundary = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let rhs = (0..n)
        .map(|_| if rng.gen_bool(0.3) { 0.0 } else { -rng.gen::<f64>() })
        .collect();
    Some(OracleInstance {
        interior,
        coupling,
        boundary,
        rhs,
    })
}
