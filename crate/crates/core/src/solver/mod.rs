//! Frozen-coefficient (Picard) iteration for the nonlinear system, with a
//! sparse SPD subsolver for each linearized interior problem.

mod cg;
mod ldl;

use serde::Serialize;
use thiserror::Error;

use crate::fem::{assemble, AssemblyOptions, FemError, NodalField};
use crate::mesh::SurfaceMesh;
use crate::problems::ProblemSpec;
use crate::scalar::Real;
use crate::sparse::CsrMatrix;

pub use cg::{cg_solve, cg_solve_from, CgOutcome};
pub use ldl::{cholesky_solve, is_positive_definite, reverse_cuthill_mckee, LdlFactor};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinearSolveError {
    #[error("matrix is {rows}x{cols} but the right-hand side has length {rhs}")]
    DimensionMismatch { rows: usize, cols: usize, rhs: usize },
    #[error("matrix is not symmetric (relative asymmetry {relative_asymmetry:e})")]
    NotSymmetric { relative_asymmetry: f64 },
    #[error("diagonal entry {row} is not positive ({value:e})")]
    NonPositiveDiagonal { row: usize, value: f64 },
    #[error("matrix is not positive definite (pivot at {pivot}: {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("no convergence after {iterations} iterations (relative residual {relative_residual:e})")]
    Stagnation { iterations: usize, relative_residual: f64 },
}

/// Summary of the linear system that failed to solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixDiagnostics {
    pub n: usize,
    pub nnz: usize,
    pub min_diagonal: f64,
    pub max_abs: f64,
    pub relative_asymmetry: f64,
}

impl MatrixDiagnostics {
    fn of<T: Real>(a: &CsrMatrix<T>) -> Self {
        Self {
            n: a.n_rows(),
            nnz: a.nnz(),
            min_diagonal: a.diagonal().iter().fold(f64::INFINITY, |m, d| m.min(d.as_f64())),
            max_abs: a.max_abs().as_f64(),
            relative_asymmetry: a.asymmetry().as_f64(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid solve options: {0}")]
    InvalidOptions(String),
    #[error("assembly failed at Picard iteration {iteration}: {source}")]
    Assembly { iteration: usize, source: FemError },
    #[error("linear solve failed at Picard iteration {iteration} ({diagnostics:?}): {source}")]
    LinearSolve {
        iteration: usize,
        source: LinearSolveError,
        diagnostics: MatrixDiagnostics,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Subsolver {
    Cg,
    #[default]
    Cholesky,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InitialGuess {
    /// Boundary data on the boundary, zero in the interior.
    #[default]
    ZeroInterior,
    /// Boundary data on the boundary, their mean in the interior.
    BoundaryMean,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions<T> {
    pub max_picard: usize,
    /// Stop when the sup-norm of the nodal increment drops to this value.
    pub picard_tol: T,
    /// Relative residual target of the CG subsolver.
    pub linear_tol: T,
    /// Relaxation factor in `(0, 1]`.
    pub damping: T,
    pub subsolver: Subsolver,
    pub initial_guess: InitialGuess,
    pub assembly: AssemblyOptions,
}

impl<T: Real> Default for SolveOptions<T> {
    fn default() -> Self {
        Self {
            max_picard: 200,
            picard_tol: T::lit(1e-10),
            linear_tol: T::lit(1e-12),
            damping: T::one(),
            subsolver: Subsolver::default(),
            initial_guess: InitialGuess::default(),
            assembly: AssemblyOptions::default(),
        }
    }
}

impl<T: Real> SolveOptions<T> {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.picard_tol > T::zero()) || !(self.linear_tol > T::zero()) {
            return Err(SolverError::InvalidOptions("tolerances must be positive".into()));
        }
        if !(self.damping > T::zero() && self.damping <= T::one()) {
            return Err(SolverError::InvalidOptions(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        if self.max_picard == 0 {
            return Err(SolverError::InvalidOptions("max_picard must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    /// Number of linearized solves performed.
    pub iterations: usize,
    /// Sup-norm of the last nodal increment.
    pub final_increment: f64,
    /// History of sup-norm increments, one per iteration.
    pub increments: Vec<f64>,
    /// CG iterations per Picard step (zero for the direct subsolver).
    pub linear_iters_per_step: Vec<usize>,
    pub converged: bool,
}

/// Solves the nonlinear Dirichlet problem by Picard iteration.
///
/// Each step freezes `b` and `r` at the current iterate `c^k`, solves
/// `A(c^k) c = d - A~(c^k) g~` for the interior values and relaxes
/// `c^{k+1} = c^k + damping (c - c^k)`. Boundary values stay pinned to `g`.
pub fn picard_solve<T: Real>(
    mesh: &SurfaceMesh<T>,
    problem: &ProblemSpec<T>,
    options: &SolveOptions<T>,
) -> Result<(NodalField<T>, SolveReport), SolverError> {
    options.validate()?;
    let n = mesh.n_interior();
    let boundary = NodalField::boundary_extension(mesh, |x| (problem.g)(x))
        .map_err(|source| SolverError::Assembly { iteration: 0, source })?;
    let mut current = boundary.into_inner();
    if options.initial_guess == InitialGuess::BoundaryMean && mesh.n_boundary() > 0 {
        let mean = current[n..].iter().copied().sum::<T>() / T::lit(mesh.n_boundary() as f64);
        current[..n].iter_mut().for_each(|c| *c = mean);
    }
    let g_tilde = current[n..].to_vec();

    let mut report = SolveReport {
        iterations: 0,
        final_increment: f64::INFINITY,
        increments: Vec::new(),
        linear_iters_per_step: Vec::new(),
        converged: false,
    };
    for iteration in 1..=options.max_picard {
        let system = assemble(mesh, problem, &current, &options.assembly)
            .map_err(|source| SolverError::Assembly { iteration, source })?;
        let a = system.interior_block(n);
        let coupling = system.coupling_block(n);
        let lifted = coupling.mul_vec(&g_tilde);
        let rhs: Vec<T> = system.load[..n].iter().zip(&lifted).map(|(&d, &l)| d - l).collect();

        let fail = |source| SolverError::LinearSolve {
            iteration,
            source,
            diagnostics: MatrixDiagnostics::of(&a),
        };
        let (solution, linear_iters) = match options.subsolver {
            Subsolver::Cholesky => (cholesky_solve(&a, &rhs).map_err(fail)?, 0),
            Subsolver::Cg => {
                let out = cg_solve_from(&a, &rhs, current[..n].to_vec(), options.linear_tol).map_err(fail)?;
                (out.solution, out.iterations)
            }
        };

        let mut increment = T::zero();
        for (c, s) in current[..n].iter_mut().zip(&solution) {
            let step = options.damping * (*s - *c);
            *c += step;
            increment = increment.max(step.abs());
        }
        report.iterations = iteration;
        report.final_increment = increment.as_f64();
        report.increments.push(increment.as_f64());
        report.linear_iters_per_step.push(linear_iters);
        if increment <= options.picard_tol {
            report.converged = true;
            break;
        }
    }
    let field = NodalField::new(mesh, current).map_err(|source| SolverError::Assembly {
        iteration: report.iterations,
        source,
    })?;
    Ok((field, report))
}
