//! Surface finite elements for nonlinear elliptic Dirichlet problems on
//! triangulated surfaces, with audits of the discrete maximum principle.
//!
//! The numerical core is generic over [`scalar::Real`] (`f32` or `f64`); the
//! aliases below fix `f64`, which the command-line tool uses.

// negated comparisons reject NaN on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod audit;
pub mod cli;
pub mod fem;
pub mod io;
pub mod mesh;
pub mod problems;
pub mod scalar;
pub mod solver;
pub mod sparse;
pub mod vec3;

pub type Mesh = mesh::SurfaceMesh<f64>;
pub type Problem = problems::ProblemSpec<f64>;
pub type Field = fem::NodalField<f64>;
pub type Matrix = sparse::CsrMatrix<f64>;
pub type SolveOptions = solver::SolveOptions<f64>;
pub type Point = vec3::Vec3<f64>;
