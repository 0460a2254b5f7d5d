//! Assembly of `A(c) c + A~(c) c~ = d` at a frozen iterate `c`.
//!
//! For interior rows `i` and all columns `j`
//!
//! ```text
//! a_ij = int b(x, u_h, grad u_h) grad chi_j . grad chi_i + int r(x, u_h) chi_j chi_i
//! d_i  = int (f(x) - q(x, 0)) chi_i
//! ```
//!
//! with every integral taken by the edge-midpoint rule. Boundary rows are
//! identity rows with right-hand side `g(B_i)`, which makes the system square.

use rayon::prelude::*;

use crate::mesh::SurfaceMesh;
use crate::problems::ProblemSpec;
use crate::scalar::Real;
use crate::sparse::CsrMatrix;
use crate::vec3::Vec3;

use super::element::{element_geometry, gradient_pair_products, EDGES};
use super::FemError;

/// Where coefficient functions are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoefficientPoint {
    /// At the quadrature point on the discrete surface.
    #[default]
    MeshPoint,
    /// At the closest point of the exact surface (sphere/torus tags only).
    ExactProjection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AssemblyOptions {
    /// Sequential element loop; results are bitwise reproducible.
    pub deterministic: bool,
    pub coefficients: CoefficientPoint,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self {
            deterministic: true,
            coefficients: CoefficientPoint::MeshPoint,
        }
    }
}

/// Assembled system at one iterate.
#[derive(Debug, Clone)]
pub struct AssembledSystem<T> {
    /// Square matrix: interior rows `b_ij + r_ij`, boundary rows of the identity.
    pub matrix: CsrMatrix<T>,
    /// `d_i` on interior rows, `g(B_i)` on boundary rows.
    pub load: Vec<T>,
    /// Diffusion part `b_ij` for every row (no boundary modification).
    pub diffusion: CsrMatrix<T>,
    /// Reaction part `r_ij` for every row (no boundary modification).
    pub reaction: CsrMatrix<T>,
    /// `(min, max)` of `f - q(., 0)` over all quadrature points.
    pub reduced_source_range: (T, T),
}

impl<T: Real> AssembledSystem<T> {
    /// Interior block `A` (`n x n`).
    pub fn interior_block(&self, n_interior: usize) -> CsrMatrix<T> {
        self.matrix.block(0..n_interior, 0..n_interior)
    }

    /// Interior-to-boundary coupling `A~` (`n x m`).
    pub fn coupling_block(&self, n_interior: usize) -> CsrMatrix<T> {
        self.matrix.block(0..n_interior, n_interior..self.matrix.n_cols())
    }
}

/// Sorted vertex adjacency including the diagonal.
fn sparsity_pattern<T: Real>(mesh: &SurfaceMesh<T>) -> Vec<Vec<usize>> {
    let mut rows: Vec<Vec<usize>> = (0..mesh.n_vertices()).map(|i| vec![i]).collect();
    for t in mesh.triangles() {
        for &a in t {
            for &b in t {
                if a != b {
                    rows[a].push(b);
                }
            }
        }
    }
    for row in &mut rows {
        row.sort_unstable();
        row.dedup();
    }
    rows
}

/// Accumulation buffers over the shared pattern.
#[derive(Clone)]
struct Buffers<T> {
    diffusion: Vec<T>,
    reaction: Vec<T>,
    load: Vec<T>,
    source_min: T,
    source_max: T,
}

impl<T: Real> Buffers<T> {
    fn zeros(nnz: usize, n: usize) -> Self {
        Self {
            diffusion: vec![T::zero(); nnz],
            reaction: vec![T::zero(); nnz],
            load: vec![T::zero(); n],
            source_min: T::infinity(),
            source_max: T::neg_infinity(),
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.diffusion.iter_mut().zip(&other.diffusion) {
            *a += *b;
        }
        for (a, b) in self.reaction.iter_mut().zip(&other.reaction) {
            *a += *b;
        }
        for (a, b) in self.load.iter_mut().zip(&other.load) {
            *a += *b;
        }
        self.source_min = self.source_min.min(other.source_min);
        self.source_max = self.source_max.max(other.source_max);
        self
    }
}

struct Context<'a, T: Real> {
    mesh: &'a SurfaceMesh<T>,
    problem: &'a ProblemSpec<T>,
    iterate: &'a [T],
    pattern: &'a CsrMatrix<T>,
    coefficients: CoefficientPoint,
}

impl<T: Real> Context<'_, T> {
    fn eval_point(&self, x: Vec3<T>) -> Result<Vec3<T>, FemError> {
        match self.coefficients {
            CoefficientPoint::MeshPoint => Ok(x),
            CoefficientPoint::ExactProjection => Ok(self.mesh.surface().project(&x)?),
        }
    }

    fn add_element(&self, e: usize, buf: &mut Buffers<T>) -> Result<(), FemError> {
        let tri = self.mesh.triangles()[e];
        let geom = element_geometry(self.mesh.triangle_coords(e)).map_err(|err| match err {
            FemError::DegenerateElement { area, .. } => FemError::DegenerateElement {
                element: Some(e),
                area,
            },
            other => other,
        })?;
        let pairs = gradient_pair_products(&geom);
        let c = tri.map(|v| self.iterate[v]);
        let grad_u = geom.basis_gradients[0] * c[0]
            + geom.basis_gradients[1] * c[1]
            + geom.basis_gradients[2] * c[2];
        let weight = geom.area / T::lit(3.0);
        let half = T::lit(0.5);
        let quarter = T::lit(0.25);

        let mut b_integral = T::zero();
        let mut reaction_local = [[T::zero(); 3]; 3];
        let mut load_local = [T::zero(); 3];
        for (a, b) in EDGES {
            let x = self.eval_point(geom.vertex_coords[a].midpoint(&geom.vertex_coords[b]))?;
            let u = (c[a] + c[b]) * half;
            let bv = (self.problem.b)(&x, u, &grad_u);
            let rv = self.problem.r_of(&x, u);
            let fv = self.problem.reduced_source(&x);
            let bad = |name| FemError::NonFiniteCoefficient {
                element: e,
                coefficient: name,
            };
            if !bv.is_finite() {
                return Err(bad("b"));
            }
            if !rv.is_finite() {
                return Err(bad("r"));
            }
            if !fv.is_finite() {
                return Err(bad("f - q(., 0)"));
            }
            b_integral += weight * bv;
            // chi_a = chi_b = 1/2 at this midpoint, the third basis function vanishes
            let rw = weight * rv * quarter;
            reaction_local[a][a] += rw;
            reaction_local[b][b] += rw;
            reaction_local[a][b] += rw;
            reaction_local[b][a] += rw;
            load_local[a] += weight * fv * half;
            load_local[b] += weight * fv * half;
            buf.source_min = buf.source_min.min(fv);
            buf.source_max = buf.source_max.max(fv);
        }

        for (la, &ga) in tri.iter().enumerate() {
            buf.load[ga] += load_local[la];
            for (lb, &gb) in tri.iter().enumerate() {
                let k = self.pattern.position(ga, gb).expect("element pair in pattern");
                buf.diffusion[k] += b_integral * pairs[la][lb];
                buf.reaction[k] += reaction_local[la][lb];
            }
        }
        Ok(())
    }
}

/// Assembles the system matrix and load vector at `iterate`.
pub fn assemble<T: Real>(
    mesh: &SurfaceMesh<T>,
    problem: &ProblemSpec<T>,
    iterate: &[T],
    options: &AssemblyOptions,
) -> Result<AssembledSystem<T>, FemError> {
    let n = mesh.n_vertices();
    if iterate.len() != n {
        return Err(FemError::LengthMismatch {
            expected: n,
            actual: iterate.len(),
        });
    }
    let pattern = CsrMatrix::<T>::from_pattern(n, &sparsity_pattern(mesh));
    let ctx = Context {
        mesh,
        problem,
        iterate,
        pattern: &pattern,
        coefficients: options.coefficients,
    };
    let nnz = pattern.nnz();

    let buffers = if options.deterministic {
        let mut buf = Buffers::zeros(nnz, n);
        for e in 0..mesh.n_triangles() {
            ctx.add_element(e, &mut buf)?;
        }
        buf
    } else {
        (0..mesh.n_triangles())
            .into_par_iter()
            .try_fold(
                || Buffers::zeros(nnz, n),
                |mut buf, e| ctx.add_element(e, &mut buf).map(|_| buf),
            )
            .try_reduce(|| Buffers::zeros(nnz, n), |a, b| Ok(a.merge(b)))?
    };

    let mut diffusion = pattern.clone();
    diffusion.values_mut().copy_from_slice(&buffers.diffusion);
    let mut reaction = pattern;
    reaction.values_mut().copy_from_slice(&buffers.reaction);

    let n_interior = mesh.n_interior();
    let mut triplets = Vec::with_capacity(nnz);
    for i in 0..n {
        if i < n_interior {
            let (cols, b_vals) = diffusion.row(i);
            let r_vals = reaction.row(i).1;
            for ((&j, &bv), &rv) in cols.iter().zip(b_vals).zip(r_vals) {
                triplets.push((i, j, bv + rv));
            }
        } else {
            triplets.push((i, i, T::one()));
        }
    }
    let matrix = CsrMatrix::from_triplets(n, n, &triplets).expect("assembled entries are finite");

    let mut load = buffers.load;
    for (i, value) in load.iter_mut().enumerate().skip(n_interior) {
        *value = (problem.g)(&mesh.vertices()[i]);
        if !value.is_finite() {
            return Err(FemError::NonFiniteBoundaryValue { node: i });
        }
    }

    Ok(AssembledSystem {
        matrix,
        load,
        diffusion,
        reaction,
        reduced_source_range: (buffers.source_min, buffers.source_max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_hemisphere, SurfaceTag};
    use crate::problems::ProblemSpec;

    fn equilateral() -> SurfaceMesh<f64> {
        let s3 = 3f64.sqrt();
        SurfaceMesh::new(
            vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.5, s3 / 2.0, 0.0)],
            vec![[0, 1, 2]],
            SurfaceTag::None,
        )
        .unwrap()
    }

    #[test]
    fn single_equilateral_element() {
        let mesh = equilateral();
        let sys = assemble(&mesh, &ProblemSpec::laplace(), &[0.0; 3], &AssemblyOptions::default()).unwrap();
        let k = sys.diffusion.to_dense();
        let s3 = 3f64.sqrt();
        for a in 0..3 {
            assert!((k[a][a] - 1.0 / s3).abs() < 1e-14);
            for b in 0..3 {
                if a != b {
                    assert!((k[a][b] + s3 / 6.0).abs() < 1e-14);
                }
            }
            assert!(k[a].iter().sum::<f64>().abs() < 1e-14);
        }
        // no interior nodes: the system is the identity
        assert_eq!(sys.matrix.to_dense(), CsrMatrix::<f64>::identity(3).to_dense());
    }

    #[test]
    fn constant_field_is_discretely_harmonic() {
        let mesh = generate_hemisphere::<f64>(1).unwrap();
        let ones = vec![1.0; mesh.n_vertices()];
        let sys = assemble(&mesh, &ProblemSpec::laplace(), &ones, &AssemblyOptions::default()).unwrap();
        let y = sys.matrix.mul_vec(&ones);
        for i in 0..mesh.n_interior() {
            assert!(y[i].abs() <= 1e-10, "row {i}: {}", y[i]);
        }
    }

    #[test]
    fn interior_block_symmetric_and_linear_in_b() {
        let mesh = generate_hemisphere::<f64>(1).unwrap();
        let field: Vec<f64> = mesh.vertices().iter().map(|v| v.x() + 0.5 * v.z()).collect();
        let synthetic = ProblemSpec::laplace().with_b(|x, z, xi| 1.0 + x.z() * x.z() + 0.1 * z * z + xi.norm());
        let doubled = ProblemSpec::laplace().with_b(|x, z, xi| 2.0 * (1.0 + x.z() * x.z() + 0.1 * z * z + xi.norm()));
        let opts = AssemblyOptions::default();
        let a = assemble(&mesh, &synthetic, &field, &opts).unwrap();
        let b = assemble(&mesh, &doubled, &field, &opts).unwrap();
        for (x, y) in a.diffusion.values().iter().zip(b.diffusion.values()) {
            assert_eq!(2.0 * x, *y);
        }
        assert!(a.interior_block(mesh.n_interior()).is_symmetric(1e-12));
    }

    #[test]
    fn radiative_reaction_nonnegative() {
        let mesh = generate_hemisphere::<f64>(2).unwrap();
        let problem = ProblemSpec::radiative_cooling(1.0).unwrap();
        let ones = vec![1.0; mesh.n_vertices()];
        let sys = assemble(&mesh, &problem, &ones, &AssemblyOptions::default()).unwrap();
        assert!(sys.reaction.values().iter().all(|&r| r >= 0.0));
        assert!(sys.reaction.max_abs() > 0.0);
        assert_eq!(sys.reduced_source_range, (0.0, 0.0));
        // boundary rows carry g
        for i in mesh.n_interior()..mesh.n_vertices() {
            let v = mesh.vertices()[i];
            assert_eq!(sys.load[i], 1.0 + v.x() * v.y());
        }
    }

    #[test]
    fn reaction_row_sums_are_mass_weighted() {
        // with r = 1 the reaction block is the lumped-consistent mass matrix:
        // sum_j r_ij = int chi_i, and the total equals the surface area
        let mesh = generate_hemisphere::<f64>(1).unwrap();
        let problem = ProblemSpec::laplace().with_q(|_, z| z);
        let ones = vec![1.0; mesh.n_vertices()];
        let sys = assemble(&mesh, &problem, &ones, &AssemblyOptions::default()).unwrap();
        let total: f64 = sys.reaction.values().iter().sum();
        let area: f64 = (0..mesh.n_triangles())
            .map(|t| element_geometry(mesh.triangle_coords(t)).unwrap().area)
            .sum();
        assert!((total - area).abs() < 1e-12);
    }

    #[test]
    fn parallel_matches_sequential() {
        let mesh = generate_hemisphere::<f64>(2).unwrap();
        let problem = ProblemSpec::radiative_cooling(1.0).unwrap();
        let field: Vec<f64> = mesh.vertices().iter().map(|v| 1.0 + v.x() * v.y()).collect();
        let seq = assemble(&mesh, &problem, &field, &AssemblyOptions::default()).unwrap();
        let par = assemble(
            &mesh,
            &problem,
            &field,
            &AssemblyOptions {
                deterministic: false,
                ..AssemblyOptions::default()
            },
        )
        .unwrap();
        let scale = seq.matrix.max_abs();
        for (a, b) in seq.matrix.values().iter().zip(par.matrix.values()) {
            assert!((a - b).abs() <= 1e-14 * scale);
        }
    }

    #[test]
    fn non_finite_coefficient_names_element() {
        let mesh = equilateral();
        let problem = ProblemSpec::laplace().with_b(|_, _, _| f64::NAN);
        let err = assemble(&mesh, &problem, &[0.0; 3], &AssemblyOptions::default()).unwrap_err();
        assert_eq!(
            err,
            FemError::NonFiniteCoefficient {
                element: 0,
                coefficient: "b"
            }
        );
        let err = assemble(&mesh, &ProblemSpec::laplace(), &[0.0; 2], &AssemblyOptions::default()).unwrap_err();
        assert!(matches!(err, FemError::LengthMismatch { expected: 3, actual: 2 }));
    }

    #[test]
    fn exact_projection_mode_on_sphere() {
        let mesh = generate_hemisphere::<f64>(1).unwrap();
        // b depends on |x|: equal to 1 only on the exact surface
        let problem = ProblemSpec::laplace().with_b(|x, _, _| x.norm());
        let zero = vec![0.0; mesh.n_vertices()];
        let opts = AssemblyOptions {
            coefficients: CoefficientPoint::ExactProjection,
            ..AssemblyOptions::default()
        };
        let projected = assemble(&mesh, &problem, &zero, &opts).unwrap();
        let reference = assemble(&mesh, &ProblemSpec::laplace(), &zero, &AssemblyOptions::default()).unwrap();
        for (a, b) in projected.diffusion.values().iter().zip(reference.diffusion.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        let untagged = mesh.clone().with_surface(SurfaceTag::None);
        assert!(matches!(assemble(&untagged, &problem, &zero, &opts), Err(FemError::Mesh(_))));
    }
}
