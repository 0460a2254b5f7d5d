//! P1 surface finite elements: element kernels, nodal fields and assembly of
//! the frozen-coefficient system.

mod assembly;
mod element;

use std::ops::Index;

use thiserror::Error;

use crate::mesh::{MeshError, SurfaceMesh};
use crate::scalar::Real;

pub use assembly::{assemble, AssembledSystem, AssemblyOptions, CoefficientPoint};
pub use element::{element_geometry, gradient_pair_products, quad_edge_midpoint, ElementGeometry};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FemError {
    #[error("degenerate element{} (area {area:e})", element.map(|e| format!(" {e}")).unwrap_or_default())]
    DegenerateElement { element: Option<usize>, area: f64 },
    #[error("coefficient {coefficient} is not finite on element {element}")]
    NonFiniteCoefficient {
        element: usize,
        coefficient: &'static str,
    },
    #[error("boundary datum g is not finite at node {node}")]
    NonFiniteBoundaryValue { node: usize },
    #[error("nodal vector has length {actual}, mesh has {expected} vertices")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("nodal value at {index} is not finite")]
    NonFinite { index: usize },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Per-vertex values aligned with the mesh's interior-first node ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalField<T> {
    values: Vec<T>,
}

impl<T: Real> NodalField<T> {
    pub fn new(mesh: &SurfaceMesh<T>, values: Vec<T>) -> Result<Self, FemError> {
        if values.len() != mesh.n_vertices() {
            return Err(FemError::LengthMismatch {
                expected: mesh.n_vertices(),
                actual: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(FemError::NonFinite { index });
        }
        Ok(Self { values })
    }

    /// Boundary data `g(B_i)` on boundary nodes, zero on interior nodes.
    pub fn boundary_extension(mesh: &SurfaceMesh<T>, g: impl Fn(&crate::vec3::Vec3<T>) -> T) -> Result<Self, FemError> {
        let mut values = vec![T::zero(); mesh.n_vertices()];
        for i in mesh.n_interior()..mesh.n_vertices() {
            values[i] = g(&mesh.vertices()[i]);
            if !values[i].is_finite() {
                return Err(FemError::NonFiniteBoundaryValue { node: i });
            }
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_inner(self) -> Vec<T> {
        self.values
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }
}

impl<T> Index<usize> for NodalField<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.values[i]
    }
}
