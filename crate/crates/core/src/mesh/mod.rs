//! Triangulated surfaces with boundary embedded in 3-space.
//!
//! A [`SurfaceMesh`] always stores its vertices interior-first: indices
//! `0..n_interior` touch no boundary edge, the remaining indices lie on the
//! boundary curve. The finite element system and the audits rely on this
//! split to address the interior block and the boundary block of the matrix.

mod generate;
mod quality;
mod surface;

use std::collections::HashMap;

use thiserror::Error;

use crate::scalar::Real;
use crate::vec3::Vec3;

pub use generate::{generate_hemisphere, generate_semitorus, refine, MAX_HEMISPHERE_LEVELS};
pub use quality::{angle_stats, mesh_h, mesh_regularity, AngleStats, HISTOGRAM_BINS};
pub use surface::SurfaceTag;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("invalid mesh parameter: {0}")]
    InvalidParameter(String),
    #[error("mesh has no triangles")]
    Empty,
    #[error("triangle {triangle} references vertex {index}, but only {n_vertices} vertices exist")]
    IndexOutOfRange {
        triangle: usize,
        index: usize,
        n_vertices: usize,
    },
    #[error("triangle {triangle} repeats a vertex")]
    RepeatedVertex { triangle: usize },
    #[error("edge ({a}, {b}) is shared by {count} triangles")]
    NonManifoldEdge { a: usize, b: usize, count: usize },
    #[error("triangle {triangle} is degenerate (area {area:e})")]
    DegenerateTriangle { triangle: usize, area: f64 },
    #[error("vertex {0} is not referenced by any triangle")]
    IsolatedVertex(usize),
    #[error("vertex {0} has non-finite coordinates")]
    NonFiniteVertex(usize),
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("cannot project point {point:?} onto the {surface} surface")]
    ProjectionFailed { point: [f64; 3], surface: String },
}

/// Embedded triangulation with interior-first node ordering.
#[derive(Debug, Clone)]
pub struct SurfaceMesh<T> {
    vertices: Vec<Vec3<T>>,
    triangles: Vec<[usize; 3]>,
    n_interior: usize,
    n_edges: usize,
    boundary_edges: Vec<[usize; 2]>,
    h: T,
    surface: SurfaceTag<T>,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Counts how many triangles share each undirected edge.
pub(crate) fn edge_counts(triangles: &[[usize; 3]]) -> HashMap<(usize, usize), usize> {
    let mut counts = HashMap::with_capacity(triangles.len() * 2);
    for t in triangles {
        for k in 0..3 {
            *counts.entry(edge_key(t[k], t[(k + 1) % 3])).or_insert(0) += 1;
        }
    }
    counts
}

impl<T: Real> SurfaceMesh<T> {
    /// Validates the triangulation and reorders its vertices interior-first.
    ///
    /// The reordering is a stable sort on the boundary flag, so a mesh that is
    /// already interior-first keeps its numbering.
    pub fn new(
        vertices: Vec<Vec3<T>>,
        triangles: Vec<[usize; 3]>,
        surface: SurfaceTag<T>,
    ) -> Result<Self, MeshError> {
        if triangles.is_empty() {
            return Err(MeshError::Empty);
        }
        let nv = vertices.len();
        if let Some(i) = vertices.iter().position(|v| !v.is_finite()) {
            return Err(MeshError::NonFiniteVertex(i));
        }
        let mut referenced = vec![false; nv];
        for (ti, t) in triangles.iter().enumerate() {
            for &v in t {
                if v >= nv {
                    return Err(MeshError::IndexOutOfRange {
                        triangle: ti,
                        index: v,
                        n_vertices: nv,
                    });
                }
                referenced[v] = true;
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(MeshError::RepeatedVertex { triangle: ti });
            }
        }
        if let Some(i) = referenced.iter().position(|r| !r) {
            return Err(MeshError::IsolatedVertex(i));
        }

        let counts = edge_counts(&triangles);
        let mut on_boundary = vec![false; nv];
        let mut boundary_edges = Vec::new();
        for (&(a, b), &count) in &counts {
            match count {
                1 => {
                    on_boundary[a] = true;
                    on_boundary[b] = true;
                    boundary_edges.push([a, b]);
                }
                2 => {}
                _ => return Err(MeshError::NonManifoldEdge { a, b, count }),
            }
        }

        // stable: interior vertices first, original order within each class
        let mut order: Vec<usize> = (0..nv).collect();
        order.sort_by_key(|&i| on_boundary[i]);
        let mut new_index = vec![0usize; nv];
        for (new, &old) in order.iter().enumerate() {
            new_index[old] = new;
        }
        let n_interior = on_boundary.iter().filter(|b| !**b).count();
        let vertices: Vec<Vec3<T>> = order.iter().map(|&old| vertices[old]).collect();
        let triangles: Vec<[usize; 3]> = triangles
            .iter()
            .map(|t| t.map(|v| new_index[v]))
            .collect();
        let mut boundary_edges: Vec<[usize; 2]> = boundary_edges
            .into_iter()
            .map(|[a, b]| {
                let (a, b) = edge_key(new_index[a], new_index[b]);
                [a, b]
            })
            .collect();
        boundary_edges.sort_unstable();

        let h = triangles
            .iter()
            .map(|t| longest_edge(&vertices, t))
            .fold(T::zero(), T::max);
        let area_floor = T::lit(1e-14) * h * h;
        for (ti, t) in triangles.iter().enumerate() {
            let area = triangle_area(&vertices, t);
            if !(area > area_floor) {
                return Err(MeshError::DegenerateTriangle {
                    triangle: ti,
                    area: area.as_f64(),
                });
            }
        }

        Ok(Self {
            vertices,
            triangles,
            n_interior,
            n_edges: counts.len(),
            boundary_edges,
            h,
            surface,
        })
    }

    pub fn vertices(&self) -> &[Vec3<T>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    pub fn n_boundary(&self) -> usize {
        self.vertices.len() - self.n_interior
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    /// Boundary edges as sorted vertex pairs.
    pub fn boundary_edges(&self) -> &[[usize; 2]] {
        &self.boundary_edges
    }

    #[inline]
    pub fn is_boundary(&self, vertex: usize) -> bool {
        vertex >= self.n_interior
    }

    /// Maximum element diameter (longest edge over all triangles).
    pub fn h(&self) -> T {
        self.h
    }

    pub fn surface(&self) -> &SurfaceTag<T> {
        &self.surface
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.n_edges as i64 + self.triangles.len() as i64
    }

    pub fn triangle_coords(&self, t: usize) -> [Vec3<T>; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    /// All undirected edges as sorted `[low, high]` pairs.
    pub fn edges(&self) -> Vec<[usize; 2]> {
        let mut edges: Vec<[usize; 2]> = edge_counts(&self.triangles)
            .into_keys()
            .map(|(a, b)| [a, b])
            .collect();
        edges.sort_unstable();
        edges
    }

    /// Axis-aligned bounding box `(min, max)` of the vertex cloud.
    pub fn bounding_box(&self) -> (Vec3<T>, Vec3<T>) {
        let mut lo = Vec3([T::infinity(); 3]);
        let mut hi = Vec3([T::neg_infinity(); 3]);
        for v in &self.vertices {
            for k in 0..3 {
                lo.0[k] = lo.0[k].min(v.0[k]);
                hi.0[k] = hi.0[k].max(v.0[k]);
            }
        }
        (lo, hi)
    }

    /// Returns a copy with a different surface tag (used when reading OFF files).
    pub fn with_surface(mut self, surface: SurfaceTag<T>) -> Self {
        self.surface = surface;
        self
    }
}

pub(crate) fn longest_edge<T: Real>(vertices: &[Vec3<T>], t: &[usize; 3]) -> T {
    (0..3)
        .map(|k| (vertices[t[(k + 1) % 3]] - vertices[t[k]]).norm())
        .fold(T::zero(), T::max)
}

pub(crate) fn triangle_area<T: Real>(vertices: &[Vec3<T>], t: &[usize; 3]) -> T {
    let e1 = vertices[t[1]] - vertices[t[0]];
    let e2 = vertices[t[2]] - vertices[t[0]];
    e1.cross(&e2).norm() * T::lit(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64, y: f64, z: f64) -> Vec3<f64> {
        Vec3::new(x, y, z)
    }

    #[test]
    fn reorders_interior_first() {
        // square split into four triangles around a center vertex placed last
        let vertices = vec![
            v(0.0, 0.0, 0.0),
            v(1.0, 0.0, 0.0),
            v(1.0, 1.0, 0.0),
            v(0.0, 1.0, 0.0),
            v(0.5, 0.5, 0.0),
        ];
        let triangles = vec![[0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]];
        let mesh = SurfaceMesh::new(vertices, triangles, SurfaceTag::None).unwrap();
        assert_eq!(mesh.n_interior(), 1);
        assert_eq!(mesh.vertices()[0], v(0.5, 0.5, 0.0));
        assert_eq!(mesh.boundary_edges().len(), 4);
        assert_eq!(mesh.euler_characteristic(), 1);
        for [a, b] in mesh.boundary_edges() {
            assert!(mesh.is_boundary(*a) && mesh.is_boundary(*b));
        }
    }

    #[test]
    fn rejects_bad_input() {
        let tri = vec![v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0), v(0.0, 1.0, 0.0)];
        assert_eq!(
            SurfaceMesh::new(tri.clone(), vec![[0, 1, 3]], SurfaceTag::None).unwrap_err(),
            MeshError::IndexOutOfRange {
                triangle: 0,
                index: 3,
                n_vertices: 3
            }
        );
        assert_eq!(
            SurfaceMesh::new(tri.clone(), vec![[0, 1, 1]], SurfaceTag::None).unwrap_err(),
            MeshError::RepeatedVertex { triangle: 0 }
        );
        let collinear = vec![v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0), v(2.0, 0.0, 0.0)];
        assert!(matches!(
            SurfaceMesh::new(collinear, vec![[0, 1, 2]], SurfaceTag::None),
            Err(MeshError::DegenerateTriangle { .. })
        ));
        let mut four = tri.clone();
        four.push(v(5.0, 5.0, 5.0));
        assert_eq!(
            SurfaceMesh::new(four, vec![[0, 1, 2]], SurfaceTag::None).unwrap_err(),
            MeshError::IsolatedVertex(3)
        );
        assert_eq!(
            SurfaceMesh::<f64>::new(tri, vec![], SurfaceTag::None).unwrap_err(),
            MeshError::Empty
        );
    }

    #[test]
    fn rejects_nonmanifold_edge() {
        let vertices = vec![
            v(0.0, 0.0, 0.0),
            v(1.0, 0.0, 0.0),
            v(0.0, 1.0, 0.0),
            v(0.0, -1.0, 0.0),
            v(0.0, 0.0, 1.0),
        ];
        let triangles = vec![[0, 1, 2], [1, 0, 3], [0, 1, 4]];
        assert!(matches!(
            SurfaceMesh::new(vertices, triangles, SurfaceTag::None),
            Err(MeshError::NonManifoldEdge { count: 3, .. })
        ));
    }
}
