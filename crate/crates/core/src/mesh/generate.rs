//! Hemisphere and semi-torus generators and projected 1-to-4 refinement.

use std::collections::HashMap;

use crate::scalar::Real;
use crate::vec3::Vec3;

use super::{edge_counts, edge_key, MeshError, SurfaceMesh, SurfaceTag};

/// Largest refinement level accepted by [`generate_hemisphere`].
pub const MAX_HEMISPHERE_LEVELS: usize = 8;

/// Flips triangles whose normal points into the surface.
fn orient_outward<T: Real>(
    vertices: &[Vec3<T>],
    triangles: &mut [[usize; 3]],
    surface: &SurfaceTag<T>,
) {
    let third = T::one() / T::lit(3.0);
    for t in triangles.iter_mut() {
        let [a, b, c] = t.map(|v| vertices[v]);
        let normal = (b - a).cross(&(c - a));
        let centroid = (a + b + c) * third;
        if let Some(out) = surface.outward(&centroid) {
            if normal.dot(&out) < T::zero() {
                t.swap(1, 2);
            }
        }
    }
}

/// Unit hemisphere mesh, refined `levels` times.
///
/// The base mesh is the upper half of a once-subdivided unit icosahedron with a
/// vertex at the north pole: 26 vertices, 40 triangles and 10 boundary edges on
/// the equator. Level `L` therefore has `40 * 4^L` triangles, `10 * 2^L`
/// boundary edges and `1 + (F + B) / 2` vertices.
pub fn generate_hemisphere<T: Real>(levels: usize) -> Result<SurfaceMesh<T>, MeshError> {
    if levels > MAX_HEMISPHERE_LEVELS {
        return Err(MeshError::InvalidParameter(format!(
            "hemisphere refinement level {levels} exceeds {MAX_HEMISPHERE_LEVELS}"
        )));
    }
    let surface = SurfaceTag::UnitHemisphere;
    let ring_z = T::one() / T::lit(5.0).sqrt();
    let ring_r = T::lit(2.0) * ring_z;
    let step = T::lit(std::f64::consts::TAU / 5.0);
    let half = T::lit(std::f64::consts::PI / 5.0);

    let mut vertices = vec![Vec3::new(T::zero(), T::zero(), T::one())];
    for k in 0..5 {
        let a = step * T::lit(k as f64);
        vertices.push(Vec3::new(ring_r * a.cos(), ring_r * a.sin(), ring_z));
    }
    for k in 0..5 {
        let a = step * T::lit(k as f64) + half;
        vertices.push(Vec3::new(ring_r * a.cos(), ring_r * a.sin(), -ring_z));
    }
    let upper = |k: usize| 1 + k % 5;
    let lower = |k: usize| 6 + k % 5;
    let mut coarse = Vec::with_capacity(15);
    for k in 0..5 {
        coarse.push([0, upper(k), upper(k + 1)]);
        coarse.push([upper(k), lower(k), upper(k + 1)]);
        coarse.push([lower(k), lower(k + 1), upper(k + 1)]);
    }

    // one projected subdivision puts the midpoints of the slanted band edges
    // exactly on the equator; the part above it is the base mesh
    let (vertices, triangles) = split_four(&vertices, &coarse, |a, b, _| {
        surface.project(&vertices[a].midpoint(&vertices[b]))
    })?;
    let kept: Vec<[usize; 3]> = triangles
        .into_iter()
        .filter(|t| t.iter().all(|&v| vertices[v].z() >= T::zero()))
        .collect();
    let (vertices, mut triangles) = compact(&vertices, &kept);
    orient_outward(&vertices, &mut triangles, &surface);

    let mut mesh = SurfaceMesh::new(vertices, triangles, surface)?;
    for _ in 0..levels {
        mesh = refine(&mesh)?;
    }
    Ok(mesh)
}

/// Half torus `theta in [0, pi]` meshed in strips between `n_major` minor-circle
/// rings of `n_minor` vertices each; every odd ring is rotated by half a
/// `phi`-step (chess order). Boundary rings sit at `theta = 0` and `theta = pi`.
pub fn generate_semitorus<T: Real>(
    major: T,
    minor: T,
    n_major: usize,
    n_minor: usize,
) -> Result<SurfaceMesh<T>, MeshError> {
    if !(minor > T::zero() && major > minor && major.is_finite()) {
        return Err(MeshError::InvalidParameter(format!(
            "semi-torus radii must satisfy R > r > 0, got R = {major}, r = {minor}"
        )));
    }
    if n_major < 4 {
        return Err(MeshError::InvalidParameter(format!(
            "semi-torus needs at least 4 rings, got {n_major}"
        )));
    }
    if n_minor < 3 {
        return Err(MeshError::InvalidParameter(format!(
            "semi-torus needs at least 3 vertices per ring, got {n_minor}"
        )));
    }
    let pi = T::lit(std::f64::consts::PI);
    let dphi = T::lit(std::f64::consts::TAU) / T::lit(n_minor as f64);
    let last = n_major - 1;

    let mut vertices = Vec::with_capacity(n_major * n_minor);
    for k in 0..n_major {
        let (sin_t, cos_t) = match k {
            0 => (T::zero(), T::one()),
            k if k == last => (T::zero(), -T::one()),
            k => (pi * T::lit(k as f64) / T::lit(last as f64)).sin_cos(),
        };
        let offset = if k % 2 == 1 { dphi * T::lit(0.5) } else { T::zero() };
        for j in 0..n_minor {
            let phi = dphi * T::lit(j as f64) + offset;
            let rho = major + minor * phi.cos();
            vertices.push(Vec3::new(rho * cos_t, rho * sin_t, minor * phi.sin()));
        }
    }

    let at = |k: usize, j: usize| k * n_minor + j % n_minor;
    let mut triangles = Vec::with_capacity(2 * last * n_minor);
    for k in 0..last {
        for j in 0..n_minor {
            if k % 2 == 0 {
                // ring k+1 is rotated forward by half a step
                triangles.push([at(k, j), at(k, j + 1), at(k + 1, j)]);
                triangles.push([at(k + 1, j), at(k, j + 1), at(k + 1, j + 1)]);
            } else {
                // ring k is rotated forward relative to ring k+1
                triangles.push([at(k + 1, j), at(k + 1, j + 1), at(k, j)]);
                triangles.push([at(k, j), at(k + 1, j + 1), at(k, j + 1)]);
            }
        }
    }
    let surface = SurfaceTag::Torus { major, minor };
    orient_outward(&vertices, &mut triangles, &surface);
    SurfaceMesh::new(vertices, triangles, surface)
}

/// Splits every triangle at its edge midpoints into four and projects the new
/// vertices onto the exact surface; midpoints of boundary edges go onto the
/// exact boundary curve.
pub fn refine<T: Real>(mesh: &SurfaceMesh<T>) -> Result<SurfaceMesh<T>, MeshError> {
    let surface = *mesh.surface();
    if surface == SurfaceTag::None {
        return Err(MeshError::Unsupported(
            "refinement needs a known exact surface for projection".into(),
        ));
    }
    let counts = edge_counts(mesh.triangles());
    let vertices = mesh.vertices();
    let (vertices, triangles) = split_four(vertices, mesh.triangles(), |a, b, key| {
        let mid = vertices[a].midpoint(&vertices[b]);
        if counts[&key] == 1 {
            surface.project_to_boundary(&mid)
        } else {
            surface.project(&mid)
        }
    })?;
    SurfaceMesh::new(vertices, triangles, surface)
}

type Split<T> = (Vec<Vec3<T>>, Vec<[usize; 3]>);

/// 1-to-4 split; `place(a, b, key)` produces the new vertex on edge `(a, b)`.
/// New vertices are numbered in order of first encounter.
fn split_four<T, F>(vertices: &[Vec3<T>], triangles: &[[usize; 3]], mut place: F) -> Result<Split<T>, MeshError>
where
    T: Real,
    F: FnMut(usize, usize, (usize, usize)) -> Result<Vec3<T>, MeshError>,
{
    let mut out = vertices.to_vec();
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::with_capacity(triangles.len() * 2);
    let mut fine = Vec::with_capacity(triangles.len() * 4);
    for t in triangles {
        let mut mids = [0usize; 3];
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            let key = edge_key(a, b);
            mids[k] = match midpoint.get(&key) {
                Some(&m) => m,
                None => {
                    let p = place(a, b, key)?;
                    out.push(p);
                    midpoint.insert(key, out.len() - 1);
                    out.len() - 1
                }
            };
        }
        let [a, b, c] = *t;
        let [ab, bc, ca] = mids;
        fine.push([a, ab, ca]);
        fine.push([ab, b, bc]);
        fine.push([ca, bc, c]);
        fine.push([ab, bc, ca]);
    }
    Ok((out, fine))
}

/// Drops unreferenced vertices, keeping the relative order of the rest.
fn compact<T: Real>(vertices: &[Vec3<T>], triangles: &[[usize; 3]]) -> Split<T> {
    let mut used = vec![false; vertices.len()];
    for t in triangles {
        for &v in t {
            used[v] = true;
        }
    }
    let mut remap = vec![usize::MAX; vertices.len()];
    let mut kept = Vec::new();
    for (i, v) in vertices.iter().enumerate() {
        if used[i] {
            remap[i] = kept.len();
            kept.push(*v);
        }
    }
    let triangles = triangles.iter().map(|t| t.map(|v| remap[v])).collect();
    (kept, triangles)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts<T: Real>(mesh: &SurfaceMesh<T>) -> (usize, usize, usize) {
        (mesh.n_triangles(), mesh.boundary_edges().len(), mesh.n_vertices())
    }

    #[test]
    fn hemisphere_counts_follow_refinement_recurrence() {
        // V = 1 + (F + B)/2 for a triangulated disk
        assert_eq!(counts(&generate_hemisphere::<f64>(0).unwrap()), (40, 10, 26));
        assert_eq!(counts(&generate_hemisphere::<f64>(1).unwrap()), (160, 20, 91));
        assert_eq!(counts(&generate_hemisphere::<f64>(2).unwrap()), (640, 40, 341));
        assert_eq!(counts(&generate_hemisphere::<f64>(3).unwrap()), (2560, 80, 1321));
    }

    #[test]
    fn hemisphere_vertices_on_unit_sphere() {
        let mesh = generate_hemisphere::<f64>(2).unwrap();
        for v in mesh.vertices() {
            assert!((v.norm() - 1.0).abs() <= 1e-12);
            assert!(v.z() >= -1e-12);
        }
        for i in mesh.n_interior()..mesh.n_vertices() {
            assert_eq!(mesh.vertices()[i].z(), 0.0);
        }
        assert_eq!(mesh.euler_characteristic(), 1);
    }

    #[test]
    fn hemisphere_level_guard() {
        assert!(matches!(
            generate_hemisphere::<f64>(MAX_HEMISPHERE_LEVELS + 1),
            Err(MeshError::InvalidParameter(_))
        ));
    }

    #[test]
    fn triangles_face_outward() {
        let mesh = generate_hemisphere::<f64>(1).unwrap();
        for t in 0..mesh.n_triangles() {
            let [a, b, c] = mesh.triangle_coords(t);
            assert!((b - a).cross(&(c - a)).dot(&(a + b + c)) > 0.0);
        }
        let torus = generate_semitorus(5.0, 2.0, 9, 4).unwrap();
        for t in 0..torus.n_triangles() {
            let [a, b, c] = torus.triangle_coords(t);
            let centroid = (a + b + c) * (1.0 / 3.0);
            let out = torus.surface().outward(&centroid).unwrap();
            assert!((b - a).cross(&(c - a)).dot(&out) > 0.0);
        }
    }

    #[test]
    fn semitorus_matches_reference_counts() {
        let base = generate_semitorus(5.0, 2.0, 9, 4).unwrap();
        assert_eq!((base.n_vertices(), base.n_triangles()), (36, 64));
        assert_eq!(base.euler_characteristic(), 0);
        let once = refine(&base).unwrap();
        let twice = refine(&once).unwrap();
        assert_eq!((once.n_vertices(), once.n_triangles()), (136, 256));
        assert_eq!((twice.n_vertices(), twice.n_triangles()), (528, 1024));
        assert_eq!(twice.euler_characteristic(), 0);
    }

    #[test]
    fn semitorus_x_range_and_residuals() {
        let mesh = generate_semitorus(5.0, 2.0, 9, 4).unwrap();
        let (lo, hi) = mesh.bounding_box();
        assert!(lo.x() >= -7.0 && hi.x() <= 7.0);
        assert_eq!((lo.x(), hi.x()), (-7.0, 7.0));
        for v in mesh.vertices() {
            assert!(mesh.surface().residual(v).unwrap() <= 1e-10);
        }
        // both boundary circles lie in the plane y = 0
        for i in mesh.n_interior()..mesh.n_vertices() {
            assert_eq!(mesh.vertices()[i].y(), 0.0);
        }
    }

    #[test]
    fn semitorus_parameter_errors() {
        assert!(generate_semitorus(2.0, 5.0, 9, 4).is_err());
        assert!(generate_semitorus(5.0, 0.0, 9, 4).is_err());
        assert!(generate_semitorus(5.0, 2.0, 3, 4).is_err());
        assert!(generate_semitorus(5.0, 2.0, 9, 2).is_err());
    }

    #[test]
    fn refine_requires_surface() {
        let mesh = generate_hemisphere::<f64>(0).unwrap().with_surface(SurfaceTag::None);
        assert!(matches!(refine(&mesh), Err(MeshError::Unsupported(_))));
    }

    #[test]
    fn refine_recurrences() {
        let mesh = generate_hemisphere::<f64>(1).unwrap();
        let fine = refine(&mesh).unwrap();
        assert_eq!(fine.n_triangles(), 4 * mesh.n_triangles());
        assert_eq!(fine.boundary_edges().len(), 2 * mesh.boundary_edges().len());
        assert_eq!(fine.n_vertices(), mesh.n_vertices() + mesh.n_edges());
        assert_eq!(fine.euler_characteristic(), mesh.euler_characteristic());
        assert!(fine.h() < mesh.h());
    }

    #[test]
    fn f32_hemisphere_builds() {
        let mesh = generate_hemisphere::<f32>(2).unwrap();
        assert_eq!(mesh.n_triangles(), 640);
        for v in mesh.vertices() {
            assert!((v.norm() - 1.0).abs() <= 1e-6);
        }
    }
}
