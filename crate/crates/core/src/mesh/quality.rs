//! Element angle statistics, mesh size and shape regularity.

use crate::scalar::Real;

use super::{longest_edge, triangle_area, SurfaceMesh};

pub const HISTOGRAM_BINS: usize = 18;

/// Interior angles of every element, in degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleStats<T> {
    pub min_angle: T,
    pub max_angle: T,
    /// Angle at each local vertex of each triangle.
    pub per_element_angles: Vec<[T; 3]>,
    /// Counts of angles in `[10k, 10k + 10)` degrees; 180 falls in the last bin.
    pub histogram: [usize; HISTOGRAM_BINS],
}

/// Angle opposite side `a` from the law of cosines.
fn opposite_angle<T: Real>(a: T, b: T, c: T) -> T {
    let cos = (b * b + c * c - a * a) / (T::lit(2.0) * b * c);
    cos.max(-T::one()).min(T::one()).acos().to_degrees()
}

pub fn angle_stats<T: Real>(mesh: &SurfaceMesh<T>) -> AngleStats<T> {
    let mut stats = AngleStats {
        min_angle: T::infinity(),
        max_angle: T::neg_infinity(),
        per_element_angles: Vec::with_capacity(mesh.n_triangles()),
        histogram: [0; HISTOGRAM_BINS],
    };
    for t in 0..mesh.n_triangles() {
        let p = mesh.triangle_coords(t);
        // side opposite local vertex k
        let side = |k: usize| (p[(k + 2) % 3] - p[(k + 1) % 3]).norm();
        let (s0, s1, s2) = (side(0), side(1), side(2));
        let angles = [
            opposite_angle(s0, s1, s2),
            opposite_angle(s1, s2, s0),
            opposite_angle(s2, s0, s1),
        ];
        for &a in &angles {
            stats.min_angle = stats.min_angle.min(a);
            stats.max_angle = stats.max_angle.max(a);
            let bin = (a / T::lit(10.0)).floor().to_usize().unwrap_or(0);
            stats.histogram[bin.min(HISTOGRAM_BINS - 1)] += 1;
        }
        stats.per_element_angles.push(angles);
    }
    stats
}

/// Longest edge over all elements.
pub fn mesh_h<T: Real>(mesh: &SurfaceMesh<T>) -> T {
    let v = mesh.vertices();
    mesh.triangles()
        .iter()
        .map(|t| longest_edge(v, t))
        .fold(T::zero(), T::max)
}

/// `(min, max)` over elements of `area / h^2`, the constants of the
/// regularity bound `m1 h^2 <= |T| <= m2 h^2`.
pub fn mesh_regularity<T: Real>(mesh: &SurfaceMesh<T>) -> (T, T) {
    let h = mesh_h(mesh);
    let h2 = h * h;
    let v = mesh.vertices();
    mesh.triangles()
        .iter()
        .map(|t| triangle_area(v, t) / h2)
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), r| {
            (lo.min(r), hi.max(r))
        })
}
