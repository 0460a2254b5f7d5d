//! Per-element P1 quantities on a flat triangle embedded in 3-space.

use crate::scalar::Real;
use crate::vec3::Vec3;

use super::FemError;

/// Geometry of one element: area, unit normal and the (constant) tangential
/// gradients of the three barycentric basis functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry<T> {
    pub vertex_coords: [Vec3<T>; 3],
    pub area: T,
    pub unit_normal: Vec3<T>,
    pub basis_gradients: [Vec3<T>; 3],
}

/// Computes area, normal and basis gradients.
///
/// The gradient of the basis function at vertex `i` is `n x (v_k - v_j) / (2|T|)`
/// with `(i, j, k)` a cyclic permutation; it lies in the element plane and
/// has unit derivative along `v_i - v_j`.
pub fn element_geometry<T: Real>(coords: [Vec3<T>; 3]) -> Result<ElementGeometry<T>, FemError> {
    let e1 = coords[1] - coords[0];
    let e2 = coords[2] - coords[0];
    let cross = e1.cross(&e2);
    let twice_area = cross.norm();
    let scale = e1.norm_squared().max(e2.norm_squared());
    if !(twice_area > T::lit(1e-14) * scale) || !twice_area.is_finite() {
        return Err(FemError::DegenerateElement {
            element: None,
            area: (twice_area * T::lit(0.5)).as_f64(),
        });
    }
    let normal = cross * (T::one() / twice_area);
    let inv = T::one() / twice_area;
    let basis_gradients = std::array::from_fn(|i| {
        let j = (i + 1) % 3;
        let k = (i + 2) % 3;
        normal.cross(&(coords[k] - coords[j])) * inv
    });
    Ok(ElementGeometry {
        vertex_coords: coords,
        area: twice_area * T::lit(0.5),
        unit_normal: normal,
        basis_gradients,
    })
}

/// Matrix of dot products `grad chi_a . grad chi_b` for the element's three basis functions.
///
/// Off-diagonal entries equal `-cot(theta_c) / (2|T|)`, `theta_c` being the angle
/// at the remaining vertex.
pub fn gradient_pair_products<T: Real>(geom: &ElementGeometry<T>) -> [[T; 3]; 3] {
    let g = &geom.basis_gradients;
    std::array::from_fn(|a| std::array::from_fn(|b| g[a].dot(&g[b])))
}

/// Edge-midpoint quadrature `(|T|/3) sum_m f(x_m, lambda_m)`, where `x_m` runs
/// over the three edge midpoints and `lambda_m` are their barycentric
/// coordinates. Exact for polynomials of degree two.
pub fn quad_edge_midpoint<T, F>(f: F, geom: &ElementGeometry<T>) -> T
where
    T: Real,
    F: Fn(&Vec3<T>, &[T; 3]) -> T,
{
    let half = T::lit(0.5);
    let third = T::one() / T::lit(3.0);
    let mut sum = T::zero();
    for (a, b) in EDGES {
        let x = geom.vertex_coords[a].midpoint(&geom.vertex_coords[b]);
        let mut lambda = [T::zero(); 3];
        lambda[a] = half;
        lambda[b] = half;
        sum += f(&x, &lambda);
    }
    sum * geom.area * third
}

/// Local vertex pairs spanning the three edges, in midpoint order.
pub(crate) const EDGES: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];
