use std::fmt;

use crate::scalar::Real;
use crate::vec3::Vec3;

use super::MeshError;

/// Exact surface a mesh approximates; determines where refinement places new vertices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfaceTag<T> {
    /// No exact surface known (e.g. a mesh read from a file without a tag).
    None,
    /// Upper unit hemisphere `|x| = 1, z >= 0`, boundary on the equator.
    UnitHemisphere,
    /// Half torus (`y >= 0`) with major radius `major` and tube radius `minor`,
    /// bounded by the two minor circles in the plane `y = 0`.
    Torus { major: T, minor: T },
}

impl<T: Real> fmt::Display for SurfaceTag<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurfaceTag::None => write!(f, "none"),
            SurfaceTag::UnitHemisphere => write!(f, "unit-hemisphere"),
            SurfaceTag::Torus { major, minor } => write!(f, "torus({major},{minor})"),
        }
    }
}

impl<T: Real> SurfaceTag<T> {
    fn fail(&self, p: &Vec3<T>) -> MeshError {
        MeshError::ProjectionFailed {
            point: p.0.map(|c| c.as_f64()),
            surface: self.to_string(),
        }
    }

    /// Closest point on the exact surface.
    pub fn project(&self, p: &Vec3<T>) -> Result<Vec3<T>, MeshError> {
        match *self {
            SurfaceTag::None => Err(MeshError::Unsupported(
                "projection requires a known exact surface".into(),
            )),
            SurfaceTag::UnitHemisphere => {
                let n = p.norm();
                if n == T::zero() {
                    return Err(self.fail(p));
                }
                Ok(*p * (T::one() / n))
            }
            SurfaceTag::Torus { major, minor } => {
                let radial = (p.x() * p.x() + p.y() * p.y()).sqrt();
                if radial == T::zero() {
                    return Err(self.fail(p));
                }
                let dir = Vec3::new(p.x() / radial, p.y() / radial, T::zero());
                Self::onto_tube_circle(dir, major, minor, p).ok_or_else(|| self.fail(p))
            }
        }
    }

    /// Closest point on the exact boundary curve.
    pub fn project_to_boundary(&self, p: &Vec3<T>) -> Result<Vec3<T>, MeshError> {
        match *self {
            SurfaceTag::None => Err(MeshError::Unsupported(
                "projection requires a known exact surface".into(),
            )),
            SurfaceTag::UnitHemisphere => {
                let flat = Vec3::new(p.x(), p.y(), T::zero());
                let n = flat.norm();
                if n == T::zero() {
                    return Err(self.fail(p));
                }
                Ok(flat * (T::one() / n))
            }
            SurfaceTag::Torus { major, minor } => {
                // boundary circles sit in the half-planes theta = 0 and theta = pi
                let sign = if p.x() >= T::zero() { T::one() } else { -T::one() };
                let dir = Vec3::new(sign, T::zero(), T::zero());
                Self::onto_tube_circle(dir, major, minor, p).ok_or_else(|| self.fail(p))
            }
        }
    }

    /// Projects onto the minor circle lying in the half-plane spanned by the
    /// unit radial direction `dir` and the z axis.
    fn onto_tube_circle(dir: Vec3<T>, major: T, minor: T, p: &Vec3<T>) -> Option<Vec3<T>> {
        let radial = p.x() * dir.x() + p.y() * dir.y();
        let s = radial - major;
        let z = p.z();
        let len = (s * s + z * z).sqrt();
        if len == T::zero() {
            return None;
        }
        let s = s * minor / len;
        let z = z * minor / len;
        let rho = major + s;
        Some(Vec3::new(dir.x() * rho, dir.y() * rho, z))
    }

    /// Value of the implicit surface equation at `p` (zero on the surface).
    pub fn residual(&self, p: &Vec3<T>) -> Option<T> {
        match *self {
            SurfaceTag::None => None,
            SurfaceTag::UnitHemisphere => Some((p.norm() - T::one()).abs()),
            SurfaceTag::Torus { major, minor } => {
                let radial = (p.x() * p.x() + p.y() * p.y()).sqrt();
                let s = radial - major;
                Some((s * s + p.z() * p.z() - minor * minor).abs())
            }
        }
    }

    /// Outward direction at a point on (or near) the surface, used to orient triangles.
    pub(crate) fn outward(&self, p: &Vec3<T>) -> Option<Vec3<T>> {
        match *self {
            SurfaceTag::None => None,
            SurfaceTag::UnitHemisphere => Some(*p),
            SurfaceTag::Torus { major, .. } => {
                let radial = (p.x() * p.x() + p.y() * p.y()).sqrt();
                if radial == T::zero() {
                    return None;
                }
                let center = Vec3::new(p.x() / radial * major, p.y() / radial * major, T::zero());
                Some(*p - center)
            }
        }
    }
}
