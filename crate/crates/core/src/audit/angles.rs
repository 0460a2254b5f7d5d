//! Angle conditions expressed through basis-gradient pair products.

use serde::{Deserialize, Serialize};

use crate::fem::{element_geometry, gradient_pair_products};
use crate::mesh::SurfaceMesh;
use crate::scalar::Real;

/// Which angle hypothesis is being audited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum AngleMode {
    /// Every relevant pair product strictly negative (all angles acute).
    #[default]
    Acute,
    /// Every relevant pair product nonpositive (no obtuse angles).
    Nonobtuse,
}

impl std::str::FromStr for AngleMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "acute" => Ok(Self::Acute),
            "nonobtuse" => Ok(Self::Nonobtuse),
            other => Err(format!("unknown angle mode '{other}' (expected acute or nonobtuse)")),
        }
    }
}

impl std::fmt::Display for AngleMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Acute => "acute",
            Self::Nonobtuse => "nonobtuse",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleViolation {
    pub element: usize,
    /// Local vertex pair within the element.
    pub local_pair: [usize; 2],
    pub nodes: [usize; 2],
    pub product: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleSection {
    pub mode: AngleMode,
    /// Largest pair product over pairs touching an interior node.
    pub worst_pair_product: f64,
    /// `-h^2 * worst_pair_product`: the largest margin the mesh supports.
    pub sigma0_estimate: f64,
    pub violations: Vec<AngleViolation>,
    pub pass: bool,
}

/// Checks the sign of every element-wise product `grad chi_i . grad chi_j`
/// with `i != j` and at least one of the two nodes interior.
///
/// Products within `1e-12` of the element's largest `|grad chi|^2` count as
/// zero, so right angles fail the acute mode and pass the nonobtuse one.
pub fn check_angles<T: Real>(mesh: &SurfaceMesh<T>, mode: AngleMode) -> AngleSection {
    let mut worst = f64::NEG_INFINITY;
    let mut violations = Vec::new();
    for (e, tri) in mesh.triangles().iter().enumerate() {
        // meshes are validated against degeneracy on construction
        let Ok(geom) = element_geometry(mesh.triangle_coords(e)) else {
            continue;
        };
        let products = gradient_pair_products(&geom);
        let scale = (0..3).map(|a| products[a][a].as_f64()).fold(0.0, f64::max);
        let tol = 1e-12 * scale;
        for (a, b) in [(0, 1), (1, 2), (2, 0)] {
            if mesh.is_boundary(tri[a]) && mesh.is_boundary(tri[b]) {
                continue;
            }
            let product = products[a][b].as_f64();
            worst = worst.max(product);
            let bad = match mode {
                AngleMode::Acute => product > -tol,
                AngleMode::Nonobtuse => product > tol,
            };
            if bad {
                violations.push(AngleViolation {
                    element: e,
                    local_pair: [a, b],
                    nodes: [tri[a], tri[b]],
                    product,
                });
            }
        }
    }
    if worst == f64::NEG_INFINITY {
        // no pair touches an interior node
        worst = 0.0;
    }
    let h = mesh.h().as_f64();
    AngleSection {
        mode,
        worst_pair_product: worst,
        sigma0_estimate: -h * h * worst,
        pass: violations.is_empty(),
        violations,
    }
}
