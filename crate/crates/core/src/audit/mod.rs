//! Certificates for the discrete maximum principle: mesh angle conditions,
//! sign and row-sum structure of the system matrix, positive definiteness,
//! nodal extreme-value verdicts, and a dense algebraic oracle.

mod angles;
mod dmp;
mod matrix;
mod oracle;

use serde::Serialize;

use crate::fem::{assemble, AssemblyOptions, FemError};
use crate::mesh::SurfaceMesh;
use crate::problems::ProblemSpec;
use crate::scalar::Real;

pub use angles::{check_angles, AngleMode, AngleSection, AngleViolation};
pub use dmp::{check_dmp, DmpCheck, DmpError, DmpVariant};
pub use matrix::{
    check_matrix_conditions, MatrixConditions, RowSumSection, SignPatternSection, SignViolation, SpdSection,
};
pub use oracle::{algebraic_dwmp_oracle, OracleInstance, OracleStats, RowSumMode, MAX_ORACLE_SIZE};

#[cfg(test)]
#[allow(unused_imports)]
pub(crate) use angles::fixtures;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DmpVerdict {
    WeakPass,
    StrictPass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DmpSection {
    pub verdict: DmpVerdict,
    pub checks: Vec<DmpCheck>,
    /// First failing node, if any.
    pub witness: Option<usize>,
}

impl DmpSection {
    /// Runs each variant; the verdict is `fail` if any check fails and
    /// `strict-pass` if all pass and at least one is a strict variant.
    pub fn evaluate<T: Real>(u: &[T], g: &[T], variants: &[DmpVariant]) -> Result<Self, DmpError> {
        let checks = variants
            .iter()
            .map(|&v| check_dmp(u, g, v))
            .collect::<Result<Vec<_>, _>>()?;
        let witness = checks.iter().find_map(|c| c.witness);
        let verdict = if checks.iter().any(|c| !c.pass) {
            DmpVerdict::Fail
        } else if checks.iter().any(|c| c.variant.is_strict()) {
            DmpVerdict::StrictPass
        } else {
            DmpVerdict::WeakPass
        };
        Ok(Self {
            verdict,
            checks,
            witness,
        })
    }

    pub fn pass(&self) -> bool {
        self.verdict != DmpVerdict::Fail
    }
}

/// Full audit; absent sections were not requested.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct AuditReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub angles: Option<AngleSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign_pattern: Option<SignPatternSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub row_sums: Option<RowSumSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spd: Option<SpdSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dmp: Option<DmpSection>,
}

impl AuditReport {
    pub fn with_matrix(mut self, m: MatrixConditions) -> Self {
        self.sign_pattern = Some(m.sign_pattern);
        self.row_sums = Some(m.row_sums);
        self.spd = Some(m.spd);
        self
    }

    pub fn angles_pass(&self) -> Option<bool> {
        self.angles.as_ref().map(|s| s.pass)
    }

    pub fn sign_pass(&self) -> Option<bool> {
        self.sign_pattern.as_ref().map(|s| s.pass)
    }

    pub fn rowsum_pass(&self) -> Option<bool> {
        self.row_sums.as_ref().map(|s| s.pass)
    }

    pub fn spd_pass(&self) -> Option<bool> {
        self.spd.as_ref().map(|s| s.pass)
    }

    pub fn dmp_pass(&self) -> Option<bool> {
        self.dmp.as_ref().map(DmpSection::pass)
    }

    /// True iff every present section passes.
    pub fn pass(&self) -> bool {
        [
            self.angles_pass(),
            self.sign_pass(),
            self.rowsum_pass(),
            self.spd_pass(),
            self.dmp_pass(),
        ]
        .into_iter()
        .flatten()
        .all(|p| p)
    }
}

/// Nodal verdicts the theory predicts for `problem` on `mesh`, chosen from
/// the signs of the reduced source `f - q(., 0)` (sampled at vertices and
/// edge midpoints) and of the boundary data.
///
/// With `q = 0` the range statements are strict; otherwise the weak bounds
/// apply, plus nonnegativity (nonpositivity) when `g` has a sign.
pub fn predicted_variants<T: Real>(mesh: &SurfaceMesh<T>, problem: &ProblemSpec<T>) -> Vec<DmpVariant> {
    let mut samples: Vec<T> = mesh.vertices().iter().map(|x| problem.reduced_source(x)).collect();
    for [a, b] in mesh.edges() {
        let m = mesh.vertices()[a].midpoint(&mesh.vertices()[b]);
        samples.push(problem.reduced_source(&m));
    }
    let nonpositive_source = samples.iter().all(|&s| s <= T::zero());
    let nonnegative_source = samples.iter().all(|&s| s >= T::zero());
    let g: Vec<T> = mesh.vertices()[mesh.n_interior()..].iter().map(|x| (problem.g)(x)).collect();
    let g_nonneg = g.iter().all(|&v| v >= T::zero());
    let g_nonpos = g.iter().all(|&v| v <= T::zero());

    let mut variants = Vec::new();
    if problem.q_vanishes {
        if nonpositive_source {
            variants.push(DmpVariant::StrictMax);
        }
        if nonnegative_source {
            variants.push(DmpVariant::StrictMin);
        }
    } else {
        if nonpositive_source {
            variants.push(DmpVariant::WeakMax);
            if g_nonpos {
                variants.push(DmpVariant::Nonpos);
            }
        }
        if nonnegative_source {
            variants.push(DmpVariant::WeakMin);
            if g_nonneg {
                variants.push(DmpVariant::Nonneg);
            }
        }
    }
    variants
}

/// Assembles the system at the converged iterate `u` and runs every section.
///
/// An empty `variants` list falls back to both weak bounds, which then act
/// as observations rather than predictions.
pub fn audit_solution<T: Real>(
    mesh: &SurfaceMesh<T>,
    problem: &ProblemSpec<T>,
    u: &[T],
    mode: AngleMode,
    variants: &[DmpVariant],
    assembly: &AssemblyOptions,
) -> Result<AuditReport, FemError> {
    let system = assemble(mesh, problem, u, assembly)?;
    let n = mesh.n_interior();
    let fallback = [DmpVariant::WeakMax, DmpVariant::WeakMin];
    let variants = if variants.is_empty() { &fallback[..] } else { variants };
    let dmp = DmpSection::evaluate(u, &u[n..], variants).map_err(|_| FemError::LengthMismatch {
        expected: mesh.n_vertices(),
        actual: u.len(),
    })?;
    Ok(AuditReport {
        angles: Some(check_angles(mesh, mode)),
        dmp: Some(dmp),
        ..AuditReport::default()
    }
    .with_matrix(check_matrix_conditions(&system.matrix, n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_hemisphere, generate_semitorus};
    use crate::solver::{picard_solve, SolveOptions};

    #[test]
    fn radiative_cooling_passes_every_section() {
        let mesh = generate_hemisphere::<f64>(2).unwrap();
        let problem = ProblemSpec::radiative_cooling(1.0).unwrap();
        let variants = predicted_variants(&mesh, &problem);
        assert_eq!(
            variants,
            vec![DmpVariant::WeakMax, DmpVariant::WeakMin, DmpVariant::Nonneg]
        );
        let (u, _) = picard_solve(&mesh, &problem, &SolveOptions::default()).unwrap();
        let report = audit_solution(
            &mesh,
            &problem,
            u.values(),
            AngleMode::Acute,
            &variants,
            &AssemblyOptions::default(),
        )
        .unwrap();
        assert!(report.pass(), "{report:#?}");
        assert_eq!(report.dmp.unwrap().verdict, DmpVerdict::WeakPass);
    }

    #[test]
    fn p_laplacian_range_is_strict() {
        let mesh = generate_semitorus::<f64>(5.0, 2.0, 9, 4).unwrap();
        let problem = ProblemSpec::p_laplacian(4.0, 1e-8).unwrap();
        let variants = predicted_variants(&mesh, &problem);
        assert_eq!(variants, vec![DmpVariant::StrictMax, DmpVariant::StrictMin]);
        let opts = SolveOptions {
            damping: 1.0 / 3.0,
            ..SolveOptions::default()
        };
        let (u, report) = picard_solve(&mesh, &problem, &opts).unwrap();
        assert!(report.converged);
        let dmp = DmpSection::evaluate(u.values(), &u.values()[mesh.n_interior()..], &variants).unwrap();
        assert_eq!(dmp.verdict, DmpVerdict::StrictPass);
    }

    #[test]
    fn verdict_reports_first_witness() {
        let u = [2.0, -3.0, 1.0, 0.5];
        let dmp = DmpSection::evaluate(&u, &u[2..], &[DmpVariant::StrictMin, DmpVariant::WeakMax]).unwrap();
        assert_eq!(dmp.verdict, DmpVerdict::Fail);
        assert_eq!(dmp.witness, Some(1));
    }

    #[test]
    fn report_serializes_section_names() {
        let mesh = generate_hemisphere::<f64>(1).unwrap();
        let report = AuditReport {
            angles: Some(check_angles(&mesh, AngleMode::Acute)),
            ..AuditReport::default()
        };
        let json = serde_json::to_value(&report).unwrap();
        assert!(json.get("angles").is_some());
        assert!(json.get("dmp").is_none());
        assert!(report.pass());
    }
}
