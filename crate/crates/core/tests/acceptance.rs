//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sfem_dmp::audit::{algebraic_dwmp_oracle, check_matrix_conditions, RowSumMode, MAX_ORACLE_SIZE};
use sfem_dmp::fem::{assemble, element_geometry, gradient_pair_products, AssemblyOptions};
use sfem_dmp::mesh::{angle_stats, generate_hemisphere, generate_semitorus, refine, SurfaceTag};
use sfem_dmp::solver::picard_solve;
use sfem_dmp::{Mesh, Point, Problem, SolveOptions};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Boundary data range of the radiative-cooling experiment.
const RADIATIVE_G_MAX: f64 = 1.5;
/// Boundary data range of the p-Laplacian experiment.
const P_LAPLACIAN_RANGE: (f64, f64) = (3.0, 17.0);

fn radiative_range() -> Outcome {
    let problem = Problem::radiative_cooling(1.0).map_err(|e| e.to_string())?;
    let mut notes = Vec::new();
    for level in 1..=3 {
        let start = Instant::now();
        let mesh = generate_hemisphere::<f64>(level).map_err(|e| e.to_string())?;
        let (u, report) = picard_solve(&mesh, &problem, &SolveOptions::default()).map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        ensure(report.converged, || format!("level {level} did not converge"))?;
        ensure(u.min() >= -1e-10 && u.max() <= RADIATIVE_G_MAX + 1e-10, || {
            format!("level {level}: u in [{}, {}]", u.min(), u.max())
        })?;
        ensure(elapsed < Duration::from_secs(30), || format!("level {level} took {elapsed:?}"))?;
        notes.push(format!("L{level} [{:.4}, {:.4}] {:.2?}", u.min(), u.max(), elapsed));
    }
    Ok(notes.join("; "))
}

fn p_laplacian_range() -> Outcome {
    let problem = Problem::p_laplacian(4.0, 1e-8).map_err(|e| e.to_string())?;
    let opts = SolveOptions {
        damping: 1.0 / 3.0,
        ..SolveOptions::default()
    };
    let (lo, hi) = P_LAPLACIAN_RANGE;
    let mut mesh = generate_semitorus::<f64>(5.0, 2.0, 9, 4).map_err(|e| e.to_string())?;
    let mut notes = Vec::new();
    for (step, expected_f) in [64, 256, 1024].into_iter().enumerate() {
        if step > 0 {
            mesh = refine(&mesh).map_err(|e| e.to_string())?;
        }
        ensure(mesh.n_triangles() == expected_f, || {
            format!("{} elements, expected {expected_f}", mesh.n_triangles())
        })?;
        let (u, report) = picard_solve(&mesh, &problem, &opts).map_err(|e| e.to_string())?;
        ensure(report.converged, || format!("{expected_f} elements: no convergence"))?;
        let g: Vec<f64> = mesh.vertices()[mesh.n_interior()..].iter().map(|x| 10.0 + x.x()).collect();
        let g_max = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let g_min = g.iter().copied().fold(f64::INFINITY, f64::min);
        ensure(u.min() >= lo - 1e-6 && u.max() <= hi + 1e-6, || {
            format!("{expected_f} elements: u in [{}, {}]", u.min(), u.max())
        })?;
        ensure((u.max() - g_max).abs() <= 1e-6 && (u.min() - g_min).abs() <= 1e-6, || {
            format!(
                "{expected_f} elements: range [{}, {}] vs boundary [{g_min}, {g_max}]",
                u.min(),
                u.max()
            )
        })?;
        notes.push(format!("F={expected_f} [{}, {}]", u.min(), u.max()));
    }
    Ok(notes.join("; "))
}

fn radiative_matrix_audit() -> Outcome {
    let problem = Problem::radiative_cooling(1.0).map_err(|e| e.to_string())?;
    let mut notes = Vec::new();
    for level in 2..=3 {
        let mesh = generate_hemisphere::<f64>(level).map_err(|e| e.to_string())?;
        let (u, _) = picard_solve(&mesh, &problem, &SolveOptions::default()).map_err(|e| e.to_string())?;
        let system =
            assemble(&mesh, &problem, u.values(), &AssemblyOptions::default()).map_err(|e| e.to_string())?;
        let audit = check_matrix_conditions(&system.matrix, mesh.n_interior());
        ensure(audit.sign_pattern.violations.is_empty(), || {
            format!("level {level}: {} sign violations", audit.sign_pattern.violations.len())
        })?;
        ensure(audit.row_sums.row_sum_min >= -1e-10 * audit.max_abs, || {
            format!("level {level}: row sum {}", audit.row_sums.row_sum_min)
        })?;
        ensure(audit.spd.pass, || format!("level {level}: Cholesky failed"))?;
        notes.push(format!(
            "L{level} max off-diag {:.3e}, min row sum {:.3e}",
            audit.sign_pattern.max_off_diagonal, audit.row_sums.row_sum_min
        ));
    }
    Ok(notes.join("; "))
}

fn cotangent_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    let mut checked = 0;
    while checked < 1000 {
        let mut draw = || Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let v = [draw(), draw(), draw()];
        let twice_area = (v[1] - v[0]).cross(&(v[2] - v[0])).norm();
        let scale = (v[1] - v[0]).norm_squared().max((v[2] - v[0]).norm_squared());
        // keep angles away from 0 and 180 degrees so the cotangent is well conditioned
        if twice_area < 0.05 * scale {
            continue;
        }
        let geom = element_geometry(v).map_err(|e| e.to_string())?;
        let products = gradient_pair_products(&geom);
        for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            let e1 = v[a] - v[c];
            let e2 = v[b] - v[c];
            let cot = e1.dot(&e2) / e1.cross(&e2).norm();
            let expected = -cot / twice_area;
            let rel = (products[a][b] - expected).abs() / expected.abs().max(products[a][a].abs());
            worst = worst.max(rel);
        }
        checked += 1;
    }
    ensure(worst <= 1e-10, || format!("worst relative error {worst:e}"))?;
    Ok(format!("1000 triangles, worst relative error {worst:.2e}"))
}

fn dwmp_oracle() -> Outcome {
    let start = Instant::now();
    let weak = algebraic_dwmp_oracle(1000, MAX_ORACLE_SIZE, 2024, RowSumMode::Nonnegative);
    let strict = algebraic_dwmp_oracle(1000, MAX_ORACLE_SIZE, 2025, RowSumMode::Zero);
    let elapsed = start.elapsed();
    ensure(weak.violations == 0, || format!("{} weak violations: {:?}", weak.violations, weak.counterexample))?;
    ensure(strict.violations == 0, || {
        format!("{} strict violations: {:?}", strict.violations, strict.counterexample)
    })?;
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "2x1000 instances, 0 violations, worst excess {:.1e}/{:.1e}, {:.2?}",
        weak.worst_excess, strict.worst_excess, elapsed
    ))
}

fn implicit_residual(tag: &SurfaceTag<f64>, p: &Point) -> f64 {
    match *tag {
        SurfaceTag::UnitHemisphere => (p.x() * p.x() + p.y() * p.y() + p.z() * p.z()).sqrt() - 1.0,
        SurfaceTag::Torus { major, minor } => {
            let s = (p.x() * p.x() + p.y() * p.y()).sqrt() - major;
            s * s + p.z() * p.z() - minor * minor
        }
        SurfaceTag::None => 0.0,
    }
}

fn check_mesh(mesh: &Mesh, euler: i64, label: &str) -> Result<(), String> {
    ensure(mesh.euler_characteristic() == euler, || {
        format!("{label}: Euler characteristic {}", mesh.euler_characteristic())
    })?;
    let worst = mesh
        .vertices()
        .iter()
        .map(|p| implicit_residual(mesh.surface(), p).abs())
        .fold(0.0, f64::max);
    ensure(worst <= 1e-10, || format!("{label}: projection residual {worst:e}"))?;
    if *mesh.surface() == SurfaceTag::UnitHemisphere {
        let lowest = mesh.vertices().iter().map(|p| p.z()).fold(f64::INFINITY, f64::min);
        ensure(lowest >= -1e-12, || format!("{label}: vertex below the equator (z = {lowest:e})"))?;
    }
    let stats = angle_stats(mesh);
    for (e, angles) in stats.per_element_angles.iter().enumerate() {
        let sum: f64 = angles.iter().sum();
        ensure((sum - 180.0).abs() <= 1e-9, || format!("{label}: element {e} angle sum {sum}"))?;
    }
    Ok(())
}

fn mesh_invariants() -> Outcome {
    let mut count = 0;
    let families: Vec<(String, Mesh, i64)> = vec![
        ("hemisphere".into(), generate_hemisphere(0).map_err(|e| e.to_string())?, 1),
        ("torus(5,2)".into(), generate_semitorus(5.0, 2.0, 9, 4).map_err(|e| e.to_string())?, 0),
        ("torus(3,1)".into(), generate_semitorus(3.0, 1.0, 12, 6).map_err(|e| e.to_string())?, 0),
        ("torus(5,2) 40x4".into(), generate_semitorus(5.0, 2.0, 40, 4).map_err(|e| e.to_string())?, 0),
    ];
    for (name, base, euler) in families {
        let mut mesh = base;
        for level in 0..=4 {
            if level > 0 {
                let fine = refine(&mesh).map_err(|e| e.to_string())?;
                ensure(fine.n_triangles() == 4 * mesh.n_triangles(), || format!("{name} L{level}: F' != 4F"))?;
                ensure(fine.boundary_edges().len() == 2 * mesh.boundary_edges().len(), || {
                    format!("{name} L{level}: B' != 2B")
                })?;
                ensure(fine.n_vertices() == mesh.n_vertices() + mesh.n_edges(), || {
                    format!("{name} L{level}: V' != V + E")
                })?;
                mesh = fine;
            }
            check_mesh(&mesh, euler, &format!("{name} L{level}"))?;
            count += 1;
        }
    }
    for level in 0..=4 {
        let direct = generate_hemisphere::<f64>(level).map_err(|e| e.to_string())?;
        check_mesh(&direct, 1, &format!("generated hemisphere L{level}"))?;
        count += 1;
    }
    Ok(format!("{count} meshes"))
}

fn harmonic_constants() -> Outcome {
    const K: f64 = 2.75;
    let mesh = generate_hemisphere::<f64>(2).map_err(|e| e.to_string())?;
    let problem = Problem::laplace().with_g(|_| K);
    let (u, _) = picard_solve(&mesh, &problem, &SolveOptions::default()).map_err(|e| e.to_string())?;
    let err = u.values().iter().map(|v| (v - K).abs()).fold(0.0, f64::max);
    ensure(err <= 1e-9, || format!("|u - K| = {err:e}"))?;
    Ok(format!("|u - K|_inf = {err:.2e}"))
}

fn negative_control() -> Outcome {
    // many short rings with four vertices each give flat, obtuse strips
    let mesh = generate_semitorus::<f64>(5.0, 2.0, 40, 4).map_err(|e| e.to_string())?;
    let max_angle = angle_stats(&mesh).max_angle;
    let problem = Problem::laplace().with_g(|x| 10.0 + x.x());
    let (u, _) = picard_solve(&mesh, &problem, &SolveOptions::default()).map_err(|e| e.to_string())?;
    let system = assemble(&mesh, &problem, u.values(), &AssemblyOptions::default()).map_err(|e| e.to_string())?;
    let audit = check_matrix_conditions(&system.matrix, mesh.n_interior());
    let violations = audit.sign_pattern.violations.len();
    ensure(violations >= 1, || format!("no sign violations (max angle {max_angle:.1})"))?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let status = Command::new(env!("CARGO_BIN_EXE_sfem-dmp"))
        .args(["audit", "--surface", "semitorus", "--n-major", "40", "--n-minor", "4", "--levels", "0"])
        .args(["--deterministic", "--out-dir"])
        .arg(dir.path())
        .output()
        .map_err(|e| e.to_string())?;
    ensure(status.status.code() == Some(1), || format!("audit exit code {:?}", status.status.code()))?;
    Ok(format!("max angle {max_angle:.1} deg, {violations} sign violations, audit exit code 1"))
}

fn run_demo(dir: &Path) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_sfem-dmp"))
        .args(["demo", "radiative-cooling", "--levels", "2", "--deterministic", "--out-dir"])
        .arg(dir)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("demo exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr))
    })
}

fn determinism() -> Outcome {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    run_demo(a.path())?;
    run_demo(b.path())?;
    for name in ["solution.csv", "audit.json"] {
        let x = std::fs::read(a.path().join(name)).map_err(|e| e.to_string())?;
        let y = std::fs::read(b.path().join(name)).map_err(|e| e.to_string())?;
        ensure(!x.is_empty() && x == y, || format!("{name} differs between runs"))?;
    }
    Ok("solution.csv and audit.json byte-identical".into())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("radiative cooling stays in [0, 1.5] on hemisphere levels 1-3", radiative_range),
        ("p-Laplacian range coincides with [3, 17] on 64/256/1024 elements", p_laplacian_range),
        ("radiative-cooling matrix passes sign, row-sum and Cholesky checks at levels 2-3", radiative_matrix_audit),
        ("gradient pair products match the cotangent formula", cotangent_identity),
        ("algebraic weak and strict maximum principles on random systems", dwmp_oracle),
        ("mesh invariants under generation and refinement", mesh_invariants),
        ("discrete constants are harmonic", harmonic_constants),
        ("obtuse semitorus triggers sign violations and audit exit 1", negative_control),
        ("deterministic demo output is byte-identical", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS {}: {name} ({detail})", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {}: {name} ({detail})", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}

