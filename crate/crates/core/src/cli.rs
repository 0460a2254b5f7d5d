//! Command-line front end: mesh generation, solves, audits, sweeps and the
//! two canned experiments.
//!
//! Exit codes: 0 all checks pass, 1 audit or DMP failure, 2 usage or
//! configuration error, 3 solver failure.

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::audit::{
    audit_solution, check_angles, check_matrix_conditions, predicted_variants, AngleMode, AuditReport, DmpSection,
    DmpVerdict,
};
use crate::fem::{assemble, AssemblyOptions, CoefficientPoint};
use crate::io::{self, ConfigFile, IoError};
use crate::mesh::{angle_stats, generate_hemisphere, generate_semitorus, mesh_regularity, refine};
use crate::problems::{catalog, CatalogParams, ProblemKind};
use crate::solver::{picard_solve, InitialGuess, SolveReport, Subsolver};
use crate::{Field, Mesh, Problem, SolveOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_AUDIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

/// Highest level the demos accept.
pub const MAX_DEMO_LEVEL: usize = 6;

#[derive(Debug, Parser)]
#[command(name = "sfem-dmp", version, about = "Surface FEM solver with discrete maximum principle audits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate meshes and write OFF files and angle tables.
    Mesh {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Solve a problem and write the solution.
    Solve(RunArgs),
    /// Solve, then audit the mesh, the system matrix and the solution.
    Audit {
        #[command(flatten)]
        run: RunArgs,
        /// Sections to check (default: all).
        #[arg(long, value_enum, value_delimiter = ',')]
        checks: Vec<Check>,
        /// Also write the system matrix (MatrixMarket) and load vector (CSV).
        #[arg(long)]
        export_matrix: bool,
    },
    /// Mesh statistics and audit verdicts across refinement levels.
    Sweep(RunArgs),
    /// Reproduce one of the two reference experiments.
    Demo {
        #[arg(value_enum)]
        name: DemoName,
        /// Level list: `N`, `A-B` (inclusive) or `A,B,C`.
        #[arg(long)]
        levels: Option<String>,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SurfaceKind {
    Hemisphere,
    Semitorus,
}

impl fmt::Display for SurfaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Hemisphere => "hemisphere",
            Self::Semitorus => "semitorus",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DemoName {
    RadiativeCooling,
    PLaplacian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Angles,
    Sign,
    Rowsum,
    Spd,
    Dmp,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SurfaceArgs {
    #[arg(long, value_enum)]
    pub surface: Option<SurfaceKind>,
    /// Level list: `N`, `A-B` (inclusive) or `A,B,C`.
    #[arg(long)]
    pub levels: Option<String>,
    /// Torus major radius.
    #[arg(long = "R")]
    pub major_radius: Option<f64>,
    /// Torus minor radius.
    #[arg(long = "r")]
    pub minor_radius: Option<f64>,
    /// Vertex rings along the half major circle of the base torus mesh.
    #[arg(long)]
    pub n_major: Option<usize>,
    /// Vertices per ring of the base torus mesh.
    #[arg(long)]
    pub n_minor: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ProblemArgs {
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long = "eps-reg")]
    pub eps_reg: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SolverArgs {
    /// Relaxation in (0, 1]; p-Laplacian runs default to 1/(p-1).
    #[arg(long)]
    pub damping: Option<f64>,
    #[arg(long)]
    pub picard_tol: Option<f64>,
    #[arg(long)]
    pub max_picard: Option<usize>,
    #[arg(long, value_enum)]
    pub subsolver: Option<SubsolverArg>,
    /// Start from the boundary mean instead of zero in the interior.
    #[arg(long)]
    pub mean_start: bool,
    /// Evaluate coefficients at the closest point of the exact surface.
    #[arg(long)]
    pub exact_projection: bool,
    #[arg(long, value_enum)]
    pub audit_mode: Option<AuditModeArg>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct OutputArgs {
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Sequential assembly; output files are byte-identical across runs.
    #[arg(long)]
    pub deterministic: bool,
    /// TOML file with defaults for any of the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub surface: SurfaceArgs,
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SubsolverArg {
    Cg,
    Cholesky,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AuditModeArg {
    Acute,
    Nonobtuse,
}

/// A failure tagged with the pipeline stage it came from.
#[derive(Debug)]
pub struct CliError {
    pub stage: &'static str,
    pub message: String,
    pub code: i32,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            stage: "config",
            message: message.into(),
            code: EXIT_USAGE,
        }
    }

    fn at(stage: &'static str, code: i32, err: impl fmt::Display) -> Self {
        Self {
            stage,
            message: err.to_string(),
            code,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.stage, self.message)
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::at("io", EXIT_USAGE, e)
    }
}

/// Fully resolved run settings: flags override the config file, which
/// overrides built-in defaults.
#[derive(Debug, Clone)]
pub struct Settings {
    pub surface: SurfaceKind,
    pub levels: Vec<usize>,
    pub major_radius: f64,
    pub minor_radius: f64,
    pub n_major: usize,
    pub n_minor: usize,
    pub problem: ProblemKind,
    pub params: CatalogParams<f64>,
    pub solve: SolveOptions,
    pub audit_mode: Option<AngleMode>,
    pub out_dir: PathBuf,
}

/// Parses `N`, `A-B` (inclusive) or a comma-separated list.
pub fn parse_levels(text: &str) -> Result<Vec<usize>, String> {
    let bad = || format!("invalid level list '{text}' (use N, A-B or A,B,C)");
    let text = text.trim();
    if let Some((a, b)) = text.split_once('-') {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    let levels = text
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| bad()))
        .collect::<Result<Vec<_>, _>>()?;
    if levels.is_empty() {
        return Err(bad());
    }
    Ok(levels)
}

fn parse_with<V: ValueEnum>(text: &str, what: &str) -> Result<V, CliError> {
    V::from_str(text, false).map_err(|_| CliError::usage(format!("invalid {what} '{text}'")))
}

impl Settings {
    #[allow(clippy::field_reassign_with_default)]
    fn resolve(
        surface: &SurfaceArgs,
        problem: &ProblemArgs,
        solver: &SolverArgs,
        output: &OutputArgs,
    ) -> Result<Self, CliError> {
        let cfg = match &output.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };

        let surface_kind = match (surface.surface, &cfg.surface) {
            (Some(s), _) => s,
            (None, Some(s)) => parse_with(s, "surface")?,
            (None, None) => SurfaceKind::Hemisphere,
        };
        let levels = match surface.levels.as_ref().or(cfg.levels.as_ref()) {
            Some(text) => parse_levels(text).map_err(CliError::usage)?,
            None => vec![match surface_kind {
                SurfaceKind::Hemisphere => 2,
                SurfaceKind::Semitorus => 0,
            }],
        };
        let problem_name = problem.problem.clone().or(cfg.problem.clone()).unwrap_or_else(|| {
            match surface_kind {
                SurfaceKind::Hemisphere => "radiative-cooling",
                SurfaceKind::Semitorus => "p-laplacian",
            }
            .to_string()
        });
        let kind: ProblemKind = problem_name.parse().map_err(|e| CliError::usage(format!("{e}")))?;
        if kind == ProblemKind::GasDynamics {
            return Err(CliError::usage(
                "gas-dynamics needs a user-supplied density law; use the library API",
            ));
        }
        let defaults = CatalogParams::<f64>::default();
        let params = CatalogParams {
            sigma: problem.sigma.or(cfg.sigma).unwrap_or(defaults.sigma),
            p: problem.p.or(cfg.p).unwrap_or(defaults.p),
            epsilon_reg: problem.eps_reg.or(cfg.epsilon_reg).unwrap_or(defaults.epsilon_reg),
            rho: None,
        };

        let mut solve = SolveOptions::default();
        solve.damping = match solver.damping.or(cfg.damping) {
            Some(d) => d,
            // the frozen-coefficient map of |grad u|^(p-2) has slope -(p-2)
            None if kind == ProblemKind::PLaplacian && params.p > 2.0 => 1.0 / (params.p - 1.0),
            None => 1.0,
        };
        if let Some(t) = solver.picard_tol.or(cfg.picard_tol) {
            solve.picard_tol = t;
        }
        if let Some(m) = solver.max_picard.or(cfg.max_picard) {
            solve.max_picard = m;
        }
        solve.subsolver = match (solver.subsolver, &cfg.subsolver) {
            (Some(SubsolverArg::Cg), _) => Subsolver::Cg,
            (Some(SubsolverArg::Cholesky), _) => Subsolver::Cholesky,
            (None, Some(s)) => match parse_with::<SubsolverArg>(s, "subsolver")? {
                SubsolverArg::Cg => Subsolver::Cg,
                SubsolverArg::Cholesky => Subsolver::Cholesky,
            },
            (None, None) => Subsolver::default(),
        };
        if solver.mean_start {
            solve.initial_guess = InitialGuess::BoundaryMean;
        }
        solve.assembly = AssemblyOptions {
            deterministic: output.deterministic || cfg.deterministic.unwrap_or(false),
            coefficients: if solver.exact_projection {
                CoefficientPoint::ExactProjection
            } else {
                CoefficientPoint::MeshPoint
            },
        };
        solve
            .validate()
            .map_err(|e| CliError::usage(e.to_string()))?;

        let audit_mode = match (solver.audit_mode, &cfg.audit_mode) {
            (Some(AuditModeArg::Acute), _) => Some(AngleMode::Acute),
            (Some(AuditModeArg::Nonobtuse), _) => Some(AngleMode::Nonobtuse),
            (None, Some(s)) => Some(s.parse::<AngleMode>().map_err(CliError::usage)?),
            (None, None) => None,
        };

        let settings = Self {
            surface: surface_kind,
            levels,
            major_radius: surface.major_radius.or(cfg.major_radius).unwrap_or(5.0),
            minor_radius: surface.minor_radius.or(cfg.minor_radius).unwrap_or(2.0),
            n_major: surface.n_major.or(cfg.n_major).unwrap_or(9),
            n_minor: surface.n_minor.or(cfg.n_minor).unwrap_or(4),
            problem: kind,
            params,
            solve,
            audit_mode,
            out_dir: output
                .out_dir
                .clone()
                .or(cfg.out_dir.map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from(".")),
        };
        // fail on bad geometry before any work
        settings.base_mesh()?;
        settings.problem_spec()?;
        Ok(settings)
    }

    fn base_mesh(&self) -> Result<Mesh, CliError> {
        let mesh = match self.surface {
            SurfaceKind::Hemisphere => generate_hemisphere(0),
            SurfaceKind::Semitorus => {
                generate_semitorus(self.major_radius, self.minor_radius, self.n_major, self.n_minor)
            }
        };
        mesh.map_err(|e| CliError::usage(e.to_string()))
    }

    /// Mesh at `level`: hemisphere levels count icosahedral refinements,
    /// semitorus levels count refinements of the base strip mesh.
    pub fn mesh(&self, level: usize) -> Result<Mesh, CliError> {
        let stage = |e| CliError::at("mesh", EXIT_USAGE, e);
        match self.surface {
            SurfaceKind::Hemisphere => generate_hemisphere(level).map_err(stage),
            SurfaceKind::Semitorus => {
                let mut mesh = self.base_mesh()?;
                for _ in 0..level {
                    mesh = refine(&mesh).map_err(stage)?;
                }
                Ok(mesh)
            }
        }
    }

    pub fn problem_spec(&self) -> Result<Problem, CliError> {
        catalog(&self.problem.to_string(), &self.params).map_err(|e| CliError::usage(e.to_string()))
    }

    /// Audit mode when none was given: nonobtuse for `q = 0`, acute otherwise.
    pub fn angle_mode(&self, problem: &Problem) -> AngleMode {
        self.audit_mode.unwrap_or(if problem.q_vanishes {
            AngleMode::Nonobtuse
        } else {
            AngleMode::Acute
        })
    }

    fn level_dir(&self, level: usize) -> Result<PathBuf, CliError> {
        let dir = if self.levels.len() == 1 {
            self.out_dir.clone()
        } else {
            self.out_dir.join(format!("level-{level}"))
        };
        std::fs::create_dir_all(&dir).map_err(|e| CliError::at("io", EXIT_USAGE, format!("{}: {e}", dir.display())))?;
        Ok(dir)
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error {e}");
            e.code
        }
    }
}

pub fn run(command: &Command) -> Result<i32, CliError> {
    match command {
        Command::Mesh { surface, output } => {
            let s = Settings::resolve(surface, &ProblemArgs::default(), &SolverArgs::default(), output)?;
            cmd_mesh(&s)
        }
        Command::Solve(a) => cmd_solve(&Settings::resolve(&a.surface, &a.problem, &a.solver, &a.output)?),
        Command::Audit {
            run,
            checks,
            export_matrix,
        } => {
            let s = Settings::resolve(&run.surface, &run.problem, &run.solver, &run.output)?;
            cmd_audit(&s, checks, *export_matrix)
        }
        Command::Sweep(a) => cmd_sweep(&Settings::resolve(&a.surface, &a.problem, &a.solver, &a.output)?),
        Command::Demo {
            name,
            levels,
            solver,
            output,
        } => {
            let (surface, problem, default_levels) = match name {
                DemoName::RadiativeCooling => (SurfaceKind::Hemisphere, "radiative-cooling", "1-3"),
                DemoName::PLaplacian => (SurfaceKind::Semitorus, "p-laplacian", "0-2"),
            };
            let surface = SurfaceArgs {
                surface: Some(surface),
                levels: Some(levels.clone().unwrap_or_else(|| default_levels.into())),
                ..SurfaceArgs::default()
            };
            let problem = ProblemArgs {
                problem: Some(problem.into()),
                ..ProblemArgs::default()
            };
            let s = Settings::resolve(&surface, &problem, solver, output)?;
            if let Some(&l) = s.levels.iter().find(|&&l| l > MAX_DEMO_LEVEL) {
                return Err(CliError::usage(format!("demo level {l} exceeds {MAX_DEMO_LEVEL}")));
            }
            cmd_demo(&s)
        }
    }
}

/// One solved and audited level.
struct LevelRun {
    level: usize,
    mesh: Mesh,
    u: Field,
    report: SolveReport,
    audit: AuditReport,
}

fn solve_level(s: &Settings, level: usize, problem: &Problem) -> Result<(Mesh, Field, SolveReport), CliError> {
    let mesh = s.mesh(level)?;
    let (u, report) = picard_solve(&mesh, problem, &s.solve).map_err(|e| CliError::at("solve", EXIT_SOLVER, e))?;
    if !report.converged {
        return Err(CliError::at(
            "solve",
            EXIT_SOLVER,
            format!(
                "level {level}: no convergence after {} iterations (last increment {:e}); try a smaller --damping",
                report.iterations, report.final_increment
            ),
        ));
    }
    Ok((mesh, u, report))
}

fn solve_and_audit(s: &Settings, level: usize, problem: &Problem) -> Result<LevelRun, CliError> {
    let (mesh, u, report) = solve_level(s, level, problem)?;
    let variants = predicted_variants(&mesh, problem);
    let audit = audit_solution(
        &mesh,
        problem,
        u.values(),
        s.angle_mode(problem),
        &variants,
        &s.solve.assembly,
    )
    .map_err(|e| CliError::at("audit", EXIT_SOLVER, e))?;
    Ok(LevelRun {
        level,
        mesh,
        u,
        report,
        audit,
    })
}

fn write_mesh_files(dir: &Path, mesh: &Mesh) -> Result<(), CliError> {
    let stats = angle_stats(mesh);
    io::write_file(&dir.join("mesh.off"), |w| Ok(io::write_off(mesh, w)?))?;
    io::write_file(&dir.join("angles.csv"), |w| Ok(io::write_angles_csv(&stats, w)?))?;
    io::write_file(&dir.join("angle_histogram.csv"), |w| Ok(io::write_histogram_csv(&stats, w)?))?;
    Ok(())
}

fn write_solution_files(dir: &Path, mesh: &Mesh, u: &Field, report: &SolveReport) -> Result<(), CliError> {
    io::write_file(&dir.join("solution.csv"), |w| Ok(io::write_solution_csv(mesh, u, w)?))?;
    io::write_file(&dir.join("solve_report.json"), |w| io::write_json(report, w))?;
    Ok(())
}

fn write_run(dir: &Path, run: &LevelRun) -> Result<(), CliError> {
    write_mesh_files(dir, &run.mesh)?;
    write_solution_files(dir, &run.mesh, &run.u, &run.report)?;
    io::write_file(&dir.join("audit.json"), |w| io::write_json(&run.audit, w))?;
    Ok(())
}

fn flag(v: Option<bool>) -> &'static str {
    match v {
        Some(true) => "pass",
        Some(false) => "FAIL",
        None => "-",
    }
}

fn verdict_name(section: &DmpSection) -> &'static str {
    match section.verdict {
        DmpVerdict::WeakPass => "weak-pass",
        DmpVerdict::StrictPass => "strict-pass",
        DmpVerdict::Fail => "FAIL",
    }
}

fn reduced_source_max(mesh: &Mesh, problem: &Problem) -> f64 {
    let mut max = f64::NEG_INFINITY;
    for v in mesh.vertices() {
        max = max.max(problem.reduced_source(v));
    }
    for [a, b] in mesh.edges() {
        max = max.max(problem.reduced_source(&mesh.vertices()[a].midpoint(&mesh.vertices()[b])));
    }
    max
}

fn summary_line(s: &Settings, problem: &Problem, run: &LevelRun) -> String {
    let a = &run.audit;
    let dmp = a.dmp.as_ref().map_or_else(
        || "-".to_string(),
        |d| {
            let names: Vec<String> = d.checks.iter().map(|c| c.variant.to_string()).collect();
            let mut text = format!("{} ({})", verdict_name(d), names.join(", "));
            if let Some(w) = d.witness {
                text.push_str(&format!(" witness node {w}"));
            }
            text
        },
    );
    format!(
        "{} on {} level {}: V={} F={} iterations={} u in [{}, {}] max(f-q0)={:e} dmp={} angles[{}]={} sign={} rowsum={} spd={}",
        problem.name,
        s.surface,
        run.level,
        run.mesh.n_vertices(),
        run.mesh.n_triangles(),
        run.report.iterations,
        run.u.min(),
        run.u.max(),
        reduced_source_max(&run.mesh, problem),
        dmp,
        s.angle_mode(problem),
        flag(a.angles_pass()),
        flag(a.sign_pass()),
        flag(a.rowsum_pass()),
        flag(a.spd_pass()),
    )
}

fn cmd_mesh(s: &Settings) -> Result<i32, CliError> {
    for &level in &s.levels {
        let mesh = s.mesh(level)?;
        let stats = angle_stats(&mesh);
        let (m1, m2) = mesh_regularity(&mesh);
        write_mesh_files(&s.level_dir(level)?, &mesh)?;
        println!(
            "{} level {level}: V={} F={} E={} boundary edges={} euler={} h={} angles [{}, {}] regularity [{m1}, {m2}]",
            s.surface,
            mesh.n_vertices(),
            mesh.n_triangles(),
            mesh.n_edges(),
            mesh.boundary_edges().len(),
            mesh.euler_characteristic(),
            mesh.h(),
            stats.min_angle,
            stats.max_angle,
        );
    }
    Ok(EXIT_OK)
}

fn cmd_solve(s: &Settings) -> Result<i32, CliError> {
    let problem = s.problem_spec()?;
    for &level in &s.levels {
        let (mesh, u, report) = solve_level(s, level, &problem)?;
        let dir = s.level_dir(level)?;
        io::write_file(&dir.join("mesh.off"), |w| Ok(io::write_off(&mesh, w)?))?;
        write_solution_files(&dir, &mesh, &u, &report)?;
        println!(
            "{} on {} level {level}: V={} F={} iterations={} u in [{}, {}]",
            problem.name,
            s.surface,
            mesh.n_vertices(),
            mesh.n_triangles(),
            report.iterations,
            u.min(),
            u.max()
        );
    }
    Ok(EXIT_OK)
}

fn cmd_audit(s: &Settings, checks: &[Check], export_matrix: bool) -> Result<i32, CliError> {
    let problem = s.problem_spec()?;
    let wanted = |c: Check| checks.is_empty() || checks.contains(&c);
    let mut failed = false;
    for &level in &s.levels {
        let mut run = solve_and_audit(s, level, &problem)?;
        let a = &mut run.audit;
        if !wanted(Check::Angles) {
            a.angles = None;
        }
        if !wanted(Check::Sign) {
            a.sign_pattern = None;
        }
        if !wanted(Check::Rowsum) {
            a.row_sums = None;
        }
        if !wanted(Check::Spd) {
            a.spd = None;
        }
        if !wanted(Check::Dmp) {
            a.dmp = None;
        }
        failed |= !run.audit.pass();
        let dir = s.level_dir(level)?;
        write_run(&dir, &run)?;
        if export_matrix {
            let system = assemble(&run.mesh, &problem, run.u.values(), &s.solve.assembly)
                .map_err(|e| CliError::at("audit", EXIT_SOLVER, e))?;
            io::write_file(&dir.join("matrix.mtx"), |w| Ok(system.matrix.write_matrix_market(w)?))?;
            io::write_file(&dir.join("load.csv"), |w| Ok(io::write_vector_csv(&system.load, w)?))?;
        }
        println!("{}", summary_line(s, &problem, &run));
    }
    Ok(if failed { EXIT_AUDIT_FAILURE } else { EXIT_OK })
}

#[derive(Debug, Serialize)]
struct SweepRow {
    level: usize,
    vertices: usize,
    triangles: usize,
    euler_characteristic: i64,
    h: f64,
    min_angle: f64,
    max_angle: f64,
    regularity_min: f64,
    regularity_max: f64,
    sigma0_estimate: f64,
    picard_iterations: usize,
    u_min: f64,
    u_max: f64,
    sign_ok: bool,
    rowsum_ok: bool,
    spd_ok: bool,
    dmp_ok: bool,
}

fn cmd_sweep(s: &Settings) -> Result<i32, CliError> {
    let problem = s.problem_spec()?;
    let mut rows = Vec::new();
    for &level in &s.levels {
        let mesh = s.mesh(level)?;
        let stats = angle_stats(&mesh);
        let (m1, m2) = mesh_regularity(&mesh);
        let (_, u, report) = solve_level(s, level, &problem)?;
        let system = assemble(&mesh, &problem, u.values(), &s.solve.assembly)
            .map_err(|e| CliError::at("audit", EXIT_SOLVER, e))?;
        let matrix = check_matrix_conditions(&system.matrix, mesh.n_interior());
        let angles = check_angles(&mesh, s.angle_mode(&problem));
        let dmp = DmpSection::evaluate(
            u.values(),
            &u.values()[mesh.n_interior()..],
            &predicted_variants(&mesh, &problem),
        )
        .map_err(|e| CliError::at("audit", EXIT_SOLVER, e))?;
        rows.push(SweepRow {
            level,
            vertices: mesh.n_vertices(),
            triangles: mesh.n_triangles(),
            euler_characteristic: mesh.euler_characteristic(),
            h: mesh.h(),
            min_angle: stats.min_angle,
            max_angle: stats.max_angle,
            regularity_min: m1,
            regularity_max: m2,
            sigma0_estimate: angles.sigma0_estimate,
            picard_iterations: report.iterations,
            u_min: u.min(),
            u_max: u.max(),
            sign_ok: matrix.sign_pattern.pass,
            rowsum_ok: matrix.row_sums.pass,
            spd_ok: matrix.spd.pass,
            dmp_ok: dmp.pass(),
        });
    }
    std::fs::create_dir_all(&s.out_dir).map_err(|e| CliError::at("io", EXIT_USAGE, e))?;
    io::write_file(&s.out_dir.join("sweep.csv"), |w| {
        use std::io::Write;
        writeln!(w, "level,V,F,h,min_angle,max_angle,sigma0_estimate,sign_ok,rowsum_ok,spd_ok,dmp_ok")?;
        for r in &rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.level,
                r.vertices,
                r.triangles,
                r.h,
                r.min_angle,
                r.max_angle,
                r.sigma0_estimate,
                r.sign_ok,
                r.rowsum_ok,
                r.spd_ok,
                r.dmp_ok
            )?;
        }
        Ok(())
    })?;
    io::write_file(&s.out_dir.join("sweep.json"), |w| io::write_json(&rows, w))?;
    for r in &rows {
        println!(
            "level {}: V={} F={} h={:.4} angles [{:.2}, {:.2}] sigma0={:.4} sign={} rowsum={} spd={} dmp={}",
            r.level,
            r.vertices,
            r.triangles,
            r.h,
            r.min_angle,
            r.max_angle,
            r.sigma0_estimate,
            flag(Some(r.sign_ok)),
            flag(Some(r.rowsum_ok)),
            flag(Some(r.spd_ok)),
            flag(Some(r.dmp_ok)),
        );
    }
    Ok(if rows.iter().all(|r| r.dmp_ok) {
        EXIT_OK
    } else {
        EXIT_AUDIT_FAILURE
    })
}

/// Runs the reference experiment; only the DMP verdict decides the exit code,
/// hypothesis checks are reported alongside.
fn cmd_demo(s: &Settings) -> Result<i32, CliError> {
    let problem = s.problem_spec()?;
    let mut failed = false;
    for &level in &s.levels {
        let run = solve_and_audit(s, level, &problem)?;
        write_run(&s.level_dir(level)?, &run)?;
        failed |= run.audit.dmp_pass() == Some(false);
        println!("{}", summary_line(s, &problem, &run));
    }
    Ok(if failed { EXIT_AUDIT_FAILURE } else { EXIT_OK })
}
