//! Batch command-line front end: solve distance fields, run the convergence,
//! noise and moving-source harnesses, export results.
//!
//! Exit codes: 0 success, 1 input/parse problems, 2 solver did not reach
//! optimality, 3 invalid sources for the requested method.

mod output;

use std::process::exit;

use clap::{Parser, Subcommand};

use geodist::mesh;
use geodist::metrics::{self, ConvergenceOracle, ErrorReport, Method, NoiseReport};
use geodist::solver::{self, SolveError, SolveSettings};
use geodist::sources::{segment_path, SourceError, SourcePoint, SourceSet};

use output::FieldFormat;

#[derive(Debug)]
pub struct AppError {
    code: i32,
    message: String,
}

impl AppError {
    pub fn parse(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }

    pub fn sources(message: impl Into<String>) -> Self {
        Self { code: 3, message: message.into() }
    }

    pub fn solver(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    pub fn io(e: std::io::Error) -> Self {
        Self::parse(e.to_string())
    }
}

impl From<mesh::MeshError> for AppError {
    fn from(e: mesh::MeshError) -> Self {
        Self::parse(e.to_string())
    }
}

impl From<SourceError> for AppError {
    fn from(e: SourceError) -> Self {
        match e {
            SourceError::Io { .. } | SourceError::Json { .. } => Self::parse(e.to_string()),
            _ => Self::sources(e.to_string()),
        }
    }
}

impl From<SolveError> for AppError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::NoSource | SolveError::NonVertexSource { .. } => {
                Self::sources(e.to_string())
            }
            _ => Self::solver(e.to_string()),
        }
    }
}

impl From<metrics::MetricsError> for AppError {
    fn from(e: metrics::MetricsError) -> Self {
        match e {
            metrics::MetricsError::Solve(inner) => inner.into(),
            metrics::MetricsError::Source(inner) => inner.into(),
            other => Self::solver(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "geodist",
    version,
    about = "Geodesic distance fields on triangle meshes via quadratic elements and conic optimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a distance field from a source specification file.
    Solve {
        /// Mesh file (obj, off or ply).
        #[arg(long)]
        mesh: String,
        /// JSON source specification.
        #[arg(long)]
        sources: String,
        /// Solution method: "pq" (quadratic, default) or "dfa-pl" (linear baseline).
        #[arg(long, default_value = "pq")]
        method: String,
        /// Solver tolerance (also settable via GEO_SOLVER_TOL).
        #[arg(long)]
        tol: Option<f64>,
        /// Output file.
        #[arg(long)]
        out: String,
        /// Output format: json, csv or ply (default: by extension).
        #[arg(long)]
        format: Option<String>,
    },
    /// Subdivision convergence study for both methods.
    Converge {
        #[arg(long)]
        mesh: String,
        /// Number of subdivision levels.
        #[arg(long, default_value_t = 3)]
        levels: usize,
        /// Reference: "sphere", "flat" or "self".
        #[arg(long)]
        oracle: String,
        /// Output CSV path.
        #[arg(long)]
        csv: String,
        /// Source vertex index on the base mesh.
        #[arg(long, default_value_t = 0)]
        source_vertex: usize,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Solve on Gaussian-perturbed meshes and report deviations.
    Noise {
        #[arg(long)]
        mesh: String,
        /// Comma-separated noise deviations.
        #[arg(long, default_value = "0,0.004,0.008")]
        sigmas: String,
        /// Comma-separated seeds.
        #[arg(long, default_value = "1,2,3,4,5")]
        seeds: String,
        #[arg(long, default_value_t = 0)]
        source_vertex: usize,
        /// Output CSV path.
        #[arg(long)]
        csv: String,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Re-solve along a straight source path (may cross an edge).
    Movesource {
        #[arg(long)]
        mesh: String,
        /// Start point as face:l0,l1,l2.
        #[arg(long)]
        from: String,
        /// End point as face:l0,l1,l2.
        #[arg(long)]
        to: String,
        /// Number of frames (1 = a single solve at the start point).
        #[arg(long, default_value_t = 8)]
        frames: usize,
        /// Per-frame fields are written to <prefix>_<frame>.json and the
        /// delta summary to <prefix>_deltas.csv.
        #[arg(long)]
        out_prefix: String,
        #[arg(long)]
        tol: Option<f64>,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                exit(0);
            }
            eprint!("{e}");
            exit(1);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {}", e.message);
        exit(e.code);
    }
}

fn settings_with(tol: Option<f64>) -> Result<SolveSettings, AppError> {
    let mut s = SolveSettings::from_env();
    if let Some(t) = tol {
        if !(t > 0.0) {
            return Err(AppError::parse(format!("tolerance must be positive, got {t}")));
        }
        s.tol = t;
    }
    Ok(s)
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Solve { mesh, sources, method, tol, out, format } => {
            cmd_solve(&mesh, &sources, &method, tol, &out, format.as_deref())
        }
        Command::Converge { mesh, levels, oracle, csv, source_vertex, tol } => {
            cmd_converge(&mesh, levels, &oracle, &csv, source_vertex, tol)
        }
        Command::Noise { mesh, sigmas, seeds, source_vertex, csv, tol } => {
            cmd_noise(&mesh, &sigmas, &seeds, source_vertex, &csv, tol)
        }
        Command::Movesource { mesh, from, to, frames, out_prefix, tol } => {
            cmd_movesource(&mesh, &from, &to, frames, &out_prefix, tol)
        }
    }
}

fn cmd_solve(
    mesh_path: &str,
    sources_path: &str,
    method: &str,
    tol: Option<f64>,
    out: &str,
    format: Option<&str>,
) -> Result<(), AppError> {
    let format = FieldFormat::infer(out, format)?;
    let settings = settings_with(tol)?;
    let mesh = mesh::load_mesh(mesh_path)?;
    let sources = SourceSet::from_json_file(&mesh, sources_path)?;
    if sources.had_off_surface_segment {
        eprintln!("warning: some curve segments connect faces that share no vertex; only their endpoints were sampled");
    }
    match method {
        "pq" => {
            let field = solver::solve_geodesic(&mesh, &sources, &settings)?;
            output::write_pq_field(out, format, &field)?;
            let dmax = field.d.iter().fold(0.0f64, |m, &v| m.max(v));
            println!(
                "solved pq: {} nodes, {} sources, max d = {:.6e}",
                field.layout.total(),
                sources.len(),
                dmax
            );
        }
        "dfa-pl" => {
            let vertices = solver::vertex_sources(&mesh, &sources)?;
            let field = solver::solve_geodesic_pl(&mesh, &vertices, &settings)?;
            output::write_pl_field(out, format, &field)?;
            let dmax = field.d.iter().fold(0.0f64, |m, &v| m.max(v));
            println!(
                "solved dfa-pl: {} vertices, {} sources, max d = {:.6e}",
                field.d.len(),
                vertices.len(),
                dmax
            );
        }
        other => {
            return Err(AppError::parse(format!(
                "unknown method {other:?} (expected pq or dfa-pl)"
            )))
        }
    }
    Ok(())
}

fn cmd_converge(
    mesh_path: &str,
    levels: usize,
    oracle_name: &str,
    csv_path: &str,
    source_vertex: usize,
    tol: Option<f64>,
) -> Result<(), AppError> {
    if levels == 0 {
        return Err(AppError::parse("levels must be at least 1"));
    }
    let settings = settings_with(tol)?;
    let mesh = mesh::load_mesh(mesh_path)?;
    let oracle = match oracle_name {
        "flat" => ConvergenceOracle::Flat,
        "self" => ConvergenceOracle::SelfReference,
        "sphere" => {
            // infer the sphere from the vertices: centroid and mean radius
            let n = mesh.n_vertices() as f64;
            let mut center = [0.0; 3];
            for v in mesh.vertices() {
                for k in 0..3 {
                    center[k] += v[k] / n;
                }
            }
            let radius = mesh
                .vertices()
                .iter()
                .map(|v| {
                    ((v[0] - center[0]).powi(2)
                        + (v[1] - center[1]).powi(2)
                        + (v[2] - center[2]).powi(2))
                    .sqrt()
                })
                .sum::<f64>()
                / n;
            ConvergenceOracle::Sphere { center, radius }
        }
        other => {
            return Err(AppError::parse(format!(
                "unknown oracle {other:?} (expected sphere, flat or self)"
            )))
        }
    };
    let source = geodist::sources::source_from_vertex(&mesh, source_vertex)?;

    let mut rows: Vec<ErrorReport> = Vec::new();
    for method in [Method::Pq, Method::PlDfa] {
        rows.extend(metrics::convergence_run(
            &mesh, &source, method, oracle, levels, &settings,
        )?);
    }
    let mut text = String::from(ErrorReport::csv_header());
    text.push('\n');
    for r in &rows {
        text.push_str(&r.csv_row());
        text.push('\n');
    }
    std::fs::write(csv_path, text).map_err(AppError::io)?;
    for r in &rows {
        println!(
            "{} level {}: h={:.4e} rmse={:.4e} linf={:.4e} ({:.2}s)",
            r.method, r.level, r.h_mean, r.rmse, r.linf, r.wall_time_s
        );
    }
    Ok(())
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, AppError> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<T>()
                .map_err(|_| AppError::parse(format!("bad {what} entry {t:?}")))
        })
        .collect()
}

fn cmd_noise(
    mesh_path: &str,
    sigmas: &str,
    seeds: &str,
    source_vertex: usize,
    csv_path: &str,
    tol: Option<f64>,
) -> Result<(), AppError> {
    let settings = settings_with(tol)?;
    let mesh = mesh::load_mesh(mesh_path)?;
    let sigmas: Vec<f64> = parse_list(sigmas, "sigma")?;
    let seeds: Vec<u64> = parse_list(seeds, "seed")?;
    if sigmas.is_empty() || seeds.is_empty() {
        return Err(AppError::parse("need at least one sigma and one seed"));
    }
    let source = geodist::sources::source_from_vertex(&mesh, source_vertex)?;
    let reports = metrics::noise_sweep(&mesh, &source, &sigmas, &seeds, &settings)?;

    let mut text = String::from(NoiseReport::csv_header());
    text.push('\n');
    for r in &reports {
        text.push_str(&r.csv_row());
        text.push('\n');
    }
    std::fs::write(csv_path, text).map_err(AppError::io)?;

    for &sigma in &sigmas {
        let l2s: Vec<f64> =
            reports.iter().filter(|r| r.sigma == sigma).map(|r| r.l2).collect();
        println!("sigma {}: median L2 deviation {:.6e}", sigma, metrics::median(&l2s));
    }
    Ok(())
}

fn parse_face_lambda(text: &str) -> Result<SourcePoint, AppError> {
    let err = || {
        AppError::parse(format!(
            "bad point {text:?} (expected face:l0,l1,l2, e.g. 0:0.2,0.3,0.5)"
        ))
    };
    let (face, rest) = text.split_once(':').ok_or_else(err)?;
    let face: usize = face.trim().parse().map_err(|_| err())?;
    let parts: Vec<f64> = rest
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| err())?;
    if parts.len() != 3 {
        return Err(err());
    }
    Ok(SourcePoint { face, lambda: [parts[0], parts[1], parts[2]] })
}

fn cmd_movesource(
    mesh_path: &str,
    from: &str,
    to: &str,
    frames: usize,
    out_prefix: &str,
    tol: Option<f64>,
) -> Result<(), AppError> {
    if frames == 0 {
        return Err(AppError::parse("frames must be at least 1"));
    }
    let settings = settings_with(tol)?;
    let mesh = mesh::load_mesh(mesh_path)?;
    let a = parse_face_lambda(from)?;
    let b = parse_face_lambda(to)?;
    a.validate(&mesh)?;
    b.validate(&mesh)?;

    let path = segment_path(&mesh, &a, &b)?;
    if path.off_surface {
        return Err(AppError::sources(
            "from/to faces share no vertex; the path cannot be traced on the surface",
        ));
    }
    let step = if frames > 1 { path.total_length() / (frames - 1) as f64 } else { 0.0 };

    let mut prev: Option<Vec<f64>> = None;
    let mut deltas = String::from("frame,step_length,max_abs_delta_d\n");
    let mut max_delta_overall = 0.0f64;
    for i in 0..frames {
        let t = if frames > 1 { i as f64 / (frames - 1) as f64 } else { 0.0 };
        let point = path.point_at(t);
        let set = SourceSet::from_points(vec![point]);
        let field = solver::solve_geodesic(&mesh, &set, &settings)?;
        output::write_pq_field(
            &format!("{out_prefix}_{i:03}.json"),
            FieldFormat::Json,
            &field,
        )?;
        if let Some(prev_d) = &prev {
            let delta = field
                .d
                .iter()
                .zip(prev_d)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0f64, f64::max);
            max_delta_overall = max_delta_overall.max(delta);
            deltas.push_str(&format!("{},{},{}\n", i, step, delta));
        }
        prev = Some(field.d);
    }
    std::fs::write(format!("{out_prefix}_deltas.csv"), deltas).map_err(AppError::io)?;
    println!(
        "movesource: {} frames, step {:.6e}, max consecutive |Δd| = {:.6e}",
        frames, step, max_delta_overall
    );
    Ok(())
}
