use geodist::mesh::shapes;
use geodist::metrics::{self, ConvergenceOracle, Method};
use geodist::solver::{self, SolveSettings};
use geodist::sources::{SourcePoint, SourceSet, source_from_vertex};

#[test]
fn acceptance_previews() {
    let settings = SolveSettings { tol: 1e-9, max_iter: 200 };
    // --- criterion 3: sphere convergence
    let t0 = std::time::Instant::now();
    let ico = shapes::icosahedron();
    let src = source_from_vertex(&ico, 0).unwrap();
    let oracle = ConvergenceOracle::Sphere { center: [0.0; 3], radius: 1.0 };
    let pq = metrics::convergence_run(&ico, &src, Method::Pq, oracle, 3, &settings).unwrap();
    for r in &pq { println!("sphere pq L{}: h={:.4} rmse={:.4e} ({:.1}s)", r.level, r.h_mean, r.rmse, r.wall_time_s); }
    let pts: Vec<(f64, f64)> = pq.iter().map(|r| (r.h_mean, r.rmse)).collect();
    println!("sphere pq slope = {:.3}  total {:.1}s", metrics::log_log_slope(&pts), t0.elapsed().as_secs_f64());
    let pl = metrics::convergence_run(&ico, &src, Method::PlDfa, oracle, 3, &settings).unwrap();
    for r in &pl { println!("sphere pl L{}: h={:.4} rmse={:.4e} ({:.1}s)", r.level, r.h_mean, r.rmse, r.wall_time_s); }
}
