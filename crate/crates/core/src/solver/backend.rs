//! Lowering of the conic IR to the Clarabel interior-point solver.
//!
//! Rotated cones are rewritten as standard second-order cones through the
//! usual (x+y, x−y, √2·z) isometry. The solver sees Ax + s = b with s in a
//! product of a zero cone (equalities) and small second-order cones.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

use super::program::{ConeBlock, ConicProgram, LinearExpr};
use super::{SolveError, SolveSettings, SolveStatus, Solution};

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// KKT static regularization per attempt. The small value buys one to two
/// digits of solution accuracy when the factorization tolerates it; the
/// backend falls back to the stock value when it does not.
const STATIC_REG_LADDER: [f64; 2] = [1e-12, 1e-8];

/// Solves the program; non-optimal termination is reported in the returned
/// status, not as an error.
pub fn solve(program: &ConicProgram, settings: &SolveSettings) -> Result<Solution, SolveError> {
    program.validate().map_err(SolveError::MalformedProgram)?;

    let n = program.n_vars;
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    let mut b: Vec<f64> = Vec::new();
    let mut cones: Vec<SupportedConeT<f64>> = Vec::new();
    let mut row = 0usize;

    // equalities: A x = b  (zero cone)
    for eq in &program.equalities {
        for &(i, c) in &eq.lhs.terms {
            triplets.push((row, i, c));
        }
        b.push(eq.rhs - eq.lhs.constant);
        row += 1;
    }
    if !program.equalities.is_empty() {
        cones.push(SupportedConeT::ZeroConeT(program.equalities.len()));
    }

    // each cone block becomes one standard SOC: s = b − A x ∈ K
    let push_soc_row = |expr_terms: &[(usize, f64)], scale: f64, constant: f64,
                            triplets: &mut Vec<(usize, usize, f64)>,
                            b: &mut Vec<f64>,
                            row: &mut usize| {
        for &(i, c) in expr_terms {
            triplets.push((*row, i, -scale * c));
        }
        b.push(scale * constant);
        *row += 1;
    };

    for block in &program.cones {
        match block {
            ConeBlock::Rotated { x, y, z, .. } => {
                // (x+y) ≥ ‖(x−y, √2 z)‖
                let sum = add_exprs(x, y, 1.0);
                let diff = add_exprs(x, y, -1.0);
                push_soc_row(&sum.terms, 1.0, sum.constant, &mut triplets, &mut b, &mut row);
                push_soc_row(&diff.terms, 1.0, diff.constant, &mut triplets, &mut b, &mut row);
                push_soc_row(&z[0].terms, SQRT2, z[0].constant, &mut triplets, &mut b, &mut row);
                push_soc_row(&z[1].terms, SQRT2, z[1].constant, &mut triplets, &mut b, &mut row);
                cones.push(SupportedConeT::SecondOrderConeT(4));
            }
            ConeBlock::Soc { t, z, .. } => {
                push_soc_row(&t.terms, 1.0, t.constant, &mut triplets, &mut b, &mut row);
                push_soc_row(&z[0].terms, 1.0, z[0].constant, &mut triplets, &mut b, &mut row);
                push_soc_row(&z[1].terms, 1.0, z[1].constant, &mut triplets, &mut b, &mut row);
                cones.push(SupportedConeT::SecondOrderConeT(3));
            }
        }
    }

    let a = csc_from_triplets(row, n, triplets);
    let p = CscMatrix::<f64>::zeros((n, n));

    // The stock static regularization (1e-8) caps solution accuracy well
    // above the requested tolerances, but the small value can break the
    // factorization on harder geometry. Try accurate first, stock second,
    // and keep the first accepted result; otherwise report the last one.
    let mut last: Option<Solution> = None;
    for (attempt, &static_reg) in STATIC_REG_LADDER.iter().enumerate() {
        let clarabel_settings = DefaultSettingsBuilder::default()
            .verbose(std::env::var("GEODIST_SOLVER_VERBOSE").is_ok())
            .max_iter(settings.max_iter)
            .tol_gap_abs(settings.tol)
            .tol_gap_rel(settings.tol)
            .tol_feas(settings.tol)
            .static_regularization_constant(static_reg)
            .iterative_refinement_max_iter(40)
            .build()
            .map_err(|e| SolveError::Backend(e.to_string()))?;

        let mut solver =
            DefaultSolver::new(&p, &program.objective, &a, &b, &cones, clarabel_settings)
                .map_err(|e| SolveError::Backend(format!("{e:?}")))?;
        solver.solve();

        let solution = classify(&solver.solution, settings, attempt, static_reg);
        let done = matches!(
            solution.status,
            SolveStatus::Optimal | SolveStatus::Infeasible | SolveStatus::Unbounded
        );
        last = Some(solution);
        if done {
            break;
        }
    }
    Ok(last.expect("at least one attempt"))
}

fn classify(
    sol: &clarabel::solver::DefaultSolution<f64>,
    settings: &SolveSettings,
    attempt: usize,
    static_reg: f64,
) -> Solution {
    let raw = sol.status;
    let mut diagnostics = format!("{raw:?} (attempt {attempt}, static_reg {static_reg:.0e})");
    let status = match raw {
        SolverStatus::Solved => SolveStatus::Optimal,
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            SolveStatus::Infeasible
        }
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => {
            SolveStatus::Unbounded
        }
        SolverStatus::AlmostSolved => {
            // The backend labels a run AlmostSolved once progress stalls,
            // even when the iterate is tighter than a plainly Solved one.
            // Check the optimality certificates ourselves and accept the
            // point when gap and residuals meet the contract.
            let gap = (sol.obj_val - sol.obj_val_dual).abs() / sol.obj_val.abs().max(1.0);
            let thr = settings.tol.max(1e-7);
            if gap <= thr && sol.r_prim <= thr && sol.r_dual <= thr {
                diagnostics = format!(
                    "AlmostSolved accepted (gap={gap:.2e}, r_prim={:.2e}, r_dual={:.2e})",
                    sol.r_prim, sol.r_dual
                );
                SolveStatus::Optimal
            } else {
                diagnostics = format!(
                    "AlmostSolved rejected (gap={gap:.2e}, r_prim={:.2e}, r_dual={:.2e})",
                    sol.r_prim, sol.r_dual
                );
                SolveStatus::MaxIter
            }
        }
        _ => SolveStatus::MaxIter,
    };
    Solution {
        x: sol.x.clone(),
        status,
        iterations: sol.iterations,
        solve_time_s: sol.solve_time,
        objective_value: sol.obj_val,
        diagnostics,
    }
}

fn add_exprs(a: &LinearExpr, b: &LinearExpr, sign: f64) -> LinearExpr {
    let mut terms = a.terms.clone();
    for &(i, c) in &b.terms {
        terms.push((i, sign * c));
    }
    terms.sort_unstable_by_key(|&(i, _)| i);
    let mut merged: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
    for (i, c) in terms {
        match merged.last_mut() {
            Some(last) if last.0 == i => last.1 += c,
            _ => merged.push((i, c)),
        }
    }
    LinearExpr { terms: merged, constant: a.constant + sign * b.constant }
}

fn csc_from_triplets(m: usize, n: usize, mut triplets: Vec<(usize, usize, f64)>) -> CscMatrix<f64> {
    triplets.sort_unstable_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));
    let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
    for (r, c, v) in triplets {
        match merged.last_mut() {
            Some(last) if last.0 == r && last.1 == c => last.2 += v,
            _ => merged.push((r, c, v)),
        }
    }
    let mut colptr = vec![0usize; n + 1];
    for &(_, c, _) in &merged {
        colptr[c + 1] += 1;
    }
    for c in 0..n {
        colptr[c + 1] += colptr[c];
    }
    let rowval = merged.iter().map(|&(r, _, _)| r).collect();
    let nzval = merged.iter().map(|&(_, _, v)| v).collect();
    CscMatrix::new(m, n, colptr, rowval, nzval)
}
