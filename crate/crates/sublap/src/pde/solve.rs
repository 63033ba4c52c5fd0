//! Deterministic iterative solvers for the assembled Dirichlet systems.
//!
//! The operator is symmetric positive definite on the interior unknowns, so
//! the workhorse is Jacobi-preconditioned conjugate gradients. Successive
//! over-relaxation and damped Jacobi are kept both as slower cross-checks and
//! because their sweeps exercise the row-residual path of the assembly.
//!
//! Determinism: inner products are accumulated serially in slot order; the
//! only parallel piece is the row-independent matvec, whose per-row arithmetic
//! does not depend on the thread count. Solutions are therefore bitwise
//! reproducible for a fixed grid regardless of parallelism.

use crate::error::{Error, Result};
use crate::pde::operator::DirichletSystem;

/// Iterative method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Jacobi-preconditioned conjugate gradients (default).
    Cg,
    /// Successive over-relaxation, lexicographic sweeps.
    Sor,
    /// Damped Jacobi.
    Jacobi,
}

/// Solver configuration.
#[derive(Debug, Clone, Copy)]
pub struct SolverParams {
    /// Method to run.
    pub method: Method,
    /// Relative-residual stopping tolerance ‖r‖/‖b‖.
    pub tol: f64,
    /// Iteration (sweep) budget.
    pub max_iter: usize,
    /// SOR relaxation factor.
    pub omega: f64,
    /// Jacobi damping factor.
    pub damping: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            method: Method::Cg,
            tol: 1e-8,
            max_iter: 20_000,
            omega: 1.8,
            damping: 0.8,
        }
    }
}

/// Convergence record of one solve.
#[derive(Debug, Clone, Copy)]
pub struct SolveStats {
    /// Iterations (CG) or sweeps (SOR/Jacobi) consumed.
    pub iterations: usize,
    /// Final relative residual ‖b − Mu‖/‖b‖.
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves M_II u = b with the configured method and returns interior values.
///
/// The initial guess is the constant mean of the band data, which makes the
/// solver exact (zero iterations) on constant Dirichlet data.
pub fn solve_interior(sys: &DirichletSystem<'_>, params: &SolverParams) -> Result<(Vec<f64>, SolveStats)> {
    if !(params.tol > 0.0) || params.max_iter == 0 {
        return Err(Error::InvalidParameter(format!(
            "solver needs tol > 0 and max_iter > 0, got tol {} max_iter {}",
            params.tol, params.max_iter
        )));
    }
    if params.method == Method::Sor && !(params.omega > 0.0 && params.omega < 2.0) {
        return Err(Error::InvalidParameter(format!(
            "SOR needs 0 < omega < 2, got {}",
            params.omega
        )));
    }
    match params.method {
        Method::Cg => cg(sys, params),
        Method::Sor => relax(sys, params, false),
        Method::Jacobi => relax(sys, params, true),
    }
}

fn initial_guess(sys: &DirichletSystem<'_>) -> Vec<f64> {
    let band = sys.band_values();
    let n = sys.grid().interior().len();
    if band.is_empty() {
        return vec![0.0; n];
    }
    let mean = band.iter().sum::<f64>() / band.len() as f64;
    vec![mean; n]
}

fn cg(sys: &DirichletSystem<'_>, params: &SolverParams) -> Result<(Vec<f64>, SolveStats)> {
    let b = sys.rhs();
    let b_norm = norm(&b).max(f64::MIN_POSITIVE);
    let diag = sys.diagonal();
    let mut x = initial_guess(sys);
    let mut r: Vec<f64> = b
        .iter()
        .zip(sys.matvec(&x))
        .map(|(bi, mxi)| bi - mxi)
        .collect();
    let mut res = norm(&r) / b_norm;
    if res <= params.tol {
        return Ok((
            x,
            SolveStats {
                iterations: 0,
                residual: res,
            },
        ));
    }
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(ri, d)| ri / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 1..=params.max_iter {
        let mp = sys.matvec(&p);
        let pmp = dot(&p, &mp);
        if !(pmp > 0.0) {
            return Err(Error::NoConvergence(format!(
                "CG curvature non-positive at iteration {it}: {pmp}"
            )));
        }
        let alpha = rz / pmp;
        for (xi, pi) in x.iter_mut().zip(&p) {
            *xi += alpha * pi;
        }
        for (ri, mpi) in r.iter_mut().zip(&mp) {
            *ri -= alpha * mpi;
        }
        res = norm(&r) / b_norm;
        if res <= params.tol {
            return Ok((
                x,
                SolveStats {
                    iterations: it,
                    residual: res,
                },
            ));
        }
        for ((zi, ri), d) in z.iter_mut().zip(&r).zip(&diag) {
            *zi = ri / d;
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    Err(Error::NoConvergence(format!(
        "CG exhausted {} iterations at relative residual {res:.3e} (tol {:.1e})",
        params.max_iter, params.tol
    )))
}

fn relax(
    sys: &DirichletSystem<'_>,
    params: &SolverParams,
    jacobi: bool,
) -> Result<(Vec<f64>, SolveStats)> {
    let b = sys.rhs();
    let b_norm = norm(&b).max(f64::MIN_POSITIVE);
    let diag = sys.diagonal();
    let x0 = initial_guess(sys);
    let mut full = sys.scatter(&x0, true);
    let grid = sys.grid();
    let mut res = f64::INFINITY;
    for it in 1..=params.max_iter {
        if jacobi {
            sys.jacobi_sweep(&mut full, &diag, params.damping);
        } else {
            sys.sor_sweep(&mut full, &diag, params.omega);
        }
        // True residual at the post-sweep state.
        let x: Vec<f64> = grid.interior().iter().map(|&l| full[l]).collect();
        let r: Vec<f64> = b
            .iter()
            .zip(sys.matvec(&x))
            .map(|(bi, mxi)| bi - mxi)
            .collect();
        res = norm(&r) / b_norm;
        if res <= params.tol {
            return Ok((
                x,
                SolveStats {
                    iterations: it,
                    residual: res,
                },
            ));
        }
    }
    Err(Error::NoConvergence(format!(
        "{} exhausted {} sweeps at relative residual {res:.3e} (tol {:.1e})",
        if jacobi { "Jacobi" } else { "SOR" },
        params.max_iter,
        params.tol
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::gauge_ball;
    use crate::pde::grid::Grid;
    use crate::{Model, Point};

    fn small_system(grid: &Grid) -> DirichletSystem<'_> {
        // Band data: a smooth non-constant function of position.
        let g: Vec<f64> = grid
            .band()
            .iter()
            .map(|b| {
                let p = grid.point_of(b.index);
                p.t + 0.3 * p.x[0]
            })
            .collect();
        DirichletSystem::new(grid, g)
    }

    #[test]
    fn the_three_methods_agree() {
        let model = Model::calibrated(1).unwrap();
        let d = gauge_ball(&model, &Point::origin(1), 1.0).unwrap();
        let grid = Grid::build(&d, [13, 13, 13]).unwrap();
        let sys = small_system(&grid);
        let tol = 1e-10;
        let (u_cg, s_cg) = solve_interior(
            &sys,
            &SolverParams {
                tol,
                ..SolverParams::default()
            },
        )
        .unwrap();
        assert!(s_cg.residual <= tol);
        let (u_sor, _) = solve_interior(
            &sys,
            &SolverParams {
                method: Method::Sor,
                tol,
                max_iter: 60_000,
                ..SolverParams::default()
            },
        )
        .unwrap();
        let (u_jac, _) = solve_interior(
            &sys,
            &SolverParams {
                method: Method::Jacobi,
                tol,
                max_iter: 200_000,
                ..SolverParams::default()
            },
        )
        .unwrap();
        let span = u_cg
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let scale = (span.1 - span.0).max(1e-12);
        for ((a, b), c) in u_cg.iter().zip(&u_sor).zip(&u_jac) {
            assert!((a - b).abs() < 1e-6 * scale, "CG vs SOR: {a} vs {b}");
            assert!((a - c).abs() < 1e-6 * scale, "CG vs Jacobi: {a} vs {c}");
        }
    }

    #[test]
    fn bad_parameters_are_rejected() {
        let model = Model::calibrated(1).unwrap();
        let d = gauge_ball(&model, &Point::origin(1), 1.0).unwrap();
        let grid = Grid::build(&d, [13, 13, 13]).unwrap();
        let sys = small_system(&grid);
        assert!(solve_interior(
            &sys,
            &SolverParams {
                tol: 0.0,
                ..SolverParams::default()
            }
        )
        .is_err());
        assert!(solve_interior(
            &sys,
            &SolverParams {
                method: Method::Sor,
                omega: 2.5,
                ..SolverParams::default()
            }
        )
        .is_err());
    }

    #[test]
    fn iteration_budget_is_enforced() {
        let model = Model::calibrated(1).unwrap();
        let d = gauge_ball(&model, &Point::origin(1), 1.0).unwrap();
        let grid = Grid::build(&d, [13, 13, 13]).unwrap();
        let sys = small_system(&grid);
        let err = solve_interior(
            &sys,
            &SolverParams {
                max_iter: 2,
                tol: 1e-14,
                ..SolverParams::default()
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::NoConvergence(_)));
    }
}
