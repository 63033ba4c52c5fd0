//! Grid-solver experiments: convergence, Green function, mean value.

use std::sync::Arc;

use sublap::field::{pole_gamma, FnField, LinearField, ScalarField};
use sublap::geometry::volume_e;
use sublap::hgroup::{c_q_closed_form, fundamental_solution};
use sublap::pde::{green_function, mean_value, mollify, solve_dirichlet_on, Grid, Injection};
use sublap::Point;

use super::{ball, dims_for, h1, refined, solver_params, Experiment};
use crate::config::Config;
use crate::output::{Assertion, ExperimentResult};
use crate::Failure;

/// Exact harmonic data that is not affine: a fundamental solution whose
/// pole sits well outside the closed unit-radius domain.
fn exterior_gamma(radius: f64) -> Result<sublap::field::LeftTranslatedField<f64, sublap::field::GaugePowerField<f64>>, Failure> {
    let pole = Point::from_xyt(1.6 * radius, 0.9 * radius, 0.3 * radius * radius);
    Ok(pole_gamma(&h1(), pole)?)
}

/// Second-order convergence of the Dirichlet solver on harmonic data, with
/// the discrete maximum principle checked exactly.
///
/// Affine data is reproduced by the scheme up to solver tolerance, so those
/// runs assert an exactness floor instead of an error ratio whenever both
/// grids sit below it; the curved fundamental-solution data always carries
/// a genuine truncation error and must shrink by the stated factor.
pub fn dirichlet_convergence(exp: Experiment, cfg: &Config) -> Result<ExperimentResult, Failure> {
    let mut res = ExperimentResult::new(exp.name(), cfg.params());
    let domain = ball(cfg)?;
    let radius = cfg.f64("domain.radius");
    let params = solver_params(cfg);
    let dims = dims_for(&domain, cfg.f64("pde.h"))?;
    let coarse = Arc::new(Grid::build(&domain, dims)?);
    let fine = Arc::new(Grid::build(&domain, refined(dims))?);
    res.metric("nodes_per_axis_coarse", dims[0] as f64);
    res.metric("nodes_per_axis_fine", refined(dims)[0] as f64);

    let t_field = LinearField::t_plus(1, 0.25);
    let x_field = LinearField::x1_plus(1, 1.0);
    let gamma = exterior_gamma(radius)?;
    let cases: [(&str, &dyn ScalarField<f64>, bool); 3] = [
        ("t_plus", &t_field, true),
        ("x1_plus", &x_field, true),
        ("gamma_translate", &gamma, false),
    ];

    const EXACTNESS_FLOOR: f64 = 1e-8;
    for (tag, data, may_be_exact) in cases {
        let sol_c = solve_dirichlet_on(coarse.clone(), data, Injection::FootPoint, &params)?;
        let sol_f = solve_dirichlet_on(fine.clone(), data, Injection::FootPoint, &params)?;
        let err_c = sol_c.field.max_interior_error(data);
        let err_f = sol_f.field.max_interior_error(data);
        res.metric(format!("error_coarse_{tag}"), err_c);
        res.metric(format!("error_fine_{tag}"), err_f);
        res.metric(format!("iterations_fine_{tag}"), sol_f.stats.iterations as f64);
        res.push(Assertion::exact_zero(
            format!("max_principle_coarse_{tag}"),
            sol_c.max_principle_violation(),
        ));
        res.push(Assertion::exact_zero(
            format!("max_principle_fine_{tag}"),
            sol_f.max_principle_violation(),
        ));
        if may_be_exact && err_c <= EXACTNESS_FLOOR && err_f <= EXACTNESS_FLOOR {
            res.push(Assertion::le(
                format!("exactness_floor_{tag}"),
                err_c.max(err_f),
                EXACTNESS_FLOOR,
            ));
        } else {
            res.push(Assertion::ge(
                format!("convergence_ratio_{tag}"),
                err_c / err_f,
                3.0,
            ));
        }
    }
    Ok(res)
}

/// Finite-difference Green function against its closed form on the centered
/// ball, Green symmetry, and the error budget tied to the plain Dirichlet
/// error constant on the same grid.
pub fn green_bounds(exp: Experiment, cfg: &Config) -> Result<ExperimentResult, Failure> {
    let mut res = ExperimentResult::new(exp.name(), cfg.params());
    let model = h1();
    let domain = ball(cfg)?;
    let radius = cfg.f64("domain.radius");
    let params = solver_params(cfg);
    let dims = dims_for(&domain, cfg.f64("pde.h"))?;
    let grid = Arc::new(Grid::build(&domain, dims)?);
    let h = grid.h_max();
    res.metric("h_max", h);

    // The same-grid Dirichlet error constant on curved harmonic data
    // calibrates what "within discretization error" means here.
    let gamma = exterior_gamma(radius)?;
    let cal = solve_dirichlet_on(grid.clone(), &gamma, Injection::FootPoint, &params)?;
    let err_cal = cal.field.max_interior_error(&gamma);
    res.metric("dirichlet_error_same_grid", err_cal);
    res.metric("dirichlet_error_constant", err_cal / (h * h));

    let c4: f64 = c_q_closed_form(1)?;
    let boundary_level = c4 / (radius * radius);
    let green = green_function(&domain, &model.origin(), dims, &params)?;
    let mut err_green = 0.0f64;
    for &l in grid.interior() {
        let p = grid.point_of(l);
        let exact = fundamental_solution(&model, &p)? - boundary_level;
        err_green = err_green.max((green.value_at_node(l)? - exact).abs());
    }
    res.metric("green_max_error", err_green);
    res.push(Assertion::le(
        "green_error_within_5x_dirichlet",
        err_green,
        5.0 * err_cal,
    ));
    res.metric("green_min_interior", green.min_interior(0.3 * radius)?);

    // Symmetry G(p, q) = G(q, p) from two independent poles.
    let p1 = Point::from_xyt(0.3 * radius, 0.0, 0.0);
    let p2 = Point::from_xyt(-0.15 * radius, 0.2 * radius, 0.05 * radius * radius);
    let g1 = green_function(&domain, &p1, dims, &params)?;
    let g2 = green_function(&domain, &p2, dims, &params)?;
    let g12 = g1.value(&p2)?;
    let g21 = g2.value(&p1)?;
    let rel = (g12 - g21).abs() / g12.abs().max(g21.abs());
    res.metric("green_p1_at_p2", g12);
    res.metric("green_p2_at_p1", g21);
    res.metric("green_symmetry_rel", rel);
    res.push(Assertion::le("green_symmetry", rel, 5.0 * h));
    Ok(res)
}

/// Mean-value and mollifier functionals reproduce harmonic functions at the
/// center, at two scales.
pub fn mollifier_check(exp: Experiment, cfg: &Config) -> Result<ExperimentResult, Failure> {
    let mut res = ExperimentResult::new(exp.name(), cfg.params());
    let model = h1();
    let domain = ball(cfg)?;
    let radius = cfg.f64("domain.radius");
    let origin = model.origin();
    let resolution = cfg.usize("quad.resolution");
    let cells = cfg.usize("mean.cells");
    let radii = cfg.list_f64("mean.radii");
    if radii.iter().any(|r| !(*r > 0.0 && *r < radius)) {
        return Err(Failure::Config(format!(
            "mean.radii must lie strictly inside the domain radius {radius}"
        )));
    }

    let one = FnField::new(|_: &Point| 1.0);
    let t_field = LinearField::t_plus(1, 0.25);
    let x_field = LinearField::x1_plus(1, 1.0);
    let cases: [(&str, &dyn ScalarField<f64>, f64); 3] = [
        ("one", &one, 1.0),
        ("t_plus", &t_field, 0.25),
        ("x1_plus", &x_field, 1.0),
    ];

    for (ri, &r) in radii.iter().enumerate() {
        let level = volume_e(&model, &origin, r)?;
        for (tag, field, at_center) in cases {
            let mv = mean_value(&domain, field, &origin, level, resolution)?;
            res.metric(format!("mean_value_{tag}_r{ri}"), mv);
            res.push(Assertion::le(
                format!("mean_value_{tag}_r{ri}"),
                (mv - at_center).abs(),
                1e-3,
            ));
            let mol = mollify(&domain, field, &origin, level, cells)?;
            res.metric(format!("mollifier_{tag}_r{ri}"), mol);
            res.push(Assertion::le(
                format!("mollifier_{tag}_r{ri}"),
                (mol - at_center).abs(),
                1e-3,
            ));
        }
    }
    Ok(res)
}
