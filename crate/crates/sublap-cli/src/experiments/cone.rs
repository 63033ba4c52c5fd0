//! The fractional-regularity cone family: hypergeometric profile roots,
//! the harmonic function v = N^α g_α(τ), and the failure of exterior
//! X-ball tangency at the cone vertex.

use sublap::geometry::{gauge_ball, jerison_paraboloid, outer_xball_tangent};
use sublap::hgroup::dilate;
use sublap::jerison::{
    g_alpha, identity_for_profile, jacobi_residual, tau_root, JerisonSolution, JACOBI_FD_STEP,
};
use sublap::Point;

use super::{h1, log_spaced, Experiment};
use crate::config::Config;
use crate::output::{Assertion, ExperimentResult, Plot};
use crate::Failure;

/// Point on the dilation ray with prescribed τ ∈ (−1, 1) and |z| = 1:
/// t solves τ = 4t/√(1 + 16t²).
fn point_at_tau(target: f64) -> Point {
    let t = target / (4.0 * (1.0 - target * target).sqrt());
    Point::from_xyt(1.0, 0.0, t)
}

fn per_alpha(
    res: &mut ExperimentResult,
    idx: usize,
    alpha: f64,
) -> Result<JerisonSolution, Failure> {
    // The profile is normalized to one at τ = 1 (z = 0 on the positive
    // t-axis): hypergeometric series at argument zero, exact in f64.
    let g_top = g_alpha(1, alpha, 1.0)?;
    res.push(Assertion::exact_zero(format!("g_at_one_a{idx}"), g_top - 1.0));

    let sol = tau_root(1, alpha)?;
    let tau_a = sol.tau_alpha();
    let s_a = sol.s_alpha();
    res.metric(format!("tau_alpha_a{idx}"), tau_a);
    res.metric(format!("s_alpha_a{idx}"), s_a);
    res.metric(format!("cone_slope_a{idx}"), sol.m());
    res.metric(format!("root_residual_a{idx}"), sol.root_residual());
    res.push(Assertion::holds(
        format!("tau_in_range_a{idx}"),
        tau_a,
        0.0,
        tau_a > -1.0 && tau_a < 0.0,
    ));
    res.push(Assertion::le(
        format!("root_residual_a{idx}"),
        sol.root_residual(),
        1e-12,
    ));

    // The cone {t = M|z|²} carries constant τ = 4M/√(1 + 16M²); the root
    // and the slope must agree to near machine precision.
    let m = sol.m();
    let tau_of_m = 4.0 * m / (1.0 + 16.0 * m * m).sqrt();
    res.metric(format!("cone_tau_dev_a{idx}"), (tau_of_m - tau_a).abs());
    res.push(Assertion::le(
        format!("cone_slope_identity_a{idx}"),
        (tau_of_m - tau_a).abs(),
        1e-10,
    ));

    // The profile solves the Jacobi-type ODE: finite-difference residual of
    // the hypergeometric evaluation over the physical τ window.
    let profile = move |t: f64| g_alpha(1, alpha, t).expect("profile window stays inside (−1, 1]");
    let mut max_resid = 0.0f64;
    let grid = 64usize;
    for j in 0..=grid {
        let t = -0.9 + 1.89 * (j as f64) / (grid as f64);
        max_resid = max_resid.max(jacobi_residual(1, alpha, profile, t, JACOBI_FD_STEP).abs());
    }
    res.metric(format!("jacobi_residual_a{idx}"), max_resid);
    res.push(Assertion::le(
        format!("jacobi_residual_a{idx}"),
        max_resid,
        1e-6,
    ));

    // Interior homogeneity: along a dilation ray τ is constant, so
    // v = N^α g(τ) fits a pure power law with exponent α.
    let base = point_at_tau((tau_a + 1.0) / 2.0);
    let samples: Vec<Point> = log_spaced(0.2, 1.2, 9)?
        .into_iter()
        .map(|lambda| dilate(&base, lambda))
        .collect();
    let fitted = sol.holder_exponent(&samples)?;
    res.metric(format!("holder_exponent_a{idx}"), fitted);
    res.push(Assertion::le(
        format!("holder_exponent_a{idx}"),
        (fitted - alpha).abs(),
        0.05,
    ));

    // The closed-form radial identity, cross-checked on a non-harmonic
    // profile u = τ² where both sides are nonzero: the finite-difference
    // Kohn Laplacian converges to the closed form at second order.
    let u0 = |t: f64| t * t;
    let u1 = |t: f64| 2.0 * t;
    let u2 = |_: f64| 2.0;
    let p = point_at_tau(0.35);
    let dev = |h: f64| -> Result<f64, Failure> {
        let (fd, rhs) = identity_for_profile(1, alpha, (&u0, &u1, &u2), &p, h)?;
        Ok((fd - rhs).abs() / (1.0 + rhs.abs()))
    };
    let (d_coarse, d_fine) = (dev(2e-3)?, dev(1e-3)?);
    res.metric(format!("identity_dev_coarse_a{idx}"), d_coarse);
    res.metric(format!("identity_dev_fine_a{idx}"), d_fine);
    if d_coarse <= 1e-10 && d_fine <= 1e-10 {
        res.push(Assertion::le(
            format!("identity_fd_floor_a{idx}"),
            d_coarse.max(d_fine),
            1e-10,
        ));
    } else {
        res.push(Assertion::ge(
            format!("identity_fd_order_a{idx}"),
            d_coarse / d_fine,
            2.5,
        ));
    }
    Ok(sol)
}

/// The fractional-exponent harmonic family on the cone: profile roots,
/// ODE residuals, dilation homogeneity, and monotonicity of the root in α.
pub fn jerison(exp: Experiment, cfg: &Config) -> Result<ExperimentResult, Failure> {
    let mut res = ExperimentResult::new(exp.name(), cfg.params());
    let alphas = cfg.list_f64("jerison.alphas");
    if alphas.iter().any(|a| !(*a > 0.0 && *a <= 1.0)) {
        return Err(Failure::Config(
            "jerison.alphas entries must lie in (0, 1]".into(),
        ));
    }
    if alphas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Failure::Config(
            "jerison.alphas must be strictly increasing".into(),
        ));
    }

    let mut sols = Vec::with_capacity(alphas.len());
    for (i, &alpha) in alphas.iter().enumerate() {
        sols.push(per_alpha(&mut res, i, alpha)?);
    }

    // Shallower cones (smaller α) open wider: the root moves toward τ = −1.
    let monotone = sols.windows(2).all(|w| w[0].s_alpha() < w[1].s_alpha());
    res.push(Assertion::holds(
        "tau_monotone_in_alpha",
        sols.last().map_or(f64::NAN, |s| s.tau_alpha()) - sols[0].tau_alpha(),
        0.0,
        monotone,
    ));

    res.plot(Plot::Matrix {
        stem: "jerison_roots".into(),
        rows_name: "quantity".into(),
        cols_name: "alpha".into(),
        row_labels: vec!["tau_alpha".into(), "cone_slope".into(), "s_alpha".into()],
        col_labels: alphas.iter().map(|a| format!("{a:.3}")).collect(),
        cells: vec![
            sols.iter().map(|s| s.tau_alpha()).collect(),
            sols.iter().map(|s| s.m()).collect(),
            sols.iter().map(|s| s.s_alpha()).collect(),
        ],
    });
    Ok(res)
}

/// Exterior X-ball tangency: fails at the cone vertex (the boundary is only
/// C^α there) and holds on the smooth gauge ball, characteristic pole
/// included.
pub fn tangency(exp: Experiment, cfg: &Config) -> Result<ExperimentResult, Failure> {
    let mut res = ExperimentResult::new(exp.name(), cfg.params());
    let model = h1();
    let alpha = cfg.f64("jerison.alpha");
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Failure::Config("jerison.alpha must lie in (0, 1]".into()));
    }
    let radius = cfg.f64("domain.radius");

    let sol = tau_root(1, alpha)?;
    res.metric("cone_slope", sol.m());
    let cone = jerison_paraboloid(&model, sol.m(), 1.0)?;
    let vertex = model.origin();
    let rep = outer_xball_tangent(&cone, &vertex, 0.3, 200)?;
    res.metric("cone_vertex_gap", rep.gap);
    res.metric("cone_vertex_residual", rep.residual);
    res.push(Assertion::holds(
        "cone_vertex_tangency_fails",
        rep.gap,
        -1e-6,
        rep.violation && rep.gap < -1e-6,
    ));

    let ball = gauge_ball(&model, &model.origin(), radius)?;
    let checks = [
        ("equator", Point::from_xyt(radius, 0.0, 0.0)),
        (
            "characteristic_pole",
            Point::from_xyt(0.0, 0.0, radius * radius / 4.0),
        ),
    ];
    for (tag, y) in checks {
        let rep = outer_xball_tangent(&ball, &y, 0.3 * radius, 200)?;
        res.metric(format!("ball_{tag}_gap"), rep.gap);
        res.metric(format!("ball_{tag}_residual"), rep.residual);
        res.push(Assertion::holds(
            format!("ball_{tag}_tangent_exists"),
            rep.gap,
            -1e-8,
            !rep.violation && rep.gap >= -1e-8,
        ));
    }
    Ok(res)
}
