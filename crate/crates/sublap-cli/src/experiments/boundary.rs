//! Boundary-kernel experiments: Poisson kernel masses, reverse Hölder
//! ratios, boundary representation, and Monte Carlo harmonic measure.

use sublap::field::{FnField, LinearField, ScalarField};
use sublap::kernels::{
    kernel_bound_constant, poisson_kernels, represent_solution, reverse_holder as rh_ratio,
    total_mass, KernelMode, KernelSample, KernelWeighting,
};
use sublap::measures::{build_quadrature, surface_ball, SurfaceQuadrature};
use sublap::pde::green_function;
use sublap::stochastic::{exit_moments, harmonic_measure as mc_measure, Integrator, Partition};
use sublap::Point;

use super::{ball, dims_for, h1, solver_params, walk_config, Experiment};
use crate::config::Config;
use crate::output::{Assertion, ExperimentResult, Plot};
use crate::Failure;

fn characteristic_count(samples: &[KernelSample]) -> f64 {
    samples.iter().filter(|s| s.characteristic).count() as f64
}

/// Total Poisson-kernel mass equals one: K against σ_X and P against σ,
/// both for the analytic closed-form kernel at the group identity and for
/// the grid-mode kernel differenced from a solved Green function at an
/// off-center pole.
pub fn kernel_mass(exp: Experiment, cfg: &Config) -> Result<ExperimentResult, Failure> {
    let mut res = ExperimentResult::new(exp.name(), cfg.params());
    let model = h1();
    let domain = ball(cfg)?;
    let radius = cfg.f64("domain.radius");

    let quad = build_quadrature(&domain, cfg.usize("quad.resolution"))?;
    let samples = poisson_kernels(&model, &quad, &model.origin(), KernelMode::ClosedForm)?;
    let (mass_p, mass_k) = total_mass(&samples, &quad)?;
    res.metric("closed_form_mass_p", mass_p);
    res.metric("closed_form_mass_k", mass_k);
    res.metric("closed_form_nodes", quad.nodes.len() as f64);
    res.metric("closed_form_characteristic_nodes", characteristic_count(&samples));
    res.push(Assertion::le("closed_form_mass_k", (mass_k - 1.0).abs(), 0.02));
    res.push(Assertion::le("closed_form_mass_p", (mass_p - 1.0).abs(), 0.02));

    // Grid mode exercises the generic path: an interior pole with no closed
    // form on this boundary, XG differenced from the finite-difference
    // Green field.
    let pole = Point::from_xyt(0.3 * radius, 0.0, 0.0);
    let dims = dims_for(&domain, cfg.f64("pde.h"))?;
    let params = solver_params(cfg);
    let green = green_function(&domain, &pole, dims, &params)?;
    let quad_g = build_quadrature(&domain, cfg.usize("kernel.grid_resolution"))?;
    let samples_g = poisson_kernels(&model, &quad_g, &pole, KernelMode::Grid(&green))?;
    let (gmass_p, gmass_k) = total_mass(&samples_g, &quad_g)?;
    res.metric("grid_mass_p", gmass_p);
    res.metric("grid_mass_k", gmass_k);
    res.metric("grid_nodes", quad_g.nodes.len() as f64);
    res.metric("grid_characteristic_nodes", characteristic_count(&samples_g));
    res.metric("grid_nodes_per_axis", dims[0] as f64);
    res.push(Assertion::le("grid_mass_k", (gmass_k - 1.0).abs(), 0.05));
    res.push(Assertion::le("grid_mass_p", (gmass_p - 1.0).abs(), 0.05));
    Ok(res)
}

/// Sanitizes a config label into an assertion/plot token.
fn center_point(label: &str, radius: f64) -> Result<(String, Point), Failure> {
    match label.trim() {
        "pole" => Ok((
            "pole".into(),
            Point::from_xyt(0.0, 0.0, radius * radius / 4.0),
        )),
        "equator" => Ok(("equator".into(), Point::from_xyt(radius, 0.0, 0.0))),
        other => Err(Failure::Config(format!(
            "rh.centers entries must be 'pole' or 'equator', got '{other}'"
        ))),
    }
}

struct RhGrid {
    ratios: Vec<f64>,
}

fn rh_all_cells(
    samples: &[KernelSample],
    quad: &SurfaceQuadrature,
    ps: &[f64],
    centers: &[(String, Point)],
    radii: &[f64],
) -> Result<RhGrid, Failure> {
    let mut ratios = Vec::with_capacity(ps.len() * centers.len() * radii.len());
    for &p in ps {
        for (_, center) in centers {
            for &r in radii {
                let b = surface_ball(quad, center, r)?;
                let rep = rh_ratio(samples, quad, &b, p, KernelWeighting::HorizontalK)?;
                ratios.push(rep.ratio);
            }
        }
    }
    Ok(RhGrid { ratios })
}

/// Reverse Hölder ratios of the Poisson kernel K over surface balls around
/// the characteristic pole and the equator: finite, at least one, positive
/// kernel off the characteristic set, and stable under quadrature doubling.
pub fn reverse_holder(exp: Experiment, cfg: &Config) -> Result<ExperimentResult, Failure> {
    let mut res = ExperimentResult::new(exp.name(), cfg.params());
    let model = h1();
    let domain = ball(cfg)?;
    let radius = cfg.f64("domain.radius");
    let ps = cfg.list_f64("rh.p");
    let radii = cfg.list_f64("rh.radii");
    let centers = cfg
        .list_str("rh.centers")
        .iter()
        .map(|l| center_point(l, radius))
        .collect::<Result<Vec<_>, _>>()?;

    let resolution = cfg.usize("quad.resolution");
    let quad = build_quadrature(&domain, resolution)?;
    let samples = poisson_kernels(&model, &quad, &model.origin(), KernelMode::ClosedForm)?;

    let min_k = samples
        .iter()
        .filter(|s| !s.characteristic)
        .map(|s| s.k_kernel)
        .fold(f64::INFINITY, f64::min);
    res.metric("min_k_noncharacteristic", min_k);
    res.push(Assertion::holds(
        "k_kernel_positive",
        min_k,
        0.0,
        min_k.is_finite() && min_k > 0.0,
    ));

    let base = rh_all_cells(&samples, &quad, &ps, &centers, &radii)?;
    let mut idx = 0usize;
    for (pi, &p) in ps.iter().enumerate() {
        let mut cells = Vec::with_capacity(centers.len());
        for (label, _) in &centers {
            let mut row = Vec::with_capacity(radii.len());
            for (ri, _) in radii.iter().enumerate() {
                let ratio = base.ratios[idx];
                idx += 1;
                res.metric(format!("ratio_p{pi}_{label}_r{ri}"), ratio);
                res.push(Assertion::ge(format!("ratio_p{pi}_{label}_r{ri}"), ratio, 1.0));
                row.push(ratio);
            }
            cells.push(row);
        }
        res.plot(Plot::Matrix {
            stem: format!("reverse_holder_p{pi}"),
            rows_name: format!("center (p = {p})"),
            cols_name: "radius".into(),
            row_labels: centers.iter().map(|(l, _)| l.clone()).collect(),
            col_labels: radii.iter().map(|r| format!("{r:.4}")).collect(),
            cells,
        });
    }

    // Stability under quadrature refinement: the same ratios at twice the
    // resolution move by less than ten percent relative.
    let quad2 = build_quadrature(&domain, 2 * resolution)?;
    let samples2 = poisson_kernels(&model, &quad2, &model.origin(), KernelMode::ClosedForm)?;
    let refined = rh_all_cells(&samples2, &quad2, &ps, &centers, &radii)?;
    let max_shift = base
        .ratios
        .iter()
        .zip(&refined.ratios)
        .map(|(a, b)| (b - a).abs() / a.abs())
        .fold(0.0f64, f64::max);
    res.metric("max_relative_shift_on_refinement", max_shift);
    res.push(Assertion::le("quadrature_stability", max_shift, 0.10));
    Ok(res)
}

/// Boundary representation u(e) = ∫ u K dσ_X recovers harmonic values at
/// the pole, and the pointwise kernel bound constant is finite.
pub fn represent(exp: Experiment, cfg: &Config) -> Result<ExperimentResult, Failure> {
    let mut res = ExperimentResult::new(exp.name(), cfg.params());
    let model = h1();
    let domain = ball(cfg)?;
    let origin = model.origin();
    let quad = build_quadrature(&domain, cfg.usize("quad.resolution"))?;
    let samples = poisson_kernels(&model, &quad, &origin, KernelMode::ClosedForm)?;

    let one = FnField::new(|_: &Point| 1.0);
    let t_field = LinearField::t_plus(1, 0.25);
    let x_field = LinearField::x1_plus(1, 1.0);
    let cases: [(&str, &dyn ScalarField<f64>, f64); 3] = [
        ("one", &one, 1.0),
        ("t_plus", &t_field, 0.25),
        ("x1_plus", &x_field, 1.0),
    ];
    for (tag, field, at_pole) in cases {
        let value = represent_solution(&samples, &quad, field)?;
        res.metric(format!("represented_{tag}"), value);
        res.push(Assertion::le(
            format!("represent_{tag}"),
            (value - at_pole).abs(),
            0.02,
        ));
    }

    let bound = kernel_bound_constant(&samples, &quad, &origin)?;
    res.metric("kernel_bound_constant", bound);
    res.push(Assertion::holds(
        "kernel_bound_finite",
        bound,
        0.0,
        bound.is_finite() && bound > 0.0,
    ));
    Ok(res)
}

/// Monte Carlo harmonic measure from the group identity against the
/// closed-form Poisson kernel integrals over latitude bands, plus the
/// martingale identity for two harmonic coordinates.
pub fn harmonic_measure(exp: Experiment, cfg: &Config) -> Result<ExperimentResult, Failure> {
    let mut res = ExperimentResult::new(exp.name(), cfg.params());
    let model = h1();
    let domain = ball(cfg)?;
    let origin = model.origin();
    let bands = cfg.usize("bands.count");
    let walk_cfg = walk_config(cfg);
    let walks = cfg.u64("mc.walks");
    let partition = Partition::latitude_bands(&origin, bands)?;

    // Reference: band-by-band integrals of the closed-form kernel K dσ_X,
    // normalized to total one so that both sides are probability vectors.
    let quad = build_quadrature(&domain, cfg.usize("quad.resolution"))?;
    let samples = poisson_kernels(&model, &quad, &origin, KernelMode::ClosedForm)?;
    let mut integrals = vec![0.0f64; bands];
    for s in &samples {
        if s.characteristic {
            continue;
        }
        let node = &quad.nodes[s.node];
        integrals[partition.classify(&node.point)] += s.k_kernel * node.w * node.weight;
    }
    let raw_total: f64 = integrals.iter().sum();
    res.metric("kernel_band_total_raw", raw_total);
    res.push(Assertion::le(
        "kernel_band_total",
        (raw_total - 1.0).abs(),
        0.02,
    ));
    for v in &mut integrals {
        *v /= raw_total;
    }

    let hm = mc_measure(&domain, &origin, &partition, &walk_cfg, walks)?;
    res.metric("walks_used", hm.walks_used as f64);
    res.metric("walks_censored", hm.censored as f64);
    if hm.censored > 0 {
        res.warn(format!(
            "{} of {} walks censored at the step budget; they are excluded from the measure",
            hm.censored, walks
        ));
    }
    let mass_sum: f64 = hm.masses.iter().sum();
    res.push(Assertion::exact_zero("masses_sum_minus_one", mass_sum - 1.0));

    let mut rows_mc = Vec::with_capacity(bands);
    let mut rows_exact = Vec::with_capacity(bands);
    let mut rows_err = Vec::with_capacity(bands);
    for i in 0..bands {
        res.metric(format!("band{i}_mc"), hm.masses[i]);
        res.metric(format!("band{i}_exact"), integrals[i]);
        res.metric(format!("band{i}_stderr"), hm.stderr[i]);
        res.push(Assertion::le(
            format!("band{i}_within_3se"),
            (hm.masses[i] - integrals[i]).abs(),
            3.0 * hm.stderr[i],
        ));
        rows_mc.push(hm.masses[i]);
        rows_exact.push(integrals[i]);
        rows_err.push(hm.stderr[i]);
    }
    res.plot(Plot::Matrix {
        stem: "harmonic_measure_bands".into(),
        rows_name: "series".into(),
        cols_name: "band".into(),
        row_labels: vec!["mc_mass".into(), "kernel_integral".into(), "stderr".into()],
        col_labels: (0..bands).map(|i| format!("band{i}")).collect(),
        cells: vec![rows_mc, rows_exact, rows_err],
    });

    // Martingale identity E[u(ξ_τ)] = u(e) for harmonic coordinates.
    let t_field = LinearField::t_plus(1, 0.25);
    let x_field = LinearField::x1_plus(1, 1.0);
    let fields: [&(dyn ScalarField<f64> + Sync); 2] = [&t_field, &x_field];
    let moments = exit_moments(
        &domain,
        &origin,
        &fields,
        &walk_cfg,
        walks,
        Integrator::EulerMaruyama,
    )?;
    if moments.censored > 0 {
        res.warn(format!(
            "{} martingale walks censored at the step budget",
            moments.censored
        ));
    }
    for (i, (tag, expect)) in [("t_plus", 0.25f64), ("x1_plus", 1.0f64)].iter().enumerate() {
        res.metric(format!("martingale_{tag}_mean"), moments.means[i]);
        res.metric(format!("martingale_{tag}_stderr"), moments.stderr[i]);
        res.push(Assertion::le(
            format!("martingale_{tag}"),
            (moments.means[i] - expect).abs(),
            3.0 * moments.stderr[i],
        ));
    }
    Ok(res)
}
