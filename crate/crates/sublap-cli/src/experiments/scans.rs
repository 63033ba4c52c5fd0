//! Surface-measure scaling scans and harmonic-measure doubling.

use sublap::measures::{build_quadrature, sigma_measures, surface_ball};
use sublap::stochastic::doubling_check;
use sublap::Point;

use super::{ball, h1, log_spaced, unit_sphere_point, walk_config, Experiment};
use crate::config::Config;
use crate::output::{Assertion, ExperimentResult, Plot};
use crate::Failure;

/// Boundary points spread over the gauge sphere of radius `radius`: the
/// characteristic pole, evenly spaced latitudes down to the equator, and one
/// lower-sheet point.
fn scan_centers(radius: f64, count: usize) -> Vec<(String, Point)> {
    let count = count.max(2);
    let mut centers = Vec::with_capacity(count);
    let upper = count - 1;
    for i in 0..upper {
        let s = if upper == 1 {
            1.0
        } else {
            i as f64 / (upper - 1) as f64
        };
        let p = unit_sphere_point(s, 0.0, true);
        centers.push((
            format!("upper_s{:.2}", s),
            sublap::hgroup::dilate(&p, radius),
        ));
    }
    let lower = unit_sphere_point(0.85, 0.0, false);
    centers.push((
        "lower_s0.85".to_string(),
        sublap::hgroup::dilate(&lower, radius),
    ));
    centers
}

/// Power-law scans of σ and σ_X on surface balls at a characteristic point,
/// plus a doubling-constant scan over centers × radii.
pub fn ahlfors_scan(exp: Experiment, cfg: &Config) -> Result<ExperimentResult, Failure> {
    let mut res = ExperimentResult::new(exp.name(), cfg.params());
    let domain = ball(cfg)?;
    let radius = cfg.f64("domain.radius");
    let quad = build_quadrature(&domain, cfg.usize("quad.resolution"))?;
    let radii = log_spaced(cfg.f64("scan.rmin"), cfg.f64("scan.rmax"), cfg.usize("scan.count"))?;

    let pole = Point::from_xyt(0.0, 0.0, radius * radius / 4.0);
    let scan = sublap::measures::ahlfors_scan(&quad, &pole, &radii)?;
    res.metric("sigma_exponent", scan.sigma.fitted_exponent);
    res.metric("sigma_exponent_stderr", scan.sigma.exponent_stderr);
    res.metric("sigma_x_exponent", scan.sigma_x.fitted_exponent);
    res.metric("sigma_x_exponent_stderr", scan.sigma_x.exponent_stderr);
    let (lo, hi) = scan
        .ahlfors_ratios
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    res.metric("ahlfors_ratio_min", lo);
    res.metric("ahlfors_ratio_max", hi);
    res.push(Assertion::le(
        "sigma_exponent_dev",
        (scan.sigma.fitted_exponent - 2.0).abs(),
        0.15,
    ));
    res.push(Assertion::le(
        "sigma_x_exponent_dev",
        (scan.sigma_x.fitted_exponent - 3.0).abs(),
        0.15,
    ));

    // Doubling constant of σ_X over a centers × radii grid. Nested node
    // sets make each defined ratio ≥ 1; radii whose inner ball catches no
    // quadrature node are skipped and reported.
    let centers = scan_centers(radius, cfg.usize("scan.centers"));
    let mut sup = 0.0f64;
    let mut skipped = 0usize;
    let mut cells: Vec<Vec<f64>> = Vec::new();
    for (label, center) in &centers {
        let mut row = Vec::with_capacity(radii.len());
        for &r in &radii {
            let inner = sigma_measures(&quad, &surface_ball(&quad, center, r)?);
            let outer = sigma_measures(&quad, &surface_ball(&quad, center, 2.0 * r)?);
            if inner.is_empty || !(inner.sigma_x > 0.0) {
                skipped += 1;
                res.censored_warnings.push(format!(
                    "doubling skipped at {label}, r = {r:.4}: empty inner surface ball"
                ));
                row.push(f64::NAN);
                continue;
            }
            let ratio = outer.sigma_x / inner.sigma_x;
            sup = sup.max(ratio);
            row.push(ratio);
        }
        cells.push(row);
    }
    res.metric("doubling_sup", sup);
    res.metric("doubling_skipped", skipped as f64);
    res.push(Assertion::ge("doubling_sup_at_least_one", sup, 1.0));
    res.push(Assertion::le("doubling_sup_finite", sup, 1e3));

    res.plots.push(Plot::Scan {
        stem: "sigma".to_string(),
        x_axis: "radius".to_string(),
        y_axis: "sigma_mass".to_string(),
        rows: scan
            .sigma
            .radii
            .iter()
            .copied()
            .zip(scan.sigma.values.iter().copied())
            .collect(),
        slope: scan.sigma.fitted_exponent,
        constant: scan.sigma.fitted_constant,
    });
    res.plots.push(Plot::Scan {
        stem: "sigma_x".to_string(),
        x_axis: "radius".to_string(),
        y_axis: "sigma_x_mass".to_string(),
        rows: scan
            .sigma_x
            .radii
            .iter()
            .copied()
            .zip(scan.sigma_x.values.iter().copied())
            .collect(),
        slope: scan.sigma_x.fitted_exponent,
        constant: scan.sigma_x.fitted_constant,
    });
    res.plots.push(Plot::Matrix {
        stem: "doubling".to_string(),
        rows_name: "center".to_string(),
        cols_name: "radius".to_string(),
        row_labels: centers.iter().map(|(l, _)| l.clone()).collect(),
        col_labels: radii.iter().map(|r| format!("{r:.4}")).collect(),
        cells,
    });
    Ok(res)
}

/// Monte Carlo doubling ratios of harmonic measure at a boundary point.
pub fn doubling(exp: Experiment, cfg: &Config) -> Result<ExperimentResult, Failure> {
    let mut res = ExperimentResult::new(exp.name(), cfg.params());
    let model = h1();
    let domain = ball(cfg)?;
    let radius = cfg.f64("domain.radius");
    let x0 = Point::from_xyt(radius, 0.0, 0.0);
    let radii = cfg.list_f64("doubling.radii");
    let report = doubling_check(
        &domain,
        &model.origin(),
        &x0,
        &radii,
        cfg.u64("mc.walks"),
        &walk_config(cfg),
        cfg.f64("doubling.separation"),
    )?;

    res.metric("walks_used", report.walks_used as f64);
    res.metric("censored", report.censored as f64);
    let mut defined = 0usize;
    for (i, entry) in report.entries.iter().enumerate() {
        res.metric(format!("radius_{i}"), entry.radius);
        res.metric(format!("inner_mass_{i}"), entry.inner_mass);
        res.metric(format!("outer_mass_{i}"), entry.outer_mass);
        match (entry.ratio, entry.stderr) {
            (Some(ratio), Some(se)) => {
                defined += 1;
                res.metric(format!("ratio_{i}"), ratio);
                res.metric(format!("ratio_stderr_{i}"), se);
            }
            _ => {
                res.censored_warnings.push(format!(
                    "doubling radius {:.4} caught no inner exits; ratio skipped",
                    entry.radius
                ));
            }
        }
    }
    match report.sup_ratio() {
        Ok(sup) => {
            res.metric("doubling_sup", sup);
            res.push(Assertion::ge("doubling_sup_at_least_one", sup, 1.0));
            res.push(Assertion::le("doubling_sup_finite", sup, 1e3));
        }
        Err(e) => {
            res.censored_warnings.push(e.to_string());
            res.push(Assertion::holds(
                "doubling_sup_at_least_one",
                f64::NAN,
                1.0,
                false,
            ));
        }
    }
    let censored_fraction = report.censored_fraction();
    res.metric("censored_fraction", censored_fraction);
    if report.censored > 0 {
        res.censored_warnings.push(format!(
            "{} of {} walks exhausted the step budget",
            report.censored,
            report.censored + report.walks_used
        ));
    }
    res.push(Assertion::le("censored_fraction", censored_fraction, 1e-3));

    if defined > 0 {
        let cells = vec![
            report
                .entries
                .iter()
                .map(|e| e.ratio.unwrap_or(f64::NAN))
                .collect::<Vec<_>>(),
            report
                .entries
                .iter()
                .map(|e| e.stderr.unwrap_or(f64::NAN))
                .collect::<Vec<_>>(),
        ];
        res.plots.push(Plot::Matrix {
            stem: "doubling_ratios".to_string(),
            rows_name: "quantity".to_string(),
            cols_name: "radius".to_string(),
            row_labels: vec!["ratio".to_string(), "stderr".to_string()],
            col_labels: radii.iter().map(|r| format!("{r:.4}")).collect(),
            cells,
        });
    }
    Ok(res)
}
