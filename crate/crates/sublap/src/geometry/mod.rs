//! Gauge-metric geometry: X-balls, the volume function E, horizontal normals
//! of implicit surfaces, characteristic sets, and exterior tangent balls.
//!
//! An X-ball B(x, r) is the gauge-metric ball {q : d(x, q) < r}, equivalently
//! the superlevel set {Γ(x, ·) > 1/E(x, r)} of the fundamental solution with
//! E(x, r) = r^{Q−2}/c_Q; both characterizations are implemented and kept in
//! agreement. Horizontal normals N^X = ⟨ν, X_j⟩ e_j, their length W, and the
//! characteristic set {W = 0} quantify the degeneracy of surface measure that
//! drives everything downstream (Ahlfors regularity, Poisson kernels, the
//! paraboloid counterexample).

pub mod domain;
pub mod marching;
pub mod tangency;

use crate::error::{Error, Result};
use crate::hgroup::{contract_with_frame, fundamental_solution, gauge_dist, HVector};
use crate::{Model, Point};

pub use domain::{
    cylinder_patch, euclidean_ball, gauge_ball, halfspace, jerison_paraboloid, Atlas, BBox,
    ImplicitDomain,
};
pub use marching::{extract_surface, Triangle};
pub use tangency::{outer_xball_tangent, TangencyReport};

/// A gauge-metric ball B(center, radius).
#[derive(Debug, Clone, PartialEq)]
pub struct XBall {
    /// Center point.
    pub center: Point,
    /// Gauge radius (positive).
    pub radius: f64,
}

impl XBall {
    /// Builds a ball, validating radius > 0.
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "X-ball radius must be positive, got {radius}"
            )));
        }
        Ok(Self { center, radius })
    }
}

/// Volume function E(x, r) = r^{Q−2}/c_Q, the reciprocal of the value Γ(x, ·)
/// takes on the sphere ∂B(x, r). Strictly increasing in r; for H¹,
/// E = r²/c₄. The base point only fixes dimensions — E is translation
/// invariant, as Γ depends on x⁻¹ ∘ q alone.
pub fn volume_e(model: &Model, x: &Point, r: f64) -> Result<f64> {
    if x.n() != model.n() {
        return Err(Error::DimensionMismatch(format!(
            "point in H^{}, model is H^{}",
            x.n(),
            model.n()
        )));
    }
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "E(x, r) needs r > 0, got {r}"
        )));
    }
    Ok(r.powi(model.q() as i32 - 2) / model.c_q())
}

/// Inverse of the volume function: F(x, s) = (c_Q s)^{1/(Q−2)}, so that
/// F(x, E(x, r)) = r for all r > 0.
pub fn radius_from_e(model: &Model, x: &Point, s: f64) -> Result<f64> {
    if x.n() != model.n() {
        return Err(Error::DimensionMismatch(format!(
            "point in H^{}, model is H^{}",
            x.n(),
            model.n()
        )));
    }
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "F(x, s) needs s > 0, got {s}"
        )));
    }
    Ok((model.c_q() * s).powf(1.0 / (model.q() as f64 - 2.0)))
}

/// Membership test via the fundamental solution: q ∈ B(center, radius) iff
/// Γ(center, q) > 1/E(center, radius). The pole q = center is inside. Kept in
/// exact agreement with the metric criterion d(center, q) < radius (the two
/// are equivalent because Γ is a strictly decreasing power of the distance).
pub fn xball_contains(model: &Model, ball: &XBall, q: &Point) -> Result<bool> {
    let d = gauge_dist(&ball.center, q)?;
    if d == 0.0 {
        return Ok(true);
    }
    let gamma = fundamental_solution(model, &crate::hgroup::group_mul(
        &crate::hgroup::group_inv(&ball.center),
        q,
    )?)?;
    let level = 1.0 / volume_e(model, &ball.center, ball.radius)?;
    let by_gamma = gamma > level;
    debug_assert_eq!(
        by_gamma,
        d < ball.radius,
        "Γ-level and metric membership disagree at d = {d}, r = {}",
        ball.radius
    );
    Ok(by_gamma)
}

/// Horizontal normal data of ∂D at a boundary point.
#[derive(Debug, Clone)]
pub struct HorizontalNormal {
    /// Projection N^X of the unit Euclidean normal onto the horizontal frame,
    /// components ⟨ν, X_j⟩.
    pub n_x: HVector<f64>,
    /// Angular weight W = |N^X| ≥ 0 (pointwise ≤ √(1 + |z|²/4), since the
    /// frame fields are not Euclidean-unit); W = 0 marks a characteristic
    /// point.
    pub w: f64,
    /// Unit horizontal normal ν^X = N^X/W, absent at characteristic points.
    pub nu_x: Option<HVector<f64>>,
}

/// Threshold below which W counts as characteristic for normalization.
const W_CHARACTERISTIC_TOL: f64 = 1e-10;

/// Computes ν = ∇ρ/|∇ρ| and its horizontal contraction at a surface point
/// `y` (expects |ρ(y)| ≲ 1e−8; rejects clearly off-surface points). Errors on
/// a vanishing Euclidean gradient.
pub fn horizontal_normal(domain: &ImplicitDomain, y: &Point) -> Result<HorizontalNormal> {
    let r = domain.rho(y);
    if r.abs() > 1e-6 {
        return Err(Error::Domain(format!(
            "horizontal_normal needs a boundary point, |ρ| = {:.3e}",
            r.abs()
        )));
    }
    let g = domain.rho_grad(y);
    let gn: f64 = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(gn > 0.0) {
        return Err(Error::Domain(
            "degenerate surface point: ∇ρ = 0".into(),
        ));
    }
    let nu: Vec<f64> = g.iter().map(|v| v / gn).collect();
    let n_x = contract_with_frame(y, &nu)?;
    let w = n_x.norm();
    let nu_x = (w > W_CHARACTERISTIC_TOL)
        .then(|| HVector(n_x.0.iter().map(|v| v / w).collect()));
    Ok(HorizontalNormal { n_x, w, nu_x })
}

/// Result of a characteristic-set search on ∂D.
#[derive(Debug, Clone)]
pub struct CharacteristicReport {
    /// Raw surface samples whose angular weight fell below the search
    /// threshold.
    pub nodes: Vec<Point>,
    /// Deduplicated refined characteristic points, each satisfying
    /// |ρ| < 1e−10 and W < 1e−8.
    pub refined: Vec<Point>,
    /// The W-threshold used to collect candidates.
    pub tol: f64,
    /// Candidates whose local refinement failed to reach the certificates
    /// (reported, not fatal).
    pub unconverged: Vec<Point>,
}

/// Samples ∂D as bare points: atlas midpoint grid when the shape has an
/// atlas, projected triangle centroids from level-set extraction otherwise.
/// `resolution` is the grid count per parameter direction (atlas) or per box
/// edge (extraction).
pub fn surface_samples(domain: &ImplicitDomain, resolution: usize) -> Result<Vec<Point>> {
    if resolution < 2 {
        return Err(Error::InvalidParameter(format!(
            "surface sampling needs resolution ≥ 2, got {resolution}"
        )));
    }
    match domain.atlas() {
        Some(atlas) => {
            let ((a0, a1), (b0, b1)) = atlas.param_rect();
            let da = (a1 - a0) / resolution as f64;
            let db = (b1 - b0) / resolution as f64;
            let mut pts = Vec::with_capacity(resolution * resolution);
            for i in 0..resolution {
                let a = a0 + (i as f64 + 0.5) * da;
                for j in 0..resolution {
                    let b = b0 + (j as f64 + 0.5) * db;
                    pts.push(atlas.point(a, b));
                }
            }
            Ok(pts)
        }
        None => {
            let tris = marching::extract_surface(domain, resolution)?;
            let scale = {
                let e = domain.bbox().extent();
                e[0].max(e[1]).max(e[2])
            };
            tris.iter()
                .map(|t| {
                    let c = t.centroid();
                    domain.project_to_surface(
                        &Point::from_xyt(c[0], c[1], c[2]),
                        1e-12 * scale.max(1.0),
                        60,
                    )
                })
                .collect()
        }
    }
}

/// Builds an orthonormal pair spanning the plane orthogonal to `g` (ambient
/// Euclidean tangent plane of the surface).
fn tangent_basis(g: &[f64]) -> ([f64; 3], [f64; 3]) {
    let gn: f64 = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    let n = [g[0] / gn, g[1] / gn, g[2] / gn];
    // Pick the seed axis least aligned with n.
    let seed = if n[0].abs() <= n[1].abs() && n[0].abs() <= n[2].abs() {
        [1.0, 0.0, 0.0]
    } else if n[1].abs() <= n[2].abs() {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let dot = seed[0] * n[0] + seed[1] * n[1] + seed[2] * n[2];
    let mut t1 = [
        seed[0] - dot * n[0],
        seed[1] - dot * n[1],
        seed[2] - dot * n[2],
    ];
    let t1n = (t1[0] * t1[0] + t1[1] * t1[1] + t1[2] * t1[2]).sqrt();
    t1 = [t1[0] / t1n, t1[1] / t1n, t1[2] / t1n];
    let t2 = [
        n[1] * t1[2] - n[2] * t1[1],
        n[2] * t1[0] - n[0] * t1[2],
        n[0] * t1[1] - n[1] * t1[0],
    ];
    (t1, t2)
}

/// Angular weight W at a surface point, +∞ when the normal data fails (used
/// as a minimization objective only).
fn w_objective(domain: &ImplicitDomain, p: &Point) -> f64 {
    horizontal_normal(domain, p).map(|h| h.w).unwrap_or(f64::INFINITY)
}

/// Local minimization of W over the surface by tangent-plane pattern search:
/// probe ± steps along an orthonormal tangent pair, Newton-project each probe
/// back to {ρ = 0}, accept strict decreases, halve the step otherwise.
/// Derivative-free on purpose — ∇W involves second derivatives of ρ and blows
/// up in no useful direction near the minimum.
fn refine_characteristic(
    domain: &ImplicitDomain,
    start: &Point,
    scale: f64,
) -> Result<Point> {
    let proj_tol = 1e-13 * scale.max(1.0);
    let mut p = domain.project_to_surface(start, proj_tol, 60)?;
    let mut w = w_objective(domain, &p);
    let mut step = 0.05 * scale;
    let min_step = 1e-12 * scale.max(1.0);
    let mut evals = 0usize;
    while step > min_step && evals < 20_000 {
        let g = domain.rho_grad(&p);
        let (t1, t2) = tangent_basis(&g);
        let mut improved = false;
        for dir in [t1, t2, [-t1[0], -t1[1], -t1[2]], [-t2[0], -t2[1], -t2[2]]] {
            let trial = Point::from_xyt(
                p.x[0] + step * dir[0],
                p.y[0] + step * dir[1],
                p.t + step * dir[2],
            );
            let Ok(projected) = domain.project_to_surface(&trial, proj_tol, 60) else {
                continue;
            };
            let tw = w_objective(domain, &projected);
            evals += 1;
            if tw < w {
                p = projected;
                w = tw;
                improved = true;
                break;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(p)
}

/// Locates the characteristic set {y ∈ ∂D : W(y) = 0}. Surface samples with
/// W < `tol` seed a derivative-free local refinement; refined points are
/// certified (|ρ| < 1e−10, W < 1e−8) and deduplicated by gauge-distance
/// clustering. Refinement failures are reported per candidate, not fatal.
pub fn characteristic_set(
    domain: &ImplicitDomain,
    resolution: usize,
    tol: f64,
) -> Result<CharacteristicReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "characteristic threshold must be positive, got {tol}"
        )));
    }
    let samples = surface_samples(domain, resolution)?;
    let nodes: Vec<Point> = samples
        .into_iter()
        .filter(|p| w_objective(domain, p) < tol)
        .collect();
    let scale = {
        let e = domain.bbox().extent();
        (e[0].max(e[1]).max(e[2])) / 2.0
    };

    let mut refined: Vec<Point> = Vec::new();
    let mut unconverged: Vec<Point> = Vec::new();
    let cluster_radius = 0.05 * scale.max(1e-6);
    for cand in &nodes {
        // Skip candidates already inside an accepted cluster.
        if refined
            .iter()
            .any(|r| gauge_dist(r, cand).map(|d| d < cluster_radius).unwrap_or(false))
        {
            continue;
        }
        let Ok(p) = refine_characteristic(domain, cand, scale) else {
            unconverged.push(cand.clone());
            continue;
        };
        let certified = domain.rho(&p).abs() < 1e-10 && w_objective(domain, &p) < 1e-8;
        if !certified {
            unconverged.push(cand.clone());
            continue;
        }
        match refined
            .iter_mut()
            .find(|r| gauge_dist(r, &p).map(|d| d < cluster_radius).unwrap_or(false))
        {
            Some(existing) => {
                // Keep the better representative of the cluster.
                if w_objective(domain, &p) < w_objective(domain, existing) {
                    *existing = p;
                }
            }
            None => refined.push(p),
        }
    }
    Ok(CharacteristicReport {
        nodes,
        refined,
        tol,
        unconverged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hgroup::group_mul;

    fn model() -> Model {
        Model::with_constant(1, 1.0 / (2.0 * std::f64::consts::PI)).unwrap()
    }

    #[test]
    fn volume_function_and_inverse_round_trip() {
        let m = model();
        let e = Point::origin(1);
        // H¹: E(x, r) = r²/c₄.
        let r = 0.73;
        let s = volume_e(&m, &e, r).unwrap();
        assert!((s - r * r / m.c_q()).abs() < 1e-14);
        let back = radius_from_e(&m, &e, s).unwrap();
        assert!((back - r).abs() < 1e-14, "F(E(r)) = {back} ≠ {r}");
        // Strictly increasing.
        assert!(volume_e(&m, &e, 0.5).unwrap() < volume_e(&m, &e, 0.50001).unwrap());
        assert!(volume_e(&m, &e, -1.0).is_err());
        assert!(radius_from_e(&m, &e, 0.0).is_err());
    }

    #[test]
    fn xball_membership_matches_metric_ball() {
        let m = model();
        let center = Point::from_xyt(0.3, -0.2, 0.1);
        let ball = XBall::new(center.clone(), 0.8).unwrap();
        let probes = [
            Point::from_xyt(0.3, -0.2, 0.1),   // the pole itself
            Point::from_xyt(0.5, -0.2, 0.1),   // nearby
            Point::from_xyt(1.4, 0.4, 0.0),    // far
            Point::from_xyt(0.3, -0.2, 0.26),  // vertical offset: d = 2√0.16 = 0.8 boundary-ish
        ];
        for q in &probes {
            let inside = xball_contains(&m, &ball, q).unwrap();
            let d = gauge_dist(&ball.center, q).unwrap();
            assert_eq!(inside, d < ball.radius, "at d = {d}");
        }
    }

    #[test]
    fn xball_rejects_nonpositive_radius() {
        assert!(XBall::new(Point::origin(1), 0.0).is_err());
        assert!(XBall::new(Point::origin(1), -0.3).is_err());
    }

    #[test]
    fn horizontal_normal_on_the_unit_gauge_sphere() {
        let m = model();
        let d = gauge_ball(&m, &Point::origin(1), 1.0).unwrap();
        // Characteristic pole P⁺ = (0, 0, 1/4): W = 0, no unit normal.
        let pole = Point::from_xyt(0.0, 0.0, 0.25);
        let h = horizontal_normal(&d, &pole).unwrap();
        assert!(h.w < 1e-12, "W at the pole = {}", h.w);
        assert!(h.nu_x.is_none());
        // Equator point (cos θ, sin θ, 0): N^X = (cos θ, sin θ), W = 1.
        let th = 0.9f64;
        let eq = Point::from_xyt(th.cos(), th.sin(), 0.0);
        let h = horizontal_normal(&d, &eq).unwrap();
        assert!((h.w - 1.0).abs() < 1e-12, "equator W = {}", h.w);
        assert!((h.n_x.0[0] - th.cos()).abs() < 1e-12);
        assert!((h.n_x.0[1] - th.sin()).abs() < 1e-12);
        assert!(h.nu_x.is_some());
    }

    #[test]
    fn horizontal_normal_on_the_halfspace_plane() {
        let m = model();
        let d = halfspace(&m, 2.0).unwrap();
        // ν = e_t gives N^X = (−y/2, x/2), so W = |z|/2.
        let y = Point::from_xyt(0.6, 0.8, 0.0);
        let h = horizontal_normal(&d, &y).unwrap();
        assert!((h.w - 0.5).abs() < 1e-12, "plane W = {}", h.w);
        assert!((h.n_x.0[0] + 0.4).abs() < 1e-12);
        assert!((h.n_x.0[1] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn horizontal_normal_rejects_interior_points() {
        let m = model();
        let d = gauge_ball(&m, &Point::origin(1), 1.0).unwrap();
        assert!(horizontal_normal(&d, &Point::from_xyt(0.2, 0.0, 0.0)).is_err());
    }

    #[test]
    fn characteristic_set_of_gauge_ball_is_two_poles() {
        let m = model();
        let d = gauge_ball(&m, &Point::origin(1), 1.0).unwrap();
        let report = characteristic_set(&d, 160, 1e-2).unwrap();
        assert_eq!(
            report.refined.len(),
            2,
            "expected exactly the two poles, got {:?}",
            report.refined
        );
        let mut ts: Vec<f64> = report.refined.iter().map(|p| p.t).collect();
        ts.sort_by(f64::total_cmp);
        assert!((ts[0] + 0.25).abs() < 1e-6, "south pole t = {}", ts[0]);
        assert!((ts[1] - 0.25).abs() < 1e-6, "north pole t = {}", ts[1]);
        for p in &report.refined {
            assert!(p.z_norm_sq().sqrt() < 1e-6, "poles sit on the t-axis");
            assert!(d.rho(p).abs() < 1e-10);
            assert!(w_objective(&d, p) < 1e-8);
        }
        assert!(report.unconverged.is_empty(), "all candidates refine");
    }

    #[test]
    fn characteristic_set_translates_with_the_group() {
        let m = model();
        let g = Point::from_xyt(1.0, 0.0, 0.0);
        let d = gauge_ball(&m, &g, 1.0).unwrap();
        let report = characteristic_set(&d, 160, 1e-2).unwrap();
        assert_eq!(report.refined.len(), 2);
        // The poles translate: g ∘ (0, 0, ±1/4) = (1, 0, ±1/4).
        let mut seen_signs = [false, false];
        for p in &report.refined {
            let expect = group_mul(&g, &Point::from_xyt(0.0, 0.0, 0.25 * p.t.signum())).unwrap();
            assert!(
                (p.x[0] - expect.x[0]).abs() < 1e-6
                    && (p.y[0] - expect.y[0]).abs() < 1e-6
                    && (p.t - expect.t).abs() < 1e-6,
                "translated pole {p:?} vs expected {expect:?}"
            );
            seen_signs[if p.t > 0.0 { 0 } else { 1 }] = true;
        }
        assert!(seen_signs[0] && seen_signs[1], "both poles present");
    }

    #[test]
    fn cylinder_has_empty_characteristic_set() {
        let m = model();
        let d = cylinder_patch(&m, 1.0, 1.0).unwrap();
        let report = characteristic_set(&d, 80, 1e-6).unwrap();
        assert!(report.nodes.is_empty(), "W ≡ 1 on the cylinder");
        assert!(report.refined.is_empty());
    }

    #[test]
    fn plane_characteristic_locus_is_the_center_line() {
        let m = model();
        let d = halfspace(&m, 1.5).unwrap();
        let report = characteristic_set(&d, 120, 1e-2).unwrap();
        assert_eq!(report.refined.len(), 1, "single cluster at z = 0");
        let p = &report.refined[0];
        assert!(
            p.z_norm_sq().sqrt() < 1e-6,
            "characteristic point must have z = 0, got {p:?}"
        );
        assert!(p.t.abs() < 1e-10);
    }

    #[test]
    fn surface_samples_cover_extraction_domains() {
        let m = model();
        let d = euclidean_ball(&m, 1.0).unwrap();
        let pts = surface_samples(&d, 24).unwrap();
        assert!(pts.len() > 500, "got {} samples", pts.len());
        for p in pts.iter().take(100) {
            assert!(d.rho(p).abs() < 1e-10);
        }
    }
}
