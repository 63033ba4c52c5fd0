//! Surface measure σ, horizontal perimeter σ_X = ∫ W dσ, gauge-ball volumes,
//! and Ahlfors-regularity scans.
//!
//! A [`SurfaceQuadrature`] discretizes ∂D as weighted nodes carrying the
//! Euclidean unit normal ν and the angular weight W = |⟨ν, X_j⟩ e_j|. Surface
//! balls Δ(x₀, r) = ∂D ∩ B(x₀, r) are index sets into a quadrature;
//! [`ahlfors_scan`] fits the scaling exponents of σ(Δ) and σ_X(Δ) in r and
//! reports the 1-Ahlfors ratio σ_X(Δ)·r/|B(x₀, r)|. At noncharacteristic
//! points both measures scale like r^{Q−1}; at a characteristic pole of the
//! gauge sphere σ drops to r² and W ∼ r restores σ_X ∼ r³ — the balanced
//! degeneracy quantified by [`balanced_degeneracy_check`].

use crate::error::{Error, Result};
use crate::fit::fit_power_law;
use crate::geometry::{horizontal_normal, marching, Atlas, ImplicitDomain};
use crate::hgroup::gauge_dist;
use crate::{Model, Point};

/// One weighted node of a surface quadrature.
#[derive(Debug, Clone)]
pub struct SurfaceNode {
    /// Node position on ∂D (|ρ| < 1e−8).
    pub point: Point,
    /// Quadrature weight (a patch of surface area).
    pub weight: f64,
    /// Euclidean unit normal ∇ρ/|∇ρ| at the node, layout (x, y, t).
    pub nu: Vec<f64>,
    /// Angular weight W ≥ 0 (bounded by √(1 + |z|²/4) pointwise).
    pub w: f64,
    /// Atlas parameters (a, b) when the node came from a parametric chart.
    pub param: Option<(f64, f64)>,
}

/// A quadrature of ∂D: nodes with weights summing to the total surface area.
#[derive(Debug, Clone)]
pub struct SurfaceQuadrature {
    /// Weighted surface nodes.
    pub nodes: Vec<SurfaceNode>,
    /// Grid resolution the quadrature was built at (cells per parameter
    /// direction for atlas charts, cells per box edge for extraction).
    pub resolution: usize,
    /// Σ weights = σ(∂D).
    pub total_area: f64,
    domain: ImplicitDomain,
}

impl SurfaceQuadrature {
    /// The domain this quadrature discretizes.
    pub fn domain(&self) -> &ImplicitDomain {
        &self.domain
    }

    /// Total horizontal perimeter σ_X(∂D) = Σ W·weight.
    pub fn total_horizontal_perimeter(&self) -> f64 {
        self.nodes.iter().map(|n| n.w * n.weight).sum()
    }
}

/// A surface ball Δ(center, radius) = ∂D ∩ B(center, radius) as node indices
/// into a fixed quadrature.
#[derive(Debug, Clone)]
pub struct SurfaceBall {
    /// Ball center (need not lie on the surface).
    pub center: Point,
    /// Gauge radius.
    pub radius: f64,
    /// Indices of quadrature nodes at gauge distance < radius.
    pub node_indices: Vec<usize>,
}

/// σ, σ_X and max W over one surface ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallMeasures {
    /// Surface measure σ(Δ).
    pub sigma: f64,
    /// Horizontal perimeter σ_X(Δ) = ∫_Δ W dσ.
    pub sigma_x: f64,
    /// Largest angular weight over the ball.
    pub max_w: f64,
    /// True when the ball caught no quadrature nodes (all measures zero).
    pub is_empty: bool,
}

/// Power-law scan of a measure over a radius ladder.
#[derive(Debug, Clone)]
pub struct ScanReport {
    /// Radii scanned (ascending).
    pub radii: Vec<f64>,
    /// Measured values, one per radius.
    pub values: Vec<f64>,
    /// Fitted exponent α of value ≈ C·r^α.
    pub fitted_exponent: f64,
    /// Standard error of the fitted exponent.
    pub exponent_stderr: f64,
    /// Fitted constant C.
    pub fitted_constant: f64,
}

impl ScanReport {
    fn from_samples(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let fit = fit_power_law(&radii, &values)?;
        Ok(Self {
            radii,
            values,
            fitted_exponent: fit.slope,
            exponent_stderr: fit.slope_stderr,
            fitted_constant: fit.intercept.exp(),
        })
    }
}

/// Both Ahlfors scans at one base point, plus the 1-Ahlfors ratios
/// σ_X(Δ)·r/|B(x₀, r)| (one per radius).
#[derive(Debug, Clone)]
pub struct AhlforsScan {
    /// Scan of the surface measure σ(Δ(x₀, r)).
    pub sigma: ScanReport,
    /// Scan of the horizontal perimeter σ_X(Δ(x₀, r)).
    pub sigma_x: ScanReport,
    /// σ_X(Δ(x₀, r))·r / |B(x₀, r)| per radius; bounded above and below for
    /// 1-Ahlfors-regular boundaries.
    pub ahlfors_ratios: Vec<f64>,
}

fn node_from_point(domain: &ImplicitDomain, point: Point, weight: f64, param: Option<(f64, f64)>) -> Result<SurfaceNode> {
    let h = horizontal_normal(domain, &point)?;
    let g = domain.rho_grad(&point);
    let gn: f64 = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(SurfaceNode {
        point,
        weight,
        nu: g.iter().map(|v| v / gn).collect(),
        w: h.w,
        param,
    })
}

/// Midpoint quadrature of an atlas chart over an explicit parameter window.
/// The second parameter may exceed the chart's nominal range when it is
/// periodic (angle recentring); the first is clipped to the chart.
fn atlas_window_quadrature(
    domain: &ImplicitDomain,
    atlas: &Atlas,
    (a_lo, a_hi): (f64, f64),
    (b_lo, b_hi): (f64, f64),
    na: usize,
    nb: usize,
) -> Result<Vec<SurfaceNode>> {
    let ((ra0, ra1), _) = atlas.param_rect();
    let a_lo = a_lo.max(ra0);
    let a_hi = a_hi.min(ra1);
    if !(a_hi > a_lo) || !(b_hi > b_lo) {
        return Err(Error::Quadrature(format!(
            "empty atlas window [{a_lo}, {a_hi}] × [{b_lo}, {b_hi}]"
        )));
    }
    let da = (a_hi - a_lo) / na as f64;
    let db = (b_hi - b_lo) / nb as f64;
    let mut nodes = Vec::with_capacity(na * nb);
    for i in 0..na {
        let a = a_lo + (i as f64 + 0.5) * da;
        for j in 0..nb {
            let b = b_lo + (j as f64 + 0.5) * db;
            let point = atlas.point(a, b);
            let weight = atlas.element(a, b) * da * db;
            if weight <= 0.0 {
                continue;
            }
            nodes.push(node_from_point(domain, point, weight, Some((a, b)))?);
        }
    }
    Ok(nodes)
}

/// Builds a surface quadrature of ∂D at the given resolution: a midpoint
/// rule over the analytic atlas when the registry shape has one, otherwise
/// triangulated level-set extraction with Newton-projected centroids.
pub fn build_quadrature(domain: &ImplicitDomain, resolution: usize) -> Result<SurfaceQuadrature> {
    if resolution < 8 {
        return Err(Error::InvalidParameter(format!(
            "surface quadrature needs resolution ≥ 8, got {resolution}"
        )));
    }
    let nodes = match domain.atlas() {
        Some(atlas) => {
            let (ra, rb) = atlas.param_rect();
            atlas_window_quadrature(domain, atlas, ra, rb, resolution, resolution)?
        }
        None => {
            let tris = marching::extract_surface(domain, resolution)?;
            let scale = {
                let e = domain.bbox().extent();
                e[0].max(e[1]).max(e[2])
            };
            let mut nodes = Vec::with_capacity(tris.len());
            for t in &tris {
                let c = t.centroid();
                let projected = domain.project_to_surface(
                    &Point::from_xyt(c[0], c[1], c[2]),
                    1e-12 * scale.max(1.0),
                    60,
                )?;
                nodes.push(node_from_point(domain, projected, t.area(), None)?);
            }
            nodes
        }
    };
    let total_area = nodes.iter().map(|n| n.weight).sum();
    Ok(SurfaceQuadrature {
        nodes,
        resolution,
        total_area,
        domain: domain.clone(),
    })
}

/// Collects the quadrature nodes inside the gauge ball B(center, radius).
pub fn surface_ball(quad: &SurfaceQuadrature, center: &Point, radius: f64) -> Result<SurfaceBall> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "surface ball needs radius > 0, got {radius}"
        )));
    }
    let mut node_indices = Vec::new();
    for (i, n) in quad.nodes.iter().enumerate() {
        if gauge_dist(center, &n.point)? < radius {
            node_indices.push(i);
        }
    }
    Ok(SurfaceBall {
        center: center.clone(),
        radius,
        node_indices,
    })
}

/// σ, σ_X and max W over a surface ball. An empty ball reports zeros with
/// the `is_empty` flag set.
pub fn sigma_measures(quad: &SurfaceQuadrature, ball: &SurfaceBall) -> BallMeasures {
    if ball.node_indices.is_empty() {
        return BallMeasures {
            sigma: 0.0,
            sigma_x: 0.0,
            max_w: 0.0,
            is_empty: true,
        };
    }
    let mut sigma = 0.0;
    let mut sigma_x = 0.0;
    let mut max_w = 0.0f64;
    for &i in &ball.node_indices {
        let n = &quad.nodes[i];
        sigma += n.weight;
        sigma_x += n.w * n.weight;
        max_w = max_w.max(n.w);
    }
    BallMeasures {
        sigma,
        sigma_x,
        max_w,
        is_empty: false,
    }
}

/// Parameter resolution (per direction) of the per-radius refined patches
/// used by the scans.
const SCAN_PATCH_RES: usize = 200;
/// Minimum acceptable node count inside the smallest scanned ball.
const SCAN_MIN_NODES: usize = 200;

/// Builds a refined quadrature patch covering B(x₀, 1.35r) ∩ ∂D, by growing
/// a parameter window around the base-quadrature nodes the ball catches.
/// Periodic windows are recentred around the node nearest to x₀ so the
/// wrap-around seam never splits a patch.
fn refined_patch(
    quad: &SurfaceQuadrature,
    x0: &Point,
    r: f64,
) -> Result<Option<SurfaceQuadrature>> {
    let Some(atlas) = quad.domain.atlas() else {
        return Ok(None);
    };
    let catch = 1.35 * r;
    let mut params: Vec<(f64, f64)> = Vec::new();
    let mut nearest: Option<(f64, (f64, f64))> = None;
    for n in &quad.nodes {
        let Some(p) = n.param else {
            return Ok(None);
        };
        let d = gauge_dist(x0, &n.point)?;
        if d < catch {
            params.push(p);
        }
        if nearest.map(|(dn, _)| d < dn).unwrap_or(true) {
            nearest = Some((d, p));
        }
    }
    let (_, anchor) = nearest.ok_or_else(|| {
        Error::Quadrature("refined patch needs a nonempty base quadrature".into())
    })?;
    if params.is_empty() {
        params.push(anchor);
    }

    let ((ra0, ra1), (rb0, rb1)) = atlas.param_rect();
    let base_da = (ra1 - ra0) / quad.resolution as f64;
    let base_db = (rb1 - rb0) / quad.resolution as f64;
    let pad_a = 1.5 * base_da;
    let pad_b = 1.5 * base_db;

    let a_lo = params.iter().map(|p| p.0).fold(f64::INFINITY, f64::min) - pad_a;
    let a_hi = params.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max) + pad_a;

    let (b_lo, b_hi) = if atlas.second_param_periodic() {
        let period = rb1 - rb0;
        let rel = |b: f64| -> f64 {
            let d = (b - anchor.1) % period;
            let d = if d < -period / 2.0 { d + period } else { d };
            if d >= period / 2.0 {
                d - period
            } else {
                d
            }
        };
        let lo = params.iter().map(|p| rel(p.1)).fold(f64::INFINITY, f64::min);
        let hi = params
            .iter()
            .map(|p| rel(p.1))
            .fold(f64::NEG_INFINITY, f64::max);
        if hi - lo > 0.85 * period {
            (rb0, rb1)
        } else {
            (anchor.1 + lo - pad_b, anchor.1 + hi + pad_b)
        }
    } else {
        (
            (params.iter().map(|p| p.1).fold(f64::INFINITY, f64::min) - pad_b).max(rb0),
            (params.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max) + pad_b).min(rb1),
        )
    };

    let nodes = atlas_window_quadrature(
        &quad.domain,
        atlas,
        (a_lo, a_hi),
        (b_lo, b_hi),
        SCAN_PATCH_RES,
        SCAN_PATCH_RES,
    )?;
    let total_area = nodes.iter().map(|n| n.weight).sum();
    Ok(Some(SurfaceQuadrature {
        nodes,
        resolution: SCAN_PATCH_RES,
        total_area,
        domain: quad.domain.clone(),
    }))
}

/// Measures one surface ball on a per-radius refined patch (falling back to
/// the base quadrature for chartless surfaces) and enforces the minimum
/// node count.
fn scanned_ball_measures(
    quad: &SurfaceQuadrature,
    x0: &Point,
    r: f64,
) -> Result<BallMeasures> {
    let patch = refined_patch(quad, x0, r)?;
    let local = patch.as_ref().unwrap_or(quad);
    let ball = surface_ball(local, x0, r)?;
    if ball.node_indices.len() < SCAN_MIN_NODES {
        return Err(Error::Quadrature(format!(
            "surface ball at r = {r} caught only {} nodes (need ≥ {SCAN_MIN_NODES}); \
             raise the quadrature resolution",
            ball.node_indices.len()
        )));
    }
    Ok(sigma_measures(local, &ball))
}

/// Scans σ(Δ(x₀, r)) and σ_X(Δ(x₀, r)) over a radius ladder (at least three
/// radii; five or more log-spaced radii give stable exponents), fitting
/// power laws to both and reporting the 1-Ahlfors ratios
/// σ_X(Δ)·r/|B(x₀, r)|. Every ball is measured on a per-radius refined
/// patch with at least 200 nodes.
pub fn ahlfors_scan(
    quad: &SurfaceQuadrature,
    x0: &Point,
    radii: &[f64],
) -> Result<AhlforsScan> {
    if radii.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "ahlfors_scan needs at least 3 radii, got {}",
            radii.len()
        )));
    }
    if radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::InvalidParameter(
            "ahlfors_scan radii must be positive".into(),
        ));
    }
    let mut radii: Vec<f64> = radii.to_vec();
    radii.sort_by(f64::total_cmp);
    let model = quad.domain.model().clone();
    let unit_volume = ball_volume(&model, &model.origin(), 1.0, 256)?;

    let mut sigmas = Vec::with_capacity(radii.len());
    let mut sigma_xs = Vec::with_capacity(radii.len());
    let mut ratios = Vec::with_capacity(radii.len());
    for &r in &radii {
        let m = scanned_ball_measures(quad, x0, r)?;
        if m.is_empty || !(m.sigma > 0.0) {
            return Err(Error::Quadrature(format!(
                "empty surface ball at r = {r}; scan radii too small for the surface"
            )));
        }
        sigmas.push(m.sigma);
        sigma_xs.push(m.sigma_x);
        // |B(x₀, r)| = |B(e, 1)|·r^Q by left-invariance and dilation
        // homogeneity (the honest integration is ball_volume's job).
        let vol = unit_volume * r.powi(model.q() as i32);
        ratios.push(m.sigma_x * r / vol);
    }
    Ok(AhlforsScan {
        sigma: ScanReport::from_samples(radii.clone(), sigmas)?,
        sigma_x: ScanReport::from_samples(radii.clone(), sigma_xs)?,
        ahlfors_ratios: ratios,
    })
}

/// Lebesgue volume of the gauge ball B(x, r) by a midpoint rule in the
/// horizontal plane with exact vertical fibers: for fixed horizontal offset
/// z′ = q_z − x_z the defining inequality N⁴(x⁻¹∘q) < r⁴ reads
/// |z′|⁴ + 16 t′² < r⁴ with t′ an affine (length-preserving) function of
/// q_t, so the fiber length is √(r⁴ − |z′|⁴)/2 exactly. The result is
/// manifestly independent of x, matching left-invariance of Lebesgue
/// measure; homogeneity gives |B(x, r)| = |B(e, 1)|·r^Q.
pub fn ball_volume(model: &Model, x: &Point, r: f64, resolution: usize) -> Result<f64> {
    if x.n() != model.n() {
        return Err(Error::DimensionMismatch(format!(
            "point in H^{}, model is H^{}",
            x.n(),
            model.n()
        )));
    }
    if model.n() != 1 {
        return Err(Error::Domain(
            "ball_volume grid driver is implemented for H¹".into(),
        ));
    }
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "ball volume needs r > 0, got {r}"
        )));
    }
    if resolution < 16 {
        return Err(Error::InvalidParameter(format!(
            "ball volume needs resolution ≥ 16, got {resolution}"
        )));
    }
    let r4 = r.powi(4);
    let m = resolution;
    let h = 2.0 * r / m as f64;
    let mut vol = 0.0f64;
    for i in 0..m {
        let zx = -r + (i as f64 + 0.5) * h;
        for j in 0..m {
            let zy = -r + (j as f64 + 0.5) * h;
            let z4 = (zx * zx + zy * zy).powi(2);
            if z4 < r4 {
                vol += (r4 - z4).sqrt() / 2.0 * h * h;
            }
        }
    }
    Ok(vol)
}

/// Scans the balanced product max_Δ W · σ(Δ) · r / |B(x₀, r)| over a radius
/// ladder. Near a characteristic pole max W ∼ r collapses while
/// σ(Δ)·r/|B| ∼ 1/r blows up; their product stays pinned — the quantitative
/// balance between measure degeneracy and kernel concentration.
pub fn balanced_degeneracy_check(
    quad: &SurfaceQuadrature,
    x0: &Point,
    radii: &[f64],
) -> Result<ScanReport> {
    if radii.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "balanced degeneracy scan needs at least 3 radii, got {}",
            radii.len()
        )));
    }
    let mut radii: Vec<f64> = radii.to_vec();
    radii.sort_by(f64::total_cmp);
    let model = quad.domain.model().clone();
    let unit_volume = ball_volume(&model, &model.origin(), 1.0, 256)?;
    let mut values = Vec::with_capacity(radii.len());
    for &r in &radii {
        let m = scanned_ball_measures(quad, x0, r)?;
        let vol = unit_volume * r.powi(model.q() as i32);
        values.push(m.max_w * m.sigma * r / vol);
    }
    ScanReport::from_samples(radii, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{euclidean_ball, gauge_ball};
    use crate::hgroup::{gauge_grad_norm, psi};
    use crate::util::integrate_refine;

    fn model() -> Model {
        Model::calibrated(1).unwrap()
    }

    fn unit_sphere_quadrature(res: usize) -> SurfaceQuadrature {
        let m = model();
        let d = gauge_ball(&m, &Point::origin(1), 1.0).unwrap();
        build_quadrature(&d, res).unwrap()
    }

    /// 1-D reduction of a rotation-invariant surface integral over the
    /// centered gauge sphere of radius r: nodes (√(r² cos u), 0, r² sin u/4)
    /// with element (r²/4)·√(4 sin²u + r² cos³u)·2π.
    fn reduced_sphere_integral(r: f64, f: impl Fn(&Point) -> f64) -> f64 {
        let half_pi = std::f64::consts::FRAC_PI_2;
        integrate_refine(
            |u: f64| {
                let p = Point::from_xyt(
                    (r * r * u.cos()).max(0.0).sqrt(),
                    0.0,
                    r * r * u.sin() / 4.0,
                );
                let element = (r * r / 4.0)
                    * (4.0 * u.sin().powi(2) + r * r * u.cos().powi(3)).sqrt()
                    * std::f64::consts::TAU;
                f(&p) * element
            },
            -half_pi,
            half_pi,
            // √cos u integrands have a √-type derivative kink at the poles;
            // 1e−9 is reachable and far below the assertion tolerances.
            1e-9,
            64,
            18,
        )
        .unwrap()
    }

    #[test]
    fn total_area_matches_reduced_integral() {
        let quad = unit_sphere_quadrature(300);
        let oracle = reduced_sphere_integral(1.0, |_| 1.0);
        let rel = (quad.total_area - oracle).abs() / oracle;
        assert!(
            rel < 1e-4,
            "σ(∂B(e,1)): quadrature {} vs reduced {} (rel {rel:.2e})",
            quad.total_area,
            oracle
        );
    }

    #[test]
    fn horizontal_perimeter_matches_reduced_integral_and_scales_cubically() {
        let m = model();
        let quad1 = unit_sphere_quadrature(300);
        let sx1 = quad1.total_horizontal_perimeter();
        // W = |z| N²/√(|z|⁶ + 64t²) on the sphere; the reduced integrand of
        // σ_X collapses to (π r³/2)∫√cos u du.
        let w_fn = |p: &Point| {
            let n2 = p.z_norm_sq().sqrt(); // |z|
            let n = crate::hgroup::gauge(p);
            n2 * n * n / (p.z_norm_sq().powi(3) + 64.0 * p.t * p.t).sqrt()
        };
        let oracle1 = reduced_sphere_integral(1.0, |p| w_fn(p));
        let rel = (sx1 - oracle1).abs() / oracle1;
        assert!(
            rel < 1e-4,
            "σ_X(∂B(e,1)): quadrature {sx1} vs reduced {oracle1} (rel {rel:.2e})"
        );
        // Exact r^{Q−1} homogeneity: σ_X(∂B(e,2)) = 8·σ_X(∂B(e,1)).
        let d2 = gauge_ball(&m, &Point::origin(1), 2.0).unwrap();
        let quad2 = build_quadrature(&d2, 300).unwrap();
        let ratio = quad2.total_horizontal_perimeter() / sx1;
        assert!(
            (ratio - 8.0).abs() < 8.0 * 1e-4,
            "σ_X scaling ratio {ratio} ≠ 8"
        );
    }

    #[test]
    fn nodes_sit_on_the_surface_and_refinement_converges() {
        let m = model();
        let d = gauge_ball(&m, &Point::from_xyt(0.5, -0.3, 0.2), 0.8).unwrap();
        let coarse = build_quadrature(&d, 150).unwrap();
        let fine = build_quadrature(&d, 300).unwrap();
        let drift = (coarse.total_area - fine.total_area).abs() / fine.total_area;
        assert!(
            drift < 5e-3,
            "area refinement drift {drift:.2e} exceeds 0.5%"
        );
        for n in coarse.nodes.iter().step_by(97) {
            assert!(d.rho(&n.point).abs() < 1e-8, "node off surface");
            // W = |⟨ν, X_j⟩ e_j| with |X_j| = √(1 + coordinate²/4): the
            // sharp pointwise bound is √(1 + |z|²/4).
            let bound = (1.0 + n.point.z_norm_sq() / 4.0).sqrt();
            assert!(
                n.w >= 0.0 && n.w <= bound * (1.0 + 1e-12),
                "W = {} out of range [0, {bound}]",
                n.w
            );
            let nu_len: f64 = n.nu.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((nu_len - 1.0).abs() < 1e-12, "ν not unit");
        }
        let sum: f64 = coarse.nodes.iter().map(|n| n.weight).sum();
        assert!((sum - coarse.total_area).abs() < 1e-12 * sum.abs());
    }

    #[test]
    fn atlas_quadrature_revalidates_the_normalization_constant() {
        // ∫_{∂B(e,1)} (Q−2)·ψ/|DN| dσ must equal 1/c_Q: the flux integral
        // computed here by the 2-D atlas quadrature, frozen independently by
        // the 1-D reduction used for calibration.
        let m = model();
        let quad = unit_sphere_quadrature(400);
        let mut flux = 0.0;
        for n in &quad.nodes {
            let integrand = 2.0 * psi(&n.point).unwrap() / gauge_grad_norm(&n.point).unwrap();
            flux += integrand * n.weight;
        }
        let target = 1.0 / m.c_q();
        let rel = (flux - target).abs() / target;
        assert!(
            rel < 1e-4,
            "2-D flux {flux} vs 1/c_Q = {target} (rel {rel:.2e})"
        );
    }

    #[test]
    fn extraction_quadrature_recovers_euclidean_sphere_area() {
        let m = model();
        let d = euclidean_ball(&m, 1.0).unwrap();
        let quad = build_quadrature(&d, 48).unwrap();
        let exact = 4.0 * std::f64::consts::PI;
        let rel = (quad.total_area - exact).abs() / exact;
        assert!(
            rel < 5e-3,
            "extracted sphere area {} vs 4π (rel {rel:.2e})",
            quad.total_area
        );
        for n in quad.nodes.iter().step_by(51) {
            assert!(d.rho(&n.point).abs() < 1e-8);
        }
    }

    #[test]
    fn sigma_measures_flags_empty_balls_and_bounds_sigma_x() {
        let quad = unit_sphere_quadrature(200);
        // A ball far from the surface is empty.
        let far = surface_ball(&quad, &Point::from_xyt(5.0, 5.0, 3.0), 0.2).unwrap();
        let m = sigma_measures(&quad, &far);
        assert!(m.is_empty && m.sigma == 0.0 && m.sigma_x == 0.0 && m.max_w == 0.0);
        // σ_X(Δ) ≤ max W · σ(Δ) holds exactly on any quadrature ball.
        for (center, radius) in [
            (Point::from_xyt(1.0, 0.0, 0.0), 0.4),
            (Point::from_xyt(0.0, 0.0, 0.25), 0.3),
            (Point::from_xyt(-0.6, 0.6, 0.1), 0.5),
        ] {
            let ball = surface_ball(&quad, &center, radius).unwrap();
            let m = sigma_measures(&quad, &ball);
            assert!(!m.is_empty);
            assert!(
                m.sigma_x <= m.max_w * m.sigma * (1.0 + 1e-14),
                "σ_X = {} > maxW·σ = {}",
                m.sigma_x,
                m.max_w * m.sigma
            );
        }
    }

    #[test]
    fn ahlfors_exponents_at_the_characteristic_pole() {
        let quad = unit_sphere_quadrature(200);
        let pole = Point::from_xyt(0.0, 0.0, 0.25);
        let radii = [0.1, 0.141, 0.2, 0.283, 0.4];
        let scan = ahlfors_scan(&quad, &pole, &radii).unwrap();
        assert!(
            (scan.sigma.fitted_exponent - 2.0).abs() < 0.15,
            "σ exponent at the pole: {} (want 2±0.15)",
            scan.sigma.fitted_exponent
        );
        assert!(
            (scan.sigma_x.fitted_exponent - 3.0).abs() < 0.15,
            "σ_X exponent at the pole: {} (want 3±0.15)",
            scan.sigma_x.fitted_exponent
        );
        // Small-r limit of the ratio: σ_X ≈ πr³/3 and |B| = π²r⁴/8 give
        // 8/(3π) ≈ 0.8488.
        let limit = 8.0 / (3.0 * std::f64::consts::PI);
        let smallest = scan.ahlfors_ratios[0];
        assert!(
            (smallest - limit).abs() < 0.1 * limit,
            "pole Ahlfors ratio {smallest} vs limit {limit}"
        );
        // Bounded above and below across the ladder.
        for v in &scan.ahlfors_ratios {
            assert!(*v > 0.3 && *v < 3.0, "ratio {v} out of the regular band");
        }
    }

    #[test]
    fn ahlfors_exponents_at_the_equator() {
        let quad = unit_sphere_quadrature(200);
        let eq = Point::from_xyt(1.0, 0.0, 0.0);
        let radii = [0.1, 0.141, 0.2, 0.283, 0.4];
        let scan = ahlfors_scan(&quad, &eq, &radii).unwrap();
        assert!(
            (scan.sigma.fitted_exponent - 3.0).abs() < 0.15,
            "σ exponent at the equator: {} (want 3±0.15)",
            scan.sigma.fitted_exponent
        );
        assert!(
            (scan.sigma_x.fitted_exponent - 3.0).abs() < 0.15,
            "σ_X exponent at the equator: {} (want 3±0.15)",
            scan.sigma_x.fitted_exponent
        );
        for v in &scan.ahlfors_ratios {
            assert!(*v > 0.05 && *v < 20.0, "ratio {v} wildly irregular");
        }
    }

    #[test]
    fn ahlfors_scan_rejects_short_ladders() {
        let quad = unit_sphere_quadrature(100);
        let pole = Point::from_xyt(0.0, 0.0, 0.25);
        assert!(ahlfors_scan(&quad, &pole, &[0.1, 0.2]).is_err());
    }

    #[test]
    fn ball_volume_closed_form_homogeneity_translation() {
        let m = model();
        let e = Point::origin(1);
        // |B(e, 1)| = π²/8 (cylindrical coordinates reduce the defining
        // quartic to a quarter-circle integral).
        let exact = std::f64::consts::PI.powi(2) / 8.0;
        let v1 = ball_volume(&m, &e, 1.0, 512).unwrap();
        assert!(
            (v1 - exact).abs() < 1e-3 * exact,
            "|B(e,1)| = {v1} vs π²/8 = {exact}"
        );
        // Doubling: |B(e, 2)|/|B(e, 1)| = 2^Q = 16.
        let v2 = ball_volume(&m, &e, 2.0, 512).unwrap();
        let ratio = v2 / v1;
        assert!(
            (ratio - 16.0).abs() < 0.01 * 16.0,
            "volume doubling ratio {ratio} vs 16"
        );
        // Translation invariance is exact for this rule.
        let g = Point::from_xyt(0.7, -1.1, 0.4);
        let vg = ball_volume(&m, &g, 1.0, 512).unwrap();
        assert!((vg - v1).abs() <= 1e-12 * v1);
        // Homogeneity at a non-dyadic radius.
        let r = 0.73;
        let vr = ball_volume(&m, &e, r, 512).unwrap();
        assert!(
            (vr - v1 * r.powi(4)).abs() < 2e-3 * v1 * r.powi(4),
            "homogeneity: {vr} vs {}",
            v1 * r.powi(4)
        );
    }

    #[test]
    fn balanced_degeneracy_is_pinned_at_the_pole() {
        let quad = unit_sphere_quadrature(200);
        let pole = Point::from_xyt(0.0, 0.0, 0.25);
        let radii = [0.1, 0.141, 0.2, 0.283, 0.4];
        let report = balanced_degeneracy_check(&quad, &pole, &radii).unwrap();
        // max W ≈ r/2, σ ≈ πr², |B| = π²r⁴/8: the product tends to 4/π.
        let limit = 4.0 / std::f64::consts::PI;
        for (r, v) in report.radii.iter().zip(report.values.iter()) {
            assert!(
                *v > 0.5 * limit && *v < 2.0 * limit,
                "balanced product at r = {r} is {v}, far from {limit}"
            );
        }
        assert!(
            report.fitted_exponent.abs() < 0.35,
            "balanced product should be nearly scale-free, exponent {}",
            report.fitted_exponent
        );
        // At the equator the product is likewise bounded and positive.
        let eq = Point::from_xyt(1.0, 0.0, 0.0);
        let report = balanced_degeneracy_check(&quad, &eq, &radii).unwrap();
        for v in &report.values {
            assert!(*v > 0.05 && *v < 20.0);
        }
    }

    #[test]
    fn sigma_x_doubling_has_a_uniform_constant() {
        let quad = unit_sphere_quadrature(240);
        let stride = quad.nodes.len() / 20;
        let radii = [0.08, 0.11, 0.15, 0.21, 0.29];
        let mut worst: f64 = 0.0;
        for k in 0..20 {
            let center = quad.nodes[k * stride].point.clone();
            for &r in &radii {
                let small = sigma_measures(&quad, &surface_ball(&quad, &center, r).unwrap());
                let big = sigma_measures(&quad, &surface_ball(&quad, &center, 2.0 * r).unwrap());
                assert!(
                    !small.is_empty && small.sigma_x > 0.0,
                    "degenerate small ball at center {k}, r = {r}"
                );
                worst = worst.max(big.sigma_x / small.sigma_x);
            }
        }
        // ∂B is 1-Ahlfors regular: σ_X(2r)/σ_X(r) admits one uniform bound;
        // the r³ model value is 8, sampling roughness stays well under 16.
        assert!(
            worst < 16.0,
            "σ_X doubling constant blew up: max ratio {worst}"
        );
    }
}
