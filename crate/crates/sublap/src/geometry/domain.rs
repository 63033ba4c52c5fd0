//! Implicit domains D = {ρ < 0} ⊂ H¹ with optional analytic surface atlases.
//!
//! A domain carries its defining function ρ (negative inside), the Euclidean
//! gradient ∇ρ, a bounding box, and — for the registry shapes that admit one —
//! a parametric atlas of ∂D used to build high-accuracy surface quadratures.
//! Shapes without an atlas fall back to triangulated level-set extraction.
//!
//! The registry covers the shapes the experiments need: (possibly translated)
//! gauge balls, the paraboloid family Ω = {t > m|z|²}, a half-space patch
//! {t < 0}, a vertical cylinder patch, and a Euclidean ball (the latter kept
//! atlas-free on purpose, as the test case for the extraction path).

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hgroup::{gauge4, gauge4_gradient, group_inv, group_mul};
use crate::{Model, Point};

/// Axis-aligned box in ambient coordinates (x, y, t) of H¹.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    /// Lower corner (x, y, t).
    pub lo: [f64; 3],
    /// Upper corner (x, y, t).
    pub hi: [f64; 3],
}

impl BBox {
    /// Builds a box, checking lo < hi componentwise.
    pub fn new(lo: [f64; 3], hi: [f64; 3]) -> Result<Self> {
        if lo.iter().zip(hi.iter()).any(|(l, h)| !(l < h)) {
            return Err(Error::InvalidParameter(format!(
                "bbox must have lo < hi, got {lo:?} .. {hi:?}"
            )));
        }
        Ok(Self { lo, hi })
    }

    /// Edge lengths.
    pub fn extent(&self) -> [f64; 3] {
        [
            self.hi[0] - self.lo[0],
            self.hi[1] - self.lo[1],
            self.hi[2] - self.lo[2],
        ]
    }

    /// True when `p` lies inside the closed box.
    pub fn contains(&self, p: &Point) -> bool {
        let c = [p.x[0], p.y[0], p.t];
        c.iter()
            .zip(self.lo.iter().zip(self.hi.iter()))
            .all(|(v, (l, h))| *v >= *l && *v <= *h)
    }
}

/// Analytic parametrization of a registry boundary surface.
///
/// Parameters live in the rectangle returned by [`Atlas::param_rect`]; the
/// area element is reported per unit parameter area, so a midpoint quadrature
/// is `Σ element(aᵢ, bᵢ) Δa Δb`.
#[derive(Debug, Clone)]
pub enum Atlas {
    /// Gauge sphere ∂B(center, radius) = {N(center⁻¹ ∘ q) = radius}.
    ///
    /// Parameters (a, φ) ∈ [−1, 1] × [0, 2π). The latitude is graded,
    /// u = sgn(a)·(π/2)·(1 − (1−|a|)⁴), so the colatitude from the nearest
    /// characteristic pole, s = (π/2)(1−|a|)⁴, is computed without
    /// cancellation and nodes automatically crowd toward the poles where the
    /// horizontal measure degenerates. On the centered unit sphere
    /// |z|² = cos u and 4t = sin u.
    GaugeSphere {
        /// Ball center (group translation of the centered sphere).
        center: Point,
        /// Gauge radius.
        radius: f64,
    },
    /// Paraboloid surface {t = m |z|²} truncated at |z| ≤ rho_max,
    /// parametrized by (ρ, φ).
    Paraboloid {
        /// Aperture coefficient (m < 0 is the characteristic-counterexample
        /// regime).
        m: f64,
        /// Horizontal truncation radius.
        rho_max: f64,
    },
    /// Plane patch {t = 0, |x| ≤ extent, |y| ≤ extent}, parameters (x, y).
    Plane {
        /// Half side length of the square patch.
        extent: f64,
    },
    /// Vertical cylinder patch {|z| = radius, |t| ≤ half_height},
    /// parameters (φ, t).
    Cylinder {
        /// Cylinder radius.
        radius: f64,
        /// Half of the vertical extent.
        half_height: f64,
    },
}

/// Pushes a tangent vector at q through the differential of the left
/// translation L_c (affine, constant Jacobian, det 1):
/// (v_x, v_y, v_t) ↦ (v_x, v_y, v_t + (c_x v_y − c_y v_x)/2).
fn push_tangent(c: &Point, v: [f64; 3]) -> [f64; 3] {
    [
        v[0],
        v[1],
        v[2] + 0.5 * (c.x[0] * v[1] - c.y[0] * v[0]),
    ]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

impl Atlas {
    /// Parameter rectangle ((a_lo, a_hi), (b_lo, b_hi)).
    pub fn param_rect(&self) -> ((f64, f64), (f64, f64)) {
        match self {
            Atlas::GaugeSphere { .. } => ((-1.0, 1.0), (0.0, std::f64::consts::TAU)),
            Atlas::Paraboloid { rho_max, .. } => ((0.0, *rho_max), (0.0, std::f64::consts::TAU)),
            Atlas::Plane { extent } => ((-extent, *extent), (-extent, *extent)),
            Atlas::Cylinder {
                half_height: h, ..
            } => ((0.0, std::f64::consts::TAU), (-h, *h)),
        }
    }

    /// True when the second parameter is an angle (wrap-around windows).
    pub fn second_param_periodic(&self) -> bool {
        matches!(self, Atlas::GaugeSphere { .. } | Atlas::Paraboloid { .. })
    }

    /// Latitude bookkeeping for the gauge sphere: returns
    /// (sin s, sgn · cos s, du/da) where s = (π/2)(1−|a|)⁴ is the colatitude
    /// from the nearest pole, so that cos u = sin s and sin u = sgn·cos s.
    fn sphere_lat(a: f64) -> (f64, f64, f64) {
        let half_pi = std::f64::consts::FRAC_PI_2;
        let w = 1.0 - a.abs();
        let s = half_pi * w.powi(4);
        let du_da = 2.0 * std::f64::consts::PI * w.powi(3);
        (s.sin(), a.signum() * s.cos(), du_da)
    }

    /// Surface point at parameters (a, b).
    pub fn point(&self, a: f64, b: f64) -> Point {
        match self {
            Atlas::GaugeSphere { center, radius } => {
                let (cos_u, sin_u, _) = Self::sphere_lat(a);
                let rho = radius * cos_u.max(0.0).sqrt();
                let t = radius * radius * sin_u / 4.0;
                let base = Point::from_xyt(rho * b.cos(), rho * b.sin(), t);
                group_mul(center, &base).expect("H¹ points")
            }
            Atlas::Paraboloid { m, .. } => Point::from_xyt(a * b.cos(), a * b.sin(), m * a * a),
            Atlas::Plane { .. } => Point::from_xyt(a, b, 0.0),
            Atlas::Cylinder { radius, .. } => {
                Point::from_xyt(radius * a.cos(), radius * a.sin(), b)
            }
        }
    }

    /// Area element dσ/(da db) at parameters (a, b).
    ///
    /// Translated gauge spheres map both tangent vectors through the
    /// translation differential before the cross product: left translation is
    /// affine but not an ambient isometry, so the Euclidean surface element is
    /// genuinely center-dependent.
    pub fn element(&self, a: f64, b: f64) -> f64 {
        match self {
            Atlas::GaugeSphere { center, radius } => {
                let (cos_u, sin_u, du_da) = Self::sphere_lat(a);
                let cos_u = cos_u.max(1e-300);
                let r = *radius;
                let rho = r * cos_u.sqrt();
                let drho_du = -r * sin_u / (2.0 * cos_u.sqrt());
                let dt_du = r * r * cos_u / 4.0;
                let (sb, cb) = b.sin_cos();
                let r_u = [drho_du * cb, drho_du * sb, dt_du];
                let r_b = [-rho * sb, rho * cb, 0.0];
                let ju = push_tangent(center, r_u);
                let jb = push_tangent(center, r_b);
                norm3(cross(ju, jb)) * du_da
            }
            Atlas::Paraboloid { m, .. } => a * (1.0 + 4.0 * m * m * a * a).sqrt(),
            Atlas::Plane { .. } => 1.0,
            Atlas::Cylinder { radius, .. } => *radius,
        }
    }
}

/// A bounded open set D = {ρ < 0} in H¹ with Euclidean gradient of ρ and an
/// optional analytic surface atlas.
#[derive(Clone)]
pub struct ImplicitDomain {
    name: String,
    model: Model,
    bbox: BBox,
    rho: Arc<dyn Fn(&Point) -> f64 + Send + Sync>,
    rho_grad: Arc<dyn Fn(&Point) -> Vec<f64> + Send + Sync>,
    atlas: Option<Atlas>,
}

impl std::fmt::Debug for ImplicitDomain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ImplicitDomain")
            .field("name", &self.name)
            .field("bbox", &self.bbox)
            .field("has_atlas", &self.atlas.is_some())
            .finish()
    }
}

impl ImplicitDomain {
    /// Assembles a domain from parts. `rho` must be negative inside, positive
    /// outside, with nonvanishing gradient on {ρ = 0} away from a
    /// measure-zero set.
    pub fn new(
        name: impl Into<String>,
        model: Model,
        bbox: BBox,
        rho: Arc<dyn Fn(&Point) -> f64 + Send + Sync>,
        rho_grad: Arc<dyn Fn(&Point) -> Vec<f64> + Send + Sync>,
        atlas: Option<Atlas>,
    ) -> Result<Self> {
        if model.n() != 1 {
            return Err(Error::Domain(
                "surface and grid drivers are implemented for H¹ (n = 1)".into(),
            ));
        }
        Ok(Self {
            name: name.into(),
            model,
            bbox,
            rho,
            rho_grad,
            atlas,
        })
    }

    /// Registry label.
    pub fn name(&self) -> &str {
        &self.name
    }

    /// The group model the domain lives in.
    pub fn model(&self) -> &Model {
        &self.model
    }

    /// Bounding box containing the closure of D.
    pub fn bbox(&self) -> &BBox {
        &self.bbox
    }

    /// Defining function ρ at `p` (negative inside).
    pub fn rho(&self, p: &Point) -> f64 {
        (self.rho)(p)
    }

    /// Euclidean gradient ∇ρ at `p`, layout (x, y, t).
    pub fn rho_grad(&self, p: &Point) -> Vec<f64> {
        (self.rho_grad)(p)
    }

    /// True when `p` is strictly inside D.
    pub fn contains(&self, p: &Point) -> bool {
        self.rho(p) < 0.0
    }

    /// The registered analytic atlas, when the shape has one.
    pub fn atlas(&self) -> Option<&Atlas> {
        self.atlas.as_ref()
    }

    /// Projects `p` onto {ρ = 0} by Newton steps along ∇ρ,
    /// p ← p − ρ ∇ρ/|∇ρ|². Converges quadratically from within a band of the
    /// surface; errs if |ρ| does not fall below `tol` (absolute).
    pub fn project_to_surface(&self, p: &Point, tol: f64, max_iter: usize) -> Result<Point> {
        let mut q = p.clone();
        for _ in 0..max_iter {
            let r = self.rho(&q);
            if r.abs() <= tol {
                return Ok(q);
            }
            let g = self.rho_grad(&q);
            let g2: f64 = g.iter().map(|v| v * v).sum();
            if !(g2 > 0.0) {
                return Err(Error::Domain(format!(
                    "degenerate ∇ρ while projecting {q:?} to the surface of {}",
                    self.name
                )));
            }
            let step = r / g2;
            q.x[0] -= step * g[0];
            q.y[0] -= step * g[1];
            q.t -= step * g[2];
        }
        let r = self.rho(&q);
        if r.abs() <= tol {
            Ok(q)
        } else {
            Err(Error::RootFind(format!(
                "surface projection stalled at |ρ| = {:.3e} (tol {tol:.1e}) on {}",
                r.abs(),
                self.name
            )))
        }
    }
}

// ---------------------------------------------------------------------------
// Registry shapes.
// ---------------------------------------------------------------------------

/// Gauge ball B(center, radius) = {q : N(center⁻¹ ∘ q) < radius}, with
/// ρ = N⁴(center⁻¹ ∘ q) − radius⁴ (a polynomial, smooth across the poles).
pub fn gauge_ball(model: &Model, center: &Point, radius: f64) -> Result<ImplicitDomain> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "gauge ball needs radius > 0, got {radius}"
        )));
    }
    if center.n() != 1 {
        return Err(Error::Domain("gauge_ball driver is H¹-only".into()));
    }
    let c = center.clone();
    let c_inv = group_inv(&c);
    let r4 = radius.powi(4);
    let rho = {
        let c_inv = c_inv.clone();
        move |q: &Point| gauge4(&group_mul(&c_inv, q).expect("H¹ points")) - r4
    };
    // ∇_q [N⁴(c⁻¹ ∘ q)] = Jᵀ ∇N⁴(w) with w = c⁻¹ ∘ q and the constant
    // pull-back Jacobian J of q ↦ c⁻¹ ∘ q:
    // ∂w_t/∂q_x = +c_y/2, ∂w_t/∂q_y = −c_x/2, ∂w_t/∂q_t = 1.
    let grad = {
        let c_inv = c_inv.clone();
        let c = c.clone();
        move |q: &Point| {
            let w = group_mul(&c_inv, q).expect("H¹ points");
            let g = gauge4_gradient(&w);
            vec![
                g[0] + 0.5 * c.y[0] * g[2],
                g[1] - 0.5 * c.x[0] * g[2],
                g[2],
            ]
        }
    };
    // Coordinates of c ∘ b over the sphere: |b_x|, |b_y| ≤ R while
    // |b_t| ≤ R²/4, and the twist adds at most |z(c)|·R/2 to t.
    let zr = (c.x[0] * c.x[0] + c.y[0] * c.y[0]).sqrt();
    let ext_t = c.t.abs() + radius * radius / 4.0 + 0.5 * zr * radius;
    let margin_z = 0.15 * radius + 0.05;
    let margin_t = 0.15 * radius * radius / 4.0 + 0.05;
    let bbox = BBox::new(
        [
            c.x[0] - (radius + margin_z),
            c.y[0] - (radius + margin_z),
            -(ext_t + margin_t),
        ],
        [
            c.x[0] + radius + margin_z,
            c.y[0] + radius + margin_z,
            ext_t + margin_t,
        ],
    )?;
    ImplicitDomain::new(
        format!("gauge_ball(r={radius})"),
        model.clone(),
        bbox,
        Arc::new(rho),
        Arc::new(grad),
        Some(Atlas::GaugeSphere {
            center: c,
            radius,
        }),
    )
}

/// Paraboloid domain Ω = {t > m |z|²} truncated for bookkeeping at
/// |z| ≤ rho_max (the surface atlas covers {t = m|z|², |z| ≤ rho_max}).
/// Negative m is the characteristic-counterexample regime.
pub fn jerison_paraboloid(model: &Model, m: f64, rho_max: f64) -> Result<ImplicitDomain> {
    if !(rho_max > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "paraboloid needs rho_max > 0, got {rho_max}"
        )));
    }
    let rho = move |q: &Point| m * q.z_norm_sq() - q.t;
    let grad = move |q: &Point| vec![2.0 * m * q.x[0], 2.0 * m * q.y[0], -1.0];
    let t_lo = (m * rho_max * rho_max).min(0.0) * 1.2 - 0.1;
    let t_hi = (m * rho_max * rho_max).max(0.0) * 1.2 + rho_max * rho_max + 0.1;
    let bbox = BBox::new(
        [-rho_max * 1.2 - 0.1, -rho_max * 1.2 - 0.1, t_lo],
        [rho_max * 1.2 + 0.1, rho_max * 1.2 + 0.1, t_hi],
    )?;
    ImplicitDomain::new(
        format!("jerison_paraboloid(m={m})"),
        model.clone(),
        bbox,
        Arc::new(rho),
        Arc::new(grad),
        Some(Atlas::Paraboloid { m, rho_max }),
    )
}

/// Half-space {t < 0}, restricted to a square patch of the plane {t = 0} for
/// surface purposes.
pub fn halfspace(model: &Model, extent: f64) -> Result<ImplicitDomain> {
    if !(extent > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "halfspace patch needs extent > 0, got {extent}"
        )));
    }
    let rho = |q: &Point| q.t;
    let grad = |_q: &Point| vec![0.0, 0.0, 1.0];
    let bbox = BBox::new(
        [-extent, -extent, -extent],
        [extent, extent, 0.25 * extent],
    )?;
    ImplicitDomain::new(
        format!("halfspace(extent={extent})"),
        model.clone(),
        bbox,
        Arc::new(rho),
        Arc::new(grad),
        Some(Atlas::Plane { extent }),
    )
}

/// Vertical cylinder {|z| < radius}, with surface patch
/// {|z| = radius, |t| ≤ half_height}.
pub fn cylinder_patch(model: &Model, radius: f64, half_height: f64) -> Result<ImplicitDomain> {
    if !(radius > 0.0) || !(half_height > 0.0) {
        return Err(Error::InvalidParameter(
            "cylinder needs radius > 0 and half_height > 0".into(),
        ));
    }
    let r2 = radius * radius;
    let rho = move |q: &Point| q.z_norm_sq() - r2;
    let grad = |q: &Point| vec![2.0 * q.x[0], 2.0 * q.y[0], 0.0];
    let bbox = BBox::new(
        [-radius * 1.2, -radius * 1.2, -half_height * 1.2],
        [radius * 1.2, radius * 1.2, half_height * 1.2],
    )?;
    ImplicitDomain::new(
        format!("cylinder(r={radius})"),
        model.clone(),
        bbox,
        Arc::new(rho),
        Arc::new(grad),
        Some(Atlas::Cylinder {
            radius,
            half_height,
        }),
    )
}

/// Euclidean ball {x² + y² + t² < radius²}. Deliberately registered without
/// an atlas: it exercises the triangulated level-set extraction path, whose
/// total area has the classical 4πR² oracle.
pub fn euclidean_ball(model: &Model, radius: f64) -> Result<ImplicitDomain> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "euclidean ball needs radius > 0, got {radius}"
        )));
    }
    let r2 = radius * radius;
    let rho = move |q: &Point| q.x[0] * q.x[0] + q.y[0] * q.y[0] + q.t * q.t - r2;
    let grad = |q: &Point| vec![2.0 * q.x[0], 2.0 * q.y[0], 2.0 * q.t];
    let m = radius * 1.1 + 0.05;
    let bbox = BBox::new([-m, -m, -m], [m, m, m])?;
    ImplicitDomain::new(
        format!("euclidean_ball(r={radius})"),
        model.clone(),
        bbox,
        Arc::new(rho),
        Arc::new(grad),
        None,
    )
}
