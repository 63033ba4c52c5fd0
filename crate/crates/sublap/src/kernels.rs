//! Subelliptic Poisson kernels on implicit boundaries.
//!
//! For a domain D with Green function G(x,·), the kernels at a boundary
//! point y are P(x,y) = −⟨XG(x,y), N^X(y)⟩ against surface measure σ and
//! K(x,y) = −⟨XG(x,y), ν^X(y)⟩ against horizontal perimeter σ_X, where
//! N^X is the horizontal projection of the Euclidean unit normal, W = |N^X|
//! and ν^X = N^X/W. They satisfy P = K·W, both are nonnegative, both have
//! unit total mass against their measures, and at characteristic points
//! (W = 0) both are extended by zero.
//!
//! Two evaluation modes: a closed form on gauge balls centered at the pole
//! (there G = Γ − const, so XG = XΓ is analytic), and a grid mode that
//! differences a solved Green field near the boundary with Richardson
//! extrapolation in the inward offset.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{pole_gamma, ScalarField};
use crate::geometry::horizontal_normal;
use crate::hgroup::{contract_with_frame, gauge_dist, x_gradient, HVector};
use crate::measures::{SurfaceBall, SurfaceQuadrature};
use crate::pde::GreenFunction;
use crate::{Model, Point};

/// Kernel values at one quadrature node.
#[derive(Debug, Clone)]
pub struct KernelSample {
    /// Index into the quadrature's node list.
    pub node: usize,
    /// P = −⟨XG, N^X⟩, the density against σ.
    pub p_kernel: f64,
    /// K = −⟨XG, ν^X⟩, the density against σ_X.
    pub k_kernel: f64,
    /// Angular weight W at the node (so P = K·W).
    pub w: f64,
    /// |XG| at the node, for the bound |K| ≤ |XG|.
    pub xg_norm: f64,
    /// True when the node is characteristic; P and K are then zero-filled
    /// and the node is excluded from mean denominators.
    pub characteristic: bool,
}

/// How XG is evaluated at the boundary.
#[derive(Clone, Copy)]
pub enum KernelMode<'a> {
    /// Gauge ball centered at the pole: G = Γ(pole,·) − const, XG = XΓ
    /// analytically. Rejected when Γ(pole,·) is not constant on the boundary.
    ClosedForm,
    /// Generic domain: XG from a solved Green field, differenced at inward
    /// offsets 2h and 4h along −ν with linear Richardson extrapolation to
    /// the boundary (offsets deepen automatically where the interpolation
    /// stencil leaves the covered grid).
    Grid(&'a GreenFunction),
}

const CLOSED_FORM_REL_TOL: f64 = 1e-6;

fn offset_point(y: &Point, nu: &[f64], s: f64) -> Point {
    Point::from_xyt(y.x[0] + s * nu[0], y.y[0] + s * nu[1], y.t + s * nu[2])
}

fn bumped(q: &Point, axis: usize, d: f64) -> Point {
    let mut c = [q.x[0], q.y[0], q.t];
    c[axis] += d;
    Point::from_xyt(c[0], c[1], c[2])
}

/// Horizontal gradient of G at the inward offset point y − eps·ν: the Γ part
/// is analytic, the harmonic correction is centrally differenced on the
/// interpolated grid field with per-axis steps.
fn xg_at_offset<S: ScalarField<f64>>(
    green: &GreenFunction,
    gamma: &S,
    y: &Point,
    nu: &[f64],
    eps: f64,
) -> Result<HVector<f64>> {
    let q = offset_point(y, nu, -eps);
    let h = green.harmonic_part();
    let step = h.grid().h();
    // Keep the probe away from the Γ singularity at the pole; extrapolating
    // across it is meaningless.
    if gauge_dist(green.pole(), &q)? < 5.0 * h.grid().h_max() {
        return Err(Error::Domain(
            "offset probe approaches the Green pole".into(),
        ));
    }
    let mut grad = [0.0f64; 3];
    for (axis, g) in grad.iter_mut().enumerate() {
        // Core-only interpolation: band values are boundary data at
        // projected feet, and differencing their positional mismatch would
        // produce order-one gradient error near ∂D.
        let vp = h.value_at_core(&bumped(&q, axis, step[axis]))?;
        let vm = h.value_at_core(&bumped(&q, axis, -step[axis]))?;
        *g = (vp - vm) / (2.0 * step[axis]);
    }
    let xh = contract_with_frame(&q, &grad)?;
    let xgam = x_gradient(gamma, &q)?;
    Ok(HVector(
        xgam.0.iter().zip(&xh.0).map(|(a, b)| a - b).collect(),
    ))
}

/// XG at the boundary node by linear extrapolation of two inward offsets.
///
/// Depths are measured in lattice cells along the dominant normal axis
/// (t-facing normals on an anisotropic grid must take Euclidean-small
/// steps), and deepen automatically where the difference stencil falls off
/// the covered grid near the staircase boundary.
fn grid_xg<S: ScalarField<f64>>(
    green: &GreenFunction,
    gamma: &S,
    y: &Point,
    nu: &[f64],
) -> Result<HVector<f64>> {
    let h = green.harmonic_part().grid().h();
    // Euclidean depth advancing one cell along the dominant normal axis.
    let unit = 1.0
        / (0..3)
            .map(|a| nu[a].abs() / h[a])
            .fold(0.0f64, f64::max);
    let cannot_see = |e: &Error| {
        Error::Domain(format!(
            "boundary node ({:.3},{:.3},{:.3}) cannot see the grid interior: {e}",
            y.x[0], y.y[0], y.t
        ))
    };
    let mut e1 = 2.0 * unit;
    let x1 = loop {
        match xg_at_offset(green, gamma, y, nu, e1) {
            Ok(v) => break v,
            Err(_) if e1 < 9.0 * unit => e1 += unit,
            Err(e) => return Err(cannot_see(&e)),
        }
    };
    let mut e2 = e1 + 2.0 * unit;
    let x2 = loop {
        match xg_at_offset(green, gamma, y, nu, e2) {
            Ok(v) => break v,
            Err(_) if e2 < e1 + 6.0 * unit => e2 += unit,
            Err(e) => return Err(cannot_see(&e)),
        }
    };
    // Linear model XG(eps) = XG(0) + c·eps through (e1, x1), (e2, x2).
    let denom = e2 - e1;
    Ok(HVector(
        x1.0.iter()
            .zip(&x2.0)
            .map(|(a, b)| (a * e2 - b * e1) / denom)
            .collect(),
    ))
}

/// Evaluates both Poisson kernels of `pole` at every node of the quadrature.
///
/// Characteristic nodes get P = K = 0 and a flag; everywhere else the
/// samples satisfy P = K·W and |K| ≤ |XG| to rounding.
pub fn poisson_kernels(
    model: &Model,
    quad: &SurfaceQuadrature,
    pole: &Point,
    mode: KernelMode<'_>,
) -> Result<Vec<KernelSample>> {
    let domain = quad.domain();
    if !domain.contains(pole) {
        return Err(Error::InvalidParameter(
            "kernel pole must lie inside the domain".into(),
        ));
    }
    if quad.nodes.is_empty() {
        return Err(Error::Quadrature("empty surface quadrature".into()));
    }
    let gamma = pole_gamma(model, pole.clone())?;
    match mode {
        KernelMode::ClosedForm => {
            // The shortcut XG = XΓ is only valid when Γ(pole,·) is constant
            // on ∂D, i.e. on a gauge ball centered at the pole.
            let step = (quad.nodes.len() / 37).max(1);
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for node in quad.nodes.iter().step_by(step) {
                let g = gamma.value(&node.point);
                lo = lo.min(g);
                hi = hi.max(g);
            }
            if hi - lo > CLOSED_FORM_REL_TOL * hi.abs().max(1e-300) {
                return Err(Error::InvalidParameter(format!(
                    "closed-form kernels need a gauge ball centered at the pole; \
                     Γ(pole,·) spans [{lo:.6e}, {hi:.6e}] on the boundary"
                )));
            }
        }
        KernelMode::Grid(green) => {
            let gp = green.pole();
            let same = (gp.x[0] - pole.x[0]).abs() < 1e-12
                && (gp.y[0] - pole.y[0]).abs() < 1e-12
                && (gp.t - pole.t).abs() < 1e-12;
            if !same {
                return Err(Error::InvalidParameter(
                    "grid-mode pole differs from the Green field's pole".into(),
                ));
            }
        }
    }
    quad.nodes
        .par_iter()
        .enumerate()
        .map(|(idx, node)| -> Result<KernelSample> {
            let hn = horizontal_normal(domain, &node.point)?;
            let xg = match mode {
                KernelMode::ClosedForm => x_gradient(&gamma, &node.point)?,
                KernelMode::Grid(green) => grid_xg(green, &gamma, &node.point, &node.nu)?,
            };
            let xg_norm = xg.norm();
            match &hn.nu_x {
                Some(nu_x) => Ok(KernelSample {
                    node: idx,
                    p_kernel: -xg.dot(&hn.n_x),
                    k_kernel: -xg.dot(nu_x),
                    w: hn.w,
                    xg_norm,
                    characteristic: false,
                }),
                None => Ok(KernelSample {
                    node: idx,
                    p_kernel: 0.0,
                    k_kernel: 0.0,
                    w: hn.w,
                    xg_norm,
                    characteristic: true,
                }),
            }
        })
        .collect()
}

fn check_coverage(samples: &[KernelSample], quad: &SurfaceQuadrature) -> Result<()> {
    if samples.len() != quad.nodes.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} kernel samples for {} quadrature nodes",
            samples.len(),
            quad.nodes.len()
        )));
    }
    Ok(())
}

/// Total masses (∫ P dσ, ∫ K dσ_X); both approximate 1 for an interior pole.
pub fn total_mass(samples: &[KernelSample], quad: &SurfaceQuadrature) -> Result<(f64, f64)> {
    check_coverage(samples, quad)?;
    let mut mass_p = 0.0;
    let mut mass_k = 0.0;
    for s in samples {
        let node = &quad.nodes[s.node];
        mass_p += s.p_kernel * node.weight;
        mass_k += s.k_kernel * node.w * node.weight;
    }
    Ok((mass_p, mass_k))
}

/// Which kernel/measure pairing a reverse-Hölder ratio uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelWeighting {
    /// K against the horizontal perimeter σ_X.
    HorizontalK,
    /// P against the surface measure σ.
    SurfaceP,
}

/// One reverse-Hölder ratio over a surface ball.
#[derive(Debug, Clone, Copy)]
pub struct ReverseHolder {
    /// Hölder exponent p of the left-hand p-mean.
    pub p: f64,
    /// (mean of kernel^p)^{1/p} over the ball.
    pub lhs: f64,
    /// Mean of the kernel over the ball.
    pub rhs: f64,
    /// lhs/rhs; ≥ 1 by the power-mean inequality, bounded for reverse-Hölder
    /// kernels.
    pub ratio: f64,
    /// Non-characteristic nodes that entered the means.
    pub nodes_used: usize,
}

/// Computes the p-mean / mean ratio of a kernel over the surface ball Δ.
/// Characteristic nodes are excluded from both numerators and denominators.
pub fn reverse_holder(
    samples: &[KernelSample],
    quad: &SurfaceQuadrature,
    ball: &SurfaceBall,
    p: f64,
    weighting: KernelWeighting,
) -> Result<ReverseHolder> {
    check_coverage(samples, quad)?;
    if !(p > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "reverse-Hölder exponent must exceed 1, got {p}"
        )));
    }
    let mut meas = 0.0;
    let mut mean_num = 0.0;
    let mut pow_num = 0.0;
    let mut used = 0usize;
    for &idx in &ball.node_indices {
        let s = &samples[idx];
        if s.characteristic {
            continue;
        }
        let node = &quad.nodes[idx];
        let (val, m) = match weighting {
            KernelWeighting::HorizontalK => (s.k_kernel, node.w * node.weight),
            KernelWeighting::SurfaceP => (s.p_kernel, node.weight),
        };
        meas += m;
        mean_num += val * m;
        pow_num += val.abs().powf(p) * m;
        used += 1;
    }
    if used == 0 || !(meas > 0.0) {
        return Err(Error::Domain(format!(
            "surface ball at ({:.3},{:.3},{:.3}), r = {} carries no usable measure",
            ball.center.x[0], ball.center.y[0], ball.center.t, ball.radius
        )));
    }
    let rhs = mean_num / meas;
    if !(rhs > 0.0) {
        return Err(Error::Domain(
            "kernel mean over the ball is not positive".into(),
        ));
    }
    let lhs = (pow_num / meas).powf(1.0 / p);
    Ok(ReverseHolder {
        p,
        lhs,
        rhs,
        ratio: lhs / rhs,
        nodes_used: used,
    })
}

/// Boundary representation ∫_{∂D} f·K dσ_X: the value at the pole of the
/// harmonic extension of f.
pub fn represent_solution<F: ScalarField<f64> + ?Sized>(
    samples: &[KernelSample],
    quad: &SurfaceQuadrature,
    f: &F,
) -> Result<f64> {
    check_coverage(samples, quad)?;
    let mut acc = 0.0;
    for s in samples {
        if s.characteristic {
            continue;
        }
        let node = &quad.nodes[s.node];
        acc += f.value(&node.point) * s.k_kernel * node.w * node.weight;
    }
    Ok(acc)
}

/// Empirical constant in the upper bound K(x,y) ≤ C·d(x,y)/|B(x, d(x,y))|,
/// reported as the max over non-characteristic nodes. Uses the exact gauge
/// ball volume |B(x,d)| = (π²/8)·d⁴ (unit-ball volume scaled by
/// Q-homogeneity; left-invariance moves the center).
pub fn kernel_bound_constant(
    samples: &[KernelSample],
    quad: &SurfaceQuadrature,
    pole: &Point,
) -> Result<f64> {
    check_coverage(samples, quad)?;
    if pole.n() != 1 {
        return Err(Error::DimensionMismatch(
            "kernel bound constant is H¹-only".into(),
        ));
    }
    let unit_vol = std::f64::consts::PI.powi(2) / 8.0;
    let mut best = f64::NEG_INFINITY;
    for s in samples {
        if s.characteristic {
            continue;
        }
        let node = &quad.nodes[s.node];
        let d = gauge_dist(pole, &node.point)?;
        if d < 1e-12 {
            continue;
        }
        best = best.max(s.k_kernel * unit_vol * d.powi(3));
    }
    if !best.is_finite() {
        return Err(Error::Domain(
            "no non-characteristic nodes for the bound constant".into(),
        ));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::LinearField;
    use crate::geometry::gauge_ball;
    use crate::measures::{build_quadrature, surface_ball, SurfaceNode};
    use crate::pde::{green_function, SolverParams};

    fn setup(resolution: usize) -> (Model, SurfaceQuadrature) {
        let model = Model::calibrated(1).unwrap();
        let ball = gauge_ball(&model, &Point::origin(1), 1.0).unwrap();
        let quad = build_quadrature(&ball, resolution).unwrap();
        (model, quad)
    }

    #[test]
    fn closed_form_matches_the_symbolic_kernel() {
        let (model, quad) = setup(100);
        let pole = Point::origin(1);
        let samples = poisson_kernels(&model, &quad, &pole, KernelMode::ClosedForm).unwrap();
        assert_eq!(samples.len(), quad.nodes.len());
        for s in samples.iter().step_by(41) {
            if s.characteristic {
                continue;
            }
            let node = &quad.nodes[s.node];
            // On the unit sphere K(e,y) = |z|/π.
            let z = (node.point.x[0].powi(2) + node.point.y[0].powi(2)).sqrt();
            assert!(
                (s.k_kernel - z / std::f64::consts::PI).abs() < 1e-6,
                "K = {} vs |z|/π = {}",
                s.k_kernel,
                z / std::f64::consts::PI
            );
            assert!(
                (s.p_kernel - s.k_kernel * s.w).abs() <= 1e-12 * (1.0 + s.p_kernel.abs()),
                "P ≠ K·W"
            );
            assert!(s.k_kernel <= s.xg_norm + 1e-10, "K exceeds |XG|");
        }
    }

    #[test]
    fn closed_form_total_masses_are_one() {
        let (model, quad) = setup(160);
        let samples =
            poisson_kernels(&model, &quad, &Point::origin(1), KernelMode::ClosedForm).unwrap();
        let (mass_p, mass_k) = total_mass(&samples, &quad).unwrap();
        assert!(
            (mass_p - 1.0).abs() < 0.02,
            "∫P dσ = {mass_p}, expected 1 ± 2%"
        );
        assert!(
            (mass_k - 1.0).abs() < 0.02,
            "∫K dσ_X = {mass_k}, expected 1 ± 2%"
        );
        // The two masses are the same integral written against two measures.
        assert!((mass_p - mass_k).abs() < 1e-10);
    }

    #[test]
    fn characteristic_nodes_are_zero_filled() {
        let (model, mut quad) = setup(60);
        // The north pole (0, 0, 1/4) of the unit gauge ball is characteristic:
        // ν = t̂ there, so ⟨ν, X_j⟩ = (∓y/2, ±x/2) = 0.
        quad.nodes.push(SurfaceNode {
            point: Point::from_xyt(0.0, 0.0, 0.25),
            weight: 0.0,
            nu: vec![0.0, 0.0, 1.0],
            w: 0.0,
            param: None,
        });
        let samples =
            poisson_kernels(&model, &quad, &Point::origin(1), KernelMode::ClosedForm).unwrap();
        let last = samples.last().unwrap();
        assert!(last.characteristic);
        assert_eq!(last.p_kernel, 0.0);
        assert_eq!(last.k_kernel, 0.0);
        // Weight zero: the synthetic node does not perturb the masses.
        let (mass_p, _) = total_mass(&samples, &quad).unwrap();
        assert!((mass_p - 1.0).abs() < 0.05);
    }

    #[test]
    fn kernels_are_nonnegative_and_gradient_bounded() {
        let (model, quad) = setup(120);
        let samples =
            poisson_kernels(&model, &quad, &Point::origin(1), KernelMode::ClosedForm).unwrap();
        let mut min_k = f64::INFINITY;
        for s in &samples {
            assert!(s.k_kernel >= -1e-8, "negative K = {}", s.k_kernel);
            assert!(s.p_kernel >= -1e-8, "negative P = {}", s.p_kernel);
            assert!(s.k_kernel.abs() <= s.xg_norm + 1e-10);
            if !s.characteristic {
                min_k = min_k.min(s.k_kernel);
            }
        }
        // Mutual-absolute-continuity proxy: K strictly positive away from
        // the characteristic set.
        assert!(min_k > 0.0, "min non-characteristic K = {min_k}");
    }

    #[test]
    fn constant_kernel_yields_unit_ratio() {
        let (_, quad) = setup(40);
        let samples: Vec<KernelSample> = (0..quad.nodes.len())
            .map(|i| KernelSample {
                node: i,
                p_kernel: 1.0,
                k_kernel: 1.0,
                w: quad.nodes[i].w,
                xg_norm: 1.0,
                characteristic: false,
            })
            .collect();
        let ball = surface_ball(&quad, &Point::from_xyt(1.0, 0.0, 0.0), 0.5).unwrap();
        for p in [2.0, 3.0] {
            for weighting in [KernelWeighting::HorizontalK, KernelWeighting::SurfaceP] {
                let rh = reverse_holder(&samples, &quad, &ball, p, weighting).unwrap();
                assert!(
                    (rh.ratio - 1.0).abs() < 1e-12,
                    "constant kernel ratio = {}",
                    rh.ratio
                );
            }
        }
    }

    #[test]
    fn ratios_are_jensen_bounded_and_quadrature_stable() {
        let pole = Point::origin(1);
        let centers = [Point::from_xyt(0.0, 0.0, 0.25), Point::from_xyt(1.0, 0.0, 0.0)];
        let radii = [0.2, 0.4];
        let run = |resolution: usize| -> Vec<f64> {
            let (model, quad) = setup(resolution);
            let samples =
                poisson_kernels(&model, &quad, &pole, KernelMode::ClosedForm).unwrap();
            let mut out = Vec::new();
            for c in &centers {
                for &r in &radii {
                    let ball = surface_ball(&quad, c, r).unwrap();
                    for p in [2.0, 3.0] {
                        let rh =
                            reverse_holder(&samples, &quad, &ball, p, KernelWeighting::HorizontalK)
                                .unwrap();
                        assert!(rh.ratio.is_finite());
                        assert!(rh.ratio >= 1.0 - 1e-12, "Jensen violated: {}", rh.ratio);
                        out.push(rh.ratio);
                    }
                }
            }
            out
        };
        let coarse = run(100);
        let fine = run(200);
        for (a, b) in coarse.iter().zip(&fine) {
            assert!(
                (a - b).abs() / b < 0.10,
                "ratio unstable under quadrature doubling: {a} vs {b}"
            );
        }
    }

    #[test]
    fn representation_recovers_harmonic_extensions() {
        let (model, quad) = setup(160);
        let pole = Point::origin(1);
        let samples = poisson_kernels(&model, &quad, &pole, KernelMode::ClosedForm).unwrap();
        let one = crate::field::FnField::new(|_: &Point| 1.0);
        let t14 = LinearField::t_plus(1, 0.25);
        let x11 = LinearField::x1_plus(1, 1.0);
        let cases: [(&dyn ScalarField<f64>, f64); 3] = [(&one, 1.0), (&t14, 0.25), (&x11, 1.0)];
        for (f, want) in cases {
            let got = represent_solution(&samples, &quad, f).unwrap();
            assert!(
                (got - want).abs() <= 0.02 * want.abs(),
                "∫fK dσ_X = {got}, expected {want} ± 2%"
            );
        }
    }

    #[test]
    fn grid_mode_reproduces_the_mass_off_center() {
        let model = Model::calibrated(1).unwrap();
        let ball = gauge_ball(&model, &Point::origin(1), 1.0).unwrap();
        let pole = Point::from_xyt(0.3, 0.0, 0.0);
        let green = green_function(&ball, &pole, [81, 81, 81], &SolverParams::default()).unwrap();
        let quad = build_quadrature(&ball, 100).unwrap();
        let samples =
            poisson_kernels(&model, &quad, &pole, KernelMode::Grid(&green)).unwrap();
        let (mass_p, mass_k) = total_mass(&samples, &quad).unwrap();
        assert!(
            (mass_k - 1.0).abs() < 0.05,
            "grid-mode ∫K dσ_X = {mass_k}, expected 1 ± 5%"
        );
        assert!(
            (mass_p - 1.0).abs() < 0.05,
            "grid-mode ∫P dσ = {mass_p}, expected 1 ± 5%"
        );
        for s in &samples {
            // Differencing noise concentrates where W → 0 (near the
            // characteristic poles, where the true K also vanishes); away
            // from them the kernel stays positive.
            assert!(s.k_kernel >= -0.05, "grid-mode K = {}", s.k_kernel);
            if s.w > 0.2 {
                assert!(s.k_kernel > -1e-3, "K = {} at W = {}", s.k_kernel, s.w);
            }
            assert!(
                (s.p_kernel - s.k_kernel * s.w).abs() <= 1e-10 * (1.0 + s.p_kernel.abs())
            );
        }
    }

    #[test]
    fn mode_misuse_is_rejected() {
        let (model, quad) = setup(40);
        // Closed form demands a centered ball: an off-center pole sees a
        // non-constant Γ on the boundary.
        let off = Point::from_xyt(0.3, 0.0, 0.0);
        assert!(poisson_kernels(&model, &quad, &off, KernelMode::ClosedForm).is_err());
        // Grid mode demands the matching pole.
        let ball = gauge_ball(&model, &Point::origin(1), 1.0).unwrap();
        let green = green_function(&ball, &off, [25, 25, 25], &SolverParams::default()).unwrap();
        assert!(
            poisson_kernels(&model, &quad, &Point::origin(1), KernelMode::Grid(&green)).is_err()
        );
        // Exterior pole.
        let far = Point::from_xyt(2.0, 0.0, 0.0);
        assert!(poisson_kernels(&model, &quad, &far, KernelMode::ClosedForm).is_err());
    }

    #[test]
    fn bound_constant_is_finite_and_positive() {
        let (model, quad) = setup(80);
        let pole = Point::origin(1);
        let samples = poisson_kernels(&model, &quad, &pole, KernelMode::ClosedForm).unwrap();
        let c = kernel_bound_constant(&samples, &quad, &pole).unwrap();
        assert!(c.is_finite() && c > 0.0, "bound constant = {c}");
    }

    #[test]
    fn reverse_holder_rejects_bad_inputs() {
        let (model, quad) = setup(40);
        let samples =
            poisson_kernels(&model, &quad, &Point::origin(1), KernelMode::ClosedForm).unwrap();
        let ball = surface_ball(&quad, &Point::from_xyt(1.0, 0.0, 0.0), 0.3).unwrap();
        assert!(
            reverse_holder(&samples, &quad, &ball, 1.0, KernelWeighting::HorizontalK).is_err()
        );
        let empty = surface_ball(&quad, &Point::from_xyt(1.0, 0.0, 0.0), 1e-6).unwrap();
        assert!(
            reverse_holder(&samples, &quad, &empty, 2.0, KernelWeighting::HorizontalK).is_err()
        );
    }
}
