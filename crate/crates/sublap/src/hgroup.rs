//! The Heisenberg group H^n and its gauge-potential machinery.
//!
//! Points carry coordinates (x, y, t) ∈ R^n × R^n × R with the group law
//!
//! ```text
//! (x, y, t) ∘ (x', y', t') = (x + x', y + y', t + t' + ½ Σ_j (x_j y'_j − y_j x'_j)),
//! ```
//!
//! anisotropic dilations δ_λ(z, t) = (λz, λ²t) with homogeneous dimension
//! Q = 2n + 2, and the left-invariant horizontal frame
//!
//! ```text
//! X_j     = ∂x_j − (y_j / 2) ∂t,      j = 1..n,
//! X_{n+j} = ∂y_j + (x_j / 2) ∂t,
//! ```
//!
//! whose only nontrivial brackets are [X_j, X_{n+j}] = ∂t. The Kohn
//! sub-Laplacian is L = Σ_j X_j² (a pure second-order form: the frame's
//! integral curves are straight lines, so X_j applied to its own coefficients
//! vanishes).
//!
//! The homogeneous gauge is N(z, t) = (|z|⁴ + 16 t²)^{1/4}. Its key exact
//! identities, used throughout:
//!
//! * |∇_H N|² = ψ = |z|² / N²   (the angular degeneracy function, 0 at the
//!   poles z = 0, 1 on the equator t = 0);
//! * |DN| = √(|z|⁶ + 64 t²) / N³   (full Euclidean gradient norm);
//! * L N = (Q − 1) ψ / N  away from the pole, and more generally for radial
//!   compositions L (f∘N) = ψ [f″(N) + (Q − 1) f′(N)/N];
//! * Γ = c_Q N^{2−Q} is the fundamental solution of −L with pole at the
//!   identity; the group constant c_Q is produced by [`normalize_cq`].

use crate::error::{Error, Result};
use crate::field::{gradient_or_fd, hessian_or_fd, ScalarField};
use crate::scalar::Scalar;
use crate::util::integrate_refine;

/// A point of H^n in coordinates (x, y, t), x, y ∈ R^n.
///
/// Ambient (Euclidean) coordinates are flattened in the order
/// (x_1..x_n, y_1..y_n, t); gradients and Hessians returned by this crate use
/// that layout.
#[derive(Debug, Clone, PartialEq)]
pub struct GPoint<S> {
    /// First horizontal block, length n.
    pub x: Vec<S>,
    /// Second horizontal block, length n.
    pub y: Vec<S>,
    /// Vertical (center) coordinate.
    pub t: S,
}

impl<S: Scalar> GPoint<S> {
    /// Builds a point, checking that the two horizontal blocks agree in length.
    pub fn new(x: Vec<S>, y: Vec<S>, t: S) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "horizontal blocks must have equal length, got {} and {}",
                x.len(),
                y.len()
            )));
        }
        if x.is_empty() {
            return Err(Error::InvalidParameter(
                "a Heisenberg point needs n >= 1".into(),
            ));
        }
        Ok(Self { x, y, t })
    }

    /// The group identity of H^n.
    pub fn origin(n: usize) -> Self {
        Self {
            x: vec![S::zero(); n],
            y: vec![S::zero(); n],
            t: S::zero(),
        }
    }

    /// Convenience constructor for H^1 points (x, y, t).
    pub fn from_xyt(x: S, y: S, t: S) -> Self {
        Self {
            x: vec![x],
            y: vec![y],
            t,
        }
    }

    /// The layer index n.
    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Ambient (topological) dimension 2n + 1.
    pub fn ambient_dim(&self) -> usize {
        2 * self.n() + 1
    }

    /// |z|² = Σ x_j² + Σ y_j².
    pub fn z_norm_sq(&self) -> S {
        let sx: S = self.x.iter().map(|v| *v * *v).sum();
        let sy: S = self.y.iter().map(|v| *v * *v).sum();
        sx + sy
    }

    /// Ambient coordinate by flat index: x_0..x_{n-1}, y_0..y_{n-1}, t.
    pub fn coord(&self, i: usize) -> S {
        let n = self.n();
        if i < n {
            self.x[i]
        } else if i < 2 * n {
            self.y[i - n]
        } else if i == 2 * n {
            self.t
        } else {
            panic!("ambient index {i} out of range for n = {n}");
        }
    }

    /// Mutable ambient coordinate by flat index.
    pub fn coord_mut(&mut self, i: usize) -> &mut S {
        let n = self.n();
        if i < n {
            &mut self.x[i]
        } else if i < 2 * n {
            &mut self.y[i - n]
        } else if i == 2 * n {
            &mut self.t
        } else {
            panic!("ambient index {i} out of range for n = {n}");
        }
    }

    /// Flattened ambient coordinates (x.., y.., t).
    pub fn to_flat(&self) -> Vec<S> {
        let mut v = Vec::with_capacity(self.ambient_dim());
        v.extend_from_slice(&self.x);
        v.extend_from_slice(&self.y);
        v.push(self.t);
        v
    }

    /// Rebuilds a point from flattened ambient coordinates (length 2n + 1).
    pub fn from_flat(flat: &[S]) -> Result<Self> {
        if flat.len() % 2 == 0 || flat.len() < 3 {
            return Err(Error::DimensionMismatch(format!(
                "flat coordinate slice must have odd length >= 3, got {}",
                flat.len()
            )));
        }
        let n = flat.len() / 2;
        Ok(Self {
            x: flat[..n].to_vec(),
            y: flat[n..2 * n].to_vec(),
            t: flat[2 * n],
        })
    }

    /// Maximum absolute coordinate difference (test helper; not a group metric).
    pub fn sup_diff(&self, other: &Self) -> S {
        let mut m = (self.t - other.t).abs();
        for j in 0..self.n().min(other.n()) {
            m = m.max((self.x[j] - other.x[j]).abs());
            m = m.max((self.y[j] - other.y[j]).abs());
        }
        m
    }
}

/// Checks that two points live in the same H^n.
fn check_same_n<S: Scalar>(p: &GPoint<S>, q: &GPoint<S>) -> Result<()> {
    if p.n() != q.n() {
        return Err(Error::DimensionMismatch(format!(
            "points live in H^{} and H^{}",
            p.n(),
            q.n()
        )));
    }
    Ok(())
}

/// Group multiplication p ∘ q.
pub fn group_mul<S: Scalar>(p: &GPoint<S>, q: &GPoint<S>) -> Result<GPoint<S>> {
    check_same_n(p, q)?;
    let n = p.n();
    let half = S::real(0.5);
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut t = p.t + q.t;
    for j in 0..n {
        x.push(p.x[j] + q.x[j]);
        y.push(p.y[j] + q.y[j]);
        t += half * (p.x[j] * q.y[j] - p.y[j] * q.x[j]);
    }
    Ok(GPoint { x, y, t })
}

/// Group inverse p^{-1} = (−x, −y, −t).
pub fn group_inv<S: Scalar>(p: &GPoint<S>) -> GPoint<S> {
    GPoint {
        x: p.x.iter().map(|v| -*v).collect(),
        y: p.y.iter().map(|v| -*v).collect(),
        t: -p.t,
    }
}

/// Anisotropic dilation δ_λ(z, t) = (λ z, λ² t).
pub fn dilate<S: Scalar>(p: &GPoint<S>, lambda: S) -> GPoint<S> {
    GPoint {
        x: p.x.iter().map(|v| *v * lambda).collect(),
        y: p.y.iter().map(|v| *v * lambda).collect(),
        t: p.t * lambda * lambda,
    }
}

/// Homogeneous gauge N(z, t) = (|z|⁴ + 16 t²)^{1/4}.
pub fn gauge<S: Scalar>(p: &GPoint<S>) -> S {
    gauge4(p).sqrt().sqrt()
}

/// Fourth power of the gauge, N⁴ = |z|⁴ + 16 t², a polynomial (smooth
/// everywhere, including the poles of the gauge sphere).
pub fn gauge4<S: Scalar>(p: &GPoint<S>) -> S {
    let zsq = p.z_norm_sq();
    zsq * zsq + S::real(16.0) * p.t * p.t
}

/// Gauge quasi-distance d(p, q) = N(p^{-1} ∘ q).
pub fn gauge_dist<S: Scalar>(p: &GPoint<S>, q: &GPoint<S>) -> Result<S> {
    Ok(gauge(&group_mul(&group_inv(p), q)?))
}

/// The left-invariant horizontal frame at `p`, as 2n ambient coefficient
/// vectors of length 2n + 1 (layout x.., y.., t):
/// X_j = e_{x_j} − (y_j/2) e_t and X_{n+j} = e_{y_j} + (x_j/2) e_t.
pub fn horizontal_frame<S: Scalar>(p: &GPoint<S>) -> Vec<Vec<S>> {
    let n = p.n();
    let dim = 2 * n + 1;
    let half = S::real(0.5);
    let mut frame = Vec::with_capacity(2 * n);
    for j in 0..n {
        let mut v = vec![S::zero(); dim];
        v[j] = S::one();
        v[2 * n] = -half * p.y[j];
        frame.push(v);
    }
    for j in 0..n {
        let mut v = vec![S::zero(); dim];
        v[n + j] = S::one();
        v[2 * n] = half * p.x[j];
        frame.push(v);
    }
    frame
}

/// A horizontal vector: 2n frame coefficients (the values X_1 f, …, X_{2n} f
/// for a gradient, or frame components of a section of the horizontal bundle).
#[derive(Debug, Clone, PartialEq)]
pub struct HVector<S>(pub Vec<S>);

impl<S: Scalar> HVector<S> {
    /// Number of frame components (2n).
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// True when there are no components (never for valid construction).
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Squared Euclidean norm of the frame coefficients.
    pub fn norm_sq(&self) -> S {
        self.0.iter().map(|c| *c * *c).sum()
    }

    /// Euclidean norm of the frame coefficients.
    pub fn norm(&self) -> S {
        self.norm_sq().sqrt()
    }

    /// Inner product with another horizontal vector.
    pub fn dot(&self, other: &Self) -> S {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| *a * *b)
            .sum()
    }
}

/// Contracts an ambient gradient (length 2n + 1) with the frame at `p`,
/// producing the 2n horizontal components.
pub fn contract_with_frame<S: Scalar>(p: &GPoint<S>, ambient_grad: &[S]) -> Result<HVector<S>> {
    let n = p.n();
    if ambient_grad.len() != 2 * n + 1 {
        return Err(Error::DimensionMismatch(format!(
            "ambient gradient has length {}, expected {}",
            ambient_grad.len(),
            2 * n + 1
        )));
    }
    let half = S::real(0.5);
    let gt = ambient_grad[2 * n];
    let mut comps = Vec::with_capacity(2 * n);
    for j in 0..n {
        comps.push(ambient_grad[j] - half * p.y[j] * gt);
    }
    for j in 0..n {
        comps.push(ambient_grad[n + j] + half * p.x[j] * gt);
    }
    Ok(HVector(comps))
}

/// Horizontal gradient ∇_H f(p) = (X_1 f, …, X_{2n} f), using the field's
/// analytic gradient when available and a Richardson finite difference
/// otherwise.
pub fn x_gradient<S: Scalar, F: ScalarField<S> + ?Sized>(f: &F, p: &GPoint<S>) -> Result<HVector<S>> {
    let grad = gradient_or_fd(f, p);
    contract_with_frame(p, &grad)
}

/// Kohn sub-Laplacian L f(p) = Σ_j X_j² f(p).
///
/// Because the frame's own-direction coefficient derivatives vanish, this is
/// the pure second-order contraction Σ_j v_jᵀ (D²f) v_j over the frame
/// vectors; the Hessian comes from the field or a finite-difference fallback.
pub fn kohn_laplacian<S: Scalar, F: ScalarField<S> + ?Sized>(f: &F, p: &GPoint<S>) -> Result<S> {
    let n = p.n();
    let dim = 2 * n + 1;
    let hess = hessian_or_fd(f, p);
    if hess.len() != dim * dim {
        return Err(Error::DimensionMismatch(format!(
            "hessian has {} entries, expected {}",
            hess.len(),
            dim * dim
        )));
    }
    let h = |a: usize, b: usize| hess[a * dim + b];
    let half = S::real(0.5);
    let ti = 2 * n;
    let mut acc = S::zero();
    for j in 0..n {
        // X_j = e_{x_j} − (y_j/2) e_t
        let c = -half * p.y[j];
        acc += h(j, j) + c * (h(j, ti) + h(ti, j)) + c * c * h(ti, ti);
        // X_{n+j} = e_{y_j} + (x_j/2) e_t
        let d = half * p.x[j];
        acc += h(n + j, n + j) + d * (h(n + j, ti) + h(ti, n + j)) + d * d * h(ti, ti);
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Closed-form gauge derivatives.
// ---------------------------------------------------------------------------

/// Ambient gradient of N⁴ (length 2n + 1): (4|z|²x_j, 4|z|²y_j, 32 t).
pub fn gauge4_gradient<S: Scalar>(p: &GPoint<S>) -> Vec<S> {
    let n = p.n();
    let zsq = p.z_norm_sq();
    let four = S::real(4.0);
    let mut g = Vec::with_capacity(2 * n + 1);
    for j in 0..n {
        g.push(four * zsq * p.x[j]);
    }
    for j in 0..n {
        g.push(four * zsq * p.y[j]);
    }
    g.push(S::real(32.0) * p.t);
    g
}

/// Ambient Hessian of N⁴, row-major (2n+1)²:
/// ∂²(N⁴) has blocks 8 z_a z_b + 4|z|² δ_ab on the horizontal square,
/// zero mixed z–t entries, and 32 in the (t, t) corner.
pub fn gauge4_hessian<S: Scalar>(p: &GPoint<S>) -> Vec<S> {
    let n = p.n();
    let dim = 2 * n + 1;
    let zsq = p.z_norm_sq();
    let four = S::real(4.0);
    let eight = S::real(8.0);
    let z = |a: usize| p.coord(a); // valid for a < 2n
    let mut hess = vec![S::zero(); dim * dim];
    for a in 0..2 * n {
        for b in 0..2 * n {
            let mut v = eight * z(a) * z(b);
            if a == b {
                v += four * zsq;
            }
            hess[a * dim + b] = v;
        }
    }
    hess[(dim - 1) * dim + (dim - 1)] = S::real(32.0);
    hess
}

/// Ambient gradient of the gauge N (length 2n + 1). Errors at the pole.
pub fn gauge_gradient<S: Scalar>(p: &GPoint<S>) -> Result<Vec<S>> {
    let nval = gauge(p);
    if nval == S::zero() {
        return Err(Error::Pole("gauge gradient at N = 0".into()));
    }
    let quarter = S::real(0.25);
    let n3 = nval * nval * nval;
    Ok(gauge4_gradient(p)
        .into_iter()
        .map(|ua| quarter * ua / n3)
        .collect())
}

/// Ambient Hessian of the gauge N, row-major. Errors at the pole.
///
/// With u = N⁴: D²N = ¼ u^{-3/4} D²u − (3/16) u^{-7/4} Du ⊗ Du.
pub fn gauge_hessian<S: Scalar>(p: &GPoint<S>) -> Result<Vec<S>> {
    let u = gauge4(p);
    if u == S::zero() {
        return Err(Error::Pole("gauge hessian at N = 0".into()));
    }
    let dim = p.ambient_dim();
    let nval = u.sqrt().sqrt();
    let n3 = nval * nval * nval;
    let n7 = n3 * n3 * nval;
    let quarter = S::real(0.25);
    let c2 = S::real(3.0 / 16.0);
    let du = gauge4_gradient(p);
    let mut hess = gauge4_hessian(p);
    for a in 0..dim {
        for b in 0..dim {
            let idx = a * dim + b;
            hess[idx] = quarter * hess[idx] / n3 - c2 * du[a] * du[b] / n7;
        }
    }
    Ok(hess)
}

/// Horizontal gradient of the gauge in closed form:
/// X_j N = (|z|² x_j − 4 y_j t)/N³, X_{n+j} N = (|z|² y_j + 4 x_j t)/N³.
pub fn x_grad_gauge<S: Scalar>(p: &GPoint<S>) -> Result<HVector<S>> {
    let nval = gauge(p);
    if nval == S::zero() {
        return Err(Error::Pole("horizontal gauge gradient at N = 0".into()));
    }
    let n = p.n();
    let zsq = p.z_norm_sq();
    let four = S::real(4.0);
    let n3 = nval * nval * nval;
    let mut comps = Vec::with_capacity(2 * n);
    for j in 0..n {
        comps.push((zsq * p.x[j] - four * p.y[j] * p.t) / n3);
    }
    for j in 0..n {
        comps.push((zsq * p.y[j] + four * p.x[j] * p.t) / n3);
    }
    Ok(HVector(comps))
}

/// The degeneracy function ψ(p) = |∇_H N|² = |z|²/N² ∈ [0, 1].
/// Errors at the pole (0/0).
pub fn psi<S: Scalar>(p: &GPoint<S>) -> Result<S> {
    let n2 = gauge4(p).sqrt();
    if n2 == S::zero() {
        return Err(Error::Pole("psi at N = 0".into()));
    }
    Ok(p.z_norm_sq() / n2)
}

/// Full Euclidean gradient norm of the gauge,
/// |DN| = √(|z|⁶ + 64 t²) / N³. Errors at the pole.
pub fn gauge_grad_norm<S: Scalar>(p: &GPoint<S>) -> Result<S> {
    let nval = gauge(p);
    if nval == S::zero() {
        return Err(Error::Pole("|DN| at N = 0".into()));
    }
    let zsq = p.z_norm_sq();
    let num = (zsq * zsq * zsq + S::real(64.0) * p.t * p.t).sqrt();
    Ok(num / (nval * nval * nval))
}

// ---------------------------------------------------------------------------
// Model: homogeneous dimension bookkeeping and the normalization constant.
// ---------------------------------------------------------------------------

/// A calibrated H^n model: the layer index n together with the fundamental
/// solution constant c_Q for Γ = c_Q N^{2−Q}.
#[derive(Debug, Clone, PartialEq)]
pub struct HModel<S> {
    n: usize,
    c_q: S,
}

impl<S: Scalar> HModel<S> {
    /// Builds a model by computing c_Q numerically via [`normalize_cq`].
    pub fn calibrated(n: usize) -> Result<Self> {
        Ok(Self {
            n,
            c_q: normalize_cq(n)?,
        })
    }

    /// Builds a model with an explicitly supplied constant.
    pub fn with_constant(n: usize, c_q: S) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("HModel needs n >= 1".into()));
        }
        if !(c_q > S::zero()) {
            return Err(Error::InvalidParameter(format!(
                "c_Q must be positive, got {c_q}"
            )));
        }
        Ok(Self { n, c_q })
    }

    /// Layer index n.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Homogeneous dimension Q = 2n + 2.
    pub fn q(&self) -> usize {
        2 * self.n + 2
    }

    /// Q as a scalar.
    pub fn q_s(&self) -> S {
        S::of_usize(self.q())
    }

    /// The fundamental-solution constant c_Q.
    pub fn c_q(&self) -> S {
        self.c_q
    }

    /// The group identity in this model's dimension.
    pub fn origin(&self) -> GPoint<S> {
        GPoint::origin(self.n)
    }
}

/// Fundamental solution Γ(p) = c_Q N(p)^{2−Q} of −L with pole at the identity.
/// Errors at the pole.
pub fn fundamental_solution<S: Scalar>(model: &HModel<S>, p: &GPoint<S>) -> Result<S> {
    if p.n() != model.n() {
        return Err(Error::DimensionMismatch(format!(
            "point in H^{}, model is H^{}",
            p.n(),
            model.n()
        )));
    }
    let nval = gauge(p);
    if nval == S::zero() {
        return Err(Error::Pole("fundamental solution at its pole".into()));
    }
    // 2 − Q = −2n: an exact integer power.
    Ok(model.c_q() * nval.powi(-(2 * model.n() as i32)))
}

/// Horizontal gradient of the fundamental solution in closed form:
/// X Γ = c_Q (2 − Q) N^{1−Q} X N. Errors at the pole.
pub fn fundamental_solution_xgrad<S: Scalar>(
    model: &HModel<S>,
    p: &GPoint<S>,
) -> Result<HVector<S>> {
    let nval = gauge(p);
    if nval == S::zero() {
        return Err(Error::Pole("fundamental solution gradient at its pole".into()));
    }
    let q = model.q() as i32;
    let scale = model.c_q() * S::of_i32(2 - q) * nval.powi(1 - q);
    let xg = x_grad_gauge(p)?;
    Ok(HVector(xg.0.into_iter().map(|c| c * scale).collect()))
}

/// Ambient gradient of the fundamental solution, DΓ = c_Q (2−Q) N^{1−Q} DN.
pub fn fundamental_solution_gradient<S: Scalar>(
    model: &HModel<S>,
    p: &GPoint<S>,
) -> Result<Vec<S>> {
    let nval = gauge(p);
    if nval == S::zero() {
        return Err(Error::Pole("fundamental solution gradient at its pole".into()));
    }
    let q = model.q() as i32;
    let scale = model.c_q() * S::of_i32(2 - q) * nval.powi(1 - q);
    Ok(gauge_gradient(p)?.into_iter().map(|g| g * scale).collect())
}

/// Surface area of the unit Euclidean sphere S^{d-1} ⊂ R^d for even d = 2n:
/// |S^{2n−1}| = 2 πⁿ / (n−1)!.
pub fn unit_sphere_area_2n(n: usize) -> f64 {
    let mut fact = 1.0_f64;
    for k in 1..n {
        fact *= k as f64;
    }
    2.0 * std::f64::consts::PI.powi(n as i32) / fact
}

/// Numerically computes the fundamental-solution constant c_Q by quadrature of
/// the mean-value mass over the unit gauge sphere.
///
/// With the unnormalized kernel Γ̃ = N^{2−Q}, the surface integral
/// m̃ = ∮_{∂B(e,1)} |∇_H Γ̃|² / |DΓ̃| dσ must equal 1/c_Q (the mean-value mass
/// is linear in the normalization). The integrand is invariant under the
/// unitary action on z, so the sphere integral reduces exactly to a 1-D
/// profile integral over the latitude u (|z|² = cos u, 4t = sin u on the unit
/// sphere), with surface element
/// dσ = ¼ (cos u)^{n−1} √(4 sin²u + cos³u) |S^{2n−1}| du.
/// ψ and |DN| are evaluated through the gauge machinery at actual sphere
/// points, not through pre-cancelled closed forms; the u-integral is refined
/// to 10⁻¹² relative accuracy.
pub fn normalize_cq<S: Scalar>(n: usize) -> Result<S> {
    if n == 0 {
        return Err(Error::InvalidParameter("normalize_cq needs n >= 1".into()));
    }
    let q = (2 * n + 2) as f64;
    let sphere = unit_sphere_area_2n(n);
    let half_pi = std::f64::consts::FRAC_PI_2;
    let integrand = move |u: f64| -> f64 {
        let c = u.cos().max(0.0);
        // A representative sphere point with z along the first axis.
        let mut p = GPoint::<f64>::origin(n);
        p.x[0] = c.sqrt();
        p.t = u.sin() / 4.0;
        let psi_v = psi(&p).expect("off-pole sphere point");
        let dn = gauge_grad_norm(&p).expect("off-pole sphere point");
        let element = 0.25 * c.powi(n as i32 - 1) * (4.0 * u.sin().powi(2) + c.powi(3)).sqrt();
        (q - 2.0) * (psi_v / dn) * element * sphere
    };
    // The integrand vanishes at the poles like cos^n u; Simpson handles the
    // endpoint values (0) exactly, interior smoothness gives fast refinement.
    let mass = integrate_refine(integrand, -half_pi, half_pi, 1e-12, 64, 18)?;
    if !(mass > 0.0) {
        return Err(Error::Quadrature(format!(
            "mean-value mass must be positive, got {mass}"
        )));
    }
    Ok(S::real(1.0 / mass))
}

/// Closed-form evaluation of the same constant,
/// c_Q = 4 / ((Q−2) |S^{2n−1}| W_n) with W_n = ∫_{−π/2}^{π/2} cosⁿu du,
/// kept as an independent cross-check of [`normalize_cq`].
pub fn c_q_closed_form<S: Scalar>(n: usize) -> Result<S> {
    if n == 0 {
        return Err(Error::InvalidParameter("c_q_closed_form needs n >= 1".into()));
    }
    // W_n by the standard recurrence W_n = W_{n-2} · (n-1)/n, W_0 = π, W_1 = 2.
    let mut w = if n % 2 == 0 {
        std::f64::consts::PI
    } else {
        2.0
    };
    let start = if n % 2 == 0 { 2 } else { 3 };
    let mut k = start;
    while k <= n {
        w *= (k as f64 - 1.0) / k as f64;
        k += 2;
    }
    let q = (2 * n + 2) as f64;
    Ok(S::real(4.0 / ((q - 2.0) * unit_sphere_area_2n(n) * w)))
}
