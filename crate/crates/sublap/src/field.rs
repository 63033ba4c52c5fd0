//! Scalar fields on H^n with optional analytic derivatives.
//!
//! Operators ([`crate::hgroup::x_gradient`], [`crate::hgroup::kohn_laplacian`],
//! the grid assembly, the mean-value functionals) consume values through the
//! [`ScalarField`] trait. A field may supply closed-form ambient gradients and
//! Hessians (layout x_1..x_n, y_1..y_n, t; Hessians row-major); when it does
//! not, the operators fall back to Richardson-extrapolated central finite
//! differences.

use crate::error::Error;
use crate::hgroup::{
    gauge, gauge4, gauge_gradient, gauge_hessian, group_inv, group_mul, GPoint, HModel,
};
use crate::scalar::Scalar;

/// A real-valued field on H^n.
///
/// `gradient`/`hessian` return `None` when no closed form is available; the
/// free functions [`gradient_or_fd`] and [`hessian_or_fd`] then substitute
/// finite differences. Fields with gauge-type singularities document their
/// pole behaviour; callers keep quadrature nodes and solver evaluation points
/// away from poles.
pub trait ScalarField<S: Scalar>: Sync {
    /// Field value at `p`.
    fn value(&self, p: &GPoint<S>) -> S;

    /// Ambient gradient (length 2n+1), if available in closed form.
    fn gradient(&self, p: &GPoint<S>) -> Option<Vec<S>> {
        let _ = p;
        None
    }

    /// Ambient Hessian (row-major, (2n+1)²), if available in closed form.
    fn hessian(&self, p: &GPoint<S>) -> Option<Vec<S>> {
        let _ = p;
        None
    }
}

impl<S: Scalar, F: ScalarField<S> + ?Sized> ScalarField<S> for &F {
    fn value(&self, p: &GPoint<S>) -> S {
        (**self).value(p)
    }
    fn gradient(&self, p: &GPoint<S>) -> Option<Vec<S>> {
        (**self).gradient(p)
    }
    fn hessian(&self, p: &GPoint<S>) -> Option<Vec<S>> {
        (**self).hessian(p)
    }
}

impl<S: Scalar> ScalarField<S> for Box<dyn ScalarField<S> + Send + Sync> {
    fn value(&self, p: &GPoint<S>) -> S {
        (**self).value(p)
    }
    fn gradient(&self, p: &GPoint<S>) -> Option<Vec<S>> {
        (**self).gradient(p)
    }
    fn hessian(&self, p: &GPoint<S>) -> Option<Vec<S>> {
        (**self).hessian(p)
    }
}

/// Central difference of `f` along ambient coordinate `i` with step `h`.
fn central_diff<S: Scalar, F: ScalarField<S> + ?Sized>(
    f: &F,
    p: &GPoint<S>,
    i: usize,
    h: S,
) -> S {
    let mut plus = p.clone();
    *plus.coord_mut(i) += h;
    let mut minus = p.clone();
    *minus.coord_mut(i) -= h;
    (f.value(&plus) - f.value(&minus)) / (S::real(2.0) * h)
}

/// Ambient gradient: analytic if available, otherwise Richardson-extrapolated
/// central differences, (4 D_{h/2} − D_h)/3 with h ≈ ε^{1/5} per coordinate.
pub fn gradient_or_fd<S: Scalar, F: ScalarField<S> + ?Sized>(f: &F, p: &GPoint<S>) -> Vec<S> {
    if let Some(g) = f.gradient(p) {
        return g;
    }
    let dim = p.ambient_dim();
    let base = S::epsilon().powf(S::real(0.2));
    (0..dim)
        .map(|i| {
            let h = base * (S::one() + p.coord(i).abs());
            let d1 = central_diff(f, p, i, h);
            let d2 = central_diff(f, p, i, h * S::real(0.5));
            (S::real(4.0) * d2 - d1) / S::real(3.0)
        })
        .collect()
}

/// Second central difference along coordinate `i` with step `h`.
fn second_diff<S: Scalar, F: ScalarField<S> + ?Sized>(
    f: &F,
    p: &GPoint<S>,
    i: usize,
    h: S,
    f0: S,
) -> S {
    let mut plus = p.clone();
    *plus.coord_mut(i) += h;
    let mut minus = p.clone();
    *minus.coord_mut(i) -= h;
    (f.value(&plus) - S::real(2.0) * f0 + f.value(&minus)) / (h * h)
}

/// Mixed central difference ∂²f/∂i∂j with step `h` (four corners).
fn mixed_diff<S: Scalar, F: ScalarField<S> + ?Sized>(
    f: &F,
    p: &GPoint<S>,
    i: usize,
    j: usize,
    h: S,
) -> S {
    let eval = |si: S, sj: S| {
        let mut q = p.clone();
        *q.coord_mut(i) += si * h;
        *q.coord_mut(j) += sj * h;
        f.value(&q)
    };
    let one = S::one();
    (eval(one, one) - eval(one, -one) - eval(-one, one) + eval(-one, -one))
        / (S::real(4.0) * h * h)
}

/// Ambient Hessian: analytic when available; otherwise differences of the
/// analytic gradient when the field has one; otherwise value-based second
/// differences. Both fallbacks are Richardson-extrapolated and symmetrized.
pub fn hessian_or_fd<S: Scalar, F: ScalarField<S> + ?Sized>(f: &F, p: &GPoint<S>) -> Vec<S> {
    if let Some(h) = f.hessian(p) {
        return h;
    }
    let dim = p.ambient_dim();
    if f.gradient(p).is_some() {
        // Rows from Richardson central differences of the analytic gradient.
        let base = S::epsilon().powf(S::real(0.2));
        let grad_at = |q: &GPoint<S>| f.gradient(q).expect("gradient availability probed above");
        let mut hess = vec![S::zero(); dim * dim];
        for i in 0..dim {
            let h = base * (S::one() + p.coord(i).abs());
            let row_at = |step: S| -> Vec<S> {
                let mut plus = p.clone();
                *plus.coord_mut(i) += step;
                let mut minus = p.clone();
                *minus.coord_mut(i) -= step;
                let gp = grad_at(&plus);
                let gm = grad_at(&minus);
                gp.iter()
                    .zip(gm.iter())
                    .map(|(a, b)| (*a - *b) / (S::real(2.0) * step))
                    .collect()
            };
            let r1 = row_at(h);
            let r2 = row_at(h * S::real(0.5));
            for j in 0..dim {
                hess[i * dim + j] = (S::real(4.0) * r2[j] - r1[j]) / S::real(3.0);
            }
        }
        // Symmetrize: the true Hessian is symmetric, FD rows differ by O(h⁴).
        for i in 0..dim {
            for j in (i + 1)..dim {
                let avg = (hess[i * dim + j] + hess[j * dim + i]) * S::real(0.5);
                hess[i * dim + j] = avg;
                hess[j * dim + i] = avg;
            }
        }
        return hess;
    }
    // Value-based second differences with Richardson in h.
    let base = S::epsilon().powf(S::real(1.0 / 6.0));
    let f0 = f.value(p);
    let mut hess = vec![S::zero(); dim * dim];
    for i in 0..dim {
        let h = base * (S::one() + p.coord(i).abs());
        let d1 = second_diff(f, p, i, h, f0);
        let d2 = second_diff(f, p, i, h * S::real(0.5), f0);
        hess[i * dim + i] = (S::real(4.0) * d2 - d1) / S::real(3.0);
        for j in (i + 1)..dim {
            let hj = base * (S::one() + p.coord(j).abs());
            let hm = (h * hj).sqrt();
            let m1 = mixed_diff(f, p, i, j, hm);
            let m2 = mixed_diff(f, p, i, j, hm * S::real(0.5));
            let v = (S::real(4.0) * m2 - m1) / S::real(3.0);
            hess[i * dim + j] = v;
            hess[j * dim + i] = v;
        }
    }
    hess
}

// ---------------------------------------------------------------------------
// Concrete fields.
// ---------------------------------------------------------------------------

/// Field from closures, with optional closed-form derivatives.
pub struct FnField<S> {
    value: Box<dyn Fn(&GPoint<S>) -> S + Send + Sync>,
    gradient: Option<Box<dyn Fn(&GPoint<S>) -> Vec<S> + Send + Sync>>,
    hessian: Option<Box<dyn Fn(&GPoint<S>) -> Vec<S> + Send + Sync>>,
}

impl<S: Scalar> FnField<S> {
    /// Value-only field (derivatives via finite differences).
    pub fn new(value: impl Fn(&GPoint<S>) -> S + Send + Sync + 'static) -> Self {
        Self {
            value: Box::new(value),
            gradient: None,
            hessian: None,
        }
    }

    /// Attaches an analytic gradient.
    pub fn with_gradient(
        mut self,
        gradient: impl Fn(&GPoint<S>) -> Vec<S> + Send + Sync + 'static,
    ) -> Self {
        self.gradient = Some(Box::new(gradient));
        self
    }

    /// Attaches an analytic Hessian (row-major).
    pub fn with_hessian(
        mut self,
        hessian: impl Fn(&GPoint<S>) -> Vec<S> + Send + Sync + 'static,
    ) -> Self {
        self.hessian = Some(Box::new(hessian));
        self
    }
}

impl<S: Scalar> ScalarField<S> for FnField<S> {
    fn value(&self, p: &GPoint<S>) -> S {
        (self.value)(p)
    }
    fn gradient(&self, p: &GPoint<S>) -> Option<Vec<S>> {
        self.gradient.as_ref().map(|g| g(p))
    }
    fn hessian(&self, p: &GPoint<S>) -> Option<Vec<S>> {
        self.hessian.as_ref().map(|h| h(p))
    }
}

/// Affine field c + Σ a_i p_i (ambient layout).
#[derive(Debug, Clone)]
pub struct LinearField<S> {
    /// Ambient coefficients, length 2n + 1.
    pub coeffs: Vec<S>,
    /// Constant offset.
    pub offset: S,
}

impl<S: Scalar> LinearField<S> {
    /// Builds the affine field offset + ⟨coeffs, ·⟩.
    pub fn new(coeffs: Vec<S>, offset: S) -> Self {
        Self { coeffs, offset }
    }

    /// The L-harmonic coordinate field t + c on H^n.
    pub fn t_plus(n: usize, c: S) -> Self {
        let mut coeffs = vec![S::zero(); 2 * n + 1];
        coeffs[2 * n] = S::one();
        Self { coeffs, offset: c }
    }

    /// The L-harmonic coordinate field x_1 + c on H^n.
    pub fn x1_plus(n: usize, c: S) -> Self {
        let mut coeffs = vec![S::zero(); 2 * n + 1];
        coeffs[0] = S::one();
        Self { coeffs, offset: c }
    }
}

impl<S: Scalar> ScalarField<S> for LinearField<S> {
    fn value(&self, p: &GPoint<S>) -> S {
        let mut acc = self.offset;
        for (i, c) in self.coeffs.iter().enumerate() {
            acc += *c * p.coord(i);
        }
        acc
    }
    fn gradient(&self, _p: &GPoint<S>) -> Option<Vec<S>> {
        Some(self.coeffs.clone())
    }
    fn hessian(&self, p: &GPoint<S>) -> Option<Vec<S>> {
        let dim = p.ambient_dim();
        Some(vec![S::zero(); dim * dim])
    }
}

/// Quadratic field pᵀ A p + bᵀ p + c with A given row-major (not assumed
/// symmetric; the gradient uses A + Aᵀ).
#[derive(Debug, Clone)]
pub struct QuadraticField<S> {
    /// Quadratic form, row-major (2n+1)².
    pub a: Vec<S>,
    /// Linear part, length 2n+1.
    pub b: Vec<S>,
    /// Constant part.
    pub c: S,
}

impl<S: Scalar> QuadraticField<S> {
    /// Builds the quadratic field pᵀAp + bᵀp + c.
    pub fn new(a: Vec<S>, b: Vec<S>, c: S) -> Self {
        Self { a, b, c }
    }

    /// Dimension derived from the linear part.
    fn dim(&self) -> usize {
        self.b.len()
    }
}

impl<S: Scalar> ScalarField<S> for QuadraticField<S> {
    fn value(&self, p: &GPoint<S>) -> S {
        let dim = self.dim();
        let mut acc = self.c;
        for i in 0..dim {
            acc += self.b[i] * p.coord(i);
            for j in 0..dim {
                acc += self.a[i * dim + j] * p.coord(i) * p.coord(j);
            }
        }
        acc
    }
    fn gradient(&self, p: &GPoint<S>) -> Option<Vec<S>> {
        let dim = self.dim();
        let mut g = self.b.clone();
        for i in 0..dim {
            for j in 0..dim {
                g[i] += (self.a[i * dim + j] + self.a[j * dim + i]) * p.coord(j);
            }
        }
        Some(g)
    }
    fn hessian(&self, _p: &GPoint<S>) -> Option<Vec<S>> {
        let dim = self.dim();
        let mut h = vec![S::zero(); dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                h[i * dim + j] = self.a[i * dim + j] + self.a[j * dim + i];
            }
        }
        Some(h)
    }
}

/// Power of the gauge, coef · N^a, with fully analytic derivatives away from
/// the pole:
/// D(N^a) = a N^{a−1} DN, D²(N^a) = a (a−1) N^{a−2} DN⊗DN + a N^{a−1} D²N.
///
/// At the pole the value is the natural limit of coef · N^a; derivative
/// formulas return zeros there (correct for even integer a ≥ 4; callers
/// evaluating singular powers keep away from the pole).
#[derive(Debug, Clone)]
pub struct GaugePowerField<S> {
    /// Multiplicative coefficient.
    pub coef: S,
    /// Gauge exponent.
    pub exponent: S,
}

impl<S: Scalar> GaugePowerField<S> {
    /// coef · N^a.
    pub fn new(coef: S, exponent: S) -> Self {
        Self { coef, exponent }
    }

    /// The fundamental solution Γ = c_Q N^{2−Q} of the given model.
    pub fn gamma(model: &HModel<S>) -> Self {
        Self {
            coef: model.c_q(),
            exponent: S::of_i32(2 - model.q() as i32),
        }
    }
}

impl<S: Scalar> ScalarField<S> for GaugePowerField<S> {
    fn value(&self, p: &GPoint<S>) -> S {
        self.coef * gauge(p).powf(self.exponent)
    }
    fn gradient(&self, p: &GPoint<S>) -> Option<Vec<S>> {
        let dim = p.ambient_dim();
        if gauge4(p) == S::zero() {
            return Some(vec![S::zero(); dim]);
        }
        let nval = gauge(p);
        let scale = self.coef * self.exponent * nval.powf(self.exponent - S::one());
        let dn = gauge_gradient(p).expect("off-pole by the check above");
        Some(dn.into_iter().map(|g| g * scale).collect())
    }
    fn hessian(&self, p: &GPoint<S>) -> Option<Vec<S>> {
        let dim = p.ambient_dim();
        if gauge4(p) == S::zero() {
            return Some(vec![S::zero(); dim * dim]);
        }
        let nval = gauge(p);
        let a = self.exponent;
        let s1 = self.coef * a * (a - S::one()) * nval.powf(a - S::real(2.0));
        let s2 = self.coef * a * nval.powf(a - S::one());
        let dn = gauge_gradient(p).expect("off-pole by the check above");
        let d2n = gauge_hessian(p).expect("off-pole by the check above");
        let mut hess = vec![S::zero(); dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                hess[i * dim + j] = s1 * dn[i] * dn[j] + s2 * d2n[i * dim + j];
            }
        }
        Some(hess)
    }
}

/// Left translate of a field: (L_g f)(p) = f(g^{-1} ∘ p) for g = `pole`.
///
/// Left translation is an affine map of the ambient coordinates with constant
/// Jacobian J (unit determinant). The chain rule pulls derivatives back
/// through J: note J is NOT the identity — the full Euclidean gradient of a
/// translated field picks up ±(pole coordinate)/2 mixing into the t-slot,
/// even though the horizontal frame itself is left-invariant.
pub struct LeftTranslatedField<S, F> {
    pole: GPoint<S>,
    pole_inv: GPoint<S>,
    inner: F,
}

impl<S: Scalar, F: ScalarField<S>> LeftTranslatedField<S, F> {
    /// Centers `inner` at `pole`: the new field's special point (e.g. a
    /// fundamental-solution singularity at the identity) moves to `pole`.
    pub fn new(pole: GPoint<S>, inner: F) -> Self {
        let pole_inv = group_inv(&pole);
        Self {
            pole,
            pole_inv,
            inner,
        }
    }

    /// The translation pole g.
    pub fn pole(&self) -> &GPoint<S> {
        &self.pole
    }

    /// w(p) = pole^{-1} ∘ p.
    pub fn pulled_back(&self, p: &GPoint<S>) -> GPoint<S> {
        group_mul(&self.pole_inv, p).expect("pole and argument share n by construction")
    }

    /// Row J[t][b] of the translation Jacobian for b < 2n:
    /// ∂w_t/∂p_{x_j} = +pole_y[j]/2, ∂w_t/∂p_{y_j} = −pole_x[j]/2.
    fn j_t_row(&self, b: usize) -> S {
        let n = self.pole.n();
        let half = S::real(0.5);
        if b < n {
            half * self.pole.y[b]
        } else if b < 2 * n {
            -half * self.pole.x[b - n]
        } else {
            S::one()
        }
    }
}

impl<S: Scalar, F: ScalarField<S>> ScalarField<S> for LeftTranslatedField<S, F> {
    fn value(&self, p: &GPoint<S>) -> S {
        self.inner.value(&self.pulled_back(p))
    }

    fn gradient(&self, p: &GPoint<S>) -> Option<Vec<S>> {
        let w = self.pulled_back(p);
        let gw = self.inner.gradient(&w)?;
        let dim = p.ambient_dim();
        let gt = gw[dim - 1];
        Some(
            (0..dim)
                .map(|b| {
                    if b + 1 == dim {
                        gt
                    } else {
                        gw[b] + self.j_t_row(b) * gt
                    }
                })
                .collect(),
        )
    }

    fn hessian(&self, p: &GPoint<S>) -> Option<Vec<S>> {
        let w = self.pulled_back(p);
        let hw = self.inner.hessian(&w)?;
        let dim = p.ambient_dim();
        let ti = dim - 1;
        // H_p = Jᵀ H_w J with J = identity except the t-row.
        let mut h1 = vec![S::zero(); dim * dim]; // Jᵀ H_w
        for b in 0..dim {
            let jb = if b == ti { S::zero() } else { self.j_t_row(b) };
            for d in 0..dim {
                let mut v = hw[b * dim + d];
                if b != ti {
                    v += jb * hw[ti * dim + d];
                }
                h1[b * dim + d] = v;
            }
        }
        let mut hp = vec![S::zero(); dim * dim]; // (Jᵀ H_w) J
        for b in 0..dim {
            for c in 0..dim {
                let mut v = h1[b * dim + c];
                if c != ti {
                    v += h1[b * dim + ti] * self.j_t_row(c);
                }
                hp[b * dim + c] = v;
            }
        }
        Some(hp)
    }
}

/// Fundamental solution with pole at `pole`: Γ(pole, ·) = Γ(pole^{-1} ∘ ·).
pub fn pole_gamma<S: Scalar>(
    model: &HModel<S>,
    pole: GPoint<S>,
) -> Result<LeftTranslatedField<S, GaugePowerField<S>>, Error> {
    if pole.n() != model.n() {
        return Err(Error::DimensionMismatch(format!(
            "pole in H^{}, model is H^{}",
            pole.n(),
            model.n()
        )));
    }
    Ok(LeftTranslatedField::new(pole, GaugePowerField::gamma(model)))
}
