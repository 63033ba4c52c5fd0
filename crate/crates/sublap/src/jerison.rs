//! The characteristic-point counterexample on the nonconvex cone.
//!
//! The cone Ω_M = {t > M|z|²} (M < 0) carries a nonnegative harmonic
//! function v = N^α·g(τ), τ = 4t/N², that vanishes on ∂Ω_M and is exactly
//! gauge-Hölder of order α at the characteristic vertex — no smoother, even
//! though the domain and data are real analytic. The profile g = g_α is the
//! Gauss hypergeometric function
//!
//!   g_α(τ) = F(−α/2, n + α/2; (n+1)/2; (1−τ)/2),
//!
//! the solution of the Jacobi equation
//!
//!   (1 − τ²)u″ − (n+1)τu′ + α(α+2n)/4·u = 0
//!
//! that is smooth at τ = 1 (the t-axis). It satisfies g(1) = 1, diverges to
//! −∞ as τ → −1⁺, and has a zero τ_α ∈ (−1, 0); the cone slope is the value
//! M with τ ≡ τ_α on ∂Ω_M, i.e. M = τ_α/(4·√(1 − τ_α²)).
//!
//! As α → 0⁺ the zero approaches −1 exponentially fast: 1 + τ_α ≈
//! 2·exp(−2γ − ψ(−α/2) − ψ(n + α/2)), about 4.1e−9 already at α = 0.1,
//! n = 1. Root finding therefore runs in the coordinate s = 1 + τ, which
//! keeps full relative precision near the axis, and the hypergeometric
//! evaluation switches to the logarithmic connection expansion around
//! z = 1 (the c = a + b case, i.e. n = 1) where the power series would
//! need ~1/(1−z) terms.

use crate::error::{Error, Result};
use crate::hgroup::gauge;
use crate::Point;

/// Relative truncation threshold of the hypergeometric series.
const SERIES_REL_TOL: f64 = 1e-16;
/// Series term budget.
const SERIES_MAX_TERMS: usize = 1_000_000;
/// Argument threshold beyond which the near-one expansion takes over.
const NEAR_ONE_SWITCH: f64 = 0.75;
/// Euler–Mascheroni constant γ.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
/// Default base step of the finite-difference Jacobi residual.
pub const JACOBI_FD_STEP: f64 = 4e-4;
/// Smallest s = 1 + τ probed when bracketing the profile zero; roots closer
/// to the axis than this are declared unresolvable in double precision.
const ROOT_S_FLOOR: f64 = 1e-13;
/// Bisection target for |g| at the profile zero.
const ROOT_G_TOL: f64 = 1e-13;

/// Digamma function ψ(x) for non-integer or positive arguments, by upward
/// recurrence into the asymptotic regime.
pub fn digamma(x: f64) -> Result<f64> {
    if !x.is_finite() || (x <= 0.0 && x == x.floor()) {
        return Err(Error::InvalidParameter(format!(
            "digamma has poles at nonpositive integers, got {x}"
        )));
    }
    let mut acc = 0.0f64;
    let mut y = x;
    while y < 20.0 {
        acc -= 1.0 / y;
        y += 1.0;
    }
    // Stirling-type tail; the next omitted term is < 1e−15 once y ≥ 20.
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    let tail = y.ln() - 0.5 * inv
        - inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 / 240.0)));
    Ok(acc + tail)
}

/// Raw Gauss power series Σ (a)_k(b)_k/(c)_k · z^k/k!, truncated when two
/// consecutive terms fall below 1e−16 of the partial sum.
fn hyp2f1_series(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if z == 0.0 {
        return Ok(1.0);
    }
    let mut sum = 1.0f64;
    let mut term = 1.0f64;
    let mut small = 0u8;
    for k in 0..SERIES_MAX_TERMS {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        sum += term;
        if term.abs() <= SERIES_REL_TOL * sum.abs().max(1e-300) {
            small += 1;
            if small >= 2 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::NoConvergence(format!(
        "hypergeometric series did not settle in {SERIES_MAX_TERMS} terms; \
         partial sum {sum:.6e}, last term {term:.3e}"
    )))
}

/// Logarithmic connection expansion of F(a, b; a+b; z) about z = 1, in the
/// variable w = 1 − z (assumed exact), for the case a + b = 1:
///
///   F = sin(πa)/π · Σ_k (a)_k(b)_k/(k!)² · [2ψ(k+1) − ψ(a+k) − ψ(b+k) − ln w] · w^k.
fn hyp2f1_log_near_one(a: f64, b: f64, w: f64) -> Result<f64> {
    let ln_w = w.ln();
    let mut psi_a = digamma(a)?;
    let mut psi_b = digamma(b)?;
    let mut psi_k = -EULER_GAMMA;
    let mut coeff = 1.0f64;
    let mut sum = 0.0f64;
    let mut small = 0u8;
    for k in 0..SERIES_MAX_TERMS {
        let kf = k as f64;
        let term = coeff * (2.0 * psi_k - psi_a - psi_b - ln_w);
        sum += term;
        if term.abs() <= SERIES_REL_TOL * sum.abs().max(1e-300) {
            small += 1;
            if small >= 2 {
                return Ok(a.sin_pi_over_pi() * sum);
            }
        } else {
            small = 0;
        }
        coeff *= (a + kf) * (b + kf) / ((kf + 1.0) * (kf + 1.0)) * w;
        psi_a += 1.0 / (a + kf);
        psi_b += 1.0 / (b + kf);
        psi_k += 1.0 / (kf + 1.0);
    }
    Err(Error::NoConvergence(format!(
        "near-one hypergeometric expansion did not settle; partial sum {sum:.6e}"
    )))
}

trait SinPiOverPi {
    /// sin(πx)/π, the reciprocal of Γ(x)Γ(1−x).
    fn sin_pi_over_pi(self) -> f64;
}

impl SinPiOverPi for f64 {
    fn sin_pi_over_pi(self) -> f64 {
        (std::f64::consts::PI * self).sin() / std::f64::consts::PI
    }
}

/// Gauss hypergeometric function F(a, b; c; z) for |z| < 1 and c not a
/// nonpositive integer. Uses the power series away from 1 and, in the
/// logarithmic case c = a + b = 1, the connection expansion near z = 1;
/// errors (reporting the partial sum) if neither settles within the term
/// budget.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if c <= 0.0 && c == c.floor() {
        return Err(Error::InvalidParameter(format!(
            "hypergeometric c must not be a nonpositive integer, got {c}"
        )));
    }
    if !(z.abs() < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "hypergeometric series needs |z| < 1, got {z}"
        )));
    }
    if z > NEAR_ONE_SWITCH && (c - a - b).abs() < 1e-12 && (c - 1.0).abs() < 1e-12 {
        hyp2f1_log_near_one(a, b, 1.0 - z)
    } else {
        hyp2f1_series(a, b, c, z)
    }
}

fn hyper_params(n: usize, alpha: f64) -> (f64, f64, f64) {
    let nf = n as f64;
    (-alpha / 2.0, nf + alpha / 2.0, (nf + 1.0) / 2.0)
}

/// g_α as a function of s = 1 + τ ∈ (0, 2]: the hypergeometric argument is
/// z = 1 − s/2 and its complement w = s/2 is exact, so the profile keeps
/// full relative precision arbitrarily close to the negative axis (n = 1).
fn g_alpha_s(n: usize, alpha: f64, s: f64) -> Result<f64> {
    if !(s > 0.0 && s <= 2.0) {
        return Err(Error::Domain(format!(
            "profile offset s = 1 + τ must lie in (0, 2], got {s}"
        )));
    }
    let (a, b, c) = hyper_params(n, alpha);
    if s == 2.0 {
        // τ = 1: empty series, exactly 1.
        return Ok(1.0);
    }
    if s < 2.0 * (1.0 - NEAR_ONE_SWITCH) && n == 1 {
        hyp2f1_log_near_one(a, b, s / 2.0)
    } else {
        hyp2f1_series(a, b, c, 1.0 - s / 2.0)
    }
}

/// The profile g_α(τ) = F(−α/2, n + α/2; (n+1)/2; (1−τ)/2), for τ ∈ (−1, 1].
pub fn g_alpha(n: usize, alpha: f64, tau: f64) -> Result<f64> {
    if !(tau > -1.0 && tau <= 1.0) {
        return Err(Error::Domain(format!(
            "profile argument must lie in (−1, 1], got τ = {tau}"
        )));
    }
    g_alpha_s(n, alpha, 1.0 + tau)
}

/// g_α and its first two τ-derivatives, via the contiguous series
/// F′ = (ab/c)·F(a+1, b+1; c+1; ·) and the chain rule dz/dτ = −½.
///
/// The derivative series lose the logarithmic shortcut (their parameters
/// leave the c = a + b case), so τ should stay moderately away from −1.
pub fn g_alpha_derivatives(n: usize, alpha: f64, tau: f64) -> Result<(f64, f64, f64)> {
    let (a, b, c) = hyper_params(n, alpha);
    let z = (1.0 - tau) / 2.0;
    let g = g_alpha(n, alpha, tau)?;
    let (d1, d2) = if tau == 1.0 {
        (a * b / c, a * (a + 1.0) * b * (b + 1.0) / (c * (c + 1.0)))
    } else {
        (
            a * b / c * hyp2f1_series(a + 1.0, b + 1.0, c + 1.0, z)?,
            a * (a + 1.0) * b * (b + 1.0) / (c * (c + 1.0))
                * hyp2f1_series(a + 2.0, b + 2.0, c + 2.0, z)?,
        )
    };
    Ok((g, -d1 / 2.0, d2 / 4.0))
}

/// Residual of the Jacobi equation (1−τ²)u″ − (n+1)τu′ + α(α+2n)/4·u at τ,
/// with u′ and u″ from Richardson-extrapolated central differences at the
/// base step and half of it.
///
/// A single stencil cannot meet a 1e−6 residual everywhere on [−0.9, 0.99]:
/// its rounding floor ~ε·|u|/h² and its truncation ~h²·u⁗ (the fourth
/// derivative blows up like (1+τ)⁻⁴ near the axis) leave no admissible step.
/// The extrapolated pair at 4e−4 keeps both effects below ~1e−8.
pub fn jacobi_residual(
    n: usize,
    alpha: f64,
    u: impl Fn(f64) -> f64,
    tau: f64,
    step: f64,
) -> f64 {
    let nf = n as f64;
    let u0 = u(tau);
    let stencil = |h: f64| {
        let (up, um) = (u(tau + h), u(tau - h));
        ((up - um) / (2.0 * h), (up - 2.0 * u0 + um) / (h * h))
    };
    let (d1_full, d2_full) = stencil(step);
    let (d1_half, d2_half) = stencil(0.5 * step);
    let d1 = (4.0 * d1_half - d1_full) / 3.0;
    let d2 = (4.0 * d2_half - d2_full) / 3.0;
    (1.0 - tau * tau) * d2 - (nf + 1.0) * tau * d1 + alpha * (alpha + 2.0 * nf) / 4.0 * u0
}

/// The degree-zero homogeneous coordinate τ(z, t) = 4t/N² ∈ [−1, 1]:
/// exactly 1 on the positive t-axis, −1 on the negative one, 0 on {t = 0}.
/// Invariant under dilations and under rotations of z. Undefined at the
/// group identity.
pub fn tau(p: &Point) -> Result<f64> {
    let nval = gauge(p);
    if !(nval > 0.0) {
        return Err(Error::Domain(
            "τ is undefined at the group identity".into(),
        ));
    }
    // |4t| ≤ N² pointwise; the clamp only strips roundoff.
    Ok((4.0 * p.t / (nval * nval)).clamp(-1.0, 1.0))
}

/// The computed counterexample at one (n, α): root, cone slope, and the
/// harmonic profile.
#[derive(Debug, Clone, Copy)]
pub struct JerisonSolution {
    n: usize,
    alpha: f64,
    s_alpha: f64,
    m: f64,
    root_residual: f64,
}

impl JerisonSolution {
    /// Underlying group index n.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Hölder exponent α ∈ (0, 1].
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// The profile zero τ_α ∈ (−1, 0): v vanishes on {τ = τ_α}.
    pub fn tau_alpha(&self) -> f64 {
        self.s_alpha - 1.0
    }

    /// Axis offset s_α = 1 + τ_α at full relative precision; for small α
    /// this carries far more information than the rounded τ_α.
    pub fn s_alpha(&self) -> f64 {
        self.s_alpha
    }

    /// |g| achieved at the stored root, evaluated in the s coordinate.
    pub fn root_residual(&self) -> f64 {
        self.root_residual
    }

    /// Cone slope M < 0 with τ ≡ τ_α on ∂Ω_M = {t = M|z|²}.
    pub fn m(&self) -> f64 {
        self.m
    }

    /// Profile value g_α(τ).
    pub fn g(&self, tau: f64) -> Result<f64> {
        g_alpha(self.n, self.alpha, tau)
    }

    /// The harmonic function v(p) = N(p)^α · g_α(τ(p)); errors at the
    /// identity and on the negative t-axis (τ = −1), where g diverges.
    pub fn v(&self, p: &Point) -> Result<f64> {
        let nval = gauge(p);
        if !(nval > 0.0) {
            return Err(Error::Domain(
                "v is undefined at the group identity".into(),
            ));
        }
        let t = tau(p)?;
        if t <= -1.0 + 1e-12 {
            return Err(Error::Domain(
                "v diverges on the negative t-axis (τ = −1)".into(),
            ));
        }
        Ok(nval.powf(self.alpha) * self.g(t)?)
    }

    /// Both sides of the structural identity at p: the finite-difference
    /// value of Σ_j X_j² v (frame-contracted FD Hessian at step `h_fd`) and
    /// the closed form 4ψN^{α−2}·{(1−τ²)g″ − (n+1)τg′ + α(α+2n)/4·g}.
    /// For the root profile both vanish to FD order.
    pub fn identity_at(&self, p: &Point, h_fd: f64) -> Result<(f64, f64)> {
        let (n, alpha) = (self.n, self.alpha);
        let fd = kohn_fd(
            |q| {
                let nval = gauge(q);
                Ok(nval.powf(alpha) * g_alpha(n, alpha, tau(q)?)?)
            },
            p,
            h_fd,
        )?;
        let t = tau(p)?;
        let derivs = g_alpha_derivatives(n, alpha, t)?;
        Ok((fd, jerison_rhs(n, alpha, p, derivs, t)))
    }

    /// Least-squares gauge-Hölder exponent of v along the given samples
    /// (typically a ray into the cone approaching the vertex): the slope of
    /// ln v against ln N. Needs at least 5 samples with v > 0.
    pub fn holder_exponent(&self, samples: &[Point]) -> Result<f64> {
        let pairs: Vec<(f64, f64)> = samples
            .iter()
            .map(|p| -> Result<(f64, f64)> { Ok((gauge(p), self.v(p)?)) })
            .collect::<Result<_>>()?;
        fit_exponent(&pairs)
    }
}

/// Closed-form right-hand side 4ψN^{α−2}·{Jacobi expression} for a profile
/// with values/derivatives (u, u′, u″) at τ; ψ = |z|²/N².
fn jerison_rhs(n: usize, alpha: f64, p: &Point, u: (f64, f64, f64), tau: f64) -> f64 {
    let nf = n as f64;
    let nval = gauge(p);
    let psi = p.z_norm_sq() / (nval * nval);
    let jac = (1.0 - tau * tau) * u.2 - (nf + 1.0) * tau * u.1
        + alpha * (alpha + 2.0 * nf) / 4.0 * u.0;
    4.0 * psi * nval.powf(alpha - 2.0) * jac
}

/// Both sides of the structural identity for an arbitrary profile
/// (u, u′, u″): FD value of Σ_j X_j² (N^α u(τ)) versus the closed form.
pub fn identity_for_profile(
    n: usize,
    alpha: f64,
    u: (&dyn Fn(f64) -> f64, &dyn Fn(f64) -> f64, &dyn Fn(f64) -> f64),
    p: &Point,
    h_fd: f64,
) -> Result<(f64, f64)> {
    let fd = kohn_fd(|q| Ok(gauge(q).powf(alpha) * u.0(tau(q)?)), p, h_fd)?;
    let t = tau(p)?;
    Ok((fd, jerison_rhs(n, alpha, p, (u.0(t), u.1(t), u.2(t)), t)))
}

/// Σ_j X_j² f at p from central second differences of step h: the frame's
/// own-direction coefficients are flat, so the operator is the pure Hessian
/// contraction Hxx + Hyy − y·Hxt + x·Hyt + (x²+y²)/4·Htt (no Hxy term).
fn kohn_fd(f: impl Fn(&Point) -> Result<f64>, p: &Point, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    let at = |dx: f64, dy: f64, dt: f64| f(&Point::from_xyt(p.x[0] + dx, p.y[0] + dy, p.t + dt));
    let f0 = at(0.0, 0.0, 0.0)?;
    let hxx = (at(h, 0.0, 0.0)? - 2.0 * f0 + at(-h, 0.0, 0.0)?) / (h * h);
    let hyy = (at(0.0, h, 0.0)? - 2.0 * f0 + at(0.0, -h, 0.0)?) / (h * h);
    let htt = (at(0.0, 0.0, h)? - 2.0 * f0 + at(0.0, 0.0, -h)?) / (h * h);
    let hxt =
        (at(h, 0.0, h)? - at(h, 0.0, -h)? - at(-h, 0.0, h)? + at(-h, 0.0, -h)?) / (4.0 * h * h);
    let hyt =
        (at(0.0, h, h)? - at(0.0, h, -h)? - at(0.0, -h, h)? + at(0.0, -h, -h)?) / (4.0 * h * h);
    let (x, y) = (p.x[0], p.y[0]);
    Ok(hxx + hyy - y * hxt + x * hyt + (x * x + y * y) / 4.0 * htt)
}

/// Finds the profile zero τ_α ∈ (−1, 0) for α ∈ (0, 1] and packages the
/// cone solution. The zero is bracketed by a geometric scan of s = 1 + τ
/// down to 1e−13 and bisected in s to |g| < 1e−13; working in s keeps the
/// root well conditioned even when it is exponentially close to −1.
pub fn tau_root(n: usize, alpha: f64) -> Result<JerisonSolution> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "the counterexample needs α ∈ (0, 1], got {alpha}"
        )));
    }
    let g = |s: f64| g_alpha_s(n, alpha, s);
    // g(τ = 0) must be positive: the zero lies strictly below 0.
    let g_top = g(1.0)?;
    if !(g_top > 0.0) {
        return Err(Error::RootFind(format!(
            "profile not positive at τ = 0 (g = {g_top:.6e}); no zero in (−1, 0)"
        )));
    }
    // March s down by octaves until g turns negative.
    let mut hi = 1.0f64;
    let mut lo = None;
    while hi / 2.0 >= ROOT_S_FLOOR {
        let cand = hi / 2.0;
        if g(cand)? <= 0.0 {
            lo = Some(cand);
            break;
        }
        hi = cand;
    }
    let mut lo = lo.ok_or_else(|| {
        Error::RootFind(format!(
            "no sign change of g on τ ∈ (−1 + {ROOT_S_FLOOR:.0e}, 0) for α = {alpha}: \
             either α is too large for a zero in (−1, 0) or the zero lies closer to −1 \
             than double precision resolves; g(−1 + {ROOT_S_FLOOR:.0e}) = {:?}, g(0) = {g_top:.6e}",
            g(ROOT_S_FLOOR)
        ))
    })?;
    let mut mid = 0.5 * (lo + hi);
    let mut gm = g(mid)?;
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        gm = g(mid)?;
        if gm.abs() < ROOT_G_TOL {
            let s_alpha = mid;
            return Ok(JerisonSolution {
                n,
                alpha,
                s_alpha,
                // Slope consistent with τ ≡ 4M/√(1+16M²) on ∂Ω_M, i.e.
                // M = τ/(4√(1−τ²)); 1 − τ² = s(2 − s) avoids cancellation.
                m: (s_alpha - 1.0) / (4.0 * (s_alpha * (2.0 - s_alpha)).sqrt()),
                root_residual: gm.abs(),
            });
        }
        if gm <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::RootFind(format!(
        "bisection stalled at s = {mid:.17e} (τ = {}), g = {gm:.3e}",
        mid - 1.0
    )))
}

/// Least-squares exponent of y ≈ C·x^s over positive pairs (x, y) in
/// log–log coordinates; needs at least 5 samples.
pub fn fit_exponent(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.len() < 5 {
        return Err(Error::InvalidParameter(format!(
            "exponent fit needs at least 5 samples, got {}",
            pairs.len()
        )));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
    Ok(crate::fit::fit_power_law(&xs, &ys)?.slope)
}
