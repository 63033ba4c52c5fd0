//! Numerical potential theory on the Heisenberg group H^n.
//!
//! A desk-scale toolkit for the sub-Laplacian L = Σ X_j²: homogeneous gauge
//! and fundamental solutions, intrinsic X-balls, surface measure versus
//! horizontal perimeter on hypersurfaces (with their characteristic-point
//! degeneracies), grid Dirichlet solvers and Green functions, horizontal
//! Brownian motion and Monte Carlo harmonic measure, subelliptic Poisson
//! kernels with reverse Hölder diagnostics, and the characteristic-boundary
//! counterexample family of paraboloid domains with fractional boundary
//! regularity.
//!
//! # Layout
//!
//! * [`hgroup`] — group operations, gauge machinery, fundamental solutions;
//! * [`field`] — scalar fields with analytic/finite-difference derivatives;
//! * [`geometry`] — implicit domains, gauge-ball calibration, horizontal
//!   normals, characteristic sets, outer tangent balls;
//! * [`measures`] — surface quadratures, surface measure σ vs horizontal
//!   perimeter measure σ_X, Ahlfors-type scans;
//! * [`pde`] — grid Dirichlet solver for L, Green functions, gauge
//!   mollification, mean-value identities, Schauder-type diagnostics;
//! * [`stochastic`] — horizontal Brownian motion, exit sampling, Monte Carlo
//!   harmonic measure;
//! * [`kernels`] — Poisson kernels, total masses, reverse Hölder checks,
//!   boundary representation of harmonic functions;
//! * [`jerison`] — Gauss hypergeometric machinery and the fractional-exponent
//!   family on paraboloid domains.
//!
//! The closed-form layer is generic over the [`scalar::Scalar`] float type;
//! the numerical drivers use `f64` through the aliases exported below.

pub mod error;
pub mod field;
pub mod fit;
pub mod geometry;
pub mod hgroup;
pub mod jerison;
pub mod kernels;
pub mod measures;
pub mod pde;
pub mod scalar;
pub mod stochastic;
pub mod util;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Default floating-point type of the numerical drivers.
pub type Real = f64;
/// A point of H^n at the default precision.
pub type Point = hgroup::GPoint<Real>;
/// A calibrated model at the default precision.
pub type Model = hgroup::HModel<Real>;
/// A horizontal vector at the default precision.
pub type HVec = hgroup::HVector<Real>;

/// Single-precision aliases for the closed-form layer.
pub type Point32 = hgroup::GPoint<f32>;
/// Single-precision model.
pub type Model32 = hgroup::HModel<f32>;
