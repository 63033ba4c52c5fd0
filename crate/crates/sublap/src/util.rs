//! Small numerical utilities shared across modules: 1-D quadrature with
//! refinement control, deterministic seed mixing, trilinear interpolation.

use crate::error::{Error, Result};

/// Composite Simpson quadrature of `f` on `[a, b]`, doubling the panel count
/// until two successive refinements agree to `tol` (relative to `max(1, |I|)`).
///
/// Starts from `n0` panels (rounded up to even) and doubles at most
/// `max_doublings` times.
pub fn integrate_refine<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    n0: usize,
    max_doublings: u32,
) -> Result<f64> {
    if !(b > a) {
        return Err(Error::InvalidParameter(format!(
            "integration interval must satisfy a < b, got [{a}, {b}]"
        )));
    }
    let mut n = n0.max(2);
    if n % 2 == 1 {
        n += 1;
    }
    let mut prev = simpson(&f, a, b, n);
    for _ in 0..max_doublings {
        n *= 2;
        let cur = simpson(&f, a, b, n);
        let scale = cur.abs().max(1.0);
        if (cur - prev).abs() <= tol * scale {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Quadrature(format!(
        "1-D quadrature did not reach tol {tol} within {n} panels (last delta {:.3e})",
        (prev - simpson(&f, a, b, n / 2)).abs()
    )))
}

/// Plain composite Simpson rule with `n` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
    debug_assert!(n >= 2 && n % 2 == 0, "simpson needs an even panel count");
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let x = a + h * i as f64;
        acc += if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    acc * h / 3.0
}

/// Composite midpoint rule with `n` panels (useful for integrands with
/// integrable endpoint behaviour where Simpson would sample the endpoints).
pub fn midpoint<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    (0..n).map(|i| f(a + h * (i as f64 + 0.5))).sum::<f64>() * h
}

/// Midpoint rule with panel doubling until successive values agree to `tol`.
pub fn midpoint_refine<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    n0: usize,
    max_doublings: u32,
) -> Result<f64> {
    if !(b > a) {
        return Err(Error::InvalidParameter(format!(
            "integration interval must satisfy a < b, got [{a}, {b}]"
        )));
    }
    let mut n = n0.max(1);
    let mut prev = midpoint(&f, a, b, n);
    for _ in 0..max_doublings {
        n *= 2;
        let cur = midpoint(&f, a, b, n);
        if (cur - prev).abs() <= tol * cur.abs().max(1.0) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Quadrature(format!(
        "midpoint quadrature did not reach tol {tol} within {n} panels"
    )))
}

/// SplitMix64 scrambler; used to derive statistically independent stream keys.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic per-stream key from a base seed and a stream index.
///
/// Two scrambling rounds decorrelate adjacent indices; the mapping is a fixed
/// pure function so results are reproducible across runs and thread counts.
pub fn stream_key(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ splitmix64(index.wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}
