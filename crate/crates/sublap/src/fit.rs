//! Least-squares helpers: ordinary least squares on (log r, log μ) pairs for
//! scaling-exponent estimation.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Result of a straight-line fit y = slope · x + intercept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit<S> {
    /// Fitted slope.
    pub slope: S,
    /// Fitted intercept.
    pub intercept: S,
    /// Coefficient of determination R² (1 for a perfect fit).
    pub r_squared: S,
    /// Maximum absolute residual in y.
    pub max_residual: S,
    /// Standard error of the slope, √(Σr²/(n−2)/Sxx); zero when n = 2.
    pub slope_stderr: S,
}

/// Ordinary least squares fit of y against x. Needs at least two distinct
/// abscissae.
pub fn fit_line<S: Scalar>(xs: &[S], ys: &[S]) -> Result<LineFit<S>> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch(format!(
            "x and y lengths differ: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::InvalidParameter(
            "line fit needs at least two points".into(),
        ));
    }
    let n = S::of_usize(xs.len());
    let mean_x = xs.iter().copied().sum::<S>() / n;
    let mean_y = ys.iter().copied().sum::<S>() / n;
    let mut sxx = S::zero();
    let mut sxy = S::zero();
    let mut syy = S::zero();
    for (x, y) in xs.iter().zip(ys.iter()) {
        let dx = *x - mean_x;
        let dy = *y - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx <= S::zero() {
        return Err(Error::InvalidParameter(
            "line fit needs distinct abscissae".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let mut ss_res = S::zero();
    let mut max_residual = S::zero();
    for (x, y) in xs.iter().zip(ys.iter()) {
        let r = *y - (slope * *x + intercept);
        ss_res += r * r;
        max_residual = max_residual.max(r.abs());
    }
    let r_squared = if syy > S::zero() {
        S::one() - ss_res / syy
    } else {
        S::one()
    };
    let slope_stderr = if xs.len() > 2 {
        (ss_res / (n - S::of_usize(2)) / sxx).sqrt()
    } else {
        S::zero()
    };
    Ok(LineFit {
        slope,
        intercept,
        r_squared,
        max_residual,
        slope_stderr,
    })
}

/// Fits the scaling exponent of positive samples μ(r) ≈ C · r^α by OLS on
/// (ln r, ln μ); returns the fitted exponent data.
pub fn fit_power_law<S: Scalar>(radii: &[S], values: &[S]) -> Result<LineFit<S>> {
    if radii
        .iter()
        .chain(values.iter())
        .any(|v| !(*v > S::zero()) || !v.is_finite())
    {
        return Err(Error::InvalidParameter(
            "power-law fit needs strictly positive finite samples".into(),
        ));
    }
    let xs: Vec<S> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<S> = values.iter().map(|v| v.ln()).collect();
    fit_line(&xs, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_power_law() {
        let radii: Vec<f64> = (1..=6).map(|k| 0.01 * 2f64.powi(k)).collect();
        let values: Vec<f64> = radii.iter().map(|r| 3.7 * r.powf(2.5)).collect();
        let fit = fit_power_law(&radii, &values).expect("valid data");
        assert!(
            (fit.slope - 2.5).abs() < 1e-12,
            "exact power law must fit exactly, slope {}",
            fit.slope
        );
        assert!(
            (fit.intercept - 3.7f64.ln()).abs() < 1e-12,
            "intercept must be ln C"
        );
        assert!(fit.r_squared > 1.0 - 1e-12, "R² must be 1 for exact data");
        assert!(fit.slope_stderr < 1e-12, "exact data has no slope error");
    }

    #[test]
    fn rejects_nonpositive_samples() {
        assert!(fit_power_law(&[0.1, 0.2], &[1.0, -1.0]).is_err());
        assert!(fit_power_law(&[0.0, 0.2], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn slope_noise_stays_bounded_under_relative_perturbation() {
        // 1% multiplicative noise on a decade of radii moves the fitted
        // exponent by far less than 0.1.
        let radii: Vec<f64> = (0..8).map(|k| 0.02 * 1.4f64.powi(k)).collect();
        let noise = [1.01, 0.99, 1.01, 0.99, 1.01, 0.99, 1.01, 0.99];
        let values: Vec<f64> = radii
            .iter()
            .zip(noise.iter())
            .map(|(r, e)| r.powf(3.0) * e)
            .collect();
        let fit = fit_power_law(&radii, &values).expect("valid data");
        assert!(
            (fit.slope - 3.0).abs() < 0.05,
            "1% noise must not move the exponent materially, got {}",
            fit.slope
        );
    }
}
