//! Horizontal Brownian motion and Monte-Carlo harmonic measure.
//!
//! The walk integrates dξ = Σ_j X_j(ξ) dW_j with independent Wiener
//! increments per horizontal direction; its generator is ½L, so exit
//! distributions from a domain are exactly the L-harmonic measure. Because
//! the frame fields are divergence-structured (each X_j has no component
//! along its own flow), the Itô and Stratonovich readings coincide; a
//! Stratonovich–Heun integrator is kept as a cross-check and the tests
//! compare exit moments between the two.
//!
//! Reproducibility: every walk owns a counter-derived ChaCha8 stream keyed by
//! (seed, walk index), and the estimator reduces integer band counts, so
//! results are bitwise identical for any thread count.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geometry::ImplicitDomain;
use crate::hgroup::gauge_dist;
use crate::util::stream_key;
use crate::Point;

/// Walk integration parameters.
#[derive(Debug, Clone, Copy)]
pub struct WalkConfig {
    /// Time step; must satisfy 0 < dt ≤ 1e−2 for the exit laws quoted here.
    pub dt: f64,
    /// Step budget per walk; walks that exhaust it are flagged censored.
    pub max_steps: usize,
    /// Base seed; combined with the walk index into a private stream.
    pub seed: u64,
    /// Exit points are Newton-snapped to |ρ| below this tolerance (scaled by
    /// the domain's bounding-box extent).
    pub snap_tol: f64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            max_steps: 1_000_000,
            seed: 7,
            snap_tol: 1e-10,
        }
    }
}

impl WalkConfig {
    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= 1e-2) {
            return Err(Error::InvalidParameter(format!(
                "walk dt must be in (0, 1e-2], got {}",
                self.dt
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidParameter("walk max_steps must be ≥ 1".into()));
        }
        if !(self.snap_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "walk snap_tol must be positive, got {}",
                self.snap_tol
            )));
        }
        Ok(())
    }
}

/// Integrator used for one walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    /// Euler–Maruyama on the Itô form (default).
    EulerMaruyama,
    /// Stratonovich–Heun predictor–corrector; same law here, kept as a
    /// cross-check of the vanishing Itô correction.
    StratonovichHeun,
}

/// Exit record of one walk.
#[derive(Debug, Clone)]
pub struct ExitSample {
    /// Exit point, snapped onto {ρ = 0} (or the last interior position when
    /// censored).
    pub point: Point,
    /// Steps consumed.
    pub steps: usize,
    /// True when the step budget ran out before the walk left the domain.
    pub censored: bool,
}

#[inline]
fn step_em(x: &mut f64, y: &mut f64, t: &mut f64, sdt: f64, e1: f64, e2: f64) {
    let dx = sdt * e1;
    let dy = sdt * e2;
    // X₁ = (1, 0, −y/2), X₂ = (0, 1, x/2) at the *current* point.
    *t += -0.5 * *y * dx + 0.5 * *x * dy;
    *x += dx;
    *y += dy;
}

#[inline]
fn step_heun(x: &mut f64, y: &mut f64, t: &mut f64, sdt: f64, e1: f64, e2: f64) {
    let dx = sdt * e1;
    let dy = sdt * e2;
    // Predictor.
    let xp = *x + dx;
    let yp = *y + dy;
    // Corrector averages the frame coefficients at both ends.
    *t += 0.5 * (-0.5 * *y - 0.5 * yp) * dx + 0.5 * (0.5 * *x + 0.5 * xp) * dy;
    *x = xp;
    *y = yp;
}

/// Runs one walk from `start` until it leaves `domain` (or censors).
///
/// On the step that first sees ρ ≥ 0 the crossing is located by linear
/// interpolation of ρ along the step and the point is Newton-projected onto
/// the surface.
pub fn sample_exit(
    domain: &ImplicitDomain,
    start: &Point,
    cfg: &WalkConfig,
    walk_index: u64,
    integrator: Integrator,
) -> Result<ExitSample> {
    cfg.validate()?;
    if start.n() != 1 {
        return Err(Error::DimensionMismatch(
            "walk driver is H¹-only (n = 1)".into(),
        ));
    }
    if !domain.contains(start) {
        return Err(Error::InvalidParameter(
            "walk start must lie inside the domain".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(stream_key(cfg.seed, walk_index));
    let normal = StandardNormal;
    let sdt = cfg.dt.sqrt();
    let ext = domain.bbox().extent();
    let scale = ext.iter().cloned().fold(f64::MIN, f64::max);
    let snap = cfg.snap_tol * scale;

    let (mut x, mut y, mut t) = (start.x[0], start.y[0], start.t);
    let mut rho_prev = domain.rho(start);
    for step in 1..=cfg.max_steps {
        let (px, py, pt) = (x, y, t);
        let e1: f64 = normal.sample(&mut rng);
        let e2: f64 = normal.sample(&mut rng);
        match integrator {
            Integrator::EulerMaruyama => step_em(&mut x, &mut y, &mut t, sdt, e1, e2),
            Integrator::StratonovichHeun => step_heun(&mut x, &mut y, &mut t, sdt, e1, e2),
        }
        let p = Point::from_xyt(x, y, t);
        let rho = domain.rho(&p);
        if rho >= 0.0 {
            // Linear crossing along the step, then a Newton snap.
            let denom = rho - rho_prev;
            let s = if denom > 0.0 {
                (-rho_prev / denom).clamp(0.0, 1.0)
            } else {
                1.0
            };
            let cross = Point::from_xyt(px + s * (x - px), py + s * (y - py), pt + s * (t - pt));
            let point = domain.project_to_surface(&cross, snap, 50)?;
            return Ok(ExitSample {
                point,
                steps: step,
                censored: false,
            });
        }
        rho_prev = rho;
    }
    Ok(ExitSample {
        point: Point::from_xyt(x, y, t),
        steps: cfg.max_steps,
        censored: true,
    })
}

/// A finite measurable partition of a boundary, as a point classifier.
#[derive(Clone)]
pub struct Partition {
    name: String,
    count: usize,
    classify: Arc<dyn Fn(&Point) -> usize + Send + Sync>,
}

impl std::fmt::Debug for Partition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Partition")
            .field("name", &self.name)
            .field("count", &self.count)
            .finish()
    }
}

impl Partition {
    /// Builds a partition from a classifier; the classifier must return
    /// indices below `count` for every boundary point.
    pub fn new(
        name: impl Into<String>,
        count: usize,
        classify: impl Fn(&Point) -> usize + Send + Sync + 'static,
    ) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidParameter(
                "partition needs at least one band".into(),
            ));
        }
        Ok(Self {
            name: name.into(),
            count,
            classify: Arc::new(classify),
        })
    }

    /// Equal-latitude bands of the gauge sphere around `center`: the band of
    /// a point is read off the latitude u = atan2(4 t̃, |z̃|²) of its
    /// center-pulled-back coordinates, split into `count` equal intervals of
    /// [−π/2, π/2]. Valid on any centered gauge sphere regardless of radius.
    pub fn latitude_bands(center: &Point, count: usize) -> Result<Self> {
        if center.n() != 1 {
            return Err(Error::DimensionMismatch(
                "latitude bands are defined for H¹".into(),
            ));
        }
        let c = center.clone();
        let k = count;
        Self::new(format!("latitude-{count}"), count, move |p: &Point| {
            let w = crate::hgroup::group_mul(&crate::hgroup::group_inv(&c), p)
                .expect("dimensions agree by construction");
            let u = (4.0 * w.t).atan2(w.x[0] * w.x[0] + w.y[0] * w.y[0]);
            let s = (u + std::f64::consts::FRAC_PI_2) / std::f64::consts::PI;
            ((s * k as f64) as usize).min(k - 1)
        })
    }

    /// Band index of a boundary point.
    pub fn classify(&self, p: &Point) -> usize {
        ((self.classify)(p)).min(self.count - 1)
    }

    /// Number of bands.
    pub fn count(&self) -> usize {
        self.count
    }

    /// Human-readable partition name.
    pub fn name(&self) -> &str {
        &self.name
    }
}

/// Monte-Carlo harmonic measure of a partition.
#[derive(Debug, Clone)]
pub struct HarmonicMeasure {
    /// Exit counts per band (uncensored walks only).
    pub counts: Vec<u64>,
    /// Uncensored walks, Σ counts.
    pub walks_used: u64,
    /// Censored walks (excluded from the estimate).
    pub censored: u64,
    /// Band masses; they sum to 1.0 exactly (the last entry closes the
    /// floating-point division residue, well below its own standard error).
    pub masses: Vec<f64>,
    /// Binomial standard error per band, √(p(1−p)/walks).
    pub stderr: Vec<f64>,
}

impl HarmonicMeasure {
    fn from_counts(counts: Vec<u64>, censored: u64) -> Result<Self> {
        let walks_used: u64 = counts.iter().sum();
        if walks_used == 0 {
            return Err(Error::NoConvergence(
                "all walks were censored; raise max_steps".into(),
            ));
        }
        let n = walks_used as f64;
        let mut masses: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
        // Close the partition identity exactly in floating point: the last
        // entry becomes 1 − (left-to-right partial sum of the others), the
        // same association a later `iter().sum()` uses, so the re-summed
        // total is exactly 1.0 (Sterbenz above ½, sub-half-ulp rounding
        // below).
        let k = masses.len();
        let partial: f64 = masses[..k - 1].iter().sum();
        masses[k - 1] = 1.0 - partial;
        let stderr = masses
            .iter()
            .map(|&p| (p.clamp(0.0, 1.0) * (1.0 - p.clamp(0.0, 1.0)) / n).sqrt())
            .collect();
        Ok(Self {
            counts,
            walks_used,
            censored,
            masses,
            stderr,
        })
    }

    /// Fraction of walks that censored.
    pub fn censored_fraction(&self) -> f64 {
        let total = self.walks_used + self.censored;
        self.censored as f64 / total as f64
    }
}

/// Estimates the harmonic measure of `partition` seen from `start` with
/// `walks` independent walks.
///
/// Deterministic for fixed (seed, walks) regardless of thread count: each
/// walk's randomness is a pure function of its index, and the reduction adds
/// integer counts.
pub fn harmonic_measure(
    domain: &ImplicitDomain,
    start: &Point,
    partition: &Partition,
    cfg: &WalkConfig,
    walks: u64,
) -> Result<HarmonicMeasure> {
    cfg.validate()?;
    if walks == 0 {
        return Err(Error::InvalidParameter("need at least one walk".into()));
    }
    let k = partition.count();
    let (counts, censored) = (0..walks)
        .into_par_iter()
        .map(|idx| -> Result<(Vec<u64>, u64)> {
            let s = sample_exit(domain, start, cfg, idx, Integrator::EulerMaruyama)?;
            let mut c = vec![0u64; k];
            if s.censored {
                Ok((c, 1))
            } else {
                c[partition.classify(&s.point)] += 1;
                Ok((c, 0))
            }
        })
        .try_reduce(
            || (vec![0u64; k], 0u64),
            |mut a, b| {
                for (x, y) in a.0.iter_mut().zip(&b.0) {
                    *x += *y;
                }
                a.1 += b.1;
                Ok(a)
            },
        )?;
    HarmonicMeasure::from_counts(counts, censored)
}

/// Sample-mean report of boundary functionals E[u(ξ_τ)].
#[derive(Debug, Clone)]
pub struct MomentReport {
    /// Sample means, one per supplied functional.
    pub means: Vec<f64>,
    /// Standard errors of the means.
    pub stderr: Vec<f64>,
    /// Uncensored walks used.
    pub walks_used: u64,
    /// Censored walks (excluded).
    pub censored: u64,
}

/// Estimates E[u_i(ξ_τ)] for a batch of functionals in one pass; for
/// L-harmonic u this is the martingale identity E[u(ξ_τ)] = u(start), which
/// the tests and the acceptance gate check at 3-standard-error tolerance.
pub fn exit_moments(
    domain: &ImplicitDomain,
    start: &Point,
    fields: &[&(dyn ScalarField<f64> + Sync)],
    cfg: &WalkConfig,
    walks: u64,
    integrator: Integrator,
) -> Result<MomentReport> {
    cfg.validate()?;
    if walks == 0 || fields.is_empty() {
        return Err(Error::InvalidParameter(
            "need at least one walk and one functional".into(),
        ));
    }
    let k = fields.len();
    // Per-walk rows, reduced in index order chunks; sums of f64 are done in
    // the deterministic reduce below (fixed tree shape via exact chunking).
    let rows: Vec<Result<(Vec<f64>, bool)>> = (0..walks)
        .into_par_iter()
        .map(|idx| -> Result<(Vec<f64>, bool)> {
            let s = sample_exit(domain, start, cfg, idx, integrator)?;
            if s.censored {
                return Ok((vec![0.0; k], true));
            }
            Ok((fields.iter().map(|f| f.value(&s.point)).collect(), false))
        })
        .collect();
    let mut sums = vec![0.0f64; k];
    let mut sq = vec![0.0f64; k];
    let mut used = 0u64;
    let mut censored = 0u64;
    for row in rows {
        let (vals, cen) = row?;
        if cen {
            censored += 1;
            continue;
        }
        used += 1;
        for i in 0..k {
            sums[i] += vals[i];
            sq[i] += vals[i] * vals[i];
        }
    }
    if used == 0 {
        return Err(Error::NoConvergence(
            "all walks were censored; raise max_steps".into(),
        ));
    }
    let n = used as f64;
    let means: Vec<f64> = sums.iter().map(|s| s / n).collect();
    let stderr: Vec<f64> = means
        .iter()
        .zip(&sq)
        .map(|(m, s2)| {
            let var = (s2 / n - m * m).max(0.0);
            (var / n).sqrt()
        })
        .collect();
    Ok(MomentReport {
        means,
        stderr,
        walks_used: used,
        censored,
    })
}

/// Default separation factor between the observation point and the largest
/// doubled surface ball: gauge_dist(x, x₀) must exceed this times max(2r).
pub const DOUBLING_SEPARATION: f64 = 2.0;

/// One radius of a doubling scan: the Monte Carlo masses of Δ(x₀, r) and
/// Δ(x₀, 2r) and their ratio. `ratio` is `None` when the inner ball caught
/// no exits (the radius is skipped rather than divided by zero).
#[derive(Debug, Clone, Copy)]
pub struct DoublingRatio {
    /// Inner radius r; the outer ball has radius 2r.
    pub radius: f64,
    /// ω^x(Δ(x₀, r)) estimate.
    pub inner_mass: f64,
    /// ω^x(Δ(x₀, 2r)) estimate.
    pub outer_mass: f64,
    /// ω^x(Δ(x₀, 2r)) / ω^x(Δ(x₀, r)); at least 1 by containment.
    pub ratio: Option<f64>,
    /// Propagated standard error of the ratio (delta method on the
    /// correlated multinomial counts), present whenever the ratio is.
    pub stderr: Option<f64>,
}

/// Result of a harmonic-measure doubling scan at one boundary point.
#[derive(Debug, Clone)]
pub struct DoublingReport {
    /// Per-radius masses and ratios, in the input radius order.
    pub entries: Vec<DoublingRatio>,
    /// Uncensored walks behind every estimate.
    pub walks_used: u64,
    /// Censored walks (excluded from all counts).
    pub censored: u64,
}

impl DoublingReport {
    /// Largest finite ratio over the scan; errors if every radius was
    /// skipped for lack of inner-ball exits.
    pub fn sup_ratio(&self) -> Result<f64> {
        self.entries
            .iter()
            .filter_map(|e| e.ratio)
            .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))))
            .ok_or_else(|| {
                Error::NoConvergence(
                    "no doubling radius captured any exits; enlarge radii or walks".into(),
                )
            })
    }

    /// Fraction of walks that censored.
    pub fn censored_fraction(&self) -> f64 {
        let total = self.walks_used + self.censored;
        if total == 0 {
            return 0.0;
        }
        self.censored as f64 / total as f64
    }
}

/// Scans the doubling ratios ω^x(Δ(x₀, 2r))/ω^x(Δ(x₀, r)) over `radii` with
/// one shared batch of `walks` exits from `x`.
///
/// `x₀` must lie on ∂D and `x` must keep gauge distance at least
/// `separation · 2·max(radii)` from it, so the observation point never sits
/// inside a scanned ball. Exits are binned by gauge distance to `x₀`; each
/// ratio divides nested counts, so it is ≥ 1 exactly whenever defined, and
/// the reduction over walks is integer, hence thread-invariant.
pub fn doubling_check(
    domain: &ImplicitDomain,
    x: &Point,
    x0: &Point,
    radii: &[f64],
    walks: u64,
    cfg: &WalkConfig,
    separation: f64,
) -> Result<DoublingReport> {
    cfg.validate()?;
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(Error::InvalidParameter(
            "doubling radii must be a nonempty list of positive reals".into(),
        ));
    }
    if walks == 0 {
        return Err(Error::InvalidParameter("need at least one walk".into()));
    }
    if !(separation > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "separation factor must be positive, got {separation}"
        )));
    }
    let rho0 = domain.rho(x0);
    if rho0.abs() > 1e-6 {
        return Err(Error::Domain(format!(
            "doubling center must lie on the boundary, ρ(x₀) = {rho0:.3e}"
        )));
    }
    let r_max = radii.iter().fold(0.0f64, |a, r| a.max(*r));
    let dist = gauge_dist(x, x0)?;
    if dist < separation * 2.0 * r_max {
        return Err(Error::Domain(format!(
            "observation point too close to the doubling center: \
             gauge distance {dist:.4} < {separation} × 2·max radius = {:.4}",
            separation * 2.0 * r_max
        )));
    }
    let k = radii.len();
    let (inner, outer, censored) = (0..walks)
        .into_par_iter()
        .map(|idx| -> Result<(Vec<u64>, Vec<u64>, u64)> {
            let s = sample_exit(domain, x, cfg, idx, Integrator::EulerMaruyama)?;
            let mut cin = vec![0u64; k];
            let mut cout = vec![0u64; k];
            if s.censored {
                return Ok((cin, cout, 1));
            }
            let d = gauge_dist(x0, &s.point)?;
            for (i, r) in radii.iter().enumerate() {
                if d < *r {
                    cin[i] += 1;
                }
                if d < 2.0 * *r {
                    cout[i] += 1;
                }
            }
            Ok((cin, cout, 0))
        })
        .try_reduce(
            || (vec![0u64; k], vec![0u64; k], 0u64),
            |mut a, b| {
                for (x, y) in a.0.iter_mut().zip(&b.0) {
                    *x += *y;
                }
                for (x, y) in a.1.iter_mut().zip(&b.1) {
                    *x += *y;
                }
                a.2 += b.2;
                Ok(a)
            },
        )?;
    let used = walks - censored;
    if used == 0 {
        return Err(Error::NoConvergence(
            "all walks were censored; raise max_steps".into(),
        ));
    }
    let n = used as f64;
    let entries = radii
        .iter()
        .zip(inner.iter().zip(&outer))
        .map(|(r, (ci, co))| {
            let a = *ci as f64 / n;
            let b = *co as f64 / n;
            let (ratio, stderr) = if *ci == 0 {
                (None, None)
            } else {
                // Delta-method variance of b̂/â for nested multinomial
                // counts: Var ≈ b(b − a)/(n a³); zero when the balls agree.
                let var = (b * (b - a) / (n * a * a * a)).max(0.0);
                (Some(b / a), Some(var.sqrt()))
            };
            DoublingRatio {
                radius: *r,
                inner_mass: a,
                outer_mass: b,
                ratio,
                stderr,
            }
        })
        .collect();
    Ok(DoublingReport {
        entries,
        walks_used: used,
        censored,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::LinearField;
    use crate::geometry::gauge_ball;
    use crate::hgroup::gauge;
    use crate::{Model, Point};

    fn unit_ball() -> ImplicitDomain {
        let model = Model::calibrated(1).unwrap();
        gauge_ball(&model, &Point::origin(1), 1.0).unwrap()
    }

    fn fast_cfg() -> WalkConfig {
        WalkConfig {
            dt: 2e-3,
            ..WalkConfig::default()
        }
    }

    #[test]
    fn bad_configs_and_starts_are_rejected() {
        let ball = unit_ball();
        let e = Point::origin(1);
        let bad_dt = WalkConfig {
            dt: 0.5,
            ..WalkConfig::default()
        };
        assert!(sample_exit(&ball, &e, &bad_dt, 0, Integrator::EulerMaruyama).is_err());
        let outside = Point::from_xyt(2.0, 0.0, 0.0);
        assert!(sample_exit(&ball, &outside, &fast_cfg(), 0, Integrator::EulerMaruyama).is_err());
        assert!(harmonic_measure(
            &ball,
            &e,
            &Partition::latitude_bands(&e, 4).unwrap(),
            &fast_cfg(),
            0
        )
        .is_err());
        assert!(Partition::new("x", 0, |_| 0).is_err());
    }

    #[test]
    fn walks_are_reproducible_and_stream_separated() {
        let ball = unit_ball();
        let e = Point::origin(1);
        let a = sample_exit(&ball, &e, &fast_cfg(), 3, Integrator::EulerMaruyama).unwrap();
        let b = sample_exit(&ball, &e, &fast_cfg(), 3, Integrator::EulerMaruyama).unwrap();
        assert_eq!(a.point.x[0], b.point.x[0]);
        assert_eq!(a.point.t, b.point.t);
        assert_eq!(a.steps, b.steps);
        let c = sample_exit(&ball, &e, &fast_cfg(), 4, Integrator::EulerMaruyama).unwrap();
        assert!(
            a.point.x[0] != c.point.x[0] || a.point.t != c.point.t,
            "distinct walk indices should explore distinct paths"
        );
    }

    #[test]
    fn exit_points_land_on_the_boundary() {
        let ball = unit_ball();
        let e = Point::origin(1);
        for idx in 0..200u64 {
            let s = sample_exit(&ball, &e, &fast_cfg(), idx, Integrator::EulerMaruyama).unwrap();
            assert!(!s.censored, "walk {idx} censored unexpectedly");
            assert!(s.steps >= 1);
            let n = gauge(&s.point);
            assert!(
                (n - 1.0).abs() < 1e-9,
                "exit point off the unit sphere: N = {n}"
            );
        }
    }

    #[test]
    fn masses_partition_unity_exactly() {
        let ball = unit_ball();
        let e = Point::origin(1);
        let bands = Partition::latitude_bands(&e, 8).unwrap();
        let hm = harmonic_measure(&ball, &e, &bands, &fast_cfg(), 4000).unwrap();
        assert_eq!(hm.counts.iter().sum::<u64>(), hm.walks_used);
        assert_eq!(hm.walks_used + hm.censored, 4000);
        let sum: f64 = hm.masses.iter().sum();
        assert_eq!(sum, 1.0, "masses must close to unity exactly");
        assert!(
            hm.censored_fraction() < 1e-3,
            "censoring too frequent: {}",
            hm.censored_fraction()
        );
        // All bands of the centered sphere get hit from the center.
        assert!(hm.counts.iter().all(|&c| c > 0), "empty band: {:?}", hm.counts);
    }

    #[test]
    fn hemispheres_are_symmetric_from_the_center() {
        let ball = unit_ball();
        let e = Point::origin(1);
        let halves = Partition::latitude_bands(&e, 2).unwrap();
        let hm = harmonic_measure(&ball, &e, &halves, &fast_cfg(), 20_000).unwrap();
        let gap = (hm.masses[0] - hm.masses[1]).abs();
        let joint = (hm.stderr[0].powi(2) + hm.stderr[1].powi(2)).sqrt();
        assert!(
            gap <= 3.0 * joint,
            "t ↔ −t symmetry broken: masses {:?}, 3σ = {}",
            hm.masses,
            3.0 * joint
        );
    }

    #[test]
    fn harmonic_functionals_are_martingales() {
        let ball = unit_ball();
        let t14 = LinearField::t_plus(1, 0.25);
        let x11 = LinearField::x1_plus(1, 1.0);
        let fields: Vec<&(dyn ScalarField<f64> + Sync)> = vec![&t14, &x11];
        for start in [
            Point::origin(1),
            Point::from_xyt(0.3, 0.0, 0.0),
            Point::from_xyt(0.0, 0.2, -0.05),
        ] {
            let rep = exit_moments(
                &ball,
                &start,
                &fields,
                &fast_cfg(),
                20_000,
                Integrator::EulerMaruyama,
            )
            .unwrap();
            for (i, want) in [t14.value(&start), x11.value(&start)].iter().enumerate() {
                let z = (rep.means[i] - want).abs() / rep.stderr[i].max(1e-12);
                assert!(
                    z <= 3.0,
                    "martingale broken at {start:?}, functional {i}: mean {} vs {want}, z = {z}",
                    rep.means[i]
                );
            }
        }
    }

    #[test]
    fn euler_and_heun_agree_on_exit_moments() {
        let ball = unit_ball();
        let start = Point::from_xyt(0.2, -0.1, 0.03);
        let t14 = LinearField::t_plus(1, 0.25);
        let x11 = LinearField::x1_plus(1, 1.0);
        let fields: Vec<&(dyn ScalarField<f64> + Sync)> = vec![&t14, &x11];
        let em = exit_moments(
            &ball,
            &start,
            &fields,
            &fast_cfg(),
            8000,
            Integrator::EulerMaruyama,
        )
        .unwrap();
        let heun = exit_moments(
            &ball,
            &start,
            &fields,
            &fast_cfg(),
            8000,
            Integrator::StratonovichHeun,
        )
        .unwrap();
        for i in 0..2 {
            let joint = (em.stderr[i].powi(2) + heun.stderr[i].powi(2)).sqrt();
            assert!(
                (em.means[i] - heun.means[i]).abs() <= 3.0 * joint,
                "integrators disagree on functional {i}: {} vs {}",
                em.means[i],
                heun.means[i]
            );
        }
    }

    #[test]
    fn halving_dt_leaves_masses_consistent() {
        let ball = unit_ball();
        let e = Point::origin(1);
        let bands = Partition::latitude_bands(&e, 8).unwrap();
        let coarse = harmonic_measure(
            &ball,
            &e,
            &bands,
            &WalkConfig {
                dt: 2e-3,
                ..WalkConfig::default()
            },
            10_000,
        )
        .unwrap();
        let fine = harmonic_measure(
            &ball,
            &e,
            &bands,
            &WalkConfig {
                dt: 1e-3,
                seed: 99,
                ..WalkConfig::default()
            },
            10_000,
        )
        .unwrap();
        for i in 0..8 {
            let joint = (coarse.stderr[i].powi(2) + fine.stderr[i].powi(2)).sqrt();
            assert!(
                (coarse.masses[i] - fine.masses[i]).abs() <= 3.0 * joint.max(1e-12),
                "band {i} drifts under dt halving: {} vs {}",
                coarse.masses[i],
                fine.masses[i]
            );
        }
    }

    #[test]
    fn thread_count_does_not_change_the_estimate() {
        let ball = unit_ball();
        let e = Point::origin(1);
        let bands = Partition::latitude_bands(&e, 4).unwrap();
        let run = |threads: usize| -> Vec<f64> {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                harmonic_measure(&ball, &e, &bands, &fast_cfg(), 2000)
                    .unwrap()
                    .masses
            })
        };
        let single = run(1);
        let multi = run(4);
        assert_eq!(single, multi, "masses must be bitwise thread-invariant");
    }

    #[test]
    fn exhausted_budgets_censor_and_surface_as_errors_when_total() {
        let ball = unit_ball();
        let e = Point::origin(1);
        let tiny = WalkConfig {
            dt: 1e-4,
            max_steps: 5,
            ..WalkConfig::default()
        };
        let s = sample_exit(&ball, &e, &tiny, 0, Integrator::EulerMaruyama).unwrap();
        assert!(s.censored);
        let bands = Partition::latitude_bands(&e, 4).unwrap();
        let err = harmonic_measure(&ball, &e, &bands, &tiny, 50).unwrap_err();
        assert!(matches!(err, Error::NoConvergence(_)));
    }

    #[test]
    fn doubling_ratios_at_the_equator_are_finite_and_at_least_one() {
        let ball = unit_ball();
        let e = Point::origin(1);
        let equator = Point::from_xyt(1.0, 0.0, 0.0);
        let report = doubling_check(
            &ball,
            &e,
            &equator,
            &[0.1, 0.2],
            20_000,
            &fast_cfg(),
            DOUBLING_SEPARATION,
        )
        .unwrap();
        assert_eq!(report.entries.len(), 2);
        for entry in &report.entries {
            let ratio = entry.ratio.expect("equator balls must capture exits");
            assert!(ratio.is_finite() && ratio >= 1.0, "ratio {ratio}");
            assert!(entry.stderr.unwrap() > 0.0);
            assert!(entry.outer_mass >= entry.inner_mass);
        }
        assert!(report.sup_ratio().unwrap().is_finite());
        assert!(report.censored_fraction() < 1e-3);
    }

    #[test]
    fn doubling_skips_empty_inner_balls_at_the_pole() {
        let ball = unit_ball();
        let e = Point::origin(1);
        let pole = Point::from_xyt(0.0, 0.0, 0.25);
        // The kernel vanishes at the characteristic pole, so a gauge cap of
        // radius 0.01 carries mass ~1e−8: no exits land there, and the
        // radius is flagged rather than divided by zero. The 0.2 cap is
        // comfortably populated.
        let report = doubling_check(
            &ball,
            &e,
            &pole,
            &[0.01, 0.2],
            20_000,
            &fast_cfg(),
            DOUBLING_SEPARATION,
        )
        .unwrap();
        assert!(report.entries[0].ratio.is_none());
        assert_eq!(report.entries[0].inner_mass, 0.0);
        let ratio = report.entries[1].ratio.expect("0.2 cap must be populated");
        assert!(ratio >= 1.0);
        assert_eq!(report.sup_ratio().unwrap(), ratio);
    }

    #[test]
    fn doubling_is_deterministic_and_validates_inputs() {
        let ball = unit_ball();
        let e = Point::origin(1);
        let equator = Point::from_xyt(1.0, 0.0, 0.0);
        let run = || {
            doubling_check(
                &ball,
                &e,
                &equator,
                &[0.2],
                2000,
                &fast_cfg(),
                DOUBLING_SEPARATION,
            )
            .unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(a.entries[0].inner_mass, b.entries[0].inner_mass);
        assert_eq!(a.entries[0].ratio, b.entries[0].ratio);
        // Separation precondition: dist(e, equator) = 1 < 2·2·0.3.
        assert!(matches!(
            doubling_check(&ball, &e, &equator, &[0.3], 100, &fast_cfg(), 2.0),
            Err(Error::Domain(_))
        ));
        // Center off the boundary.
        let interior = Point::from_xyt(0.5, 0.0, 0.0);
        assert!(matches!(
            doubling_check(&ball, &e, &interior, &[0.1], 100, &fast_cfg(), 2.0),
            Err(Error::Domain(_))
        ));
        // Degenerate parameter lists.
        assert!(doubling_check(&ball, &e, &equator, &[], 100, &fast_cfg(), 2.0).is_err());
        assert!(doubling_check(&ball, &e, &equator, &[-0.1], 100, &fast_cfg(), 2.0).is_err());
        assert!(doubling_check(&ball, &e, &equator, &[0.1], 0, &fast_cfg(), 2.0).is_err());
        assert!(doubling_check(&ball, &e, &equator, &[0.1], 100, &fast_cfg(), 0.0).is_err());
    }
}
