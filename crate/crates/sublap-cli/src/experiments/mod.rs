//! The experiment registry: names, per-experiment config defaults, and the
//! dispatch into the library drivers.

use sublap::geometry::{gauge_ball, ImplicitDomain};
use sublap::pde::{Method, SolverParams};
use sublap::stochastic::WalkConfig;
use sublap::util::{splitmix64, stream_key};
use sublap::{Model, Point};

use crate::config::Config;
use crate::output::ExperimentResult;
use crate::Failure;

mod boundary;
mod cone;
mod core_ops;
mod elliptic;
mod scans;

/// One runnable experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    VerifyCore,
    AhlforsScan,
    Tangency,
    DirichletConvergence,
    GreenBounds,
    MollifierCheck,
    Schauder,
    Growth,
    HarmonicMeasure,
    Doubling,
    KernelMass,
    ReverseHolder,
    Represent,
    Jerison,
}

impl Experiment {
    pub const ALL: &'static [Experiment] = &[
        Experiment::VerifyCore,
        Experiment::AhlforsScan,
        Experiment::Tangency,
        Experiment::DirichletConvergence,
        Experiment::GreenBounds,
        Experiment::MollifierCheck,
        Experiment::Schauder,
        Experiment::Growth,
        Experiment::HarmonicMeasure,
        Experiment::Doubling,
        Experiment::KernelMass,
        Experiment::ReverseHolder,
        Experiment::Represent,
        Experiment::Jerison,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::VerifyCore => "verify-core",
            Experiment::AhlforsScan => "ahlfors-scan",
            Experiment::Tangency => "tangency",
            Experiment::DirichletConvergence => "dirichlet-convergence",
            Experiment::GreenBounds => "green-bounds",
            Experiment::MollifierCheck => "mollifier-check",
            Experiment::Schauder => "schauder",
            Experiment::Growth => "growth",
            Experiment::HarmonicMeasure => "harmonic-measure",
            Experiment::Doubling => "doubling",
            Experiment::KernelMass => "kernel-mass",
            Experiment::ReverseHolder => "reverse-holder",
            Experiment::Represent => "represent",
            Experiment::Jerison => "jerison",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, Failure> {
        Self::ALL
            .iter()
            .copied()
            .find(|e| e.name() == name)
            .ok_or_else(|| {
                let valid: Vec<&str> = Self::ALL.iter().map(|e| e.name()).collect();
                Failure::Config(format!(
                    "unknown experiment '{name}'; valid experiments: {}",
                    valid.join(", ")
                ))
            })
    }

    /// The config keys this experiment consumes, with their defaults.
    pub fn defaults(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Experiment::VerifyCore => &[("mc.seed", "12345"), ("sample.count", "1000")],
            Experiment::AhlforsScan => &[
                ("quad.resolution", "256"),
                ("scan.rmin", "0.02"),
                ("scan.rmax", "0.3"),
                ("scan.count", "20"),
                ("scan.centers", "5"),
                ("domain.radius", "1.0"),
            ],
            Experiment::Tangency => &[("jerison.alpha", "0.3"), ("domain.radius", "1.0")],
            Experiment::DirichletConvergence => &[
                ("pde.h", "0.06"),
                ("pde.omega", "1.8"),
                ("pde.tol", "1e-10"),
                ("pde.max_iter", "40000"),
                ("domain.radius", "1.0"),
            ],
            Experiment::GreenBounds => &[
                ("pde.h", "0.06"),
                ("pde.omega", "1.8"),
                ("pde.tol", "1e-8"),
                ("pde.max_iter", "20000"),
                ("domain.radius", "1.0"),
            ],
            Experiment::MollifierCheck => &[
                ("quad.resolution", "200"),
                ("mean.radii", "0.35,0.6"),
                ("mean.cells", "48"),
                ("domain.radius", "1.0"),
            ],
            Experiment::Schauder => &[
                ("pde.h", "0.06"),
                ("pde.omega", "1.8"),
                ("pde.tol", "1e-8"),
                ("pde.max_iter", "20000"),
                ("schauder.r", "0.4"),
                ("schauder.r", "0.15"),
                ("sample.count", "200"),
                ("mc.seed", "12345"),
                ("domain.radius", "1.0"),
            ],
            Experiment::Growth => &[
                ("growth.r", "0.25"),
                ("pde.h", "0.1"),
                ("pde.omega", "1.8"),
                ("pde.tol", "1e-8"),
                ("pde.max_iter", "20000"),
                ("sample.count", "1000"),
                ("mc.seed", "12345"),
                ("domain.radius", "1.0"),
            ],
            Experiment::HarmonicMeasure => &[
                ("mc.dt", "1e-3"),
                ("mc.max_steps", "1000000"),
                ("mc.seed", "12345"),
                ("mc.walks", "100000"),
                ("quad.resolution", "512"),
                ("bands.count", "8"),
                ("domain.radius", "1.0"),
            ],
            Experiment::Doubling => &[
                ("mc.dt", "1e-3"),
                ("mc.max_steps", "1000000"),
                ("mc.seed", "12345"),
                ("mc.walks", "20000"),
                ("doubling.radii", "0.05,0.1,0.2"),
                ("doubling.separation", "2.0"),
                ("domain.radius", "1.0"),
            ],
            Experiment::KernelMass => &[
                ("quad.resolution", "160"),
                ("kernel.grid_resolution", "100"),
                ("pde.h", "0.03"),
                ("pde.omega", "1.8"),
                ("pde.tol", "1e-8"),
                ("pde.max_iter", "20000"),
                ("domain.radius", "1.0"),
            ],
            Experiment::ReverseHolder => &[
                ("quad.resolution", "200"),
                ("rh.p", "2,3"),
                ("rh.radii", "0.1,0.2,0.4"),
                ("rh.centers", "pole,equator"),
                ("domain.radius", "1.0"),
            ],
            Experiment::Represent => &[("quad.resolution", "160"), ("domain.radius", "1.0")],
            Experiment::Jerison => &[("jerison.alphas", "0.1,0.3,0.5")],
        }
    }

    /// Runs the experiment against a resolved config.
    pub fn run(self, cfg: &Config) -> Result<ExperimentResult, Failure> {
        match self {
            Experiment::VerifyCore => core_ops::verify_core(self, cfg),
            Experiment::AhlforsScan => scans::ahlfors_scan(self, cfg),
            Experiment::Tangency => cone::tangency(self, cfg),
            Experiment::DirichletConvergence => elliptic::dirichlet_convergence(self, cfg),
            Experiment::GreenBounds => elliptic::green_bounds(self, cfg),
            Experiment::MollifierCheck => elliptic::mollifier_check(self, cfg),
            Experiment::Schauder => core_ops::schauder(self, cfg),
            Experiment::Growth => core_ops::growth(self, cfg),
            Experiment::HarmonicMeasure => boundary::harmonic_measure(self, cfg),
            Experiment::Doubling => scans::doubling(self, cfg),
            Experiment::KernelMass => boundary::kernel_mass(self, cfg),
            Experiment::ReverseHolder => boundary::reverse_holder(self, cfg),
            Experiment::Represent => boundary::represent(self, cfg),
            Experiment::Jerison => cone::jerison(self, cfg),
        }
    }
}

/// The calibrated H¹ model every experiment works in.
pub(crate) fn h1() -> Model {
    Model::calibrated(1).expect("the calibrated H¹ model is well-defined")
}

/// The centered gauge ball of the configured radius.
pub(crate) fn ball(cfg: &Config) -> Result<ImplicitDomain, Failure> {
    let model = h1();
    let radius = cfg.f64("domain.radius");
    Ok(gauge_ball(&model, &model.origin(), radius)?)
}

/// Cubic grid dims from the target spacing `pde.h`, measured along the
/// bounding box's x-extent: the smallest odd node count with spacing ≤ h.
pub(crate) fn dims_for(domain: &ImplicitDomain, h: f64) -> Result<[usize; 3], Failure> {
    if !(h > 0.0) {
        return Err(Failure::Config(format!(
            "pde.h must be positive, got {h}"
        )));
    }
    let ext = domain.bbox().extent()[0];
    let steps = (ext / h - 1e-9).ceil().max(4.0) as usize;
    let mut n = steps + 1;
    if n % 2 == 0 {
        n += 1;
    }
    Ok([n, n, n])
}

/// Halves the spacing of a cubic grid exactly: n → 2n−1 nodes per axis.
pub(crate) fn refined(dims: [usize; 3]) -> [usize; 3] {
    [2 * dims[0] - 1, 2 * dims[1] - 1, 2 * dims[2] - 1]
}

pub(crate) fn solver_params(cfg: &Config) -> SolverParams {
    SolverParams {
        method: Method::Cg,
        tol: cfg.f64("pde.tol"),
        max_iter: cfg.usize("pde.max_iter"),
        omega: cfg.f64("pde.omega"),
        ..SolverParams::default()
    }
}

pub(crate) fn walk_config(cfg: &Config) -> WalkConfig {
    WalkConfig {
        dt: cfg.f64("mc.dt"),
        max_steps: cfg.usize("mc.max_steps"),
        seed: cfg.u64("mc.seed"),
        ..WalkConfig::default()
    }
}

/// A deterministic SplitMix64 stream for sampling study points.
pub(crate) struct SeedStream {
    state: u64,
}

impl SeedStream {
    /// A stream keyed by (seed, purpose); distinct purposes never collide.
    pub fn new(seed: u64, purpose: u64) -> Self {
        Self {
            state: stream_key(seed, purpose),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        splitmix64(self.state)
    }

    /// Uniform in [0, 1).
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }
}

/// `count` log-spaced values spanning [lo, hi], ascending.
pub(crate) fn log_spaced(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>, Failure> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Failure::Config(format!(
            "scan range needs 0 < rmin < rmax, got [{lo}, {hi}]"
        )));
    }
    if count < 3 {
        return Err(Failure::Config(format!(
            "scan needs at least 3 radii, got {count}"
        )));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect())
}

/// A point of the unit gauge sphere with |z| = s, z-angle `angle`, on the
/// upper (t > 0) or lower sheet: t = ±√(1 − s⁴)/4.
pub(crate) fn unit_sphere_point(s: f64, angle: f64, upper: bool) -> Point {
    let t = (1.0 - s.powi(4)).max(0.0).sqrt() / 4.0;
    Point::from_xyt(
        s * angle.cos(),
        s * angle.sin(),
        if upper { t } else { -t },
    )
}
