//! Multi-start Nelder–Mead search for the largest `|𝓑|` over a channel class.
//!
//! Bob's settings never enter the search: for fixed channels, state and
//! Alice's settings, the best `b₁, b₂` are the normalized
//! [`BobResponse::bell_directions`](crate::scenario::BobResponse::bell_directions).
//! They are appended to [`OptimizationResult::best_params`] afterwards.

mod problem;

use alloc::string::String;
use alloc::vec::Vec;

pub use problem::{ParamBlock, Witness};
use problem::{BiasKind, ChannelKind, Dynamics, Problem};

use crate::bloch::{AffineChannel, BlochState, CanonicalChannelParams, UnitVec3, DEFAULT_POSITIVITY_SAMPLES};
use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::nelder_mead::{self, NelderMeadOptions};
use crate::rng;

pub const DEFAULT_RESTARTS: usize = 64;
pub const DEFAULT_MAX_ITERS: usize = 2000;
pub const DEFAULT_CONVERGENCE_TOL: f64 = 1e-8;
/// Weight of the quadratic positivity penalty.
pub const PENALTY_WEIGHT: f64 = 1e4;

/// Which channels the search ranges over.
///
/// | class | `Λ_A` | `Λ_E` | `Λ_B` |
/// |---|---|---|---|
/// | `GeneralCPTP` | extremal | extremal | extremal |
/// | `UnitalB` | extremal | extremal | rotation |
/// | `UnitalAEbt` | rotation | extremal CQ | extremal |
/// | `EbtFree` | extremal | extremal CQ | extremal |
/// | `AllUnitary` | rotation | rotation | rotation |
/// | `CanonicalE` | rotation | canonical | rotation |
/// | `ClassicalStochastic` | z-stochastic | z-stochastic | z-stochastic |
///
/// Extremal maps suffice because `𝓑` is affine in each channel. `Indivisible`
/// searches the conditional-rotation family. `ClassicalStochastic` also
/// keeps the state and all four settings on the z axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelClass {
    GeneralCPTP,
    UnitalB,
    UnitalAEbt,
    EbtFree,
    AllUnitary,
    /// `None` searches `(θ, φ)` too.
    CanonicalE(Option<CanonicalChannelParams>),
    Indivisible,
    ClassicalStochastic,
}

impl ChannelClass {
    pub fn name(&self) -> &'static str {
        match self {
            ChannelClass::GeneralCPTP => "general",
            ChannelClass::UnitalB => "unital-b",
            ChannelClass::UnitalAEbt => "unital-a-ebt",
            ChannelClass::EbtFree => "ebt",
            ChannelClass::AllUnitary => "unitary",
            ChannelClass::CanonicalE(_) => "canonical-e",
            ChannelClass::Indivisible => "indivisible",
            ChannelClass::ClassicalStochastic => "classical",
        }
    }

    /// Whether every process in the class is divisible.
    pub fn is_divisible(&self) -> bool {
        !matches!(self, ChannelClass::Indivisible)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BiasMode {
    /// `|v|` fixed, direction searched.
    Fixed(f64),
    Free,
}

impl BiasMode {
    pub fn label(&self) -> String {
        match self {
            BiasMode::Fixed(m) => alloc::format!("fixed:{m}"),
            BiasMode::Free => String::from("free"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintMode {
    /// Parametrizations that are CPTP by construction.
    ExactCptp,
    /// Free affine channels with a penalty on `n` seeded directions.
    SampledPositivity(usize),
}

impl ConstraintMode {
    pub const SAMPLED_DEFAULT: ConstraintMode = ConstraintMode::SampledPositivity(DEFAULT_POSITIVITY_SAMPLES);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizationSpec {
    pub class: ChannelClass,
    pub bias_mode: BiasMode,
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
    pub convergence_tol: f64,
    pub constraint_mode: ConstraintMode,
}

impl OptimizationSpec {
    /// Defaults for everything but the class and bias.
    pub fn new(class: ChannelClass, bias_mode: BiasMode) -> Self {
        Self {
            class,
            bias_mode,
            restarts: DEFAULT_RESTARTS,
            max_iters: DEFAULT_MAX_ITERS,
            seed: 0,
            convergence_tol: DEFAULT_CONVERGENCE_TOL,
            constraint_mode: ConstraintMode::ExactCptp,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidSpec("restarts must be at least 1".into()));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::InvalidSpec("convergence tolerance must be positive".into()));
        }
        if let BiasMode::Fixed(m) = self.bias_mode {
            if !(0.0..=1.0).contains(&m) {
                return Err(Error::InvalidSpec(alloc::format!("bias magnitude {m} outside [0, 1]")));
            }
        }
        if let ChannelClass::CanonicalE(Some(p)) = self.class {
            CanonicalChannelParams::new(p.theta, p.phi).map_err(|e| Error::InvalidSpec(alloc::format!("{e}")))?;
        }
        if let ConstraintMode::SampledPositivity(n) = self.constraint_mode {
            if n == 0 {
                return Err(Error::InvalidSpec("sampled positivity needs at least one direction".into()));
            }
        }
        self.problem().map(|_| ())
    }

    /// Layout of [`OptimizationResult::best_params`].
    pub fn schema(&self) -> Result<Vec<ParamBlock>> {
        let p = self.problem()?;
        let mut blocks = p.blocks();
        blocks.extend(p.settings_blocks());
        Ok(blocks)
    }

    fn problem(&self) -> Result<Problem> {
        use ChannelKind::*;
        let sampled = matches!(self.constraint_mode, ConstraintMode::SampledPositivity(_));
        let bias = match self.bias_mode {
            BiasMode::Free => BiasKind::Free,
            BiasMode::Fixed(m) => BiasKind::Fixed(m),
        };
        let pipeline = |kinds| Ok(Problem { bias, z_only: false, dynamics: Dynamics::Pipeline(kinds) });
        match (self.class, sampled) {
            (ChannelClass::GeneralCPTP, false) => pipeline([Extremal, Extremal, Extremal]),
            (ChannelClass::UnitalB, false) => pipeline([Extremal, Extremal, Rotation]),
            (ChannelClass::UnitalAEbt, false) => pipeline([Rotation, Cq, Extremal]),
            (ChannelClass::EbtFree, false) => pipeline([Extremal, Cq, Extremal]),
            (ChannelClass::AllUnitary, false) => pipeline([Rotation, Rotation, Rotation]),
            (ChannelClass::CanonicalE(fixed), false) => {
                let e = match fixed {
                    Some(p) => Fixed(crate::bloch::canonical_channel(&p)),
                    None => Canonical,
                };
                pipeline([Rotation, e, Rotation])
            }
            (ChannelClass::Indivisible, false) => {
                Ok(Problem { bias, z_only: false, dynamics: Dynamics::ConditionalRotation })
            }
            (ChannelClass::ClassicalStochastic, false) => {
                let bias = match self.bias_mode {
                    BiasMode::Free => BiasKind::FreeZ,
                    BiasMode::Fixed(m) => BiasKind::FixedZ(m),
                };
                Ok(Problem { bias, z_only: true, dynamics: Dynamics::Pipeline([Stochastic; 3]) })
            }
            (ChannelClass::GeneralCPTP, true) => pipeline([Affine, Affine, Affine]),
            (ChannelClass::UnitalB, true) => pipeline([Affine, Affine, AffineUnital]),
            (ChannelClass::UnitalAEbt, true) => pipeline([AffineUnital, Cq, Affine]),
            (ChannelClass::EbtFree, true) => pipeline([Affine, Cq, Affine]),
            (class, true) => Err(Error::InvalidSpec(alloc::format!(
                "class {} has no sampled-positivity form",
                class.name()
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestartRecord {
    pub seed: u64,
    pub value: f64,
    pub iters: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub best_value: f64,
    /// Search parameters of the best restart followed by the settings chosen
    /// in closed form; see [`OptimizationSpec::schema`].
    pub best_params: Vec<f64>,
    pub best_restart: usize,
    pub per_restart: Vec<RestartRecord>,
    pub witness: Witness,
    /// Exact Choi test on every channel of the witness.
    pub audit_cptp: bool,
}

/// Runs `spec.restarts` independent searches and keeps the best.
///
/// Restart `k` starts from a point drawn with seed `derive_seed(seed, k)`.
/// When a simplex collapses before the iteration budget is spent, it is
/// rebuilt around its best vertex until that stops improving the value.
/// Ties go to the lowest restart index.
pub fn optimize_bell(spec: &OptimizationSpec) -> Result<OptimizationResult> {
    spec.validate()?;
    let problem = spec.problem()?;
    let directions = match spec.constraint_mode {
        ConstraintMode::SampledPositivity(n) => {
            let mut r = rng::stream(spec.seed, u64::MAX);
            (0..n).map(|_| rng::unit_vector(&mut r)).collect()
        }
        ConstraintMode::ExactCptp => Vec::new(),
    };
    let search = Search {
        problem,
        directions,
        max_iters: spec.max_iters,
        tol: spec.convergence_tol,
    };
    let (best_restart, per_restart, x) = search.run(spec.restarts, spec.seed);
    let cand = problem.decode(&x);
    let (witness, extra) = problem.finish(&cand);
    let mut best_params = x;
    best_params.extend(extra);
    Ok(OptimizationResult {
        best_value: per_restart[best_restart].value,
        best_params,
        best_restart,
        per_restart,
        audit_cptp: witness.is_cptp(),
        witness,
    })
}

/// Settings-only search for fixed channels and initial state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SettingsOptimum {
    pub value: f64,
    pub a1: UnitVec3,
    pub a2: UnitVec3,
    pub b1: UnitVec3,
    pub b2: UnitVec3,
}

/// Largest `|𝓑|` over all four measurement directions.
pub fn optimize_settings(
    v: BlochState,
    channels: [&AffineChannel; 3],
    restarts: usize,
    seed: u64,
    max_iters: usize,
) -> SettingsOptimum {
    let problem = Problem {
        bias: BiasKind::Given(v.vec()),
        z_only: false,
        dynamics: Dynamics::Pipeline(channels.map(|c| ChannelKind::Fixed(*c))),
    };
    let search = Search { problem, directions: Vec::new(), max_iters, tol: DEFAULT_CONVERGENCE_TOL };
    let (best, records, x) = search.run(restarts.max(1), seed);
    let (witness, _) = problem.finish(&problem.decode(&x));
    let Witness::Scenario(s) = witness else { unreachable!("pipeline problems decode to scenarios") };
    SettingsOptimum { value: records[best].value, a1: s.a1, a2: s.a2, b1: s.b1, b2: s.b2 }
}

struct Search {
    problem: Problem,
    directions: Vec<Vec3>,
    max_iters: usize,
    tol: f64,
}

impl Search {
    fn penalty(&self, cand: &problem::Candidate) -> f64 {
        if self.directions.is_empty() {
            return 0.0;
        }
        let mut total = 0.0;
        for ch in self.problem.penalized(cand) {
            for &r in &self.directions {
                let excess = ch.apply(r).norm() - 1.0;
                if excess > 0.0 {
                    total += excess * excess;
                }
            }
        }
        PENALTY_WEIGHT * total
    }

    fn objective(&self, x: &[f64]) -> f64 {
        let cand = self.problem.decode(x);
        -(self.problem.value(&cand) - self.penalty(&cand))
    }

    fn bell(&self, x: &[f64]) -> f64 {
        self.problem.value(&self.problem.decode(x))
    }

    /// Returns the winning index, every restart's record and the winner's
    /// search vector.
    fn run(&self, restarts: usize, seed: u64) -> (usize, Vec<RestartRecord>, Vec<f64>) {
        let mut records = Vec::with_capacity(restarts);
        let mut best: Option<(usize, Vec<f64>)> = None;
        for k in 0..restarts {
            let child = rng::derive_seed(seed, k as u64);
            let (x, iters, converged) = self.single(child);
            let value = self.bell(&x);
            records.push(RestartRecord { seed: child, value, iters, converged });
            let better = match &best {
                None => true,
                Some((i, _)) => value > records[*i].value,
            };
            if better {
                best = Some((k, x));
            }
        }
        let (k, x) = best.expect("at least one restart");
        (k, records, x)
    }

    fn single(&self, seed: u64) -> (Vec<f64>, usize, bool) {
        let mut x = self.problem.sample_start(&mut rng::prng(seed));
        if x.is_empty() {
            return (x, 0, true);
        }
        let mut used = 0;
        let mut last = f64::INFINITY;
        loop {
            let opts = NelderMeadOptions { max_iters: self.max_iters - used, tol: self.tol, ..Default::default() };
            let r = nelder_mead::minimize(|p| self.objective(p), &x, &opts);
            used += r.iters;
            x = r.x;
            if !r.converged {
                return (x, used, false);
            }
            if !(r.value < last - 1e-15) || used >= self.max_iters {
                return (x, used, true);
            }
            last = r.value;
        }
    }
}
