//! Parameter layouts: how a flat vector of reals becomes a scenario.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::bloch::{
    extremal_cq, is_cptp, rotation_from_euler, canonical_channel,
    AffineChannel, BlochState, CQChannelParams, CanonicalChannelParams, UnitVec3, CPTP_TOL,
};
use crate::bloch::families::extremal_cptp_unconstrained;
use crate::linalg::{Mat3, Vec3};
use crate::math;
use crate::rng::{self, Prng};
use crate::scenario::{bob_response, BobResponse, IndivisibleProcess, IndivisibleScenario, TemporalScenario};

/// A named run of consecutive entries in a parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamBlock {
    pub name: &'static str,
    pub len: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum BiasKind {
    /// `v = ½(1 − cos x) · n̂(θ, φ)`
    Free,
    /// `v = m · n̂(θ, φ)`; no entries when `m = 0`.
    Fixed(f64),
    /// `v = cos x · ẑ`
    FreeZ,
    /// `v = m ẑ`
    FixedZ(f64),
    Given(Vec3),
}

impl BiasKind {
    fn len(self) -> usize {
        match self {
            BiasKind::Free => 3,
            BiasKind::Fixed(m) if m == 0.0 => 0,
            BiasKind::Fixed(_) => 2,
            BiasKind::FreeZ => 1,
            BiasKind::FixedZ(_) | BiasKind::Given(_) => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum ChannelKind {
    /// Kraus-rank-two extreme point: `(x, y)` and two Euler triples.
    Extremal,
    /// Three Euler angles.
    Rotation,
    /// `c`, `r₊`, `r₋` as spherical angle pairs.
    Cq,
    /// `(θ, φ)` of the canonical form.
    Canonical,
    /// Classical stochastic map on the z basis: stay probabilities
    /// `½(1 − cos x)` for `+ẑ` and `½(1 − cos y)` for `−ẑ`.
    Stochastic,
    /// Unconstrained shift and matrix.
    Affine,
    /// Unconstrained matrix, zero shift.
    AffineUnital,
    Fixed(AffineChannel),
}

impl ChannelKind {
    fn len(self) -> usize {
        match self {
            ChannelKind::Extremal => 8,
            ChannelKind::Rotation => 3,
            ChannelKind::Cq => 6,
            ChannelKind::Canonical | ChannelKind::Stochastic => 2,
            ChannelKind::Affine => 12,
            ChannelKind::AffineUnital => 9,
            ChannelKind::Fixed(_) => 0,
        }
    }

    pub(crate) fn is_penalized(self) -> bool {
        matches!(self, ChannelKind::Affine | ChannelKind::AffineUnital)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Dynamics {
    Pipeline([ChannelKind; 3]),
    /// Identity everywhere except a free rotation for `Λ₄₂`.
    ConditionalRotation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Problem {
    pub bias: BiasKind,
    /// Alice and Bob restricted to `±ẑ`; signs are chosen exactly.
    pub z_only: bool,
    pub dynamics: Dynamics,
}

#[derive(Debug, Clone, Copy)]
enum Init {
    Polar,
    Angle,
    Real(f64),
}

/// A decoded point before Bob's settings are chosen.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Candidate {
    Pipeline { v: Vec3, a1: UnitVec3, a2: UnitVec3, channels: [AffineChannel; 3] },
    Indivisible { v: Vec3, a1: UnitVec3, a2: UnitVec3, process: IndivisibleProcess },
}

/// A fully specified optimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Witness {
    Scenario(TemporalScenario),
    Indivisible(IndivisibleScenario),
}

impl Witness {
    pub fn bell(&self) -> f64 {
        match self {
            Witness::Scenario(s) => crate::scenario::bell_value(&crate::scenario::correlations_closed_form(s)),
            Witness::Indivisible(s) => s.bell(),
        }
    }

    pub fn channels(&self) -> Vec<AffineChannel> {
        match self {
            Witness::Scenario(s) => alloc::vec![s.lambda_a, s.lambda_e, s.lambda_b],
            Witness::Indivisible(s) => s.process.channels().iter().map(|c| **c).collect(),
        }
    }

    /// Every channel passes the exact Choi test.
    pub fn is_cptp(&self) -> bool {
        self.channels().iter().all(|c| is_cptp(c, CPTP_TOL))
    }
}

struct Cursor<'a> {
    p: &'a [f64],
    i: usize,
}

impl Cursor<'_> {
    fn next(&mut self) -> f64 {
        let x = self.p[self.i];
        self.i += 1;
        x
    }

    fn unit(&mut self) -> UnitVec3 {
        let theta = self.next();
        UnitVec3::spherical(theta, self.next())
    }

    fn triple(&mut self) -> [f64; 3] {
        [self.next(), self.next(), self.next()]
    }
}

fn half_versine(x: f64) -> f64 {
    0.5 * (1.0 - math::cos(x))
}

impl Problem {
    pub fn blocks(&self) -> Vec<ParamBlock> {
        let mut out = Vec::new();
        let mut push = |name, len| {
            if len > 0 {
                out.push(ParamBlock { name, len });
            }
        };
        push("v", self.bias.len());
        if !self.z_only {
            push("a1", 2);
            push("a2", 2);
        }
        match self.dynamics {
            Dynamics::Pipeline([a, e, b]) => {
                push("lambda_A", a.len());
                push("lambda_E", e.len());
                push("lambda_B", b.len());
            }
            Dynamics::ConditionalRotation => push("lambda_42", 3),
        }
        out
    }

    /// Blocks appended to the search vector once Bob's settings are fixed.
    pub fn settings_blocks(&self) -> Vec<ParamBlock> {
        if self.z_only {
            ["a1", "a2", "b1", "b2"].map(|name| ParamBlock { name, len: 1 }).to_vec()
        } else {
            ["b1", "b2"].map(|name| ParamBlock { name, len: 2 }).to_vec()
        }
    }

    fn inits(&self) -> Vec<Init> {
        let mut out = Vec::new();
        let dir = [Init::Polar, Init::Angle];
        match self.bias {
            BiasKind::Free => out.extend([Init::Angle, Init::Polar, Init::Angle]),
            BiasKind::Fixed(m) if m != 0.0 => out.extend(dir),
            BiasKind::FreeZ => out.push(Init::Angle),
            _ => {}
        }
        if !self.z_only {
            out.extend(dir);
            out.extend(dir);
        }
        let mut channel = |k: ChannelKind| match k {
            ChannelKind::Extremal | ChannelKind::Rotation | ChannelKind::Canonical | ChannelKind::Stochastic => {
                out.extend(core::iter::repeat(Init::Angle).take(k.len()))
            }
            ChannelKind::Cq => (0..3).for_each(|_| out.extend(dir)),
            ChannelKind::Affine => {
                out.extend([Init::Real(0.2); 3]);
                out.extend([Init::Real(0.5); 9]);
            }
            ChannelKind::AffineUnital => out.extend([Init::Real(0.5); 9]),
            ChannelKind::Fixed(_) => {}
        };
        match self.dynamics {
            Dynamics::Pipeline(kinds) => kinds.into_iter().for_each(&mut channel),
            Dynamics::ConditionalRotation => channel(ChannelKind::Rotation),
        }
        out
    }

    /// Random starting point: polar angles in `[0.01, π − 0.01]`, other
    /// angles in `[0, 2π)`, free reals in `[−r, r]`.
    pub fn sample_start(&self, rng: &mut Prng) -> Vec<f64> {
        self.inits()
            .into_iter()
            .map(|init| match init {
                Init::Polar => rng::uniform_in(rng, 0.01, PI - 0.01),
                Init::Angle => rng::uniform_in(rng, 0.0, 2.0 * PI),
                Init::Real(r) => rng::uniform_in(rng, -r, r),
            })
            .collect()
    }

    pub fn decode(&self, p: &[f64]) -> Candidate {
        let mut c = Cursor { p, i: 0 };
        let v = match self.bias {
            BiasKind::Free => {
                let m = half_versine(c.next());
                c.unit().vec() * m
            }
            BiasKind::Fixed(m) if m == 0.0 => Vec3::ZERO,
            BiasKind::Fixed(m) => c.unit().vec() * m,
            BiasKind::FreeZ => Vec3::Z * math::cos(c.next()),
            BiasKind::FixedZ(m) => Vec3::Z * m,
            BiasKind::Given(v) => v,
        };
        let (a1, a2) = if self.z_only { (UnitVec3::Z, UnitVec3::Z) } else { (c.unit(), c.unit()) };
        match self.dynamics {
            Dynamics::Pipeline(kinds) => {
                let channels = kinds.map(|k| decode_channel(k, &mut c));
                Candidate::Pipeline { v, a1, a2, channels }
            }
            Dynamics::ConditionalRotation => {
                let rot = AffineChannel::new(Vec3::ZERO, rotation_from_euler(c.triple()));
                Candidate::Indivisible { v, a1, a2, process: IndivisibleProcess::conditional_rotation(rot) }
            }
        }
    }

    pub fn response(&self, cand: &Candidate) -> BobResponse {
        match cand {
            Candidate::Pipeline { v, a1, a2, channels: [a, e, b] } => {
                bob_response(*v, a, e, b, a1.vec(), a2.vec())
            }
            Candidate::Indivisible { v, a1, a2, process } => process.bob_response(*v, a1.vec(), a2.vec()),
        }
    }

    /// Largest `|𝓑|` over the settings not in the search vector.
    pub fn value(&self, cand: &Candidate) -> f64 {
        let g = self.response(cand);
        if self.z_only {
            z_only_best(&g).0
        } else {
            g.best_bob().0
        }
    }

    /// The complete optimum and the angles of the settings chosen for it.
    pub fn finish(&self, cand: &Candidate) -> (Witness, Vec<f64>) {
        let g = self.response(cand);
        let polar = |u: UnitVec3| u.vec().to_spherical();
        let (a1, a2, b1, b2, extra) = if self.z_only {
            let (_, s2, t1, t2) = z_only_best(&g);
            let axis = |s: f64| if s < 0.0 { (UnitVec3::new(-Vec3::Z).expect("unit"), PI) } else { (UnitVec3::Z, 0.0) };
            let (a2, pa2) = axis(s2);
            let (b1, pb1) = axis(t1);
            let (b2, pb2) = axis(t2);
            (UnitVec3::Z, a2, b1, b2, alloc::vec![0.0, pa2, pb1, pb2])
        } else {
            let (_, b1, b2) = g.best_bob();
            let (a1, a2) = match cand {
                Candidate::Pipeline { a1, a2, .. } | Candidate::Indivisible { a1, a2, .. } => (*a1, *a2),
            };
            let (t1, p1) = polar(b1);
            let (t2, p2) = polar(b2);
            (a1, a2, b1, b2, alloc::vec![t1, p1, t2, p2])
        };
        let witness = match *cand {
            Candidate::Pipeline { v, channels: [lambda_a, lambda_e, lambda_b], .. } => {
                Witness::Scenario(TemporalScenario {
                    v: bloch_state(v),
                    lambda_a,
                    lambda_e,
                    lambda_b,
                    a1,
                    a2,
                    b1,
                    b2,
                })
            }
            Candidate::Indivisible { v, process, .. } => {
                Witness::Indivisible(IndivisibleScenario { process, v: bloch_state(v), a1, a2, b1, b2 })
            }
        };
        (witness, extra)
    }

    /// Channels carrying a positivity penalty.
    pub fn penalized<'a>(&self, cand: &'a Candidate) -> impl Iterator<Item = &'a AffineChannel> {
        let kinds = match self.dynamics {
            Dynamics::Pipeline(k) => k,
            Dynamics::ConditionalRotation => [ChannelKind::Rotation; 3],
        };
        let channels: &'a [AffineChannel] = match cand {
            Candidate::Pipeline { channels, .. } => channels,
            Candidate::Indivisible { .. } => &[],
        };
        channels.iter().zip(kinds).filter(|(_, k)| k.is_penalized()).map(|(c, _)| c)
    }
}

fn bloch_state(v: Vec3) -> BlochState {
    BlochState::new(v).expect("decoded state lies in the ball")
}

/// Alice's first setting fixed to `+ẑ` (a global sign flip of Alice is a
/// symmetry); returns `(value, s₂, t₁, t₂)`.
fn z_only_best(g: &BobResponse) -> (f64, f64, f64, f64) {
    let mut best = (f64::NEG_INFINITY, 1.0, 1.0, 1.0);
    for s2 in [1.0, -1.0] {
        let x = g.g13.z + s2 * g.g23.z;
        let y = g.g14.z - s2 * g.g24.z;
        let value = math::abs(x) + math::abs(y);
        if value > best.0 {
            best = (value, s2, sign(x), sign(y));
        }
    }
    best
}

fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

fn decode_channel(kind: ChannelKind, c: &mut Cursor<'_>) -> AffineChannel {
    match kind {
        ChannelKind::Extremal => {
            let (x, y) = (c.next(), c.next());
            let eu = c.triple();
            extremal_cptp_unconstrained(x, y, eu, c.triple())
        }
        ChannelKind::Rotation => AffineChannel::new(Vec3::ZERO, rotation_from_euler(c.triple())),
        ChannelKind::Cq => {
            let cq = CQChannelParams { c: c.unit(), r_plus: c.unit().vec(), r_minus: c.unit().vec() };
            extremal_cq(&cq)
        }
        ChannelKind::Canonical => {
            let (theta, phi) = (c.next(), c.next());
            canonical_channel(&CanonicalChannelParams { theta, phi })
        }
        ChannelKind::Stochastic => {
            let (p, q) = (half_versine(c.next()), half_versine(c.next()));
            AffineChannel::new(Vec3::new(0.0, 0.0, p - q), Mat3::diag(0.0, 0.0, p + q - 1.0))
        }
        ChannelKind::Affine => {
            let shift = Vec3::from_array(c.triple());
            let m = Mat3([c.triple(), c.triple(), c.triple()]);
            AffineChannel::new(shift, m)
        }
        ChannelKind::AffineUnital => AffineChannel::new(Vec3::ZERO, Mat3([c.triple(), c.triple(), c.triple()])),
        ChannelKind::Fixed(ch) => ch,
    }
}
