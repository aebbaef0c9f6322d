//! The temporal CHSH scenario.
//!
//! Alice measures at `t₁` or `t₂`, Bob at `t₃` or `t₄`; channels `Λ_A`
//! (`t₁→t₂`), `Λ_E` (`t₂→t₃`) and `Λ_B` (`t₃→t₄`) act in between. Every
//! correlator is linear in Bob's direction, `E_ij = b_j · g_ij`, and the
//! response vectors `g_ij` are what the closed forms and the optimizer work
//! with.

mod indivisible;

pub use indivisible::{
    bell_indivisible, is_divisible, Divisibility, DivisibilityReport, IndivisibleProcess, IndivisibleScenario,
};

use crate::bloch::{
    extremal_cq, is_cptp, is_unitary, rotation_channel, AffineChannel, BlochState,
    CQChannelParams, UnitVec3, CPTP_TOL,
};
use crate::error::{Error, Result};
use crate::linalg::Vec3;

/// Slack used when checking rotation inputs.
pub const UNITARY_TOL: f64 = 1e-9;

/// Outcome of a ±1 measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }
}

/// Projective measurement of `σ·direction` with a recorded outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DichotomicMeasurement {
    pub direction: UnitVec3,
    pub outcome: Outcome,
}

impl DichotomicMeasurement {
    /// Born probability `(1 + k d·a)/2` for a pre-measurement Bloch vector `d`.
    pub fn probability(&self, pre: Vec3) -> f64 {
        0.5 * (1.0 + self.outcome.sign() * self.direction.dot(pre))
    }

    /// The projector's Bloch vector `k a`.
    pub fn post_state(&self) -> Vec3 {
        self.direction.vec() * self.outcome.sign()
    }
}

/// `Σ_k k p_k (b · Λ(k a))` for a measurement along `a` on pre-state `pre`,
/// followed by `channel` and a readout along `b`.
pub fn two_time_correlator(pre: Vec3, a: UnitVec3, channel: &AffineChannel, b: UnitVec3) -> f64 {
    Outcome::BOTH
        .iter()
        .map(|&outcome| {
            let m = DichotomicMeasurement { direction: a, outcome };
            outcome.sign() * m.probability(pre) * b.dot(channel.apply(m.post_state()))
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemporalScenario {
    pub v: BlochState,
    pub lambda_a: AffineChannel,
    pub lambda_e: AffineChannel,
    pub lambda_b: AffineChannel,
    pub a1: UnitVec3,
    pub a2: UnitVec3,
    pub b1: UnitVec3,
    pub b2: UnitVec3,
}

/// Which channel failed admission into a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelSlot {
    A,
    E,
    B,
}

impl TemporalScenario {
    /// Builds a scenario after checking every channel with [`is_cptp`].
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        v: BlochState,
        lambda_a: AffineChannel,
        lambda_e: AffineChannel,
        lambda_b: AffineChannel,
        a1: UnitVec3,
        a2: UnitVec3,
        b1: UnitVec3,
        b2: UnitVec3,
    ) -> Result<Self> {
        let s = Self { v, lambda_a, lambda_e, lambda_b, a1, a2, b1, b2 };
        s.validate().map_err(|(_, e)| e)?;
        Ok(s)
    }

    /// All-identity channels with the given settings and initial state.
    pub fn identity(v: BlochState, a1: UnitVec3, a2: UnitVec3, b1: UnitVec3, b2: UnitVec3) -> Self {
        let id = AffineChannel::IDENTITY;
        Self { v, lambda_a: id, lambda_e: id, lambda_b: id, a1, a2, b1, b2 }
    }

    /// Re-checks complete positivity, reporting the first failing slot.
    pub fn validate(&self) -> core::result::Result<(), (ChannelSlot, Error)> {
        for (slot, ch) in [
            (ChannelSlot::A, &self.lambda_a),
            (ChannelSlot::E, &self.lambda_e),
            (ChannelSlot::B, &self.lambda_b),
        ] {
            if !is_cptp(ch, CPTP_TOL) {
                let min_eigenvalue = crate::bloch::min_choi_eigenvalue(ch);
                return Err((slot, Error::NotAChannel { min_eigenvalue }));
            }
        }
        Ok(())
    }

    fn alice(&self, i: u8) -> Option<UnitVec3> {
        match i {
            1 => Some(self.a1),
            2 => Some(self.a2),
            _ => None,
        }
    }

    fn bob(&self, j: u8) -> Option<UnitVec3> {
        match j {
            3 => Some(self.b1),
            4 => Some(self.b2),
            _ => None,
        }
    }
}

/// The four two-time correlators.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CorrelationSet {
    pub e13: f64,
    pub e14: f64,
    pub e23: f64,
    pub e24: f64,
}

impl CorrelationSet {
    pub fn to_array(self) -> [f64; 4] {
        [self.e13, self.e14, self.e23, self.e24]
    }

    pub fn max_abs_diff(&self, o: &CorrelationSet) -> f64 {
        self.to_array()
            .iter()
            .zip(o.to_array())
            .fold(0.0, |m, (a, b)| f64::max(m, libm::fabs(a - b)))
    }
}

/// `E₁₃ + E₁₄ + E₂₃ − E₂₄`
pub fn bell_value(c: &CorrelationSet) -> f64 {
    c.e13 + c.e14 + c.e23 - c.e24
}

/// `E_ij` by explicit enumeration of Alice's and Bob's outcomes.
///
/// Alice's pre-measurement state is `v` at `t₁` and `Λ_A(v)` at `t₂`. Her
/// post-measurement state `k a_i` then runs through every channel between
/// her time and Bob's.
pub fn correlation_oracle(s: &TemporalScenario, i: u8, j: u8) -> Result<f64> {
    let (Some(a), Some(b)) = (s.alice(i), s.bob(j)) else {
        return Err(Error::InvalidIndex { i, j });
    };
    let v = s.v.vec();
    let pre = if i == 1 { v } else { s.lambda_a.apply(v) };
    let mut evolve = if i == 1 { s.lambda_a } else { AffineChannel::IDENTITY };
    evolve = s.lambda_e.compose(&evolve);
    if j == 4 {
        evolve = s.lambda_b.compose(&evolve);
    }
    let mut total = 0.0;
    for k in Outcome::BOTH {
        let alice = DichotomicMeasurement { direction: a, outcome: k };
        let p_alice = alice.probability(pre);
        let reaching_bob = evolve.apply(alice.post_state());
        for l in Outcome::BOTH {
            let bob = DichotomicMeasurement { direction: b, outcome: l };
            total += k.sign() * l.sign() * p_alice * bob.probability(reaching_bob);
        }
    }
    Ok(total)
}

/// All four correlators by [`correlation_oracle`].
pub fn correlations_oracle(s: &TemporalScenario) -> CorrelationSet {
    let e = |i, j| correlation_oracle(s, i, j).expect("indices are in range");
    CorrelationSet { e13: e(1, 3), e14: e(1, 4), e23: e(2, 3), e24: e(2, 4) }
}

/// Response vectors `g_ij` with `E_ij = b_j · g_ij`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BobResponse {
    pub g13: Vec3,
    pub g14: Vec3,
    pub g23: Vec3,
    pub g24: Vec3,
}

impl BobResponse {
    pub fn correlations(&self, b1: UnitVec3, b2: UnitVec3) -> CorrelationSet {
        CorrelationSet {
            e13: b1.dot(self.g13),
            e14: b2.dot(self.g14),
            e23: b1.dot(self.g23),
            e24: b2.dot(self.g24),
        }
    }

    /// `𝓑 = b₁·(g₁₃ + g₂₃) + b₂·(g₁₄ − g₂₄)`: the vectors Bob's settings pair with.
    pub fn bell_directions(&self) -> (Vec3, Vec3) {
        (self.g13 + self.g23, self.g14 - self.g24)
    }

    /// Maximum of `𝓑` (equivalently `|𝓑|`, since `𝓑` is odd in Bob's
    /// settings) over unit `b₁, b₂`, with the maximizing directions.
    pub fn best_bob(&self) -> (f64, UnitVec3, UnitVec3) {
        let (x, y) = self.bell_directions();
        let pick = |w: Vec3| UnitVec3::normalize(w).unwrap_or(UnitVec3::Z);
        (x.norm() + y.norm(), pick(x), pick(y))
    }
}

/// The general-channel response vectors, read off the closed-form
/// correlators:
///
/// ```text
/// g₁₃ = γα a₁ + (v·a₁)(E + γA)
/// g₁₄ = βγα a₁ + (v·a₁)(B + β(E + γA))
/// g₂₃ = γ a₂ + (w·a₂) E
/// g₂₄ = βγ a₂ + (w·a₂)(B + βE),      w = A + αv
/// ```
pub fn bob_response(
    v: Vec3,
    lambda_a: &AffineChannel,
    lambda_e: &AffineChannel,
    lambda_b: &AffineChannel,
    a1: Vec3,
    a2: Vec3,
) -> BobResponse {
    let (big_a, alpha) = (lambda_a.shift, &lambda_a.matrix);
    let (big_e, gamma) = (lambda_e.shift, &lambda_e.matrix);
    let (big_b, beta) = (lambda_b.shift, &lambda_b.matrix);
    let va1 = v.dot(a1);
    let w = big_a + alpha.mul_vec(v);
    let wa2 = w.dot(a2);
    let e_plus_ga = big_e + gamma.mul_vec(big_a);
    let gaa1 = gamma.mul_vec(alpha.mul_vec(a1));
    let ga2 = gamma.mul_vec(a2);
    BobResponse {
        g13: gaa1 + e_plus_ga * va1,
        g14: beta.mul_vec(gaa1) + (big_b + beta.mul_vec(e_plus_ga)) * va1,
        g23: ga2 + big_e * wa2,
        g24: beta.mul_vec(ga2) + (big_b + beta.mul_vec(big_e)) * wa2,
    }
}

fn response_of(s: &TemporalScenario) -> BobResponse {
    bob_response(s.v.vec(), &s.lambda_a, &s.lambda_e, &s.lambda_b, s.a1.vec(), s.a2.vec())
}

/// The four closed-form correlators for arbitrary channels.
pub fn correlations_closed_form(s: &TemporalScenario) -> CorrelationSet {
    response_of(s).correlations(s.b1, s.b2)
}

/// The closed-form correlators when `Λ_E` is the classical-quantum map
/// `cq`, written in terms of `s = r₊ − r₋`, `t = r₊ + r₋` and `w = A + αv`.
pub fn correlations_ebt(
    v: BlochState,
    lambda_a: &AffineChannel,
    cq: &CQChannelParams,
    lambda_b: &AffineChannel,
    a: [UnitVec3; 2],
    b: [UnitVec3; 2],
) -> CorrelationSet {
    let v = v.vec();
    let (big_a, alpha) = (lambda_a.shift, &lambda_a.matrix);
    let (big_b, beta) = (lambda_b.shift, &lambda_b.matrix);
    let (a1, a2) = (a[0].vec(), a[1].vec());
    let (b1, b2) = (b[0].vec(), b[1].vec());
    let c = cq.c.vec();
    let (s, t) = (cq.s(), cq.t());
    let (rp, rm) = (cq.r_plus, cq.r_minus);
    let w = big_a + alpha.mul_vec(v);
    let c_aa1 = c.dot(alpha.mul_vec(a1));
    let va1 = v.dot(a1);
    let ca = c.dot(big_a);
    let ca2 = c.dot(a2);
    let a2w = a2.dot(w);

    let e13 = 0.5 * (c_aa1 * b1.dot(s) + va1 * b1.dot(t)) + 0.5 * (va1 * ca * b1.dot(s));
    let e14 = 0.5 * c_aa1 * b2.dot(beta.mul_vec(s))
        + va1 * b2.dot(big_b)
        + 0.5 * va1 * b2.dot(beta.mul_vec(rp * (1.0 + ca) + rm * (1.0 - ca)));
    let e23 = 0.5 * (ca2 * b1.dot(s) + a2w * b1.dot(t));
    let e24 = 0.5 * ca2 * b2.dot(beta.mul_vec(s))
        + a2w * b2.dot(big_b)
        + 0.5 * a2w * b2.dot(beta.mul_vec(t));
    CorrelationSet { e13, e14, e23, e24 }
}

/// The two vectors that make the Bell function look like a standard CHSH
/// expression in Bob's settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiVectors {
    pub xi1: Vec3,
    pub xi2: Vec3,
}

/// `ξ₁ = (v·a₁)E + γ[(v·a₁)A + αa₁]`, `ξ₂ = γa₂ + [(A + αv)·a₂]E`.
pub fn xi_vectors(s: &TemporalScenario) -> XiVectors {
    let v = s.v.vec();
    let (a1, a2) = (s.a1.vec(), s.a2.vec());
    let (big_a, alpha) = (s.lambda_a.shift, &s.lambda_a.matrix);
    let (big_e, gamma) = (s.lambda_e.shift, &s.lambda_e.matrix);
    let va1 = v.dot(a1);
    let xi1 = big_e * va1 + gamma.mul_vec(big_a * va1 + alpha.mul_vec(a1));
    let xi2 = gamma.mul_vec(a2) + big_e * (big_a + alpha.mul_vec(v)).dot(a2);
    XiVectors { xi1, xi2 }
}

/// `b₁·(ξ₁ + ξ₂) + b₂·β(ξ₁ − ξ₂) + [v·a₁ − (A + αv)·a₂](B·b₂)`
pub fn bell_closed_form_q(s: &TemporalScenario) -> f64 {
    let XiVectors { xi1, xi2 } = xi_vectors(s);
    let v = s.v.vec();
    let (b1, b2) = (s.b1.vec(), s.b2.vec());
    let w = s.lambda_a.shift + s.lambda_a.matrix.mul_vec(v);
    let bias_term = v.dot(s.a1.vec()) - w.dot(s.a2.vec());
    b1.dot(xi1 + xi2) + b2.dot(s.lambda_b.matrix.mul_vec(xi1 - xi2)) + bias_term * s.lambda_b.shift.dot(b2)
}

/// `|ξ₁ + ξ₂| + |ξ₁ − ξ₂|`: the largest value of the ξ form over Bob's
/// settings when `Λ_B` is a rotation, and an upper bound for any unital `Λ_B`.
pub fn optimal_bob_bound(xi: &XiVectors) -> f64 {
    (xi.xi1 + xi.xi2).norm() + (xi.xi1 - xi.xi2).norm()
}

/// The rotated-frame vectors for rotation `Λ_A`, `Λ_B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaVectors {
    pub eta1: Vec3,
    pub eta2: Vec3,
    /// `α a₁`
    pub a1_rot: Vec3,
    /// `α v`
    pub v_rot: Vec3,
    /// `βᵀ b₂`
    pub b2_rot: Vec3,
}

impl EtaVectors {
    /// `η₁·(b₁ + b₂′) + η₂·(b₁ − b₂′)`
    pub fn bell(&self, b1: UnitVec3) -> f64 {
        let b1 = b1.vec();
        self.eta1.dot(b1 + self.b2_rot) + self.eta2.dot(b1 - self.b2_rot)
    }
}

/// `η₁ = (v′·a₁′)E + γa₁′`, `η₂ = (v′·a₂)E + γa₂` with `a₁′ = αa₁`,
/// `v′ = αv`, `b₂′ = βᵀb₂`.
#[allow(clippy::too_many_arguments)]
pub fn eta_vectors(
    v: BlochState,
    alpha_rotation: &AffineChannel,
    beta_rotation: &AffineChannel,
    lambda_e: &AffineChannel,
    a1: UnitVec3,
    a2: UnitVec3,
    _b1: UnitVec3,
    b2: UnitVec3,
) -> Result<EtaVectors> {
    if !is_unitary(alpha_rotation, UNITARY_TOL) || !is_unitary(beta_rotation, UNITARY_TOL) {
        return Err(Error::NotUnitary);
    }
    let alpha = &alpha_rotation.matrix;
    let a1_rot = alpha.mul_vec(a1.vec());
    let v_rot = alpha.mul_vec(v.vec());
    let b2_rot = beta_rotation.matrix.transpose().mul_vec(b2.vec());
    let (big_e, gamma) = (lambda_e.shift, &lambda_e.matrix);
    Ok(EtaVectors {
        eta1: big_e * v_rot.dot(a1_rot) + gamma.mul_vec(a1_rot),
        eta2: big_e * v_rot.dot(a2.vec()) + gamma.mul_vec(a2.vec()),
        a1_rot,
        v_rot,
        b2_rot,
    })
}

/// Three σ_z readouts of a maximally mixed qubit with a Hadamard between
/// consecutive times. Returns `(E₁₂, E₂₃, E₁₃)` for measurements at the two
/// named times only.
pub fn hadamard_three_step() -> (f64, f64, f64) {
    let axis = UnitVec3::normalize(Vec3::new(1.0, 0.0, 1.0)).expect("non-zero axis");
    let h = rotation_channel(axis, core::f64::consts::PI);
    let z = UnitVec3::Z;
    let pre = |t: u32| (1..t).fold(Vec3::ZERO, |r, _| h.apply(r));
    let between = |from: u32, to: u32| {
        (from..to).fold(AffineChannel::IDENTITY, |acc, _| h.compose(&acc))
    };
    let corr = |i: u32, j: u32| two_time_correlator(pre(i), z, &between(i, j), z);
    (corr(1, 2), corr(2, 3), corr(1, 3))
}

/// Builds the scenario with `Λ_E = extremal_cq(cq)`; handy for comparing the
/// two closed forms.
pub fn ebt_scenario(
    v: BlochState,
    lambda_a: AffineChannel,
    cq: &CQChannelParams,
    lambda_b: AffineChannel,
    a: [UnitVec3; 2],
    b: [UnitVec3; 2],
) -> TemporalScenario {
    TemporalScenario {
        v,
        lambda_a,
        lambda_e: extremal_cq(cq),
        lambda_b,
        a1: a[0],
        a2: a[1],
        b1: b[0],
        b2: b[1],
    }
}

/// Random scenario: Ginibre channels, a uniform state in the ball and
/// uniform settings.
pub fn random_scenario_with(rng: &mut crate::rng::Prng) -> TemporalScenario {
    use crate::bloch::random_cptp_with;
    use crate::rng::{ball_vector, unit_vector};
    let ch = |rng: &mut crate::rng::Prng| random_cptp_with(rng).expect("Ginibre draw");
    let lambda_a = ch(rng);
    let lambda_e = ch(rng);
    let lambda_b = ch(rng);
    let v = BlochState::new(ball_vector(rng)).expect("inside the ball");
    let mut unit = || UnitVec3::normalize(unit_vector(rng)).expect("unit");
    TemporalScenario { v, lambda_a, lambda_e, lambda_b, a1: unit(), a2: unit(), b1: unit(), b2: unit() }
}

#[cfg(test)]
mod tests;
