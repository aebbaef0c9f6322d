//! Processes whose channel to Bob depends on when Alice measured.

use super::{two_time_correlator, BobResponse, CorrelationSet};
use crate::bloch::{is_cptp, min_choi_eigenvalue, AffineChannel, BlochState, UnitVec3, CPTP_TOL};
use crate::error::{Error, Result};
use crate::linalg::{mat4_mul, pseudo_inverse4, Vec3};

/// `lambda_ji` carries the state from Alice's time `t_i` to Bob's time `t_j`.
///
/// Before `t₂` the system is left alone, so Alice's pre-measurement state is
/// the initial state at either of her times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndivisibleProcess {
    pub lambda_31: AffineChannel,
    pub lambda_41: AffineChannel,
    pub lambda_32: AffineChannel,
    pub lambda_42: AffineChannel,
}

impl IndivisibleProcess {
    pub fn new(
        lambda_31: AffineChannel,
        lambda_41: AffineChannel,
        lambda_32: AffineChannel,
        lambda_42: AffineChannel,
    ) -> Result<Self> {
        let p = Self { lambda_31, lambda_41, lambda_32, lambda_42 };
        for ch in p.channels() {
            if !is_cptp(ch, CPTP_TOL) {
                return Err(Error::NotAChannel { min_eigenvalue: min_choi_eigenvalue(ch) });
            }
        }
        Ok(p)
    }

    /// Identity everywhere except `Λ₄₂ = rotation`.
    pub fn conditional_rotation(rotation: AffineChannel) -> Self {
        let id = AffineChannel::IDENTITY;
        Self { lambda_31: id, lambda_41: id, lambda_32: id, lambda_42: rotation }
    }

    /// `p · self + (1 − p) · depolarizing`, channel by channel.
    pub fn mix_with_depolarizing(&self, p: f64) -> Self {
        let d = AffineChannel::DEPOLARIZING;
        Self {
            lambda_31: self.lambda_31.mix(p, &d),
            lambda_41: self.lambda_41.mix(p, &d),
            lambda_32: self.lambda_32.mix(p, &d),
            lambda_42: self.lambda_42.mix(p, &d),
        }
    }

    pub fn channels(&self) -> [&AffineChannel; 4] {
        [&self.lambda_31, &self.lambda_41, &self.lambda_32, &self.lambda_42]
    }

    /// `g_ij = λ_ji a_i + (v·a_i) L_ji`.
    pub fn bob_response(&self, v: Vec3, a1: Vec3, a2: Vec3) -> BobResponse {
        let g = |ch: &AffineChannel, a: Vec3| ch.matrix.mul_vec(a) + ch.shift * v.dot(a);
        BobResponse {
            g13: g(&self.lambda_31, a1),
            g14: g(&self.lambda_41, a1),
            g23: g(&self.lambda_32, a2),
            g24: g(&self.lambda_42, a2),
        }
    }

    /// Correlators by outcome enumeration, using `Λ_ji` for the pair `(i, j)`.
    pub fn correlations(&self, v: BlochState, a: [UnitVec3; 2], b: [UnitVec3; 2]) -> CorrelationSet {
        let v = v.vec();
        CorrelationSet {
            e13: two_time_correlator(v, a[0], &self.lambda_31, b[0]),
            e14: two_time_correlator(v, a[0], &self.lambda_41, b[1]),
            e23: two_time_correlator(v, a[1], &self.lambda_32, b[0]),
            e24: two_time_correlator(v, a[1], &self.lambda_42, b[1]),
        }
    }
}

/// An indivisible process together with the initial state and settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndivisibleScenario {
    pub process: IndivisibleProcess,
    pub v: BlochState,
    pub a1: UnitVec3,
    pub a2: UnitVec3,
    pub b1: UnitVec3,
    pub b2: UnitVec3,
}

impl IndivisibleScenario {
    pub fn correlations(&self) -> CorrelationSet {
        self.process.correlations(self.v, [self.a1, self.a2], [self.b1, self.b2])
    }

    /// Closed-form correlators via [`IndivisibleProcess::bob_response`].
    pub fn correlations_closed_form(&self) -> CorrelationSet {
        self.process
            .bob_response(self.v.vec(), self.a1.vec(), self.a2.vec())
            .correlations(self.b1, self.b2)
    }

    pub fn bell(&self) -> f64 {
        super::bell_value(&self.correlations())
    }
}

pub fn bell_indivisible(
    p: &IndivisibleProcess,
    v: BlochState,
    a1: UnitVec3,
    a2: UnitVec3,
    b1: UnitVec3,
    b2: UnitVec3,
) -> f64 {
    super::bell_value(&p.correlations(v, [a1, a2], [b1, b2]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Divisibility {
    Divisible,
    Indivisible,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivisibilityReport {
    pub verdict: Divisibility,
    /// `max(solve_residual, consistency_residual)`
    pub residual: f64,
    /// `‖Λ₄₃∘Λ₃₂ − Λ₄₂‖` for the least-squares factor.
    pub solve_residual: f64,
    /// `‖Λ₄₃∘Λ₃₁ − Λ₄₁‖`
    pub consistency_residual: f64,
    /// The recovered `Λ₄₃`.
    pub lambda_43: AffineChannel,
    pub factor_is_cptp: bool,
}

/// Looks for a CPTP `Λ₄₃` with `Λ₄₂ = Λ₄₃∘Λ₃₂` and `Λ₄₁ = Λ₄₃∘Λ₃₁`.
///
/// `Λ₄₃` is the least-squares (pseudo-inverse) solution of the first
/// equation in homogeneous coordinates; residuals use the max-abs-entry norm.
pub fn is_divisible(p: &IndivisibleProcess, tol: f64) -> DivisibilityReport {
    let t32 = p.lambda_32.to_homogeneous();
    let t42 = p.lambda_42.to_homogeneous();
    let lambda_43 = AffineChannel::from_homogeneous(&mat4_mul(&t42, &pseudo_inverse4(&t32, 1e-12)));
    let solve_residual = lambda_43.compose(&p.lambda_32).max_abs_diff(&p.lambda_42);
    let consistency_residual = lambda_43.compose(&p.lambda_31).max_abs_diff(&p.lambda_41);
    let factor_is_cptp = is_cptp(&lambda_43, CPTP_TOL);
    let divisible = solve_residual <= tol && consistency_residual <= tol && factor_is_cptp;
    DivisibilityReport {
        verdict: if divisible { Divisibility::Divisible } else { Divisibility::Indivisible },
        residual: solve_residual.max(consistency_residual),
        solve_residual,
        consistency_residual,
        lambda_43,
        factor_is_cptp,
    }
}
