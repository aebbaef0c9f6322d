//! Qubit states and channels in the Bloch (affine) representation.
//!
//! A qubit channel acts on Bloch vectors as `r ↦ L + λ r`. That pair is the
//! working representation for everything downstream; Choi matrices and Kraus
//! operators are used to certify complete positivity and to build channels.

mod choi;
pub(crate) mod families;

pub use choi::{
    from_kraus, is_cptp, is_entanglement_breaking, is_unital, is_unitary, min_choi_eigenvalue,
    positivity_sampled, to_choi, ChoiMatrix, KrausOperators,
};
pub use families::{
    canonical_channel, extremal_cptp, extremal_cq, random_cptp, random_cptp_with,
    random_unit, random_unital_with, random_unitary_with, replace_channel, rotation_channel,
    rotation_from_euler, su2_from_euler, werner_channel, CQChannelParams,
    CanonicalChannelParams, KrausRank2Params, WernerChannelSpec,
};

use crate::error::{Error, Result};
use crate::linalg::{Mat3, Mat4, Vec3};
use crate::math;

/// Slack allowed on unit-length and Bloch-ball checks.
pub const NORM_TOL: f64 = 1e-9;
/// Tolerance on the minimum Choi eigenvalue used by [`is_cptp`].
pub const CPTP_TOL: f64 = 1e-10;
/// Default number of sampled directions for [`positivity_sampled`].
pub const DEFAULT_POSITIVITY_SAMPLES: usize = 256;

/// A direction on the unit sphere (measurement axis).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVec3(Vec3);

impl UnitVec3 {
    pub const X: UnitVec3 = UnitVec3(Vec3::X);
    pub const Y: UnitVec3 = UnitVec3(Vec3::Y);
    pub const Z: UnitVec3 = UnitVec3(Vec3::Z);

    /// Accepts `v` if its length is within [`NORM_TOL`] of one.
    pub fn new(v: Vec3) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::NonFinite("unit vector"));
        }
        let norm = v.norm();
        if math::abs(norm - 1.0) > NORM_TOL {
            return Err(Error::NotUnit { norm });
        }
        Ok(Self(v))
    }

    /// Normalizes any non-zero finite vector.
    pub fn normalize(v: Vec3) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::NonFinite("unit vector"));
        }
        v.normalized()
            .map(Self)
            .ok_or(Error::NotUnit { norm: 0.0 })
    }

    pub fn spherical(theta: f64, phi: f64) -> Self {
        Self(Vec3::spherical(theta, phi))
    }

    pub fn vec(self) -> Vec3 {
        self.0
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.0.dot(o)
    }
}

impl From<UnitVec3> for Vec3 {
    fn from(u: UnitVec3) -> Vec3 {
        u.0
    }
}

/// A qubit state `ρ = ½(𝟙 + σ·v)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlochState(Vec3);

impl BlochState {
    pub const MAXIMALLY_MIXED: BlochState = BlochState(Vec3::ZERO);

    pub fn new(v: Vec3) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::NonFinite("Bloch vector"));
        }
        let norm = v.norm();
        if norm > 1.0 + NORM_TOL {
            return Err(Error::InvalidBloch { norm });
        }
        Ok(Self(v))
    }

    pub fn vec(self) -> Vec3 {
        self.0
    }
}

/// A trace- and hermiticity-preserving qubit map `r ↦ shift + matrix · r`.
///
/// Construction does not check complete positivity; use [`is_cptp`] before
/// admitting a channel into a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineChannel {
    pub shift: Vec3,
    pub matrix: Mat3,
}

impl Default for AffineChannel {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl AffineChannel {
    pub const IDENTITY: AffineChannel = AffineChannel {
        shift: Vec3::ZERO,
        matrix: Mat3::IDENTITY,
    };

    /// The fully depolarizing channel, `ρ ↦ 𝟙/2`.
    pub const DEPOLARIZING: AffineChannel = AffineChannel {
        shift: Vec3::ZERO,
        matrix: Mat3::ZERO,
    };

    pub const fn new(shift: Vec3, matrix: Mat3) -> Self {
        Self { shift, matrix }
    }

    pub fn apply(&self, r: Vec3) -> Vec3 {
        self.shift + self.matrix.mul_vec(r)
    }

    /// `self ∘ inner`: first `inner`, then `self`.
    pub fn compose(&self, inner: &AffineChannel) -> AffineChannel {
        AffineChannel {
            shift: self.shift + self.matrix.mul_vec(inner.shift),
            matrix: self.matrix.mul_mat(&inner.matrix),
        }
    }

    /// Convex combination `p · self + (1 − p) · other`.
    pub fn mix(&self, p: f64, other: &AffineChannel) -> AffineChannel {
        AffineChannel {
            shift: self.shift * p + other.shift * (1.0 - p),
            matrix: self.matrix.scale(p).add(&other.matrix.scale(1.0 - p)),
        }
    }

    /// Homogeneous 4×4 form `[[1, 0], [L, λ]]`; composition becomes a
    /// matrix product.
    pub fn to_homogeneous(&self) -> Mat4 {
        let mut m = [[0.0; 4]; 4];
        m[0][0] = 1.0;
        let l = self.shift.to_array();
        for i in 0..3 {
            m[i + 1][0] = l[i];
            m[i + 1][1..4].copy_from_slice(&self.matrix.0[i]);
        }
        m
    }

    /// Reads rows 1..4 of a homogeneous matrix; row 0 is ignored.
    pub fn from_homogeneous(m: &Mat4) -> AffineChannel {
        let mut matrix = [[0.0; 3]; 3];
        for (i, row) in matrix.iter_mut().enumerate() {
            row.copy_from_slice(&m[i + 1][1..4]);
        }
        AffineChannel {
            shift: Vec3::new(m[1][0], m[2][0], m[3][0]),
            matrix: Mat3(matrix),
        }
    }

    /// Largest absolute difference over all twelve parameters.
    pub fn max_abs_diff(&self, o: &AffineChannel) -> f64 {
        self.shift
            .max_abs_diff(o.shift)
            .max(self.matrix.max_abs_diff(&o.matrix))
    }

    pub fn is_finite(&self) -> bool {
        self.shift.is_finite() && self.matrix.is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apply_examples() {
        let r = Vec3::Z;
        assert_eq!(AffineChannel::IDENTITY.apply(r), Vec3::Z);
        let replace = AffineChannel::new(Vec3::X, Mat3::ZERO);
        assert_eq!(replace.apply(r), Vec3::X);
        let w = werner_channel(WernerChannelSpec::new(0.5).unwrap());
        assert_eq!(w.apply(r), Vec3::new(0.0, 0.0, 0.5));
    }

    #[test]
    fn compose_examples() {
        let ch = random_cptp(3).unwrap();
        assert!(AffineChannel::IDENTITY.compose(&ch).max_abs_diff(&ch) <= 1e-15);
        let w = |p| werner_channel(WernerChannelSpec::new(p).unwrap());
        assert!(w(0.3).compose(&w(0.5)).max_abs_diff(&w(0.15)) < 1e-15);
    }

    #[test]
    fn unit_and_bloch_validation() {
        assert!(UnitVec3::new(Vec3::new(1.0, 1e-10, 0.0)).is_ok());
        assert!(matches!(
            UnitVec3::new(Vec3::new(1.1, 0.0, 0.0)),
            Err(Error::NotUnit { .. })
        ));
        assert!(UnitVec3::normalize(Vec3::ZERO).is_err());
        assert!(BlochState::new(Vec3::new(0.0, 0.6, 0.8)).is_ok());
        assert!(matches!(
            BlochState::new(Vec3::new(0.0, 0.8, 0.8)),
            Err(Error::InvalidBloch { .. })
        ));
        assert!(BlochState::new(Vec3::new(f64::NAN, 0.0, 0.0)).is_err());
    }

    #[test]
    fn homogeneous_form_composes() {
        let f = random_cptp(1).unwrap();
        let g = random_cptp(2).unwrap();
        let h = crate::linalg::mat4_mul(&g.to_homogeneous(), &f.to_homogeneous());
        assert!(AffineChannel::from_homogeneous(&h).max_abs_diff(&g.compose(&f)) < 1e-15);
    }
}
