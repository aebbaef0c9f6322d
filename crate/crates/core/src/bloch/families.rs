//! Named channel families and random channel samplers.

use num_complex::Complex;

use super::{from_kraus, AffineChannel, UnitVec3, NORM_TOL};
use crate::error::{Error, Result};
use crate::linalg::{adjoint, mat_add, mat_mul, Mat2c, Mat3, Vec3, C_ZERO};
use crate::math;
use crate::rng::{self, Prng};

/// Measure along `c`, then prepare `r_plus` or `r_minus`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CQChannelParams {
    pub c: UnitVec3,
    pub r_plus: Vec3,
    pub r_minus: Vec3,
}

impl CQChannelParams {
    pub fn new(c: UnitVec3, r_plus: Vec3, r_minus: Vec3) -> Result<Self> {
        for r in [r_plus, r_minus] {
            if !r.is_finite() {
                return Err(Error::NonFinite("CQ output"));
            }
            if r.norm() > 1.0 + NORM_TOL {
                return Err(Error::InvalidBloch { norm: r.norm() });
            }
        }
        Ok(Self { c, r_plus, r_minus })
    }

    /// `s = r₊ − r₋`
    pub fn s(&self) -> Vec3 {
        self.r_plus - self.r_minus
    }

    /// `t = r₊ + r₋`
    pub fn t(&self) -> Vec3 {
        self.r_plus + self.r_minus
    }

    /// Both outputs pure.
    pub fn is_extremal(&self) -> bool {
        math::abs(self.r_plus.norm() - 1.0) <= NORM_TOL
            && math::abs(self.r_minus.norm() - 1.0) <= NORM_TOL
    }
}

/// Kraus-rank-two extremal map `A_i = U S_i V†` with
/// `S₁ = diag(s, t)`, `S₂ = [[0, √(1−t²)], [√(1−s²), 0]]`.
///
/// `U` and `V` are special unitaries given as z-y-z Euler angles; global
/// phases do not affect the channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrausRank2Params {
    pub s: f64,
    pub t: f64,
    pub euler_u: [f64; 3],
    pub euler_v: [f64; 3],
}

impl KrausRank2Params {
    pub fn new(s: f64, t: f64, euler_u: [f64; 3], euler_v: [f64; 3]) -> Result<Self> {
        for (name, value) in [("s", s), ("t", t)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::OutOfRange { name, value });
            }
        }
        if euler_u.iter().chain(&euler_v).any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("Euler angle"));
        }
        Ok(Self { s, t, euler_u, euler_v })
    }

    pub fn kraus(&self) -> [Mat2c; 2] {
        let sq = |x: f64| math::sqrt((1.0 - x * x).max(0.0));
        kraus_pair(self.s, self.t, sq(self.t), sq(self.s), self.euler_u, self.euler_v)
    }
}

fn kraus_pair(s1: f64, t1: f64, s2_top: f64, s2_bottom: f64, eu: [f64; 3], ev: [f64; 3]) -> [Mat2c; 2] {
    let r = |x: f64| Complex::new(x, 0.0);
    let u = su2_from_euler(eu);
    let v_dag = adjoint(&su2_from_euler(ev));
    let sa = [[r(s1), C_ZERO], [C_ZERO, r(t1)]];
    let sb = [[C_ZERO, r(s2_top)], [r(s2_bottom), C_ZERO]];
    [
        mat_mul(&mat_mul(&u, &sa), &v_dag),
        mat_mul(&mat_mul(&u, &sb), &v_dag),
    ]
}

/// `Rz(a) Ry(b) Rz(c)` in SU(2), with `Rz(a) = diag(e^{−ia/2}, e^{ia/2})`.
pub fn su2_from_euler(angles: [f64; 3]) -> Mat2c {
    let rz = |a: f64| -> Mat2c {
        [
            [Complex::from_polar(1.0, -a / 2.0), C_ZERO],
            [C_ZERO, Complex::from_polar(1.0, a / 2.0)],
        ]
    };
    let (c, s) = (math::cos(angles[1] / 2.0), math::sin(angles[1] / 2.0));
    let ry: Mat2c = [
        [Complex::new(c, 0.0), Complex::new(-s, 0.0)],
        [Complex::new(s, 0.0), Complex::new(c, 0.0)],
    ];
    mat_mul(&mat_mul(&rz(angles[0]), &ry), &rz(angles[2]))
}

/// The SO(3) image of [`su2_from_euler`]: `Rz(a) Ry(b) Rz(c)`.
pub fn rotation_from_euler(angles: [f64; 3]) -> Mat3 {
    let rz = |a: f64| {
        let (c, s) = (math::cos(a), math::sin(a));
        Mat3([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    };
    let (c, s) = (math::cos(angles[1]), math::sin(angles[1]));
    let ry = Mat3([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]);
    rz(angles[0]).mul_mat(&ry).mul_mat(&rz(angles[2]))
}

/// Canonical form of a qubit channel up to unitary
/// conjugation: `λ = diag(cos θ, cos φ, cos θ cos φ)`, `L = (0, 0, sin θ sin φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalChannelParams {
    pub theta: f64,
    pub phi: f64,
}

impl CanonicalChannelParams {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..2.0 * core::f64::consts::PI).contains(&theta) {
            return Err(Error::OutOfRange { name: "theta", value: theta });
        }
        if !(0.0..core::f64::consts::PI).contains(&phi) {
            return Err(Error::OutOfRange { name: "phi", value: phi });
        }
        Ok(Self { theta, phi })
    }

    /// `|sin θ sin φ|`, the length of the shift.
    pub fn shift_norm(&self) -> f64 {
        math::abs(math::sin(self.theta) * math::sin(self.phi))
    }

    /// How far the least-contracted axis falls short of unit length.
    pub fn shrinkage(&self) -> f64 {
        let (ct, cp) = (math::cos(self.theta), math::cos(self.phi));
        1.0 - math::abs(ct).max(math::abs(cp)).max(math::abs(ct * cp))
    }
}

/// `p · id + (1 − p) · (ρ ↦ 𝟙/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WernerChannelSpec {
    pub p: f64,
}

impl WernerChannelSpec {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::OutOfRange { name: "p", value: p });
        }
        Ok(Self { p })
    }
}

/// Shift `t/2`, matrix `½ s cᵀ`.
pub fn extremal_cq(params: &CQChannelParams) -> AffineChannel {
    AffineChannel::new(params.t() * 0.5, Mat3::outer(params.s(), params.c.vec()).scale(0.5))
}

pub fn extremal_cptp(params: &KrausRank2Params) -> AffineChannel {
    from_kraus(&params.kraus()).expect("rank-2 extremal Kraus pair is trace preserving")
}

/// Extremal map with the square roots replaced by sines, valid for every
/// real `(x, y)`: `S₁ = diag(cos x, cos y)`, `S₂ = [[0, sin y], [sin x, 0]]`.
/// Used by the optimizer to keep the parameter space unconstrained.
pub(crate) fn extremal_cptp_unconstrained(x: f64, y: f64, eu: [f64; 3], ev: [f64; 3]) -> AffineChannel {
    let ops = kraus_pair(math::cos(x), math::cos(y), math::sin(y), math::sin(x), eu, ev);
    from_kraus(&ops).expect("trace preserving by construction")
}

pub fn canonical_channel(params: &CanonicalChannelParams) -> AffineChannel {
    let (ct, cp) = (math::cos(params.theta), math::cos(params.phi));
    let shift = Vec3::new(0.0, 0.0, math::sin(params.theta) * math::sin(params.phi));
    AffineChannel::new(shift, Mat3::diag(ct, cp, ct * cp))
}

/// Rotation of the Bloch ball by `angle` about `axis` (Rodrigues formula).
pub fn rotation_channel(axis: UnitVec3, angle: f64) -> AffineChannel {
    let n = axis.vec();
    let (c, s) = (math::cos(angle), math::sin(angle));
    let cross = Mat3([[0.0, -n.z, n.y], [n.z, 0.0, -n.x], [-n.y, n.x, 0.0]]);
    let m = Mat3::IDENTITY
        .scale(c)
        .add(&cross.scale(s))
        .add(&Mat3::outer(n, n).scale(1.0 - c));
    AffineChannel::new(Vec3::ZERO, m)
}

pub fn werner_channel(spec: WernerChannelSpec) -> AffineChannel {
    AffineChannel::new(Vec3::ZERO, Mat3::IDENTITY.scale(spec.p))
}

/// Constant map onto the state with Bloch vector `b`.
pub fn replace_channel(b: Vec3) -> Result<AffineChannel> {
    let norm = b.norm();
    if !b.is_finite() || norm > 1.0 + NORM_TOL {
        return Err(Error::InvalidBloch { norm });
    }
    Ok(AffineChannel::new(b, Mat3::ZERO))
}

const GINIBRE_KRAUS: usize = 4;
const GINIBRE_RETRIES: usize = 16;

/// Random channel from four Ginibre Kraus matrices, right-normalized by
/// `M^{-1/2}` with `M = Σ G†G`.
pub fn random_cptp(seed: u64) -> Result<AffineChannel> {
    random_cptp_with(&mut rng::prng(seed))
}

pub fn random_cptp_with(rng: &mut Prng) -> Result<AffineChannel> {
    for _ in 0..GINIBRE_RETRIES {
        let mut g = [[[C_ZERO; 2]; 2]; GINIBRE_KRAUS];
        for m in g.iter_mut() {
            for e in m.iter_mut().flatten() {
                *e = rng::complex_normal(rng);
            }
        }
        let mut gram = [[C_ZERO; 2]; 2];
        for m in &g {
            gram = mat_add(&gram, &mat_mul(&adjoint(m), m));
        }
        let Some(inv_sqrt) = hermitian2_inv_sqrt(&gram) else {
            continue;
        };
        let ops = g.map(|m| mat_mul(&m, &inv_sqrt));
        if let Ok(ch) = from_kraus(&ops) {
            return Ok(ch);
        }
    }
    Err(Error::DegenerateDraw { attempts: GINIBRE_RETRIES })
}

/// `M^{-1/2}` for a positive 2×2 Hermitian `M = m₀𝟙 + m·σ`, or `None` if
/// the smaller eigenvalue is below `1e-12`.
fn hermitian2_inv_sqrt(m: &Mat2c) -> Option<Mat2c> {
    let m0 = 0.5 * (m[0][0].re + m[1][1].re);
    let mv = Vec3::new(m[0][1].re, -m[0][1].im, 0.5 * (m[0][0].re - m[1][1].re));
    let r = mv.norm();
    let (hi, lo) = (m0 + r, m0 - r);
    if !(lo > 1e-12) {
        return None;
    }
    let (fh, fl) = (1.0 / math::sqrt(hi), 1.0 / math::sqrt(lo));
    let a = 0.5 * (fh + fl);
    let b = if r > 0.0 { 0.5 * (fh - fl) / r } else { 0.0 };
    let n = mv * b;
    Some([
        [Complex::new(a + n.z, 0.0), Complex::new(n.x, -n.y)],
        [Complex::new(n.x, n.y), Complex::new(a - n.z, 0.0)],
    ])
}

pub fn random_unit(seed: u64) -> UnitVec3 {
    UnitVec3(rng::unit_vector(&mut rng::prng(seed)))
}

/// Haar-random rotation channel.
pub fn random_unitary_with(rng: &mut Prng) -> AffineChannel {
    let axis = UnitVec3(rng::unit_vector(rng));
    // Haar measure on SO(3): rotation angle density ∝ (1 − cos ω).
    let angle = loop {
        let w = rng::uniform_in(rng, 0.0, core::f64::consts::PI);
        if rng::uniform(rng) * 2.0 <= 1.0 - math::cos(w) {
            break w;
        }
    };
    rotation_channel(axis, angle)
}

/// Random unital channel: a mixture of four Haar rotations with flat
/// Dirichlet weights.
pub fn random_unital_with(rng: &mut Prng) -> AffineChannel {
    let weights: [f64; 4] = core::array::from_fn(|_| -math::ln(1.0 - rng::uniform(rng)));
    let total: f64 = weights.iter().sum();
    let mut out = AffineChannel::new(Vec3::ZERO, Mat3::ZERO);
    for w in weights {
        let u = random_unitary_with(rng);
        out.matrix = out.matrix.add(&u.matrix.scale(w / total));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::{is_cptp, is_entanglement_breaking, is_unitary, positivity_sampled, CPTP_TOL};
    use crate::linalg::{bloch_from_density, density_from_bloch, identity};
    use alloc::vec::Vec;
    use core::f64::consts::{FRAC_PI_2, PI};

    fn axis_oracle(ops: &[Mat2c]) -> AffineChannel {
        let image = |r: Vec3| {
            let rho = density_from_bloch(r);
            let mut acc = [[C_ZERO; 2]; 2];
            for a in ops {
                acc = mat_add(&acc, &mat_mul(&mat_mul(a, &rho), &adjoint(a)));
            }
            bloch_from_density(&acc)
        };
        let (px, mx) = (image(Vec3::X), image(-Vec3::X));
        let (py, my) = (image(Vec3::Y), image(-Vec3::Y));
        let (pz, mz) = (image(Vec3::Z), image(-Vec3::Z));
        let cols = [(px - mx) * 0.5, (py - my) * 0.5, (pz - mz) * 0.5];
        AffineChannel::new((px + mx) * 0.5, Mat3::from_rows(cols[0], cols[1], cols[2]).transpose())
    }

    #[test]
    fn extremal_cq_projective_z() {
        let p = CQChannelParams::new(UnitVec3::Z, Vec3::Z, -Vec3::Z).unwrap();
        let ch = extremal_cq(&p);
        // oracle: Kraus {|0⟩⟨0|, |1⟩⟨1|}
        let r = |x| Complex::new(x, 0.0);
        let ops = [[[r(1.0), C_ZERO], [C_ZERO, C_ZERO]], [[C_ZERO, C_ZERO], [C_ZERO, r(1.0)]]];
        assert!(ch.max_abs_diff(&axis_oracle(&ops)) < 1e-15);
        assert!(ch.max_abs_diff(&AffineChannel::new(Vec3::ZERO, Mat3::diag(0.0, 0.0, 1.0))) < 1e-15);
    }

    #[test]
    fn extremal_cq_with_equal_outputs_is_replace() {
        let p = CQChannelParams::new(UnitVec3::Z, Vec3::X, Vec3::X).unwrap();
        let ch = extremal_cq(&p);
        assert!(ch.max_abs_diff(&replace_channel(Vec3::X).unwrap()) < 1e-16);
    }

    #[test]
    fn extremal_cq_output_formula() {
        let mut rng = rng::prng(9);
        for _ in 0..100 {
            let p = CQChannelParams::new(
                UnitVec3(rng::unit_vector(&mut rng)),
                rng::unit_vector(&mut rng),
                rng::unit_vector(&mut rng),
            )
            .unwrap();
            let ch = extremal_cq(&p);
            let r = rng::ball_vector(&mut rng);
            let cr = p.c.dot(r);
            let expect = p.r_plus * ((1.0 + cr) / 2.0) + p.r_minus * ((1.0 - cr) / 2.0);
            assert!(ch.apply(r).max_abs_diff(expect) < 1e-15);
            assert!(is_entanglement_breaking(&ch, CPTP_TOL).unwrap());
        }
    }

    #[test]
    fn compose_rotation_with_measurement_matches_kraus() {
        let meas = extremal_cq(&CQChannelParams::new(UnitVec3::Z, Vec3::Z, -Vec3::Z).unwrap());
        let rot = rotation_channel(UnitVec3::Z, PI);
        let composed = rot.compose(&meas);
        // oracle: Kraus products Rz(π)·P± with Rz(π) = diag(−i, i)
        let u = su2_from_euler([PI, 0.0, 0.0]);
        let r = |x| Complex::new(x, 0.0);
        let p0 = [[r(1.0), C_ZERO], [C_ZERO, C_ZERO]];
        let p1 = [[C_ZERO, C_ZERO], [C_ZERO, r(1.0)]];
        let ops = [mat_mul(&u, &p0), mat_mul(&u, &p1)];
        assert!(composed.max_abs_diff(&axis_oracle(&ops)) < 1e-15);
        assert!(composed.max_abs_diff(&AffineChannel::new(Vec3::ZERO, Mat3::diag(0.0, 0.0, 1.0))) < 1e-15);
    }

    #[test]
    fn extremal_cptp_examples() {
        let id = extremal_cptp(&KrausRank2Params::new(1.0, 1.0, [0.0; 3], [0.0; 3]).unwrap());
        assert!(id.max_abs_diff(&AffineChannel::IDENTITY) < 1e-15);

        // s = t = 1 with rotations gives U V† as a unitary channel
        let rotated = extremal_cptp(&KrausRank2Params::new(1.0, 1.0, [0.3, 1.2, -0.4], [0.0; 3]).unwrap());
        assert!(is_unitary(&rotated, 1e-12));
        assert!(rotated.matrix.max_abs_diff(&rotation_from_euler([0.3, 1.2, -0.4])) < 1e-14);

        // s = 1, t = 0: A₁ = |0⟩⟨0|, A₂ = |0⟩⟨1| resets to |0⟩
        let p = KrausRank2Params::new(1.0, 0.0, [0.0; 3], [0.0; 3]).unwrap();
        let reset = extremal_cptp(&p);
        assert!(reset.max_abs_diff(&axis_oracle(&p.kraus())) < 1e-15);
        assert!(reset.max_abs_diff(&AffineChannel::new(Vec3::Z, Mat3::ZERO)) < 1e-15);
        assert!(is_cptp(&reset, CPTP_TOL) && positivity_sampled(&reset, 256, 1));

        // s = t = 0: A₁ = 0, A₂ = σx
        let p = KrausRank2Params::new(0.0, 0.0, [0.0; 3], [0.0; 3]).unwrap();
        let flip = extremal_cptp(&p);
        assert!(flip.max_abs_diff(&axis_oracle(&p.kraus())) < 1e-15);
        assert!(flip.max_abs_diff(&AffineChannel::new(Vec3::ZERO, Mat3::diag(1.0, -1.0, -1.0))) < 1e-15);
        assert!(is_cptp(&flip, CPTP_TOL));
    }

    #[test]
    fn kraus_rank2_rejects_out_of_range() {
        assert!(KrausRank2Params::new(1.1, 0.0, [0.0; 3], [0.0; 3]).is_err());
        assert!(KrausRank2Params::new(0.5, -0.1, [0.0; 3], [0.0; 3]).is_err());
    }

    #[test]
    fn su2_and_so3_euler_agree() {
        let angles = [0.4, -1.3, 2.2];
        let u = su2_from_euler(angles);
        let ch = from_kraus(&[u]).unwrap();
        assert!(ch.matrix.max_abs_diff(&rotation_from_euler(angles)) < 1e-14);
        let uu = mat_mul(&adjoint(&u), &u);
        assert!(crate::linalg::max_abs_diff_c(&uu, &identity()) < 1e-15);
    }

    #[test]
    fn canonical_channel_examples() {
        let c = |t, p| canonical_channel(&CanonicalChannelParams::new(t, p).unwrap());
        assert!(c(0.0, 0.0).max_abs_diff(&AffineChannel::IDENTITY) < 1e-16);
        assert!(c(FRAC_PI_2, FRAC_PI_2).max_abs_diff(&AffineChannel::new(Vec3::Z, Mat3::ZERO)) < 1e-15);
        let half = c(FRAC_PI_2, 0.0);
        assert!(half.max_abs_diff(&AffineChannel::new(Vec3::ZERO, Mat3::diag(0.0, 1.0, 0.0))) < 1e-15);
        // Choi eigenvalues of λ = diag(0, 1, 0): ¼(1 ± 1 ± 0) → {0, 0, ½, ½}
        let ev = crate::bloch::to_choi(&half).eigenvalues();
        for (v, e) in ev.iter().zip([0.0, 0.0, 0.5, 0.5]) {
            assert!((v - e).abs() < 1e-14);
        }
        assert!(is_cptp(&half, CPTP_TOL));
        assert!(CanonicalChannelParams::new(2.0 * PI, 0.0).is_err());
        assert!(CanonicalChannelParams::new(0.0, PI).is_err());
    }

    #[test]
    fn canonical_channel_unitarity_grid() {
        let n = 12;
        for i in 0..n {
            for j in 0..n {
                let theta = 2.0 * PI * i as f64 / n as f64;
                let phi = PI * j as f64 / n as f64;
                let p = CanonicalChannelParams::new(theta, phi).unwrap();
                let ch = canonical_channel(&p);
                assert!(is_cptp(&ch, CPTP_TOL));
                let expected = (math::sin(theta) * math::sin(phi)).abs() < 1e-12
                    && (math::cos(theta).abs() - 1.0).abs() < 1e-12
                    && (math::cos(phi).abs() - 1.0).abs() < 1e-12;
                // orientation: det = cos²θ cos²φ > 0 whenever both are ±1
                assert_eq!(is_unitary(&ch, 1e-9), expected, "θ={theta} φ={phi}");
            }
        }
    }

    #[test]
    fn named_family_examples() {
        let full = rotation_channel(UnitVec3::Z, 2.0 * PI);
        assert!(full.max_abs_diff(&AffineChannel::IDENTITY) < 1e-15);
        let w0 = werner_channel(WernerChannelSpec::new(0.0).unwrap());
        assert_eq!(w0, AffineChannel::DEPOLARIZING);
        let rep = replace_channel(Vec3::Z).unwrap();
        assert!(is_cptp(&rep, CPTP_TOL) && !crate::bloch::is_unital(&rep, 1e-12));
        assert!(matches!(
            replace_channel(Vec3::new(0.0, 0.0, 1.1)),
            Err(Error::InvalidBloch { .. })
        ));
        assert!(WernerChannelSpec::new(1.5).is_err());
    }

    #[test]
    fn random_cptp_is_deterministic_and_valid() {
        for seed in 0..200 {
            let a = random_cptp(seed).unwrap();
            assert_eq!(a, random_cptp(seed).unwrap());
            assert!(is_cptp(&a, CPTP_TOL), "seed {seed}");
        }
    }

    #[test]
    fn random_cptp_mean_output_is_inside_ball() {
        let r = Vec3::new(0.0, 0.6, 0.8);
        let n = 10_000;
        let mut mean = Vec3::ZERO;
        for seed in 0..n {
            mean += random_cptp(seed).unwrap().apply(r);
        }
        let mean = mean * (1.0 / n as f64);
        assert!(mean.norm() < 1.0);
    }

    #[test]
    fn random_unit_is_deterministic() {
        assert_eq!(random_unit(4), random_unit(4));
        assert!((random_unit(4).vec().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_unital_channels_are_unital_and_cptp() {
        let mut rng = rng::prng(77);
        let draws: Vec<_> = (0..200).map(|_| random_unital_with(&mut rng)).collect();
        for ch in &draws {
            assert!(crate::bloch::is_unital(ch, 0.0));
            assert!(is_cptp(ch, CPTP_TOL));
        }
    }

    #[test]
    fn unconstrained_extremal_matches_constrained() {
        let (x, y) = (0.7_f64, 1.9_f64);
        let eu = [0.1, 0.2, 0.3];
        let ev = [-0.5, 0.9, 1.4];
        // cos y < 0 here, outside the constrained range, but still a channel
        let a = extremal_cptp_unconstrained(x, y, eu, ev);
        assert!(is_cptp(&a, CPTP_TOL));
        let b = extremal_cptp_unconstrained(0.7, 0.4, eu, ev);
        let pb = KrausRank2Params::new(math::cos(0.7), math::cos(0.4), eu, ev).unwrap();
        assert!(b.max_abs_diff(&extremal_cptp(&pb)) < 1e-14);
    }
}
