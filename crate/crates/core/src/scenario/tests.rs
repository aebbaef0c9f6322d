use core::f64::consts::{PI, SQRT_2};

use super::*;
use crate::bloch::{
    random_cptp_with, random_unital_with, random_unitary_with, replace_channel, werner_channel,
    canonical_channel, CanonicalChannelParams, WernerChannelSpec,
};
use crate::linalg::{density_from_bloch, trace, Mat2c, C_ZERO};
use crate::rng::{self, ball_vector, unit_vector, Prng};

fn unit(v: Vec3) -> UnitVec3 {
    UnitVec3::normalize(v).unwrap()
}

fn random_unit(rng: &mut Prng) -> UnitVec3 {
    unit(unit_vector(rng))
}

fn chsh_settings() -> [UnitVec3; 4] {
    [
        UnitVec3::Z,
        UnitVec3::X,
        unit(Vec3::new(1.0, 0.0, 1.0)),
        unit(Vec3::new(-1.0, 0.0, 1.0)),
    ]
}

fn random_cq(rng: &mut Prng) -> CQChannelParams {
    CQChannelParams::new(random_unit(rng), unit_vector(rng), unit_vector(rng)).unwrap()
}

/// Λ(X) = 2 tr_ref[(Xᵀ ⊗ 𝟙) C], evaluated on 2×2 matrices from the Choi state.
fn apply_via_choi(ch: &AffineChannel, x: &Mat2c) -> Mat2c {
    let c = crate::bloch::to_choi(ch).0;
    let mut out = [[C_ZERO; 2]; 2];
    for o in 0..2 {
        for o2 in 0..2 {
            let mut acc = C_ZERO;
            for i in 0..2 {
                for j in 0..2 {
                    acc += x[i][j] * c[2 * i + o][2 * j + o2];
                }
            }
            out[o][o2] = acc * 2.0;
        }
    }
    out
}

fn projector(a: UnitVec3, k: f64) -> Mat2c {
    density_from_bloch(a.vec() * k)
}

fn tr_prod(a: &Mat2c, b: &Mat2c) -> f64 {
    trace(&crate::linalg::mat_mul(a, b)).re
}

/// Density-matrix oracle: the textbook sum over outcomes with explicit
/// projectors and channels applied through the Choi state.
fn density_matrix_correlator(s: &TemporalScenario, i: u8, j: u8) -> f64 {
    let rho = density_from_bloch(s.v.vec());
    let (a, b) = (if i == 1 { s.a1 } else { s.a2 }, if j == 3 { s.b1 } else { s.b2 });
    let pre = if i == 1 { rho } else { apply_via_choi(&s.lambda_a, &rho) };
    let mut total = 0.0;
    for k in [1.0, -1.0] {
        let pk = projector(a, k);
        let mut state = pk;
        if i == 1 {
            state = apply_via_choi(&s.lambda_a, &state);
        }
        state = apply_via_choi(&s.lambda_e, &state);
        if j == 4 {
            state = apply_via_choi(&s.lambda_b, &state);
        }
        for l in [1.0, -1.0] {
            total += k * l * tr_prod(&pre, &pk) * tr_prod(&state, &projector(b, l));
        }
    }
    total
}

#[test]
fn oracle_identity_examples() {
    let mut rng = rng::prng(1);
    for _ in 0..20 {
        let [a1, a2, b1, b2] = core::array::from_fn(|_| random_unit(&mut rng));
        let s = TemporalScenario::identity(BlochState::MAXIMALLY_MIXED, a1, a2, b1, b2);
        assert!((correlation_oracle(&s, 1, 3).unwrap() - a1.dot(b1.vec())).abs() < 1e-15);
    }
    let z = UnitVec3::Z;
    let s = TemporalScenario::identity(BlochState::MAXIMALLY_MIXED, z, z, z, z);
    assert_eq!(correlation_oracle(&s, 1, 3).unwrap(), 1.0);
}

#[test]
fn oracle_werner_damping() {
    let z = UnitVec3::Z;
    let mut s = TemporalScenario::identity(BlochState::MAXIMALLY_MIXED, UnitVec3::X, z, z, z);
    s.lambda_e = werner_channel(WernerChannelSpec::new(0.5).unwrap());
    assert!((correlation_oracle(&s, 2, 3).unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn oracle_rejects_bad_indices() {
    let z = UnitVec3::Z;
    let s = TemporalScenario::identity(BlochState::MAXIMALLY_MIXED, z, z, z, z);
    for (i, j) in [(0, 3), (3, 3), (1, 2), (2, 5)] {
        assert_eq!(correlation_oracle(&s, i, j), Err(Error::InvalidIndex { i, j }));
    }
}

#[test]
fn oracle_matches_density_matrix_path() {
    let mut rng = rng::prng(2);
    for _ in 0..200 {
        let s = random_scenario_with(&mut rng);
        for (i, j) in [(1, 3), (1, 4), (2, 3), (2, 4)] {
            let a = correlation_oracle(&s, i, j).unwrap();
            let b = density_matrix_correlator(&s, i, j);
            assert!((a - b).abs() < 1e-12, "({i},{j}): {a} vs {b}");
        }
    }
}

#[test]
fn closed_form_matches_oracle() {
    let mut rng = rng::prng(3);
    for _ in 0..1000 {
        let s = random_scenario_with(&mut rng);
        let d = correlations_closed_form(&s).max_abs_diff(&correlations_oracle(&s));
        assert!(d <= 1e-10, "deviation {d}");
        for e in correlations_oracle(&s).to_array() {
            assert!(e.abs() <= 1.0 + 1e-9);
        }
    }
}

#[test]
fn closed_form_identity_and_replace_examples() {
    let [a1, a2, b1, b2] = chsh_settings();
    let s = TemporalScenario::identity(BlochState::MAXIMALLY_MIXED, a1, a2, b1, b2);
    let c = correlations_closed_form(&s);
    let expect = [a1.dot(b1.vec()), a1.dot(b2.vec()), a2.dot(b1.vec()), a2.dot(b2.vec())];
    for (x, y) in c.to_array().iter().zip(expect) {
        assert!((x - y).abs() < 1e-15);
    }

    let mut rng = rng::prng(4);
    for _ in 0..50 {
        let b = ball_vector(&mut rng);
        let v = BlochState::new(ball_vector(&mut rng)).unwrap();
        let [a1, a2, b1, b2] = core::array::from_fn(|_| random_unit(&mut rng));
        let mut s = TemporalScenario::identity(v, a1, a2, b1, b2);
        s.lambda_e = replace_channel(b).unwrap();
        let e13 = correlations_closed_form(&s).e13;
        // γ = 0, E = b: E₁₃ = (v·a₁)(b·b₁)
        let expect = v.vec().dot(a1.vec()) * b.dot(b1.vec());
        assert!((e13 - expect).abs() < 1e-15);
        assert!((correlation_oracle(&s, 1, 3).unwrap() - expect).abs() < 1e-15);
    }
}

#[test]
fn ebt_closed_form_matches_general_and_oracle() {
    let mut rng = rng::prng(5);
    for n in 0..1000 {
        let lambda_a = random_cptp_with(&mut rng).unwrap();
        let lambda_b = random_cptp_with(&mut rng).unwrap();
        let cq = if n % 5 == 0 {
            // non-extremal outputs too
            CQChannelParams::new(random_unit(&mut rng), ball_vector(&mut rng), ball_vector(&mut rng)).unwrap()
        } else {
            random_cq(&mut rng)
        };
        let v = BlochState::new(ball_vector(&mut rng)).unwrap();
        let a = [random_unit(&mut rng), random_unit(&mut rng)];
        let b = [random_unit(&mut rng), random_unit(&mut rng)];
        let ebt = correlations_ebt(v, &lambda_a, &cq, &lambda_b, a, b);
        let s = ebt_scenario(v, lambda_a, &cq, lambda_b, a, b);
        assert!(ebt.max_abs_diff(&correlations_closed_form(&s)) <= 1e-10);
        assert!(ebt.max_abs_diff(&correlations_oracle(&s)) <= 1e-10);
    }
}

#[test]
fn ebt_identity_alice_unbiased() {
    let mut rng = rng::prng(6);
    for _ in 0..50 {
        let cq = random_cq(&mut rng);
        let a = [random_unit(&mut rng), random_unit(&mut rng)];
        let b = [random_unit(&mut rng), random_unit(&mut rng)];
        let lambda_b = random_cptp_with(&mut rng).unwrap();
        let c = correlations_ebt(BlochState::MAXIMALLY_MIXED, &AffineChannel::IDENTITY, &cq, &lambda_b, a, b);
        let expect = 0.5 * cq.c.dot(a[0].vec()) * b[0].dot(cq.s());
        assert!((c.e13 - expect).abs() < 1e-15);
    }
}

#[test]
fn ebt_biased_construction_correlators() {
    let mut rng = rng::prng(7);
    for _ in 0..50 {
        let c = random_unit(&mut rng);
        let bvec = random_unit(&mut rng);
        let v = BlochState::new(ball_vector(&mut rng)).unwrap();
        let cq = CQChannelParams::new(c, c.vec(), -c.vec()).unwrap();
        let lambda_b = replace_channel(bvec.vec()).unwrap();
        let a = [random_unit(&mut rng), random_unit(&mut rng)];
        let corr = correlations_ebt(v, &AffineChannel::IDENTITY, &cq, &lambda_b, a, [c, bvec]);
        assert!((corr.e13 - a[0].dot(c.vec())).abs() < 1e-15);
        assert!((corr.e23 - a[1].dot(c.vec())).abs() < 1e-15);
        assert!((corr.e14 - a[0].dot(v.vec())).abs() < 1e-15);
        assert!((corr.e24 - a[1].dot(v.vec())).abs() < 1e-15);
    }
}

#[test]
fn bell_value_examples() {
    let ones = CorrelationSet { e13: 1.0, e14: 1.0, e23: 1.0, e24: 1.0 };
    assert_eq!(bell_value(&ones), 2.0);

    let [a1, a2, b1, b2] = chsh_settings();
    let s = TemporalScenario::identity(BlochState::MAXIMALLY_MIXED, a1, a2, b1, b2);
    assert!((bell_value(&correlations_oracle(&s)) - 2.0 * SQRT_2).abs() < 1e-15);

    // biased construction at |v| = 0.6: a₁ ± a₂ along c and v
    let vmag: f64 = 0.6;
    let c = UnitVec3::Z;
    let v = BlochState::new(Vec3::X * vmag).unwrap();
    let theta = libm::atan(vmag);
    let a1 = unit(c.vec() * theta.cos() + Vec3::X * theta.sin());
    let a2 = unit(c.vec() * theta.cos() - Vec3::X * theta.sin());
    let cq = CQChannelParams::new(c, c.vec(), -c.vec()).unwrap();
    let s = ebt_scenario(v, AffineChannel::IDENTITY, &cq, replace_channel(Vec3::Y).unwrap(), [a1, a2], [c, UnitVec3::Y]);
    let value = bell_value(&correlations_oracle(&s));
    assert!((value - 2.0 * libm::sqrt(1.36)).abs() < 1e-12);
    assert!((value - 2.33238).abs() < 1e-5);
}

#[test]
fn xi_vectors_for_identity_channels() {
    let [a1, a2, b1, b2] = chsh_settings();
    let s = TemporalScenario::identity(BlochState::MAXIMALLY_MIXED, a1, a2, b1, b2);
    let xi = xi_vectors(&s);
    assert!(xi.xi1.max_abs_diff(a1.vec()) < 1e-16);
    assert!(xi.xi2.max_abs_diff(a2.vec()) < 1e-16);
}

#[test]
fn xi_form_equals_correlator_sum() {
    let mut rng = rng::prng(8);
    for _ in 0..1000 {
        let s = random_scenario_with(&mut rng);
        let direct = bell_value(&correlations_closed_form(&s));
        assert!((bell_closed_form_q(&s) - direct).abs() <= 1e-12);
    }
}

#[test]
fn xi_vectors_are_short() {
    let mut rng = rng::prng(9);
    for _ in 0..10_000 {
        let s = random_scenario_with(&mut rng);
        let xi = xi_vectors(&s);
        assert!(xi.xi1.norm() <= 1.0 + 1e-9 && xi.xi2.norm() <= 1.0 + 1e-9);
    }
}

#[test]
fn optimal_bob_bound_examples() {
    let b = optimal_bob_bound(&XiVectors { xi1: Vec3::Z, xi2: Vec3::X });
    assert!((b - 2.0 * SQRT_2).abs() < 1e-15);
    assert_eq!(optimal_bob_bound(&XiVectors { xi1: Vec3::Z, xi2: Vec3::Z }), 2.0);
}

#[test]
fn unital_bob_respects_tsirelson() {
    let mut rng = rng::prng(10);
    for _ in 0..10_000 {
        let mut s = random_scenario_with(&mut rng);
        s.lambda_b = random_unital_with(&mut rng);
        let value = bell_value(&correlations_closed_form(&s));
        assert!(value <= 2.0 * SQRT_2 + 1e-9);
        assert!(value <= optimal_bob_bound(&xi_vectors(&s)) + 1e-12);
    }
}

#[test]
fn unital_alice_cq_middle_respects_classical_bound() {
    let mut rng = rng::prng(11);
    for _ in 0..10_000 {
        let lambda_a = random_unital_with(&mut rng);
        let cq = random_cq(&mut rng);
        let lambda_b = random_cptp_with(&mut rng).unwrap();
        let a = [random_unit(&mut rng), random_unit(&mut rng)];
        let b = [random_unit(&mut rng), random_unit(&mut rng)];
        let c = correlations_ebt(BlochState::MAXIMALLY_MIXED, &lambda_a, &cq, &lambda_b, a, b);
        assert!(bell_value(&c) <= 2.0 + 1e-9);
    }
}

#[test]
fn bell_is_affine_in_middle_channel() {
    let mut rng = rng::prng(12);
    for _ in 0..500 {
        let s = random_scenario_with(&mut rng);
        let e1 = crate::bloch::extremal_cq(&random_cq(&mut rng));
        let e2 = crate::bloch::extremal_cq(&random_cq(&mut rng));
        let p = rng::uniform(&mut rng);
        let with = |e: AffineChannel| {
            let mut t = s;
            t.lambda_e = e;
            bell_value(&correlations_closed_form(&t))
        };
        let mixed = with(e1.mix(p, &e2));
        assert!((mixed - (p * with(e1) + (1.0 - p) * with(e2))).abs() <= 1e-12);
    }
}

#[test]
fn eta_vectors_identity_middle() {
    let mut rng = rng::prng(13);
    let alpha = random_unitary_with(&mut rng);
    let beta = random_unitary_with(&mut rng);
    let [a1, a2, b1, b2] = chsh_settings();
    let eta = eta_vectors(BlochState::MAXIMALLY_MIXED, &alpha, &beta, &AffineChannel::IDENTITY, a1, a2, b1, b2).unwrap();
    assert!(eta.eta1.max_abs_diff(alpha.matrix.mul_vec(a1.vec())) < 1e-15);
    assert!(eta.eta2.max_abs_diff(a2.vec()) < 1e-15);
}

#[test]
fn eta_vectors_require_rotations() {
    let z = UnitVec3::Z;
    let w = werner_channel(WernerChannelSpec::new(0.5).unwrap());
    let err = eta_vectors(BlochState::MAXIMALLY_MIXED, &w, &AffineChannel::IDENTITY, &AffineChannel::IDENTITY, z, z, z, z);
    assert_eq!(err, Err(Error::NotUnitary));
}

#[test]
fn eta_form_matches_closed_form() {
    let mut rng = rng::prng(14);
    for _ in 0..1000 {
        let mut s = random_scenario_with(&mut rng);
        s.lambda_a = random_unitary_with(&mut rng);
        s.lambda_b = random_unitary_with(&mut rng);
        let eta = eta_vectors(s.v, &s.lambda_a, &s.lambda_b, &s.lambda_e, s.a1, s.a2, s.b1, s.b2).unwrap();
        assert!((eta.bell(s.b1) - bell_closed_form_q(&s)).abs() <= 1e-12);
    }
}

#[test]
fn eta_vectors_shrink_for_shifted_canonical_channels() {
    let mut rng = rng::prng(15);
    for (theta, phi) in [(0.3, 0.4), (PI / 4.0, PI / 4.0), (2.0, 1.0), (5.5, 2.9)] {
        let p = CanonicalChannelParams::new(theta, phi).unwrap();
        assert!(p.shift_norm() > 0.0);
        let e = canonical_channel(&p);
        let mut longest: f64 = 0.0;
        for _ in 0..5000 {
            let v = BlochState::new(unit_vector(&mut rng)).unwrap();
            let [a1, a2, b1, b2] = core::array::from_fn(|_| random_unit(&mut rng));
            let id = AffineChannel::IDENTITY;
            let eta = eta_vectors(v, &id, &id, &e, a1, a2, b1, b2).unwrap();
            longest = longest.max(eta.eta1.norm()).max(eta.eta2.norm());
        }
        assert!(longest < 1.0, "θ={theta} φ={phi}: {longest}");
    }
}

#[test]
fn indivisible_rotation_reaches_four() {
    let a = UnitVec3::Z;
    let flip = rotation_channel(UnitVec3::X, PI);
    let p = IndivisibleProcess::conditional_rotation(flip);
    let b = bell_indivisible(&p, BlochState::MAXIMALLY_MIXED, a, a, a, a);
    assert!((b - 4.0).abs() < 1e-12);
    // the same value from the closed form (a₁ + a₂)·b₁ + (a₁ − R a₂)·b₂
    let r_a2 = flip.apply(a.vec());
    let closed = (a.vec() + a.vec()).dot(a.vec()) + (a.vec() - r_a2).dot(a.vec());
    assert!((b - closed).abs() < 1e-12);
}

#[test]
fn indivisible_identity_reduces_to_divisible() {
    let mut rng = rng::prng(16);
    for _ in 0..50 {
        let v = BlochState::new(ball_vector(&mut rng)).unwrap();
        let [a1, a2, b1, b2] = core::array::from_fn(|_| random_unit(&mut rng));
        let p = IndivisibleProcess::conditional_rotation(AffineChannel::IDENTITY);
        let s = TemporalScenario::identity(v, a1, a2, b1, b2);
        let div = bell_value(&correlations_oracle(&s));
        assert!((bell_indivisible(&p, v, a1, a2, b1, b2) - div).abs() < 1e-14);
    }
}

#[test]
fn indivisible_mixture_scales_linearly() {
    let a = UnitVec3::Z;
    let base = IndivisibleProcess::conditional_rotation(rotation_channel(UnitVec3::Y, PI));
    for p in [0.0, 0.1, 0.25, 0.5, 0.9, 1.0] {
        let mixed = base.mix_with_depolarizing(p);
        let b = bell_indivisible(&mixed, BlochState::MAXIMALLY_MIXED, a, a, a, a);
        assert!((b - 4.0 * p).abs() < 1e-12);
    }
}

#[test]
fn indivisible_bob_response_matches_enumeration() {
    let mut rng = rng::prng(17);
    for _ in 0..200 {
        let ch = |rng: &mut Prng| random_cptp_with(rng).unwrap();
        let p = IndivisibleProcess::new(ch(&mut rng), ch(&mut rng), ch(&mut rng), ch(&mut rng)).unwrap();
        let v = BlochState::new(ball_vector(&mut rng)).unwrap();
        let [a1, a2, b1, b2] = core::array::from_fn(|_| random_unit(&mut rng));
        let g = p.bob_response(v.vec(), a1.vec(), a2.vec());
        let c = p.correlations(v, [a1, a2], [b1, b2]);
        assert!(g.correlations(b1, b2).max_abs_diff(&c) < 1e-14);
    }
}

#[test]
fn divisibility_examples() {
    let id = IndivisibleProcess::conditional_rotation(AffineChannel::IDENTITY);
    let r = is_divisible(&id, 1e-9);
    assert_eq!(r.verdict, Divisibility::Divisible);
    assert_eq!(r.residual, 0.0);

    let rot = rotation_channel(UnitVec3::X, PI / 3.0);
    let fig2 = IndivisibleProcess::conditional_rotation(rot);
    let r = is_divisible(&fig2, 1e-9);
    assert_eq!(r.verdict, Divisibility::Indivisible);
    let expected = rot.matrix.max_abs_diff(&crate::linalg::Mat3::IDENTITY);
    assert!((r.consistency_residual - expected).abs() < 1e-12);
    assert!(r.solve_residual < 1e-12);

    let mix = IndivisibleProcess::conditional_rotation(rotation_channel(UnitVec3::X, PI)).mix_with_depolarizing(0.5);
    assert_eq!(is_divisible(&mix, 1e-9).verdict, Divisibility::Indivisible);
}

#[test]
fn composed_processes_are_divisible() {
    let mut rng = rng::prng(18);
    for _ in 0..500 {
        let x = random_cptp_with(&mut rng).unwrap();
        let x2 = random_cptp_with(&mut rng).unwrap();
        let y = random_cptp_with(&mut rng).unwrap();
        let p = IndivisibleProcess::new(x, y.compose(&x), x2, y.compose(&x2)).unwrap();
        let r = is_divisible(&p, 1e-9);
        assert_eq!(r.verdict, Divisibility::Divisible, "residual {}", r.residual);
        assert!(r.lambda_43.max_abs_diff(&y) < 1e-8);
    }
}

#[test]
fn singular_middle_channel_is_handled() {
    // Λ₃₂ depolarizing: Λ₄₂ must be constant for a factor to exist.
    let rep = replace_channel(Vec3::new(0.0, 0.3, 0.0)).unwrap();
    let d = AffineChannel::DEPOLARIZING;
    let p = IndivisibleProcess::new(d, rep, d, rep).unwrap();
    let r = is_divisible(&p, 1e-9);
    assert_eq!(r.verdict, Divisibility::Divisible, "{r:?}");
    let bad = IndivisibleProcess::new(d, rep, d, AffineChannel::IDENTITY).unwrap();
    assert_eq!(is_divisible(&bad, 1e-9).verdict, Divisibility::Indivisible);
}

#[test]
fn hadamard_demo() {
    let (e12, e23, e13) = hadamard_three_step();
    assert!(e12.abs() < 1e-12);
    assert!(e23.abs() < 1e-12);
    assert!((e13 - 1.0).abs() < 1e-12);
}

#[test]
fn scenario_constructor_rejects_non_cp_channels() {
    let z = UnitVec3::Z;
    let refl = AffineChannel::new(Vec3::ZERO, crate::linalg::Mat3::diag(1.0, 1.0, -1.0));
    let id = AffineChannel::IDENTITY;
    let v = BlochState::MAXIMALLY_MIXED;
    assert!(matches!(TemporalScenario::new(v, id, refl, id, z, z, z, z), Err(Error::NotAChannel { .. })));
    let s = TemporalScenario { lambda_e: refl, ..TemporalScenario::identity(v, z, z, z, z) };
    assert_eq!(s.validate().unwrap_err().0, ChannelSlot::E);
    assert!(IndivisibleProcess::new(id, id, id, refl).is_err());
}

#[test]
fn dichotomic_measurement_basics() {
    let m = DichotomicMeasurement { direction: UnitVec3::X, outcome: Outcome::Minus };
    assert_eq!(m.post_state(), -Vec3::X);
    assert!((m.probability(Vec3::new(0.5, 0.0, 0.0)) - 0.25).abs() < 1e-16);
}
