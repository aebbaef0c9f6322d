use alloc::vec::Vec;

use num_complex::Complex;

use super::{AffineChannel, CPTP_TOL, NORM_TOL};
use crate::error::{Error, Result};
use crate::linalg::{
    adjoint, hermitian_eigen, identity, kron2, mat_add, mat_mul, mat_scale, max_abs_diff_c,
    min_eigenvalue, paulis, trace, Mat2c, Mat3, Mat4c, Vec3, C_ZERO,
};
use crate::rng;

/// Choi state of a qubit channel: `(id ⊗ Λ)(|Φ⁺⟩⟨Φ⁺|)` with
/// `|Φ⁺⟩ = (|00⟩ + |11⟩)/√2`. The first tensor factor is the untouched
/// reference, the second the channel output. Trace one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChoiMatrix(pub Mat4c);

pub type KrausOperators = Vec<Mat2c>;

pub fn to_choi(ch: &AffineChannel) -> ChoiMatrix {
    // C = ¼ [ 𝟙⊗𝟙 + 𝟙⊗(L·σ) + Σ_{j,k} λ_jk σ_kᵀ ⊗ σ_j ]
    let p = paulis();
    let l = ch.shift.to_array();
    let mut c = kron2(&p[0], &p[0]);
    for j in 0..3 {
        c = mat_add(&c, &mat_scale(&kron2(&p[0], &p[j + 1]), Complex::new(l[j], 0.0)));
    }
    for k in 0..3 {
        let sk_t = transpose2(&p[k + 1]);
        for j in 0..3 {
            let w = ch.matrix.0[j][k];
            if w != 0.0 {
                c = mat_add(&c, &mat_scale(&kron2(&sk_t, &p[j + 1]), Complex::new(w, 0.0)));
            }
        }
    }
    ChoiMatrix(mat_scale(&c, Complex::new(0.25, 0.0)))
}

fn transpose2(a: &Mat2c) -> Mat2c {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

impl ChoiMatrix {
    /// Inverse of [`to_choi`]: `L_j = tr[C (𝟙⊗σ_j)]`, `λ_jk = tr[C (σ_kᵀ⊗σ_j)]`.
    pub fn to_channel(&self) -> AffineChannel {
        let p = paulis();
        let mut shift = [0.0; 3];
        let mut matrix = [[0.0; 3]; 3];
        for j in 0..3 {
            shift[j] = trace(&mat_mul(&self.0, &kron2(&p[0], &p[j + 1]))).re;
            for k in 0..3 {
                let op = kron2(&transpose2(&p[k + 1]), &p[j + 1]);
                matrix[j][k] = trace(&mat_mul(&self.0, &op)).re;
            }
        }
        AffineChannel::new(Vec3::from_array(shift), Mat3(matrix))
    }

    /// Transpose on the output factor.
    pub fn partial_transpose(&self) -> ChoiMatrix {
        let mut m = [[C_ZERO; 4]; 4];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        m[2 * i + k][2 * j + l] = self.0[2 * i + l][2 * j + k];
                    }
                }
            }
        }
        ChoiMatrix(m)
    }

    /// Trace over the output factor; `𝟙/2` for trace-preserving maps.
    pub fn reference_marginal(&self) -> Mat2c {
        let mut m = [[C_ZERO; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = self.0[2 * i][2 * j] + self.0[2 * i + 1][2 * j + 1];
            }
        }
        m
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        hermitian_eigen(&self.0).0
    }

    /// Canonical Kraus operators from the eigen-decomposition
    /// `C = Σ μ |ψ⟩⟨ψ|`: `K[o][i] = √(2μ) ψ[2i + o]`.
    pub fn to_kraus(&self) -> KrausOperators {
        let (vals, vecs) = hermitian_eigen(&self.0);
        let mut ops = Vec::new();
        for (m, &mu) in vals.iter().enumerate() {
            if mu <= 1e-15 {
                continue;
            }
            let amp = libm::sqrt(2.0 * mu);
            let mut k = [[C_ZERO; 2]; 2];
            for i in 0..2 {
                for o in 0..2 {
                    k[o][i] = vecs[2 * i + o][m] * amp;
                }
            }
            ops.push(k);
        }
        ops
    }
}

/// The affine form of `ρ ↦ Σ A ρ A†`.
pub fn from_kraus(operators: &[Mat2c]) -> Result<AffineChannel> {
    let mut completeness = [[C_ZERO; 2]; 2];
    for a in operators {
        completeness = mat_add(&completeness, &mat_mul(&adjoint(a), a));
    }
    let deviation = max_abs_diff_c(&completeness, &identity());
    if !(deviation <= NORM_TOL) {
        return Err(Error::NonTracePreserving { deviation });
    }
    let p = paulis();
    let image = |x: &Mat2c| {
        let mut out = [[C_ZERO; 2]; 2];
        for a in operators {
            out = mat_add(&out, &mat_mul(&mat_mul(a, x), &adjoint(a)));
        }
        out
    };
    let coeffs = |m: &Mat2c| {
        let c = |s: &Mat2c| 0.5 * trace(&mat_mul(s, m)).re;
        Vec3::new(c(&p[1]), c(&p[2]), c(&p[3]))
    };
    let shift = coeffs(&image(&p[0]));
    let cols = [coeffs(&image(&p[1])), coeffs(&image(&p[2])), coeffs(&image(&p[3]))];
    let matrix = Mat3::from_rows(cols[0], cols[1], cols[2]).transpose();
    Ok(AffineChannel::new(shift, matrix))
}

pub fn min_choi_eigenvalue(ch: &AffineChannel) -> f64 {
    min_eigenvalue(&to_choi(ch).0)
}

/// Complete positivity: the Choi matrix has no eigenvalue below `-tol`.
pub fn is_cptp(ch: &AffineChannel, tol: f64) -> bool {
    ch.is_finite() && min_choi_eigenvalue(ch) >= -tol
}

/// Positivity on `n` pseudo-uniform pure inputs: every sampled unit Bloch
/// vector must land in the ball. Strictly weaker than [`is_cptp`].
pub fn positivity_sampled(ch: &AffineChannel, n: usize, seed: u64) -> bool {
    let mut rng = rng::prng(seed);
    (0..n.max(1)).all(|_| ch.apply(rng::unit_vector(&mut rng)).norm() <= 1.0 + 1e-12)
}

pub fn is_unital(ch: &AffineChannel, tol: f64) -> bool {
    ch.shift.norm() <= tol
}

/// Unital, orthogonal and orientation preserving: a rotation of the ball.
pub fn is_unitary(ch: &AffineChannel, tol: f64) -> bool {
    is_unital(ch, tol)
        && ch
            .matrix
            .transpose()
            .mul_mat(&ch.matrix)
            .max_abs_diff(&Mat3::IDENTITY)
            <= tol
        && libm::fabs(ch.matrix.det() - 1.0) <= tol
}

/// PPT test on the Choi state, exact for qubit channels.
pub fn is_entanglement_breaking(ch: &AffineChannel, tol: f64) -> Result<bool> {
    let min_eigenvalue = min_choi_eigenvalue(ch);
    if !ch.is_finite() || min_eigenvalue < -CPTP_TOL.max(tol) {
        return Err(Error::NotAChannel { min_eigenvalue });
    }
    Ok(min_eigenvalue_pt(ch) >= -tol)
}

fn min_eigenvalue_pt(ch: &AffineChannel) -> f64 {
    min_eigenvalue(&to_choi(ch).partial_transpose().0)
}
