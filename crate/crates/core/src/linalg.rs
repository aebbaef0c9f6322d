//! Fixed-size real and complex linear algebra for qubit problems.
//!
//! Everything here is small enough (at most 4×4) that plain arrays and a
//! cyclic Jacobi sweep are the right tools.

use core::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex;

use crate::math;

pub type C64 = Complex<f64>;

pub const C_ZERO: C64 = Complex::new(0.0, 0.0);
pub const C_ONE: C64 = Complex::new(1.0, 0.0);
pub const C_I: C64 = Complex::new(0.0, 1.0);

/// A real 3-vector.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub const fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub const fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Unit vector at polar angle `theta` and azimuth `phi`.
    pub fn spherical(theta: f64, phi: f64) -> Self {
        let st = math::sin(theta);
        Self::new(st * math::cos(phi), st * math::sin(phi), math::cos(theta))
    }

    /// Inverse of [`Vec3::spherical`] for a non-zero vector: `(theta, phi)`.
    pub fn to_spherical(self) -> (f64, f64) {
        let n = self.norm();
        if n == 0.0 {
            return (0.0, 0.0);
        }
        (math::acos(self.z / n), math::atan2(self.y, self.x))
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm_sqr(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        math::sqrt(self.norm_sqr())
    }

    /// `self / |self|`, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        (n > 0.0).then(|| self * (1.0 / n))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn max_abs_diff(self, o: Vec3) -> f64 {
        (self - o)
            .to_array()
            .iter()
            .fold(0.0, |m, v| f64::max(m, math::abs(*v)))
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

/// A real 3×3 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const ZERO: Mat3 = Mat3([[0.0; 3]; 3]);
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub const fn diag(a: f64, b: f64, c: f64) -> Self {
        Mat3([[a, 0.0, 0.0], [0.0, b, 0.0], [0.0, 0.0, c]])
    }

    /// `u vᵀ`
    pub fn outer(u: Vec3, v: Vec3) -> Self {
        let (u, v) = (u.to_array(), v.to_array());
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = u[i] * v[j];
            }
        }
        Mat3(m)
    }

    pub fn from_rows(r0: Vec3, r1: Vec3, r2: Vec3) -> Self {
        Mat3([r0.to_array(), r1.to_array(), r2.to_array()])
    }

    pub fn row(&self, i: usize) -> Vec3 {
        Vec3::from_array(self.0[i])
    }

    pub fn col(&self, j: usize) -> Vec3 {
        Vec3::new(self.0[0][j], self.0[1][j], self.0[2][j])
    }

    pub fn transpose(&self) -> Mat3 {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = self.0[j][i];
            }
        }
        Mat3(m)
    }

    pub fn mul_vec(&self, v: Vec3) -> Vec3 {
        Vec3::new(self.row(0).dot(v), self.row(1).dot(v), self.row(2).dot(v))
    }

    pub fn mul_mat(&self, o: &Mat3) -> Mat3 {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = (0..3).map(|k| self.0[i][k] * o.0[k][j]).sum();
            }
        }
        Mat3(m)
    }

    pub fn scale(&self, s: f64) -> Mat3 {
        Mat3(self.0.map(|r| r.map(|e| e * s)))
    }

    pub fn add(&self, o: &Mat3) -> Mat3 {
        let mut m = self.0;
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e += o.0[i][j];
            }
        }
        Mat3(m)
    }

    pub fn det(&self) -> f64 {
        self.row(0).dot(self.row(1).cross(self.row(2)))
    }

    pub fn max_abs_diff(&self, o: &Mat3) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                d = d.max(math::abs(self.0[i][j] - o.0[i][j]));
            }
        }
        d
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|e| e.is_finite())
    }
}

/// A complex 2×2 matrix (operators on one qubit).
pub type Mat2c = [[C64; 2]; 2];

/// A complex 4×4 matrix (operators on two qubits), row-major.
pub type Mat4c = [[C64; 4]; 4];

pub fn mat_mul<const N: usize>(a: &[[C64; N]; N], b: &[[C64; N]; N]) -> [[C64; N]; N] {
    let mut m = [[C_ZERO; N]; N];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            let mut acc = C_ZERO;
            for k in 0..N {
                acc += a[i][k] * b[k][j];
            }
            *e = acc;
        }
    }
    m
}

pub fn adjoint<const N: usize>(a: &[[C64; N]; N]) -> [[C64; N]; N] {
    let mut m = [[C_ZERO; N]; N];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            *e = a[j][i].conj();
        }
    }
    m
}

pub fn mat_add<const N: usize>(a: &[[C64; N]; N], b: &[[C64; N]; N]) -> [[C64; N]; N] {
    let mut m = *a;
    for (i, row) in m.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            *e += b[i][j];
        }
    }
    m
}

pub fn mat_scale<const N: usize>(a: &[[C64; N]; N], s: C64) -> [[C64; N]; N] {
    a.map(|r| r.map(|e| e * s))
}

pub fn identity<const N: usize>() -> [[C64; N]; N] {
    let mut m = [[C_ZERO; N]; N];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = C_ONE;
    }
    m
}

pub fn trace<const N: usize>(a: &[[C64; N]; N]) -> C64 {
    (0..N).map(|i| a[i][i]).sum()
}

pub fn max_abs_diff_c<const N: usize>(a: &[[C64; N]; N], b: &[[C64; N]; N]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..N {
        for j in 0..N {
            d = d.max((a[i][j] - b[i][j]).norm());
        }
    }
    d
}

/// Kronecker product of two 2×2 matrices; index `2*i + k` pairs row `i` of
/// `a` with row `k` of `b`.
pub fn kron2(a: &Mat2c, b: &Mat2c) -> Mat4c {
    let mut m = [[C_ZERO; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    m[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    m
}

/// The Pauli matrices `[I, X, Y, Z]`.
pub fn paulis() -> [Mat2c; 4] {
    [
        [[C_ONE, C_ZERO], [C_ZERO, C_ONE]],
        [[C_ZERO, C_ONE], [C_ONE, C_ZERO]],
        [[C_ZERO, -C_I], [C_I, C_ZERO]],
        [[C_ONE, C_ZERO], [C_ZERO, -C_ONE]],
    ]
}

/// Density matrix `½(𝟙 + σ·r)` for a Bloch vector `r`.
pub fn density_from_bloch(r: Vec3) -> Mat2c {
    let h = 0.5;
    [
        [Complex::new(h * (1.0 + r.z), 0.0), Complex::new(h * r.x, -h * r.y)],
        [Complex::new(h * r.x, h * r.y), Complex::new(h * (1.0 - r.z), 0.0)],
    ]
}

/// Bloch vector `tr(σ ρ)` of a 2×2 operator (real part only).
pub fn bloch_from_density(rho: &Mat2c) -> Vec3 {
    let p = paulis();
    let comp = |s: &Mat2c| trace(&mat_mul(s, rho)).re;
    Vec3::new(comp(&p[1]), comp(&p[2]), comp(&p[3]))
}

/// Convergence threshold on the Frobenius norm of the off-diagonal part.
pub const JACOBI_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 64;

/// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations.
///
/// Returns eigenvalues in ascending order and the matching unitary whose
/// columns are the eigenvectors. Only the Hermitian part of `a` is used.
pub fn hermitian_eigen<const N: usize>(a: &[[C64; N]; N]) -> ([f64; N], [[C64; N]; N]) {
    let mut m = *a;
    for i in 0..N {
        m[i][i] = Complex::new(m[i][i].re, 0.0);
        for j in (i + 1)..N {
            let avg = (m[i][j] + m[j][i].conj()) * 0.5;
            m[i][j] = avg;
            m[j][i] = avg.conj();
        }
    }
    let mut v = identity::<N>();

    let scale = {
        let f: f64 = m.iter().flatten().map(|e| e.norm_sqr()).sum();
        math::sqrt(f).max(1.0)
    };

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..N)
            .flat_map(|i| (0..N).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j].norm_sqr())
            .sum();
        if math::sqrt(off) < JACOBI_TOL * scale {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                let g = m[p][q].norm();
                if g == 0.0 {
                    continue;
                }
                // Phase e with m[p][q] = g e; rotating column q by conj(e)
                // makes the (p, q) entry real, then a real Jacobi step zeroes it.
                let e = m[p][q] / g;
                let theta = (m[q][q].re - m[p][p].re) / (2.0 * g);
                let t = {
                    let t = 1.0 / (math::abs(theta) + math::sqrt(theta * theta + 1.0));
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let c = 1.0 / math::sqrt(t * t + 1.0);
                let s = t * c;
                // G = D R with D = diag(.., 1 @p, conj(e) @q, ..) and
                // R = [[c, s], [-s, c]] on (p, q).
                let gpp = Complex::new(c, 0.0);
                let gpq = Complex::new(s, 0.0);
                let gqp = e.conj() * -s;
                let gqq = e.conj() * c;
                // m <- G† m G
                for k in 0..N {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = mkp * gpp + mkq * gqp;
                    m[k][q] = mkp * gpq + mkq * gqq;
                }
                for k in 0..N {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = gpp.conj() * mpk + gqp.conj() * mqk;
                    m[q][k] = gpq.conj() * mpk + gqq.conj() * mqk;
                }
                m[p][q] = C_ZERO;
                m[q][p] = C_ZERO;
                m[p][p].im = 0.0;
                m[q][q].im = 0.0;
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = vkp * gpp + vkq * gqp;
                    row[q] = vkp * gpq + vkq * gqq;
                }
            }
        }
    }

    let mut order = [0usize; N];
    for (i, o) in order.iter_mut().enumerate() {
        *o = i;
    }
    order.sort_by(|&i, &j| m[i][i].re.total_cmp(&m[j][j].re));
    let mut values = [0.0; N];
    let mut vectors = [[C_ZERO; N]; N];
    for (dst, &src) in order.iter().enumerate() {
        values[dst] = m[src][src].re;
        for k in 0..N {
            vectors[k][dst] = v[k][src];
        }
    }
    (values, vectors)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue<const N: usize>(a: &[[C64; N]; N]) -> f64 {
    hermitian_eigen(a).0[0]
}

/// A real 4×4 matrix, row-major.
pub type Mat4 = [[f64; 4]; 4];

pub fn mat4_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut m = [[0.0; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            *e = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    m
}

pub fn mat4_transpose(a: &Mat4) -> Mat4 {
    let mut m = [[0.0; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            *e = a[j][i];
        }
    }
    m
}

/// Moore–Penrose pseudo-inverse of a real 4×4 matrix.
///
/// Built from the eigen-decomposition of `aᵀa`; eigenvalues below
/// `rcond · max eigenvalue` are treated as zero.
pub fn pseudo_inverse4(a: &Mat4, rcond: f64) -> Mat4 {
    let ata = mat4_mul(&mat4_transpose(a), a);
    let ata_c: Mat4c = ata.map(|r| r.map(|e| Complex::new(e, 0.0)));
    let (vals, vecs) = hermitian_eigen(&ata_c);
    let vmax = vals.iter().fold(0.0_f64, |m, v| m.max(*v));
    let cutoff = rcond * vmax;
    let mut inv = [[0.0; 4]; 4];
    for (k, &lam) in vals.iter().enumerate() {
        if lam <= cutoff || lam <= 0.0 {
            continue;
        }
        for i in 0..4 {
            for j in 0..4 {
                inv[i][j] += (vecs[i][k] * vecs[j][k].conj()).re / lam;
            }
        }
    }
    mat4_mul(&inv, &mat4_transpose(a))
}
