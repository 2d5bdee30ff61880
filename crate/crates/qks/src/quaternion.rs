//! Quaternions, quaternionic matrices and the Lie algebra `sp(n,1)`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{DMatrix, Matrix4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{QksError, Result};

/// Absolute tolerance for membership tests on unit-scale matrices.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// Seeded generator used everywhere randomness is needed.
///
/// ChaCha8 is a counter-mode stream cipher, so a seed gives the same stream
/// on every platform.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `w + x i + y j + z k`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Self = Self::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Self = Self::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Self = Self::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Self = Self::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    /// The imaginary units `i, j, k` for axis `0, 1, 2`.
    pub fn unit(axis: usize) -> Self {
        [Self::I, Self::J, Self::K][axis]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn conj(self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm_sq(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(s * self.w, s * self.x, s * self.y, s * self.z)
    }

    pub fn inverse(self) -> Result<Self> {
        let n2 = self.norm_sq();
        if n2 == 0.0 {
            return Err(QksError::ZeroDivision);
        }
        Ok(self.conj().scale(1.0 / n2))
    }

    /// `self · other⁻¹`.
    pub fn right_div(self, other: Self) -> Result<Self> {
        Ok(self * other.inverse()?)
    }

    /// Matrix of `v ↦ self · v` on `ℝ⁴ = ℍ`.
    pub fn left_matrix(self) -> Matrix4<f64> {
        let Self { w, x, y, z } = self;
        Matrix4::new(
            w, -x, -y, -z, //
            x, w, -z, y, //
            y, z, w, -x, //
            z, -y, x, w,
        )
    }

    /// Matrix of `v ↦ v · self` on `ℝ⁴ = ℍ`.
    pub fn right_matrix(self) -> Matrix4<f64> {
        let Self { w, x, y, z } = self;
        Matrix4::new(
            w, -x, -y, -z, //
            x, w, z, -y, //
            y, -z, w, x, //
            z, y, -x, w,
        )
    }

    /// Uniformly distributed unit quaternion.
    pub fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let q = Self::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let n = q.norm();
            if n > 1e-3 && n <= 1.0 {
                return q.scale(1.0 / n);
            }
        }
    }
}

/// Hamilton product, `ij = k`.
pub fn quat_mul(p: Quaternion, q: Quaternion) -> Quaternion {
    Quaternion::new(
        p.w * q.w - p.x * q.x - p.y * q.y - p.z * q.z,
        p.w * q.x + p.x * q.w + p.y * q.z - p.z * q.y,
        p.w * q.y - p.x * q.z + p.y * q.w + p.z * q.x,
        p.w * q.z + p.x * q.y - p.y * q.x + p.z * q.w,
    )
}

impl Mul for Quaternion {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        quat_mul(self, rhs)
    }
}

impl Add for Quaternion {
    type Output = Self;
    fn add(self, r: Self) -> Self {
        Self::new(self.w + r.w, self.x + r.x, self.y + r.y, self.z + r.z)
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, r: Self) {
        *self = *self + r;
    }
}

impl Sub for Quaternion {
    type Output = Self;
    fn sub(self, r: Self) -> Self {
        Self::new(self.w - r.w, self.x - r.x, self.y - r.y, self.z - r.z)
    }
}

impl Neg for Quaternion {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

/// Dense quaternionic matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct QuatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Quaternion>,
}

impl QuatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Quaternion::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Quaternion::ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Quaternion) -> Self {
        let data = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Quaternion] {
        &self.data
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|q| q.scale(s)).collect() }
    }

    /// Right multiplication of every entry by `q`.
    pub fn mul_quat_right(&self, q: Quaternion) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&e| e * q).collect() }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(QksError::DimensionMismatch { expected: self.cols, got: other.rows });
        }
        Ok(Self::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = Quaternion::ZERO;
            for k in 0..self.cols {
                acc += self[(i, k)] * other[(k, j)];
            }
            acc
        }))
    }

    fn zip(&self, other: &Self, f: impl Fn(Quaternion, Quaternion) -> Quaternion) -> Result<Self> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(QksError::DimensionMismatch {
                expected: self.rows * self.cols,
                got: other.rows * other.cols,
            });
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|q| q.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|q| q.norm_sq()).sum::<f64>().sqrt()
    }

    /// Real `4r × 4c` matrix of left multiplication on column vectors of `ℍ^c`.
    pub fn to_real(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(4 * self.rows, 4 * self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.fixed_view_mut::<4, 4>(4 * i, 4 * j).copy_from(&self[(i, j)].left_matrix());
            }
        }
        m
    }

    /// Inverse of [`to_real`](Self::to_real); reads the first column of each block.
    pub fn from_real(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() % 4 != 0 || m.ncols() % 4 != 0 {
            return Err(QksError::InvalidParameter("real embedding needs multiples of 4".into()));
        }
        Ok(Self::from_fn(m.nrows() / 4, m.ncols() / 4, |i, j| {
            Quaternion::new(m[(4 * i, 4 * j)], m[(4 * i + 1, 4 * j)], m[(4 * i + 2, 4 * j)], m[(4 * i + 3, 4 * j)])
        }))
    }

    /// Flattened real coordinates `(w, x, y, z)` of every entry.
    pub fn to_flat(&self) -> Vec<f64> {
        self.data.iter().flat_map(|q| q.to_array()).collect()
    }
}

impl std::ops::Index<(usize, usize)> for QuatMatrix {
    type Output = Quaternion;
    fn index(&self, (i, j): (usize, usize)) -> &Quaternion {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QuatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Quaternion {
        &mut self.data[i * self.cols + j]
    }
}

/// `[X, Y] = XY − YX`.
pub fn mat_bracket(x: &QuatMatrix, y: &QuatMatrix) -> Result<QuatMatrix> {
    if !x.is_square() || !y.is_square() || x.rows() != y.rows() {
        return Err(QksError::DimensionMismatch { expected: x.rows(), got: y.rows() });
    }
    x.matmul(y)?.sub(&y.matmul(x)?)
}

/// Matrix exponential through the real embedding (Padé scaling and squaring).
pub fn expm(x: &QuatMatrix) -> Result<QuatMatrix> {
    if !x.is_square() {
        return Err(QksError::DimensionMismatch { expected: x.rows(), got: x.cols() });
    }
    QuatMatrix::from_real(&x.to_real().exp())
}

/// The form `B = diag(Id_{n−1}, [[0,1],[1,0]])` on `ℍ^{n+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BilinearFormB {
    pub n: usize,
}

impl BilinearFormB {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(QksError::InvalidParameter("n must be positive".into()));
        }
        Ok(Self { n })
    }

    pub fn matrix(&self) -> QuatMatrix {
        let n = self.n;
        let mut b = QuatMatrix::zeros(n + 1, n + 1);
        for r in 0..n - 1 {
            b[(r, r)] = Quaternion::ONE;
        }
        b[(n - 1, n)] = Quaternion::ONE;
        b[(n, n - 1)] = Quaternion::ONE;
        b
    }
}

/// Residual `max |X̄ᵀB + BX|` of the `sp(n,1)` condition.
pub fn sp_n1_residual(x: &QuatMatrix, b: &BilinearFormB) -> Result<f64> {
    let bm = b.matrix();
    if !x.is_square() || x.rows() != bm.rows() {
        return Err(QksError::DimensionMismatch { expected: bm.rows(), got: x.rows() });
    }
    Ok(x.conj_transpose().matmul(&bm)?.add(&bm.matmul(x)?)?.max_abs())
}

/// Whether `X̄ᵀB + BX = 0` within [`MEMBERSHIP_TOL`]. Wrongly sized input is not a member.
pub fn is_in_sp_n1(x: &QuatMatrix, b: &BilinearFormB) -> bool {
    sp_n1_residual(x, b).is_ok_and(|r| r <= MEMBERSHIP_TOL)
}

/// Random quaternionic anti-Hermitian `n × n` matrix with entries in `[-1, 1)`.
pub fn random_sp_algebra_element<R: Rng + ?Sized>(n: usize, rng: &mut R) -> QuatMatrix {
    let mut x = QuatMatrix::zeros(n, n);
    let mut u = || rng.random_range(-1.0..1.0);
    for i in 0..n {
        x[(i, i)] = Quaternion::new(0.0, u(), u(), u());
        for j in i + 1..n {
            let q = Quaternion::new(u(), u(), u(), u());
            x[(i, j)] = q;
            x[(j, i)] = -q.conj();
        }
    }
    x
}

/// Element of `Sp(n)`: the exponential of a seeded random anti-Hermitian matrix.
pub fn random_sp_group_element(n: usize, seed: u64) -> Result<QuatMatrix> {
    if n == 0 {
        return Err(QksError::InvalidParameter("n must be positive".into()));
    }
    let mut rng = seeded_rng(seed);
    expm(&random_sp_algebra_element(n, &mut rng))
}

/// `max |B̄ᵀB − Id|`.
pub fn unitarity_residual(b: &QuatMatrix) -> f64 {
    let id = QuatMatrix::identity(b.rows());
    b.conj_transpose().matmul(b).and_then(|m| m.sub(&id)).map_or(f64::INFINITY, |m| m.max_abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(w: f64, x: f64, y: f64, z: f64) -> Quaternion {
        Quaternion::new(w, x, y, z)
    }

    #[test]
    fn defining_relations() {
        let (i, j, k) = (Quaternion::I, Quaternion::J, Quaternion::K);
        assert_eq!(i * j, k);
        assert_eq!(j * k, i);
        assert_eq!(k * i, j);
        assert_eq!(i * i, -Quaternion::ONE);
        assert_eq!((Quaternion::ONE + i) * (Quaternion::ONE + j), q(1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn multiplication_matrices() {
        let p = q(0.3, -1.2, 0.7, 2.0);
        let v = q(-0.5, 0.1, 1.5, -0.9);
        let pv = nalgebra::Vector4::from(p.to_array());
        let vv = nalgebra::Vector4::from(v.to_array());
        assert!((p.left_matrix() * vv - nalgebra::Vector4::from((p * v).to_array())).norm() < 1e-15);
        assert!((v.right_matrix() * pv - nalgebra::Vector4::from((p * v).to_array())).norm() < 1e-15);
    }

    #[test]
    fn right_division() {
        let a = q(1.0, 2.0, -0.5, 0.25);
        let b = q(-0.3, 0.4, 1.0, 2.0);
        let c = a.right_div(b).unwrap();
        assert!((c * b - a).norm() < 1e-14);
        assert!(Quaternion::ZERO.inverse().is_err());
    }

    #[test]
    fn real_embedding_is_multiplicative() {
        let mut rng = seeded_rng(3);
        let x = random_sp_algebra_element(3, &mut rng);
        let y = random_sp_algebra_element(3, &mut rng);
        let xy = x.matmul(&y).unwrap();
        let diff = xy.to_real() - x.to_real() * y.to_real();
        assert!(diff.amax() < 1e-13);
        assert_eq!(QuatMatrix::from_real(&x.to_real()).unwrap(), x);
    }

    fn a_matrix(n: usize) -> QuatMatrix {
        let mut a = QuatMatrix::zeros(n + 1, n + 1);
        a[(n - 1, n - 1)] = Quaternion::ONE;
        a[(n, n)] = -Quaternion::ONE;
        a
    }

    #[test]
    fn ad_a_eigenvalues() {
        let n = 3;
        let a = a_matrix(n);
        // 𝔫₁ element: v at (r, n), −v̄ at (n−1, r).
        let v = q(0.2, -1.0, 0.5, 0.3);
        let mut e = QuatMatrix::zeros(n + 1, n + 1);
        e[(0, n)] = v;
        e[(n - 1, 0)] = -v.conj();
        assert!(mat_bracket(&a, &e).unwrap().sub(&e).unwrap().max_abs() < 1e-15);
        let mut f = QuatMatrix::zeros(n + 1, n + 1);
        f[(n - 1, n)] = Quaternion::J;
        assert!(mat_bracket(&a, &f).unwrap().sub(&f.scale(2.0)).unwrap().max_abs() < 1e-15);
        assert_eq!(mat_bracket(&e, &e).unwrap().max_abs(), 0.0);
        assert!(mat_bracket(&e, &QuatMatrix::identity(2)).is_err());
    }

    #[test]
    fn sp_n1_membership() {
        let n = 3;
        let b = BilinearFormB::new(n).unwrap();
        assert!(is_in_sp_n1(&a_matrix(n), &b));
        assert!(!is_in_sp_n1(&QuatMatrix::identity(n + 1), &b));
        // Block pattern: α ∈ sp(n−1), v₁, v₂ ∈ ℍ^{n−1}, a ∈ ℍ, b, c ∈ Im ℍ.
        let mut rng = seeded_rng(11);
        let alpha = random_sp_algebra_element(n - 1, &mut rng);
        let v1 = [q(0.1, 0.2, 0.3, 0.4), q(-1.0, 0.0, 0.5, 0.0)];
        let v2 = [q(0.7, -0.2, 0.0, 1.1), q(0.0, 0.3, -0.3, 0.2)];
        let aq = q(0.4, 0.9, -0.6, 0.1);
        let mut x = QuatMatrix::zeros(n + 1, n + 1);
        for r in 0..n - 1 {
            for s in 0..n - 1 {
                x[(r, s)] = alpha[(r, s)];
            }
            x[(r, n - 1)] = v1[r];
            x[(r, n)] = v2[r];
            x[(n - 1, r)] = -v2[r].conj();
            x[(n, r)] = -v1[r].conj();
        }
        x[(n - 1, n - 1)] = aq;
        x[(n, n)] = -aq.conj();
        x[(n - 1, n)] = q(0.0, 0.5, 0.1, -0.2);
        x[(n, n - 1)] = q(0.0, -0.3, 0.8, 0.4);
        assert!(is_in_sp_n1(&x, &b));
        let br = mat_bracket(&x, &a_matrix(n)).unwrap();
        assert!(is_in_sp_n1(&br, &b));
    }

    #[test]
    fn group_samples() {
        let b1 = random_sp_group_element(3, 42).unwrap();
        let b2 = random_sp_group_element(3, 42).unwrap();
        assert_eq!(b1, b2);
        assert!(unitarity_residual(&b1) < 1e-10);
        assert_ne!(b1, random_sp_group_element(3, 43).unwrap());
        let e = expm(&QuatMatrix::zeros(2, 2)).unwrap();
        assert!(e.sub(&QuatMatrix::identity(2)).unwrap().max_abs() < 1e-15);
    }
}
