//! The model space `V = ℍ^n` with its quaternionic triple and the `Sp(n)Sp(1)` action.

use nalgebra::{DMatrix, DVector, Matrix3, Matrix4};
use rand::Rng;

use crate::quaternion::{random_sp_algebra_element, expm, unitarity_residual, QuatMatrix, Quaternion};
use crate::{QksError, Result};

/// Tolerance used to accept group elements and rotations.
pub const GROUP_TOL: f64 = 1e-10;

fn block_diag4(n: usize, block: &Matrix4<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(4 * n, 4 * n);
    for r in 0..n {
        m.fixed_view_mut::<4, 4>(4 * r, 4 * r).copy_from(block);
    }
    m
}

/// `(V, ⟨·,·⟩, J₁, J₂, J₃)` with the identity metric on `ℝ^{4n}`.
#[derive(Clone, Debug, PartialEq)]
pub struct QHSpace {
    n: usize,
    j: [DMatrix<f64>; 3],
}

/// `J_a v = −v·a`: right multiplication by `−i, −j, −k`, so that `J₁J₂ = J₃`.
pub fn make_qh_space(n: usize) -> Result<QHSpace> {
    if n == 0 {
        return Err(QksError::InvalidParameter("n must be positive".into()));
    }
    let j = [0, 1, 2].map(|a| block_diag4(n, &(-Quaternion::unit(a)).right_matrix()));
    Ok(QHSpace { n, j })
}

impl QHSpace {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        4 * self.n
    }

    /// `J_{a+1}` for `a ∈ {0, 1, 2}`.
    pub fn j(&self, a: usize) -> &DMatrix<f64> {
        &self.j[a]
    }

    pub fn js(&self) -> &[DMatrix<f64>; 3] {
        &self.j
    }

    /// `ω_a(X, Y) = ⟨X, J_a Y⟩`.
    pub fn omega(&self, a: usize, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        x.dot(&(&self.j[a] * y))
    }

    /// Largest violation of `J_a² = −Id`, `J_aJ_b = J_c` (cyclic), `J_aᵀ = −J_a`.
    pub fn invariant_residual(&self) -> f64 {
        let id = DMatrix::<f64>::identity(self.dim(), self.dim());
        let mut r: f64 = 0.0;
        for a in 0..3 {
            let (b, c) = ((a + 1) % 3, (a + 2) % 3);
            r = r.max((&self.j[a] * &self.j[a] + &id).amax());
            r = r.max((&self.j[a] * &self.j[b] - &self.j[c]).amax());
            r = r.max((&self.j[a] * &self.j[b] + &self.j[b] * &self.j[a]).amax());
            r = r.max((self.j[a].transpose() + &self.j[a]).amax());
        }
        r
    }
}

fn so3_residual(m: &Matrix3<f64>) -> f64 {
    (m.transpose() * m - Matrix3::identity()).amax().max((m.determinant() - 1.0).abs())
}

/// `J′_a = Σ_b m[(b,a)] J_b`: column `a` of `m` holds the coordinates of `J′_a`.
pub fn rotate_frame(space: &QHSpace, m: &Matrix3<f64>) -> Result<QHSpace> {
    let r = so3_residual(m);
    if r > GROUP_TOL {
        return Err(QksError::InvalidParameter(format!("not in SO(3): residual {r:.3e}")));
    }
    let j = [0, 1, 2].map(|a| (0..3).fold(DMatrix::zeros(space.dim(), space.dim()), |acc, b| acc + &space.j[b] * m[(b, a)]));
    Ok(QHSpace { n: space.n, j })
}

/// `(B, q) ∈ Sp(n) × Sp(1)` acting by `v ↦ B v q̄`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    b: QuatMatrix,
    q: Quaternion,
}

impl GroupElement {
    pub fn new(b: QuatMatrix, q: Quaternion) -> Result<Self> {
        if (q.norm() - 1.0).abs() > GROUP_TOL {
            return Err(QksError::InvalidParameter(format!("|q| = {} is not 1", q.norm())));
        }
        if !b.is_square() {
            return Err(QksError::DimensionMismatch { expected: b.rows(), got: b.cols() });
        }
        let r = unitarity_residual(&b);
        if r > GROUP_TOL {
            return Err(QksError::InvalidParameter(format!("B not in Sp(n): residual {r:.3e}")));
        }
        Ok(Self { b, q })
    }

    pub fn identity(n: usize) -> Self {
        Self { b: QuatMatrix::identity(n), q: Quaternion::ONE }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let b = expm(&random_sp_algebra_element(n, rng)).expect("square input");
        Self { b, q: Quaternion::random_unit(rng) }
    }

    pub fn n(&self) -> usize {
        self.b.rows()
    }

    pub fn b(&self) -> &QuatMatrix {
        &self.b
    }

    pub fn q(&self) -> Quaternion {
        self.q
    }

    /// `(B₁B₂, q₁q₂)`, the element acting as `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        Ok(Self { b: self.b.matmul(&other.b)?, q: self.q * other.q })
    }

    pub fn inverse(&self) -> Self {
        Self { b: self.b.conj_transpose(), q: self.q.conj() }
    }

    /// Orthogonal `4n × 4n` matrix of `v ↦ B v q̄`.
    pub fn to_real(&self) -> DMatrix<f64> {
        self.b.to_real() * block_diag4(self.n(), &self.q.conj().right_matrix())
    }
}

pub fn group_action_vector(a: &GroupElement, v: &DVector<f64>) -> Result<DVector<f64>> {
    if v.len() != 4 * a.n() {
        return Err(QksError::DimensionMismatch { expected: 4 * a.n(), got: v.len() });
    }
    Ok(a.to_real() * v)
}

/// The rotation `m` with `A J_a A⁻¹ = Σ_b m[(b,a)] J_b`, so that `so3_of(A₁A₂) = so3_of(A₁)·so3_of(A₂)`.
pub fn so3_of(space: &QHSpace, a: &GroupElement) -> Result<Matrix3<f64>> {
    if a.n() != space.n() {
        return Err(QksError::DimensionMismatch { expected: space.n(), got: a.n() });
    }
    let ar = a.to_real();
    let conj: Vec<DMatrix<f64>> = space.js().iter().map(|j| &ar * j * ar.transpose()).collect();
    let scale = 1.0 / space.dim() as f64;
    let m = Matrix3::from_fn(|b, c| (space.j(b).transpose() * &conj[c]).trace() * scale);
    let mut residual: f64 = 0.0;
    for c in 0..3 {
        let fit = (0..3).fold(DMatrix::zeros(space.dim(), space.dim()), |acc, b| acc + space.j(b) * m[(b, c)]);
        residual = residual.max((&conj[c] - fit).amax());
    }
    if residual > GROUP_TOL {
        return Err(QksError::InvalidParameter(format!("invalid group element: residual {residual:.3e}")));
    }
    Ok(m)
}

/// Rotation of `Im ℍ` given by `x ↦ q x q̄`, columns are the images of `i, j, k`.
pub fn rotation_of_unit_quaternion(q: Quaternion) -> Matrix3<f64> {
    Matrix3::from_fn(|b, a| {
        let img = q * Quaternion::unit(a) * q.conj();
        [img.x, img.y, img.z][b]
    })
}
