//! Homogeneous descriptions of `HH(n)`.
//!
//! Two routes are realized. The solvable group `AN` sits inside `sp(n,1)` as
//! `𝔞 + 𝔫₁ + 𝔫₂` with a left-invariant metric; its Levi-Civita tensor is
//! the homogeneous structure. The `𝒬𝒦3` family is built from a vector `ξ`,
//! either through the Ambrose–Singer bracket on `𝔥̃ + 𝔪` or from the explicit
//! table, and is matched to the complements `𝔪_λ ⊂ sp(n,1)`.
//!
//! Matrices are `(n+1) × (n+1)` over `ℍ`:
//!
//! * `A = diag(0, …, 0, 1, −1)`;
//! * `n₂(b)` holds `b ∈ Im ℍ` at `(n−1, n)`, and `X_a = −n₂(a)`;
//! * `ρ₁(v)` holds `v_r` at `(r, n)` and `−v̄_r` at `(n−1, r)` for `r < n−1`.
//!
//! In the orthonormal frame `(A/√μ, √μX₁, √μX₂, √μX₃, ρ₁(e_r), ρ₁(e_r i), …)`
//! the standard triple of [`QHSpace`] is the structure `J₁A = κX₁`,
//! `J₁X₂ = X₃`, `J₁ρ₁(v) = ρ₁(−vi)` with `κ = −μ`.

use nalgebra::{DMatrix, DVector, Matrix4};
use serde::Serialize;

use crate::batch;
use crate::curvature::Curv4;
use crate::qh_space::{make_qh_space, QHSpace};
use crate::quaternion::{mat_bracket, QuatMatrix, Quaternion};
use crate::tensor3::Tensor3;
use crate::{QksError, Result};

/// Closure and ad-invariance tolerance for matrix algebras.
pub const CLOSURE_TOL: f64 = 1e-12;
/// Tolerance for the holonomy span of a reductive pair.
pub const HOLONOMY_TOL: f64 = 1e-10;
const PARAM_TOL: f64 = 1e-12;

const UNITS: [Quaternion; 4] = [Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K];
const UNIT_NAMES: [&str; 4] = ["1", "i", "j", "k"];

/// Coordinates with respect to the columns of a full-rank matrix.
struct Span {
    basis: DMatrix<f64>,
    pinv: DMatrix<f64>,
}

impl Span {
    fn new(basis: DMatrix<f64>) -> Self {
        if basis.ncols() == 0 {
            return Self { pinv: DMatrix::zeros(0, basis.nrows()), basis };
        }
        let pinv = basis.clone().pseudo_inverse(1e-13).expect("non-negative epsilon");
        Self { basis, pinv }
    }

    fn from_columns(cols: &[DVector<f64>], rows: usize) -> Self {
        let mut m = DMatrix::zeros(rows, cols.len());
        for (k, c) in cols.iter().enumerate() {
            m.set_column(k, c);
        }
        Self::new(m)
    }

    /// Coordinates and the largest entry of the residual.
    fn coords(&self, v: &DVector<f64>) -> (DVector<f64>, f64) {
        let c = &self.pinv * v;
        let r = if c.is_empty() { v.amax() } else { (&self.basis * &c - v).amax() };
        (c, r)
    }
}

fn flat(m: &QuatMatrix) -> DVector<f64> {
    DVector::from_vec(m.to_flat())
}

fn flat_real(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

/// One structure constant `c^k_{ij}` in an export.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructureConstant {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub value: f64,
}

/// Basis labels with the non-zero constants of `[e_i, e_j] = Σ_k c^k_{ij} e_k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructureExport {
    pub labels: Vec<String>,
    pub constants: Vec<StructureConstant>,
}

/// Constants `c^k_{ij}` of a bracket in a fixed basis, stored as `c[i][j][k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureConstants {
    dim: usize,
    c: Vec<f64>,
}

impl StructureConstants {
    fn zeros(dim: usize) -> Self {
        Self { dim, c: vec![0.0; dim * dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[(i * self.dim + j) * self.dim + k]
    }

    fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.c[(i * self.dim + j) * self.dim + k] = v;
    }

    /// `[u, v]` in coordinates.
    pub fn bracket(&self, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let d = self.dim;
        let mut out = DVector::zeros(d);
        for i in 0..d {
            for j in 0..d {
                let w = u[i] * v[j];
                if w != 0.0 {
                    for k in 0..d {
                        out[k] += w * self.get(i, j, k);
                    }
                }
            }
        }
        out
    }

    pub fn antisymmetry_residual(&self) -> f64 {
        let d = self.dim;
        let mut r: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    r = r.max((self.get(i, j, k) + self.get(j, i, k)).abs());
                }
            }
        }
        r
    }

    /// Largest component of `[e_i,[e_j,e_k]] + [e_j,[e_k,e_i]] + [e_k,[e_i,e_j]]`.
    pub fn jacobi_residual(&self) -> f64 {
        let d = self.dim;
        let rows = batch::map_range(d, |i| {
            let mut worst: f64 = 0.0;
            for j in 0..d {
                for k in 0..d {
                    for m in 0..d {
                        let mut s = 0.0;
                        for l in 0..d {
                            s += self.get(j, k, l) * self.get(i, l, m)
                                + self.get(k, i, l) * self.get(j, l, m)
                                + self.get(i, j, l) * self.get(k, l, m);
                        }
                        worst = worst.max(s.abs());
                    }
                }
            }
            worst
        });
        rows.into_iter().fold(0.0, f64::max)
    }

    /// Constants with `|c| > 1e−14`, in `(i, j, k)` order.
    pub fn export(&self, labels: &[String]) -> StructureExport {
        let d = self.dim;
        let mut constants = Vec::new();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let value = self.get(i, j, k);
                    if value.abs() > 1e-14 {
                        constants.push(StructureConstant { i, j, k, value });
                    }
                }
            }
        }
        StructureExport { labels: labels.to_vec(), constants }
    }
}

/// `A = diag(0, …, 0, 1, −1)`.
pub fn generator_a(n: usize) -> QuatMatrix {
    let mut m = QuatMatrix::zeros(n + 1, n + 1);
    m[(n - 1, n - 1)] = Quaternion::ONE;
    m[(n, n)] = -Quaternion::ONE;
    m
}

/// `n₂(b)`: `b` at `(n−1, n)`.
pub fn generator_n2(n: usize, b: Quaternion) -> QuatMatrix {
    let mut m = QuatMatrix::zeros(n + 1, n + 1);
    m[(n - 1, n)] = b;
    m
}

/// `ρ₁(v)` for `v ∈ ℍ^{n−1}`.
pub fn rho1(n: usize, v: &[Quaternion]) -> Result<QuatMatrix> {
    if v.len() + 1 != n {
        return Err(QksError::DimensionMismatch { expected: n - 1, got: v.len() });
    }
    let mut m = QuatMatrix::zeros(n + 1, n + 1);
    for (r, &q) in v.iter().enumerate() {
        m[(r, n)] = q;
        m[(n - 1, r)] = -q.conj();
    }
    Ok(m)
}

fn rho1_unit(n: usize, r: usize, q: Quaternion) -> QuatMatrix {
    let mut v = vec![Quaternion::ZERO; n - 1];
    v[r] = q;
    rho1(n, &v).expect("length n-1")
}

/// `diag(0, …, 0, b, b)`, the action of `b ∈ Im ℍ` in `sp(1) ⊂ sp(n,1)`.
pub fn sp1_generator(n: usize, b: Quaternion) -> QuatMatrix {
    let mut m = QuatMatrix::zeros(n + 1, n + 1);
    m[(n - 1, n - 1)] = b;
    m[(n, n)] = b;
    m
}

/// `p_λ(b)`: `λb` at `(n−1, n−1)` and `(n, n)`, `b` at `(n−1, n)`.
pub fn p_lambda(n: usize, lambda: f64, b: Quaternion) -> QuatMatrix {
    let mut m = sp1_generator(n, b.scale(lambda));
    m[(n - 1, n)] = b;
    m
}

/// `𝔞 + 𝔫₁ + 𝔫₂` with the metric `g(A,A) = μ`, `g(X_a,X_b) = νδ_ab`, `g(V,V) = |v|²`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricLieAlgebra {
    n: usize,
    mu: f64,
    nu: f64,
    kappa: f64,
    labels: Vec<String>,
    basis: Vec<QuatMatrix>,
    gram: DMatrix<f64>,
    structure: StructureConstants,
    closure_residual: f64,
}

/// The solvable algebra with `μ = ν = 1`, `κ = −1`.
pub fn solvable_algebra(n: usize) -> Result<MetricLieAlgebra> {
    solvable_algebra_with(n, 1.0, 1.0, -1.0)
}

/// The solvable algebra with arbitrary positive `μ, ν` and non-zero `κ`.
pub fn solvable_algebra_with(n: usize, mu: f64, nu: f64, kappa: f64) -> Result<MetricLieAlgebra> {
    if n < 2 {
        return Err(QksError::InvalidParameter(format!("n = {n}: the solvable model needs n >= 2")));
    }
    if !(mu > 0.0 && nu > 0.0) || kappa == 0.0 || !kappa.is_finite() {
        return Err(QksError::InvalidParameter(format!("bad metric parameters mu={mu}, nu={nu}, kappa={kappa}")));
    }
    let mut basis = vec![generator_a(n)];
    let mut labels = vec!["A".to_string()];
    for a in 0..3 {
        basis.push(generator_n2(n, -Quaternion::unit(a)));
        labels.push(format!("X{}", a + 1));
    }
    for r in 0..n - 1 {
        for (q, name) in UNITS.iter().zip(UNIT_NAMES) {
            basis.push(rho1_unit(n, r, *q));
            labels.push(format!("V{}.{name}", r + 1));
        }
    }
    let d = basis.len();
    let span = Span::from_columns(&basis.iter().map(flat).collect::<Vec<_>>(), 4 * (n + 1) * (n + 1));
    let mut structure = StructureConstants::zeros(d);
    let mut closure_residual: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let (c, r) = span.coords(&flat(&mat_bracket(&basis[i], &basis[j])?));
            closure_residual = closure_residual.max(r);
            for k in 0..d {
                structure.set(i, j, k, c[k]);
            }
        }
    }
    let gram = DMatrix::from_fn(d, d, |i, j| match (i, j) {
        (0, 0) => mu,
        (1..=3, _) if i == j => nu,
        _ if i == j => 1.0,
        _ => 0.0,
    });
    Ok(MetricLieAlgebra { n, mu, nu, kappa, labels, basis, gram, structure, closure_residual })
}

impl MetricLieAlgebra {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn basis(&self) -> &[QuatMatrix] {
        &self.basis
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn structure(&self) -> &StructureConstants {
        &self.structure
    }

    /// Worst distance of a commutator of generators from their span.
    pub fn closure_residual(&self) -> f64 {
        self.closure_residual
    }

    /// Lengths of the generators: `(√μ, √ν, √ν, √ν, 1, …)`.
    fn lengths(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.gram[(i, i)].sqrt()).collect()
    }

    /// Structure constants in the orthonormal frame `e_i = b_i / |b_i|`.
    pub fn frame_structure(&self) -> StructureConstants {
        let s: Vec<f64> = self.lengths().iter().map(|l| 1.0 / l).collect();
        let d = self.dim();
        let mut out = StructureConstants::zeros(d);
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    out.set(i, j, k, self.structure.get(i, j, k) * s[i] * s[j] / s[k]);
                }
            }
        }
        out
    }

    /// `J_a` on the generators: `J_aA = κX_a`, `J₁X₂ = X₃` (cyclic), `J_aρ₁(v) = ρ₁(−v·a)`.
    pub fn complex_structures(&self) -> [DMatrix<f64>; 3] {
        let d = self.dim();
        [0, 1, 2].map(|a| {
            let mut j = DMatrix::zeros(d, d);
            j[(1 + a, 0)] = self.kappa;
            j[(0, 1 + a)] = -1.0 / self.kappa;
            let (b, c) = ((a + 1) % 3, (a + 2) % 3);
            j[(1 + c, 1 + b)] = 1.0;
            j[(1 + b, 1 + c)] = -1.0;
            let block: Matrix4<f64> = (-Quaternion::unit(a)).right_matrix();
            for r in 0..self.n - 1 {
                j.fixed_view_mut::<4, 4>(4 + 4 * r, 4 + 4 * r).copy_from(&block);
            }
            j
        })
    }

    /// Failure of `(g, J_a)` to be quaternionic Kähler on the Lie algebra.
    ///
    /// Each `ω_a = g(·, J_a·)` is differentiated as a left-invariant form and
    /// `dω_a` is fitted by least squares as `α_c∧ω_b − α_b∧ω_c`. The result is
    /// the worst of the relative fit residuals and the skew-symmetry defect of
    /// the `ω_a`. It vanishes exactly on the parameters admitted by
    /// [`qk_condition`].
    pub fn qk_defect(&self) -> f64 {
        let d = self.dim();
        let js = self.complex_structures();
        let omegas: Vec<DMatrix<f64>> = js.iter().map(|j| &self.gram * j).collect();
        let mut worst = omegas.iter().map(|w| (w + w.transpose()).amax()).fold(0.0, f64::max);
        let c = &self.structure;
        let triples: Vec<(usize, usize, usize)> =
            (0..d).flat_map(|x| (x + 1..d).flat_map(move |y| (y + 1..d).map(move |z| (x, y, z)))).collect();
        // ω([X,Y], Z) with the bracket expanded on generators.
        let omega_br = |w: &DMatrix<f64>, x: usize, y: usize, z: usize| (0..d).map(|k| c.get(x, y, k) * w[(k, z)]).sum::<f64>();
        for a in 0..3 {
            let (b, cc) = ((a + 1) % 3, (a + 2) % 3);
            let w = &omegas[a];
            let rhs = DVector::from_iterator(
                triples.len(),
                triples.iter().map(|&(x, y, z)| -omega_br(w, x, y, z) + omega_br(w, x, z, y) - omega_br(w, y, z, x)),
            );
            if rhs.norm() == 0.0 {
                continue;
            }
            // unknowns: α_c (d entries) then α_b (d entries)
            let wedge = |om: &DMatrix<f64>, x: usize, y: usize, z: usize, k: usize| {
                (x == k) as u8 as f64 * om[(y, z)] - (y == k) as u8 as f64 * om[(x, z)] + (z == k) as u8 as f64 * om[(x, y)]
            };
            let design = DMatrix::from_fn(triples.len(), 2 * d, |row, col| {
                let (x, y, z) = triples[row];
                if col < d {
                    wedge(&omegas[b], x, y, z, col)
                } else {
                    -wedge(&omegas[cc], x, y, z, col - d)
                }
            });
            let (_, r) = Span::new(design).coords(&rhs);
            worst = worst.max(r / rhs.amax());
        }
        worst
    }
}

/// Whether `κν = −1` and `μ = −κ = 1/ν` hold within `1e−12`. Requires `ν, μ > 0`.
pub fn qk_condition(kappa: f64, nu: f64, mu: f64) -> bool {
    nu > 0.0
        && mu > 0.0
        && (kappa * nu + 1.0).abs() <= PARAM_TOL
        && (mu + kappa).abs() <= PARAM_TOL
        && (mu - 1.0 / nu).abs() <= PARAM_TOL
}

fn qk_parameters(mu: f64) -> Result<(f64, f64)> {
    let (kappa, nu) = (-mu, 1.0 / mu);
    if !qk_condition(kappa, nu, mu) {
        return Err(QksError::InvalidParameter(format!("mu = {mu} gives no quaternionic Kähler metric")));
    }
    Ok((kappa, nu))
}

/// Levi-Civita tensor of the left-invariant metric from the Koszul formula
/// `2g(S_BC, D) = g([B,C],D) − g(B,[C,D]) − g(C,[B,D])`, in the orthonormal frame.
#[allow(non_snake_case)]
pub fn solvable_S(mu: f64, n: usize) -> Result<Tensor3> {
    let (kappa, nu) = qk_parameters(mu)?;
    let alg = solvable_algebra_with(n, mu, nu, kappa)?;
    let c = alg.frame_structure();
    Ok(Tensor3::from_fn(n, |b, cc, d| 0.5 * (c.get(b, cc, d) - c.get(cc, d, b) - c.get(b, d, cc))))
}

/// The closed form of the solvable structure in the orthonormal frame.
///
/// With `A₀ = A/μ` and `JA_a = J_aA₀`,
///
/// ```text
/// g(S_BC,D) = −Σ_a g(B,JA_a) g(J_aC,D) + g(D,A₀)g(C,B) − g(C,A₀)g(B,D)
///           + Σ_a (g(J_aB,C) g(D,JA_a) − g(D,J_aB) g(C,JA_a))
///           + μ Σ_a (g(C,A₀) g(B,JA_a) g(D,JA_a) − g(D,A₀) g(B,JA_a) g(C,JA_a))
///           − μ Σ_σ ε(σ) g(B,JA_σ₁) g(C,JA_σ₂) g(D,JA_σ₃)
/// ```
///
/// Every repeated `a` is summed once over the whole product it appears in.
pub fn gsbcd(mu: f64, n: usize) -> Result<Tensor3> {
    qk_parameters(mu)?;
    if n < 2 {
        return Err(QksError::InvalidParameter(format!("n = {n}: the solvable model needs n >= 2")));
    }
    let space = make_qh_space(n)?;
    let d = space.dim();
    let mut a0 = DVector::zeros(d);
    a0[0] = 1.0 / mu.sqrt();
    let js = space.js();
    let ja: Vec<DVector<f64>> = js.iter().map(|j| j * &a0).collect();
    const PERMS: [([usize; 3], f64); 6] =
        [([0, 1, 2], 1.0), ([1, 2, 0], 1.0), ([2, 0, 1], 1.0), ([0, 2, 1], -1.0), ([2, 1, 0], -1.0), ([1, 0, 2], -1.0)];
    Ok(Tensor3::from_fn(n, |b, c, dd| {
        let delta = |i: usize, j: usize| (i == j) as u8 as f64;
        let mut s = a0[dd] * delta(c, b) - a0[c] * delta(b, dd);
        for a in 0..3 {
            let j = &js[a];
            s -= ja[a][b] * j[(dd, c)];
            s += j[(c, b)] * ja[a][dd] - j[(dd, b)] * ja[a][c];
            s += mu * (a0[c] * ja[a][b] * ja[a][dd] - a0[dd] * ja[a][b] * ja[a][c]);
        }
        for (p, sign) in PERMS {
            s -= mu * sign * ja[p[0]][b] * ja[p[1]][c] * ja[p[2]][dd];
        }
        s
    }))
}

/// `S_XY = g(X,Y)ξ − g(ξ,Y)X + Σ_a (g(ξ,J_aY)J_aX − g(X,J_aY)J_aξ)`.
pub fn qk3_structure(space: &QHSpace, xi: &DVector<f64>) -> Result<Tensor3> {
    let d = space.dim();
    if xi.len() != d {
        return Err(QksError::DimensionMismatch { expected: d, got: xi.len() });
    }
    if xi.norm() == 0.0 {
        return Err(QksError::InvalidParameter("xi must be non-zero".into()));
    }
    let js = space.js();
    let jxi: Vec<DVector<f64>> = js.iter().map(|j| j * xi).collect();
    Ok(Tensor3::from_fn(space.n(), |x, y, z| {
        let mut s = 0.0;
        if x == y {
            s += xi[z];
        }
        if x == z {
            s -= xi[y];
        }
        for a in 0..3 {
            // g(ξ, J_aY) = −(J_aξ)_y
            s += -jxi[a][y] * js[a][(z, x)] - js[a][(x, y)] * jxi[a][z];
        }
        s
    }))
}

/// `𝔤̃ = 𝔥̃ + 𝔪` with `𝔪 = ℝ^{4n}` carrying the identity metric and `𝔥̃`
/// a space of endomorphisms of `𝔪`.
///
/// Basis order is `𝔥̃` first, then the standard basis of `𝔪`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReductivePair {
    m_dim: usize,
    h_basis: Vec<DMatrix<f64>>,
    labels: Vec<String>,
    /// `[e_x, e_y]` for `x, y` in `𝔪`, as an endomorphism plus a vector.
    mm: Vec<(DMatrix<f64>, DVector<f64>)>,
    structure: StructureConstants,
}

impl ReductivePair {
    fn assemble(
        m_dim: usize,
        h_basis: Vec<DMatrix<f64>>,
        h_labels: Vec<String>,
        mm: Vec<(DMatrix<f64>, DVector<f64>)>,
    ) -> Result<Self> {
        let h = h_basis.len();
        let dim = h + m_dim;
        let span = Span::from_columns(&h_basis.iter().map(flat_real).collect::<Vec<_>>(), m_dim * m_dim);
        let mut structure = StructureConstants::zeros(dim);
        let mut worst: f64 = 0.0;
        let scale = h_basis.iter().map(|u| u.amax()).fold(1.0, f64::max);
        for i in 0..h {
            for j in 0..h {
                let br = &h_basis[i] * &h_basis[j] - &h_basis[j] * &h_basis[i];
                let (c, r) = span.coords(&flat_real(&br));
                worst = worst.max(r);
                for k in 0..h {
                    structure.set(i, j, k, c[k]);
                }
            }
            for x in 0..m_dim {
                for z in 0..m_dim {
                    let v = h_basis[i][(z, x)];
                    structure.set(i, h + x, h + z, v);
                    structure.set(h + x, i, h + z, -v);
                }
            }
        }
        for x in 0..m_dim {
            for y in 0..m_dim {
                let (u, v) = &mm[x * m_dim + y];
                let (c, r) = span.coords(&flat_real(u));
                worst = worst.max(r);
                for k in 0..h {
                    structure.set(h + x, h + y, k, c[k]);
                }
                for z in 0..m_dim {
                    structure.set(h + x, h + y, h + z, v[z]);
                }
            }
        }
        if worst > HOLONOMY_TOL * scale * scale {
            return Err(QksError::HolonomyNotClosed(worst));
        }
        let mut labels = h_labels;
        labels.extend((0..m_dim).map(|x| format!("e{x}")));
        Ok(Self { m_dim, h_basis, labels, mm, structure })
    }

    pub fn h_dim(&self) -> usize {
        self.h_basis.len()
    }

    pub fn m_dim(&self) -> usize {
        self.m_dim
    }

    pub fn h_basis(&self) -> &[DMatrix<f64>] {
        &self.h_basis
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn structure(&self) -> &StructureConstants {
        &self.structure
    }

    /// `[e_x, e_y]` for basis vectors of `𝔪`: the `𝔥̃` part as an endomorphism and the `𝔪` part.
    pub fn bracket_m(&self, x: usize, y: usize) -> (&DMatrix<f64>, &DVector<f64>) {
        let (u, v) = &self.mm[x * self.m_dim + y];
        (u, v)
    }

    /// `[X, Y]` for arbitrary `X, Y ∈ 𝔪`.
    pub fn bracket_vectors(&self, x: &DVector<f64>, y: &DVector<f64>) -> (DMatrix<f64>, DVector<f64>) {
        let m = self.m_dim;
        let mut u = DMatrix::zeros(m, m);
        let mut v = DVector::zeros(m);
        for i in 0..m {
            for j in 0..m {
                let w = x[i] * y[j];
                if w != 0.0 {
                    let (bu, bv) = self.bracket_m(i, j);
                    u += bu * w;
                    v += bv * w;
                }
            }
        }
        (u, v)
    }

    pub fn jacobi_residual(&self) -> f64 {
        self.structure.jacobi_residual()
    }

    /// Worst `|U + Uᵀ|` over the basis of `𝔥̃`.
    pub fn skewness_residual(&self) -> f64 {
        self.h_basis.iter().map(|u| (u + u.transpose()).amax()).fold(0.0, f64::max)
    }

    /// Orthogonal projector onto `𝔥̃` inside the endomorphisms of `𝔪`.
    fn h_projector(&self) -> DMatrix<f64> {
        let m2 = self.m_dim * self.m_dim;
        if self.h_basis.is_empty() {
            return DMatrix::zeros(m2, m2);
        }
        let cols: Vec<DVector<f64>> = self.h_basis.iter().map(flat_real).collect();
        let b = DMatrix::from_columns(&cols);
        let q = b.qr().q();
        &q * q.transpose()
    }

    /// Distance between two pairs on the same `𝔪`: the `𝔥̃` subspaces and all `[𝔪, 𝔪]` brackets.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        if self.m_dim != other.m_dim {
            return Err(QksError::DimensionMismatch { expected: self.m_dim, got: other.m_dim });
        }
        if self.h_dim() != other.h_dim() {
            return Ok(f64::INFINITY);
        }
        let mut worst = (self.h_projector() - other.h_projector()).amax();
        for ((u1, v1), (u2, v2)) in self.mm.iter().zip(&other.mm) {
            worst = worst.max((u1 - u2).amax()).max((v1 - v2).amax());
        }
        Ok(worst)
    }

    pub fn export(&self) -> StructureExport {
        self.structure.export(&self.labels)
    }
}

/// The pair with `𝔥̃` spanned by the `R̃_{XY}` and `[X,Y] = S_XY − S_YX + R̃_{XY}`.
///
/// `𝔥̃` is orthonormalized for the trace form by Gram–Schmidt at
/// [`HOLONOMY_TOL`]. A span that does not close under commutators is an error.
pub fn reductive_pair_from(s: &Tensor3, rt: &Curv4, space: &QHSpace) -> Result<ReductivePair> {
    let d = space.dim();
    if s.dim() != d {
        return Err(QksError::DimensionMismatch { expected: d, got: s.dim() });
    }
    if rt.dim() != d {
        return Err(QksError::DimensionMismatch { expected: d, got: rt.dim() });
    }
    let mut h_basis: Vec<DMatrix<f64>> = Vec::new();
    let mut mm = Vec::with_capacity(d * d);
    for x in 0..d {
        for y in 0..d {
            let u = rt.basis_endomorphism(x, y);
            let v = DVector::from_fn(d, |z, _| s.get(x, y, z) - s.get(y, x, z));
            if x < y {
                let mut w = u.clone();
                for b in &h_basis {
                    let c = b.dot(&w);
                    w -= b * c;
                }
                let nrm = w.norm();
                if nrm > HOLONOMY_TOL {
                    h_basis.push(w / nrm);
                }
            }
            mm.push((u, v));
        }
    }
    let labels = (0..h_basis.len()).map(|k| format!("h{k}")).collect();
    ReductivePair::assemble(d, h_basis, labels, mm)
}

/// `𝔍_a`: `J_a` on `(ℍξ)^⊥`, zero on `ξ`, and `J_bξ ↦ [J_a, J_b]ξ`.
pub fn frak_j(space: &QHSpace, xi: &DVector<f64>) -> Result<[DMatrix<f64>; 3]> {
    let d = space.dim();
    if xi.len() != d {
        return Err(QksError::DimensionMismatch { expected: d, got: xi.len() });
    }
    let lambda = xi.norm_squared();
    if lambda == 0.0 {
        return Err(QksError::InvalidParameter("xi must be non-zero".into()));
    }
    let js = space.js();
    let jxi: Vec<DVector<f64>> = js.iter().map(|j| j * xi).collect();
    // projector onto ℍξ
    let p = (xi * xi.transpose() + jxi.iter().map(|v| v * v.transpose()).fold(DMatrix::zeros(d, d), |a, b| a + b)) / lambda;
    let perp = DMatrix::identity(d, d) - &p;
    Ok([0, 1, 2].map(|a| {
        let mut m = &js[a] * &perp;
        for b in 0..3 {
            // J_bξ ↦ [J_a, J_b]ξ, read off through g(·, J_bξ)/λ
            let img = &js[a] * &jxi[b] - &js[b] * &jxi[a];
            m += img * jxi[b].transpose() / lambda;
        }
        m
    }))
}

/// Decomposition `v = αξ + Σ_b β_b J_bξ + Z` with `Z ⊥ ℍξ`.
fn split(xi: &DVector<f64>, jxi: &[DVector<f64>], lambda: f64, v: &DVector<f64>) -> (f64, [f64; 3], DVector<f64>) {
    let alpha = v.dot(xi) / lambda;
    let beta = [0, 1, 2].map(|b| v.dot(&jxi[b]) / lambda);
    let mut z = v - xi * alpha;
    for b in 0..3 {
        z -= &jxi[b] * beta[b];
    }
    (alpha, beta, z)
}

/// The explicit `𝒬𝒦3` bracket table with `ξ = √λ e₀` and `𝔥̃ = span{𝔍₁, 𝔍₂, 𝔍₃}`:
///
/// ```text
/// [Z₁, Z₂]     = 2 Σ_a g(J_aZ₁, Z₂)(J_aξ − λ𝔍_a)
/// [ξ, Z]       = λZ
/// [J_aξ, Z]    = λJ_aZ
/// [ξ, J_aξ]    = 2λJ_aξ − 2λ²𝔍_a
/// [J₁ξ, J₂ξ]   = 4λJ₃ξ − 2λ²𝔍₃   (and cyclically)
/// ```
///
/// for `Z, Z₁, Z₂ ⊥ ℍξ`, extended bilinearly.
pub fn qk3_bracket_table(lambda: f64, space: &QHSpace) -> Result<ReductivePair> {
    if !(lambda > 0.0) {
        return Err(QksError::InvalidParameter(format!("lambda = {lambda} must be positive")));
    }
    let d = space.dim();
    let mut xi = DVector::zeros(d);
    xi[0] = lambda.sqrt();
    let fj = frak_j(space, &xi)?;
    let js = space.js();
    let jxi: Vec<DVector<f64>> = js.iter().map(|j| j * &xi).collect();
    let parts: Vec<(f64, [f64; 3], DVector<f64>)> =
        (0..d).map(|x| split(&xi, &jxi, lambda, &DVector::from_fn(d, |i, _| (i == x) as u8 as f64))).collect();
    let mut mm = Vec::with_capacity(d * d);
    for x in 0..d {
        for y in 0..d {
            let (a1, b1, z1) = &parts[x];
            let (a2, b2, z2) = &parts[y];
            let mut h = [0.0; 3];
            let mut v = DVector::zeros(d);
            // [Z₁, Z₂]
            for a in 0..3 {
                let w = 2.0 * (&js[a] * z1).dot(z2);
                v += &jxi[a] * w;
                h[a] -= lambda * w;
            }
            // [ξ, Z] terms, antisymmetrized
            v += z2 * (lambda * a1) - z1 * (lambda * a2);
            for a in 0..3 {
                // [J_aξ, Z]
                v += (&js[a] * z2) * (lambda * b1[a]) - (&js[a] * z1) * (lambda * b2[a]);
                // [ξ, J_aξ]
                let w = a1 * b2[a] - a2 * b1[a];
                v += &jxi[a] * (2.0 * lambda * w);
                h[a] -= 2.0 * lambda * lambda * w;
                // [J_aξ, J_bξ] for (a, b, c) cyclic
                let (b, c) = ((a + 1) % 3, (a + 2) % 3);
                let w = b1[a] * b2[b] - b1[b] * b2[a];
                v += &jxi[c] * (4.0 * lambda * w);
                h[c] -= 2.0 * lambda * lambda * w;
            }
            let u = (0..3).fold(DMatrix::zeros(d, d), |acc, a| acc + &fj[a] * h[a]);
            mm.push((u, v));
        }
    }
    ReductivePair::assemble(d, fj.to_vec(), vec!["J1".into(), "J2".into(), "J3".into()], mm)
}

/// `𝔪_λ = 𝔞 + 𝔫₁ + 𝔭_λ ⊂ sp(n,1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaComplement {
    n: usize,
    lambda: f64,
    labels: Vec<String>,
    basis: Vec<QuatMatrix>,
}

pub fn m_lambda(lambda: f64, n: usize) -> Result<LambdaComplement> {
    if !(lambda > 0.0) {
        return Err(QksError::InvalidParameter(format!("lambda = {lambda} must be positive")));
    }
    if n < 2 {
        return Err(QksError::InvalidParameter(format!("n = {n}: m_lambda needs n >= 2")));
    }
    let mut basis = vec![generator_a(n)];
    let mut labels = vec!["A".to_string()];
    for r in 0..n - 1 {
        for (q, name) in UNITS.iter().zip(UNIT_NAMES) {
            basis.push(rho1_unit(n, r, *q));
            labels.push(format!("V{}.{name}", r + 1));
        }
    }
    for a in 0..3 {
        basis.push(p_lambda(n, lambda, Quaternion::unit(a)));
        labels.push(format!("P{}", UNIT_NAMES[a + 1]));
    }
    Ok(LambdaComplement { n, lambda, labels, basis })
}

impl LambdaComplement {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[QuatMatrix] {
        &self.basis
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    fn span(&self) -> Span {
        Span::from_columns(&self.basis.iter().map(flat).collect::<Vec<_>>(), 4 * (self.n + 1) * (self.n + 1))
    }

    /// Worst distance of `[diag(0, …, a, a), B]` from `𝔪_λ` over `a ∈ {i, j, k}` and the basis.
    pub fn ad_invariance_residual(&self) -> Result<f64> {
        let span = self.span();
        let mut worst: f64 = 0.0;
        for a in 0..3 {
            let h = sp1_generator(self.n, Quaternion::unit(a));
            for b in &self.basis {
                worst = worst.max(span.coords(&flat(&mat_bracket(&h, b)?)).1);
            }
        }
        Ok(worst)
    }

    /// Largest principal angle between `𝔪_λ` and `other`, for the real trace inner product.
    pub fn principal_angle(&self, other: &Self) -> Result<f64> {
        if self.n != other.n {
            return Err(QksError::DimensionMismatch { expected: self.n, got: other.n });
        }
        let q = |c: &Self| DMatrix::from_columns(&c.basis.iter().map(flat).collect::<Vec<_>>()).qr().q();
        let sv = (q(self).transpose() * q(other)).singular_values();
        let smallest = sv.iter().copied().fold(f64::INFINITY, f64::min).clamp(-1.0, 1.0);
        Ok(smallest.acos())
    }
}

/// Image in `sp(n,1)` of the basis of [`qk3_bracket_table`]:
/// `𝔍_a ↦ diag(0, …, a, a)`, `ξ ↦ λA`, `J_aξ ↦ p_λ(a)`, `ρ₁`-coordinates on `(ℍξ)^⊥`.
pub fn lambda_isomorphism(lambda: f64, n: usize) -> Result<Vec<QuatMatrix>> {
    let m = m_lambda(lambda, n)?;
    let s = lambda.sqrt();
    let mut out: Vec<QuatMatrix> = (0..3).map(|a| sp1_generator(n, Quaternion::unit(a))).collect();
    // e₀ = ξ/√λ and e_a = −J_aξ/√λ
    out.push(generator_a(n).scale(s));
    for a in 0..3 {
        out.push(m.basis[1 + 4 * (n - 1) + a].scale(-1.0 / s));
    }
    out.extend(m.basis[1..1 + 4 * (n - 1)].iter().cloned());
    Ok(out)
}

/// Worst `|φ[u,v] − [φu, φv]|` over basis pairs of the table, with `φ` from [`lambda_isomorphism`].
pub fn lambda_isomorphism_residual(lambda: f64, n: usize) -> Result<f64> {
    let pair = qk3_bracket_table(lambda, &make_qh_space(n)?)?;
    let phi = lambda_isomorphism(lambda, n)?;
    let c = pair.structure();
    let dim = c.dim();
    let mut worst: f64 = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let lhs = (0..dim).try_fold(QuatMatrix::zeros(n + 1, n + 1), |acc, k| acc.add(&phi[k].scale(c.get(i, j, k))))?;
            worst = worst.max(lhs.sub(&mat_bracket(&phi[i], &phi[j])?)?.max_abs());
        }
    }
    Ok(worst)
}
