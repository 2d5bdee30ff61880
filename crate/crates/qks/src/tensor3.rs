//! Rank-3 covariant tensors `S_{XYZ} = ⟨S_X Y, Z⟩`, antisymmetric in the last two slots.

use std::fmt::Write as _;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::qh_space::{GroupElement, QHSpace};
use crate::{QksError, Result};

/// Default membership threshold, relative to the Frobenius norm of the input.
pub const MEMBERSHIP_TOL: f64 = 1e-10;

/// A one-form on `V`, stored in the standard dual basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Covector(pub DVector<f64>);

impl Covector {
    pub fn zeros(n: usize) -> Self {
        Self(DVector::zeros(4 * n))
    }

    /// The dual basis element `eᵏ`.
    pub fn basis(n: usize, k: usize) -> Self {
        let mut v = DVector::zeros(4 * n);
        v[k] = 1.0;
        Self(v)
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self(DVector::from_fn(4 * n, |_, _| rng.random_range(-1.0..1.0)))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// `θ ∘ M`, i.e. `X ↦ θ(MX)`.
    pub fn compose(&self, m: &DMatrix<f64>) -> Self {
        Self(m.tr_mul(&self.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(&self.0 * s)
    }
}

impl Add for &Covector {
    type Output = Covector;
    fn add(self, r: Self) -> Covector {
        Covector(&self.0 + &r.0)
    }
}

impl Sub for &Covector {
    type Output = Covector;
    fn sub(self, r: Self) -> Covector {
        Covector(&self.0 - &r.0)
    }
}

impl Serialize for Covector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.as_slice().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Covector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(Self(DVector::from_vec(Vec::<f64>::deserialize(d)?)))
    }
}

/// Dense rank-3 tensor on `ℝ^{4n}`, row-major `(x, y, z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3 {
    n: usize,
    d: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(n: usize) -> Self {
        let d = 4 * n;
        Self { n, d, data: vec![0.0; d * d * d] }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize, usize) -> f64) -> Self {
        let d = 4 * n;
        let data = (0..d * d * d).map(|k| f(k / (d * d), (k / d) % d, k % d)).collect();
        Self { n, d, data }
    }

    pub fn from_vec(n: usize, data: Vec<f64>) -> Result<Self> {
        let d = 4 * n;
        if data.len() != d * d * d {
            return Err(QksError::DimensionMismatch { expected: d * d * d, got: data.len() });
        }
        Ok(Self { n, d, data })
    }

    /// Random tensor with entries in `[-1, 1)` made antisymmetric in the last two slots.
    pub fn random_antisymmetric<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let d = 4 * n;
        let raw: Vec<f64> = (0..d * d * d).map(|_| rng.random_range(-1.0..1.0)).collect();
        Self { n, d, data: raw }.antisymmetrized()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    fn idx(&self, x: usize, y: usize, z: usize) -> usize {
        (x * self.d + y) * self.d + z
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> f64 {
        self.data[self.idx(x, y, z)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, z: usize, v: f64) {
        let i = self.idx(x, y, z);
        self.data[i] = v;
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { n: self.n, d: self.d, data: self.data.iter().map(|v| v * s).collect() }
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(QksError::DimensionMismatch { expected: self.n, got: other.n });
        }
        Ok(())
    }

    /// `‖S_{XYZ} + S_{XZY}‖`.
    pub fn antisymmetry_residual(&self) -> f64 {
        let mut r = 0.0;
        for x in 0..self.d {
            for y in 0..self.d {
                for z in 0..self.d {
                    let s = self.get(x, y, z) + self.get(x, z, y);
                    r += s * s;
                }
            }
        }
        r.sqrt()
    }

    pub fn antisymmetrized(&self) -> Self {
        Self::from_fn(self.n, |x, y, z| 0.5 * (self.get(x, y, z) - self.get(x, z, y)))
    }

    /// `out[x, y, z] = self[σ(x, y, z)]` where `perm[k]` names the source slot of output slot `k`.
    pub fn permuted(&self, perm: [usize; 3]) -> Self {
        Self::from_fn(self.n, |x, y, z| {
            let i = [x, y, z];
            let mut src = [0; 3];
            for k in 0..3 {
                src[perm[k]] = i[k];
            }
            self.get(src[0], src[1], src[2])
        })
    }

    /// Substitutes `X ↦ M X` in one slot: `out[..i..] = Σ_p self[..p..] M[p, i]`.
    pub fn contract_mode(&self, mode: usize, m: &DMatrix<f64>) -> Self {
        let d = self.d;
        let mut out = Self::zeros(self.n);
        for x in 0..d {
            for y in 0..d {
                for z in 0..d {
                    let v = self.get(x, y, z);
                    if v == 0.0 {
                        continue;
                    }
                    for i in 0..d {
                        let (a, b, c) = match mode {
                            0 => (i, y, z),
                            1 => (x, i, z),
                            _ => (x, y, i),
                        };
                        let coef = match mode {
                            0 => m[(x, i)],
                            1 => m[(y, i)],
                            _ => m[(z, i)],
                        };
                        let k = out.idx(a, b, c);
                        out.data[k] += v * coef;
                    }
                }
            }
        }
        out
    }

    /// Serialize as text: the integer `n` on the first line, then the `(4n)³`
    /// components in row-major order, one per line.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(24 * self.data.len() + 8);
        let _ = writeln!(s, "{}", self.n);
        for v in &self.data {
            let _ = writeln!(s, "{v:.16e}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let n: usize = tokens
            .next()
            .ok_or_else(|| QksError::Parse("empty input".into()))?
            .parse()
            .map_err(|e| QksError::Parse(format!("bad n: {e}")))?;
        if n == 0 {
            return Err(QksError::Parse("n must be positive".into()));
        }
        let data = tokens
            .map(|t| t.parse::<f64>().map_err(|e| QksError::Parse(format!("bad component {t:?}: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        Self::from_vec(n, data).map_err(|e| QksError::Parse(e.to_string()))
    }
}

impl Add for &Tensor3 {
    type Output = Tensor3;
    fn add(self, r: Self) -> Tensor3 {
        assert_eq!(self.n, r.n, "tensor size mismatch");
        Tensor3 { n: self.n, d: self.d, data: self.data.iter().zip(&r.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &Tensor3 {
    type Output = Tensor3;
    fn sub(self, r: Self) -> Tensor3 {
        assert_eq!(self.n, r.n, "tensor size mismatch");
        Tensor3 { n: self.n, d: self.d, data: self.data.iter().zip(&r.data).map(|(a, b)| a - b).collect() }
    }
}

impl Mul<f64> for &Tensor3 {
    type Output = Tensor3;
    fn mul(self, s: f64) -> Tensor3 {
        self.scale(s)
    }
}

/// `⟨S, S′⟩ = Σ_{rst} S_{rst} S′_{rst}`.
pub fn inner(s: &Tensor3, t: &Tensor3) -> Result<f64> {
    s.check_same(t)?;
    Ok(s.data.iter().zip(&t.data).map(|(a, b)| a * b).sum())
}

/// `c₁₂(S)(Z) = Σ_r S_{e_r e_r Z}`.
pub fn c12(s: &Tensor3) -> Covector {
    let d = s.dim();
    Covector(DVector::from_fn(d, |z, _| (0..d).map(|r| s.get(r, r, z)).sum()))
}

/// `S_{X, J_aY, J_aZ}` for `a ∈ {0, 1, 2}`.
pub fn j_twist(s: &Tensor3, space: &QHSpace, a: usize) -> Tensor3 {
    let j = space.j(a);
    s.contract_mode(1, j).contract_mode(2, j)
}

/// `S_{XYZ} + S_{YZX} + S_{ZXY}`.
pub fn cyclic_sum(s: &Tensor3) -> Tensor3 {
    Tensor3::from_fn(s.n(), |x, y, z| s.get(x, y, z) + s.get(y, z, x) + s.get(z, x, y))
}

/// `‖T − ¼(T + Σ_a T_{X J_aY J_aZ})‖ + ‖antisymmetry‖`, relative to `‖T‖`.
pub fn hat_residual(t: &Tensor3, space: &QHSpace) -> f64 {
    let norm = t.norm();
    if norm == 0.0 {
        return 0.0;
    }
    let avg = twist_average(t, space);
    ((t - &avg).norm() + t.antisymmetry_residual()) / norm
}

/// `¼(S + Σ_a S_{X J_aY J_aZ})`.
pub fn twist_average(s: &Tensor3, space: &QHSpace) -> Tensor3 {
    let mut acc = s.clone();
    for a in 0..3 {
        acc = &acc + &j_twist(s, space, a);
    }
    acc.scale(0.25)
}

/// `L(T)` without the membership check.
pub fn l_op_unchecked(t: &Tensor3, space: &QHSpace) -> Tensor3 {
    let mut out = &t.permuted([1, 2, 0]) + &t.permuted([2, 0, 1]);
    for a in 0..3 {
        let j = space.j(a);
        // T_{J_aZ, X, J_aY}
        let u = t.contract_mode(0, j).contract_mode(2, j);
        out = &out + &u.permuted([1, 2, 0]);
        // T_{J_aY, J_aZ, X}
        let v = t.contract_mode(0, j).contract_mode(1, j);
        out = &out + &v.permuted([2, 0, 1]);
    }
    out
}

/// `L(T)_{XYZ} = T_{ZXY} + T_{YZX} + Σ_a (T_{J_aZ X J_aY} + T_{J_aY J_aZ X})` on `𝒱̂`.
pub fn l_op(t: &Tensor3, space: &QHSpace) -> Result<Tensor3> {
    let r = hat_residual(t, space);
    if r > MEMBERSHIP_TOL {
        return Err(QksError::NotMember { space: "V-hat", residual: r });
    }
    Ok(l_op_unchecked(t, space))
}

/// `(A S)_{XYZ} = S_{A⁻¹X, A⁻¹Y, A⁻¹Z}` for an orthogonal real matrix `A`.
pub fn act_real(a: &DMatrix<f64>, s: &Tensor3) -> Tensor3 {
    // A⁻¹ = Aᵀ, so the slot substitution uses Aᵀ.
    let at = a.transpose();
    s.contract_mode(0, &at).contract_mode(1, &at).contract_mode(2, &at)
}

pub fn act_on_tensor(a: &GroupElement, s: &Tensor3) -> Result<Tensor3> {
    if a.n() != s.n() {
        return Err(QksError::DimensionMismatch { expected: s.n(), got: a.n() });
    }
    Ok(act_real(&a.to_real(), s))
}
