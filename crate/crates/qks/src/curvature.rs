//! Algebraic curvature tensors `R_{XYZW} = ⟨R_{XY}Z, W⟩` with `R_{XY} = ∇_{[X,Y]} − [∇_X, ∇_Y]`.

use std::ops::{Add, Sub};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use crate::qh_space::QHSpace;
use crate::tensor3::Tensor3;
use crate::{QksError, Result};

/// Dense rank-4 tensor on `ℝ^{4n}`, row-major `(x, y, z, w)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Curv4 {
    n: usize,
    d: usize,
    data: Vec<f64>,
}

impl Curv4 {
    pub fn zeros(n: usize) -> Self {
        let d = 4 * n;
        Self { n, d, data: vec![0.0; d * d * d * d] }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize, usize, usize) -> f64) -> Self {
        let d = 4 * n;
        let data = (0..d * d * d * d).map(|k| f(k / (d * d * d), (k / (d * d)) % d, (k / d) % d, k % d)).collect();
        Self { n, d, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize, w: usize) -> f64 {
        self.data[((x * self.d + y) * self.d + z) * self.d + w]
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

    /// The endomorphism `R_{XY}` as a matrix: `(R_{XY})[v, w] = R_{XYwv}`.
    pub fn endomorphism(&self, x: &DVector<f64>, y: &DVector<f64>) -> DMatrix<f64> {
        let d = self.d;
        let mut m = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let c = x[i] * y[j];
                if c == 0.0 {
                    continue;
                }
                for w in 0..d {
                    for v in 0..d {
                        m[(v, w)] += c * self.get(i, j, w, v);
                    }
                }
            }
        }
        m
    }

    /// `R_{e_x e_y}` for basis vectors.
    pub fn basis_endomorphism(&self, x: usize, y: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.d, self.d, |v, w| self.get(x, y, w, v))
    }

    /// `Σ_k hᵏ ∧ hᵏ` (Kulkarni–Nomizu) for a few random symmetric `h`: symmetries only.
    pub fn random_algebraic<R: Rng + ?Sized>(n: usize, terms: usize, rng: &mut R) -> Self {
        let d = 4 * n;
        let hs: Vec<DMatrix<f64>> = (0..terms)
            .map(|_| {
                let a = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
                &a + a.transpose()
            })
            .collect();
        Self::from_fn(n, |x, y, z, w| hs.iter().map(|h| h[(x, z)] * h[(y, w)] - h[(x, w)] * h[(y, z)]).sum())
    }

    pub fn symmetry_residuals(&self) -> SymmetryResiduals {
        let d = self.d;
        let mut r = SymmetryResiduals::default();
        for x in 0..d {
            for y in 0..d {
                for z in 0..d {
                    for w in 0..d {
                        let v = self.get(x, y, z, w);
                        r.antisym_xy = r.antisym_xy.max((v + self.get(y, x, z, w)).abs());
                        r.antisym_zw = r.antisym_zw.max((v + self.get(x, y, w, z)).abs());
                        r.pair = r.pair.max((v - self.get(z, w, x, y)).abs());
                        r.bianchi = r.bianchi.max((v + self.get(y, z, x, w) + self.get(z, x, y, w)).abs());
                    }
                }
            }
        }
        r
    }
}

impl Add for &Curv4 {
    type Output = Curv4;
    fn add(self, r: Self) -> Curv4 {
        assert_eq!(self.n, r.n, "curvature size mismatch");
        Curv4 { n: self.n, d: self.d, data: self.data.iter().zip(&r.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &Curv4 {
    type Output = Curv4;
    fn sub(self, r: Self) -> Curv4 {
        assert_eq!(self.n, r.n, "curvature size mismatch");
        Curv4 { n: self.n, d: self.d, data: self.data.iter().zip(&r.data).map(|(a, b)| a - b).collect() }
    }
}

/// Largest violations of the curvature symmetries.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct SymmetryResiduals {
    pub antisym_xy: f64,
    pub antisym_zw: f64,
    pub pair: f64,
    pub bianchi: f64,
}

impl SymmetryResiduals {
    pub fn max(&self) -> f64 {
        self.antisym_xy.max(self.antisym_zw).max(self.pair).max(self.bianchi)
    }
}

/// `ν_q {W♭∧U♭ + Σ_a ((J_aW)♭∧(J_aU)♭ + 2 ω_a(W,U) ω_a)}` in components.
pub fn constant_qk_curvature(nu_q: f64, space: &QHSpace) -> Curv4 {
    let js = space.js();
    Curv4::from_fn(space.n(), |w, u, z, v| {
        let mut r = 0.0;
        if w == z && u == v {
            r += 1.0;
        }
        if w == v && u == z {
            r -= 1.0;
        }
        for j in js {
            r += j[(z, w)] * j[(v, u)] - j[(v, w)] * j[(z, u)] + 2.0 * j[(w, u)] * j[(z, v)];
        }
        nu_q * r
    })
}

/// Ricci tensor and the derived scalars.
#[derive(Clone, Debug, PartialEq)]
pub struct RicciData {
    pub ricci: DMatrix<f64>,
    pub scalar: f64,
    pub nu: f64,
    pub nu_q: f64,
}

/// `r(Y, Z) = Σ_e R_{e Y e Z}`, `ν = s / 4n(n+2)`, `ν_q = ν / 4`.
pub fn ricci_of(r: &Curv4) -> RicciData {
    let d = r.dim();
    let ricci = DMatrix::from_fn(d, d, |y, z| (0..d).map(|e| r.get(e, y, e, z)).sum());
    let scalar = ricci.trace();
    let n = r.n() as f64;
    let nu = scalar / (4.0 * n * (n + 2.0));
    RicciData { ricci, scalar, nu, nu_q: nu / 4.0 }
}

/// `‖r − (s/4n) Id‖_max`.
pub fn einstein_residual(data: &RicciData) -> f64 {
    let d = data.ricci.nrows();
    (&data.ricci - DMatrix::identity(d, d) * (data.scalar / d as f64)).amax()
}

/// Sectional curvature `R_{XYXY} / (|X|²|Y|² − ⟨X,Y⟩²)`.
pub fn sectional(r: &Curv4, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let m = r.endomorphism(x, y);
    let num = y.dot(&(m * x));
    num / (x.norm_squared() * y.norm_squared() - x.dot(y).powi(2))
}

/// Largest residual of
/// `R_{XY J_aZ W} + R_{XYZ J_aW} = −(1/(n+2)) (r(J_bX, Y)⟨J_cZ, W⟩ − r(J_cX, Y)⟨J_bZ, W⟩)`
/// over basis vectors and cyclic `(a, b, c)`. The overall sign on the right is the one
/// valid for `J₁J₂ = J₃` with this curvature convention.
pub fn check_jjqk(r: &Curv4, space: &QHSpace) -> f64 {
    jjqk_residual(r, space, -1.0)
}

pub(crate) fn jjqk_residual(r: &Curv4, space: &QHSpace, sign: f64) -> f64 {
    let d = r.dim();
    let ric = ricci_of(r).ricci;
    let js = space.js();
    let k = sign / (space.n() as f64 + 2.0);
    let mut worst: f64 = 0.0;
    for a in 0..3 {
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        let ja = &js[a];
        // r(J_bX, Y) = Σ_p r[p, y] J_b[p, x]
        let rb = js[b].tr_mul(&ric);
        let rc = js[c].tr_mul(&ric);
        for x in 0..d {
            for y in 0..d {
                for z in 0..d {
                    for w in 0..d {
                        let mut lhs = 0.0;
                        for p in 0..d {
                            lhs += r.get(x, y, p, w) * ja[(p, z)] + r.get(x, y, z, p) * ja[(p, w)];
                        }
                        let rhs = k * (rb[(x, y)] * js[c][(w, z)] - rc[(x, y)] * js[b][(w, z)]);
                        worst = worst.max((lhs - rhs).abs());
                    }
                }
            }
        }
    }
    worst
}

/// `R^S_{XY}Z = S_Y(S_XZ) − S_{S_YX}Z − (S_X(S_YZ) − S_{S_XY}Z)`, lowered.
pub fn r_s(s: &Tensor3) -> Curv4 {
    let d = s.dim();
    Curv4::from_fn(s.n(), |x, y, w, v| {
        let mut acc = 0.0;
        for p in 0..d {
            acc += s.get(x, w, p) * s.get(y, p, v) - s.get(y, x, p) * s.get(p, w, v)
                - s.get(y, w, p) * s.get(x, p, v)
                + s.get(x, y, p) * s.get(p, w, v);
        }
        acc
    })
}

/// `R̃ = R − R^S`.
pub fn r_tilde(r: &Curv4, s: &Tensor3) -> Result<Curv4> {
    if r.n() != s.n() {
        return Err(QksError::DimensionMismatch { expected: r.n(), got: s.n() });
    }
    Ok(r - &r_s(s))
}

/// Largest deviation of `R_{XY}ξ` from
/// `ν_q {⟨X,ξ⟩Y − ⟨Y,ξ⟩X + Σ_a (⟨J_aX,ξ⟩J_aY − ⟨J_aY,ξ⟩J_aX + 2⟨J_aX,Y⟩J_aξ)}`.
pub fn check_35a_with(r: &Curv4, xi: &DVector<f64>, nu_q: f64, space: &QHSpace) -> Result<f64> {
    let d = r.dim();
    if xi.len() != d {
        return Err(QksError::DimensionMismatch { expected: d, got: xi.len() });
    }
    if xi.norm() == 0.0 {
        return Err(QksError::InvalidParameter("xi must be non-zero".into()));
    }
    let js = space.js();
    let jxi: Vec<DVector<f64>> = js.iter().map(|j| j * xi).collect();
    let mut worst: f64 = 0.0;
    for x in 0..d {
        for y in 0..d {
            for v in 0..d {
                let lhs: f64 = (0..d).map(|w| r.get(x, y, w, v) * xi[w]).sum();
                let mut rhs = 0.0;
                if v == y {
                    rhs += xi[x];
                }
                if v == x {
                    rhs -= xi[y];
                }
                for a in 0..3 {
                    let j = &js[a];
                    // ⟨J_aX, ξ⟩ = −(J_aξ)_x
                    rhs += -jxi[a][x] * j[(v, y)] + jxi[a][y] * j[(v, x)] + 2.0 * j[(y, x)] * jxi[a][v];
                }
                worst = worst.max((lhs - nu_q * rhs).abs());
            }
        }
    }
    Ok(worst)
}

/// [`check_35a_with`] at `ν_q = −⟨ξ, ξ⟩`.
pub fn check_35a(r: &Curv4, xi: &DVector<f64>, space: &QHSpace) -> Result<f64> {
    check_35a_with(r, xi, -xi.norm_squared(), space)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classification::t_theta;
    use crate::qh_space::make_qh_space;
    use crate::quaternion::seeded_rng;
    use crate::tensor3::Covector;

    fn e(d: usize, k: usize) -> DVector<f64> {
        DVector::from_fn(d, |i, _| (i == k) as u8 as f64)
    }

    #[test]
    fn constant_model_identities() {
        for n in [2, 3] {
            let s = make_qh_space(n).unwrap();
            let r = constant_qk_curvature(-1.0, &s);
            assert!(r.symmetry_residuals().max() < 1e-13);
            let ric = ricci_of(&r);
            let expect = -16.0 * (n * (n + 2)) as f64;
            assert!((ric.scalar - expect).abs() < 1e-12 * expect.abs());
            assert!(einstein_residual(&ric) < 1e-12);
            assert!((ric.nu_q + 1.0).abs() < 1e-12);
            assert!(check_jjqk(&r, &s) < 1e-12);
        }
        let s = make_qh_space(2).unwrap();
        assert_eq!(constant_qk_curvature(0.0, &s).max_abs(), 0.0);
        assert_eq!(ricci_of(&Curv4::zeros(2)).scalar, 0.0);
        assert_eq!(check_jjqk(&Curv4::zeros(2), &s), 0.0);
    }

    #[test]
    fn jjqk_sign_is_oriented() {
        let s = make_qh_space(2).unwrap();
        let r = constant_qk_curvature(-1.0, &s);
        assert!(jjqk_residual(&r, &s, 1.0) > 1.0);
        let mut rng = seeded_rng(3);
        let g = Curv4::random_algebraic(2, 3, &mut rng);
        assert!(g.symmetry_residuals().max() < 1e-12);
        assert!(check_jjqk(&g, &s) > 1.0);
    }

    #[test]
    fn quaternionic_sectional_curvature() {
        let s = make_qh_space(2).unwrap();
        let nu_q = 0.75;
        let r = constant_qk_curvature(nu_q, &s);
        let x = DVector::from_fn(8, |i, _| ((i + 1) as f64).cos());
        let x = &x / x.norm();
        let y = s.j(0) * &x;
        assert!((sectional(&r, &x, &y) - 4.0 * nu_q).abs() < 1e-13);
        // Totally real plane.
        let y2 = e(8, 4);
        let x2 = e(8, 0);
        assert!((sectional(&r, &x2, &y2) - nu_q).abs() < 1e-13);
    }

    #[test]
    fn eq_35a_on_constant_model() {
        let s = make_qh_space(2).unwrap();
        let xi = e(8, 0);
        let r = constant_qk_curvature(-1.0, &s);
        assert!(check_35a(&r, &xi, &s).unwrap() < 1e-12);
        assert!(check_35a(&Curv4::zeros(2), &xi, &s).unwrap() > 0.5);
        let xi2 = &xi * 2.0;
        assert!(check_35a(&r, &xi2, &s).unwrap() > 0.5);
        assert!(check_35a(&constant_qk_curvature(-4.0, &s), &xi2, &s).unwrap() < 1e-12);
        assert!(check_35a(&r, &DVector::zeros(8), &s).is_err());
    }

    // R¹ and R² of the expansion R^S = −‖ξ‖²R¹ + 2R² for the 𝒬𝒦3 tensor, term by term.
    // R² is the plain cyclic sum; a leading minus on it breaks the identity.
    fn r1_r2(space: &QHSpace, xi: &DVector<f64>) -> (Curv4, Curv4) {
        let js = space.js();
        let d = space.dim();
        let g = |u: &DVector<f64>, v: &DVector<f64>| u.dot(v);
        let basis: Vec<DVector<f64>> = (0..d).map(|k| e(d, k)).collect();
        let jx: Vec<DVector<f64>> = js.iter().map(|j| j * xi).collect();
        let mut r1 = Curv4::zeros(space.n());
        let mut r2 = Curv4::zeros(space.n());
        let idx = |x: usize, y: usize, w: usize, v: usize| ((x * d + y) * d + w) * d + v;
        for x in 0..d {
            for y in 0..d {
                for w in 0..d {
                    let (bx, by, bw) = (&basis[x], &basis[y], &basis[w]);
                    let mut v1 = by * g(bx, bw) - bx * g(by, bw);
                    for j in js {
                        v1 += -(j * by) * g(bx, &(j * bw)) + (j * bx) * g(by, &(j * bw));
                    }
                    let mut v2 = DVector::zeros(d);
                    for a in 0..3 {
                        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
                        let xjb = g(bx, &(&js[b] * by));
                        v2 += xi * (xjb * g(&(&js[b] * bw), xi)) + &jx[b] * (xjb * g(bw, xi));
                        v2 += &jx[b] * (g(bx, &(&js[c] * by)) * g(&(&js[a] * bw), xi));
                        v2 -= &jx[b] * (g(bx, &(&js[a] * by)) * g(&(&js[c] * bw), xi));
                    }
                    for v in 0..d {
                        r1.data[idx(x, y, w, v)] = v1[v];
                        r2.data[idx(x, y, w, v)] = v2[v];
                    }
                }
            }
        }
        (r1, r2)
    }

    #[test]
    fn r_s_for_qk3_tensor() {
        let s = make_qh_space(2).unwrap();
        assert_eq!(r_s(&Tensor3::zeros(2)).max_abs(), 0.0);
        for lambda in [0.5, 1.0, 2.0] {
            let xi = e(8, 0) * f64::sqrt(lambda);
            let st = t_theta(&s, &Covector(xi.clone()));
            let rs = r_s(&st);
            let sym = rs.symmetry_residuals();
            assert!(sym.antisym_xy < 1e-13 && sym.antisym_zw < 1e-13);
            let (r1, r2) = r1_r2(&s, &xi);
            let expect = &r1.scale(-lambda) + &r2.scale(2.0);
            assert!((&rs - &expect).max_abs() < 1e-12, "lambda {lambda}: {}", (&rs - &expect).max_abs());
            for x in 0..8 {
                for y in 0..8 {
                    for rl in [&r1, &r2] {
                        let m = rl.basis_endomorphism(x, y);
                        for j in s.js() {
                            assert!((&m * j - j * &m).amax() < 1e-13);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn r_tilde_for_qk3() {
        let s = make_qh_space(2).unwrap();
        let lambda: f64 = 2.0;
        let xi = e(8, 0) * lambda.sqrt();
        let st = t_theta(&s, &Covector(xi.clone()));
        let rt = r_tilde(&constant_qk_curvature(-lambda, &s), &st).unwrap();
        assert_eq!(r_tilde(&rt, &Tensor3::zeros(2)).unwrap(), rt);
        let js = s.js();
        for x in 0..8 {
            for y in 0..8 {
                let m = rt.basis_endomorphism(x, y);
                assert!((&m * &xi).amax() < 1e-12);
                // Z ⊥ ℍξ: the last four coordinates.
                for z in 4..8 {
                    let mut expect = DVector::zeros(8);
                    for j in js {
                        expect += (j * e(8, z)) * (-2.0 * lambda * j[(y, x)]);
                    }
                    assert!((&m * e(8, z) - expect).amax() < 1e-12);
                }
                let g = |a: usize| js[a][(y, x)];
                let expect = (&js[1] * &xi * g(2) - &js[2] * &xi * g(1)) * (-4.0 * lambda);
                assert!((&m * (&js[0] * &xi) - expect).amax() < 1e-12);
            }
        }
    }
}
