//! The ball model of `HH(n)` and finite-difference checks of its geometry.
//!
//! A point is `(q⁰, …, q^{n−1}) ∈ ℍ^n` with `1 − c̃ϱ > 0`, where `c ≤ 0` is
//! the curvature parameter, `c̃ = −c/4`, `ϱ = Σ_r |q^r|²` and the radius is
//! `ρ_c = 1/√c̃`. `c = 0` is accepted as the flat limit (identity metric,
//! unbounded ball); the field `ξ` and the Cayley map need `c < 0`.
//!
//! The metric is
//!
//! ```text
//! g = ((1 − c̃ϱ) Id + c̃ M) / (1 − c̃ϱ)²
//! ```
//!
//! where the `4 × 4` block `(r, s)` of `M` is built from `A, B, C, D` of
//! [`metric_blocks`]. The triple is the standard one of [`QHSpace`].
//! Its curvature agrees with the constant model at `ν_q = c/4`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::batch;
use crate::curvature::{constant_qk_curvature, Curv4};
use crate::qh_space::{make_qh_space, QHSpace};
use crate::quaternion::{seeded_rng, Quaternion};
use crate::{QksError, Result};

/// Step for first-order quantities.
pub const DEFAULT_H: f64 = 1e-5;
/// Step for curvature, which differentiates twice.
pub const CURVATURE_H: f64 = 1e-3;
/// Sample points lie in the ball of this fraction of `ρ_c`.
pub const SAMPLE_RADIUS: f64 = 0.8;

fn check_c(c: f64) -> Result<()> {
    if !(c <= 0.0) || !c.is_finite() {
        return Err(QksError::InvalidParameter(format!("curvature parameter c = {c} must be finite and <= 0")));
    }
    Ok(())
}

/// An interior point of the ball for curvature parameter `c`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BallPoint {
    c: f64,
    #[serde(serialize_with = "ser_vec")]
    coords: DVector<f64>,
}

fn ser_vec<S: serde::Serializer>(v: &DVector<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter())
}

impl BallPoint {
    pub fn new(c: f64, coords: DVector<f64>) -> Result<Self> {
        check_c(c)?;
        if coords.is_empty() || coords.len() % 4 != 0 {
            return Err(QksError::DimensionMismatch { expected: 4 * (coords.len() / 4).max(1), got: coords.len() });
        }
        let p = Self { c, coords };
        let f = p.defining_value();
        if !(f > 0.0) {
            return Err(QksError::OutsideBall(f));
        }
        Ok(p)
    }

    pub fn origin(n: usize, c: f64) -> Result<Self> {
        Self::new(c, DVector::zeros(4 * n))
    }

    pub fn n(&self) -> usize {
        self.coords.len() / 4
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// `c̃ = −c/4`.
    pub fn c_tilde(&self) -> f64 {
        // avoid −0.0, whose reciprocal square root is −∞
        if self.c == 0.0 {
            0.0
        } else {
            -self.c / 4.0
        }
    }

    /// `ρ_c = 1/√c̃`, infinite in the flat limit.
    pub fn radius(&self) -> f64 {
        1.0 / self.c_tilde().sqrt()
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn quaternion(&self, r: usize) -> Quaternion {
        let v = &self.coords;
        Quaternion::new(v[4 * r], v[4 * r + 1], v[4 * r + 2], v[4 * r + 3])
    }

    /// `ϱ = Σ_r |q^r|²`.
    pub fn varrho(&self) -> f64 {
        self.coords.norm_squared()
    }

    /// `1 − c̃ϱ`.
    pub fn defining_value(&self) -> f64 {
        1.0 - self.c_tilde() * self.varrho()
    }

    /// Euclidean distance to the boundary sphere.
    pub fn margin(&self) -> f64 {
        self.radius() - self.coords.norm()
    }

    fn require_margin(&self, h: f64) -> Result<()> {
        if !(h > 0.0) {
            return Err(QksError::InvalidParameter(format!("step h = {h} must be positive")));
        }
        let m = self.margin();
        if !(m > h) {
            return Err(QksError::Margin { margin: m, h });
        }
        Ok(())
    }
}

/// `(A, B, C, D)` for `q^r = (x, y, z, w)` and `q^s = (X, Y, Z, W)`.
pub fn metric_blocks(qr: Quaternion, qs: Quaternion) -> [f64; 4] {
    let [x, y, z, w] = qr.to_array();
    let [xx, yy, zz, ww] = qs.to_array();
    [
        x * xx + y * yy + z * zz + w * ww,
        x * yy - y * xx + z * ww - w * zz,
        x * zz - y * ww - z * xx + w * yy,
        x * ww + y * zz - z * yy - w * xx,
    ]
}

fn metric_raw(ct: f64, v: &DVector<f64>) -> DMatrix<f64> {
    let d = v.len();
    let n = d / 4;
    let q = |r: usize| Quaternion::new(v[4 * r], v[4 * r + 1], v[4 * r + 2], v[4 * r + 3]);
    let f = 1.0 - ct * v.norm_squared();
    let mut g = DMatrix::identity(d, d) * f;
    for r in 0..n {
        for s in 0..n {
            let [a, b, c, dd] = metric_blocks(q(r), q(s));
            let block = [[a, b, c, dd], [-b, a, dd, -c], [-c, -dd, a, b], [-dd, c, -b, a]];
            for i in 0..4 {
                for j in 0..4 {
                    g[(4 * r + i, 4 * s + j)] += ct * block[i][j];
                }
            }
        }
    }
    g / (f * f)
}

/// The metric matrix at `p`.
pub fn metric_at(p: &BallPoint) -> DMatrix<f64> {
    metric_raw(p.c_tilde(), &p.coords)
}

/// Worst `|J_aᵀ g J_a − g|` at `p`.
pub fn hermitian_residual(p: &BallPoint) -> Result<f64> {
    let g = metric_at(p);
    let space = make_qh_space(p.n())?;
    Ok(space.js().iter().map(|j| (j.transpose() * &g * j - &g).amax()).fold(0.0, f64::max))
}

fn xi_raw(ct: f64, v: &DVector<f64>) -> DVector<f64> {
    let n = v.len() / 4;
    let rho = 1.0 / ct.sqrt();
    let f = 1.0 - ct * v.norm_squared();
    let (x0, y0, z0, w0) = (v[0], v[1], v[2], v[3]);
    let den = (x0 - rho).powi(2) + y0 * y0 + z0 * z0 + w0 * w0;
    let pref = ct.sqrt() * f / den;
    let mut out = DVector::zeros(v.len());
    let t = x0 - rho;
    out[0] = pref * (t * t - y0 * y0 - z0 * z0 - w0 * w0);
    out[1] = pref * 2.0 * t * y0;
    out[2] = pref * 2.0 * t * z0;
    out[3] = pref * 2.0 * t * w0;
    let u = rho - x0;
    for s in 1..n {
        let (xs, ys, zs, ws) = (v[4 * s], v[4 * s + 1], v[4 * s + 2], v[4 * s + 3]);
        out[4 * s] = -pref * (u * xs + y0 * ys + z0 * zs + w0 * ws);
        out[4 * s + 1] = -pref * (u * ys - y0 * xs - zs * w0 + ws * z0);
        out[4 * s + 2] = -pref * (u * zs - z0 * xs + ys * w0 - y0 * ws);
        out[4 * s + 3] = -pref * (u * ws - w0 * xs - ys * z0 + y0 * zs);
    }
    out
}

/// The vector field `ξ` at `p`, with `g(ξ, ξ) = c̃`.
pub fn xi_at(p: &BallPoint) -> Result<DVector<f64>> {
    if p.c_tilde() == 0.0 {
        return Err(QksError::InvalidParameter("xi needs c < 0".into()));
    }
    Ok(xi_raw(p.c_tilde(), &p.coords))
}

/// Christoffel symbols `Γ^l_{ij}`, stored as `data[(l·d + i)·d + j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Christoffel {
    d: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, l: usize, i: usize, j: usize) -> f64 {
        self.data[(l * self.d + i) * self.d + j]
    }

    /// `(Γ_k)^i_m = Γ^i_{km}`, the connection matrix along `∂_k`.
    pub fn along(&self, k: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.d, self.d, |i, m| self.get(i, k, m))
    }

    pub fn symmetry_residual(&self) -> f64 {
        let d = self.d;
        let mut r: f64 = 0.0;
        for l in 0..d {
            for i in 0..d {
                for j in 0..d {
                    r = r.max((self.get(l, i, j) - self.get(l, j, i)).abs());
                }
            }
        }
        r
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

fn shifted(v: &DVector<f64>, k: usize, h: f64) -> DVector<f64> {
    let mut w = v.clone();
    w[k] += h;
    w
}

/// `∂_k g` by central differences, for every `k`.
fn metric_derivatives(ct: f64, v: &DVector<f64>, h: f64) -> Vec<DMatrix<f64>> {
    (0..v.len()).map(|k| (metric_raw(ct, &shifted(v, k, h)) - metric_raw(ct, &shifted(v, k, -h))) / (2.0 * h)).collect()
}

fn christoffels_raw(ct: f64, v: &DVector<f64>, h: f64) -> Christoffel {
    let d = v.len();
    let dg = metric_derivatives(ct, v, h);
    let gi = metric_raw(ct, v).try_inverse().expect("metric is positive definite");
    // T[m][i][j] = ½(∂_i g_mj + ∂_j g_mi − ∂_m g_ij)
    let mut t = vec![0.0; d * d * d];
    for m in 0..d {
        for i in 0..d {
            for j in 0..d {
                t[(m * d + i) * d + j] = 0.5 * (dg[i][(m, j)] + dg[j][(m, i)] - dg[m][(i, j)]);
            }
        }
    }
    let mut data = vec![0.0; d * d * d];
    for l in 0..d {
        for m in 0..d {
            let glm = gi[(l, m)];
            if glm == 0.0 {
                continue;
            }
            for ij in 0..d * d {
                data[l * d * d + ij] += glm * t[m * d * d + ij];
            }
        }
    }
    Christoffel { d, data }
}

/// Levi-Civita symbols from central differences of the metric.
pub fn christoffels_fd(p: &BallPoint, h: f64) -> Result<Christoffel> {
    p.require_margin(h)?;
    Ok(christoffels_raw(p.c_tilde(), &p.coords, h))
}

/// Worst `|∇_k g_ij|` with the differenced metric and [`christoffels_fd`].
pub fn metric_compatibility_fd(p: &BallPoint, h: f64) -> Result<f64> {
    p.require_margin(h)?;
    let ct = p.c_tilde();
    let dg = metric_derivatives(ct, &p.coords, h);
    let gamma = christoffels_raw(ct, &p.coords, h);
    let g = metric_at(p);
    let mut worst: f64 = 0.0;
    for (k, dgk) in dg.iter().enumerate() {
        let gk = gamma.along(k);
        // ∇_k g = ∂_k g − Γ_kᵀ g − g Γ_k
        let cov = dgk - gk.transpose() * &g - &g * &gk;
        worst = worst.max(cov.amax());
    }
    Ok(worst)
}

/// `max_k ‖∇_kξ − (g(e_k,ξ)ξ − g(ξ,ξ)e_k − Σ_a g(e_k,J_aξ)J_aξ)‖_g` by central differences.
pub fn verify_xi_equation(p: &BallPoint, h: f64) -> Result<f64> {
    p.require_margin(h)?;
    let xi = xi_at(p)?;
    let ct = p.c_tilde();
    let d = p.dim();
    let g = metric_at(p);
    let gamma = christoffels_raw(ct, &p.coords, h);
    let space = make_qh_space(p.n())?;
    let jxi: Vec<DVector<f64>> = space.js().iter().map(|j| j * &xi).collect();
    let gxx = xi.dot(&(&g * &xi));
    let mut worst: f64 = 0.0;
    for k in 0..d {
        let dxi = (xi_raw(ct, &shifted(&p.coords, k, h)) - xi_raw(ct, &shifted(&p.coords, k, -h))) / (2.0 * h);
        let cov = dxi + gamma.along(k) * &xi;
        let gk = g.row(k).transpose();
        let mut rhs = &xi * gk.dot(&xi);
        rhs[k] -= gxx;
        for v in &jxi {
            rhs -= v * gk.dot(v);
        }
        let diff = cov - rhs;
        worst = worst.max(diff.dot(&(&g * &diff)).max(0.0).sqrt());
    }
    Ok(worst)
}

/// Fit of `∇_kJ₁ = τ³J₂ − τ²J₃` (and cyclically) at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct NajiFit {
    /// Row `a` holds the components `τ^{a+1}(∂_k)`.
    pub tau: DMatrix<f64>,
    /// Largest entry of the unexplained part of `∇J`.
    pub residual: f64,
}

/// Least-squares fit of the one-forms `τ^a` to `∇_kJ_a = [Γ_k, J_a]`.
pub fn verify_naji_fd(p: &BallPoint, h: f64) -> Result<NajiFit> {
    p.require_margin(h)?;
    let d = p.dim();
    let gamma = christoffels_raw(p.c_tilde(), &p.coords, h);
    let space = make_qh_space(p.n())?;
    let js = space.js();
    let mut design = DMatrix::zeros(3 * d * d, 3);
    for a in 0..3 {
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        // ∇J_a = τ^c J_b − τ^b J_c
        for (e, (i, j)) in (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).enumerate() {
            design[(a * d * d + e, c)] += js[b][(i, j)];
            design[(a * d * d + e, b)] -= js[c][(i, j)];
        }
    }
    let pinv = design.clone().pseudo_inverse(1e-13).expect("non-negative epsilon");
    let mut tau = DMatrix::zeros(3, d);
    let mut residual: f64 = 0.0;
    for k in 0..d {
        let gk = gamma.along(k);
        let mut rhs = DVector::zeros(3 * d * d);
        for a in 0..3 {
            let nj = &gk * &js[a] - &js[a] * &gk;
            for i in 0..d {
                for j in 0..d {
                    rhs[a * d * d + i * d + j] = nj[(i, j)];
                }
            }
        }
        let t = &pinv * &rhs;
        residual = residual.max((&design * &t - rhs).amax());
        tau.set_column(k, &t);
    }
    Ok(NajiFit { tau, residual })
}

/// Curvature at `p` from central differences of [`christoffels_fd`], in an
/// orthonormal frame `g^{−1/2}∂`, so that it compares with [`constant_qk_curvature`].
pub fn curvature_fd(p: &BallPoint, h: f64) -> Result<Curv4> {
    p.require_margin(2.0 * h)?;
    let ct = p.c_tilde();
    let d = p.dim();
    let v = &p.coords;
    let gamma = christoffels_raw(ct, v, h);
    let dgamma: Vec<Christoffel> = (0..d)
        .map(|k| {
            let (a, b) = (christoffels_raw(ct, &shifted(v, k, h), h), christoffels_raw(ct, &shifted(v, k, -h), h));
            Christoffel { d, data: a.data.iter().zip(&b.data).map(|(x, y)| (x - y) / (2.0 * h)).collect() }
        })
        .collect();
    let g = metric_at(p);
    // R^l_{ijk} = ∂_iΓ^l_jk − ∂_jΓ^l_ik + Γ^l_im Γ^m_jk − Γ^l_jm Γ^m_ik
    let mut r_up = vec![0.0; d * d * d * d];
    for l in 0..d {
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let mut s = dgamma[i].get(l, j, k) - dgamma[j].get(l, i, k);
                    for m in 0..d {
                        s += gamma.get(l, i, m) * gamma.get(m, j, k) - gamma.get(l, j, m) * gamma.get(m, i, k);
                    }
                    r_up[((l * d + i) * d + j) * d + k] = s;
                }
            }
        }
    }
    // lowered: R_ijkl = −g_lm R^m_ijk
    let low = |i: usize, j: usize, k: usize, l: usize| -> f64 {
        -(0..d).map(|m| g[(l, m)] * r_up[((m * d + i) * d + j) * d + k]).sum::<f64>()
    };
    let mut lowered = vec![0.0; d * d * d * d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    lowered[((i * d + j) * d + k) * d + l] = low(i, j, k, l);
                }
            }
        }
    }
    let eig = SymmetricEigen::new(g);
    let p_half = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(|x| 1.0 / x.sqrt()))
        * eig.eigenvectors.transpose();
    let mut t = lowered;
    for mode in 0..4 {
        t = contract_mode4(&t, d, mode, &p_half);
    }
    Ok(Curv4::from_fn(p.n(), |a, b, c, e| t[((a * d + b) * d + c) * d + e]))
}

/// `out[..a..] = Σ_i t[..i..] m[i, a]` on one mode of a `d⁴` array.
fn contract_mode4(t: &[f64], d: usize, mode: usize, m: &DMatrix<f64>) -> Vec<f64> {
    let stride = d.pow(3 - mode as u32);
    let mut out = vec![0.0; t.len()];
    for (idx, o) in out.iter_mut().enumerate() {
        let a = (idx / stride) % d;
        let base = idx - a * stride;
        *o = (0..d).map(|i| t[base + i * stride] * m[(i, a)]).sum();
    }
    out
}

/// Relative deviation of [`curvature_fd`] from the constant model at `ν_q = c/4`.
pub fn curvature_deviation(p: &BallPoint, h: f64) -> Result<f64> {
    let r = curvature_fd(p, h)?;
    let model = constant_qk_curvature(p.c() / 4.0, &make_qh_space(p.n())?);
    Ok((&r - &model).norm() / model.norm().max(f64::MIN_POSITIVE))
}

/// A point `(χ⁰, …, χ^{n−1})` of the Siegel domain side.
#[derive(Clone, Debug, PartialEq)]
pub struct SiegelPoint {
    pub chi: Vec<Quaternion>,
}

impl SiegelPoint {
    pub fn new(chi: Vec<Quaternion>) -> Self {
        Self { chi }
    }

    pub fn from_coords(v: &DVector<f64>) -> Result<Self> {
        if v.is_empty() || v.len() % 4 != 0 {
            return Err(QksError::DimensionMismatch { expected: 4 * (v.len() / 4).max(1), got: v.len() });
        }
        Ok(Self { chi: (0..v.len() / 4).map(|r| Quaternion::new(v[4 * r], v[4 * r + 1], v[4 * r + 2], v[4 * r + 3])).collect() })
    }

    pub fn to_coords(&self) -> DVector<f64> {
        DVector::from_iterator(4 * self.chi.len(), self.chi.iter().flat_map(|q| q.to_array()))
    }

    /// `Re χ⁰ − Σ_{r≥1} |χ^r|²`, positive on `D₊`.
    pub fn siegel_value(&self) -> f64 {
        self.chi[0].w - self.chi[1..].iter().map(|q| q.norm_sq()).sum::<f64>()
    }

    /// Random point of `D₊` near `χ = (1, 0, …, 0)`.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        loop {
            let mut chi: Vec<Quaternion> =
                (0..n).map(|_| Quaternion::from_array([0, 1, 2, 3].map(|_| rng.random_range(-0.5..0.5)))).collect();
            chi[0].w += 1.0;
            let p = Self { chi };
            if p.siegel_value() > 0.05 {
                return p;
            }
        }
    }
}

/// `q⁰ = ρ(χ⁰ − 1)(χ⁰ + 1)⁻¹`, `q^r = 2ρχ^r(χ⁰ + 1)⁻¹`.
pub fn cayley_inv(c: f64, chi: &SiegelPoint) -> Result<BallPoint> {
    check_c(c)?;
    if c == 0.0 {
        return Err(QksError::InvalidParameter("the Cayley map needs c < 0".into()));
    }
    let rho = 1.0 / (-c / 4.0).sqrt();
    let d = (chi.chi[0] + Quaternion::ONE).inverse()?;
    let mut q = vec![((chi.chi[0] - Quaternion::ONE) * d).scale(rho)];
    q.extend(chi.chi[1..].iter().map(|&x| (x * d).scale(2.0 * rho)));
    BallPoint::new(c, SiegelPoint::new(q).to_coords())
}

/// Inverse of [`cayley_inv`]: `χ⁰ = (1 + u)(1 − u)⁻¹` with `u = q⁰/ρ`, `χ^r = ½(q^r/ρ)(χ⁰ + 1)`.
pub fn cayley(p: &BallPoint) -> Result<SiegelPoint> {
    if p.c_tilde() == 0.0 {
        return Err(QksError::InvalidParameter("the Cayley map needs c < 0".into()));
    }
    let rho = p.radius();
    let u = p.quaternion(0).scale(1.0 / rho);
    let chi0 = (Quaternion::ONE + u) * (Quaternion::ONE - u).inverse()?;
    let mut chi = vec![chi0];
    chi.extend((1..p.n()).map(|r| (p.quaternion(r).scale(0.5 / rho)) * (chi0 + Quaternion::ONE)));
    Ok(SiegelPoint::new(chi))
}

/// `ξ_{D₊} = 2c̃(Re χ⁰ − Σ_{r≥1}|χ^r|²) ∂/∂a⁰`.
pub fn xi_siegel(c: f64, chi: &SiegelPoint) -> DVector<f64> {
    let mut v = DVector::zeros(4 * chi.chi.len());
    v[0] = 2.0 * (-c / 4.0) * chi.siegel_value();
    v
}

/// Largest entry of `dφ(ξ) − ξ_{D₊}(φ(p))` with `φ` = [`cayley`], differentiated centrally along `ξ`.
pub fn xi_pushforward_residual(p: &BallPoint, h: f64) -> Result<f64> {
    let xi = xi_at(p)?;
    let step = h / xi.norm().max(1.0);
    let plus = BallPoint::new(p.c(), p.coords() + &xi * step)?;
    let minus = BallPoint::new(p.c(), p.coords() - &xi * step)?;
    let push = (cayley(&plus)?.to_coords() - cayley(&minus)?.to_coords()) / (2.0 * step);
    Ok((push - xi_siegel(p.c(), &cayley(p)?)).amax())
}

/// `count` points uniform in the ball of radius `0.8ρ_c`, reproducible from `seed`.
pub fn sample_points(n: usize, c: f64, count: usize, seed: u64) -> Result<Vec<BallPoint>> {
    check_c(c)?;
    if n == 0 {
        return Err(QksError::InvalidParameter("n must be positive".into()));
    }
    if c == 0.0 {
        return Err(QksError::InvalidParameter("sampling needs a bounded ball (c < 0)".into()));
    }
    let d = 4 * n;
    let radius = SAMPLE_RADIUS / (-c / 4.0).sqrt();
    let mut rng = seeded_rng(seed);
    (0..count)
        .map(|_| {
            let dir = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
            let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
            BallPoint::new(c, dir.normalize() * r)
        })
        .collect()
}

/// `log₂(f(h)/f(h/2))`, the observed convergence order of a residual.
pub fn convergence_order(f: impl Fn(f64) -> Result<f64>, h: f64) -> Result<f64> {
    let (a, b) = (f(h)?, f(h / 2.0)?);
    Ok((a / b).log2())
}

/// Residuals of the pointwise checks at one sample point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointReport {
    pub index: usize,
    pub coords: Vec<f64>,
    pub margin: f64,
    pub hermitian: f64,
    pub xi_norm_error: f64,
    pub xi_equation: f64,
    pub naji: f64,
    pub pushforward: f64,
}

impl PointReport {
    pub fn worst(&self) -> f64 {
        [self.hermitian, self.xi_norm_error, self.xi_equation, self.naji, self.pushforward].into_iter().fold(0.0, f64::max)
    }
}

pub fn point_report(index: usize, p: &BallPoint, h: f64) -> Result<PointReport> {
    let xi = xi_at(p)?;
    let g = metric_at(p);
    Ok(PointReport {
        index,
        coords: p.coords.iter().copied().collect(),
        margin: p.margin(),
        hermitian: hermitian_residual(p)?,
        xi_norm_error: (xi.dot(&(&g * &xi)) - p.c_tilde()).abs(),
        xi_equation: verify_xi_equation(p, h)?,
        naji: verify_naji_fd(p, h)?.residual,
        pushforward: xi_pushforward_residual(p, h)?,
    })
}

/// [`point_report`] over a batch, in input order.
pub fn point_reports(points: &[BallPoint], h: f64) -> Result<Vec<PointReport>> {
    let idx: Vec<(usize, &BallPoint)> = points.iter().enumerate().collect();
    batch::map(&idx, |&(i, p)| point_report(i, p, h)).into_iter().collect()
}

/// The triple used by the ball checks.
pub fn ball_space(p: &BallPoint) -> Result<QHSpace> {
    make_qh_space(p.n())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts() -> Vec<BallPoint> {
        sample_points(2, -4.0, 20, 11).unwrap()
    }

    #[test]
    fn metric_basics() {
        let o = BallPoint::origin(2, -4.0).unwrap();
        assert_eq!(metric_at(&o), DMatrix::identity(8, 8));
        for p in pts() {
            let g = metric_at(&p);
            assert!((&g - g.transpose()).amax() < 1e-14);
            assert!(g.clone().cholesky().is_some());
            assert!(hermitian_residual(&p).unwrap() < 1e-11);
        }
        assert!(matches!(BallPoint::new(-4.0, DVector::from_element(8, 0.5)), Err(QksError::OutsideBall(_))));
        assert!(BallPoint::new(1.0, DVector::zeros(8)).is_err());
    }

    #[test]
    fn xi_values() {
        let o = BallPoint::origin(2, -4.0).unwrap();
        let xi = xi_at(&o).unwrap();
        assert!((xi[0] - 1.0).abs() < 1e-15 && xi.rows(1, 7).amax() == 0.0);
        for p in pts() {
            let xi = xi_at(&p).unwrap();
            assert!((xi.dot(&(metric_at(&p) * &xi)) - p.c_tilde()).abs() < 1e-10);
            // c ↦ 4c with p ↦ p/2 doubles the field
            let half = BallPoint::new(4.0 * p.c(), p.coords() / 2.0).unwrap();
            assert!((xi_at(&half).unwrap() - &xi * 2.0).amax() < 1e-12);
        }
    }

    #[test]
    fn christoffel_checks() {
        let flat = BallPoint::new(0.0, DVector::from_element(8, 0.3)).unwrap();
        assert_eq!(christoffels_fd(&flat, 1e-5).unwrap().max_abs(), 0.0);
        let nj = verify_naji_fd(&flat, 1e-5).unwrap();
        assert_eq!(nj.residual, 0.0);
        for p in pts().iter().take(5) {
            let g = christoffels_fd(p, 1e-5).unwrap();
            assert!(g.symmetry_residual() < 1e-10);
            assert!(metric_compatibility_fd(p, 1e-5).unwrap() < 5e-10 + 1e-9);
        }
        let edge = BallPoint::new(-4.0, DVector::from_fn(8, |i, _| if i == 0 { 1.0 - 1e-6 } else { 0.0 })).unwrap();
        assert!(matches!(christoffels_fd(&edge, 1e-5), Err(QksError::Margin { .. })));
    }

    #[test]
    fn xi_equation_and_naji() {
        for p in pts().iter().filter(|p| p.margin() > 0.1).take(8) {
            assert!(verify_xi_equation(p, 1e-5).unwrap() < 1e-6);
            assert!(verify_naji_fd(p, 1e-5).unwrap().residual < 1e-6);
        }
        let p = &pts()[0];
        let order = convergence_order(|h| verify_xi_equation(p, h), 1e-3).unwrap();
        assert!((1.8..=2.2).contains(&order), "order {order}");
        let o = BallPoint::origin(2, -4.0).unwrap();
        assert!(verify_naji_fd(&o, 1e-5).unwrap().tau.amax() < 1e-9);
        assert!(verify_xi_equation(&o, 1e-5).unwrap() < 1e-8);
    }

    #[test]
    fn curvature_at_origin() {
        let o = BallPoint::origin(2, -4.0).unwrap();
        assert!(curvature_deviation(&o, 1e-3).unwrap() < 1e-3);
        let r = curvature_fd(&o, 1e-3).unwrap();
        assert!(r.symmetry_residuals().max() < 1e-3 * r.norm());
    }

    #[test]
    fn cayley_round_trip() {
        let mut rng = seeded_rng(4);
        for _ in 0..20 {
            let chi = SiegelPoint::random(2, &mut rng);
            let p = cayley_inv(-4.0, &chi).unwrap();
            assert!(p.defining_value() > 0.0);
            let back = cayley(&p).unwrap();
            assert!((back.to_coords() - chi.to_coords()).amax() < 1e-12);
        }
        let one = SiegelPoint::new(vec![Quaternion::ONE, Quaternion::ZERO]);
        assert_eq!(cayley_inv(-4.0, &one).unwrap().coords().amax(), 0.0);
        let bad = SiegelPoint::new(vec![-Quaternion::ONE, Quaternion::ZERO]);
        assert!(matches!(cayley_inv(-4.0, &bad), Err(QksError::ZeroDivision)));
        for p in pts().iter().take(5) {
            assert!(xi_pushforward_residual(p, 1e-5).unwrap() < 1e-7);
        }
    }

    #[test]
    fn reports_are_ordered() {
        let p = pts();
        let r = point_reports(&p[..4], DEFAULT_H).unwrap();
        assert!(r.iter().enumerate().all(|(i, x)| x.index == i && x.worst() < 1e-6));
    }
}
