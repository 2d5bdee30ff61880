//! Membership in `𝒱`, the split `S = Θ + T`, and the five invariant pieces `𝒬𝒦1 … 𝒬𝒦5`.
//!
//! Normalizations used throughout:
//!
//! * `Θ_{XYZ} = ½ π^a(X) ⟨J_aY, Z⟩` for the `𝒱̌` part,
//! * `𝒬𝒦1`: `Σ_a θ(J_aX) ⟨J_aY, Z⟩`, i.e. `π^a = 2 θ∘J_a`,
//! * `𝒬𝒦2`: `Σ_a θ^a(X) ⟨J_aY, Z⟩` with `Σ_a θ^a∘J_a = 0`,
//! * `𝒬𝒦3`: the tensor [`t_theta`], whose trace is `c₁₂(T^θ) = (4n+2) θ`,
//! * `𝒬𝒦4 = 𝒱̂² ∩ ker c₁₂` and `𝒬𝒦5 = 𝒱̂⁻⁴`, the eigenspaces of `L` for `2` and `−4`.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use rand::Rng;
use serde::Serialize;

use crate::batch;
use crate::qh_space::{make_qh_space, GroupElement, QHSpace};
use crate::tensor3::{act_real, c12, inner, l_op_unchecked, twist_average, Covector, Tensor3, MEMBERSHIP_TOL};
use crate::{QksError, Result};

/// Default class-presence threshold, relative to `‖S‖`.
pub const PRESENCE_THRESHOLD: f64 = 1e-6;

/// Singular values below this fraction of the largest count as zero.
pub const RANK_TOL: f64 = 1e-8;

/// One of the five irreducible pieces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum QkClass {
    One = 1,
    Two = 2,
    Three = 3,
    Four = 4,
    Five = 5,
}

impl QkClass {
    pub const ALL: [QkClass; 5] = [Self::One, Self::Two, Self::Three, Self::Four, Self::Five];

    pub fn from_index(i: usize) -> Result<Self> {
        Self::ALL
            .get(i.wrapping_sub(1))
            .copied()
            .ok_or_else(|| QksError::InvalidParameter(format!("class {i} not in 1..=5")))
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// `½ Σ_a π^a(X) ⟨J_aY, Z⟩`.
pub fn theta_from_pi(space: &QHSpace, pi: &[Covector; 3]) -> Tensor3 {
    let js = space.js();
    Tensor3::from_fn(space.n(), |x, y, z| 0.5 * (0..3).map(|a| pi[a].0[x] * js[a][(z, y)]).sum::<f64>())
}

/// `Σ_a θ(J_aX) ⟨J_aY, Z⟩`.
pub fn qk1_tensor(space: &QHSpace, theta: &Covector) -> Tensor3 {
    let js = space.js();
    let tj: Vec<Covector> = js.iter().map(|j| theta.compose(j)).collect();
    Tensor3::from_fn(space.n(), |x, y, z| (0..3).map(|a| tj[a].0[x] * js[a][(z, y)]).sum())
}

/// Removes the component of `(θ¹, θ², θ³)` violating `Σ_a θ^a∘J_a = 0`.
pub fn project_qk2_forms(space: &QHSpace, thetas: &[Covector; 3]) -> [Covector; 3] {
    // C(θ) = Σ_a J_aᵀθ^a has C C* = 3 Id, so θ^a ↦ θ^a − ⅓ J_a C(θ) is the orthogonal projection onto ker C.
    let js = space.js();
    let c = (0..3).fold(DVector::zeros(space.dim()), |acc, a| acc + js[a].tr_mul(&thetas[a].0));
    [0, 1, 2].map(|a| Covector(&thetas[a].0 - (&js[a] * &c) / 3.0))
}

/// `Σ_a θ^a(X) ⟨J_aY, Z⟩` with the forms first projected onto `Σ_a θ^a∘J_a = 0`.
pub fn qk2_tensor(space: &QHSpace, thetas: &[Covector; 3]) -> Result<Tensor3> {
    let p = project_qk2_forms(space, thetas);
    let scale: f64 = thetas.iter().map(|t| t.norm()).sum();
    if p.iter().map(|t| t.norm()).sum::<f64>() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(QksError::InvalidParameter("QK2 forms vanish after projection".into()));
    }
    let js = space.js();
    Ok(Tensor3::from_fn(space.n(), |x, y, z| (0..3).map(|a| p[a].0[x] * js[a][(z, y)]).sum()))
}

/// `T^θ_{XYZ} = ⟨X,Y⟩θ(Z) − ⟨X,Z⟩θ(Y) + Σ_a (⟨J_aX,Y⟩θ(J_aZ) − ⟨J_aX,Z⟩θ(J_aY))`.
pub fn t_theta(space: &QHSpace, theta: &Covector) -> Tensor3 {
    let js = space.js();
    let tj: Vec<Covector> = js.iter().map(|j| theta.compose(j)).collect();
    let th = &theta.0;
    Tensor3::from_fn(space.n(), |x, y, z| {
        let mut v = 0.0;
        if x == y {
            v += th[z];
        }
        if x == z {
            v -= th[y];
        }
        for a in 0..3 {
            v += js[a][(x, y)] * tj[a].0[z] - js[a][(x, z)] * tj[a].0[y];
        }
        v
    })
}

/// Outcome of the least-squares membership test.
#[derive(Clone, Debug)]
pub struct Membership {
    /// Frobenius norm of the part of the defining equations left unexplained.
    pub residual: f64,
    /// `residual / ‖S‖`, zero for `S = 0`.
    pub relative: f64,
    pub pi: [Covector; 3],
}

/// Fits `π¹, π², π³` to
/// `S_{X J_aY J_aZ} − S_{XYZ} = π^c(X)⟨J_bY, J_aZ⟩ − π^b(X)⟨J_cY, J_aZ⟩`, `(a, b, c)` cyclic.
pub fn is_in_v(s: &Tensor3, space: &QHSpace) -> Result<Membership> {
    if s.n() != space.n() {
        return Err(QksError::DimensionMismatch { expected: space.n(), got: s.n() });
    }
    let d = space.dim();
    let js = space.js();
    let twists: Vec<Tensor3> = (0..3).map(|a| crate::tensor3::j_twist(s, space, a)).collect();
    // Design columns per equation a: cols[a][c] is the (y, z) coefficient matrix of π^c.
    let gram = |b: usize, a: usize| js[b].tr_mul(&js[a]);
    let mut cols: Vec<[DMatrix<f64>; 3]> = Vec::with_capacity(3);
    for a in 0..3 {
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        let mut row = [DMatrix::zeros(d, d), DMatrix::zeros(d, d), DMatrix::zeros(d, d)];
        row[c] += gram(b, a);
        row[b] -= gram(c, a);
        cols.push(row);
    }
    let mut normal = Matrix3::zeros();
    for row in &cols {
        for p in 0..3 {
            for q in 0..3 {
                normal[(p, q)] += row[p].dot(&row[q]);
            }
        }
    }
    let chol = normal.cholesky().ok_or_else(|| QksError::InvalidParameter("singular normal matrix".into()))?;
    let mut pi = [DVector::zeros(d), DVector::zeros(d), DVector::zeros(d)];
    let mut res2: f64 = 0.0;
    for x in 0..d {
        let lhs: Vec<DMatrix<f64>> =
            (0..3).map(|a| DMatrix::from_fn(d, d, |y, z| twists[a].get(x, y, z) - s.get(x, y, z))).collect();
        let mut rhs = Vector3::zeros();
        for a in 0..3 {
            for p in 0..3 {
                rhs[p] += cols[a][p].dot(&lhs[a]);
            }
        }
        let sol = chol.solve(&rhs);
        for p in 0..3 {
            pi[p][x] = sol[p];
        }
        for a in 0..3 {
            let fit = &cols[a][0] * sol[0] + &cols[a][1] * sol[1] + &cols[a][2] * sol[2];
            let diff: DMatrix<f64> = &lhs[a] - fit;
            res2 += diff.norm_squared();
        }
    }
    let residual = res2.sqrt();
    let norm = s.norm();
    let relative = if norm > 0.0 { residual / norm } else { 0.0 };
    Ok(Membership { residual, relative, pi: pi.map(Covector) })
}

fn require_v(s: &Tensor3, space: &QHSpace, tol: f64) -> Result<Membership> {
    let m = is_in_v(s, space)?;
    if m.relative > tol {
        return Err(QksError::NotMember { space: "V", residual: m.relative });
    }
    Ok(m)
}

/// `(Θ, T)` with `T = ¼(S + Σ_a S_{X J_aY J_aZ})` and `Θ = S − T`.
pub fn theta_split(s: &Tensor3, space: &QHSpace, tol: f64) -> Result<(Tensor3, Tensor3)> {
    require_v(s, space, tol)?;
    let t = twist_average(s, space);
    Ok((s - &t, t))
}

fn contract_pi(theta: &Tensor3, space: &QHSpace) -> [Covector; 3] {
    let d = space.dim();
    let scale = 1.0 / (2.0 * space.n() as f64);
    [0, 1, 2].map(|a| {
        let j = space.j(a);
        Covector(DVector::from_fn(d, |x, _| {
            let mut acc = 0.0;
            for s_ in 0..d {
                for t in 0..d {
                    acc += theta.get(x, s_, t) * j[(t, s_)];
                }
            }
            acc * scale
        }))
    })
}

/// `π^a(X) = (1/2n) Σ_{s,t} Θ_{X e_s e_t} ⟨J_a e_s, e_t⟩`.
pub fn extract_pi(theta: &Tensor3, space: &QHSpace, tol: f64) -> Result<[Covector; 3]> {
    let pi = contract_pi(theta, space);
    let norm = theta.norm();
    if norm > 0.0 {
        let r = (theta - &theta_from_pi(space, &pi)).norm() / norm;
        if r > tol {
            return Err(QksError::NotMember { space: "V-check", residual: r });
        }
    }
    Ok(pi)
}

/// The five pieces of `S ∈ 𝒱` and the forms that parametrize them.
#[derive(Clone, Debug)]
pub struct ClassDecomposition {
    pub parts: [Tensor3; 5],
    pub norms: [f64; 5],
    pub pi: [Covector; 3],
    pub theta1: Covector,
    pub theta3: Covector,
}

impl ClassDecomposition {
    pub fn part(&self, class: QkClass) -> &Tensor3 {
        &self.parts[class.index() - 1]
    }

    /// `‖S − Σ S_i‖ / ‖S‖`.
    pub fn reconstruction_residual(&self, s: &Tensor3) -> f64 {
        let sum = self.parts.iter().skip(1).fold(self.parts[0].clone(), |acc, p| &acc + p);
        let norm = s.norm();
        let r = (s - &sum).norm();
        if norm > 0.0 {
            r / norm
        } else {
            r
        }
    }

    /// `max_{i<j} |⟨S_i, S_j⟩| / ‖S‖²` with `‖S‖² = Σ‖S_i‖²`.
    pub fn orthogonality_residual(&self) -> f64 {
        let total: f64 = self.norms.iter().map(|v| v * v).sum();
        if total == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for i in 0..5 {
            for j in i + 1..5 {
                worst = worst.max(inner(&self.parts[i], &self.parts[j]).unwrap_or(f64::INFINITY).abs());
            }
        }
        worst / total
    }

    pub fn report(&self, s: &Tensor3) -> DecompositionReport {
        let total = s.norm();
        DecompositionReport {
            norms: self.norms,
            relative_norms: self.norms.map(|v| if total > 0.0 { v / total } else { 0.0 }),
            pi: self.pi.clone(),
            theta1: self.theta1.clone(),
            theta3: self.theta3.clone(),
            reconstruction_residual: self.reconstruction_residual(s),
            orthogonality_residual: self.orthogonality_residual(),
        }
    }
}

/// Serializable summary of a [`ClassDecomposition`].
#[derive(Clone, Debug, Serialize)]
pub struct DecompositionReport {
    pub norms: [f64; 5],
    pub relative_norms: [f64; 5],
    pub pi: [Covector; 3],
    pub theta1: Covector,
    pub theta3: Covector,
    pub reconstruction_residual: f64,
    pub orthogonality_residual: f64,
}

/// Split of `T ∈ 𝒱̂` into `(θ₃, S₃, S₄, S₅)`.
fn hat_parts(t: &Tensor3, space: &QHSpace) -> (Covector, Tensor3, Tensor3, Tensor3) {
    let denom = 4.0 * space.n() as f64 + 2.0;
    let theta3 = c12(t).scale(1.0 / denom);
    let s3 = t_theta(space, &theta3);
    let tp = t - &s3;
    let lt = l_op_unchecked(&tp, space);
    let s4 = (&lt + &tp.scale(4.0)).scale(1.0 / 6.0);
    let s5 = (&tp.scale(2.0) - &lt).scale(1.0 / 6.0);
    (theta3, s3, s4, s5)
}

/// Decomposes `S ∈ 𝒱`; fails when the relative membership residual exceeds `tol`.
pub fn project_classes(s: &Tensor3, space: &QHSpace, tol: f64) -> Result<ClassDecomposition> {
    require_v(s, space, tol)?;
    Ok(project_unchecked(s, space))
}

/// The projection pipeline without the membership test.
pub fn project_unchecked(s: &Tensor3, space: &QHSpace) -> ClassDecomposition {
    let t = twist_average(s, space);
    let theta = s - &t;
    let pi = contract_pi(&theta, space);
    let theta1 = pi
        .iter()
        .zip(space.js())
        .fold(Covector::zeros(space.n()), |acc, (p, j)| &acc + &p.compose(j))
        .scale(-1.0 / 6.0);
    let s1 = qk1_tensor(space, &theta1);
    let s2 = &theta - &s1;
    let (theta3, s3, s4, s5) = hat_parts(&t, space);
    let parts = [s1, s2, s3, s4, s5];
    let norms = [0, 1, 2, 3, 4].map(|i| parts[i].norm());
    ClassDecomposition { parts, norms, pi, theta1, theta3 }
}

/// Parameters for [`build_class_element`].
#[derive(Clone, Debug)]
pub enum ClassParams {
    /// `θ` for `𝒬𝒦1` and `𝒬𝒦3`.
    Theta(Covector),
    /// `(θ¹, θ², θ³)` for `𝒬𝒦2`.
    Thetas([Covector; 3]),
    /// Any tensor antisymmetric in the last two slots, for `𝒬𝒦4` and `𝒬𝒦5`.
    Seed(Tensor3),
}

pub fn build_class_element(class: QkClass, params: &ClassParams, space: &QHSpace) -> Result<Tensor3> {
    let degenerate = || QksError::InvalidParameter(format!("degenerate parameters for class {}", class.index()));
    match (class, params) {
        (QkClass::One | QkClass::Three, ClassParams::Theta(theta)) => {
            if theta.norm() == 0.0 {
                return Err(degenerate());
            }
            Ok(if class == QkClass::One { qk1_tensor(space, theta) } else { t_theta(space, theta) })
        }
        (QkClass::Two, ClassParams::Thetas(thetas)) => qk2_tensor(space, thetas).map_err(|_| degenerate()),
        (QkClass::Four | QkClass::Five, ClassParams::Seed(seed)) => {
            let t = twist_average(&seed.antisymmetrized(), space);
            let (_, _, s4, s5) = hat_parts(&t, space);
            let out = if class == QkClass::Four { s4 } else { s5 };
            if out.norm() <= 1e-12 * seed.norm() || seed.norm() == 0.0 {
                return Err(degenerate());
            }
            Ok(out)
        }
        _ => Err(QksError::InvalidParameter(format!("parameters do not match class {}", class.index()))),
    }
}

/// Label: the classes whose part exceeds `threshold · ‖S‖`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassLabel {
    pub classes: Vec<QkClass>,
    pub relative_norms: [f64; 5],
}

impl ClassLabel {
    pub fn indices(&self) -> Vec<usize> {
        self.classes.iter().map(|c| c.index()).collect()
    }
}

pub fn label_of(dec: &ClassDecomposition, threshold: f64) -> ClassLabel {
    let total = dec.norms.iter().map(|v| v * v).sum::<f64>().sqrt();
    let relative_norms = dec.norms.map(|v| if total > 0.0 { v / total } else { 0.0 });
    let classes = QkClass::ALL.into_iter().filter(|c| relative_norms[c.index() - 1] > threshold).collect();
    ClassLabel { classes, relative_norms }
}

pub fn classify(s: &Tensor3, space: &QHSpace, threshold: f64) -> Result<ClassLabel> {
    Ok(label_of(&project_classes(s, space, MEMBERSHIP_TOL)?, threshold))
}

/// `max_i ‖P_i(A S) − A P_i(S)‖ / ‖S‖`.
pub fn equivariance_check(s: &Tensor3, a: &GroupElement, space: &QHSpace) -> Result<f64> {
    if a.n() != space.n() {
        return Err(QksError::DimensionMismatch { expected: space.n(), got: a.n() });
    }
    let norm = s.norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let ar = a.to_real();
    let before = project_classes(s, space, MEMBERSHIP_TOL)?;
    let after = project_classes(&act_real(&ar, s), space, MEMBERSHIP_TOL)?;
    Ok((0..5)
        .map(|i| (&after.parts[i] - &act_real(&ar, &before.parts[i])).norm() / norm)
        .fold(0.0, f64::max))
}

/// Random element of `𝒱̂` with entries of unit scale.
pub fn random_hat<R: Rng + ?Sized>(space: &QHSpace, rng: &mut R) -> Tensor3 {
    twist_average(&Tensor3::random_antisymmetric(space.n(), rng), space)
}

/// Random element of `𝒱`: a random `Θ` plus a random `𝒱̂` tensor.
pub fn random_in_v<R: Rng + ?Sized>(space: &QHSpace, rng: &mut R) -> Tensor3 {
    let pi = [0, 1, 2].map(|_| Covector::random(space.n(), rng));
    &theta_from_pi(space, &pi) + &random_hat(space, rng)
}

/// `dim 𝒱 = 4n(3 + n(2n+1))`.
pub fn dim_v(n: usize) -> usize {
    4 * n * (3 + n * (2 * n + 1))
}

/// Closed forms `(4n, 8n, 4n, (16/3)n(n²−1), (4/3)n(n+1)(2n+1))`.
pub fn formula_dims(n: usize) -> [usize; 5] {
    [4 * n, 8 * n, 4 * n, 16 * n * (n * n - 1) / 3, 4 * n * (n + 1) * (2 * n + 1) / 3]
}

/// Spanning set of `𝒱`: `Θ` for each basis form `π^a = eᵏ`, plus the
/// `𝒱̂`-averages of `e_x ⊗ (e_y ∧ e_z)`.
pub fn v_spanning_set(space: &QHSpace) -> Vec<Tensor3> {
    let n = space.n();
    let d = space.dim();
    let mut out = Vec::new();
    for a in 0..3 {
        for k in 0..d {
            let mut pi = [Covector::zeros(n), Covector::zeros(n), Covector::zeros(n)];
            pi[a] = Covector::basis(n, k);
            out.push(theta_from_pi(space, &pi));
        }
    }
    let triples: Vec<(usize, usize, usize)> =
        (0..d).flat_map(|x| (0..d).flat_map(move |y| (y + 1..d).map(move |z| (x, y, z)))).collect();
    out.extend(batch::map(&triples, |&(x, y, z)| {
        let mut e = Tensor3::zeros(n);
        e.set(x, y, z, 1.0);
        e.set(x, z, y, -1.0);
        twist_average(&e, space)
    }));
    out
}

/// Numerical rank of a set of tensors, via singular values relative to the largest.
pub fn tensor_rank(tensors: &[Tensor3]) -> usize {
    if tensors.is_empty() {
        return 0;
    }
    let rows = tensors[0].data().len();
    let m = DMatrix::from_fn(rows, tensors.len(), |r, c| tensors[c].data()[r]);
    // The SVD of tall sparse matrices can stall in nalgebra; the square R factor has the same singular values.
    let m = if rows > tensors.len() { m.qr().r() } else { m };
    let sv = m.singular_values();
    let max = sv.max();
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&v| v > RANK_TOL * max).count()
}

/// Ranks of the five projectors on [`v_spanning_set`].
pub fn class_ranks(n: usize) -> Result<[usize; 5]> {
    let space = make_qh_space(n)?;
    let span = v_spanning_set(&space);
    let decs = batch::map(&span, |s| project_unchecked(s, &space));
    let per_class: Vec<Vec<Tensor3>> =
        (0..5).map(|i| decs.iter().map(|d| d.parts[i].clone()).collect()).collect();
    let ranks = batch::map(&per_class, |ts| tensor_rank(ts));
    Ok([ranks[0], ranks[1], ranks[2], ranks[3], ranks[4]])
}

/// Computed ranks against the closed forms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DimReport {
    pub n: usize,
    pub computed: [usize; 5],
    pub formula: [usize; 5],
    pub dim_v: usize,
}

/// Ranks and closed forms; any disagreement is an error.
pub fn class_dims(n: usize) -> Result<DimReport> {
    if n < 2 {
        return Err(QksError::InvalidParameter("class_dims needs n >= 2".into()));
    }
    let computed = class_ranks(n)?;
    let formula = formula_dims(n);
    for i in 0..5 {
        if computed[i] != formula[i] {
            return Err(QksError::DimensionCheck { class: i + 1, computed: computed[i], formula: formula[i] });
        }
    }
    let total: usize = computed.iter().sum();
    if total != dim_v(n) {
        return Err(QksError::DimensionCheck { class: 0, computed: total, formula: dim_v(n) });
    }
    Ok(DimReport { n, computed, formula, dim_v: dim_v(n) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quaternion::seeded_rng;
    use crate::tensor3::{cyclic_sum, j_twist};

    fn setup() -> (QHSpace, rand_chacha::ChaCha8Rng) {
        (make_qh_space(2).unwrap(), seeded_rng(17))
    }

    #[test]
    fn theta_round_trip() {
        let (space, mut rng) = setup();
        let pi = [0, 1, 2].map(|_| Covector::random(2, &mut rng));
        let th = theta_from_pi(&space, &pi);
        let m = is_in_v(&th, &space).unwrap();
        assert!(m.relative < 1e-12);
        let back = extract_pi(&th, &space, 1e-10).unwrap();
        for a in 0..3 {
            assert!((&back[a] - &pi[a]).norm() < 1e-13);
            assert!((&m.pi[a] - &pi[a]).norm() < 1e-11);
        }
        // Twist average kills Θ.
        assert!(twist_average(&th, &space).norm() < 1e-13);
        // c₁₂(Θ) = −½ Σ π^a∘J_a.
        let expect = pi.iter().zip(space.js()).fold(Covector::zeros(2), |acc, (p, j)| &acc + &p.compose(j)).scale(-0.5);
        assert!((&c12(&th) - &expect).norm() < 1e-13);
    }

    #[test]
    fn zero_tensor() {
        let (space, _) = setup();
        let z = Tensor3::zeros(2);
        let m = is_in_v(&z, &space).unwrap();
        assert_eq!((m.residual, m.relative), (0.0, 0.0));
        let dec = project_classes(&z, &space, 1e-10).unwrap();
        assert!(dec.norms.iter().all(|&v| v == 0.0));
        assert!(classify(&z, &space, PRESENCE_THRESHOLD).unwrap().classes.is_empty());
        assert!(extract_pi(&z, &space, 1e-10).unwrap().iter().all(|p| p.norm() == 0.0));
    }

    #[test]
    fn generic_tensor_is_outside() {
        let (space, mut rng) = setup();
        let t = Tensor3::random_antisymmetric(2, &mut rng);
        assert!(is_in_v(&t, &space).unwrap().relative > 0.1);
        assert!(project_classes(&t, &space, 1e-10).is_err());
    }

    #[test]
    fn split_is_orthogonal() {
        let (space, mut rng) = setup();
        let s = random_in_v(&space, &mut rng);
        let (th, t) = theta_split(&s, &space, 1e-10).unwrap();
        assert!(inner(&th, &t).unwrap().abs() < 1e-12 * s.norm().powi(2));
        let hat = random_hat(&space, &mut rng);
        let (th2, t2) = theta_split(&hat, &space, 1e-10).unwrap();
        assert!(th2.norm() < 1e-13 && (&t2 - &hat).norm() < 1e-13);
    }

    #[test]
    fn t_theta_properties() {
        let (space, mut rng) = setup();
        let theta = Covector::random(2, &mut rng);
        let t = t_theta(&space, &theta);
        assert!(t.antisymmetry_residual() < 1e-14);
        for a in 0..3 {
            assert!((&j_twist(&t, &space, a) - &t).norm() < 1e-13);
        }
        assert!((&c12(&t) - &theta.scale(10.0)).norm() < 1e-13);
        let lt = l_op_unchecked(&t, &space);
        assert!((&lt - &t.scale(2.0)).norm() < 1e-12);
    }

    #[test]
    fn decomposition_invariants() {
        let (space, mut rng) = setup();
        let s = random_in_v(&space, &mut rng);
        let dec = project_classes(&s, &space, 1e-10).unwrap();
        assert!(dec.reconstruction_residual(&s) < 1e-13);
        assert!(dec.orthogonality_residual() < 1e-12);
        assert!(cyclic_sum(&dec.parts[4]).norm() < 1e-11 * s.norm());
        assert!(c12(&dec.parts[3]).norm() < 1e-11 * s.norm());
        assert!(c12(&dec.parts[4]).norm() < 1e-11 * s.norm());
        for (i, p) in dec.parts.iter().enumerate() {
            let again = project_classes(p, &space, 1e-10).unwrap();
            for j in 0..5 {
                let expect = if i == j { p.clone() } else { Tensor3::zeros(2) };
                assert!((&again.parts[j] - &expect).norm() < 1e-11 * s.norm(), "part {i} -> {j}");
            }
        }
    }

    #[test]
    fn class_builders() {
        let (space, mut rng) = setup();
        let e1 = Covector::basis(2, 0);
        let s1 = build_class_element(QkClass::One, &ClassParams::Theta(e1.clone()), &space).unwrap();
        let d1 = project_classes(&s1, &space, 1e-10).unwrap();
        assert!((&d1.theta1 - &e1).norm() < 1e-13);
        assert_eq!(label_of(&d1, 1e-6).indices(), vec![1]);
        let thetas = [0, 1, 2].map(|_| Covector::random(2, &mut rng));
        let s2 = build_class_element(QkClass::Two, &ClassParams::Thetas(thetas), &space).unwrap();
        let d2 = project_classes(&s2, &space, 1e-10).unwrap();
        assert_eq!(label_of(&d2, 1e-6).indices(), vec![2]);
        let sum: Covector = d2.pi.iter().zip(space.js()).fold(Covector::zeros(2), |acc, (p, j)| &acc + &p.compose(j));
        assert!(sum.norm() < 1e-11);
        let seed = Tensor3::random_antisymmetric(2, &mut rng);
        for (class, idx) in [(QkClass::Four, 4), (QkClass::Five, 5)] {
            let s = build_class_element(class, &ClassParams::Seed(seed.clone()), &space).unwrap();
            assert_eq!(classify(&s, &space, 1e-6).unwrap().indices(), vec![idx]);
        }
        assert!(build_class_element(QkClass::Four, &ClassParams::Theta(e1), &space).is_err());
        assert!(build_class_element(QkClass::Three, &ClassParams::Theta(Covector::zeros(2)), &space).is_err());
        // Forms of the type Σθ^a∘J_a = 0 removal: θ^a = J_a-images of one form are all removed.
        let w = Covector::random(2, &mut rng);
        let pure = [0, 1, 2].map(|a| Covector(space.j(a) * &w.0));
        assert!(build_class_element(QkClass::Two, &ClassParams::Thetas(pure), &space).is_err());
    }

    #[test]
    fn equivariance_identity() {
        let (space, mut rng) = setup();
        let s = random_in_v(&space, &mut rng);
        assert!(equivariance_check(&s, &GroupElement::identity(2), &space).unwrap() < 1e-15);
        let a = GroupElement::random(2, &mut rng);
        assert!(equivariance_check(&s, &a, &space).unwrap() < 1e-10);
    }

    #[test]
    fn dims_n2() {
        let r = class_dims(2).unwrap();
        assert_eq!(r.computed, [8, 16, 8, 32, 40]);
        assert_eq!(r.computed.iter().sum::<usize>(), 104);
        assert!(class_dims(1).is_err());
    }
}
