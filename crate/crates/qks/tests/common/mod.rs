//! Brute-force reference for the five-class split of `𝒱`, written without the
//! library's tensor algebra. Every class is cut out of `ℝ^{(4n)^3}` by its
//! defining equations and turned into an explicit orthogonal projector.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use qks::tensor3::Tensor3;
use rand::Rng;
use rand_distr::StandardNormal;

const NULL_TOL: f64 = 1e-9;

fn hamilton(p: [f64; 4], q: [f64; 4]) -> [f64; 4] {
    let [a1, b1, c1, d1] = p;
    let [a2, b2, c2, d2] = q;
    [
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    ]
}

/// `J_a v = −v·a` on each quaternion slot, for a = i, j, k.
pub fn complex_structures(n: usize) -> [DMatrix<f64>; 3] {
    let d = 4 * n;
    std::array::from_fn(|a| {
        let mut unit = [0.0; 4];
        unit[a + 1] = 1.0;
        let mut m = DMatrix::zeros(d, d);
        for col in 0..d {
            let mut v = [0.0; 4];
            v[col % 4] = 1.0;
            let w = hamilton(v, unit);
            let base = col - col % 4;
            for k in 0..4 {
                m[(base + k, col)] = -w[k];
            }
        }
        m
    })
}

/// Orthonormal basis for the kernel of `m`.
pub fn null_space(m: &DMatrix<f64>) -> DMatrix<f64> {
    let gram = m.transpose() * m;
    let scale = gram.amax().max(1.0);
    let eig = SymmetricEigen::new(gram);
    let cols: Vec<DVector<f64>> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i].abs() < NULL_TOL * scale)
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(m.ncols(), 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Orthonormal basis for the column span of `m` (modified Gram–Schmidt, two passes).
pub fn orthonormal_span(m: &DMatrix<f64>) -> DMatrix<f64> {
    let scale = m.column_iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
    let mut out: Vec<DVector<f64>> = Vec::new();
    for col in m.column_iter() {
        let mut v = col.into_owned();
        for _ in 0..2 {
            for q in &out {
                let c = q.dot(&v);
                v.axpy(-c, q, 1.0);
            }
        }
        let nv = v.norm();
        if nv > 1e-8 * scale {
            out.push(v / nv);
        }
    }
    if out.is_empty() {
        DMatrix::zeros(m.nrows(), 0)
    } else {
        DMatrix::from_columns(&out)
    }
}

pub struct Oracle {
    pub n: usize,
    pub d: usize,
    pub js: [DMatrix<f64>; 3],
    /// Orthonormal bases of QK1..QK5 as columns in `ℝ^{d^3}`.
    pub bases: [DMatrix<f64>; 5],
    /// Orthonormal basis of the Sp(n)-part `𝒱̂`.
    pub hat: DMatrix<f64>,
}

impl Oracle {
    pub fn new(n: usize) -> Self {
        let d = 4 * n;
        let js = complex_structures(n);
        let big = d * d * d;
        let idx = |x: usize, y: usize, z: usize| (x * d + y) * d + z;

        // ⟨J_a Y, Z⟩ for basis vectors.
        let w = |a: usize, y: usize, z: usize| js[a][(z, y)];

        // Θ-type tensors θ^a(X)⟨J_aY,Z⟩, coefficient vector (a, p) ↦ θ^a_p.
        let theta_tensor = |coef: &DVector<f64>| -> DVector<f64> {
            let mut t = DVector::zeros(big);
            for x in 0..d {
                for y in 0..d {
                    for z in 0..d {
                        t[idx(x, y, z)] = (0..3).map(|a| coef[a * d + x] * w(a, y, z)).sum();
                    }
                }
            }
            t
        };

        // QK1: θ^a = θ∘J_a.
        let qk1: Vec<DVector<f64>> = (0..d)
            .map(|p| {
                let mut coef = DVector::zeros(3 * d);
                for a in 0..3 {
                    for x in 0..d {
                        coef[a * d + x] = js[a][(p, x)];
                    }
                }
                theta_tensor(&coef)
            })
            .collect();

        // QK2: Σ_a θ^a∘J_a = 0.
        let mut cons = DMatrix::zeros(d, 3 * d);
        for a in 0..3 {
            for x in 0..d {
                for p in 0..d {
                    cons[(x, a * d + p)] += js[a][(p, x)];
                }
            }
        }
        let qk2_coef = null_space(&cons);
        let qk2: Vec<DVector<f64>> = qk2_coef.column_iter().map(|c| theta_tensor(&c.into_owned())).collect();

        // 𝒱̂: antisymmetric in the last two slots and fixed by every twist.
        let mut gram = DMatrix::<f64>::zeros(big, big);
        let mut add_row = |entries: &[(usize, f64)]| {
            for &(i, vi) in entries {
                for &(j, vj) in entries {
                    gram[(i, j)] += vi * vj;
                }
            }
        };
        for x in 0..d {
            for y in 0..d {
                for z in 0..d {
                    add_row(&[(idx(x, y, z), 1.0), (idx(x, z, y), 1.0)]);
                    for a in 0..3 {
                        // S_{X J_aY J_aZ} − S_{XYZ}
                        let mut e = vec![(idx(x, y, z), -1.0)];
                        for s in 0..d {
                            for t in 0..d {
                                let c = js[a][(s, y)] * js[a][(t, z)];
                                if c != 0.0 {
                                    e.push((idx(x, s, t), c));
                                }
                            }
                        }
                        add_row(&e);
                    }
                }
            }
        }
        let eig = SymmetricEigen::new(gram);
        let hat_cols: Vec<DVector<f64>> = (0..big)
            .filter(|&i| eig.eigenvalues[i].abs() < NULL_TOL)
            .map(|i| eig.eigenvectors.column(i).into_owned())
            .collect();
        let hat = DMatrix::from_columns(&hat_cols);

        // QK3 straight from its defining formula.
        let qk3: Vec<DVector<f64>> = (0..d)
            .map(|p| {
                let theta = |v: usize| if v == p { 1.0 } else { 0.0 };
                let theta_j = |a: usize, v: usize| js[a][(p, v)];
                let mut t = DVector::zeros(big);
                for x in 0..d {
                    for y in 0..d {
                        for z in 0..d {
                            let mut v = 0.0;
                            if x == y {
                                v += theta(z);
                            }
                            if x == z {
                                v -= theta(y);
                            }
                            for a in 0..3 {
                                v += js[a][(x, y)] * theta_j(a, z) - js[a][(x, z)] * theta_j(a, y);
                            }
                            t[idx(x, y, z)] = v;
                        }
                    }
                }
                t
            })
            .collect();

        // Equations for QK4 and QK5, applied to the 𝒱̂ basis.
        let cyclic = |t: &DVector<f64>, x: usize, y: usize, z: usize| t[idx(x, y, z)] + t[idx(y, z, x)] + t[idx(z, x, y)];
        let twisted_cyclic = |t: &DVector<f64>, x: usize, y: usize, z: usize| -> f64 {
            // 𝔖_{X,J_aY,J_aZ} T summed over a
            let mut v = 0.0;
            for a in 0..3 {
                for s in 0..d {
                    for u in 0..d {
                        let c = js[a][(s, y)] * js[a][(u, z)];
                        if c != 0.0 {
                            v += c * cyclic(t, x, s, u);
                        }
                    }
                }
            }
            v
        };
        let h = hat.ncols();
        let mut qk4_eq = DMatrix::zeros(big + d, h);
        let mut qk5_eq = DMatrix::zeros(big, h);
        for (k, col) in hat.column_iter().enumerate() {
            let t = col.into_owned();
            for x in 0..d {
                for y in 0..d {
                    for z in 0..d {
                        let cyc = cyclic(&t, x, y, z);
                        qk4_eq[(idx(x, y, z), k)] = t[idx(x, y, z)] - (cyc + twisted_cyclic(&t, x, y, z)) / 6.0;
                        qk5_eq[(idx(x, y, z), k)] = cyc;
                    }
                }
            }
            for z in 0..d {
                qk4_eq[(big + z, k)] = (0..d).map(|r| t[idx(r, r, z)]).sum();
            }
        }
        let qk4 = &hat * null_space(&qk4_eq);
        let qk5 = &hat * null_space(&qk5_eq);

        let bases = [
            orthonormal_span(&DMatrix::from_columns(&qk1)),
            orthonormal_span(&DMatrix::from_columns(&qk2)),
            orthonormal_span(&DMatrix::from_columns(&qk3)),
            orthonormal_span(&qk4),
            orthonormal_span(&qk5),
        ];
        Self { n, d, js, bases, hat }
    }

    pub fn dims(&self) -> [usize; 5] {
        std::array::from_fn(|i| self.bases[i].ncols())
    }

    pub fn to_vec(&self, t: &Tensor3) -> DVector<f64> {
        let d = self.d;
        DVector::from_fn(d * d * d, |i, _| t.get(i / (d * d), (i / d) % d, i % d))
    }

    pub fn to_tensor(&self, v: &DVector<f64>) -> Tensor3 {
        let d = self.d;
        Tensor3::from_fn(self.n, |x, y, z| v[(x * d + y) * d + z])
    }

    pub fn project(&self, class: usize, t: &Tensor3) -> Tensor3 {
        let q = &self.bases[class];
        self.to_tensor(&(q * (q.transpose() * self.to_vec(t))))
    }

    /// Gaussian combination of all five oracle bases.
    pub fn random_member<R: Rng + ?Sized>(&self, rng: &mut R) -> Tensor3 {
        let mut v = DVector::zeros(self.d.pow(3));
        for q in &self.bases {
            let c = DVector::from_fn(q.ncols(), |_, _| rng.sample::<f64, _>(StandardNormal));
            v += q * c;
        }
        self.to_tensor(&v)
    }

    /// Largest `|⟨q_i, q_j⟩|` between different classes.
    pub fn cross_overlap(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..5 {
            for j in i + 1..5 {
                worst = worst.max((self.bases[i].transpose() * &self.bases[j]).amax());
            }
        }
        worst
    }
}
