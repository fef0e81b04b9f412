//! Complex dense helpers shared by every module.
//!
//! The Hermitian eigendecomposition here is the single spectral primitive:
//! square roots, pseudo-inverses, definiteness and range decisions all go
//! through [`hermitian_eigen`], directly or via [`singular`].

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Largest eigenvalue magnitude.
    pub fn spectral_radius(&self) -> f64 {
        self.min().abs().max(self.max().abs())
    }

    /// Rebuilds `V f(Λ) V*`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            for i in 0..n {
                scaled[(i, j)] *= w;
            }
        }
        &scaled * self.vectors.adjoint()
    }
}

/// Hermitian part `(m + m*)/2`, computed entrywise so the result is exactly Hermitian.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    debug_assert_eq!(n, m.ncols());
    let mut h = CMatrix::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = C64::new(m[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            h[(i, j)] = v;
            h[(j, i)] = v.conj();
        }
    }
    h
}

/// Eigendecomposition of the Hermitian part of `m`.
pub fn hermitian_eigen(m: &CMatrix) -> HermitianEigen {
    let n = m.nrows();
    if n == 0 {
        return HermitianEigen {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        };
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    HermitianEigen { values, vectors }
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut values: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Singular triplets `m = Σ σ_i u_i v_i*` with `σ_i > 0`, descending.
#[derive(Clone, Debug)]
pub struct Singular {
    pub values: Vec<f64>,
    pub u: CMatrix,
    pub v: CMatrix,
}

/// Singular triplets from the Hermitian eigensolver. A Hermitian `m` is
/// decomposed directly (`v_i = sign(λ_i) u_i`); otherwise the eigenvectors of
/// `[[0, m], [m*, 0]]` for positive eigenvalues are `(u_i, v_i)/√2`.
/// nalgebra's complex SVD loses about eight digits on some Gram matrices,
/// which is why it is not used here.
pub fn singular(m: &CMatrix) -> Singular {
    let (p, q) = m.shape();
    let scale = max_abs(m);
    if p == 0 || q == 0 || scale == 0.0 {
        return Singular {
            values: Vec::new(),
            u: CMatrix::zeros(p, 0),
            v: CMatrix::zeros(q, 0),
        };
    }
    let mut triplets: Vec<(f64, CVector, CVector)> = Vec::new();
    if p == q && max_abs_diff(m, &m.adjoint()) <= 1e-15 * scale {
        let eig = hermitian_eigen(m);
        for (j, &l) in eig.values.iter().enumerate() {
            if l != 0.0 {
                let u = eig.vectors.column(j).into_owned();
                let v = if l > 0.0 { u.clone() } else { -u.clone() };
                triplets.push((l.abs(), u, v));
            }
        }
    } else {
        let mut h = CMatrix::zeros(p + q, p + q);
        h.view_mut((0, p), (p, q)).copy_from(m);
        h.view_mut((p, 0), (q, p)).copy_from(&m.adjoint());
        let eig = hermitian_eigen(&h);
        let root2 = std::f64::consts::SQRT_2;
        for (j, &l) in eig.values.iter().enumerate() {
            if l > 0.0 {
                let w = eig.vectors.column(j);
                triplets.push((l, w.rows(0, p).scale(root2), w.rows(p, q).scale(root2)));
            }
        }
    }
    triplets.sort_by(|a, b| b.0.total_cmp(&a.0));
    let r = triplets.len();
    Singular {
        values: triplets.iter().map(|t| t.0).collect(),
        u: CMatrix::from_fn(p, r, |i, j| triplets[j].1[i]),
        v: CMatrix::from_fn(q, r, |i, j| triplets[j].2[i]),
    }
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    singular(m).values.first().copied().unwrap_or(0.0)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc: f64, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc: f64, (x, y)| acc.max((x - y).norm()))
}

pub fn vector_norm(v: &CVector) -> f64 {
    v.norm()
}

/// Kronecker product `a ⊗ I_d`.
pub(crate) fn kron_identity(a: &CMatrix, d: usize) -> CMatrix {
    a.kronecker(&CMatrix::identity(d, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::Sampler;

    fn rebuild(s: &Singular) -> CMatrix {
        let mut us = s.u.clone();
        for (j, &v) in s.values.iter().enumerate() {
            for i in 0..us.nrows() {
                us[(i, j)] *= v;
            }
        }
        &us * s.v.adjoint()
    }

    #[test]
    fn singular_rebuilds_rectangular_and_hermitian() {
        let mut rng = Sampler::new(1);
        let a = rng.matrix(7, 3) * rng.matrix(3, 5);
        let s = singular(&a);
        assert!(max_abs_diff(&rebuild(&s), &a) < 1e-12);
        let kept = s.values.iter().filter(|&&v| v > 1e-10 * s.values[0]).count();
        assert_eq!(kept, 3);
        let h = rng.psd_matrix(6, 4) - rng.psd_matrix(6, 1);
        let s = singular(&h);
        assert!(max_abs_diff(&rebuild(&s), &h) < 1e-12);
        assert!(max_abs_diff(&(s.u.adjoint() * &s.u), &CMatrix::identity(s.values.len(), s.values.len())) < 1e-12);
    }

    #[test]
    fn singular_is_accurate_on_gram_matrices() {
        // Block Gram matrices with repeated singular values, where a plain
        // complex SVD loses digits.
        let mut rng = Sampler::new(84);
        for _ in 0..20 {
            let w = rng.matrix(36, 24);
            let g = &w * w.adjoint();
            let s = singular(&g);
            let kept: Vec<usize> = (0..s.values.len()).filter(|&i| s.values[i] > 1e-9 * s.values[0]).collect();
            let u = CMatrix::from_fn(36, kept.len(), |i, j| s.u[(i, kept[j])]);
            let projected = &u * (u.adjoint() * &g);
            assert!(max_abs_diff(&projected, &g) < 1e-11 * max_abs(&g));
        }
    }

    #[test]
    fn spectral_norm_of_a_diagonal() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![C64::new(-3.0, 0.0), C64::new(2.0, 0.0)]));
        assert!((spectral_norm(&m) - 3.0).abs() < 1e-14);
    }
}
