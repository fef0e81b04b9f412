//! Spectral factorizations and the Douglas factorization `A = BC`.
//!
//! All rank decisions use the relative cutoff `rel_eps · σ_max` of the
//! shared [`Tolerance`].

use crate::algebra::{AlgebraShape, Tolerance};
use crate::dense::{self, CMatrix, CVector};
use crate::error::{Error, Result};

/// Which realization a side of a [`DenseOperator`] carries.
#[derive(Clone, Debug, PartialEq)]
pub enum Space {
    /// Plain `ℂ^n`.
    Coordinates(usize),
    /// The algebra itself, vectorized blockwise.
    Algebra(AlgebraShape),
    /// `copies` stacked copies of the dense realization of `A^rank`.
    Module {
        shape: AlgebraShape,
        rank: usize,
        copies: usize,
    },
    /// Orthonormal coordinates of a reproducing kernel module.
    Span(usize),
}

impl Space {
    pub fn dim(&self) -> usize {
        match self {
            Space::Coordinates(n) | Space::Span(n) => *n,
            Space::Algebra(shape) => shape.total_dim(),
            Space::Module { shape, rank, copies } => shape.total_dim() * rank * copies,
        }
    }
}

/// A complex matrix from `source` to `target`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    matrix: CMatrix,
    source: Space,
    target: Space,
}

impl DenseOperator {
    pub fn new(matrix: CMatrix, source: Space, target: Space) -> Result<Self> {
        if matrix.ncols() != source.dim() {
            return Err(Error::DimensionMismatch {
                context: "operator source",
                expected: source.dim(),
                found: matrix.ncols(),
            });
        }
        if matrix.nrows() != target.dim() {
            return Err(Error::DimensionMismatch {
                context: "operator target",
                expected: target.dim(),
                found: matrix.nrows(),
            });
        }
        Ok(DenseOperator { matrix, source, target })
    }

    /// A matrix between plain coordinate spaces.
    pub fn plain(matrix: CMatrix) -> Self {
        let (r, c) = matrix.shape();
        DenseOperator {
            matrix,
            source: Space::Coordinates(c),
            target: Space::Coordinates(r),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn source(&self) -> &Space {
        &self.source
    }

    pub fn target(&self) -> &Space {
        &self.target
    }

    pub fn adjoint(&self) -> Self {
        DenseOperator {
            matrix: self.matrix.adjoint(),
            source: self.target.clone(),
            target: self.source.clone(),
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.matrix.ncols() != other.matrix.nrows() {
            return Err(Error::DimensionMismatch {
                context: "operator composition",
                expected: self.matrix.ncols(),
                found: other.matrix.nrows(),
            });
        }
        Ok(DenseOperator {
            matrix: &self.matrix * &other.matrix,
            source: other.source.clone(),
            target: self.target.clone(),
        })
    }

    pub fn apply(&self, v: &CVector) -> Result<CVector> {
        if v.len() != self.matrix.ncols() {
            return Err(Error::DimensionMismatch {
                context: "operator argument",
                expected: self.matrix.ncols(),
                found: v.len(),
            });
        }
        Ok(&self.matrix * v)
    }

    pub fn norm(&self) -> f64 {
        dense::spectral_norm(&self.matrix)
    }
}

/// Thin SVD restricted to the numerical range: `B ≈ U_r Σ_r V_r*`.
struct RangeFactor {
    u: CMatrix,
    sigma: Vec<f64>,
    v: CMatrix,
    sigma_max: f64,
}

/// Keeps singular values above `rel · σ_max`.
fn range_factor(m: &CMatrix, rel: f64) -> RangeFactor {
    let (p, q) = m.shape();
    if p == 0 || q == 0 {
        return RangeFactor {
            u: CMatrix::zeros(p, 0),
            sigma: Vec::new(),
            v: CMatrix::zeros(q, 0),
            sigma_max: 0.0,
        };
    }
    let svd = dense::singular(m);
    let sigma_max = svd.values.first().copied().unwrap_or(0.0);
    let cutoff = rel * sigma_max;
    let keep: Vec<usize> = (0..svd.values.len()).filter(|&i| svd.values[i] > cutoff).collect();
    RangeFactor {
        u: CMatrix::from_fn(p, keep.len(), |i, j| svd.u[(i, keep[j])]),
        sigma: keep.iter().map(|&i| svd.values[i]).collect(),
        v: CMatrix::from_fn(q, keep.len(), |i, j| svd.v[(i, keep[j])]),
        sigma_max,
    }
}

/// Orthonormal basis of the numerical column space.
pub fn range_basis(m: &CMatrix, tol: &Tolerance) -> CMatrix {
    range_factor(m, tol.rel_eps).u
}

/// Numerical rank under the shared cutoff.
pub fn numerical_rank(m: &CMatrix, tol: &Tolerance) -> usize {
    range_factor(m, tol.rel_eps).sigma.len()
}

/// Hermitian positive square root with eigenvalues below `rel_eps · λ_max`
/// clipped to zero.
pub fn psd_sqrt(m: &DenseOperator, tol: &Tolerance) -> Result<DenseOperator> {
    let a = m.matrix();
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            context: "square root of a non-square matrix",
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    let defect = dense::max_abs_diff(a, &a.adjoint());
    if defect > tol.threshold(dense::max_abs(a)) {
        return Err(Error::NotHermitian { defect });
    }
    let eig = dense::hermitian_eigen(a);
    let scale = eig.spectral_radius();
    if eig.min() < -tol.threshold(scale) {
        return Err(Error::NotPositive {
            min_eigenvalue: eig.min(),
        });
    }
    let cutoff = tol.rel_eps * eig.max().max(0.0);
    let root = eig.map(|l| if l > cutoff { l.sqrt() } else { 0.0 });
    Ok(DenseOperator {
        matrix: root,
        source: m.source.clone(),
        target: m.target.clone(),
    })
}

/// Moore–Penrose pseudo-inverse, singular values below `rel_eps · σ_max`
/// treated as zero.
pub fn pseudo_inverse(m: &DenseOperator, tol: &Tolerance) -> DenseOperator {
    let f = range_factor(m.matrix(), tol.rel_eps);
    let mut vs = f.v.clone();
    for (j, s) in f.sigma.iter().enumerate() {
        for i in 0..vs.nrows() {
            vs[(i, j)] /= *s;
        }
    }
    DenseOperator {
        matrix: &vs * f.u.adjoint(),
        source: m.target.clone(),
        target: m.source.clone(),
    }
}

fn projection_residual(u: &CMatrix, v: &CVector) -> f64 {
    (v - u * (u.adjoint() * v)).norm()
}

/// `v ∈ ran(B)` up to `rel_eps · max(‖v‖, σ_max)`.
pub fn range_contains(b: &DenseOperator, v: &CVector, tol: &Tolerance) -> Result<bool> {
    Ok(range_test(b, v, tol)?.0)
}

/// Verdict and residual of [`range_contains`].
pub fn range_test(b: &DenseOperator, v: &CVector, tol: &Tolerance) -> Result<(bool, f64)> {
    if v.len() != b.matrix().nrows() {
        return Err(Error::DimensionMismatch {
            context: "range test vector",
            expected: b.matrix().nrows(),
            found: v.len(),
        });
    }
    let f = range_factor(b.matrix(), tol.rel_eps);
    let residual = projection_residual(&f.u, v);
    Ok((residual <= tol.threshold(v.norm().max(f.sigma_max)), residual))
}

/// Two-sided check that `λ_min` is the least `λ` with `AA* ⪯ λBB*`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DouglasCertificate {
    /// Smallest eigenvalue of the compression of `(λ_min + δ)BB* − AA*`.
    pub upper_min_eigenvalue: f64,
    /// Same at `λ_min (1 − 10⁻³)`; absent when `λ_min = 0`.
    pub lower_min_eigenvalue: Option<f64>,
    pub threshold: f64,
    pub certified: bool,
}

#[derive(Clone, Debug)]
pub struct DouglasSolution {
    pub c: DenseOperator,
    pub lambda_min: f64,
    pub residual: f64,
    pub certificate: DouglasCertificate,
}

/// Solves `A = BC` with `C = B⁺A`, the solution of least norm and the one
/// with `ran(C) ⊆ ker(B)^⊥`.
pub fn douglas_solve(a: &DenseOperator, b: &DenseOperator, tol: &Tolerance) -> Result<DouglasSolution> {
    if a.matrix().nrows() != b.matrix().nrows() {
        return Err(Error::DimensionMismatch {
            context: "Douglas factorization targets",
            expected: b.matrix().nrows(),
            found: a.matrix().nrows(),
        });
    }
    let f = range_factor(b.matrix(), tol.rel_eps);
    let am = a.matrix();
    let mut worst: Option<(usize, f64)> = None;
    for j in 0..am.ncols() {
        let col = am.column(j).into_owned();
        let r = projection_residual(&f.u, &col);
        if r > tol.threshold(col.norm().max(f.sigma_max)) && worst.is_none_or(|(_, w)| r > w) {
            worst = Some((j, r));
        }
    }
    if let Some((column, residual)) = worst {
        return Err(Error::RangeViolation { column, residual });
    }

    // C = V_r Σ_r⁻¹ U_r* A
    let ua = f.u.adjoint() * am;
    let mut scaled = ua.clone();
    for (i, s) in f.sigma.iter().enumerate() {
        for j in 0..scaled.ncols() {
            scaled[(i, j)] /= *s;
        }
    }
    let c = DenseOperator {
        matrix: &f.v * scaled,
        source: a.source.clone(),
        target: b.source.clone(),
    };
    let residual = dense::spectral_norm(&(b.matrix() * c.matrix() - am));
    let norm_c = c.norm();
    let lambda_min = norm_c * norm_c;

    // On ran(B): P(λ) = λ Σ_r² − U_r* A A* U_r.
    let aa = &ua * ua.adjoint();
    let compressed = |lambda: f64| {
        let mut p = -aa.clone();
        for (i, s) in f.sigma.iter().enumerate() {
            p[(i, i)] += lambda * s * s;
        }
        dense::hermitian_eigenvalues(&p).first().copied().unwrap_or(0.0)
    };
    let a_norm = dense::spectral_norm(am);
    let scale = (a_norm * a_norm).max(lambda_min * f.sigma_max * f.sigma_max);
    let threshold = tol.threshold(scale);
    let upper = compressed(lambda_min + tol.threshold(lambda_min));
    let lower = (lambda_min > 0.0).then(|| compressed(lambda_min * (1.0 - 1e-3)));
    let certified = upper >= -threshold && lower.is_none_or(|l| l < -threshold);
    Ok(DouglasSolution {
        c,
        lambda_min,
        residual,
        certificate: DouglasCertificate {
            upper_min_eigenvalue: upper,
            lower_min_eigenvalue: lower,
            threshold,
            certified,
        },
    })
}

/// If `AA* = λBB*` then `ran(A) = ran(B)`; checks the hypothesis and then
/// both inclusions on orthonormal bases of `ran(AA*)` and `ran(BB*)`.
pub fn range_equality(a: &DenseOperator, b: &DenseOperator, lambda: f64, tol: &Tolerance) -> Result<bool> {
    if !(lambda > 0.0) {
        return Err(Error::Precondition(format!("λ must be positive, got {lambda}")));
    }
    if a.matrix().nrows() != b.matrix().nrows() {
        return Err(Error::DimensionMismatch {
            context: "range equality targets",
            expected: a.matrix().nrows(),
            found: b.matrix().nrows(),
        });
    }
    let aa = a.matrix() * a.matrix().adjoint();
    let bb = b.matrix() * b.matrix().adjoint() * nalgebra::Complex::new(lambda, 0.0);
    let defect = dense::spectral_norm(&(&aa - &bb));
    let scale = dense::spectral_norm(&aa).max(dense::spectral_norm(&bb));
    if defect > tol.threshold(scale) {
        return Err(Error::Precondition(format!(
            "AA* − λBB* has norm {defect:e}"
        )));
    }
    let (qa, qb) = (range_basis(&aa, tol), range_basis(&bb, tol));
    if qa.ncols() != qb.ncols() {
        return Ok(false);
    }
    let inside = |q: &CMatrix, basis: &CMatrix| {
        (0..q.ncols()).all(|j| projection_residual(basis, &q.column(j).into_owned()) <= tol.threshold(1.0).sqrt())
    };
    Ok(inside(&qa, &qb) && inside(&qb, &qa))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::C64;
    use crate::random::Sampler;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn diag(v: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_iterator(v.len(), v.iter().map(|&x| C64::new(x, 0.0))))
    }

    /// Random `p×q` matrix of the given rank.
    fn low_rank(rng: &mut Sampler, p: usize, q: usize, r: usize) -> CMatrix {
        rng.matrix(p, r) * rng.matrix(r, q)
    }

    #[test]
    fn dense_operator_checks_dimensions() {
        assert!(DenseOperator::new(CMatrix::zeros(2, 3), Space::Coordinates(3), Space::Coordinates(2)).is_ok());
        assert!(DenseOperator::new(CMatrix::zeros(2, 3), Space::Coordinates(2), Space::Coordinates(2)).is_err());
        let shape = AlgebraShape::new(vec![2, 1]).unwrap();
        let m = Space::Module {
            shape: shape.clone(),
            rank: 2,
            copies: 3,
        };
        assert_eq!(m.dim(), 30);
        assert_eq!(Space::Algebra(shape).dim(), 5);
    }

    #[test]
    fn square_roots() {
        let id = DenseOperator::plain(CMatrix::identity(3, 3));
        assert!(dense::max_abs_diff(psd_sqrt(&id, &tol()).unwrap().matrix(), id.matrix()) < 1e-14);
        let d = DenseOperator::plain(diag(&[4.0, 0.0]));
        assert!(dense::max_abs_diff(psd_sqrt(&d, &tol()).unwrap().matrix(), &diag(&[2.0, 0.0])) < 1e-14);
        let mut rng = Sampler::new(41);
        let f = rng.matrix(6, 4);
        let g = f.adjoint() * &f;
        let r = psd_sqrt(&DenseOperator::plain(g.clone()), &tol()).unwrap();
        let sq = r.matrix() * r.matrix();
        assert!(dense::max_abs_diff(&sq, &g) <= 1e-8 * dense::max_abs(&g));
        let neg = DenseOperator::plain(diag(&[1.0, -1.0]));
        assert!(matches!(psd_sqrt(&neg, &tol()), Err(Error::NotPositive { .. })));
    }

    #[test]
    fn square_root_commutes_with_unitaries() {
        let mut rng = Sampler::new(42);
        let g = rng.psd_matrix(5, 3);
        let u = rng.unitary(5);
        let conj = &u * &g * u.adjoint();
        let lhs = psd_sqrt(&DenseOperator::plain(conj), &tol()).unwrap();
        let rhs = &u * psd_sqrt(&DenseOperator::plain(g), &tol()).unwrap().matrix() * u.adjoint();
        assert!(dense::max_abs_diff(lhs.matrix(), &rhs) < 1e-7);
    }

    #[test]
    fn penrose_identities() {
        let mut rng = Sampler::new(43);
        for (p, q, r) in [(5, 4, 2), (3, 6, 3), (4, 4, 4), (6, 6, 1)] {
            let m = low_rank(&mut rng, p, q, r);
            let x = pseudo_inverse(&DenseOperator::plain(m.clone()), &tol()).into_matrix();
            let scale = dense::max_abs(&m).max(1.0);
            assert!(dense::max_abs_diff(&(&m * &x * &m), &m) < 1e-9 * scale);
            assert!(dense::max_abs_diff(&(&x * &m * &x), &x) < 1e-9 * dense::max_abs(&x).max(1.0) * scale);
            let mx = &m * &x;
            assert!(dense::max_abs_diff(&mx, &mx.adjoint()) < 1e-9);
            let xm = &x * &m;
            assert!(dense::max_abs_diff(&xm, &xm.adjoint()) < 1e-9);
        }
        let id = pseudo_inverse(&DenseOperator::plain(CMatrix::identity(3, 3)), &tol());
        assert!(dense::max_abs_diff(id.matrix(), &CMatrix::identity(3, 3)) < 1e-14);
        let z = pseudo_inverse(&DenseOperator::plain(CMatrix::zeros(2, 3)), &tol());
        assert_eq!(z.matrix().shape(), (3, 2));
        assert_eq!(dense::max_abs(z.matrix()), 0.0);
    }

    #[test]
    fn range_membership() {
        let mut rng = Sampler::new(44);
        let b = DenseOperator::plain(low_rank(&mut rng, 6, 5, 3));
        let w = CVector::from_fn(5, |_, _| rng.complex());
        assert!(range_contains(&b, &(b.matrix() * &w), &tol()).unwrap());
        assert!(range_contains(&b, &CVector::zeros(6), &tol()).unwrap());
        // Orthogonal complement of the range: kernel of B*.
        let basis = range_basis(b.matrix(), &tol());
        let v = CVector::from_fn(6, |_, _| rng.complex());
        let perp = &v - &basis * (basis.adjoint() * &v);
        assert!((b.matrix().adjoint() * &perp).norm() < 1e-10);
        assert!(!range_contains(&b, &perp, &tol()).unwrap());
        assert!(range_contains(&b, &CVector::zeros(5), &tol()).is_err());
    }

    #[test]
    fn douglas_identity_and_projection() {
        let mut rng = Sampler::new(45);
        let a = DenseOperator::plain(rng.matrix(4, 3));
        let sol = douglas_solve(&a, &DenseOperator::plain(CMatrix::identity(4, 4)), &tol()).unwrap();
        assert!(dense::max_abs_diff(sol.c.matrix(), a.matrix()) < 1e-12);
        assert!((sol.lambda_min - a.norm().powi(2)).abs() < 1e-10 * sol.lambda_min);
        assert!(sol.certificate.certified);

        let b = DenseOperator::plain(low_rank(&mut rng, 5, 4, 2));
        let sol = douglas_solve(&b, &b, &tol()).unwrap();
        let proj = pseudo_inverse(&b, &tol()).matrix() * b.matrix();
        assert!(dense::max_abs_diff(sol.c.matrix(), &proj) < 1e-10);
        assert!((sol.lambda_min - 1.0).abs() < 1e-10);
        assert!(sol.certificate.certified);
    }

    #[test]
    fn douglas_recovers_the_least_solution() {
        let mut rng = Sampler::new(46);
        for _ in 0..20 {
            let b = DenseOperator::plain(low_rank(&mut rng, 6, 5, 3));
            let x = rng.matrix(5, 2);
            let c0 = pseudo_inverse(&b, &tol()).matrix() * b.matrix() * &x;
            let a = DenseOperator::plain(b.matrix() * &c0);
            let sol = douglas_solve(&a, &b, &tol()).unwrap();
            assert!(sol.residual <= 1e-9 * a.norm().max(1.0));
            assert!(sol.c.norm() <= dense::spectral_norm(&c0) + 1e-9);
            // Any other solution C + N with BN = 0 is at least as large.
            let null = CMatrix::identity(5, 5) - pseudo_inverse(&b, &tol()).matrix() * b.matrix();
            let other = sol.c.matrix() + &null * rng.matrix(5, 2);
            assert!(dense::max_abs_diff(&(b.matrix() * &other), a.matrix()) < 1e-9);
            assert!(dense::spectral_norm(&other) >= sol.c.norm() - 1e-9);
            assert!(sol.certificate.certified);
        }
    }

    #[test]
    fn douglas_rejects_range_violations() {
        let mut rng = Sampler::new(47);
        let b = DenseOperator::plain(low_rank(&mut rng, 5, 3, 2));
        let a = DenseOperator::plain(rng.matrix(5, 2));
        assert!(matches!(douglas_solve(&a, &b, &tol()), Err(Error::RangeViolation { .. })));
    }

    #[test]
    fn range_equality_cases() {
        let mut rng = Sampler::new(48);
        let b = DenseOperator::plain(rng.matrix(4, 3));
        assert!(range_equality(&b, &b, 1.0, &tol()).unwrap());
        let two_b = DenseOperator::plain(b.matrix() * C64::new(2.0, 0.0));
        assert!(range_equality(&two_b, &b, 4.0, &tol()).unwrap());
        let f = low_rank(&mut rng, 5, 5, 3);
        let lambda: f64 = 2.5;
        let a = DenseOperator::plain(&f * rng.unitary(5));
        let b = DenseOperator::plain(&f * rng.unitary(5) * C64::new(1.0 / lambda.sqrt(), 0.0));
        assert!(range_equality(&a, &b, lambda, &tol()).unwrap());
        assert!(range_equality(&a, &b, 1.0, &tol()).is_err());
    }
}
