//! The reproducing kernel Hilbert module of a positive definite kernel sample.
//!
//! Elements are finite sums `f = Σ K_{x_p,s_p}·a_p` with
//! `K_{x,s}(t) = K(s,t)x`. Everything about the span's geometry goes through
//! the assembled Gram matrix `G = U Λ U*`: the coefficient vector `c` of `f`
//! (with `c_s = Σ_{s_p = s} x_p a_p`) has orthonormal coordinates
//! `z = Λ^{1/2} U* c`, and `tr⟨f, g⟩ = z_f* z_g`.

use std::sync::{Arc, OnceLock};

use crate::algebra::{AlgebraElement, Tolerance};
use crate::dense::{self, CMatrix, CVector, C64};
use crate::error::{Error, Result};
use crate::factorization::{DenseOperator, Space};
use crate::kernel::{KernelSample, PointFamily};
use crate::module::{ModuleElement, ModuleOperator};

/// One summand `K_{x,s}·a`.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub x: ModuleElement,
    pub point: usize,
    pub a: AlgebraElement,
}

/// `Σ K_{x_p,s_p}·a_p` over a fixed kernel sample.
#[derive(Clone, Debug)]
pub struct RkhmElement {
    kernel: Arc<KernelSample>,
    terms: Vec<Term>,
}

impl RkhmElement {
    pub fn zero(kernel: &Arc<KernelSample>) -> Self {
        RkhmElement {
            kernel: Arc::clone(kernel),
            terms: Vec::new(),
        }
    }

    /// `K_{x,s}`.
    pub fn generator(kernel: &Arc<KernelSample>, x: &ModuleElement, s: &str) -> Result<Self> {
        let point = kernel.index_of(s)?;
        Self::check_vector(kernel, x)?;
        Ok(RkhmElement {
            kernel: Arc::clone(kernel),
            terms: vec![Term {
                x: x.clone(),
                point,
                a: AlgebraElement::identity(kernel.shape()),
            }],
        })
    }

    pub fn from_terms(kernel: &Arc<KernelSample>, terms: Vec<Term>) -> Result<Self> {
        for t in &terms {
            Self::check_vector(kernel, &t.x)?;
            kernel.shape().check_same(t.a.shape())?;
            if t.point >= kernel.len() {
                return Err(Error::UnknownPoint(format!("#{}", t.point)));
            }
        }
        Ok(RkhmElement {
            kernel: Arc::clone(kernel),
            terms,
        })
    }

    /// `Σ_s K_{c_s, s}` for coefficients aligned with the kernel's points.
    pub fn from_coefficients(kernel: &Arc<KernelSample>, coeffs: &[ModuleElement]) -> Result<Self> {
        if coeffs.len() != kernel.len() {
            return Err(Error::DimensionMismatch {
                context: "coefficient count",
                expected: kernel.len(),
                found: coeffs.len(),
            });
        }
        let one = AlgebraElement::identity(kernel.shape());
        let terms = coeffs
            .iter()
            .enumerate()
            .map(|(point, x)| Term {
                x: x.clone(),
                point,
                a: one.clone(),
            })
            .collect();
        Self::from_terms(kernel, terms)
    }

    fn check_vector(kernel: &KernelSample, x: &ModuleElement) -> Result<()> {
        kernel.shape().check_same(x.shape())?;
        if x.rank() != kernel.rank() {
            return Err(Error::DimensionMismatch {
                context: "module rank of a generator",
                expected: kernel.rank(),
                found: x.rank(),
            });
        }
        Ok(())
    }

    pub fn kernel(&self) -> &Arc<KernelSample> {
        &self.kernel
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    fn check_same_kernel(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.kernel, &other.kernel) || self.kernel == other.kernel {
            Ok(())
        } else {
            Err(Error::KernelMismatch)
        }
    }

    /// `f(t) = Σ K(s_p, t) x_p a_p`.
    pub fn evaluate(&self, t: &str) -> Result<ModuleElement> {
        Ok(self.evaluate_at(self.kernel.index_of(t)?))
    }

    pub(crate) fn evaluate_at(&self, t: usize) -> ModuleElement {
        let mut acc = ModuleElement::zeros(self.kernel.shape(), self.kernel.rank());
        for term in &self.terms {
            let v = self
                .kernel
                .op(term.point, t)
                .apply_unchecked(&term.x)
                .right_mul(&term.a)
                .expect("validated shapes");
            acc = acc.checked_add(&v).expect("validated shapes");
        }
        acc
    }

    /// `⟨f, g⟩ = Σ a_p* ⟨K(s_p, t_q) x_p, y_q⟩ b_q`.
    pub fn inner(&self, other: &Self) -> Result<AlgebraElement> {
        self.check_same_kernel(other)?;
        let mut acc = AlgebraElement::zeros(self.kernel.shape());
        for p in &self.terms {
            for q in &other.terms {
                let kx = self.kernel.op(p.point, q.point).apply_unchecked(&p.x);
                let v = &(&p.a.adjoint() * &kx.inner_unchecked(&q.x)) * &q.a;
                acc = &acc + &v;
            }
        }
        Ok(acc)
    }

    /// `‖f‖ = ‖⟨f, f⟩‖^{1/2}`.
    pub fn norm(&self) -> f64 {
        self.inner(self).expect("same kernel").norm().sqrt()
    }

    /// `c_s = Σ_{s_p = s} x_p a_p`.
    pub fn coefficients(&self) -> Vec<ModuleElement> {
        let mut c = vec![ModuleElement::zeros(self.kernel.shape(), self.kernel.rank()); self.kernel.len()];
        for t in &self.terms {
            let v = t.x.right_mul(&t.a).expect("validated shapes");
            c[t.point] = c[t.point].checked_add(&v).expect("validated shapes");
        }
        c
    }

    pub fn coefficient_vector(&self) -> CVector {
        let d = self.kernel.module_dim();
        let mut v = CVector::zeros(self.kernel.len() * d);
        for (i, c) in self.coefficients().iter().enumerate() {
            v.rows_mut(i * d, d).copy_from(&c.vectorize());
        }
        v
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_same_kernel(other)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(RkhmElement {
            kernel: Arc::clone(&self.kernel),
            terms,
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Right module action `f·a`.
    pub fn right_mul(&self, a: &AlgebraElement) -> Result<Self> {
        self.kernel.shape().check_same(a.shape())?;
        Ok(self.map_coefficients(|t| &t.a * a))
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map_coefficients(|t| t.a.scale(c))
    }

    fn map_coefficients(&self, f: impl Fn(&Term) -> AlgebraElement) -> Self {
        RkhmElement {
            kernel: Arc::clone(&self.kernel),
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    x: t.x.clone(),
                    point: t.point,
                    a: f(t),
                })
                .collect(),
        }
    }
}

/// `U_r Λ_r^{1/2}` (the stacked evaluation map) and `U_r Λ_r^{-1/2}`.
#[derive(Debug)]
struct GramFactor {
    evaluation: CMatrix,
    synthesis: CMatrix,
}

/// The reproducing kernel module of a positive definite kernel sample,
/// with a lazily computed factorization of its Gram matrix.
#[derive(Debug)]
pub struct Rkhm {
    kernel: Arc<KernelSample>,
    tol: Tolerance,
    factor: OnceLock<GramFactor>,
}

impl Rkhm {
    pub fn new(kernel: KernelSample, tol: Tolerance) -> Result<Self> {
        Self::from_arc(Arc::new(kernel), tol)
    }

    pub fn from_arc(kernel: Arc<KernelSample>, tol: Tolerance) -> Result<Self> {
        let report = kernel.positive_definiteness(&tol);
        if !report.verdict {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: report.extremal_eigenvalue,
            });
        }
        Ok(Rkhm {
            kernel,
            tol,
            factor: OnceLock::new(),
        })
    }

    pub fn kernel(&self) -> &Arc<KernelSample> {
        &self.kernel
    }

    pub fn tolerance(&self) -> &Tolerance {
        &self.tol
    }

    pub fn zero(&self) -> RkhmElement {
        RkhmElement::zero(&self.kernel)
    }

    pub fn generator(&self, x: &ModuleElement, s: &str) -> Result<RkhmElement> {
        RkhmElement::generator(&self.kernel, x, s)
    }

    fn factor(&self) -> &GramFactor {
        self.factor.get_or_init(|| {
            let eig = dense::hermitian_eigen(&self.kernel.assembled());
            let cutoff = self.tol.rel_eps * eig.max().max(0.0);
            let keep: Vec<usize> = (0..eig.values.len())
                .filter(|&i| eig.values[i] > cutoff && eig.values[i] > 0.0)
                .collect();
            let rows = eig.vectors.nrows();
            let col = |i: usize, j: usize, w: f64| eig.vectors[(i, keep[j])] * w;
            GramFactor {
                evaluation: CMatrix::from_fn(rows, keep.len(), |i, j| col(i, j, eig.values[keep[j]].sqrt())),
                synthesis: CMatrix::from_fn(rows, keep.len(), |i, j| col(i, j, 1.0 / eig.values[keep[j]].sqrt())),
            }
        })
    }

    /// Complex dimension of the span.
    pub fn span_dim(&self) -> usize {
        self.factor().evaluation.ncols()
    }

    fn check_element(&self, f: &RkhmElement) -> Result<()> {
        if Arc::ptr_eq(&self.kernel, &f.kernel) || *self.kernel == *f.kernel {
            Ok(())
        } else {
            Err(Error::KernelMismatch)
        }
    }

    /// Orthonormal coordinates of `f`.
    pub fn coordinates(&self, f: &RkhmElement) -> Result<CVector> {
        self.check_element(f)?;
        Ok(self.factor().evaluation.adjoint() * f.coefficient_vector())
    }

    /// Coordinates of every generator `K_{u,s}` with `u` running through the
    /// dense unit vectors of the module, one column per (point, unit vector).
    pub fn generator_coordinates(&self) -> CMatrix {
        self.factor().evaluation.adjoint()
    }

    /// The element with the given orthonormal coordinates.
    pub fn from_coordinates(&self, z: &CVector) -> Result<RkhmElement> {
        let f = self.factor();
        if z.len() != f.synthesis.ncols() {
            return Err(Error::DimensionMismatch {
                context: "span coordinates",
                expected: f.synthesis.ncols(),
                found: z.len(),
            });
        }
        let c = &f.synthesis * z;
        let d = self.kernel.module_dim();
        let coeffs = (0..self.kernel.len())
            .map(|i| ModuleElement::from_vector(self.kernel.shape(), self.kernel.rank(), c.rows(i * d, d).as_slice()))
            .collect::<Result<Vec<_>>>()?;
        RkhmElement::from_coefficients(&self.kernel, &coeffs)
    }

    /// `δ_F : f ↦ (f(s))_{s ∈ F}` on orthonormal coordinates.
    pub fn evaluation_operator(&self, points: &[String]) -> Result<DenseOperator> {
        let d = self.kernel.module_dim();
        let ev = &self.factor().evaluation;
        let mut m = CMatrix::zeros(points.len() * d, ev.ncols());
        for (row, p) in points.iter().enumerate() {
            let i = self.kernel.index_of(p)?;
            m.view_mut((row * d, 0), (d, ev.ncols())).copy_from(&ev.view((i * d, 0), (d, ev.ncols())));
        }
        DenseOperator::new(
            m,
            Space::Span(ev.ncols()),
            Space::Module {
                shape: self.kernel.shape().clone(),
                rank: self.kernel.rank(),
                copies: points.len(),
            },
        )
    }

    pub fn feature_map(&self, s: &str) -> Result<FeatureMap> {
        Ok(FeatureMap {
            point: s.to_string(),
            delta: self.evaluation_operator(&[s.to_string()])?,
        })
    }

    /// `‖δ_t δ_s* − K(s,t)‖` as dense operators.
    pub fn kolmogorov_defect(&self, s: &str, t: &str) -> Result<f64> {
        let ds = self.feature_map(s)?;
        let dt = self.feature_map(t)?;
        let prod = dt.delta.matrix() * ds.delta.matrix().adjoint();
        Ok(dense::spectral_norm(&(prod - self.kernel.op_at(s, t)?.dense())))
    }

    /// `⟨f(s), x⟩ − ⟨f, K_{x,s}⟩`.
    pub fn reproducing_defect(&self, f: &RkhmElement, x: &ModuleElement, s: &str) -> Result<AlgebraElement> {
        self.check_element(f)?;
        let lhs = f.evaluate(s)?.inner(x)?;
        let rhs = f.inner(&self.generator(x, s)?)?;
        lhs.checked_sub(&rhs)
    }
}

/// `δ_s`, realized on the span's orthonormal coordinates.
#[derive(Clone, Debug)]
pub struct FeatureMap {
    point: String,
    delta: DenseOperator,
}

impl FeatureMap {
    pub fn point(&self) -> &str {
        &self.point
    }

    pub fn operator(&self) -> &DenseOperator {
        &self.delta
    }

    /// `δ_s(f) = f(s)`.
    pub fn apply(&self, rkhm: &Rkhm, f: &RkhmElement) -> Result<ModuleElement> {
        let v = self.delta.apply(&rkhm.coordinates(f)?)?;
        ModuleElement::from_vector(rkhm.kernel.shape(), rkhm.kernel.rank(), v.as_slice())
    }

    /// `δ_s*(x) = K_{x,s}` in coordinates.
    pub fn adjoint_apply(&self, x: &ModuleElement) -> Result<CVector> {
        self.delta.adjoint().apply(&x.vectorize())
    }
}

pub fn rkhm_generator(rkhm: &Rkhm, x: &ModuleElement, s: &str) -> Result<RkhmElement> {
    rkhm.generator(x, s)
}

pub fn reproducing_check(rkhm: &Rkhm, f: &RkhmElement, x: &ModuleElement, s: &str) -> Result<AlgebraElement> {
    rkhm.reproducing_defect(f, x, s)
}

pub fn kolmogorov_check(rkhm: &Rkhm, s: &str, t: &str) -> Result<f64> {
    rkhm.kolmogorov_defect(s, t)
}

pub fn norm_of(f: &RkhmElement) -> f64 {
    f.norm()
}

/// `m·K(s,t) − f(t) ⊗ f(s)`; positive definite exactly when `f` belongs to
/// the module with `‖⟨f, f⟩‖ ≤ m`.
pub fn membership_gap(f: &PointFamily, k: &KernelSample, m: f64) -> Result<KernelSample> {
    let vals = k.points().iter().map(|p| f.get(p)).collect::<Result<Vec<_>>>()?;
    if let Some(v) = vals.first() {
        if v.shape() != k.shape() || v.rank() != k.rank() {
            return Err(Error::DimensionMismatch {
                context: "module rank of the function values",
                expected: k.rank(),
                found: v.rank(),
            });
        }
    }
    KernelSample::from_fn(k.points().to_vec(), |i, j| {
        k.op(i, j)
            .scale_real(m)
            .checked_sub(&ModuleOperator::rank_one(vals[j], vals[i])?)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraShape;
    use crate::random::Sampler;

    fn shape(d: &[usize]) -> AlgebraShape {
        AlgebraShape::new(d.to_vec()).unwrap()
    }

    fn random_element(rng: &mut Sampler, rkhm: &Rkhm, terms: usize) -> RkhmElement {
        let k = rkhm.kernel();
        let terms = (0..terms)
            .map(|_| Term {
                x: rng.module_element(k.shape(), k.rank()),
                point: rng.index(k.len()),
                a: rng.algebra_element(k.shape()),
            })
            .collect();
        RkhmElement::from_terms(k, terms).unwrap()
    }

    fn setup(seed: u64, family: usize) -> (Sampler, Rkhm) {
        let mut rng = Sampler::new(seed);
        let k = rng.pd_kernel_from(family, &shape(&[2, 1]), 2, 4);
        let rkhm = Rkhm::new(k, Tolerance::default()).unwrap();
        (rng, rkhm)
    }

    #[test]
    fn rejects_indefinite_kernels() {
        let mut rng = Sampler::new(50);
        let k = rng.gram_kernel(&shape(&[1]), 1, 3, 1).scale_real(-1.0);
        assert!(matches!(
            Rkhm::new(k, Tolerance::default()),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn generators() {
        let (mut rng, rkhm) = setup(51, 0);
        let k = rkhm.kernel().clone();
        let x = rng.module_element(k.shape(), k.rank());
        let g = rkhm.generator(&x, "s2").unwrap();
        for t in k.points() {
            let direct = k.op_at("s2", t).unwrap().apply(&x).unwrap();
            assert_eq!(g.evaluate(t).unwrap(), direct);
        }
        let zero = rkhm.generator(&ModuleElement::zeros(k.shape(), k.rank()), "s1").unwrap();
        assert_eq!(zero.norm(), 0.0);
        let a = rng.algebra_element(k.shape());
        let lhs = g.right_mul(&a).unwrap();
        let rhs = rkhm.generator(&x.right_mul(&a).unwrap(), "s2").unwrap();
        assert!(lhs.checked_sub(&rhs).unwrap().norm() < 1e-7);
        assert!(rkhm.generator(&x, "nope").is_err());
    }

    #[test]
    fn evaluation_is_linear() {
        let (mut rng, rkhm) = setup(52, 1);
        let f = random_element(&mut rng, &rkhm, 3);
        let g = random_element(&mut rng, &rkhm, 2);
        let a = rng.algebra_element(rkhm.kernel().shape());
        let h = f.checked_add(&g.right_mul(&a).unwrap()).unwrap();
        for t in rkhm.kernel().points() {
            let expected = f
                .evaluate(t)
                .unwrap()
                .checked_add(&g.evaluate(t).unwrap().right_mul(&a).unwrap())
                .unwrap();
            assert!(h.evaluate(t).unwrap().max_abs_diff(&expected) < 1e-12);
        }
        assert_eq!(rkhm.zero().evaluate("s1").unwrap().max_abs(), 0.0);
    }

    #[test]
    fn inner_product() {
        let tol = Tolerance::default();
        let (mut rng, rkhm) = setup(53, 2);
        let k = rkhm.kernel().clone();
        let (x, y) = (rng.module_element(k.shape(), k.rank()), rng.module_element(k.shape(), k.rank()));
        let lhs = rkhm.generator(&x, "s1").unwrap().inner(&rkhm.generator(&y, "s3").unwrap()).unwrap();
        let rhs = k.op_at("s1", "s3").unwrap().apply(&x).unwrap().inner(&y).unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-13);
        for _ in 0..10 {
            let f = random_element(&mut rng, &rkhm, 4);
            let g = random_element(&mut rng, &rkhm, 3);
            assert!(f.inner(&f).unwrap().is_positive(&tol));
            let fg = f.inner(&g).unwrap();
            assert!(g.inner(&f).unwrap().max_abs_diff(&fg.adjoint()) < 1e-10 * (1.0 + fg.max_abs()));
            assert!(rkhm.zero().inner(&g).unwrap().is_zero());
            // ⟨f,g⟩⟨g,f⟩ ⪯ ‖g‖²⟨f,f⟩
            let gap = &f.inner(&f).unwrap().scale_real(g.norm().powi(2)) - &(&fg * &fg.adjoint());
            assert!(gap.is_positive(&Tolerance::default().with_rel(1e-8)));
        }
    }

    #[test]
    fn kernel_mismatch_is_detected() {
        let (mut rng, a) = setup(54, 0);
        let other = Rkhm::new(rng.gram_kernel(&shape(&[2, 1]), 2, 4, 1), Tolerance::default()).unwrap();
        assert!(matches!(a.zero().inner(&other.zero()), Err(Error::KernelMismatch)));
        assert!(a.coordinates(&other.zero()).is_err());
    }

    #[test]
    fn reproducing_property() {
        for family in 0..4 {
            let (mut rng, rkhm) = setup(55 + family as u64, family);
            let k = rkhm.kernel().clone();
            for _ in 0..10 {
                let f = random_element(&mut rng, &rkhm, 3);
                let x = rng.module_element(k.shape(), k.rank());
                let s = k.points()[rng.index(k.len())].clone();
                let defect = rkhm.reproducing_defect(&f, &x, &s).unwrap().norm();
                assert!(defect <= 1e-9 * (1.0 + f.norm()) * (1.0 + x.norm()));
            }
            let x = rng.module_element(k.shape(), k.rank());
            assert!(rkhm.reproducing_defect(&rkhm.zero(), &x, "s1").unwrap().is_zero());
        }
    }

    #[test]
    fn kolmogorov_decomposition() {
        for family in 0..4 {
            let (_, rkhm) = setup(60 + family as u64, family);
            let k = rkhm.kernel().clone();
            for s in k.points() {
                for t in k.points() {
                    assert!(rkhm.kolmogorov_defect(s, t).unwrap() <= 1e-8 * (1.0 + k.norm()));
                }
            }
        }
        let mut rng = Sampler::new(64);
        let k = rng.gram_kernel(&shape(&[2]), 1, 1, 1);
        let rkhm = Rkhm::new(k, Tolerance::default()).unwrap();
        assert!(rkhm.kolmogorov_defect("s1", "s1").unwrap() < 1e-12);
    }

    #[test]
    fn feature_maps_evaluate() {
        let (mut rng, rkhm) = setup(65, 3);
        let f = random_element(&mut rng, &rkhm, 4);
        for s in rkhm.kernel().points() {
            let fm = rkhm.feature_map(s).unwrap();
            let via = fm.apply(&rkhm, &f).unwrap();
            assert!(via.max_abs_diff(&f.evaluate(s).unwrap()) < 1e-8 * (1.0 + f.norm()));
        }
        let x = rng.module_element(rkhm.kernel().shape(), 1);
        let z = rkhm.feature_map("s2").unwrap().adjoint_apply(&x).unwrap();
        let g = rkhm.coordinates(&rkhm.generator(&x, "s2").unwrap()).unwrap();
        assert!((z - g).norm() < 1e-10);
    }

    #[test]
    fn coordinates_round_trip() {
        let (mut rng, rkhm) = setup(66, 0);
        let f = random_element(&mut rng, &rkhm, 3);
        let z = rkhm.coordinates(&f).unwrap();
        let back = rkhm.from_coordinates(&z).unwrap();
        assert!(back.checked_sub(&f).unwrap().norm() < 1e-7 * (1.0 + f.norm()));
        // tr⟨f,f⟩ = ‖z‖² and ‖⟨f,f⟩‖ ≤ tr⟨f,f⟩.
        let ff = f.inner(&f).unwrap();
        assert!((ff.trace().re - z.norm_squared()).abs() < 1e-9 * (1.0 + z.norm_squared()));
        assert!(f.norm().powi(2) <= z.norm_squared() * (1.0 + 1e-12));
    }

    #[test]
    fn norms() {
        let tol = Tolerance::default();
        let s = shape(&[1]);
        let l = Sampler::labels(3);
        let k = crate::kernel::gen_scalar_lift(&CMatrix::identity(3, 3), &l, &s, 2, &tol).unwrap();
        let rkhm = Rkhm::new(k, tol).unwrap();
        assert_eq!(norm_of(&rkhm.zero()), 0.0);
        let e = ModuleElement::basis(&s, 2, 0);
        assert!((norm_of(&rkhm.generator(&e, "s2").unwrap()) - 1.0).abs() < 1e-14);
        // Over ℂ the module norm is the Euclidean norm of the coordinates.
        let mut rng = Sampler::new(67);
        let k = rng.gram_kernel(&s, 2, 3, 2);
        let rkhm = Rkhm::new(k, tol).unwrap();
        let f = random_element(&mut rng, &rkhm, 4);
        assert!((f.norm() - rkhm.coordinates(&f).unwrap().norm()).abs() < 1e-9 * (1.0 + f.norm()));
    }

    #[test]
    fn rank_one_kernel_spans_one_function() {
        // f(s1) = e_1 makes F = K_{e_1,s1} the function t ↦ f(t) with ⟨F,F⟩ = 1,
        // and every generator is F·⟨f(s), x⟩.
        let tol = Tolerance::default();
        let mut rng = Sampler::new(68);
        let s = shape(&[2, 1]);
        let l = Sampler::labels(4);
        let mut fam = PointFamily::new();
        fam.insert("s1", ModuleElement::basis(&s, 2, 0)).unwrap();
        for p in &l[1..] {
            fam.insert(p.clone(), rng.module_element(&s, 2)).unwrap();
        }
        let k = crate::kernel::gen_rank_one(&fam, &l).unwrap();
        let rkhm = Rkhm::new(k, tol).unwrap();
        let f = rkhm.generator(&ModuleElement::basis(&s, 2, 0), "s1").unwrap();
        assert!(f.inner(&f).unwrap().max_abs_diff(&AlgebraElement::identity(&s)) < 1e-13);
        for p in &l {
            assert!(f.evaluate(p).unwrap().max_abs_diff(fam.get(p).unwrap()) < 1e-13);
            let x = rng.module_element(&s, 2);
            let g = rkhm.generator(&x, p).unwrap();
            let proj = f.right_mul(&f.inner(&g).unwrap()).unwrap();
            assert!(g.checked_sub(&proj).unwrap().norm() < 1e-6 * (1.0 + g.norm()));
            let fs = fam.get(p).unwrap().inner(&x).unwrap();
            assert!(f.inner(&g).unwrap().max_abs_diff(&fs) < 1e-12 * (1.0 + fs.max_abs()));
        }
    }

    #[test]
    fn evaluation_is_continuous() {
        let (mut rng, rkhm) = setup(69, 1);
        let k = rkhm.kernel().clone();
        for _ in 0..10 {
            let d = random_element(&mut rng, &rkhm, 3);
            let x = rng.module_element(k.shape(), k.rank());
            for (i, s) in k.points().iter().enumerate() {
                let lhs = d.evaluate(s).unwrap().inner(&x).unwrap().norm();
                let rhs = d.norm() * k.op(i, i).norm().sqrt() * x.norm();
                assert!(lhs <= rhs * (1.0 + 1e-9) + 1e-12);
            }
        }
    }

    #[test]
    fn membership_test() {
        let tol = Tolerance::default();
        let (mut rng, rkhm) = setup(70, 0);
        let k = rkhm.kernel().clone();
        let x = rng.module_element(k.shape(), k.rank());
        let f = rkhm.generator(&x, "s3").unwrap().right_mul(&rng.algebra_element(k.shape())).unwrap();
        let mut values = PointFamily::new();
        for p in k.points() {
            values.insert(p.clone(), f.evaluate(p).unwrap()).unwrap();
        }
        let m = f.inner(&f).unwrap().norm();
        assert!(membership_gap(&values, &k, m * (1.0 + 1e-9)).unwrap().is_positive_definite(&tol));
        assert!(!membership_gap(&values, &k, 0.5 * m).unwrap().is_positive_definite(&tol));
        let mut zero = PointFamily::new();
        for p in k.points() {
            zero.insert(p.clone(), ModuleElement::zeros(k.shape(), k.rank())).unwrap();
        }
        let gap = membership_gap(&zero, &k, 2.0).unwrap();
        assert!(gap.max_abs_diff(&k.scale_real(2.0)) == 0.0);
        assert!(gap.is_positive_definite(&tol));
    }

    #[test]
    fn shared_handle_across_threads() {
        let (mut rng, rkhm) = setup(71, 0);
        let f = random_element(&mut rng, &rkhm, 3);
        let rkhm = Arc::new(rkhm);
        let dims: Vec<usize> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..4)
                .map(|_| {
                    let r = Arc::clone(&rkhm);
                    let f = f.clone();
                    scope.spawn(move || {
                        r.coordinates(&f).unwrap();
                        r.span_dim()
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        assert!(dims.windows(2).all(|w| w[0] == w[1]));
    }
}
