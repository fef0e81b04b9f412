//! The standard Hilbert module `A^k` and its adjointable operators `M_k(A)`.
//!
//! Dense realization: a module element is the concatenation of the
//! row-major coordinates of its `k` algebra entries (length `k·Σd_j²`), and an
//! operator acts on those vectors by the left regular representation of each
//! entry. The trace of the algebra-valued inner product is the standard
//! complex inner product of the dense vectors, so adjoints and positivity
//! carry over unchanged.

use std::ops::{Add, Mul, Sub};

use crate::algebra::{AlgebraElement, AlgebraShape, Tolerance};
use crate::dense::{self, CMatrix, CVector, C64};
use crate::error::{Error, Result};

/// An element `(x_1, …, x_k)` of `A^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleElement {
    shape: AlgebraShape,
    coords: Vec<AlgebraElement>,
}

impl ModuleElement {
    pub fn new(coords: Vec<AlgebraElement>) -> Result<Self> {
        let first = coords
            .first()
            .ok_or_else(|| Error::InvalidShape("module rank must be at least 1".into()))?;
        let shape = first.shape().clone();
        for c in &coords[1..] {
            shape.check_same(c.shape())?;
        }
        Ok(ModuleElement { shape, coords })
    }

    pub fn zeros(shape: &AlgebraShape, rank: usize) -> Self {
        assert!(rank >= 1, "module rank must be at least 1");
        ModuleElement {
            shape: shape.clone(),
            coords: vec![AlgebraElement::zeros(shape); rank],
        }
    }

    /// `e_i`: the unit in coordinate `i`, zero elsewhere.
    pub fn basis(shape: &AlgebraShape, rank: usize, i: usize) -> Self {
        let mut x = Self::zeros(shape, rank);
        x.coords[i] = AlgebraElement::identity(shape);
        x
    }

    /// An element of the algebra viewed as a rank-one module.
    pub fn from_algebra(a: AlgebraElement) -> Self {
        ModuleElement {
            shape: a.shape().clone(),
            coords: vec![a],
        }
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[AlgebraElement] {
        &self.coords
    }

    /// Complex dimension `k·Σd_j²` of the dense realization.
    pub fn dense_dim(&self) -> usize {
        self.rank() * self.shape.total_dim()
    }

    pub(crate) fn check_compatible(&self, other: &Self) -> Result<()> {
        self.shape.check_same(&other.shape)?;
        if self.rank() != other.rank() {
            return Err(Error::DimensionMismatch {
                context: "module rank",
                expected: self.rank(),
                found: other.rank(),
            });
        }
        Ok(())
    }

    /// `⟨x, y⟩ = Σ_i x_i* y_i`.
    pub fn inner(&self, other: &Self) -> Result<AlgebraElement> {
        self.check_compatible(other)?;
        Ok(self.inner_unchecked(other))
    }

    pub(crate) fn inner_unchecked(&self, other: &Self) -> AlgebraElement {
        let mut acc = AlgebraElement::zeros(&self.shape);
        for (x, y) in self.coords.iter().zip(&other.coords) {
            acc = &acc + &(&x.adjoint() * y);
        }
        acc
    }

    /// `|x|² = ⟨x,x⟩`.
    pub fn abs_sq(&self) -> AlgebraElement {
        self.inner_unchecked(self)
    }

    /// `‖x‖ = ‖⟨x,x⟩‖^{1/2}`.
    pub fn norm(&self) -> f64 {
        self.abs_sq().norm().sqrt()
    }

    /// Right module action `x·a`.
    pub fn right_mul(&self, a: &AlgebraElement) -> Result<Self> {
        self.shape.check_same(a.shape())?;
        Ok(ModuleElement {
            shape: self.shape.clone(),
            coords: self.coords.iter().map(|x| x * a).collect(),
        })
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    pub fn scale(&self, c: C64) -> Self {
        ModuleElement {
            shape: self.shape.clone(),
            coords: self.coords.iter().map(|x| x.scale(c)).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.coords.iter().map(AlgebraElement::max_abs).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    pub fn vectorize(&self) -> CVector {
        let d = self.shape.total_dim();
        let mut v = CVector::zeros(self.dense_dim());
        for (i, c) in self.coords.iter().enumerate() {
            v.rows_mut(i * d, d).copy_from(&c.vectorize());
        }
        v
    }

    pub fn from_vector(shape: &AlgebraShape, rank: usize, v: &[C64]) -> Result<Self> {
        let d = shape.total_dim();
        if v.len() != rank * d {
            return Err(Error::DimensionMismatch {
                context: "module coordinate vector",
                expected: rank * d,
                found: v.len(),
            });
        }
        let coords = v
            .chunks(d)
            .map(|chunk| AlgebraElement::from_vector(shape, chunk))
            .collect::<Result<Vec<_>>>()?;
        Ok(ModuleElement {
            shape: shape.clone(),
            coords,
        })
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&AlgebraElement, &AlgebraElement) -> AlgebraElement) -> Self {
        ModuleElement {
            shape: self.shape.clone(),
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| f(a, b)).collect(),
        }
    }
}

/// `‖y‖²⟨x,x⟩ − ⟨x,y⟩⟨y,x⟩`, positive by the Cauchy–Schwarz inequality.
pub fn cauchy_schwarz_gap(x: &ModuleElement, y: &ModuleElement) -> Result<AlgebraElement> {
    let xy = x.inner(y)?;
    let y_norm_sq = y.abs_sq().norm();
    Ok(&x.abs_sq().scale_real(y_norm_sq) - &(&xy * &xy.adjoint()))
}

/// An adjointable operator on `A^k`, stored as a `k×k` matrix over `A`
/// acting by `(Tx)_i = Σ_j T_ij x_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleOperator {
    shape: AlgebraShape,
    rank: usize,
    entries: Vec<AlgebraElement>,
}

impl ModuleOperator {
    /// `entries` in row-major order.
    pub fn from_entries(shape: &AlgebraShape, rank: usize, entries: Vec<AlgebraElement>) -> Result<Self> {
        if rank == 0 {
            return Err(Error::InvalidShape("module rank must be at least 1".into()));
        }
        if entries.len() != rank * rank {
            return Err(Error::DimensionMismatch {
                context: "operator entries",
                expected: rank * rank,
                found: entries.len(),
            });
        }
        for e in &entries {
            shape.check_same(e.shape())?;
        }
        Ok(ModuleOperator {
            shape: shape.clone(),
            rank,
            entries,
        })
    }

    pub fn zeros(shape: &AlgebraShape, rank: usize) -> Self {
        ModuleOperator {
            shape: shape.clone(),
            rank,
            entries: vec![AlgebraElement::zeros(shape); rank * rank],
        }
    }

    pub fn identity(shape: &AlgebraShape, rank: usize) -> Self {
        Self::scalar(shape, rank, C64::new(1.0, 0.0))
    }

    /// `c · I`.
    pub fn scalar(shape: &AlgebraShape, rank: usize, c: C64) -> Self {
        let mut t = Self::zeros(shape, rank);
        for i in 0..rank {
            t.entries[i * rank + i] = AlgebraElement::scalar(shape, c);
        }
        t
    }

    /// Left multiplication `l_a` on the rank-one module `A`.
    pub fn left_mult(a: &AlgebraElement) -> Self {
        ModuleOperator {
            shape: a.shape().clone(),
            rank: 1,
            entries: vec![a.clone()],
        }
    }

    /// `x ⊗ y : z ↦ x⟨y, z⟩`, entries `x_i y_j*`.
    pub fn rank_one(x: &ModuleElement, y: &ModuleElement) -> Result<Self> {
        x.check_compatible(y)?;
        let k = x.rank();
        let entries = (0..k * k)
            .map(|idx| &x.coords()[idx / k] * &y.coords()[idx % k].adjoint())
            .collect();
        Ok(ModuleOperator {
            shape: x.shape().clone(),
            rank: k,
            entries,
        })
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn entry(&self, i: usize, j: usize) -> &AlgebraElement {
        &self.entries[i * self.rank + j]
    }

    pub fn entries(&self) -> &[AlgebraElement] {
        &self.entries
    }

    pub fn dense_dim(&self) -> usize {
        self.rank * self.shape.total_dim()
    }

    pub(crate) fn check_compatible(&self, other: &Self) -> Result<()> {
        self.shape.check_same(&other.shape)?;
        if self.rank != other.rank {
            return Err(Error::DimensionMismatch {
                context: "operator rank",
                expected: self.rank,
                found: other.rank,
            });
        }
        Ok(())
    }

    pub fn apply(&self, x: &ModuleElement) -> Result<ModuleElement> {
        self.shape.check_same(x.shape())?;
        if x.rank() != self.rank {
            return Err(Error::DimensionMismatch {
                context: "operator applied to module element",
                expected: self.rank,
                found: x.rank(),
            });
        }
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &ModuleElement) -> ModuleElement {
        let k = self.rank;
        let coords = (0..k)
            .map(|i| {
                let mut acc = AlgebraElement::zeros(&self.shape);
                for j in 0..k {
                    acc = &acc + &(self.entry(i, j) * &x.coords()[j]);
                }
                acc
            })
            .collect();
        ModuleElement {
            shape: self.shape.clone(),
            coords,
        }
    }

    pub fn adjoint(&self) -> Self {
        let k = self.rank;
        let entries = (0..k * k)
            .map(|idx| self.entry(idx % k, idx / k).adjoint())
            .collect();
        ModuleOperator {
            shape: self.shape.clone(),
            rank: k,
            entries,
        }
    }

    /// `T ∘ U`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let k = self.rank;
        let entries = (0..k * k)
            .map(|idx| {
                let (i, j) = (idx / k, idx % k);
                let mut acc = AlgebraElement::zeros(&self.shape);
                for m in 0..k {
                    acc = &acc + &(self.entry(i, m) * other.entry(m, j));
                }
                acc
            })
            .collect();
        Ok(ModuleOperator {
            shape: self.shape.clone(),
            rank: k,
            entries,
        })
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    pub fn scale(&self, c: C64) -> Self {
        ModuleOperator {
            shape: self.shape.clone(),
            rank: self.rank,
            entries: self.entries.iter().map(|e| e.scale(c)).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    /// `(T + T*)/2`, exactly self-adjoint.
    pub fn hermitian_part(&self) -> Self {
        let blocks: Vec<CMatrix> = self.to_block_matrices().iter().map(dense::hermitian_part).collect();
        Self::from_block_matrices(&self.shape, self.rank, &blocks).expect("same layout")
    }

    /// `Im T = (T − T*)/(2i)`.
    pub fn imaginary_part(&self) -> Self {
        (self - &self.adjoint()).scale(C64::new(0.0, -0.5))
    }

    /// Matrix of `T` on the dense realization, size `k·Σd_j²`.
    pub fn dense(&self) -> CMatrix {
        let d = self.shape.total_dim();
        let k = self.rank;
        let mut m = CMatrix::zeros(k * d, k * d);
        for i in 0..k {
            for j in 0..k {
                m.view_mut((i * d, j * d), (d, d))
                    .copy_from(&self.entry(i, j).left_mult_matrix());
            }
        }
        m
    }

    /// Faithful representation `M_k(A) → ⊕_j M_{k·d_j}(ℂ)`: block `j` has
    /// sub-block `(i, l)` equal to block `j` of entry `(i, l)`.
    pub fn to_block_matrices(&self) -> Vec<CMatrix> {
        let k = self.rank;
        self.shape
            .block_dims()
            .iter()
            .enumerate()
            .map(|(b, &d)| {
                let mut m = CMatrix::zeros(k * d, k * d);
                for i in 0..k {
                    for l in 0..k {
                        m.view_mut((i * d, l * d), (d, d)).copy_from(self.entry(i, l).block(b));
                    }
                }
                m
            })
            .collect()
    }

    pub fn from_block_matrices(shape: &AlgebraShape, rank: usize, blocks: &[CMatrix]) -> Result<Self> {
        if blocks.len() != shape.num_blocks() {
            return Err(Error::DimensionMismatch {
                context: "operator block matrices",
                expected: shape.num_blocks(),
                found: blocks.len(),
            });
        }
        let mut entries = Vec::with_capacity(rank * rank);
        for i in 0..rank {
            for l in 0..rank {
                let parts = shape
                    .block_dims()
                    .iter()
                    .zip(blocks)
                    .map(|(&d, m)| {
                        if m.nrows() != rank * d || m.ncols() != rank * d {
                            return Err(Error::DimensionMismatch {
                                context: "operator block matrix size",
                                expected: rank * d,
                                found: m.nrows(),
                            });
                        }
                        Ok(m.view((i * d, l * d), (d, d)).into_owned())
                    })
                    .collect::<Result<Vec<_>>>()?;
                entries.push(AlgebraElement::from_blocks(shape, parts)?);
            }
        }
        Self::from_entries(shape, rank, entries)
    }

    /// Operator norm in `L(A^k)`.
    pub fn norm(&self) -> f64 {
        self.to_block_matrices()
            .iter()
            .map(dense::spectral_norm)
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(AlgebraElement::max_abs).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    pub fn is_self_adjoint(&self, tol: &Tolerance) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol.threshold(self.max_abs())
    }

    /// `T ≥ 0` in `L(A^k)`, decided spectrally on the dense realization.
    pub fn is_positive(&self, tol: &Tolerance) -> bool {
        if !self.is_self_adjoint(tol) {
            return false;
        }
        let eig = dense::hermitian_eigenvalues(&self.dense());
        let scale = eig.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()));
        eig.first().copied().unwrap_or(0.0) >= -tol.threshold(scale)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&AlgebraElement, &AlgebraElement) -> AlgebraElement) -> Self {
        ModuleOperator {
            shape: self.shape.clone(),
            rank: self.rank,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| f(a, b)).collect(),
        }
    }
}

impl Add for &ModuleOperator {
    type Output = ModuleOperator;
    fn add(self, rhs: Self) -> ModuleOperator {
        self.checked_add(rhs).expect("operator layouts differ")
    }
}

impl Sub for &ModuleOperator {
    type Output = ModuleOperator;
    fn sub(self, rhs: Self) -> ModuleOperator {
        self.checked_sub(rhs).expect("operator layouts differ")
    }
}

impl Mul for &ModuleOperator {
    type Output = ModuleOperator;
    fn mul(self, rhs: Self) -> ModuleOperator {
        self.compose(rhs).expect("operator layouts differ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::Sampler;

    fn shape(d: &[usize]) -> AlgebraShape {
        AlgebraShape::new(d.to_vec()).unwrap()
    }

    #[test]
    fn inner_product_basics() {
        let s = shape(&[2, 1]);
        let e0 = ModuleElement::basis(&s, 3, 0);
        assert_eq!(e0.inner(&e0).unwrap(), AlgebraElement::identity(&s));
        for i in 0..3 {
            for j in 0..3 {
                let v = ModuleElement::basis(&s, 3, i)
                    .inner(&ModuleElement::basis(&s, 3, j))
                    .unwrap();
                let expected = if i == j {
                    AlgebraElement::identity(&s)
                } else {
                    AlgebraElement::zeros(&s)
                };
                assert_eq!(v, expected);
            }
        }
    }

    #[test]
    fn inner_is_right_linear_and_hermitian() {
        let mut rng = Sampler::new(11);
        let s = shape(&[2, 2]);
        let (x, y) = (rng.module_element(&s, 2), rng.module_element(&s, 2));
        let a = rng.algebra_element(&s);
        let lhs = x.inner(&y.right_mul(&a).unwrap()).unwrap();
        let rhs = &x.inner(&y).unwrap() * &a;
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        let yx = y.inner(&x).unwrap();
        assert!(yx.max_abs_diff(&x.inner(&y).unwrap().adjoint()) < 1e-13);
    }

    #[test]
    fn right_action_is_associative() {
        let mut rng = Sampler::new(12);
        let s = shape(&[3]);
        let x = rng.module_element(&s, 2);
        let (a, b) = (rng.algebra_element(&s), rng.algebra_element(&s));
        let lhs = x.right_mul(&a).unwrap().right_mul(&b).unwrap();
        let rhs = x.right_mul(&(&a * &b)).unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn cauchy_schwarz() {
        let tol = Tolerance::default();
        let mut rng = Sampler::new(13);
        let s = shape(&[2, 1]);
        for _ in 0..20 {
            let (x, y) = (rng.module_element(&s, 3), rng.module_element(&s, 3));
            assert!(cauchy_schwarz_gap(&x, &y).unwrap().is_positive(&tol));
        }
        let x = rng.module_element(&s, 3);
        let zero = ModuleElement::zeros(&s, 3);
        assert!(cauchy_schwarz_gap(&x, &zero).unwrap().max_abs() < 1e-15);
        // ⟨x,x⟩ a projection: the gap vanishes.
        let e = ModuleElement::basis(&s, 3, 1);
        assert!(cauchy_schwarz_gap(&e, &e).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn zero_norm_means_zero() {
        let s = shape(&[2]);
        let z = ModuleElement::zeros(&s, 2);
        assert_eq!(z.norm(), 0.0);
        let mut rng = Sampler::new(14);
        let x = rng.module_element(&s, 2);
        assert!(x.norm() > 1e-3);
        let a = rng.algebra_element(&s);
        assert!(x.right_mul(&a).unwrap().norm() <= x.norm() * a.norm() * (1.0 + 1e-12));
    }

    #[test]
    fn operator_identities() {
        let mut rng = Sampler::new(15);
        let s = shape(&[2, 1]);
        let k = 2;
        let x = rng.module_element(&s, k);
        let y = rng.module_element(&s, k);
        assert_eq!(ModuleOperator::identity(&s, k).apply(&x).unwrap(), x);
        let (t, u) = (rng.module_operator(&s, k), rng.module_operator(&s, k));
        let lhs = t.apply(&x).unwrap().inner(&y).unwrap();
        let rhs = x.inner(&t.adjoint().apply(&y).unwrap()).unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        let a1 = t.compose(&u).unwrap().adjoint();
        let a2 = u.adjoint().compose(&t.adjoint()).unwrap();
        assert!(a1.max_abs_diff(&a2) < 1e-12);
        assert!(t.apply(&ModuleElement::zeros(&s, 3)).is_err());
    }

    #[test]
    fn rank_one_operators() {
        let tol = Tolerance::default();
        let s = shape(&[2]);
        let e1 = ModuleElement::basis(&s, 2, 0);
        let r = ModuleOperator::rank_one(&e1, &e1).unwrap();
        assert_eq!(r.apply(&e1).unwrap(), e1);
        let mut rng = Sampler::new(16);
        let (x, y) = (rng.module_element(&s, 2), rng.module_element(&s, 2));
        assert!(ModuleOperator::rank_one(&x, &x).unwrap().is_positive(&tol));
        let lhs = ModuleOperator::rank_one(&x, &y).unwrap().adjoint();
        let rhs = ModuleOperator::rank_one(&y, &x).unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-13);
        // (x⊗y) z = x⟨y,z⟩
        let z = rng.module_element(&s, 2);
        let lhs = ModuleOperator::rank_one(&x, &y).unwrap().apply(&z).unwrap();
        let rhs = x.right_mul(&y.inner(&z).unwrap()).unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn operator_positivity() {
        let tol = Tolerance::default();
        let s = shape(&[1]);
        assert!(ModuleOperator::identity(&s, 2).is_positive(&tol));
        let mut t = ModuleOperator::identity(&s, 2);
        t.entries[3] = AlgebraElement::scalar(&s, C64::new(-1.0, 0.0));
        assert!(!t.is_positive(&tol));
    }

    #[test]
    fn dense_realization_round_trips_and_is_faithful() {
        let mut rng = Sampler::new(17);
        let s = shape(&[2, 1]);
        let x = rng.module_element(&s, 3);
        let v = x.vectorize();
        let back = ModuleElement::from_vector(&s, 3, v.as_slice()).unwrap();
        assert_eq!(back, x);
        let t = rng.module_operator(&s, 3);
        let lhs = t.apply(&x).unwrap().vectorize();
        let rhs = t.dense() * v;
        assert!((lhs - rhs).norm() < 1e-12);
        let y = rng.module_element(&s, 3);
        let tr = x.inner(&y).unwrap().trace();
        let dot = x.vectorize().dotc(&y.vectorize());
        assert!((tr - dot).norm() < 1e-12);
        let back = ModuleOperator::from_block_matrices(&s, 3, &t.to_block_matrices()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn rank_one_module_is_the_algebra() {
        // L(A) ≅ A via left multiplication by t(1).
        let mut rng = Sampler::new(18);
        let s = shape(&[2, 2]);
        let a = rng.algebra_element(&s);
        let t = ModuleOperator::left_mult(&a);
        let b = rng.algebra_element(&s);
        let applied = t.apply(&ModuleElement::from_algebra(b.clone())).unwrap();
        assert!(applied.coords()[0].max_abs_diff(&(&a * &b)) < 1e-13);
        let one = ModuleElement::from_algebra(AlgebraElement::identity(&s));
        assert_eq!(t.apply(&one).unwrap().coords()[0], a);
    }
}
