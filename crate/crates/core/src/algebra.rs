//! Finite-dimensional C*-algebras realized as direct sums of full matrix
//! algebras `M_{d_1}(ℂ) ⊕ … ⊕ M_{d_m}(ℂ)`.
//!
//! Every order question (positivity, square roots, norms) reduces to a
//! Hermitian eigenproblem per block.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::dense::{self, CMatrix, CVector, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Relative spectral tolerance with an absolute floor.
///
/// A quantity `v` measured against a scale `s` is treated as zero when
/// `|v| <= rel_eps * s + abs_floor`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rel_eps: f64,
    pub abs_floor: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rel_eps: 1e-9,
            abs_floor: 1e-12,
        }
    }
}

impl Tolerance {
    pub fn new(rel_eps: f64, abs_floor: f64) -> Result<Self> {
        if !(rel_eps >= 0.0 && abs_floor >= 0.0 && rel_eps.is_finite() && abs_floor.is_finite()) {
            return Err(Error::InvalidTolerance { rel_eps, abs_floor });
        }
        Ok(Tolerance { rel_eps, abs_floor })
    }

    /// Same absolute floor, different relative part.
    pub fn with_rel(self, rel_eps: f64) -> Self {
        Tolerance { rel_eps, ..self }
    }

    #[inline]
    pub fn threshold(&self, scale: f64) -> f64 {
        self.rel_eps * scale + self.abs_floor
    }
}

/// Block sizes `(d_1, …, d_m)` of a finite-dimensional C*-algebra.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AlgebraShape {
    block_dims: Vec<usize>,
}

impl AlgebraShape {
    pub fn new(block_dims: Vec<usize>) -> Result<Self> {
        if block_dims.is_empty() {
            return Err(Error::InvalidShape("at least one block is required".into()));
        }
        if let Some(pos) = block_dims.iter().position(|&d| d == 0) {
            return Err(Error::InvalidShape(format!("block {pos} has dimension 0")));
        }
        Ok(AlgebraShape { block_dims })
    }

    /// The algebra ℂ.
    pub fn scalar() -> Self {
        AlgebraShape { block_dims: vec![1] }
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn num_blocks(&self) -> usize {
        self.block_dims.len()
    }

    /// Complex dimension `Σ d_j²`.
    pub fn total_dim(&self) -> usize {
        self.block_dims.iter().map(|d| d * d).sum()
    }

    /// Size `Σ d_j` of the block-diagonal embedding.
    pub fn matrix_size(&self) -> usize {
        self.block_dims.iter().sum()
    }

    pub(crate) fn check_same(&self, other: &AlgebraShape) -> Result<()> {
        if self != other {
            return Err(Error::ShapeMismatch {
                expected: self.to_string(),
                found: other.to_string(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for AlgebraShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.block_dims)
    }
}

/// An element of `⊕_j M_{d_j}(ℂ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    shape: AlgebraShape,
    blocks: Vec<CMatrix>,
}

impl AlgebraElement {
    pub fn from_blocks(shape: &AlgebraShape, blocks: Vec<CMatrix>) -> Result<Self> {
        if blocks.len() != shape.num_blocks() {
            return Err(Error::DimensionMismatch {
                context: "algebra element blocks",
                expected: shape.num_blocks(),
                found: blocks.len(),
            });
        }
        for (b, &d) in blocks.iter().zip(shape.block_dims()) {
            if b.nrows() != d || b.ncols() != d {
                return Err(Error::DimensionMismatch {
                    context: "algebra element block size",
                    expected: d,
                    found: if b.nrows() != d { b.nrows() } else { b.ncols() },
                });
            }
        }
        Ok(AlgebraElement {
            shape: shape.clone(),
            blocks,
        })
    }

    pub fn zeros(shape: &AlgebraShape) -> Self {
        let blocks = shape.block_dims().iter().map(|&d| CMatrix::zeros(d, d)).collect();
        AlgebraElement {
            shape: shape.clone(),
            blocks,
        }
    }

    /// The unit (identity in every block).
    pub fn identity(shape: &AlgebraShape) -> Self {
        Self::scalar(shape, ONE)
    }

    /// `c · 1`.
    pub fn scalar(shape: &AlgebraShape, c: C64) -> Self {
        let blocks = shape
            .block_dims()
            .iter()
            .map(|&d| CMatrix::from_diagonal_element(d, d, c))
            .collect();
        AlgebraElement {
            shape: shape.clone(),
            blocks,
        }
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn block(&self, j: usize) -> &CMatrix {
        &self.blocks[j]
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.shape.check_same(&other.shape)?;
        Ok(self.zip_with(other, |a, b| a * b))
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.shape.check_same(&other.shape)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.shape.check_same(&other.shape)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map_blocks(|b| b * c)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    pub fn adjoint(&self) -> Self {
        self.map_blocks(|b| b.adjoint())
    }

    /// Operator norm: the largest singular value over all blocks.
    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(dense::spectral_norm).fold(0.0, f64::max)
    }

    /// Largest entry magnitude, a cheap scale for tolerance decisions.
    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().map(dense::max_abs).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| dense::max_abs_diff(a, b))
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C64 {
        self.blocks.iter().map(|b| b.trace()).sum()
    }

    pub fn is_hermitian(&self, tol: &Tolerance) -> bool {
        self.hermitian_defect() <= tol.threshold(self.max_abs())
    }

    pub(crate) fn hermitian_defect(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| dense::max_abs_diff(b, &b.adjoint()))
            .fold(0.0, f64::max)
    }

    /// Eigenvalues of the Hermitian part, all blocks merged, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self
            .blocks
            .iter()
            .flat_map(dense::hermitian_eigenvalues)
            .collect();
        all.sort_by(f64::total_cmp);
        all
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// `a ≥ 0`: Hermitian within tolerance and no eigenvalue below
    /// `-(rel_eps·‖a‖ + abs_floor)`.
    pub fn is_positive(&self, tol: &Tolerance) -> bool {
        if !self.is_hermitian(tol) {
            return false;
        }
        self.min_eigenvalue() >= -tol.threshold(self.norm())
    }

    /// Positive square root, eigenvalues below `rel_eps·λ_max` clipped to zero.
    pub fn sqrt_psd(&self, tol: &Tolerance) -> Result<Self> {
        if !self.is_positive(tol) {
            return Err(Error::NotPositive {
                min_eigenvalue: self.min_eigenvalue(),
            });
        }
        let eigs: Vec<_> = self.blocks.iter().map(dense::hermitian_eigen).collect();
        let lambda_max = eigs.iter().map(|e| e.max()).fold(0.0, f64::max);
        let cutoff = tol.rel_eps * lambda_max;
        let blocks = eigs
            .iter()
            .map(|e| e.map(|l| if l > cutoff { l.sqrt() } else { 0.0 }))
            .collect();
        Ok(AlgebraElement {
            shape: self.shape.clone(),
            blocks,
        })
    }

    /// Block-diagonal matrix of size `Σ d_j`.
    pub fn embed_dense(&self) -> CMatrix {
        let n = self.shape.matrix_size();
        let mut m = CMatrix::zeros(n, n);
        let mut offset = 0;
        for b in &self.blocks {
            let d = b.nrows();
            m.view_mut((offset, offset), (d, d)).copy_from(b);
            offset += d;
        }
        m
    }

    /// Inverse of [`embed_dense`](Self::embed_dense); rejects matrices with
    /// entries outside the diagonal blocks.
    pub fn project_dense(shape: &AlgebraShape, m: &CMatrix) -> Result<Self> {
        let n = shape.matrix_size();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch {
                context: "dense algebra matrix",
                expected: n,
                found: m.nrows().max(m.ncols()),
            });
        }
        let mut blocks = Vec::with_capacity(shape.num_blocks());
        let mut offset = 0;
        for &d in shape.block_dims() {
            blocks.push(m.view((offset, offset), (d, d)).into_owned());
            offset += d;
        }
        let rebuilt = AlgebraElement {
            shape: shape.clone(),
            blocks,
        };
        let off_block = dense::max_abs_diff(&rebuilt.embed_dense(), m);
        if off_block != 0.0 {
            return Err(Error::Precondition(format!(
                "matrix is not block-diagonal for shape {shape} (off-block entry {off_block:e})"
            )));
        }
        Ok(rebuilt)
    }

    /// Row-major concatenation of all block entries, length `Σ d_j²`.
    pub fn vectorize(&self) -> CVector {
        let mut v = CVector::zeros(self.shape.total_dim());
        let mut idx = 0;
        for b in &self.blocks {
            for r in 0..b.nrows() {
                for c in 0..b.ncols() {
                    v[idx] = b[(r, c)];
                    idx += 1;
                }
            }
        }
        v
    }

    pub fn from_vector(shape: &AlgebraShape, v: &[C64]) -> Result<Self> {
        if v.len() != shape.total_dim() {
            return Err(Error::DimensionMismatch {
                context: "algebra coordinate vector",
                expected: shape.total_dim(),
                found: v.len(),
            });
        }
        let mut idx = 0;
        let blocks = shape
            .block_dims()
            .iter()
            .map(|&d| {
                let b = CMatrix::from_row_slice(d, d, &v[idx..idx + d * d]);
                idx += d * d;
                b
            })
            .collect();
        Ok(AlgebraElement {
            shape: shape.clone(),
            blocks,
        })
    }

    /// Matrix of `b ↦ a·b` on the coordinates of [`vectorize`](Self::vectorize).
    /// This is the left regular representation, a faithful *-representation.
    pub fn left_mult_matrix(&self) -> CMatrix {
        let n = self.shape.total_dim();
        let mut m = CMatrix::zeros(n, n);
        let mut offset = 0;
        for b in &self.blocks {
            let d = b.nrows();
            m.view_mut((offset, offset), (d * d, d * d))
                .copy_from(&dense::kron_identity(b, d));
            offset += d * d;
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().all(|b| b.iter().all(|z| *z == ZERO))
    }

    /// `(a + a*)/2`, exactly self-adjoint.
    pub fn hermitian_part(&self) -> Self {
        self.map_blocks(dense::hermitian_part)
    }

    fn map_blocks(&self, f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        AlgebraElement {
            shape: self.shape.clone(),
            blocks: self.blocks.iter().map(f).collect(),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&CMatrix, &CMatrix) -> CMatrix) -> Self {
        AlgebraElement {
            shape: self.shape.clone(),
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect(),
        }
    }
}

// Operator forms panic on mismatched shapes; use the `checked_*` methods at
// API boundaries.
impl Mul for &AlgebraElement {
    type Output = AlgebraElement;
    fn mul(self, rhs: Self) -> AlgebraElement {
        self.checked_mul(rhs).expect("algebra shapes differ")
    }
}

impl Add for &AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, rhs: Self) -> AlgebraElement {
        self.checked_add(rhs).expect("algebra shapes differ")
    }
}

impl Sub for &AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, rhs: Self) -> AlgebraElement {
        self.checked_sub(rhs).expect("algebra shapes differ")
    }
}

impl Neg for &AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        self.scale_real(-1.0)
    }
}
