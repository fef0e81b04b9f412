//! Operator-valued kernels restricted to finite point sets.
//!
//! A [`KernelSample`] stores `K(s_i, s_j)` for labelled points. Its
//! definiteness is decided on the assembled dense matrix whose block `(j, i)`
//! is the dense form of `K(s_i, s_j)`, so that the quadratic form
//! `Σ_{i,j} ⟨K(s_i,s_j) x_i, x_j⟩` becomes `v* M v` after taking traces.
//!
//! Algebra-valued kernels ([`AlgebraKernel`]) follow the matrix convention
//! instead: `[k_ij]` is positive when `Σ a_i* k_ij a_j ≥ 0`.

use std::collections::HashMap;

use indexmap::IndexMap;

use crate::algebra::{AlgebraElement, AlgebraShape, Tolerance};
use crate::dense::{self, CMatrix};
use crate::error::{Error, Result};
use crate::module::{ModuleElement, ModuleOperator};

/// Outcome of a spectral definiteness test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Definiteness {
    pub verdict: bool,
    /// Smallest eigenvalue for positivity tests, largest for negativity tests.
    pub extremal_eigenvalue: f64,
    pub threshold: f64,
    pub scale: f64,
}

/// A function `S → A^k` on finitely many labelled points.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointFamily {
    values: IndexMap<String, ModuleElement>,
}

impl PointFamily {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, label: impl Into<String>, x: ModuleElement) -> Result<()> {
        if let Some((_, first)) = self.values.first() {
            first.check_compatible(&x)?;
        }
        self.values.insert(label.into(), x);
        Ok(())
    }

    pub fn get(&self, label: &str) -> Result<&ModuleElement> {
        self.values
            .get(label)
            .ok_or_else(|| Error::UnknownPoint(label.to_string()))
    }

    pub fn contains(&self, label: &str) -> bool {
        self.values.contains_key(label)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &ModuleElement)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v))
    }
}

/// A family `(a_t)` of algebra elements indexed by point labels.
pub type AlgebraFamily = IndexMap<String, AlgebraElement>;

/// `K(s_i, s_j)` for `n` distinct labelled points.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelSample {
    shape: AlgebraShape,
    rank: usize,
    points: Vec<String>,
    index: HashMap<String, usize>,
    ops: Vec<ModuleOperator>,
}

impl KernelSample {
    /// `ops[i][j]` realizes `K(points[i], points[j])`.
    pub fn new(points: Vec<String>, ops: Vec<Vec<ModuleOperator>>) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::TooFewPoints { needed: 1, found: 0 });
        }
        let mut index = HashMap::with_capacity(n);
        for (i, p) in points.iter().enumerate() {
            if index.insert(p.clone(), i).is_some() {
                return Err(Error::DuplicatePoint(p.clone()));
            }
        }
        if ops.len() != n {
            return Err(Error::DimensionMismatch {
                context: "kernel rows",
                expected: n,
                found: ops.len(),
            });
        }
        let first = ops[0]
            .first()
            .ok_or(Error::DimensionMismatch {
                context: "kernel columns",
                expected: n,
                found: 0,
            })?
            .clone();
        let mut flat = Vec::with_capacity(n * n);
        for row in ops {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "kernel columns",
                    expected: n,
                    found: row.len(),
                });
            }
            for op in row {
                first.check_compatible(&op)?;
                flat.push(op);
            }
        }
        Ok(KernelSample {
            shape: first.shape().clone(),
            rank: first.rank(),
            points,
            index,
            ops: flat,
        })
    }

    pub fn from_fn(
        points: Vec<String>,
        mut f: impl FnMut(usize, usize) -> Result<ModuleOperator>,
    ) -> Result<Self> {
        let n = points.len();
        let ops = (0..n)
            .map(|i| (0..n).map(|j| f(i, j)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::new(points, ops)
    }

    pub fn zeros(points: Vec<String>, shape: &AlgebraShape, rank: usize) -> Result<Self> {
        Self::from_fn(points, |_, _| Ok(ModuleOperator::zeros(shape, rank)))
    }

    pub fn constant(points: Vec<String>, op: &ModuleOperator) -> Result<Self> {
        Self::from_fn(points, |_, _| Ok(op.clone()))
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    /// Complex dimension of one copy of the module.
    pub fn module_dim(&self) -> usize {
        self.rank * self.shape.total_dim()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownPoint(label.to_string()))
    }

    pub fn op(&self, i: usize, j: usize) -> &ModuleOperator {
        &self.ops[i * self.len() + j]
    }

    /// `K(s, t)` by label.
    pub fn op_at(&self, s: &str, t: &str) -> Result<&ModuleOperator> {
        Ok(self.op(self.index_of(s)?, self.index_of(t)?))
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        self.shape.check_same(&other.shape)?;
        if self.rank != other.rank {
            return Err(Error::DimensionMismatch {
                context: "kernel module rank",
                expected: self.rank,
                found: other.rank,
            });
        }
        if self.points != other.points {
            return Err(Error::Precondition("kernels are sampled on different points".into()));
        }
        Ok(())
    }

    /// The sample on a subset of points, in the given order.
    pub fn restrict(&self, labels: &[String]) -> Result<Self> {
        let idx = labels
            .iter()
            .map(|l| self.index_of(l))
            .collect::<Result<Vec<_>>>()?;
        Self::from_fn(labels.to_vec(), |a, b| Ok(self.op(idx[a], idx[b]).clone()))
    }

    pub fn map(&self, f: impl Fn(usize, usize, &ModuleOperator) -> ModuleOperator) -> Self {
        let n = self.len();
        let ops = (0..n * n).map(|idx| f(idx / n, idx % n, &self.ops[idx])).collect();
        KernelSample {
            ops,
            ..self.clone()
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.map(|i, j, op| op + other.op(i, j)))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.map(|i, j, op| op - other.op(i, j)))
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.map(|_, _, op| op.scale_real(c))
    }

    pub fn max_abs(&self) -> f64 {
        self.ops.iter().map(ModuleOperator::max_abs).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.ops
            .iter()
            .zip(&other.ops)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    /// `max_{s,t} ‖K(s,t)‖`.
    pub fn norm(&self) -> f64 {
        self.ops.iter().map(ModuleOperator::norm).fold(0.0, f64::max)
    }

    /// Dense matrix with block `(j, i)` equal to the dense form of `K(s_i, s_j)`.
    pub fn assembled(&self) -> CMatrix {
        let n = self.len();
        let d = self.module_dim();
        let mut m = CMatrix::zeros(n * d, n * d);
        for i in 0..n {
            for j in 0..n {
                m.view_mut((j * d, i * d), (d, d)).copy_from(&self.op(i, j).dense());
            }
        }
        m
    }

    fn pair_defect(&self, f: impl Fn(&ModuleOperator, &ModuleOperator) -> f64) -> f64 {
        let n = self.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max(f(self.op(i, j), self.op(j, i)));
            }
        }
        worst
    }

    /// Largest entry of `K(t,s) − K(s,t)*`.
    pub fn hermitian_defect(&self) -> f64 {
        self.pair_defect(|a, b| b.max_abs_diff(&a.adjoint()))
    }

    /// `K(t,s) = K(s,t)*` within tolerance.
    pub fn is_hermitian(&self, tol: &Tolerance) -> bool {
        self.hermitian_defect() <= tol.threshold(self.max_abs())
    }

    /// `K(t,s) = K(s,t)` within tolerance.
    pub fn is_symmetric(&self, tol: &Tolerance) -> bool {
        self.pair_defect(|a, b| a.max_abs_diff(b)) <= tol.threshold(self.max_abs())
    }

    /// `K(s,s) = 0` for every point.
    pub fn is_normalized(&self, tol: &Tolerance) -> bool {
        let scale = self.max_abs();
        (0..self.len()).all(|i| self.op(i, i).norm() <= tol.threshold(scale))
    }

    /// Positivity of the quadratic form `Σ ⟨K(s_i,s_j) x_i, x_j⟩`.
    pub fn positive_definiteness(&self, tol: &Tolerance) -> Definiteness {
        let m = self.assembled();
        let defect = dense::max_abs_diff(&m, &m.adjoint());
        let eig = dense::hermitian_eigenvalues(&m);
        let scale = eig.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()));
        let threshold = tol.threshold(scale);
        let min = eig.first().copied().unwrap_or(0.0);
        Definiteness {
            verdict: min >= -threshold && defect <= tol.threshold(dense::max_abs(&m)),
            extremal_eigenvalue: min,
            threshold,
            scale,
        }
    }

    pub fn is_positive_definite(&self, tol: &Tolerance) -> bool {
        self.positive_definiteness(tol).verdict
    }

    /// Negativity of the form on tuples with `Σ x_i = 0`, decided on the
    /// compression by the differences `e_i − e_n`.
    pub fn conditional_negativity(&self, tol: &Tolerance) -> Result<Definiteness> {
        let n = self.len();
        if n < 2 {
            return Err(Error::TooFewPoints { needed: 2, found: n });
        }
        let scale_entries = self.max_abs();
        let defect = self.hermitian_defect();
        if defect > tol.threshold(scale_entries) {
            return Err(Error::NotHermitian { defect });
        }
        let m = self.assembled();
        let d = self.module_dim();
        let last = (n - 1) * d;
        let tail = m.view((last, last), (d, d)).into_owned();
        let mut c = CMatrix::zeros(last, last);
        for a in 0..n - 1 {
            for b in 0..n - 1 {
                let block = m.view((a * d, b * d), (d, d)) - m.view((a * d, last), (d, d))
                    - m.view((last, b * d), (d, d))
                    + &tail;
                c.view_mut((a * d, b * d), (d, d)).copy_from(&block);
            }
        }
        let eig = dense::hermitian_eigenvalues(&c);
        let radius = eig.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()));
        let scale = radius.max(dense::max_abs(&m));
        let threshold = tol.threshold(scale);
        let max = eig.last().copied().unwrap_or(0.0);
        Ok(Definiteness {
            verdict: max <= threshold,
            extremal_eigenvalue: max,
            threshold,
            scale,
        })
    }

    pub fn is_conditionally_negative_definite(&self, tol: &Tolerance) -> Result<bool> {
        Ok(self.conditional_negativity(tol)?.verdict)
    }
}

/// An `A`-valued kernel `[k_ij]` on labelled points, positive when
/// `Σ a_i* k_ij a_j ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraKernel {
    shape: AlgebraShape,
    points: Vec<String>,
    entries: Vec<AlgebraElement>,
}

impl AlgebraKernel {
    pub fn new(points: Vec<String>, entries: Vec<Vec<AlgebraElement>>) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::TooFewPoints { needed: 1, found: 0 });
        }
        let shape = entries
            .first()
            .and_then(|r| r.first())
            .map(|a| a.shape().clone())
            .ok_or(Error::DimensionMismatch {
                context: "algebra kernel entries",
                expected: n,
                found: 0,
            })?;
        let mut flat = Vec::with_capacity(n * n);
        if entries.len() != n {
            return Err(Error::DimensionMismatch {
                context: "algebra kernel rows",
                expected: n,
                found: entries.len(),
            });
        }
        for row in entries {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "algebra kernel columns",
                    expected: n,
                    found: row.len(),
                });
            }
            for a in row {
                shape.check_same(a.shape())?;
                flat.push(a);
            }
        }
        Ok(AlgebraKernel {
            shape,
            points,
            entries: flat,
        })
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn entry(&self, i: usize, j: usize) -> &AlgebraElement {
        &self.entries[i * self.len() + j]
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(AlgebraElement::max_abs).fold(0.0, f64::max)
    }

    /// The same data as a kernel into `L(A)`, identifying `t` with left
    /// multiplication: `K(s_i, s_j) = l_{k_ji}`.
    pub fn to_kernel_sample(&self) -> KernelSample {
        KernelSample::from_fn(self.points.clone(), |i, j| {
            Ok(ModuleOperator::left_mult(self.entry(j, i)))
        })
        .expect("entries share a shape")
    }

    pub fn is_hermitian(&self, tol: &Tolerance) -> bool {
        self.to_kernel_sample().is_hermitian(tol)
    }

    pub fn positive_definiteness(&self, tol: &Tolerance) -> Definiteness {
        self.to_kernel_sample().positive_definiteness(tol)
    }

    pub fn is_positive_definite(&self, tol: &Tolerance) -> bool {
        self.positive_definiteness(tol).verdict
    }

    pub fn conditional_negativity(&self, tol: &Tolerance) -> Result<Definiteness> {
        self.to_kernel_sample().conditional_negativity(tol)
    }

    pub fn is_conditionally_negative_definite(&self, tol: &Tolerance) -> Result<bool> {
        Ok(self.conditional_negativity(tol)?.verdict)
    }
}

fn owned(points: &[String]) -> Vec<String> {
    points.to_vec()
}

fn check_psd_scalar(kappa: &CMatrix, n: usize, tol: &Tolerance) -> Result<()> {
    if kappa.nrows() != n || kappa.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "scalar kernel matrix",
            expected: n,
            found: kappa.nrows(),
        });
    }
    let defect = dense::max_abs_diff(kappa, &kappa.adjoint());
    if defect > tol.threshold(dense::max_abs(kappa)) {
        return Err(Error::NotHermitian { defect });
    }
    let eig = dense::hermitian_eigenvalues(kappa);
    let scale = eig.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()));
    let min = eig.first().copied().unwrap_or(0.0);
    if min < -tol.threshold(scale) {
        return Err(Error::NotPositive { min_eigenvalue: min });
    }
    Ok(())
}

/// `K(s,t) = f(t) ⊗ f(s)`.
pub fn gen_rank_one(f: &PointFamily, points: &[String]) -> Result<KernelSample> {
    let vals = points.iter().map(|p| f.get(p)).collect::<Result<Vec<_>>>()?;
    KernelSample::from_fn(owned(points), |i, j| ModuleOperator::rank_one(vals[j], vals[i]))
}

/// `K(s,t) = l_{⟨F(t), F(s)⟩}` on the rank-one module `A`.
pub fn gen_left_mult_gram(f: &PointFamily, points: &[String]) -> Result<KernelSample> {
    let vals = points.iter().map(|p| f.get(p)).collect::<Result<Vec<_>>>()?;
    KernelSample::from_fn(owned(points), |i, j| {
        Ok(ModuleOperator::left_mult(&vals[j].inner(vals[i])?))
    })
}

/// `K(s_i, s_j) = κ_ij · I` for a positive semidefinite scalar matrix `κ`.
pub fn gen_scalar_lift(
    kappa: &CMatrix,
    points: &[String],
    shape: &AlgebraShape,
    rank: usize,
    tol: &Tolerance,
) -> Result<KernelSample> {
    check_psd_scalar(kappa, points.len(), tol)?;
    KernelSample::from_fn(owned(points), |i, j| {
        Ok(ModuleOperator::scalar(shape, rank, kappa[(i, j)]))
    })
}

/// `K(s_i, s_j) = l_{κ_ij a_j* a_i}`: the Schur product of a scalar positive
/// kernel with the positive kernel `l_{a_t* a_s}`.
pub fn gen_scaled_family(
    kappa: &CMatrix,
    a: &AlgebraFamily,
    points: &[String],
    tol: &Tolerance,
) -> Result<KernelSample> {
    check_psd_scalar(kappa, points.len(), tol)?;
    let vals = points
        .iter()
        .map(|p| a.get(p).ok_or_else(|| Error::UnknownPoint(p.clone())))
        .collect::<Result<Vec<_>>>()?;
    KernelSample::from_fn(owned(points), |i, j| {
        let c = vals[j].adjoint().checked_mul(vals[i])?.scale(kappa[(i, j)]);
        Ok(ModuleOperator::left_mult(&c))
    })
}

/// `K(s_i, s_j) = Σ_p W^p_j (W^p_i)*` where `factors[p][i] = W^p_{s_i}`.
pub fn gen_gram(points: &[String], factors: &[Vec<ModuleOperator>]) -> Result<KernelSample> {
    let n = points.len();
    let first = factors
        .first()
        .and_then(|f| f.first())
        .ok_or_else(|| Error::Precondition("gram kernel needs at least one factor".into()))?;
    for f in factors {
        if f.len() != n {
            return Err(Error::DimensionMismatch {
                context: "gram factor family",
                expected: n,
                found: f.len(),
            });
        }
    }
    let (shape, rank) = (first.shape().clone(), first.rank());
    KernelSample::from_fn(owned(points), |i, j| {
        let mut acc = ModuleOperator::zeros(&shape, rank);
        for f in factors {
            acc = acc.checked_add(&f[j].compose(&f[i].adjoint())?)?;
        }
        Ok(acc)
    })
}

fn check_len<T>(points: &[String], v: &[T], context: &'static str) -> Result<()> {
    if v.len() != points.len() {
        return Err(Error::DimensionMismatch {
            context,
            expected: points.len(),
            found: v.len(),
        });
    }
    Ok(())
}

/// `L(s_i, s_j) = c_i + c_j*`, conditionally negative definite for any `c`.
pub fn gen_additive(points: &[String], c: &[ModuleOperator]) -> Result<KernelSample> {
    check_len(points, c, "additive kernel operators")?;
    KernelSample::from_fn(owned(points), |i, j| c[i].checked_add(&c[j].adjoint()))
}

/// `L(s_i, s_j) = |X_i − X_j|²`, conditionally negative definite when every
/// `X_i* X_j` is self-adjoint. Values are made exactly self-adjoint.
pub fn gen_distance(points: &[String], x: &[ModuleOperator]) -> Result<KernelSample> {
    check_len(points, x, "distance kernel operators")?;
    KernelSample::from_fn(owned(points), |i, j| {
        let d = x[i].checked_sub(&x[j])?;
        Ok(d.adjoint().compose(&d)?.hermitian_part())
    })
}

/// `[|x_i − x_j|²]` for module elements, as a kernel on the rank-one module.
pub fn gen_element_distance(f: &PointFamily, points: &[String]) -> Result<KernelSample> {
    let vals = points.iter().map(|p| f.get(p)).collect::<Result<Vec<_>>>()?;
    KernelSample::from_fn(owned(points), |i, j| {
        let d = vals[j].checked_sub(vals[i])?;
        Ok(ModuleOperator::left_mult(&d.abs_sq().hermitian_part()))
    })
}

/// `K̃((x,s),(y,t)) = ⟨K(s,t)x, y⟩` on the probe list.
pub fn flatten_kernel(k: &KernelSample, probes: &[(ModuleElement, String)]) -> Result<AlgebraKernel> {
    let idx = probes
        .iter()
        .map(|(x, s)| {
            if x.shape() != k.shape() || x.rank() != k.rank() {
                return Err(Error::DimensionMismatch {
                    context: "probe module rank",
                    expected: k.rank(),
                    found: x.rank(),
                });
            }
            k.index_of(s)
        })
        .collect::<Result<Vec<_>>>()?;
    let labels = probes
        .iter()
        .enumerate()
        .map(|(p, (_, s))| format!("{p}:{s}"))
        .collect();
    let entries = (0..probes.len())
        .map(|i| {
            (0..probes.len())
                .map(|j| {
                    let kx = k.op(idx[i], idx[j]).apply(&probes[i].0)?;
                    kx.inner(&probes[j].0)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    AlgebraKernel::new(labels, entries)
}
