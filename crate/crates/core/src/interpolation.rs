//! Interpolation in a reproducing kernel module: which targets `y_i` at
//! distinct points can be hit by a member of the module, the interpolant of
//! least norm, and bounded extension of a function dominated by the kernel.

use std::collections::HashSet;
use std::sync::Arc;

use crate::algebra::{AlgebraElement, Tolerance};
use crate::dense::{self, CMatrix, CVector, C64};
use crate::error::{Error, Result};
use crate::factorization::{douglas_solve, pseudo_inverse, range_test, DenseOperator, Space};
use crate::kernel::{KernelSample, PointFamily};
use crate::module::ModuleElement;
use crate::random::Sampler;
use crate::rkhm::{membership_gap, Rkhm, RkhmElement, Term};

/// Targets `y_i` at distinct points `s_i` of a positive definite kernel.
#[derive(Clone, Debug)]
pub struct InterpolationProblem {
    kernel: Arc<KernelSample>,
    targets: Vec<(String, ModuleElement)>,
}

impl InterpolationProblem {
    pub fn new(kernel: Arc<KernelSample>, targets: Vec<(String, ModuleElement)>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (s, y) in &targets {
            kernel.index_of(s)?;
            if !seen.insert(s.as_str()) {
                return Err(Error::DuplicatePoint(s.clone()));
            }
            kernel.shape().check_same(y.shape())?;
            if y.rank() != kernel.rank() {
                return Err(Error::DimensionMismatch {
                    context: "module rank of a target",
                    expected: kernel.rank(),
                    found: y.rank(),
                });
            }
        }
        Ok(InterpolationProblem { kernel, targets })
    }

    pub fn kernel(&self) -> &Arc<KernelSample> {
        &self.kernel
    }

    pub fn targets(&self) -> &[(String, ModuleElement)] {
        &self.targets
    }

    pub fn points(&self) -> Vec<String> {
        self.targets.iter().map(|(s, _)| s.clone()).collect()
    }

    /// `(y_1, …, y_n)` stacked.
    pub fn stacked_targets(&self) -> CVector {
        let d = self.kernel.module_dim();
        let mut v = CVector::zeros(self.targets.len() * d);
        for (i, (_, y)) in self.targets.iter().enumerate() {
            v.rows_mut(i * d, d).copy_from(&y.vectorize());
        }
        v
    }

    /// `(K(s_j, s_i))` over the constrained points.
    pub fn gram(&self) -> Result<CMatrix> {
        Ok(self.kernel.restrict(&self.points())?.assembled())
    }
}

/// Null-space perturbations `f + n` compared against `f`.
#[derive(Clone, Debug, PartialEq)]
pub struct MinimalityCertificate {
    pub null_dim: usize,
    pub perturbations: usize,
    /// Smallest `‖f + n‖ − ‖f‖` seen.
    pub worst_gap: f64,
    pub certified: bool,
}

#[derive(Clone, Debug)]
pub struct InterpolationResult {
    pub feasible: bool,
    pub f: Option<RkhmElement>,
    /// `‖⟨f, f⟩‖^{1/2}`, zero when infeasible.
    pub norm: f64,
    /// Range-test residual for feasibility questions; for bounded extension,
    /// the worst `‖h(s_i) − f(s_i)‖`.
    pub residual: f64,
    /// Worst `‖f(s_i) − y_i‖` of the returned interpolant.
    pub evaluation_defect: f64,
    pub minimality: Option<MinimalityCertificate>,
    /// Least `λ` with `AA* ⪯ λ δ_F δ_F*` in the bounded extension.
    pub lambda_min: Option<f64>,
}

/// `δ_F` on the orthonormal coordinates of the module.
pub fn multi_evaluation(rkhm: &Rkhm, points: &[String]) -> Result<DenseOperator> {
    rkhm.evaluation_operator(points)
}

/// Whether `(y_i)` lies in the range of `(K(s_j, s_i))`, with the residual.
pub fn interpolation_exists(p: &InterpolationProblem, tol: &Tolerance) -> Result<(bool, f64)> {
    if p.targets.is_empty() {
        return Ok((true, 0.0));
    }
    range_test(&DenseOperator::plain(p.gram()?), &p.stacked_targets(), tol)
}

const PERTURBATIONS: usize = 20;

/// `f = Σ K_{c_i, s_i}` with `c = G⁺y`.
pub fn interpolate_min_norm(rkhm: &Rkhm, p: &InterpolationProblem, tol: &Tolerance) -> Result<InterpolationResult> {
    if **rkhm.kernel() != *p.kernel {
        return Err(Error::KernelMismatch);
    }
    let (feasible, residual) = interpolation_exists(p, tol)?;
    if !feasible {
        return Ok(InterpolationResult {
            feasible,
            f: None,
            norm: 0.0,
            residual,
            evaluation_defect: f64::NAN,
            minimality: None,
            lambda_min: None,
        });
    }
    let k = rkhm.kernel();
    let d = k.module_dim();
    let one = AlgebraElement::identity(k.shape());
    let f = if p.targets.is_empty() {
        rkhm.zero()
    } else {
        let g = DenseOperator::plain(p.gram()?);
        let c = pseudo_inverse(&g, tol).matrix() * p.stacked_targets();
        let terms = p
            .targets
            .iter()
            .enumerate()
            .map(|(i, (s, _))| {
                Ok(Term {
                    x: ModuleElement::from_vector(k.shape(), k.rank(), c.rows(i * d, d).as_slice())?,
                    point: k.index_of(s)?,
                    a: one.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        RkhmElement::from_terms(k, terms)?
    };
    let evaluation_defect = evaluation_defect(&f, &p.targets)?;
    let minimality = certify_minimality(rkhm, &f, &p.points(), tol)?;
    Ok(InterpolationResult {
        feasible,
        norm: f.norm(),
        f: Some(f),
        residual,
        evaluation_defect,
        minimality: Some(minimality),
        lambda_min: None,
    })
}

fn evaluation_defect(f: &RkhmElement, targets: &[(String, ModuleElement)]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (s, y) in targets {
        worst = worst.max(f.evaluate(s)?.max_abs_diff(y));
    }
    Ok(worst)
}

/// Compares `‖f‖` with `‖f + n‖` for seeded random `n` in the null space of
/// `δ_F`, scaled to the size of `f`.
fn certify_minimality(rkhm: &Rkhm, f: &RkhmElement, points: &[String], tol: &Tolerance) -> Result<MinimalityCertificate> {
    let z = rkhm.coordinates(f)?;
    let null = if points.is_empty() {
        CMatrix::identity(z.len(), z.len())
    } else {
        let delta = multi_evaluation(rkhm, points)?;
        let eig = dense::hermitian_eigen(&(delta.matrix().adjoint() * delta.matrix()));
        let cutoff = tol.threshold(eig.max().max(0.0));
        let cols: Vec<usize> = (0..eig.values.len()).filter(|&i| eig.values[i] <= cutoff).collect();
        CMatrix::from_fn(z.len(), cols.len(), |i, j| eig.vectors[(i, cols[j])])
    };
    let base = f.norm();
    let mut worst = f64::INFINITY;
    let mut count = 0;
    if null.ncols() > 0 {
        let mut rng = Sampler::new(0x5eed);
        let size = z.norm().max(1.0);
        for _ in 0..PERTURBATIONS {
            let w = CVector::from_fn(null.ncols(), |_, _| rng.complex());
            let n = &null * &w;
            let n = n.scale(size / n.norm().max(f64::MIN_POSITIVE));
            let g = rkhm.from_coordinates(&(&z + n))?;
            worst = worst.min(g.norm() - base);
            count += 1;
        }
    }
    let worst = if count == 0 { 0.0 } else { worst };
    Ok(MinimalityCertificate {
        null_dim: null.ncols(),
        perturbations: count,
        worst_gap: worst,
        certified: worst >= -tol.threshold(base.max(1.0)).sqrt(),
    })
}

/// An `h` in the module with `h(s_i) = f(s_i)` on `F` and `‖⟨h, h⟩‖ ≤ m`,
/// provided `m·K(s,t) − f(t) ⊗ f(s)` is positive definite on the points where
/// `f` is given. `h = C(1)` for the least solution of `A = δ_F C`, where
/// `A(a) = (f(s_i)a)`.
pub fn bounded_extension(
    rkhm: &Rkhm,
    f_values: &PointFamily,
    m: f64,
    points: &[String],
    tol: &Tolerance,
) -> Result<InterpolationResult> {
    if !(m >= 0.0 && m.is_finite()) {
        return Err(Error::Precondition(format!("bound must be finite and non-negative, got {m}")));
    }
    let k = rkhm.kernel();
    let domain: Vec<String> = k.points().iter().filter(|p| f_values.contains(p)).cloned().collect();
    for p in points {
        if !domain.contains(p) {
            return Err(Error::UnknownPoint(p.clone()));
        }
    }
    let gap = membership_gap(f_values, &k.restrict(&domain)?, m)?.positive_definiteness(tol);
    if !gap.verdict {
        return Err(Error::GapNotPositive {
            min_eigenvalue: gap.extremal_eigenvalue,
        });
    }

    let shape = k.shape();
    let (dim_a, d) = (shape.total_dim(), k.module_dim());
    let mut a = CMatrix::zeros(points.len() * d, dim_a);
    for u in 0..dim_a {
        let mut e = vec![C64::new(0.0, 0.0); dim_a];
        e[u] = C64::new(1.0, 0.0);
        let unit = AlgebraElement::from_vector(shape, &e)?;
        for (i, p) in points.iter().enumerate() {
            let v = f_values.get(p)?.right_mul(&unit)?.vectorize();
            a.view_mut((i * d, u), (d, 1)).copy_from(&v);
        }
    }
    let a = DenseOperator::new(
        a,
        Space::Algebra(shape.clone()),
        Space::Module {
            shape: shape.clone(),
            rank: k.rank(),
            copies: points.len(),
        },
    )?;
    let b = multi_evaluation(rkhm, points)?;
    let sol = douglas_solve(&a, &b, tol)?;
    let z = sol.c.apply(&AlgebraElement::identity(shape).vectorize())?;
    let h = rkhm.from_coordinates(&z)?;
    let targets: Vec<(String, ModuleElement)> = points
        .iter()
        .map(|p| Ok((p.clone(), f_values.get(p)?.clone())))
        .collect::<Result<_>>()?;
    let defect = evaluation_defect(&h, &targets)?;
    Ok(InterpolationResult {
        feasible: true,
        norm: h.norm(),
        f: Some(h),
        residual: defect,
        evaluation_defect: defect,
        minimality: None,
        lambda_min: Some(sol.lambda_min),
    })
}
