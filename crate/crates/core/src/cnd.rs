//! Passing between conditionally negative definite and positive definite
//! kernels through a base point, plus the scalarization and Schoenberg
//! embedding of normalized symmetric CND kernels.

use std::sync::Arc;

use crate::algebra::{AlgebraElement, Tolerance};
use crate::error::{Error, Result};
use crate::kernel::{AlgebraKernel, KernelSample};
use crate::module::{ModuleElement, ModuleOperator};
use crate::rkhm::{Rkhm, RkhmElement};

/// `K(s,t) = ½[L(s,s₀) + L(s₀,t) − L(s,t) − L(s₀,s₀)]` together with the
/// correction `ψ(s) = ½L(s,s) + i·Im L(s,s₀)` that recovers `L`.
#[derive(Clone, Debug, PartialEq)]
pub struct CndTransform {
    pub kernel: KernelSample,
    pub base_point: String,
    /// Aligned with `kernel.points()`.
    pub psi: Vec<ModuleOperator>,
}

impl CndTransform {
    pub fn psi_at(&self, s: &str) -> Result<&ModuleOperator> {
        Ok(&self.psi[self.kernel.index_of(s)?])
    }

    pub fn psi_norm(&self) -> f64 {
        self.psi.iter().map(ModuleOperator::norm).fold(0.0, f64::max)
    }

    /// True when every `ψ(s)` is exactly zero.
    pub fn psi_vanishes(&self) -> bool {
        self.psi.iter().all(|p| p.max_abs() == 0.0)
    }
}

/// Computed whether or not `L` is CND, so that both directions of the
/// equivalence can be observed.
pub fn cnd_to_pd(l: &KernelSample, s0: &str, tol: &Tolerance) -> Result<CndTransform> {
    let defect = l.hermitian_defect();
    if defect > tol.threshold(l.max_abs()) {
        return Err(Error::NotHermitian { defect });
    }
    let b = l.index_of(s0)?;
    let l00 = l.op(b, b);
    let kernel = KernelSample::from_fn(l.points().to_vec(), |i, j| {
        let sum = &(&(l.op(i, b) + l.op(b, j)) - l.op(i, j)) - l00;
        Ok(sum.scale_real(0.5))
    })?;
    let psi = (0..l.len())
        .map(|i| {
            let t = l.op(i, b);
            // i·Im T = (T − T*)/2
            let skew = (t - &t.adjoint()).scale_real(0.5);
            &l.op(i, i).scale_real(0.5) + &skew
        })
        .collect();
    Ok(CndTransform {
        kernel,
        base_point: s0.to_string(),
        psi,
    })
}

/// `L(s,t) = K(s,s) + K(t,t) − 2K(s,t) + ψ(s) + ψ(t)*`.
pub fn pd_to_cnd_reconstruct(r: &CndTransform) -> Result<KernelSample> {
    let k = &r.kernel;
    if r.psi.len() != k.len() {
        return Err(Error::DimensionMismatch {
            context: "correction terms",
            expected: k.len(),
            found: r.psi.len(),
        });
    }
    KernelSample::from_fn(k.points().to_vec(), |i, j| {
        let diag = k.op(i, i) + k.op(j, j);
        let corr = &r.psi[i] + &r.psi[j].adjoint();
        Ok(&(&diag - &k.op(i, j).scale_real(2.0)) + &corr)
    })
}

fn check_self_adjoint_values(l: &KernelSample, tol: &Tolerance) -> Result<()> {
    let scale = l.max_abs();
    for i in 0..l.len() {
        for j in 0..l.len() {
            let op = l.op(i, j);
            let defect = op.max_abs_diff(&op.adjoint());
            if defect > tol.threshold(scale) {
                return Err(Error::NotHermitian { defect });
            }
        }
    }
    Ok(())
}

/// The `A`-valued kernel `⟨L(s,t)x, x⟩`.
pub fn scalarize(l: &KernelSample, x: &ModuleElement, tol: &Tolerance) -> Result<AlgebraKernel> {
    check_self_adjoint_values(l, tol)?;
    l.shape().check_same(x.shape())?;
    if x.rank() != l.rank() {
        return Err(Error::DimensionMismatch {
            context: "module rank of the probe",
            expected: l.rank(),
            found: x.rank(),
        });
    }
    let entries: Vec<Vec<AlgebraElement>> = (0..l.len())
        .map(|i| (0..l.len()).map(|j| l.op(i, j).apply_unchecked(x).inner_unchecked(x)).collect())
        .collect();
    AlgebraKernel::new(l.points().to_vec(), entries)
}

/// `θ(x,s) = K_{x,s}` in the module of the transformed kernel, so that
/// `⟨L(s,t)x, x⟩ = |θ(x,s) − θ(x,t)|²`.
#[derive(Debug)]
pub struct SchoenbergEmbedding {
    cnd: Arc<KernelSample>,
    rkhm: Rkhm,
    base_point: String,
}

impl SchoenbergEmbedding {
    pub fn rkhm(&self) -> &Rkhm {
        &self.rkhm
    }

    pub fn base_point(&self) -> &str {
        &self.base_point
    }

    pub fn theta(&self, x: &ModuleElement, s: &str) -> Result<RkhmElement> {
        self.rkhm.generator(x, s)
    }

    /// `‖⟨L(s,t)x, x⟩ − |θ(x,s) − θ(x,t)|²‖`.
    pub fn defect(&self, x: &ModuleElement, s: &str, t: &str) -> Result<f64> {
        let lhs = self.cnd.op_at(s, t)?.apply(x)?.inner(x)?;
        let d = self.theta(x, s)?.checked_sub(&self.theta(x, t)?)?;
        Ok(lhs.max_abs_diff(&d.inner(&d)?))
    }

    /// Largest defect over every pair of points for each probe.
    pub fn max_defect(&self, probes: &[ModuleElement]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for x in probes {
            for s in self.cnd.points() {
                for t in self.cnd.points() {
                    worst = worst.max(self.defect(x, s, t)?);
                }
            }
        }
        Ok(worst)
    }
}

pub fn schoenberg_embedding(l: &KernelSample, s0: &str, tol: &Tolerance) -> Result<SchoenbergEmbedding> {
    if !l.is_normalized(tol) {
        return Err(Error::Precondition("kernel is not normalized".into()));
    }
    if !l.is_symmetric(tol) {
        return Err(Error::Precondition("kernel is not symmetric".into()));
    }
    let cnd = l.conditional_negativity(tol)?;
    if !cnd.verdict {
        return Err(Error::Precondition(format!(
            "kernel is not conditionally negative definite (largest compressed eigenvalue {:.3e})",
            cnd.extremal_eigenvalue
        )));
    }
    let t = cnd_to_pd(l, s0, tol)?;
    Ok(SchoenbergEmbedding {
        cnd: Arc::new(l.clone()),
        rkhm: Rkhm::new(t.kernel, *tol)?,
        base_point: s0.to_string(),
    })
}
