//! Relative reproducing kernels `D_{x,s,t}`, which reproduce differences
//! `⟨f(s) − f(t), x⟩` rather than point values, and the way back from
//! relative data to an honest reproducing kernel.
//!
//! At finite sample size every functional is bounded and every module is
//! self-dual, so the unbounded functional that can separate the two notions
//! in general is here just evaluation at the base point.

use std::sync::Arc;

use crate::algebra::{AlgebraElement, Tolerance};
use crate::dense::{self, CMatrix, CVector};
use crate::error::{Error, Result};
use crate::factorization::{pseudo_inverse, DenseOperator};
use crate::kernel::KernelSample;
use crate::module::{ModuleElement, ModuleOperator};
use crate::rkhm::{Rkhm, RkhmElement};

/// `D_{x,s,t} = K_{x,s} − K_{x,t}` over the module of a positive definite kernel.
#[derive(Clone, Debug)]
pub struct RelativeKernel {
    rkhm: Arc<Rkhm>,
}

pub fn relative_from_kernel(k: KernelSample, tol: &Tolerance) -> Result<RelativeKernel> {
    Ok(RelativeKernel::from_rkhm(Arc::new(Rkhm::new(k, *tol)?)))
}

impl RelativeKernel {
    pub fn from_rkhm(rkhm: Arc<Rkhm>) -> Self {
        RelativeKernel { rkhm }
    }

    pub fn rkhm(&self) -> &Arc<Rkhm> {
        &self.rkhm
    }

    pub fn kernel(&self) -> &KernelSample {
        self.rkhm.kernel()
    }

    pub fn d(&self, x: &ModuleElement, s: &str, t: &str) -> Result<RkhmElement> {
        self.rkhm.generator(x, s)?.checked_sub(&self.rkhm.generator(x, t)?)
    }

    /// `‖⟨f(s) − f(t), x⟩ − ⟨f, D_{x,s,t}⟩‖`.
    pub fn rrk_defect(&self, f: &RkhmElement, x: &ModuleElement, s: &str, t: &str) -> Result<f64> {
        let lhs = f.evaluate(s)?.checked_sub(&f.evaluate(t)?)?.inner(x)?;
        Ok(lhs.max_abs_diff(&f.inner(&self.d(x, s, t)?)?))
    }

    /// `‖z_e‖ = (tr⟨e, e⟩)^{1/2}`, an upper bound for `‖e‖` that stays
    /// linear in the coefficients, so exact cancellations read as zero.
    pub fn residual_norm(&self, e: &RkhmElement) -> Result<f64> {
        Ok(self.rkhm.coordinates(e)?.norm())
    }

    fn basis(&self) -> Vec<ModuleElement> {
        let k = self.kernel();
        (0..k.rank()).map(|i| ModuleElement::basis(k.shape(), k.rank(), i)).collect()
    }

    /// `max ‖⟨f, D_{e_i,s,s₁}⟩‖` over basis vectors and points: zero exactly
    /// when `f` pairs trivially with every relative generator.
    pub fn orthogonality_residual(&self, f: &RkhmElement) -> Result<f64> {
        let points = self.kernel().points();
        let mut worst: f64 = 0.0;
        for x in self.basis() {
            for s in &points[1..] {
                worst = worst.max(f.inner(&self.d(&x, s, &points[0])?)?.max_abs());
            }
        }
        Ok(worst)
    }

    /// `max ‖f(s) − f(s₁)‖`, zero exactly for functions constant on the sample.
    pub fn variation(&self, f: &RkhmElement) -> Result<f64> {
        let first = f.evaluate_at(0);
        Ok((1..self.kernel().len())
            .map(|i| f.evaluate_at(i).max_abs_diff(&first))
            .fold(0.0, f64::max))
    }
}

/// `φ(x, f) = ⟨f(s₀), x⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhiFunctional {
    base_point: String,
}

impl PhiFunctional {
    pub fn base_point(&self) -> &str {
        &self.base_point
    }

    pub fn apply(&self, x: &ModuleElement, f: &RkhmElement) -> Result<AlgebraElement> {
        f.evaluate(&self.base_point)?.inner(x)
    }
}

/// `⟨f(s), x⟩ = ⟨f, h_{x,s}⟩ + φ(x, f)` with `h_{x,s} = D_{x,s,s₀}`.
#[derive(Clone, Debug)]
pub struct Decomposition<'a> {
    relative: &'a RelativeKernel,
    phi: PhiFunctional,
}

pub fn decompose<'a>(r: &'a RelativeKernel, s0: &str) -> Result<Decomposition<'a>> {
    r.kernel().index_of(s0)?;
    Ok(Decomposition {
        relative: r,
        phi: PhiFunctional {
            base_point: s0.to_string(),
        },
    })
}

impl Decomposition<'_> {
    pub fn base_point(&self) -> &str {
        self.phi.base_point()
    }

    pub fn phi(&self) -> &PhiFunctional {
        &self.phi
    }

    pub fn h(&self, x: &ModuleElement, s: &str) -> Result<RkhmElement> {
        self.relative.d(x, s, self.base_point())
    }

    /// `‖⟨f(s), x⟩ − ⟨f, h_{x,s}⟩ − φ(x, f)‖`.
    pub fn defect(&self, f: &RkhmElement, x: &ModuleElement, s: &str) -> Result<f64> {
        let lhs = f.evaluate(s)?.inner(x)?;
        let rhs = &f.inner(&self.h(x, s)?)? + &self.phi.apply(x, f)?;
        Ok(lhs.max_abs_diff(&rhs))
    }

    /// `‖D_{x,s,t} − (h_{x,s} − h_{x,t})‖`.
    pub fn mh_defect(&self, x: &ModuleElement, s: &str, t: &str) -> Result<f64> {
        let hh = self.h(x, s)?.checked_sub(&self.h(x, t)?)?;
        self.relative.residual_norm(&self.relative.d(x, s, t)?.checked_sub(&hh)?)
    }
}

/// A kernel rebuilt from relative data as `K(s,t)x = h_{x,s}(t) + ψ_x(t)`,
/// with `ψ_x` the Riesz representative of `f ↦ ⟨x, f(s₀)⟩`.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub kernel: KernelSample,
    /// `ψ_{e_l}` for the standard basis of the module.
    pub riesz: Vec<RkhmElement>,
    /// Residual of the Riesz system relative to its right-hand side.
    pub riesz_residual: f64,
    /// Worst `‖⟨f(s),x⟩ − ⟨f, h_{x,s} + ψ_x⟩‖` over module generators `f`.
    pub reproducing_defect: f64,
    /// Worst `‖D_{x,s,t} − (K'_{x,s} − K'_{x,t})‖`.
    pub difference_defect: f64,
}

pub fn reconstruct_kernel(r: &RelativeKernel, s0: &str, tol: &Tolerance) -> Result<Reconstruction> {
    let rkhm = r.rkhm();
    let k = r.kernel();
    let b = k.index_of(s0)?;
    let (n, d) = (k.len(), k.module_dim());
    let dec = decompose(r, s0)?;

    // Gram matrix of all generators K_{u,s}, u a dense unit vector.
    let z = rkhm.generator_coordinates();
    let gram = z.adjoint() * &z;
    let ginv = pseudo_inverse(&DenseOperator::plain(gram.clone()), tol);

    // g(s₀) for every generator g, as columns.
    let mut at_base = CMatrix::zeros(d, n * d);
    for p in 0..n * d {
        let u = unit(k, p % d)?;
        let g = RkhmElement::generator(rkhm.kernel(), &u, &k.points()[p / d])?;
        at_base.set_column(p, &g.evaluate_at(b).vectorize());
    }

    let mut riesz = Vec::with_capacity(k.rank());
    let mut columns = Vec::with_capacity(k.rank());
    let mut riesz_residual: f64 = 0.0;
    for x in &r.basis() {
        // tr⟨ψ, g⟩ = tr⟨x, g(s₀)⟩ for every generator g.
        let rhs: CVector = at_base.adjoint() * x.vectorize();
        let c = ginv.matrix() * &rhs;
        let res = (&gram * &c - &rhs).norm();
        let rel = res / rhs.norm().max(dense::max_abs(&gram)).max(f64::MIN_POSITIVE);
        if res > tol.threshold(rhs.norm().max(dense::max_abs(&gram))) {
            return Err(Error::DegenerateSpan { residual: rel });
        }
        riesz_residual = riesz_residual.max(if rhs.norm() > 0.0 { res / rhs.norm() } else { 0.0 });
        let coeffs = (0..n)
            .map(|i| ModuleElement::from_vector(k.shape(), k.rank(), c.rows(i * d, d).as_slice()))
            .collect::<Result<Vec<_>>>()?;
        let psi = RkhmElement::from_coefficients(rkhm.kernel(), &coeffs)?;
        // Column l of K(s,t) is h_{e_l,s}(t) + ψ_{e_l}(t).
        let col: Vec<Vec<ModuleElement>> = k
            .points()
            .iter()
            .map(|s| {
                let h = dec.h(x, s)?;
                Ok((0..n)
                    .map(|t| h.evaluate_at(t).checked_add(&psi.evaluate_at(t)).expect("same layout"))
                    .collect())
            })
            .collect::<Result<_>>()?;
        columns.push(col);
        riesz.push(psi);
    }

    let kernel = KernelSample::from_fn(k.points().to_vec(), |i, j| {
        let rank = k.rank();
        let mut entries = Vec::with_capacity(rank * rank);
        for row in 0..rank {
            for col in columns.iter() {
                entries.push(col[i][j].coords()[row].clone());
            }
        }
        ModuleOperator::from_entries(k.shape(), rank, entries)
    })?;

    // K'_{x,s} = h_{x,s} + ψ_x as an element of the module.
    let rebuilt = |l: usize, x: &ModuleElement, s: &str| -> Result<RkhmElement> { dec.h(x, s)?.checked_add(&riesz[l]) };
    let basis = r.basis();
    let mut reproducing_defect: f64 = 0.0;
    let mut difference_defect: f64 = 0.0;
    for (l, x) in basis.iter().enumerate() {
        for s in k.points() {
            let ks = rebuilt(l, x, s)?;
            for q in k.points() {
                for y in &basis {
                    let f = rkhm.generator(y, q)?;
                    let lhs = f.evaluate(s)?.inner(x)?;
                    reproducing_defect = reproducing_defect.max(lhs.max_abs_diff(&f.inner(&ks)?));
                }
                let diff = ks.checked_sub(&rebuilt(l, x, q)?)?;
                difference_defect = difference_defect.max(r.residual_norm(&r.d(x, s, q)?.checked_sub(&diff)?)?);
            }
        }
    }

    Ok(Reconstruction {
        kernel,
        riesz,
        riesz_residual,
        reproducing_defect,
        difference_defect,
    })
}

fn unit(k: &KernelSample, m: usize) -> Result<ModuleElement> {
    let mut v = vec![dense::ZERO; k.module_dim()];
    v[m] = dense::ONE;
    ModuleElement::from_vector(k.shape(), k.rank(), &v)
}
