//! Seeded randomized suites exercising the main identities end to end, each
//! against an oracle that does not share the code path it checks.

use indexmap::IndexMap;

use crate::algebra::{AlgebraShape, Tolerance};
use crate::cnd::{cnd_to_pd, pd_to_cnd_reconstruct, schoenberg_embedding};
use crate::dense::{self, CMatrix, CVector};
use crate::error::{Error, Result};
use crate::factorization::{douglas_solve, DenseOperator};
use crate::interpolation::{bounded_extension, interpolate_min_norm, interpolation_exists, InterpolationProblem};
use crate::kernel::{KernelSample, PointFamily};
use crate::module::{ModuleElement, ModuleOperator};
use crate::random::Sampler;
use crate::relative::{decompose, reconstruct_kernel, relative_from_kernel};
use crate::report::Report;
use crate::rkhm::{membership_gap, Rkhm, RkhmElement, Term};
use std::sync::Arc;

pub const DEFAULT_SEED: u64 = 20240531;

#[derive(Clone, Debug, PartialEq)]
pub struct SelftestConfig {
    pub seed: u64,
    /// Fixed sample size; drawn per case when absent.
    pub points: Option<usize>,
    /// Fixed module rank; drawn per case when absent.
    pub rank: Option<usize>,
    /// Base case count; the heavier suites run half as many.
    pub cases: usize,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        SelftestConfig {
            seed: DEFAULT_SEED,
            points: None,
            rank: None,
            cases: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOutcome {
    /// Position in the suite order, starting at 1.
    pub index: u8,
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    pub metrics: IndexMap<String, f64>,
    /// First few failing cases, for diagnostics.
    pub failures: Vec<String>,
}

impl SuiteOutcome {
    fn new(index: u8, name: &'static str) -> Self {
        SuiteOutcome {
            index,
            name,
            passed: true,
            cases: 0,
            metrics: IndexMap::new(),
            failures: Vec::new(),
        }
    }

    fn fail(&mut self, msg: String) {
        self.passed = false;
        if self.failures.len() < 5 {
            self.failures.push(msg);
        }
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.fail(msg());
        }
    }

    fn max(&mut self, key: &str, v: f64) {
        let e = self.metrics.entry(key.to_string()).or_insert(0.0);
        *e = e.max(v);
    }

    fn count(&mut self, key: &str) {
        *self.metrics.entry(key.to_string()).or_insert(0.0) += 1.0;
    }

    /// Runs one case, turning an unexpected error into a failure.
    fn run(&mut self, case: usize, f: impl FnOnce(&mut Self) -> Result<()>) {
        self.cases += 1;
        if let Err(e) = f(self) {
            self.fail(format!("case {case}: unexpected error: {e}"));
        }
    }

    pub fn label(&self) -> String {
        self.name.to_string()
    }
}

struct Dims {
    shape: AlgebraShape,
    rank: usize,
    n: usize,
}

/// Desk-scale dimensions: `Σd_j ≤ 4`, rank ≤ 2, assembled size kept small.
fn dims(rng: &mut Sampler, cfg: &SelftestConfig, min_points: usize) -> Dims {
    loop {
        let shape = rng.shape(4, 2);
        let rank = cfg.rank.unwrap_or_else(|| 1 + rng.index(2));
        let n = cfg.points.unwrap_or_else(|| min_points + rng.index(6 - min_points.min(5)));
        let n = n.max(min_points);
        if n * rank * shape.total_dim() <= 96 || cfg.points.is_some() || cfg.rank.is_some() {
            return Dims { shape, rank, n };
        }
    }
}

/// An element with between one and `max_terms` generator terms.
fn random_element(rng: &mut Sampler, k: &Arc<KernelSample>, max_terms: usize) -> Result<RkhmElement> {
    let count = 1 + rng.index(max_terms);
    let terms = (0..count)
        .map(|_| Term {
            x: rng.module_element(k.shape(), k.rank()),
            point: rng.index(k.len()),
            a: rng.algebra_element(k.shape()),
        })
        .collect();
    RkhmElement::from_terms(k, terms)
}

/// `β = 1 + ‖L₁₁ + L₂₂ − L₁₂ − L₂₁‖` added to `L(s₁,s₁)` makes the quadratic
/// form positive on `(u, −u, 0, …)`.
pub fn break_conditional_negativity(l: &KernelSample) -> KernelSample {
    let m = &(&(l.op(0, 0) + l.op(1, 1)) - l.op(0, 1)) - l.op(1, 0);
    let bump = ModuleOperator::identity(l.shape(), l.rank()).scale_real(1.0 + m.norm());
    l.map(|i, j, op| if i == 0 && j == 0 { op + &bump } else { op.clone() })
}

pub fn definiteness_equivalence(cfg: &SelftestConfig, rng: &mut Sampler) -> SuiteOutcome {
    let tol = Tolerance::default().with_rel(1e-8);
    let mut out = SuiteOutcome::new(1, "definiteness_equivalence");
    for case in 0..cfg.cases {
        out.run(case, |out| {
            let d = dims(rng, cfg, 2);
            let mut l = rng.cnd_kernel(&d.shape, d.rank, d.n);
            let broken = case % 2 == 1;
            if broken {
                l = break_conditional_negativity(&l);
            }
            let cnd = l.is_conditionally_negative_definite(&tol)?;
            out.check(cnd != broken, || format!("case {case}: construction says cnd={}, test says {cnd}", !broken));
            for s0 in l.points() {
                let pd = cnd_to_pd(&l, s0, &tol)?.kernel.is_positive_definite(&tol);
                out.count("base_points_checked");
                if pd != cnd {
                    out.count("disagreements");
                    out.fail(format!("case {case}, base {s0}: cnd={cnd} but pd={pd}"));
                }
            }
            Ok(())
        });
    }
    out.metrics.entry("disagreements".into()).or_insert(0.0);
    out
}

/// Kernels from all four generator families, shared by the reproducing and
/// Kolmogorov suites.
fn pd_kernels(cfg: &SelftestConfig, rng: &mut Sampler) -> Vec<KernelSample> {
    (0..cfg.cases)
        .map(|case| {
            let d = dims(rng, cfg, 1);
            rng.pd_kernel_from(case % 4, &d.shape, d.rank, d.n)
        })
        .collect()
}

pub fn reproducing_property(cfg: &SelftestConfig, rng: &mut Sampler, kernels: &[KernelSample]) -> SuiteOutcome {
    let tol = Tolerance::default();
    let mut out = SuiteOutcome::new(2, "reproducing_property");
    for (case, k) in kernels.iter().enumerate() {
        out.run(case, |out| {
            let rkhm = Rkhm::new(k.clone(), tol)?;
            let f = random_element(rng, rkhm.kernel(), 4)?;
            let x = rng.module_element(k.shape(), k.rank());
            let s = k.points()[rng.index(k.len())].clone();
            let defect = rkhm.reproducing_defect(&f, &x, &s)?.norm();
            let bound = 1e-9 * (1.0 + f.norm()) * (1.0 + x.norm());
            out.max("worst_relative_defect", defect / bound * 1e-9);
            out.check(defect <= bound, || format!("case {case}: defect {defect:e} > {bound:e}"));
            Ok(())
        });
    }
    let _ = cfg;
    out
}

pub fn kolmogorov_decomposition(kernels: &[KernelSample]) -> SuiteOutcome {
    let tol = Tolerance::default();
    let mut out = SuiteOutcome::new(3, "kolmogorov_decomposition");
    for (case, k) in kernels.iter().enumerate() {
        out.run(case, |out| {
            let rkhm = Rkhm::new(k.clone(), tol)?;
            let mut worst: f64 = 0.0;
            for s in k.points() {
                for t in k.points() {
                    worst = worst.max(rkhm.kolmogorov_defect(s, t)?);
                }
            }
            let bound = 1e-8 * (1.0 + k.norm());
            out.max("worst_relative_defect", worst / (1.0 + k.norm()));
            out.check(worst <= bound, || format!("case {case}: defect {worst:e} > {bound:e}"));
            Ok(())
        });
    }
    out
}

pub fn reconstruction_identity(cfg: &SelftestConfig, rng: &mut Sampler) -> SuiteOutcome {
    let tol = Tolerance::default();
    let mut out = SuiteOutcome::new(4, "reconstruction_identity");
    for case in 0..cfg.cases {
        out.run(case, |out| {
            let d = dims(rng, cfg, 2);
            match case % 4 {
                0 | 1 => {
                    let l = rng.cnd_kernel(&d.shape, d.rank, d.n);
                    for s0 in l.points() {
                        let back = pd_to_cnd_reconstruct(&cnd_to_pd(&l, s0, &tol)?)?;
                        let rel = back.max_abs_diff(&l) / (1.0 + l.max_abs());
                        out.max("worst_round_trip", rel);
                        out.check(rel <= 1e-9, || format!("case {case}, base {s0}: round trip {rel:e}"));
                    }
                }
                2 => {
                    let l = rng.normalized_symmetric_cnd_kernel(&d.shape, d.rank, d.n);
                    for s0 in l.points() {
                        let t = cnd_to_pd(&l, s0, &tol)?;
                        out.check(t.psi_vanishes(), || format!("case {case}, base {s0}: ψ = {:e}", t.psi_norm()));
                    }
                    out.count("normalized_inputs");
                }
                _ => {
                    let l = rng.normalized_symmetric_cnd_kernel(&d.shape, d.rank, d.n);
                    let l = if rng.coin() {
                        let c = rng.hermitian_operator(&d.shape, d.rank);
                        let c = &c * &c;
                        l.map(|i, j, op| if i == j { op + &c } else { op.clone() })
                    } else {
                        let g = rng.module_operator(&d.shape, d.rank);
                        l.map(|i, j, op| match (i, j) {
                            (1, 0) => op + &g,
                            (0, 1) => op + &g.adjoint(),
                            _ => op.clone(),
                        })
                    };
                    let t = cnd_to_pd(&l, &l.points()[0], &tol)?;
                    let seen = t.psi_norm();
                    out.check(seen > 1e-8 * (1.0 + l.norm()), || format!("case {case}: ψ missed ({seen:e})"));
                    out.count("perturbed_inputs");
                }
            }
            Ok(())
        });
    }
    out
}

/// Least `λ` with `Q*(λBB* − AA*)Q ⪰ 0`, `Q` spanning `ran(BB*)`, bracketed
/// to width `1e-8` by bisection.
pub fn bisect_douglas_bound(a: &CMatrix, b: &CMatrix) -> f64 {
    let bb = b * b.adjoint();
    let aa = a * a.adjoint();
    let eig = dense::hermitian_eigen(&bb);
    let cut = 1e-10 * eig.max();
    let cols: Vec<usize> = (0..eig.values.len()).filter(|&i| eig.values[i] > cut).collect();
    let q = CMatrix::from_fn(bb.nrows(), cols.len(), |i, j| eig.vectors[(i, cols[j])]);
    let (qbb, qaa) = (q.adjoint() * &bb * &q, q.adjoint() * &aa * &q);
    let scale = dense::max_abs(&qbb).max(dense::max_abs(&qaa));
    let ok = |lambda: f64| {
        let p = qbb.scale(lambda) - &qaa;
        dense::hermitian_eigenvalues(&p)[0] >= -1e-13 * scale * (1.0 + lambda)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    while !ok(hi) {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-8 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn douglas_norm_formula(cfg: &SelftestConfig, rng: &mut Sampler) -> SuiteOutcome {
    let tol = Tolerance::default();
    let mut out = SuiteOutcome::new(5, "douglas_norm_formula");
    for case in 0..cfg.cases / 2 {
        out.run(case, |out| {
            let (p, q) = (3 + rng.index(6), 2 + rng.index(6));
            let r = 1 + rng.index(p.min(q));
            let b = rng.matrix(p, r) * rng.matrix(r, q);
            let cols = 1 + rng.index(4);
            let a = &b * rng.matrix(q, cols);
            let sol = douglas_solve(&DenseOperator::plain(a.clone()), &DenseOperator::plain(b.clone()), &tol)?;
            let oracle = bisect_douglas_bound(&a, &b);
            let rel = (sol.lambda_min - oracle).abs() / oracle.max(1e-300);
            out.max("worst_relative_gap", rel);
            out.check(rel <= 1e-6, || format!("case {case}: ‖C‖² = {} vs bisection {oracle}", sol.lambda_min));
            out.check(sol.certificate.certified, || format!("case {case}: uncertified {:?}", sol.certificate));
            Ok(())
        });
    }
    out
}

/// `min_c ‖Gc − y‖` from a column-pivoted QR factorization.
pub fn least_squares_residual(g: &CMatrix, y: &CVector) -> f64 {
    let qr = g.clone().col_piv_qr();
    let r = qr.r();
    let q = qr.q();
    let top = r[(0, 0)].norm();
    let rank = (0..r.nrows().min(r.ncols())).take_while(|&i| r[(i, i)].norm() > 1e-10 * top).count();
    let qr_ = q.columns(0, rank);
    (y - qr_ * (qr_.adjoint() * y)).norm()
}

pub fn interpolation_iff(cfg: &SelftestConfig, rng: &mut Sampler) -> SuiteOutcome {
    let tol = Tolerance::default();
    let mut out = SuiteOutcome::new(6, "interpolation_iff");
    for case in 0..cfg.cases {
        out.run(case, |out| {
            let d = dims(rng, cfg, 3);
            let factors = 1 + rng.index(d.n - 1);
            let k = Arc::new(rng.gram_kernel(&d.shape, d.rank, d.n, factors));
            let rkhm = Rkhm::from_arc(Arc::clone(&k), tol)?;
            let m = factors + 1 + rng.index(d.n - factors);
            let mut idx: Vec<usize> = (0..d.n).collect();
            for i in 0..d.n {
                idx.swap(i, i + rng.index(d.n - i));
            }
            let points: Vec<String> = idx[..m].iter().map(|&i| k.points()[i].clone()).collect();
            let g = random_element(rng, &k, 3)?;
            let feasible = case % 2 == 0;
            let mut ys: Vec<ModuleElement> = points.iter().map(|s| g.evaluate(s)).collect::<Result<_>>()?;
            let gram = k.restrict(&points)?.assembled();
            if !feasible {
                // Push the targets off the range along a null vector of G.
                let eig = dense::hermitian_eigen(&gram);
                let w = eig.vectors.column(0).into_owned();
                let size = 1.0 + ys.iter().map(ModuleElement::norm).fold(0.0, f64::max);
                let dim = k.module_dim();
                for (i, y) in ys.iter_mut().enumerate() {
                    let part: Vec<_> = w.rows(i * dim, dim).iter().map(|c| c * size).collect();
                    *y = y.checked_add(&ModuleElement::from_vector(k.shape(), k.rank(), &part)?)?;
                }
            }
            let targets: Vec<_> = points.iter().cloned().zip(ys).collect();
            let p = InterpolationProblem::new(Arc::clone(&k), targets)?;
            let (exists, _) = interpolation_exists(&p, &tol)?;
            let y = p.stacked_targets();
            let oracle = least_squares_residual(&gram, &y) <= 1e-6 * (1.0 + y.norm());
            out.check(oracle == feasible, || format!("case {case}: oracle misreads the construction"));
            if exists != oracle {
                out.count("disagreements");
                out.fail(format!("case {case}: library {exists}, oracle {oracle}"));
            }
            if exists {
                let r = interpolate_min_norm(&rkhm, &p, &tol)?;
                out.max("worst_evaluation_defect", r.evaluation_defect);
                out.check(r.evaluation_defect <= 1e-8, || format!("case {case}: defect {:e}", r.evaluation_defect));
                out.count("feasible");
            } else {
                out.count("infeasible");
            }
            Ok(())
        });
    }
    out.metrics.entry("disagreements".into()).or_insert(0.0);
    out
}

pub fn bounded_extension_suite(cfg: &SelftestConfig, rng: &mut Sampler) -> SuiteOutcome {
    let tol = Tolerance::default();
    let mut out = SuiteOutcome::new(7, "bounded_extension");
    for case in 0..cfg.cases / 2 {
        out.run(case, |out| {
            let d = dims(rng, cfg, 2);
            let factors = 1 + rng.index(d.n);
            let k = Arc::new(rng.gram_kernel(&d.shape, d.rank, d.n, factors));
            let rkhm = Rkhm::from_arc(Arc::clone(&k), tol)?;
            let mut values = PointFamily::new();
            let m = match case % 3 {
                2 => {
                    for s in k.points() {
                        values.insert(s.clone(), rng.module_element(k.shape(), k.rank()))?;
                    }
                    rng.uniform(0.1, 2.0)
                }
                mode => {
                    let g = random_element(rng, &k, 3)?;
                    for s in k.points() {
                        values.insert(s.clone(), g.evaluate(s)?)?;
                    }
                    let gg = g.inner(&g)?.norm();
                    if mode == 0 { 1.5 * gg } else { 0.5 * gg }
                }
            };
            let f: Vec<String> = k.points().iter().filter(|_| rng.coin()).cloned().collect();
            let f = if f.is_empty() { vec![k.points()[0].clone()] } else { f };
            let gap = dense::hermitian_eigenvalues(&membership_gap(&values, &k, m)?.assembled());
            let scale = gap.iter().fold(0.0, |a: f64, v| a.max(v.abs()));
            let hypothesis = gap[0] >= -tol.threshold(scale);
            match bounded_extension(&rkhm, &values, m, &f, &tol) {
                Ok(r) => {
                    let h = r.f.as_ref().expect("extension present");
                    let hh = h.inner(h)?.norm();
                    out.check(hypothesis, || format!("case {case}: extension built although gap min is {:e}", gap[0]));
                    out.max("worst_norm_excess", hh - m);
                    out.max("worst_literal_norm_excess", h.norm() - m);
                    out.max("worst_agreement", r.evaluation_defect);
                    out.check(hh <= m + 1e-8, || format!("case {case}: ‖⟨h,h⟩‖ = {hh} > m = {m}"));
                    out.check(r.evaluation_defect <= 1e-8, || format!("case {case}: agreement {:e}", r.evaluation_defect));
                    out.count("extensions");
                }
                Err(Error::GapNotPositive { min_eigenvalue }) => {
                    out.check(!hypothesis && min_eigenvalue < 0.0, || {
                        format!("case {case}: certificate {min_eigenvalue:e} but oracle min {:e}", gap[0])
                    });
                    out.count("certificates");
                }
                Err(e) => return Err(e),
            }
            Ok(())
        });
    }
    out
}

pub fn schoenberg_identity(cfg: &SelftestConfig, rng: &mut Sampler) -> SuiteOutcome {
    let tol = Tolerance::default();
    let mut out = SuiteOutcome::new(8, "schoenberg_identity");
    for case in 0..cfg.cases / 2 {
        out.run(case, |out| {
            let d = dims(rng, cfg, 2);
            let l = rng.normalized_symmetric_cnd_kernel(&d.shape, d.rank, d.n);
            let emb = schoenberg_embedding(&l, &l.points()[rng.index(d.n)], &tol)?;
            for _ in 0..2 {
                let x = rng.module_element(&d.shape, d.rank);
                let worst = emb.max_defect(std::slice::from_ref(&x))?;
                let bound = 1e-8 * (1.0 + l.norm()) * x.norm().powi(2);
                out.max("worst_relative_defect", worst / ((1.0 + l.norm()) * x.norm().powi(2)));
                out.check(worst <= bound, || format!("case {case}: defect {worst:e} > {bound:e}"));
            }
            Ok(())
        });
    }
    out
}

pub fn relative_kernel_laws(cfg: &SelftestConfig, rng: &mut Sampler) -> SuiteOutcome {
    let tol = Tolerance::default();
    let mut out = SuiteOutcome::new(9, "relative_kernel_laws");
    for case in 0..cfg.cases / 2 {
        out.run(case, |out| {
            let d = dims(rng, cfg, 2);
            let constant = case % 3 == 0;
            let k = if constant {
                let w = rng.module_operator(&d.shape, d.rank);
                KernelSample::constant(Sampler::labels(d.n), &(&w * &w.adjoint()))?
            } else {
                rng.pd_kernel_from(case % 4, &d.shape, d.rank, d.n)
            };
            let r = relative_from_kernel(k.clone(), &tol)?;
            let s0 = k.points()[rng.index(d.n)].clone();
            let dec = decompose(&r, &s0)?;
            let f = random_element(rng, r.rkhm().kernel(), 3)?;
            let x = rng.module_element(k.shape(), k.rank());
            let (s, t) = (&k.points()[rng.index(d.n)], &k.points()[rng.index(d.n)]);
            let scale = (1.0 + f.norm()) * (1.0 + x.norm());
            let rrk = r.rrk_defect(&f, &x, s, t)?;
            let mh = dec.mh_defect(&x, s, t)?;
            let split = dec.defect(&f, &x, s)?;
            out.max("worst_rrk", rrk / scale);
            out.max("worst_mh", mh / (1.0 + x.norm()));
            out.check(rrk <= 1e-9 * scale, || format!("case {case}: rrk defect {rrk:e}"));
            out.check(mh <= 1e-9 * (1.0 + x.norm()), || format!("case {case}: mh defect {mh:e}"));
            out.check(split <= 1e-9 * scale, || format!("case {case}: h + φ defect {split:e}"));

            // Orthogonal to every difference exactly when constant on the sample.
            let size = 1.0 + f.norm() * (1.0 + k.norm().sqrt());
            let orthogonal = r.orthogonality_residual(&f)? <= 1e-8 * size;
            let flat = r.variation(&f)? <= 1e-8 * size;
            out.check(orthogonal == flat, || format!("case {case}: orthogonal={orthogonal}, constant={flat}"));
            out.check(flat == constant || d.n == 1, || format!("case {case}: constancy {flat} on constant={constant}"));
            out.count(if flat { "constant_functions" } else { "varying_functions" });

            let rec = reconstruct_kernel(&r, &s0, &tol)?;
            let rel = rec.kernel.max_abs_diff(&k) / (1.0 + k.max_abs());
            let gram = rec.reproducing_defect / (1.0 + k.max_abs());
            out.max("worst_reconstruction", rel.max(gram));
            out.check(rel <= 1e-8 && gram <= 1e-8, || format!("case {case}: reconstruction {rel:e}, gram {gram:e}"));
            Ok(())
        });
    }
    out
}

/// Runs every suite in order from one seeded stream per suite.
pub fn run_all(cfg: &SelftestConfig) -> Vec<SuiteOutcome> {
    let stream = |i: u64| Sampler::new(cfg.seed.wrapping_mul(0x9e37_79b9).wrapping_add(i));
    let kernels = pd_kernels(cfg, &mut stream(2));
    vec![
        definiteness_equivalence(cfg, &mut stream(1)),
        reproducing_property(cfg, &mut stream(3), &kernels),
        kolmogorov_decomposition(&kernels),
        reconstruction_identity(cfg, &mut stream(4)),
        douglas_norm_formula(cfg, &mut stream(5)),
        interpolation_iff(cfg, &mut stream(6)),
        bounded_extension_suite(cfg, &mut stream(7)),
        schoenberg_identity(cfg, &mut stream(8)),
        relative_kernel_laws(cfg, &mut stream(9)),
    ]
}

pub fn report(cfg: &SelftestConfig, outcomes: &[SuiteOutcome]) -> Report {
    let mut r = Report::new("selftest");
    r.metric("seed", cfg.seed as f64);
    for o in outcomes {
        let label = o.label();
        let mut metrics = vec![("cases", o.cases as f64)];
        metrics.extend(o.metrics.iter().map(|(k, v)| (k.as_str(), *v)));
        r.verdict(&label, o.passed, &metrics);
        if !o.failures.is_empty() {
            r.artifact(&format!("{label}.failures"), &o.failures);
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_passes() {
        let cfg = SelftestConfig {
            cases: 8,
            ..Default::default()
        };
        for o in run_all(&cfg) {
            assert!(o.passed, "{}: {:?}", o.label(), o.failures);
            assert!(o.cases > 0);
        }
    }

    #[test]
    fn bisection_matches_a_known_bound() {
        // A = 2B gives λ = 4.
        let mut rng = Sampler::new(5);
        let b = rng.matrix(4, 3);
        let a = b.scale(2.0);
        assert!((bisect_douglas_bound(&a, &b) - 4.0).abs() < 1e-7);
    }

    #[test]
    fn least_squares_sees_the_range() {
        let mut rng = Sampler::new(6);
        let g = rng.psd_matrix(5, 2);
        let y = &g * rng.matrix(5, 1).column(0);
        assert!(least_squares_residual(&g, &y) < 1e-10);
        let z = CVector::from_fn(5, |_, _| rng.complex());
        let eig = dense::hermitian_eigen(&g);
        let null = eig.vectors.column(0).into_owned();
        assert!(least_squares_residual(&g, &(z.clone() + null.scale(3.0))) > 1e-3 || least_squares_residual(&g, &z) > 1e-3);
    }

    #[test]
    fn broken_kernels_are_not_cnd() {
        let tol = Tolerance::default();
        let mut rng = Sampler::new(7);
        let s = AlgebraShape::new(vec![2, 1]).unwrap();
        for _ in 0..5 {
            let l = break_conditional_negativity(&rng.cnd_kernel(&s, 2, 3));
            assert!(!l.is_conditionally_negative_definite(&tol).unwrap());
        }
    }
}
