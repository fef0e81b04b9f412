//! Builds the reproducing module of a PD kernel, checks the reproducing
//! property and factors K(s,t) = δ_t δ_s* through the feature maps.

use std::sync::Arc;

use cstar_kernels::random::Sampler;
use cstar_kernels::{AlgebraShape, Rkhm, RkhmElement, Term, Tolerance};

fn main() -> cstar_kernels::Result<()> {
    let tol = Tolerance::default();
    let shape = AlgebraShape::new(vec![2, 1])?;
    let mut rng = Sampler::new(3);
    let rkhm = Rkhm::new(rng.gram_kernel(&shape, 2, 5, 2), tol)?;
    let k = Arc::clone(rkhm.kernel());
    println!("{} points, module span of dimension {}", k.len(), rkhm.span_dim());

    let terms = (0..3)
        .map(|p| Term {
            x: rng.module_element(&shape, 2),
            point: p,
            a: rng.algebra_element(&shape),
        })
        .collect();
    let f = RkhmElement::from_terms(&k, terms)?;
    let x = rng.module_element(&shape, 2);
    for s in k.points() {
        // ⟨f(s), x⟩ = ⟨f, K_{x,s}⟩
        let defect = rkhm.reproducing_defect(&f, &x, s)?.norm();
        println!("reproducing defect at {s}: {defect:.2e}");
    }

    let mut worst: f64 = 0.0;
    for s in k.points() {
        for t in k.points() {
            worst = worst.max(rkhm.kolmogorov_defect(s, t)?);
        }
    }
    println!("max ‖δ_t δ_s* − K(s,t)‖ = {worst:.2e}, ‖f‖ = {:.4}", f.norm());
    assert!(worst <= 1e-8 * (1.0 + k.norm()));
    Ok(())
}
