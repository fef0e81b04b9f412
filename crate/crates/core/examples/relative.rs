//! Relative reproducing kernels: differences D = K_{x,s} − K_{x,t}, the split
//! f = h + φ at a base point, and rebuilding K from the differences alone.

use cstar_kernels::random::Sampler;
use cstar_kernels::{decompose, reconstruct_kernel, relative_from_kernel, AlgebraShape, RkhmElement, Term, Tolerance};

fn main() -> cstar_kernels::Result<()> {
    let tol = Tolerance::default();
    let shape = AlgebraShape::new(vec![2])?;
    let mut rng = Sampler::new(29);
    let k = rng.pd_kernel_from(0, &shape, 2, 4);
    let r = relative_from_kernel(k.clone(), &tol)?;
    let kernel = r.rkhm().kernel();
    let x = rng.module_element(&shape, 2);
    let f = RkhmElement::from_terms(
        kernel,
        vec![Term {
            x: rng.module_element(&shape, 2),
            point: 1,
            a: rng.algebra_element(&shape),
        }],
    )?;
    println!("⟨f(s) − f(t), x⟩ = ⟨f, D_{{x,s,t}}⟩: defect {:.2e}", r.rrk_defect(&f, &x, "s1", "s3")?);

    let dec = decompose(&r, "s2")?;
    println!("f = h + φ split at s2: defect {:.2e}", dec.defect(&f, &x, "s4")?);
    println!("h_{{x,s}} − h_{{x,t}} = D_{{x,s,t}}: defect {:.2e}", dec.mh_defect(&x, "s1", "s4")?);
    println!("f constant? variation {:.3}, orthogonality residual {:.3}", r.variation(&f)?, r.orthogonality_residual(&f)?);

    let rec = reconstruct_kernel(&r, "s2", &tol)?;
    println!(
        "rebuilt K: max entry error {:.2e}, Riesz residual {:.2e}",
        rec.kernel.max_abs_diff(&k),
        rec.riesz_residual
    );
    Ok(())
}
