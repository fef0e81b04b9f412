//! A normalized symmetric CND kernel as squared distances in a reproducing
//! module: ⟨L(s,t)x, x⟩ = |θ(x,s) − θ(x,t)|².

use cstar_kernels::random::Sampler;
use cstar_kernels::{schoenberg_embedding, AlgebraShape, Tolerance};

fn main() -> cstar_kernels::Result<()> {
    let tol = Tolerance::default();
    let shape = AlgebraShape::new(vec![2, 1])?;
    let mut rng = Sampler::new(17);
    let l = rng.normalized_symmetric_cnd_kernel(&shape, 1, 5);
    let emb = schoenberg_embedding(&l, "s3", &tol)?;
    let x = rng.module_element(&shape, 1);
    for s in l.points() {
        for t in l.points() {
            if s < t {
                println!("{s},{t}: defect {:.2e}", emb.defect(&x, s, t)?);
            }
        }
    }
    let probes: Vec<_> = (0..4).map(|_| rng.module_element(&shape, 1)).collect();
    println!("worst over probes: {:.2e}", emb.max_defect(&probes)?);

    // The kernel must be normalized, symmetric and CND.
    let shifted = l.map(|i, j, op| if i == j { op + &cstar_kernels::ModuleOperator::identity(&shape, 1) } else { op.clone() });
    println!("shifted kernel: {}", schoenberg_embedding(&shifted, "s1", &tol).unwrap_err());
    Ok(())
}
