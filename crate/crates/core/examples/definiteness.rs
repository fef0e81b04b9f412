//! Positive and conditionally negative definiteness on A = M_2 ⊕ C, and how a
//! CND kernel turns into a PD one at every base point.

use cstar_kernels::kernel::gen_additive;
use cstar_kernels::random::Sampler;
use cstar_kernels::{cnd_to_pd, AlgebraShape, ModuleOperator, Tolerance};

fn main() -> cstar_kernels::Result<()> {
    let tol = Tolerance::default();
    let shape = AlgebraShape::new(vec![2, 1])?;
    let mut rng = Sampler::new(11);
    let points = Sampler::labels(4);

    // L(s_i, s_j) = c_i + c_j* is CND for any choice of the c_i.
    let c: Vec<ModuleOperator> = (0..4).map(|_| rng.module_operator(&shape, 2)).collect();
    let l = gen_additive(&points, &c)?;
    let d = l.conditional_negativity(&tol)?;
    println!("additive kernel: CND = {} (largest compressed eigenvalue {:.3e})", d.verdict, d.extremal_eigenvalue);
    for s0 in l.points() {
        let k = cnd_to_pd(&l, s0, &tol)?.kernel;
        let pd = k.positive_definiteness(&tol);
        println!("  base {s0}: K is PD = {} (min eigenvalue {:.3e})", pd.verdict, pd.extremal_eigenvalue);
        assert!(pd.verdict);
    }

    // Bumping one diagonal value breaks it, and every transform notices.
    let bump = ModuleOperator::identity(&shape, 2).scale_real(50.0);
    let broken = l.map(|i, j, op| if i == 0 && j == 0 { op + &bump } else { op.clone() });
    println!("bumped kernel: CND = {}", broken.is_conditionally_negative_definite(&tol)?);
    for s0 in broken.points() {
        let pd = cnd_to_pd(&broken, s0, &tol)?.kernel.is_positive_definite(&tol);
        println!("  base {s0}: K is PD = {pd}");
        assert!(!pd);
    }
    Ok(())
}
