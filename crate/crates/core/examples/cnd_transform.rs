//! The CND → PD transform at a base point, the correction term ψ and the
//! reconstruction of L from (K, ψ). Reads a kernel file when given one.

use cstar_kernels::io;
use cstar_kernels::random::Sampler;
use cstar_kernels::{cnd_to_pd, pd_to_cnd_reconstruct, AlgebraShape, Tolerance};

fn main() -> cstar_kernels::Result<()> {
    let tol = Tolerance::default();
    let l = match std::env::args().nth(1) {
        Some(path) => io::load_kernel(path.as_ref(), &tol)?,
        None => Sampler::new(5).cnd_kernel(&AlgebraShape::new(vec![2])?, 1, 4),
    };
    let s0 = l.points()[0].clone();
    let t = cnd_to_pd(&l, &s0, &tol)?;
    println!("base point {s0}: K PD = {}, ‖ψ‖ = {:.3e}", t.kernel.is_positive_definite(&tol), t.psi_norm());

    let back = pd_to_cnd_reconstruct(&t)?;
    let err = back.max_abs_diff(&l) / (1.0 + l.max_abs());
    println!("round trip L → (K, ψ) → L: relative error {err:.2e}");
    assert!(err <= 1e-9);

    // Normalized symmetric inputs with self-adjoint values need no correction.
    let d = Sampler::new(6).normalized_symmetric_cnd_kernel(&AlgebraShape::new(vec![1, 2])?, 2, 4);
    let t = cnd_to_pd(&d, &d.points()[1], &tol)?;
    println!("distance kernel: ψ vanishes = {}", t.psi_vanishes());
    println!("{}", io::kernel_to_json(&t.kernel, &tol).lines().take(6).collect::<Vec<_>>().join("\n"));
    Ok(())
}
