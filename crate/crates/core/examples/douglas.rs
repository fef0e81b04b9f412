//! Douglas factorization: when ran A ⊆ ran B, A = BC with ‖C‖² the least λ
//! such that AA* ⪯ λBB*.

use cstar_kernels::factorization::range_equality;
use cstar_kernels::random::Sampler;
use cstar_kernels::{douglas_solve, DenseOperator, Error, Tolerance};

fn main() -> cstar_kernels::Result<()> {
    let tol = Tolerance::default();
    let mut rng = Sampler::new(8);
    let b = rng.matrix(6, 3) * rng.matrix(3, 5);
    let a = &b * rng.matrix(5, 2);
    let (a, b) = (DenseOperator::plain(a), DenseOperator::plain(b));

    let sol = douglas_solve(&a, &b, &tol)?;
    println!("‖BC − A‖ = {:.2e}", sol.residual);
    println!("λ_min = ‖C‖² = {:.6}", sol.lambda_min);
    println!("certificate: {:?}", sol.certificate);

    // A column outside ran B is rejected with its residual.
    let outside = DenseOperator::plain(rng.matrix(6, 1));
    match douglas_solve(&outside, &b, &tol) {
        Err(Error::RangeViolation { column, residual }) => {
            println!("column {column} leaves ran B (residual {residual:.3})")
        }
        other => panic!("expected a range violation, got {other:?}"),
    }

    // AA* = λBB* forces equal ranges.
    let same = DenseOperator::plain(b.matrix().scale(2.0));
    println!("ran(2B) = ran(B): {}", range_equality(&same, &b, 4.0, &tol)?);
    Ok(())
}
