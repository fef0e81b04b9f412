//! Minimum-norm interpolation in the reproducing module, feasibility by the
//! range test, and the bounded extension of a function given on a few points.

use std::sync::Arc;

use cstar_kernels::random::Sampler;
use cstar_kernels::{
    bounded_extension, interpolate_min_norm, interpolation_exists, AlgebraShape, Error, InterpolationProblem,
    PointFamily, Rkhm, RkhmElement, Tolerance,
};

fn main() -> cstar_kernels::Result<()> {
    let tol = Tolerance::default();
    let shape = AlgebraShape::new(vec![2])?;
    let mut rng = Sampler::new(21);
    let k = Arc::new(rng.gram_kernel(&shape, 1, 5, 1));
    let rkhm = Rkhm::from_arc(Arc::clone(&k), tol)?;

    // Targets taken from a member of the module are always reachable.
    let g = RkhmElement::generator(&k, &rng.module_element(&shape, 1), "s4")?;
    let pts = ["s1", "s2", "s3"];
    let targets = pts
        .iter()
        .map(|s| Ok((s.to_string(), g.evaluate(s)?)))
        .collect::<cstar_kernels::Result<Vec<_>>>()?;
    let p = InterpolationProblem::new(Arc::clone(&k), targets)?;
    let r = interpolate_min_norm(&rkhm, &p, &tol)?;
    println!("feasible = {}, ‖f‖ = {:.4} ≤ ‖g‖ = {:.4}, defect {:.1e}", r.feasible, r.norm, g.norm(), r.evaluation_defect);
    println!("minimality: {:?}", r.minimality);

    // Arbitrary targets generally are not.
    let wild: Vec<_> = pts.iter().map(|s| (s.to_string(), rng.module_element(&shape, 1))).collect();
    let (ok, residual) = interpolation_exists(&InterpolationProblem::new(Arc::clone(&k), wild)?, &tol)?;
    println!("random targets: feasible = {ok}, range residual {residual:.3}");

    // Bounded extension: keep g's values on three points, ask for ‖⟨h,h⟩‖ ≤ m.
    let mut values = PointFamily::new();
    for s in pts {
        values.insert(s, g.evaluate(s)?)?;
    }
    let gg = g.inner(&g)?.norm();
    let points: Vec<String> = pts.iter().map(|s| s.to_string()).collect();
    let ext = bounded_extension(&rkhm, &values, 1.2 * gg, &points, &tol)?;
    let h = ext.f.expect("extension");
    println!("m = {:.4}: ‖⟨h,h⟩‖ = {:.4}, least admissible m = {:.4}", 1.2 * gg, h.inner(&h)?.norm(), ext.lambda_min.unwrap_or(f64::NAN));
    match bounded_extension(&rkhm, &values, 0.1 * gg, &points, &tol) {
        Err(Error::GapNotPositive { min_eigenvalue }) => {
            println!("m = {:.4}: no extension, gap kernel eigenvalue {min_eigenvalue:.3}", 0.1 * gg)
        }
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}
