//! Over a finite cyclic base the hyperbolized equation is a dense linear
//! system, solved exactly by SVD with iterative refinement. That oracle
//! cross-checks the backward-orbit series, and its singular values expose
//! when the lambda = 1 equation stops being solvable.

use cocycle_forge::base::{BasePoint, BaseSystem};
use cocycle_forge::cocycle::CocycleSpec;
use cocycle_forge::oracle::cyclic_solve;
use cocycle_forge::registry::{AngleFn, TrigPoly, TwistMap, VectorMap};
use cocycle_forge::solver;

fn main() -> cocycle_forge::Result<()> {
    let p = 7u64;
    let angle = AngleFn {
        constant: 1.3,
        linear: 2.0,
        ..AngleFn::default()
    };
    let spec = CocycleSpec::new(
        BaseSystem::finite(p)?,
        TwistMap::diagonal(vec![angle], 1, false)?,
        VectorMap::Trig {
            components: vec![
                TrigPoly {
                    mean: 0.4,
                    cos_coeffs: vec![0.7, -0.2],
                    sin_coeffs: vec![0.1, 0.3],
                },
                TrigPoly::constant(-0.9),
                TrigPoly {
                    mean: 0.0,
                    cos_coeffs: vec![0.5],
                    sin_coeffs: vec![-0.6],
                },
            ],
        },
    )?;

    println!("period {p}, fiber dimension {}", spec.dim());
    println!("{:<8} {:>14} {:>12} {:>14}", "lambda", "max gap", "min sv", "residual");
    for &lambda in &[0.5, 0.9, 0.99] {
        let exact = cyclic_solve(&spec, lambda)?;
        let mut gap = 0.0f64;
        for (j, want) in exact.values.iter().enumerate() {
            let x = BasePoint::finite(j as u64, p);
            let got = solver::u_lambda_at(&spec, &x, lambda, 1e-14)?;
            gap = gap.max(got.distance(want));
        }
        println!(
            "{lambda:<8} {gap:>14.3e} {:>12.3e} {:>14.3e}",
            exact.min_singular, exact.residual
        );
    }

    // at lambda = 1 an identity twist with nonzero-mean forcing has no
    // solution: the mean sits in the cokernel
    let stuck = CocycleSpec::new(
        BaseSystem::finite(4)?,
        TwistMap::identity(1),
        VectorMap::constant(vec![1.0]),
    )?;
    let sol = cyclic_solve(&stuck, 1.0)?;
    println!(
        "\nidentity twist, mean 1 forcing, lambda = 1: kernel dim {}, solvable = {}",
        sol.kernel_dim, sol.solvable
    );

    // the same twist with a coboundary forcing is solvable at lambda = 1
    let inner = VectorMap::fourier(vec![(1, num_complex::Complex64::new(1.0, 0.0))]);
    let cob = CocycleSpec::new(
        BaseSystem::finite(4)?,
        TwistMap::identity(2),
        VectorMap::coboundary(inner, 0.25),
    )?;
    let sol = cyclic_solve(&cob, 1.0)?;
    println!(
        "coboundary forcing, lambda = 1: kernel dim {}, solvable = {}, residual {:.3e}",
        sol.kernel_dim, sol.solvable, sol.residual
    );
    Ok(())
}
