//! Drives `lambda` toward 1 and watches `u_lambda` converge to the solution
//! of the untwisted equation `u(Tx) - e^{i beta} u(x) = rho(x)`, which the
//! Fourier oracle solves in closed form when the twist is a constant planar
//! rotation. The sweep reports, per lambda, the sup norm, the residual in
//! its own equation, the residual in the lambda = 1 equation, and three
//! distances to the oracle.

use num_complex::Complex64;

use cocycle_forge::base::{golden, BaseSystem};
use cocycle_forge::cocycle::CocycleSpec;
use cocycle_forge::oracle::{fourier_solve, DEFAULT_DENOM_THRESHOLD};
use cocycle_forge::registry::{TwistMap, VectorMap};
use cocycle_forge::solver;

fn main() -> cocycle_forge::Result<()> {
    let beta = 1.0;
    let rho = vec![
        (1, Complex64::new(1.0, 0.0)),
        (2, Complex64::new(-0.4, 0.3)),
    ];
    let spec = CocycleSpec::new(
        BaseSystem::circle(golden()),
        TwistMap::constant_rotation(beta),
        VectorMap::fourier(rho.clone()),
    )?;
    let grid = spec.base.make_grid(128, 0.0)?;

    let star = fourier_solve(golden(), beta, &rho, DEFAULT_DENOM_THRESHOLD);
    println!(
        "oracle: {} modes solved, smallest denominator {:.3e}",
        star.coeffs.len(),
        star.min_denom
    );
    let star_section = star.section()?;

    let lambdas = [0.9, 0.99, 0.999];
    let sweep = solver::sweep(&spec, &lambdas, &grid, 1e-9, Some(&star_section))?;
    println!(
        "{:<8} {:>12} {:>12} {:>12} {:>12}",
        "lambda", "sup norm", "res(lambda)", "res(1)", "sup |u-u*|"
    );
    for row in &sweep.rows {
        println!(
            "{:<8} {:>12.6} {:>12.3e} {:>12.3e} {:>12.3e}",
            row.lambda,
            row.sup_norm,
            row.residual_lambda,
            row.residual_one,
            row.sup_dist.unwrap()
        );
    }
    println!("\nboth res(1) and sup |u - u*| shrink roughly like 1 - lambda");
    Ok(())
}
