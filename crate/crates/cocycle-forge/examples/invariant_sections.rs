//! When the twisted shift `f(Tx) = F(x)^{-1} f(x)` admits a reducing frame
//! `X(Tx) = X(x) F(x)`, every constant vector `e` turns into an invariant
//! function `f = X^{-1} e`. For the rotation by the golden mean with
//! `F = rotation(2 pi alpha)`, the frame is the first harmonic
//! `X(t) = rotation(2 pi t)`. This example verifies the chain numerically,
//! recovers the limit function, and shows the exponential averages
//! `S_lambda` fixing the homogeneous solution it induces.

use std::f64::consts::TAU;

use cocycle_forge::base::{golden, BaseSystem};
use cocycle_forge::cocycle::CocycleSpec;
use cocycle_forge::isometry::FiberVector;
use cocycle_forge::oracle::{limit_function_h, verify_section_to_function};
use cocycle_forge::registry::{TwistMap, VectorMap};
use cocycle_forge::section::Section;
use cocycle_forge::solver;

fn main() -> cocycle_forge::Result<()> {
    let alpha = golden();
    let base = BaseSystem::circle(alpha);
    let grid = base.make_grid(1024, 0.0)?;

    // cocycle twist Psi at angle -2 pi alpha; the shift multiplier is its
    // inverse
    let psi = TwistMap::constant_rotation(-TAU * alpha);
    let twist = psi.inverse();
    let frame = TwistMap::harmonic(1);
    let e = FiberVector::from_vec(vec![0.8, -0.6]);

    let rep = verify_section_to_function(&base, &twist, &frame, &e, &grid)?;
    println!("frame residual      sup |X(Tx) - X(x) F(x)|   = {:.3e}", rep.frame_residual);
    println!("invariance residual sup |f(Tx) - F(x)^-1 f(x)| = {:.3e}", rep.invariance_residual);

    // averaging X(x) f(x) over the grid recovers the constant e
    let f = Section::analytic(VectorMap::rotated(
        frame.clone(),
        VectorMap::constant(e.as_slice().to_vec()),
        true,
    )?);
    let (c, _h) = limit_function_h(&frame, &f, &grid)?;
    println!(
        "recovered constant  ({:+.12}, {:+.12}), target ({:+.1}, {:+.1})",
        c[0], c[1], e[0], e[1]
    );

    // the induced homogeneous solution v(Tx) = Psi(x) v(x) is a fixed point
    // of every exponential average S_lambda
    let spec = CocycleSpec::new(base.clone(), TwistMap::constant_rotation(TAU * alpha), VectorMap::zero(2))?;
    let v = Section::analytic(VectorMap::rotated(
        TwistMap::harmonic(-1),
        VectorMap::constant(vec![1.0, 0.0]),
        true,
    )?);
    let probe = base.make_grid(64, 0.0)?;
    println!("\n{:<10} {:>20}", "lambda", "sup |S_lambda v - v|");
    for &lambda in &[0.9, 0.99, 0.999] {
        let mut worst = 0.0f64;
        for x in probe.iter() {
            let s = solver::script_s(&spec, &v, x, lambda, 1e-10)?;
            worst = worst.max(s.distance(&v.eval(x)?));
        }
        println!("{lambda:<10} {worst:>20.3e}");
    }
    Ok(())
}
