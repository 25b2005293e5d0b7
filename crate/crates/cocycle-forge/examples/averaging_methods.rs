//! Cesaro and Abel averaging of a twisted sequence, paired on the Frobenius
//! schedule lambda = 1 - 1/N. For bounded twisted sequences the two means
//! agree asymptotically; the discrepancy column shrinks as N grows. The
//! Tauberian probe checks the boundedness hypothesis that the converse
//! direction needs, and the von Neumann residual measures L2 Cauchy-ness
//! of the Cesaro means between N and 2N.

use num_complex::Complex64;

use cocycle_forge::averaging::{frobenius_compare, tauberian_probe, von_neumann_residual, TwistedSequence};
use cocycle_forge::base::{golden, BasePoint, BaseSystem};
use cocycle_forge::registry::{TwistMap, VectorMap};

fn main() -> cocycle_forge::Result<()> {
    let seq = TwistedSequence::new(
        BaseSystem::circle(golden()),
        TwistMap::constant_rotation(1.0),
        VectorMap::fourier(vec![
            (1, Complex64::new(1.0, 0.0)),
            (-1, Complex64::new(0.3, 0.6)),
        ]),
    )?;
    let x = BasePoint::circle(0.0);
    let schedule = [100u64, 1000, 10_000, 100_000];

    let report = frobenius_compare(&seq, &x, &schedule, 1e-12)?;
    println!("{:>8} {:>10} {:>14} {:>14} {:>12}", "N", "lambda", "|Cesaro|", "|Abel|", "gap");
    for row in &report.rows {
        let c = cocycle_forge::numeric::norm(&row.cesaro);
        let a = cocycle_forge::numeric::norm(&row.abel);
        println!(
            "{:>8} {:>10} {c:>14.6e} {a:>14.6e} {:>12.3e}",
            row.n, row.lambda, row.discrepancy
        );
    }

    let probe = tauberian_probe(&seq, &x, &schedule, 1e-12)?;
    println!(
        "\nterms bounded by {:.4} (largest seen {:.4}): {}",
        probe.sup_bound, probe.max_term_norm, probe.bounded
    );
    println!("discrepancy non-increasing along the schedule: {}", probe.discrepancy_decreasing);

    let grid = seq.base.make_grid(128, 0.0)?;
    for &n in &[100u64, 1000, 10_000] {
        let r = von_neumann_residual(&seq, &grid, n)?;
        println!("von Neumann L2 residual between N = {n} and 2N: {r:.6e}");
    }
    Ok(())
}
