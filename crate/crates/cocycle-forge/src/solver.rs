//! The hyperbolized cohomological equation and its solver.
//!
//! For `0 < lambda < 1` the equation
//!
//! ```text
//!     lambda u(Tx) - Psi(x) u(x) = rho(x)
//! ```
//!
//! has the unique bounded solution
//!
//! ```text
//!     u_lambda(x) = - sum_{j>=0} lambda^j Psi(x)^{-1} ... Psi(T^j x)^{-1} rho(T^j x),
//! ```
//!
//! summed here to the analytic tail bound (never renormalized: the raw
//! series is the object under study). Two independent evaluation routes
//! exist on purpose. [`u_lambda_at`] sums the series with the shared walk
//! kernel; [`u_lambda_fixed_point`] iterates the inverse hyperbolized skew
//! product backwards from an arbitrary fiber start and lets the attractor
//! do the work. Their agreement is a structural test of both.
//!
//! The exponential averaging operator
//!
//! ```text
//!     S_lambda(f)(x) = (1-lambda) sum_{j>=0} lambda^j Psi(x)^{-1} ... Psi(T^j x)^{-1} f(T^{j+1} x)
//! ```
//!
//! connects the hyperbolized solutions to the untwisted solution `u` of the
//! `lambda = 1` equation through `u_lambda = u - S_lambda(u)`, and
//! `sup |S_lambda(f)| -> 0` is the exponential zero-mean property of `f`.

use rayon::prelude::*;

use crate::averaging::{
    truncation_abel, truncation_plain, truncation_series, KernelPath, TwistedSequence,
};
use crate::base::{BasePoint, SampleGrid};
use crate::cocycle::{check_lambda, hyperbolized_step, CocycleSpec, Direction, SkewState};
use crate::error::{Error, Result};
use crate::isometry::FiberVector;
use crate::numeric::{KahanSum, KahanVec};
use crate::section::Section;

/// Default hyperbolization schedule for sweeps toward `lambda = 1`.
pub const DEFAULT_LAMBDAS: [f64; 4] = [0.9, 0.99, 0.999, 0.9999];

/// Series evaluation of `u_lambda` at one base point.
pub fn u_lambda_at(spec: &CocycleSpec, x: &BasePoint, lambda: f64, eps: f64) -> Result<FiberVector> {
    u_lambda_at_with(spec, x, lambda, eps, KernelPath::Auto)
}

/// Series evaluation with an explicit kernel path, used to pin the complex
/// fast path against the matrix reference.
pub fn u_lambda_at_with(
    spec: &CocycleSpec,
    x: &BasePoint,
    lambda: f64,
    eps: f64,
    path: KernelPath,
) -> Result<FiberVector> {
    check_lambda(lambda)?;
    let seq = TwistedSequence::from_cocycle(spec);
    let n = truncation_series(lambda, eps, seq.sup_bound())?;
    let mut acc = KahanVec::zeros(spec.dim());
    let mut pow = 1.0f64;
    seq.visit(x, n, path, |_, z| {
        acc.add_scaled(pow, z);
        pow *= lambda;
    })?;
    Ok(FiberVector::from_vec(acc.scaled_value(-1.0)))
}

/// Attractor evaluation of `u_lambda(x)`: start at any fiber point over
/// `T^n x` and contract backwards to `x`. Independent of the series route.
pub fn u_lambda_fixed_point(
    spec: &CocycleSpec,
    x: &BasePoint,
    lambda: f64,
    eps: f64,
    v0: FiberVector,
) -> Result<FiberVector> {
    check_lambda(lambda)?;
    if v0.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: v0.dim(),
        });
    }
    let scale = v0.norm() + spec.sup_rho_bound() / (1.0 - lambda);
    let n = truncation_plain(lambda, eps, scale)?;
    let mut state = SkewState {
        x: spec.base.step(x, n as i64)?,
        v: v0,
    };
    for _ in 0..n {
        state = hyperbolized_step(spec, lambda, &state, Direction::Backward)?;
    }
    Ok(state.v)
}

/// `u_lambda` tabulated on a grid.
#[derive(Debug, Clone)]
pub struct GridSolution {
    pub lambda: f64,
    pub eps: f64,
    pub grid: SampleGrid,
    pub values: Vec<FiberVector>,
    pub sup_norm: f64,
}

impl GridSolution {
    pub fn section(&self) -> Result<Section> {
        Section::grid(self.grid.clone(), self.values.clone(), self.eps)
    }

    /// Lazy series-backed view of the same solution, evaluable off-grid.
    pub fn series_section(&self, spec: &CocycleSpec) -> Result<Section> {
        Section::hyperbolized(spec.clone(), self.lambda, self.eps)
    }
}

/// Solves the hyperbolized equation on every grid node.
pub fn solve_u_lambda(
    spec: &CocycleSpec,
    lambda: f64,
    grid: &SampleGrid,
    eps: f64,
) -> Result<GridSolution> {
    check_lambda(lambda)?;
    let values: Vec<FiberVector> = grid
        .points
        .par_iter()
        .map(|x| u_lambda_at(spec, x, lambda, eps))
        .collect::<Result<_>>()?;
    let sup_norm = values.iter().map(FiberVector::norm).fold(0.0, f64::max);
    Ok(GridSolution {
        lambda,
        eps,
        grid: grid.clone(),
        values,
        sup_norm,
    })
}

/// Sup over the grid of `|lambda_eq u(Tx) - Psi(x) u(x) - rho(x)|`.
///
/// With `lambda_eq = lambda` this certifies a hyperbolized solution; with
/// `lambda_eq = 1` it measures how far a section is from solving the
/// untwisted equation (which is also the displacement of the section under
/// the cocycle action).
pub fn residual(spec: &CocycleSpec, lambda_eq: f64, u: &Section, grid: &SampleGrid) -> Result<f64> {
    if u.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: u.dim(),
        });
    }
    let pointwise: Vec<f64> = grid
        .points
        .par_iter()
        .map(|x| point_residual(spec, lambda_eq, u, u, x))
        .collect::<Result<_>>()?;
    Ok(pointwise.into_iter().fold(0.0, f64::max))
}

fn point_residual(
    spec: &CocycleSpec,
    lambda_eq: f64,
    u_here: &Section,
    u_ahead: &Section,
    x: &BasePoint,
) -> Result<f64> {
    let tx = spec.base.forward(x)?;
    let u_tx = u_ahead.eval(&tx)?;
    let u_x = u_here.eval(x)?;
    let t = x.coordinate();
    let twisted = spec.psi.eval(t).apply(&u_x)?;
    let rho = spec.rho.eval(t);
    Ok(u_tx.scale(lambda_eq).sub(&twisted).sub(&rho).norm())
}

/// Exponential average `S_lambda(f)(x)`, truncated at the tail bound and
/// renormalized by the truncated mass.
pub fn script_s(
    spec: &CocycleSpec,
    f: &Section,
    x: &BasePoint,
    lambda: f64,
    eps: f64,
) -> Result<FiberVector> {
    check_lambda(lambda)?;
    if f.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: f.dim(),
        });
    }
    let n = truncation_abel(lambda, eps, f.sup_bound())?;
    let analytic = match f {
        Section::Analytic { map } => Some(map),
        _ => None,
    };
    let twist = spec.psi.inverse();
    let mut acc = KahanVec::zeros(spec.dim());
    let mut mass = KahanSum::new();
    let mut pow = 1.0f64;
    // z_k = Psi(x)^{-1} ... Psi(T^{k-1} x)^{-1} f(T^k x); the k = 0 term is
    // skipped so each retained term carries the product through T^{k-1} x
    // and the observable one step further along the orbit.
    crate::averaging::walk_matrix(
        &spec.base,
        &twist,
        x,
        n + 1,
        |k, t, buf| {
            if let Some(map) = analytic {
                map.eval_into(t, buf);
            } else {
                let pt = spec.base.step(x, k as i64)?;
                let v = f.eval(&pt)?;
                buf.copy_from_slice(v.as_slice());
            }
            Ok(())
        },
        |k, z| {
            if k >= 1 {
                acc.add_scaled(pow, z);
                mass.add(pow);
                pow *= lambda;
            }
        },
    )?;
    Ok(FiberVector::from_vec(
        acc.scaled_value(1.0 / mass.value()),
    ))
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ZeroMeanRow {
    pub lambda: f64,
    /// `sup_grid |S_lambda(f)|`.
    pub sup: f64,
}

/// Exponential zero-mean profile: `sup |S_lambda(f)|` along a lambda
/// schedule. Decay to zero as `lambda -> 1` is the zero-mean property.
pub fn zero_mean_profile(
    spec: &CocycleSpec,
    f: &Section,
    lambdas: &[f64],
    grid: &SampleGrid,
    eps: f64,
) -> Result<Vec<ZeroMeanRow>> {
    let mut rows = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let sups: Vec<f64> = grid
            .points
            .par_iter()
            .map(|x| script_s(spec, f, x, lambda, eps).map(|v| v.norm()))
            .collect::<Result<_>>()?;
        rows.push(ZeroMeanRow {
            lambda,
            sup: sups.into_iter().fold(0.0, f64::max),
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub sup_norm: f64,
    /// Sup residual in the lambda-equation, should sit at solver accuracy.
    pub residual_lambda: f64,
    /// Sup residual of the same section in the untwisted equation.
    pub residual_one: f64,
    pub sup_dist: Option<f64>,
    pub l1_dist: Option<f64>,
    pub l2_dist: Option<f64>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct LambdaSweep {
    pub rows: Vec<SweepRow>,
}

/// Solves along a lambda schedule and reports residuals plus, when an
/// oracle section for the untwisted equation is supplied, sup/L1/L2
/// distances to it over the grid.
pub fn sweep(
    spec: &CocycleSpec,
    lambdas: &[f64],
    grid: &SampleGrid,
    eps: f64,
    oracle: Option<&Section>,
) -> Result<LambdaSweep> {
    if let Some(u) = oracle {
        if u.dim() != spec.dim() {
            return Err(Error::DimensionMismatch {
                expected: spec.dim(),
                got: u.dim(),
            });
        }
    }
    let mut rows = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        check_lambda(lambda)?;
        struct PointRow {
            u_norm: f64,
            res_lambda: f64,
            res_one: f64,
            dist: Option<f64>,
        }
        let per_point: Vec<PointRow> = grid
            .points
            .par_iter()
            .map(|x| -> Result<PointRow> {
                let u_x = u_lambda_at(spec, x, lambda, eps)?;
                let tx = spec.base.forward(x)?;
                let u_tx = u_lambda_at(spec, &tx, lambda, eps)?;
                let t = x.coordinate();
                let twisted = spec.psi.eval(t).apply(&u_x)?;
                let rho = spec.rho.eval(t);
                let res_lambda = u_tx.scale(lambda).sub(&twisted).sub(&rho).norm();
                let res_one = u_tx.sub(&twisted).sub(&rho).norm();
                let dist = match oracle {
                    Some(star) => Some(u_x.distance(&star.eval(x)?)),
                    None => None,
                };
                Ok(PointRow {
                    u_norm: u_x.norm(),
                    res_lambda,
                    res_one,
                    dist,
                })
            })
            .collect::<Result<_>>()?;
        let sup_norm = per_point.iter().map(|p| p.u_norm).fold(0.0, f64::max);
        let residual_lambda = per_point.iter().map(|p| p.res_lambda).fold(0.0, f64::max);
        let residual_one = per_point.iter().map(|p| p.res_one).fold(0.0, f64::max);
        let (sup_dist, l1_dist, l2_dist) = if oracle.is_some() {
            let mut sup = 0.0f64;
            let mut l1 = KahanSum::new();
            let mut l2 = KahanSum::new();
            for p in &per_point {
                let d = p.dist.expect("oracle distances present");
                sup = sup.max(d);
                l1.add(d);
                l2.add(d * d);
            }
            let m = grid.len() as f64;
            (
                Some(sup),
                Some(l1.value() / m),
                Some((l2.value() / m).sqrt()),
            )
        } else {
            (None, None, None)
        };
        rows.push(SweepRow {
            lambda,
            sup_norm,
            residual_lambda,
            residual_one,
            sup_dist,
            l1_dist,
            l2_dist,
        });
    }
    Ok(LambdaSweep { rows })
}
