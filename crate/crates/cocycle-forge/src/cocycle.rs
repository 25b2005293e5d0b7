//! Cocycles of Euclidean isometries over a base system, their skew products
//! and the hyperbolized skew products.
//!
//! The data is a base system `T`, an orthogonal twist `Psi` and a fiber
//! observable `rho`; together they generate
//!
//! ```text
//!     I(x) v      = Psi(x) v + rho(x)
//!     I(n, x)     = I(T^{n-1} x) o ... o I(T x) o I(x)
//!     F(x, v)     = (T x, I(x) v)
//!     F_l(x, v)   = (T x, (Psi(x) v + rho(x)) / lambda)
//!     G_l = F_l^{-1}(x, v) = (T^{-1} x, lambda Psi^{-1} v - Psi^{-1} rho at T^{-1} x)
//! ```
//!
//! For `0 < lambda < 1` the map `G_l` contracts fibers by exactly `lambda`
//! per step, which is what makes the graph of the hyperbolized solution a
//! global attractor. [`attractor_trace`] measures that decay against the
//! solver; [`contraction_trace`] follows the difference of two fiber points,
//! whose evolution is exactly linear, so the `lambda^n` law survives in
//! floating point with only one or two ulps of relative error per step.

use crate::base::{BasePoint, BaseSystem};
use crate::error::{Error, Result};
use crate::isometry::{EuclideanIsometry, FiberVector};
use crate::registry::{TwistMap, VectorMap};
use crate::solver;

/// Long orthogonal products are re-orthonormalized every this many factors.
pub const RENORM_EVERY: u64 = 1024;

/// Base system plus generator of the isometry cocycle.
#[derive(Debug, Clone, PartialEq)]
pub struct CocycleSpec {
    pub base: BaseSystem,
    pub psi: TwistMap,
    pub rho: VectorMap,
}

impl CocycleSpec {
    pub fn new(base: BaseSystem, psi: TwistMap, rho: VectorMap) -> Result<Self> {
        if psi.dim() != rho.dim() {
            return Err(Error::DimensionMismatch {
                expected: psi.dim(),
                got: rho.dim(),
            });
        }
        Ok(Self { base, psi, rho })
    }

    pub fn dim(&self) -> usize {
        self.psi.dim()
    }

    /// Generator `I(x)` at a base point.
    pub fn isometry_at(&self, x: &BasePoint) -> EuclideanIsometry {
        let t = x.coordinate();
        EuclideanIsometry::new(self.psi.eval(t), self.rho.eval(t)).expect("registry dims agree")
    }

    /// `I(n, x)` by iterated composition, re-orthonormalizing periodically.
    pub fn cocycle_n(&self, x: &BasePoint, n: u64) -> Result<EuclideanIsometry> {
        let mut acc = EuclideanIsometry::identity(self.dim());
        let mut y = x.clone();
        for j in 0..n {
            acc = self.isometry_at(&y).compose(&acc)?;
            if (j + 1) % RENORM_EVERY == 0 {
                acc.renormalize()?;
            }
            if j + 1 < n {
                y = self.base.forward(&y)?;
            }
        }
        Ok(acc)
    }

    /// Analytic upper bound for `sup |rho|`.
    pub fn sup_rho_bound(&self) -> f64 {
        self.rho.sup_bound()
    }
}

/// Point of the skew product space `X x R^l`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewState {
    pub x: BasePoint,
    pub v: FiberVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// One step of the plain skew product `F`.
pub fn skew_step(spec: &CocycleSpec, state: &SkewState) -> Result<SkewState> {
    let v = spec.isometry_at(&state.x).apply(&state.v)?;
    Ok(SkewState {
        x: spec.base.forward(&state.x)?,
        v,
    })
}

/// One step of the hyperbolized skew product `F_l` or of its inverse `G_l`.
pub fn hyperbolized_step(
    spec: &CocycleSpec,
    lambda: f64,
    state: &SkewState,
    direction: Direction,
) -> Result<SkewState> {
    check_lambda(lambda)?;
    match direction {
        Direction::Forward => {
            let v = spec.isometry_at(&state.x).apply(&state.v)?;
            Ok(SkewState {
                x: spec.base.forward(&state.x)?,
                v: v.scale(1.0 / lambda),
            })
        }
        Direction::Backward => {
            let y = spec.base.backward(&state.x)?;
            let t = y.coordinate();
            let psi = spec.psi.eval(t);
            let shifted = state.v.scale(lambda).sub(&spec.rho.eval(t));
            let v = psi.apply_inverse(&shifted)?;
            Ok(SkewState { x: y, v })
        }
    }
}

pub fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::LambdaRange(lambda));
    }
    Ok(())
}

/// Distances `d_n = |v_n - u_l(T^{-n} x)|` along the backward orbit of
/// `(x, v0)` under `G_l`. The attractor property says `d_n = lambda^n d_0`
/// exactly; numerically the small differences are computed between two
/// independently rounded quantities, so the trace bottoms out at solver
/// accuracy. Use [`contraction_trace`] when the ratio itself is under test.
pub fn attractor_trace(
    spec: &CocycleSpec,
    lambda: f64,
    x: &BasePoint,
    v0: FiberVector,
    n_max: u64,
    eps: f64,
) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    let mut state = SkewState {
        x: x.clone(),
        v: v0,
    };
    let mut out = Vec::with_capacity(n_max as usize + 1);
    for n in 0..=n_max {
        let u = solver::u_lambda_at(spec, &state.x, lambda, eps)?;
        out.push(state.v.distance(&u));
        if n < n_max {
            state = hyperbolized_step(spec, lambda, &state, Direction::Backward)?;
        }
    }
    Ok(out)
}

/// Norms `|e_n|` of a fiber difference vector propagated along the backward
/// orbit: `e_{n+1} = lambda Psi(T^{-(n+1)} x)^{-1} e_n`. This is the exact
/// linearization of `G_l` acting on the difference of two fiber points over
/// the same base orbit, so `|e_n| / |e_0|` realizes the `lambda^n` law
/// without catastrophic cancellation.
pub fn contraction_trace(
    spec: &CocycleSpec,
    lambda: f64,
    x: &BasePoint,
    e0: FiberVector,
    n_max: u64,
) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    if e0.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: e0.dim(),
        });
    }
    let mut y = x.clone();
    let mut e = e0;
    let mut out = Vec::with_capacity(n_max as usize + 1);
    out.push(e.norm());
    for _ in 0..n_max {
        y = spec.base.backward(&y)?;
        let psi = spec.psi.eval(y.coordinate());
        e = psi.apply_inverse(&e)?.scale(lambda);
        out.push(e.norm());
    }
    Ok(out)
}
