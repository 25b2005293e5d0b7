//! Twisted Birkhoff sums and their Cesaro and Abel averages.
//!
//! The twisted sequence attached to a twist `F` and observable `f` over a
//! base map `T` is
//!
//! ```text
//!     z_0(x) = f(x),      z_j(x) = F(x) F(Tx) ... F(T^{j-1} x) f(T^j x),
//! ```
//!
//! averaged either as Cesaro means `(1/N) sum_{j<N} z_j` or as Abel means
//! `(1-lambda) sum_j lambda^j z_j`. Abel-type sums are truncated at the
//! analytic tail bound and renormalized by the truncated geometric mass, so
//! averaging a constant sequence returns the constant to machine accuracy
//! regardless of `lambda`.
//!
//! One walk kernel feeds every consumer (Cesaro, Abel, the solver series,
//! drift partial sums, the von Neumann probe). For `l = 2` with a planar
//! twist there is a complex fast path; its multiplications mirror the 2x2
//! matrix arithmetic operation by operation, so the two paths agree bitwise
//! and the matrix path stays the reference implementation.

use num_complex::Complex64;

use crate::base::{orbit_coord, BaseKind, BasePoint, BaseSystem, SampleGrid};
use crate::cocycle::{check_lambda, CocycleSpec, RENORM_EVERY};
use crate::error::{Error, Result};
use crate::isometry::FiberVector;
use crate::numeric::{KahanSum, KahanVec};
use crate::registry::{PlanarAngle, TwistMap, VectorMap};

/// Hard ceiling on walk lengths derived from tail bounds.
const MAX_WALK_TERMS: u64 = 200_000_000;

/// Kernel selection for walks. `Auto` takes the complex fast path whenever
/// the twist is a single planar rotation and the observable has a complex
/// view; `Matrix` forces the reference path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelPath {
    #[default]
    Auto,
    Matrix,
    Complex,
}

/// Scalar-coordinate view of an orbit, evaluated in O(1) per index so the
/// rounding error does not grow along the walk.
#[derive(Debug, Clone, Copy)]
pub(crate) enum CoordOrbit {
    Rotation { t0: f64, alpha: f64 },
    Finite { index: u64, period: u64 },
}

impl CoordOrbit {
    pub fn new(base: &BaseSystem, x: &BasePoint) -> Result<Self> {
        match (&base.kind, x) {
            (BaseKind::CircleRotation { alpha }, BasePoint::Circle { theta }) => {
                Ok(CoordOrbit::Rotation {
                    t0: *theta,
                    alpha: *alpha,
                })
            }
            (BaseKind::TorusRotation { alpha }, BasePoint::Torus { coords })
                if alpha.len() == coords.len() =>
            {
                Ok(CoordOrbit::Rotation {
                    t0: coords[0],
                    alpha: alpha[0],
                })
            }
            (BaseKind::FiniteCyclic { period }, BasePoint::Finite { index, period: q })
                if period == q =>
            {
                Ok(CoordOrbit::Finite {
                    index: *index,
                    period: *period,
                })
            }
            _ => Err(Error::BaseMismatch(
                "point does not match base system".into(),
            )),
        }
    }

    #[inline]
    pub fn at(&self, j: u64) -> f64 {
        match self {
            CoordOrbit::Rotation { t0, alpha } => orbit_coord(*t0, *alpha, j as i64),
            CoordOrbit::Finite { index, period } => {
                ((index + j % period) % period) as f64 / *period as f64
            }
        }
    }
}

/// Column-wise modified Gram-Schmidt on a row-major `d x d` matrix. A `2 x 2`
/// matrix that still carries exact rotation structure is rescaled instead,
/// which is the same correction the complex kernel applies.
pub(crate) fn renormalize_raw(q: &mut [f64], d: usize) {
    if d == 2 && q[1] == -q[2] && q[0] == q[3] {
        let s = 1.0 / q[0].hypot(q[2]);
        for e in q.iter_mut() {
            *e *= s;
        }
        return;
    }
    for j in 0..d {
        for k in 0..j {
            let mut proj = 0.0;
            for i in 0..d {
                proj += q[i * d + k] * q[i * d + j];
            }
            for i in 0..d {
                q[i * d + j] -= proj * q[i * d + k];
            }
        }
        let mut nrm = 0.0;
        for i in 0..d {
            nrm += q[i * d + j] * q[i * d + j];
        }
        let nrm = nrm.sqrt();
        debug_assert!(nrm > 0.5, "orthogonal product degenerated");
        for i in 0..d {
            q[i * d + j] /= nrm;
        }
    }
}

/// Reference walk: visits `z_j = Q_j f_j` for `j < n`, where `Q_j` is the
/// running product of twist matrices and `f_j` is filled by `obs` from the
/// orbit index and coordinate. No allocation happens after setup.
pub(crate) fn walk_matrix(
    base: &BaseSystem,
    twist: &TwistMap,
    x: &BasePoint,
    n: u64,
    mut obs: impl FnMut(u64, f64, &mut [f64]) -> Result<()>,
    mut sink: impl FnMut(u64, &[f64]),
) -> Result<()> {
    let d = twist.dim();
    let coords = CoordOrbit::new(base, x)?;
    let identity_twist = twist.is_identity();
    let mut q = vec![0.0; d * d];
    for i in 0..d {
        q[i * d + i] = 1.0;
    }
    let mut m = vec![0.0; d * d];
    let mut prod = vec![0.0; d * d];
    let mut f = vec![0.0; d];
    let mut z = vec![0.0; d];
    for j in 0..n {
        let t = coords.at(j);
        obs(j, t, &mut f)?;
        if identity_twist {
            sink(j, &f);
            continue;
        }
        for i in 0..d {
            let mut acc = 0.0;
            for k in 0..d {
                acc += q[i * d + k] * f[k];
            }
            z[i] = acc;
        }
        sink(j, &z);
        if j + 1 < n {
            twist.write_matrix(t, &mut m);
            for i in 0..d {
                for k in 0..d {
                    let mut acc = 0.0;
                    for r in 0..d {
                        acc += q[i * d + r] * m[r * d + k];
                    }
                    prod[i * d + k] = acc;
                }
            }
            std::mem::swap(&mut q, &mut prod);
            if (j + 1) % RENORM_EVERY == 0 {
                renormalize_raw(&mut q, d);
            }
        }
    }
    Ok(())
}

/// Complex fast path for a planar twist; arithmetic mirrors [`walk_matrix`].
pub(crate) fn walk_complex(
    base: &BaseSystem,
    planar: PlanarAngle,
    x: &BasePoint,
    n: u64,
    mut obs: impl FnMut(u64, f64) -> Result<Complex64>,
    mut sink: impl FnMut(u64, &[f64]),
) -> Result<()> {
    let coords = CoordOrbit::new(base, x)?;
    let constant_step = match planar {
        PlanarAngle::Constant(b) => Some(b.sin_cos()),
        PlanarAngle::Varying(_) => None,
    };
    let mut qre = 1.0f64;
    let mut qim = 0.0f64;
    let mut buf = [0.0f64; 2];
    for j in 0..n {
        let t = coords.at(j);
        let f = obs(j, t)?;
        buf[0] = qre * f.re - qim * f.im;
        buf[1] = qre * f.im + qim * f.re;
        sink(j, &buf);
        if j + 1 < n {
            let (s, c) = match constant_step {
                Some(sc) => sc,
                None => planar.eval(t).sin_cos(),
            };
            let re = qre * c - qim * s;
            let im = qre * s + qim * c;
            qre = re;
            qim = im;
            if (j + 1) % RENORM_EVERY == 0 {
                let sc = 1.0 / qre.hypot(qim);
                qre *= sc;
                qim *= sc;
            }
        }
    }
    Ok(())
}

/// Number of terms after which the renormalized Abel tail is below `eps`:
/// `2 sup lambda^N <= eps`.
pub fn truncation_abel(lambda: f64, eps: f64, sup: f64) -> Result<u64> {
    check_lambda(lambda)?;
    truncation_from_bound(lambda, eps, 2.0 * sup)
}

/// Number of terms bounding the raw geometric series tail by `eps`:
/// `sup lambda^N / (1 - lambda) <= eps`.
pub fn truncation_series(lambda: f64, eps: f64, sup: f64) -> Result<u64> {
    check_lambda(lambda)?;
    truncation_from_bound(lambda, eps, sup / (1.0 - lambda))
}

/// Smallest `N` with `scale * lambda^N <= eps`.
pub fn truncation_plain(lambda: f64, eps: f64, scale: f64) -> Result<u64> {
    check_lambda(lambda)?;
    truncation_from_bound(lambda, eps, scale)
}

fn truncation_from_bound(lambda: f64, eps: f64, scale: f64) -> Result<u64> {
    if !(eps > 0.0) {
        return Err(Error::Config(format!("tolerance must be positive, got {eps}")));
    }
    if scale <= eps {
        return Ok(1);
    }
    let n = ((eps / scale).ln() / lambda.ln()).ceil();
    if !(n.is_finite() && n < MAX_WALK_TERMS as f64) {
        return Err(Error::Unsupported(format!(
            "tail bound needs {n:.3e} terms at lambda = {lambda}; loosen the tolerance"
        )));
    }
    Ok(n.max(1.0) as u64)
}

/// Twisted sequence `z_j` generated by a twist and an observable.
#[derive(Debug, Clone)]
pub struct TwistedSequence {
    pub base: BaseSystem,
    pub twist: TwistMap,
    pub observable: VectorMap,
}

impl TwistedSequence {
    pub fn new(base: BaseSystem, twist: TwistMap, observable: VectorMap) -> Result<Self> {
        if twist.dim() != observable.dim() {
            return Err(Error::DimensionMismatch {
                expected: twist.dim(),
                got: observable.dim(),
            });
        }
        Ok(Self {
            base,
            twist,
            observable,
        })
    }

    /// The drift sequence of a cocycle: `F = Psi^{-1}` and
    /// `f(x) = Psi(x)^{-1} rho(x)`, so that minus the Abel-weighted sum of
    /// `z_j` is the hyperbolized solution series.
    pub fn from_cocycle(spec: &CocycleSpec) -> Self {
        let observable = VectorMap::rotated(spec.psi.clone(), spec.rho.clone(), true)
            .expect("cocycle dims agree");
        Self {
            base: spec.base.clone(),
            twist: spec.psi.inverse(),
            observable,
        }
    }

    pub fn dim(&self) -> usize {
        self.twist.dim()
    }

    /// Analytic bound for `sup_j |z_j|` (the twist is an isometry).
    pub fn sup_bound(&self) -> f64 {
        self.observable.sup_bound()
    }

    fn complex_view(&self) -> Option<PlanarAngle> {
        if self.dim() != 2 || !self.observable.complex_capable() {
            return None;
        }
        self.twist.planar_angle()
    }

    /// Visits `z_0 .. z_{n-1}` at `x`, dispatching on the kernel path.
    pub fn visit(
        &self,
        x: &BasePoint,
        n: u64,
        path: KernelPath,
        sink: impl FnMut(u64, &[f64]),
    ) -> Result<()> {
        let planar = match path {
            KernelPath::Matrix => None,
            KernelPath::Complex => Some(self.complex_view().ok_or_else(|| {
                Error::Unsupported("complex path needs a planar twist and l = 2".into())
            })?),
            KernelPath::Auto => self.complex_view(),
        };
        match planar {
            Some(angle) => walk_complex(
                &self.base,
                angle,
                x,
                n,
                |_, t| {
                    Ok(self
                        .observable
                        .eval_complex(t)
                        .expect("complex capability checked"))
                },
                sink,
            ),
            None => walk_matrix(
                &self.base,
                &self.twist,
                x,
                n,
                |_, t, buf| {
                    self.observable.eval_into(t, buf);
                    Ok(())
                },
                sink,
            ),
        }
    }

    /// First `n` terms, for diagnostics and small cross-checks.
    pub fn terms(&self, x: &BasePoint, n: u64) -> Result<Vec<FiberVector>> {
        let mut out = Vec::with_capacity(n as usize);
        self.visit(x, n, KernelPath::Auto, |_, z| {
            out.push(FiberVector::from_slice(z));
        })?;
        Ok(out)
    }

    pub fn max_term_norm(&self, x: &BasePoint, n: u64) -> Result<f64> {
        let mut sup = 0.0f64;
        self.visit(x, n, KernelPath::Auto, |_, z| {
            sup = sup.max(crate::numeric::norm(z));
        })?;
        Ok(sup)
    }

    /// Cesaro mean of the first `n` terms.
    pub fn cesaro(&self, x: &BasePoint, n: u64) -> Result<FiberVector> {
        Ok(self.cesaro_at(x, &[n])?.pop().expect("one snapshot"))
    }

    /// Cesaro means at every `N` in an ascending schedule, in one pass.
    pub fn cesaro_at(&self, x: &BasePoint, schedule: &[u64]) -> Result<Vec<FiberVector>> {
        validate_schedule(schedule)?;
        let n_max = *schedule.last().expect("nonempty schedule");
        let mut acc = KahanVec::zeros(self.dim());
        let mut out = Vec::with_capacity(schedule.len());
        let mut next = 0usize;
        self.visit(x, n_max, KernelPath::Auto, |j, z| {
            acc.add(z);
            while next < schedule.len() && j + 1 == schedule[next] {
                out.push(FiberVector::from_vec(
                    acc.scaled_value(1.0 / schedule[next] as f64),
                ));
                next += 1;
            }
        })?;
        Ok(out)
    }

    /// Truncated, mass-renormalized Abel mean
    /// `sum_{j<N*} lambda^j z_j / sum_{j<N*} lambda^j`.
    pub fn abel(&self, x: &BasePoint, lambda: f64, eps: f64) -> Result<FiberVector> {
        Ok(self.abel_at(x, &[lambda], eps)?.pop().expect("one value"))
    }

    /// Abel means for several `lambda` in one pass, each truncated at its
    /// own tail bound.
    pub fn abel_at(&self, x: &BasePoint, lambdas: &[f64], eps: f64) -> Result<Vec<FiberVector>> {
        if lambdas.is_empty() {
            return Ok(Vec::new());
        }
        let sup = self.sup_bound();
        let mut cutoffs = Vec::with_capacity(lambdas.len());
        for &l in lambdas {
            cutoffs.push(truncation_abel(l, eps, sup)?);
        }
        let n_max = *cutoffs.iter().max().expect("nonempty");
        let dim = self.dim();
        let mut pows = vec![1.0f64; lambdas.len()];
        let mut sums: Vec<KahanVec> = lambdas.iter().map(|_| KahanVec::zeros(dim)).collect();
        let mut masses = vec![KahanSum::new(); lambdas.len()];
        self.visit(x, n_max, KernelPath::Auto, |j, z| {
            for (k, &l) in lambdas.iter().enumerate() {
                if j < cutoffs[k] {
                    sums[k].add_scaled(pows[k], z);
                    masses[k].add(pows[k]);
                    pows[k] *= l;
                }
            }
        })?;
        Ok(sums
            .iter()
            .zip(&masses)
            .map(|(s, m)| FiberVector::from_vec(s.scaled_value(1.0 / m.value())))
            .collect())
    }
}

fn validate_schedule(schedule: &[u64]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::Config("empty schedule".into()));
    }
    for w in schedule.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Config("schedule must be strictly increasing".into()));
        }
    }
    if schedule[0] == 0 {
        return Err(Error::Config("schedule entries must be positive".into()));
    }
    Ok(())
}

/// Exponential average `S_lambda(f)(x) = (1-lambda) sum_j lambda^j f(T^j x)`
/// of an untwisted observable, truncated and mass-renormalized.
pub fn exp_average(
    base: &BaseSystem,
    f: &VectorMap,
    x: &BasePoint,
    lambda: f64,
    eps: f64,
) -> Result<FiberVector> {
    TwistedSequence::new(base.clone(), TwistMap::identity(f.dim()), f.clone())?
        .abel(x, lambda, eps)
}

/// One row of an Abel-versus-Cesaro comparison at the paired schedule
/// `lambda = 1 - 1/N`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct FrobeniusRow {
    pub n: u64,
    pub lambda: f64,
    pub cesaro: Vec<f64>,
    pub abel: Vec<f64>,
    pub discrepancy: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct FrobeniusReport {
    pub rows: Vec<FrobeniusRow>,
    pub max_discrepancy: f64,
}

/// Compares Cesaro and Abel means along the paired schedule
/// `(N, 1 - 1/N)`. When the Cesaro means converge, the Abel means must
/// follow them; the discrepancy column quantifies how tightly.
pub fn frobenius_compare(
    seq: &TwistedSequence,
    x: &BasePoint,
    n_schedule: &[u64],
    eps: f64,
) -> Result<FrobeniusReport> {
    validate_schedule(n_schedule)?;
    if n_schedule[0] < 2 {
        return Err(Error::Config(
            "paired schedule needs N >= 2 so that lambda = 1 - 1/N is in (0, 1)".into(),
        ));
    }
    let lambdas: Vec<f64> = n_schedule.iter().map(|&n| 1.0 - 1.0 / n as f64).collect();
    let cesaro = seq.cesaro_at(x, n_schedule)?;
    let abel = seq.abel_at(x, &lambdas, eps)?;
    let mut rows = Vec::with_capacity(n_schedule.len());
    let mut max_disc = 0.0f64;
    for (k, &n) in n_schedule.iter().enumerate() {
        let discrepancy = cesaro[k].distance(&abel[k]);
        max_disc = max_disc.max(discrepancy);
        rows.push(FrobeniusRow {
            n,
            lambda: lambdas[k],
            cesaro: cesaro[k].as_slice().to_vec(),
            abel: abel[k].as_slice().to_vec(),
            discrepancy,
        });
    }
    Ok(FrobeniusReport {
        rows,
        max_discrepancy: max_disc,
    })
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct TauberianReport {
    pub rows: Vec<FrobeniusRow>,
    /// Largest term norm seen along the walk.
    pub max_term_norm: f64,
    /// Analytic bound the terms must respect.
    pub sup_bound: f64,
    pub bounded: bool,
    /// Whether the Abel-Cesaro discrepancy is non-increasing along the
    /// schedule (up to 1e-12 slack).
    pub discrepancy_decreasing: bool,
}

/// Converse probe: for a bounded sequence, Abel convergence forces Cesaro
/// convergence, so the paired discrepancies should shrink along the
/// schedule. The report exposes the boundedness certificate together with
/// the discrepancies.
pub fn tauberian_probe(
    seq: &TwistedSequence,
    x: &BasePoint,
    n_schedule: &[u64],
    eps: f64,
) -> Result<TauberianReport> {
    let report = frobenius_compare(seq, x, n_schedule, eps)?;
    let n_max = *n_schedule.last().expect("nonempty schedule");
    let max_term_norm = seq.max_term_norm(x, n_max)?;
    let sup_bound = seq.sup_bound();
    let decreasing = report
        .rows
        .windows(2)
        .all(|w| w[1].discrepancy <= w[0].discrepancy + 1e-12);
    Ok(TauberianReport {
        rows: report.rows,
        max_term_norm,
        sup_bound,
        bounded: max_term_norm <= sup_bound + 1e-9,
        discrepancy_decreasing: decreasing,
    })
}

/// Cauchy-in-L2 probe for the von Neumann means: the L2(grid) distance
/// between the `n`-th and `2n`-th Cesaro means of the twisted sequence.
pub fn von_neumann_residual(seq: &TwistedSequence, grid: &SampleGrid, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Config("von Neumann probe needs n >= 1".into()));
    }
    let dim = seq.dim();
    let mut total = KahanSum::new();
    for x in grid.iter() {
        let mut acc = KahanVec::zeros(dim);
        let mut at_n = vec![0.0; dim];
        seq.visit(x, 2 * n, KernelPath::Auto, |j, z| {
            acc.add(z);
            if j + 1 == n {
                at_n = acc.scaled_value(1.0 / n as f64);
            }
        })?;
        let at_2n = acc.scaled_value(1.0 / (2 * n) as f64);
        let d = crate::numeric::distance(&at_n, &at_2n);
        total.add(d * d);
    }
    Ok((total.value() / grid.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::golden;
    use std::f64::consts::TAU;

    fn untwisted_harmonic() -> TwistedSequence {
        TwistedSequence::new(
            BaseSystem::circle(golden()),
            TwistMap::identity(2),
            VectorMap::fourier(vec![(1, Complex64::new(1.0, 0.0))]),
        )
        .unwrap()
    }

    #[test]
    fn cesaro_of_constant_is_exact() {
        let seq = TwistedSequence::new(
            BaseSystem::circle(golden()),
            TwistMap::identity(2),
            VectorMap::constant(vec![0.3, -0.7]),
        )
        .unwrap();
        let m = seq.cesaro(&BasePoint::circle(0.1), 10_000).unwrap();
        assert!((m[0] - 0.3).abs() < 1e-15);
        assert!((m[1] + 0.7).abs() < 1e-15);
    }

    #[test]
    fn abel_of_constant_is_exact() {
        let seq = TwistedSequence::new(
            BaseSystem::circle(golden()),
            TwistMap::identity(2),
            VectorMap::constant(vec![1.0, 2.0]),
        )
        .unwrap();
        for lambda in [0.5, 0.9, 0.99, 0.999] {
            let a = seq.abel(&BasePoint::circle(0.4), lambda, 1e-12).unwrap();
            assert!((a[0] - 1.0).abs() < 1e-15, "lambda {lambda}: {}", a[0]);
            assert!((a[1] - 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn untwisted_harmonic_cesaro_matches_geometric_sum() {
        let seq = untwisted_harmonic();
        let t0 = 0.21;
        let n = 1000u64;
        let m = seq.cesaro(&BasePoint::circle(t0), n).unwrap();
        let z = Complex64::from_polar(1.0, TAU * golden());
        let head = Complex64::from_polar(1.0, TAU * t0);
        let exact = head * (Complex64::new(1.0, 0.0) - z.powu(n as u32))
            / (Complex64::new(1.0, 0.0) - z)
            / (n as f64);
        assert!((m[0] - exact.re).abs() < 1e-12);
        assert!((m[1] - exact.im).abs() < 1e-12);
    }

    #[test]
    fn twisted_constant_matches_rotation_geometric_sum() {
        let beta = 1.1;
        let seq = TwistedSequence::new(
            BaseSystem::circle(golden()),
            TwistMap::constant_rotation(beta),
            VectorMap::constant(vec![0.4, -0.1]),
        )
        .unwrap();
        let n = 2000u64;
        let m = seq.cesaro(&BasePoint::circle(0.0), n).unwrap();
        let w = Complex64::from_polar(1.0, beta);
        let c = Complex64::new(0.4, -0.1);
        let exact = c * (Complex64::new(1.0, 0.0) - w.powu(n as u32))
            / (Complex64::new(1.0, 0.0) - w)
            / (n as f64);
        assert!((m[0] - exact.re).abs() < 1e-12);
        assert!((m[1] - exact.im).abs() < 1e-12);
    }

    #[test]
    fn matrix_and_complex_paths_agree() {
        let seq = TwistedSequence::new(
            BaseSystem::circle(golden()),
            TwistMap::constant_rotation(0.9),
            VectorMap::fourier(vec![
                (1, Complex64::new(0.5, 0.2)),
                (-2, Complex64::new(-0.1, 0.3)),
            ]),
        )
        .unwrap();
        let x = BasePoint::circle(0.05);
        let n = 5000u64;
        let mut a = KahanVec::zeros(2);
        seq.visit(&x, n, KernelPath::Matrix, |_, z| a.add(z)).unwrap();
        let mut b = KahanVec::zeros(2);
        seq.visit(&x, n, KernelPath::Complex, |_, z| b.add(z)).unwrap();
        let pa = a.scaled_value(1.0 / n as f64);
        let pb = b.scaled_value(1.0 / n as f64);
        assert!(crate::numeric::distance(&pa, &pb) <= 1e-14);
    }

    #[test]
    fn abel_is_stable_under_tolerance_refinement() {
        let seq = untwisted_harmonic();
        let x = BasePoint::circle(0.3);
        for lambda in [0.9, 0.99] {
            for eps in [1e-8, 1e-10] {
                let coarse = seq.abel(&x, lambda, eps).unwrap();
                let fine = seq.abel(&x, lambda, eps / 10.0).unwrap();
                assert!(coarse.distance(&fine) <= eps);
            }
        }
    }

    #[test]
    fn alternating_sequence_frobenius_envelope() {
        // twist by a half turn makes z_j = (-1)^j c
        let seq = TwistedSequence::new(
            BaseSystem::circle(golden()),
            TwistMap::constant_rotation(std::f64::consts::PI),
            VectorMap::constant(vec![1.0, 0.0]),
        )
        .unwrap();
        let report =
            frobenius_compare(&seq, &BasePoint::circle(0.2), &[100, 1000, 10_000], 1e-12).unwrap();
        for row in &report.rows {
            assert!(
                row.discrepancy <= 2.0 / row.n as f64 + 1e-12,
                "N = {}: {}",
                row.n,
                row.discrepancy
            );
        }
        let d: Vec<f64> = report.rows.iter().map(|r| r.discrepancy).collect();
        assert!(d[1] <= d[0] && d[2] <= d[1]);
    }

    #[test]
    fn tauberian_probe_certifies_boundedness() {
        let seq = untwisted_harmonic();
        let rep = tauberian_probe(&seq, &BasePoint::circle(0.0), &[100, 1000], 1e-10).unwrap();
        assert!(rep.bounded);
        assert!(rep.max_term_norm <= 1.0 + 1e-12);
        assert!(rep.discrepancy_decreasing);
    }

    #[test]
    fn von_neumann_residual_of_invariant_function_vanishes() {
        // F = rot(-2 pi alpha) fixes f(theta) = e^{2 pi i theta}
        let alpha = golden();
        let seq = TwistedSequence::new(
            BaseSystem::circle(alpha),
            TwistMap::constant_rotation(-TAU * alpha),
            VectorMap::fourier(vec![(1, Complex64::new(1.0, 0.0))]),
        )
        .unwrap();
        let grid = seq.base.make_grid(64, 0.0).unwrap();
        let r = von_neumann_residual(&seq, &grid, 512).unwrap();
        assert!(r < 1e-12, "residual {r}");
    }

    #[test]
    fn von_neumann_residual_decays_for_generic_twist() {
        let seq = TwistedSequence::new(
            BaseSystem::circle(golden()),
            TwistMap::constant_rotation(1.0),
            VectorMap::fourier(vec![(1, Complex64::new(1.0, 0.0))]),
        )
        .unwrap();
        let grid = seq.base.make_grid(32, 0.0).unwrap();
        let r1 = von_neumann_residual(&seq, &grid, 100).unwrap();
        let r2 = von_neumann_residual(&seq, &grid, 1000).unwrap();
        assert!(r2 < r1);
        assert!(r2 < 1e-2);
    }

    #[test]
    fn finite_base_walk_is_periodic() {
        let seq = TwistedSequence::new(
            BaseSystem::finite(4).unwrap(),
            TwistMap::identity(1),
            VectorMap::Trig {
                components: vec![TrigPolyFixture::ramp()],
            },
        )
        .unwrap();
        let terms = seq.terms(&BasePoint::finite(1, 4), 8).unwrap();
        for j in 0..4 {
            assert_eq!(terms[j].as_slice(), terms[j + 4].as_slice());
        }
    }

    struct TrigPolyFixture;
    impl TrigPolyFixture {
        fn ramp() -> crate::registry::TrigPoly {
            crate::registry::TrigPoly {
                mean: 0.5,
                cos_coeffs: vec![1.0],
                sin_coeffs: vec![0.25],
            }
        }
    }

    #[test]
    fn truncation_bounds_are_monotone() {
        let n1 = truncation_abel(0.9, 1e-10, 1.0).unwrap();
        let n2 = truncation_abel(0.99, 1e-10, 1.0).unwrap();
        assert!(n2 > n1);
        let s1 = truncation_series(0.9, 1e-10, 1.0).unwrap();
        assert!(s1 > n1 / 2);
        assert!(truncation_abel(0.5, 1e-8, 0.0).unwrap() == 1);
    }
}
