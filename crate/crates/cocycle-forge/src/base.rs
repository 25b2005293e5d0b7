//! Base dynamics: circle rotations, torus rotations, finite cyclic shifts.
//!
//! Circle and torus coordinates are stored in turns and always reduced to
//! `[0, 1)`. Working in turns keeps the rotation map a pure mod-1 addition,
//! so long orbits can be evaluated pointwise in O(1) with flat rounding
//! error instead of iterating a drifting recurrence: `n * alpha mod 1` is
//! computed with a two-product split so the error stays near one ulp
//! uniformly in `n`.

use crate::error::{Error, Result};

/// `(sqrt(5) - 1) / 2`, the canonical badly-approximable rotation number.
pub fn golden() -> f64 {
    (5.0_f64.sqrt() - 1.0) / 2.0
}

/// Reduces to `[0, 1)`, guarding the `rem_euclid` edge case that rounds a
/// tiny negative input up to exactly 1.0.
#[inline]
pub fn reduce_mod1(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r >= 1.0 {
        r - 1.0
    } else {
        r
    }
}

/// `(t0 + n * alpha) mod 1` with error independent of `n`.
///
/// `n * alpha` is split into an exact high part and an fma residual; the high
/// part reduces mod 1 exactly because a float and its floor subtract without
/// rounding. Orbit loops call this instead of accumulating `t += alpha`.
#[inline]
pub fn orbit_coord(t0: f64, alpha: f64, n: i64) -> f64 {
    let nf = n as f64;
    let hi = nf * alpha;
    let lo = nf.mul_add(alpha, -hi);
    reduce_mod1(hi.rem_euclid(1.0) + lo + t0)
}

/// Distance on the circle in turns: `min(|a - b| mod 1, 1 - |a - b| mod 1)`.
#[inline]
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let d = reduce_mod1(a - b);
    d.min(1.0 - d)
}

/// Point of a base space.
#[derive(Debug, Clone, PartialEq)]
pub enum BasePoint {
    Circle { theta: f64 },
    Torus { coords: Vec<f64> },
    Finite { index: u64, period: u64 },
}

impl BasePoint {
    pub fn circle(theta: f64) -> Self {
        BasePoint::Circle {
            theta: reduce_mod1(theta),
        }
    }

    pub fn torus(coords: Vec<f64>) -> Self {
        BasePoint::Torus {
            coords: coords.into_iter().map(reduce_mod1).collect(),
        }
    }

    pub fn finite(index: u64, period: u64) -> Self {
        assert!(period > 0, "finite base needs positive period");
        BasePoint::Finite {
            index: index % period,
            period,
        }
    }

    /// Scalar coordinate in turns used by the closed-form registry: the
    /// circle angle, the first torus angle, or `index / period`.
    pub fn coordinate(&self) -> f64 {
        match self {
            BasePoint::Circle { theta } => *theta,
            BasePoint::Torus { coords } => coords[0],
            BasePoint::Finite { index, period } => *index as f64 / *period as f64,
        }
    }

    /// Metric on the base, in turns. Finite points are compared through
    /// their cyclic distance scaled by the period.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        match (self, other) {
            (BasePoint::Circle { theta: a }, BasePoint::Circle { theta: b }) => {
                Ok(circle_distance(*a, *b))
            }
            (BasePoint::Torus { coords: a }, BasePoint::Torus { coords: b })
                if a.len() == b.len() =>
            {
                Ok(a.iter()
                    .zip(b)
                    .map(|(x, y)| circle_distance(*x, *y))
                    .fold(0.0, f64::max))
            }
            (
                BasePoint::Finite {
                    index: a,
                    period: p,
                },
                BasePoint::Finite {
                    index: b,
                    period: q,
                },
            ) if p == q => {
                let d = (*a as i64 - *b as i64).rem_euclid(*p as i64) as u64;
                Ok(d.min(p - d) as f64 / *p as f64)
            }
            _ => Err(Error::BaseMismatch("incomparable base points".into())),
        }
    }
}

/// Compact base system with its transformation `T`.
#[derive(Debug, Clone, PartialEq)]
pub enum BaseKind {
    /// `theta -> theta + alpha mod 1`, `alpha` in turns.
    CircleRotation { alpha: f64 },
    /// Coordinatewise rotation of the `d`-torus.
    TorusRotation { alpha: Vec<f64> },
    /// `j -> j + 1 mod p`.
    FiniteCyclic { period: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaseSystem {
    pub kind: BaseKind,
    /// Documented standing assumption recorded in reports: the skew products
    /// built over this base are treated as uniquely ergodic extensions.
    /// Nothing is computed from the flag.
    pub uniquely_ergodic_extension: bool,
}

impl BaseSystem {
    pub fn circle(alpha: f64) -> Self {
        Self {
            kind: BaseKind::CircleRotation {
                alpha: reduce_mod1(alpha),
            },
            uniquely_ergodic_extension: true,
        }
    }

    pub fn torus(alpha: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::Config("torus rotation needs at least one angle".into()));
        }
        Ok(Self {
            kind: BaseKind::TorusRotation {
                alpha: alpha.into_iter().map(reduce_mod1).collect(),
            },
            uniquely_ergodic_extension: true,
        })
    }

    pub fn finite(period: u64) -> Result<Self> {
        if period == 0 {
            return Err(Error::Config("finite base needs positive period".into()));
        }
        Ok(Self {
            kind: BaseKind::FiniteCyclic { period },
            uniquely_ergodic_extension: true,
        })
    }

    pub fn with_unique_ergodicity(mut self, flag: bool) -> Self {
        self.uniquely_ergodic_extension = flag;
        self
    }

    /// `T^n x` for any signed `n`, evaluated in O(1).
    pub fn step(&self, x: &BasePoint, n: i64) -> Result<BasePoint> {
        match (&self.kind, x) {
            (BaseKind::CircleRotation { alpha }, BasePoint::Circle { theta }) => {
                Ok(BasePoint::Circle {
                    theta: orbit_coord(*theta, *alpha, n),
                })
            }
            (BaseKind::TorusRotation { alpha }, BasePoint::Torus { coords })
                if alpha.len() == coords.len() =>
            {
                Ok(BasePoint::Torus {
                    coords: coords
                        .iter()
                        .zip(alpha)
                        .map(|(t, a)| orbit_coord(*t, *a, n))
                        .collect(),
                })
            }
            (BaseKind::FiniteCyclic { period }, BasePoint::Finite { index, period: q })
                if period == q =>
            {
                let p = *period as i64;
                let shifted = (*index as i64 + n.rem_euclid(p)).rem_euclid(p) as u64;
                Ok(BasePoint::Finite {
                    index: shifted,
                    period: *period,
                })
            }
            _ => Err(Error::BaseMismatch(
                "point does not match base system".into(),
            )),
        }
    }

    pub fn forward(&self, x: &BasePoint) -> Result<BasePoint> {
        self.step(x, 1)
    }

    pub fn backward(&self, x: &BasePoint) -> Result<BasePoint> {
        self.step(x, -1)
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            BaseKind::CircleRotation { .. } => 1,
            BaseKind::TorusRotation { alpha } => alpha.len(),
            BaseKind::FiniteCyclic { .. } => 1,
        }
    }

    /// Uniform sample grid used both as evaluation set and as quadrature
    /// nodes for the invariant measure. For the finite base the grid is the
    /// full state space regardless of the requested size; for the torus the
    /// requested size applies per axis.
    pub fn make_grid(&self, size: usize, offset: f64) -> Result<SampleGrid> {
        if size == 0 {
            return Err(Error::Config("grid size must be positive".into()));
        }
        let points = match &self.kind {
            BaseKind::CircleRotation { .. } => (0..size)
                .map(|j| BasePoint::Circle {
                    theta: reduce_mod1(j as f64 / size as f64 + offset),
                })
                .collect(),
            BaseKind::TorusRotation { alpha } => {
                let d = alpha.len();
                let total = size.pow(d as u32);
                let mut pts = Vec::with_capacity(total);
                for flat in 0..total {
                    let mut rem = flat;
                    let mut coords = Vec::with_capacity(d);
                    for _ in 0..d {
                        coords.push(reduce_mod1((rem % size) as f64 / size as f64 + offset));
                        rem /= size;
                    }
                    pts.push(BasePoint::Torus { coords });
                }
                pts
            }
            BaseKind::FiniteCyclic { period } => (0..*period)
                .map(|index| BasePoint::Finite {
                    index,
                    period: *period,
                })
                .collect(),
        };
        let axis_size = match &self.kind {
            BaseKind::CircleRotation { .. } => size,
            BaseKind::TorusRotation { .. } => size,
            BaseKind::FiniteCyclic { period } => *period as usize,
        };
        Ok(SampleGrid {
            size: points.len(),
            axis_size,
            offset,
            points,
        })
    }
}

/// Finite family of base points with uniform quadrature weights.
#[derive(Debug, Clone)]
pub struct SampleGrid {
    pub points: Vec<BasePoint>,
    /// Total number of points.
    pub size: usize,
    /// Points per axis (equals `size` except on the torus).
    pub axis_size: usize,
    pub offset: f64,
}

impl SampleGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, BasePoint> {
        self.points.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_rotation_wraps() {
        let t = BaseSystem::circle(0.25);
        let x = BasePoint::circle(0.5);
        let y = t.step(&x, 2).unwrap();
        assert_eq!(y.coordinate(), 0.0);
    }

    #[test]
    fn finite_shift_wraps() {
        let t = BaseSystem::finite(4).unwrap();
        let x = BasePoint::finite(3, 4);
        let y = t.step(&x, 1).unwrap();
        assert_eq!(y, BasePoint::finite(0, 4));
        let z = t.step(&x, -7).unwrap();
        assert_eq!(z, BasePoint::finite(0, 4));
    }

    #[test]
    fn forward_backward_roundtrip() {
        let t = BaseSystem::circle(golden());
        let x = BasePoint::circle(0.123456789);
        for n in [1i64, 5, 100, 10_000, 100_000] {
            let y = t.step(&x, n).unwrap();
            let back = t.step(&y, -n).unwrap();
            assert!(
                x.distance(&back).unwrap() < 1e-12,
                "roundtrip at n = {n} drifted"
            );
        }
    }

    #[test]
    fn golden_orbit_points_are_distinct() {
        let t = BaseSystem::circle(golden());
        let mut x = BasePoint::circle(0.0);
        let mut seen = Vec::with_capacity(10_000);
        for _ in 0..10_000 {
            seen.push(x.coordinate());
            x = t.forward(&x).unwrap();
        }
        let mut sorted = seen.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for w in sorted.windows(2) {
            assert!(w[1] > w[0], "orbit revisited a point");
        }
    }

    #[test]
    fn orbit_coord_matches_iteration() {
        let alpha = golden();
        let mut t = 0.37;
        for j in 1..=100_000i64 {
            t = reduce_mod1(t + alpha);
            if j % 10_000 == 0 {
                let direct = orbit_coord(0.37, alpha, j);
                assert!(circle_distance(t, direct) < 1e-10);
            }
        }
    }

    #[test]
    fn grid_is_shifted_onto_itself_by_rotation() {
        let t = BaseSystem::circle(0.125);
        let grid = t.make_grid(8, 0.0).unwrap();
        for (j, p) in grid.iter().enumerate() {
            let image = t.forward(p).unwrap();
            let expected = &grid.points[(j + 1) % 8];
            assert!(image.distance(expected).unwrap() < 1e-15);
        }
    }

    #[test]
    fn finite_grid_is_full_state_space() {
        let t = BaseSystem::finite(6).unwrap();
        let grid = t.make_grid(1024, 0.0).unwrap();
        assert_eq!(grid.len(), 6);
    }

    #[test]
    fn torus_grid_is_product() {
        let t = BaseSystem::torus(vec![golden(), 0.3]).unwrap();
        let grid = t.make_grid(4, 0.0).unwrap();
        assert_eq!(grid.len(), 16);
    }

    #[test]
    fn reduce_mod1_handles_tiny_negatives() {
        let r = reduce_mod1(-1e-18);
        assert!((0.0..1.0).contains(&r));
    }
}
