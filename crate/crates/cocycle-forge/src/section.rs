//! Sections of the fiber bundle `X x R^l`, i.e. candidate solutions
//! `u : X -> R^l`.
//!
//! Three representations cover every workflow in the crate: closed-form
//! registry maps, values tabulated on a sample grid, and lazily evaluated
//! hyperbolized solutions (the geometric series is summed on demand at any
//! base point, grid or not). Grid sections only answer at their own nodes;
//! asking anywhere else is a domain error, never an interpolation.

use crate::base::{BasePoint, SampleGrid};
use crate::cocycle::CocycleSpec;
use crate::error::{Error, Result};
use crate::isometry::FiberVector;
use crate::registry::VectorMap;
use crate::solver;

/// Matching tolerance (in turns) for grid lookups.
const GRID_MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub enum Section {
    /// Closed-form section from the registry.
    Analytic { map: VectorMap },
    /// Values on the nodes of a sample grid.
    Grid {
        grid: SampleGrid,
        values: Vec<FiberVector>,
        /// Accuracy of the stored values, carried into error budgets.
        tol: f64,
    },
    /// The hyperbolized solution `u_lambda`, evaluated by its series.
    Hyperbolized {
        spec: Box<CocycleSpec>,
        lambda: f64,
        /// Series truncation tolerance.
        tol: f64,
    },
}

impl Section {
    pub fn analytic(map: VectorMap) -> Self {
        Section::Analytic { map }
    }

    pub fn grid(grid: SampleGrid, values: Vec<FiberVector>, tol: f64) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Section::Grid { grid, values, tol })
    }

    pub fn hyperbolized(spec: CocycleSpec, lambda: f64, tol: f64) -> Result<Self> {
        crate::cocycle::check_lambda(lambda)?;
        Ok(Section::Hyperbolized {
            spec: Box::new(spec),
            lambda,
            tol,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            Section::Analytic { map } => map.dim(),
            Section::Grid { values, .. } => values.first().map_or(0, FiberVector::dim),
            Section::Hyperbolized { spec, .. } => spec.dim(),
        }
    }

    pub fn lambda(&self) -> Option<f64> {
        match self {
            Section::Hyperbolized { lambda, .. } => Some(*lambda),
            _ => None,
        }
    }

    /// Evaluation accuracy of the representation itself.
    pub fn tol(&self) -> f64 {
        match self {
            Section::Analytic { .. } => 0.0,
            Section::Grid { tol, .. } | Section::Hyperbolized { tol, .. } => *tol,
        }
    }

    pub fn eval(&self, x: &BasePoint) -> Result<FiberVector> {
        match self {
            Section::Analytic { map } => Ok(map.eval(x.coordinate())),
            Section::Grid { grid, values, .. } => {
                let idx = locate(grid, x)?;
                Ok(values[idx].clone())
            }
            Section::Hyperbolized { spec, lambda, tol } => {
                solver::u_lambda_at(spec, x, *lambda, *tol)
            }
        }
    }

    /// Upper bound for `sup |u|`, analytic where possible.
    pub fn sup_bound(&self) -> f64 {
        match self {
            Section::Analytic { map } => map.sup_bound(),
            Section::Grid { values, tol, .. } => {
                values.iter().map(FiberVector::norm).fold(0.0, f64::max) + tol
            }
            Section::Hyperbolized { spec, lambda, tol } => {
                spec.sup_rho_bound() / (1.0 - lambda) + tol
            }
        }
    }

    /// Max norm over the nodes of a grid.
    pub fn sup_over(&self, grid: &SampleGrid) -> Result<f64> {
        let mut sup = 0.0f64;
        for x in grid.iter() {
            sup = sup.max(self.eval(x)?.norm());
        }
        Ok(sup)
    }
}

fn locate(grid: &SampleGrid, x: &BasePoint) -> Result<usize> {
    let err = || Error::SectionDomain("point is not a node of the sample grid".into());
    match x {
        BasePoint::Finite { index, period } => {
            if grid.len() != *period as usize {
                return Err(err());
            }
            Ok(*index as usize)
        }
        BasePoint::Circle { theta } => {
            let m = grid.len();
            let pos = crate::base::reduce_mod1(theta - grid.offset) * m as f64;
            let idx = (pos.round() as usize) % m;
            if grid.points[idx].distance(x)? <= GRID_MATCH_TOL {
                Ok(idx)
            } else {
                Err(err())
            }
        }
        BasePoint::Torus { coords } => {
            let s = grid.axis_size;
            let mut flat = 0usize;
            for c in coords.iter().rev() {
                let pos = crate::base::reduce_mod1(c - grid.offset) * s as f64;
                let idx = (pos.round() as usize) % s;
                flat = flat * s + idx;
            }
            if flat < grid.len() && grid.points[flat].distance(x)? <= GRID_MATCH_TOL {
                Ok(flat)
            } else {
                Err(err())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::BaseSystem;

    #[test]
    fn grid_lookup_is_exact_on_nodes() {
        let base = BaseSystem::circle(0.25);
        let grid = base.make_grid(8, 0.0).unwrap();
        let values: Vec<FiberVector> = (0..8)
            .map(|j| FiberVector::from_vec(vec![j as f64]))
            .collect();
        let s = Section::grid(grid.clone(), values, 0.0).unwrap();
        for (j, p) in grid.iter().enumerate() {
            assert_eq!(s.eval(p).unwrap()[0], j as f64);
        }
    }

    #[test]
    fn grid_lookup_rejects_off_nodes() {
        let base = BaseSystem::circle(0.25);
        let grid = base.make_grid(8, 0.0).unwrap();
        let values = vec![FiberVector::zeros(1); 8];
        let s = Section::grid(grid, values, 0.0).unwrap();
        let off = BasePoint::circle(0.07);
        assert!(matches!(s.eval(&off), Err(Error::SectionDomain(_))));
    }

    #[test]
    fn torus_grid_lookup_roundtrips() {
        let base = BaseSystem::torus(vec![0.3, 0.7]).unwrap();
        let grid = base.make_grid(5, 0.0).unwrap();
        let values: Vec<FiberVector> = (0..25)
            .map(|j| FiberVector::from_vec(vec![j as f64]))
            .collect();
        let s = Section::grid(grid.clone(), values, 0.0).unwrap();
        for (j, p) in grid.iter().enumerate() {
            assert_eq!(s.eval(p).unwrap()[0], j as f64, "node {j}");
        }
    }

    #[test]
    fn finite_lookup_uses_index() {
        let base = BaseSystem::finite(3).unwrap();
        let grid = base.make_grid(3, 0.0).unwrap();
        let values: Vec<FiberVector> = (0..3)
            .map(|j| FiberVector::from_vec(vec![10.0 * j as f64]))
            .collect();
        let s = Section::grid(grid, values, 0.0).unwrap();
        assert_eq!(s.eval(&BasePoint::finite(2, 3)).unwrap()[0], 20.0);
    }
}
