//! Isometries of Euclidean space `R^l` in the form `v -> Psi v + rho` with
//! `Psi` orthogonal.
//!
//! [`OrthogonalMap`] owns its orthogonality invariant: every constructor
//! either builds an exactly orthogonal matrix from closed-form data or
//! re-orthonormalizes the input columns (modified Gram-Schmidt) and rejects
//! matrices that are not close to orthogonal to begin with. Inverses are
//! transposes throughout; no general linear solve ever appears on the
//! isometry path.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Input orthogonality defect above which construction is refused.
const MAX_INPUT_DEFECT: f64 = 1e-6;

/// Column norms below this indicate rank deficiency during Gram-Schmidt.
const MIN_PIVOT: f64 = 1e-8;

/// Orthogonal matrix acting on `R^l`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalMap {
    m: DMatrix<f64>,
}

impl OrthogonalMap {
    pub fn identity(dim: usize) -> Self {
        Self {
            m: DMatrix::identity(dim, dim),
        }
    }

    /// Planar rotation by `angle` radians (`l = 2`).
    pub fn rotation2(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self {
            m: DMatrix::from_row_slice(2, 2, &[c, -s, s, c]),
        }
    }

    /// Block-diagonal map: one planar rotation per angle, followed by
    /// `fixed_axes` fixed coordinate axes. With `flip_last` the final fixed
    /// axis carries a sign flip, which makes odd-dimensional twists with
    /// determinant -1 expressible.
    pub fn block_rotations(angles: &[f64], fixed_axes: usize, flip_last: bool) -> Self {
        let dim = 2 * angles.len() + fixed_axes;
        let mut m = DMatrix::identity(dim, dim);
        for (b, &a) in angles.iter().enumerate() {
            let (s, c) = a.sin_cos();
            let i = 2 * b;
            m[(i, i)] = c;
            m[(i, i + 1)] = -s;
            m[(i + 1, i)] = s;
            m[(i + 1, i + 1)] = c;
        }
        if flip_last {
            assert!(fixed_axes > 0, "flip_last requires at least one fixed axis");
            m[(dim - 1, dim - 1)] = -1.0;
        }
        Self { m }
    }

    /// Builds from an arbitrary square matrix. The columns are
    /// re-orthonormalized; inputs farther than `1e-6` from orthogonal are
    /// rejected rather than silently repaired.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        let defect = orthogonality_defect(&m);
        if defect > MAX_INPUT_DEFECT {
            return Err(Error::NotOrthogonal { defect });
        }
        let mut out = Self { m };
        out.renormalize()?;
        Ok(out)
    }

    /// Modified Gram-Schmidt pass over the columns. Used at construction and
    /// periodically by long cocycle products to keep rounding drift out of
    /// the orthogonality invariant.
    pub fn renormalize(&mut self) -> Result<()> {
        gram_schmidt(&mut self.m)
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn det(&self) -> f64 {
        self.m.determinant()
    }

    /// Max-entry distance of `Psi^T Psi` from the identity.
    pub fn orthogonality_defect(&self) -> f64 {
        orthogonality_defect(&self.m)
    }

    pub fn transpose(&self) -> Self {
        Self {
            m: self.m.transpose(),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(Self {
            m: &self.m * &other.m,
        })
    }

    pub fn apply(&self, v: &FiberVector) -> Result<FiberVector> {
        if self.dim() != v.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.dim(),
            });
        }
        Ok(FiberVector { v: &self.m * &v.v })
    }

    /// Applies the transpose, i.e. the inverse map.
    pub fn apply_inverse(&self, v: &FiberVector) -> Result<FiberVector> {
        if self.dim() != v.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.dim(),
            });
        }
        Ok(FiberVector {
            v: self.m.tr_mul(&v.v),
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn orthogonality_defect(m: &DMatrix<f64>) -> f64 {
    let gram = m.tr_mul(m);
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - target).abs());
        }
    }
    worst
}

fn gram_schmidt(m: &mut DMatrix<f64>) -> Result<()> {
    let n = m.ncols();
    for j in 0..n {
        for k in 0..j {
            let proj = m.column(k).dot(&m.column(j));
            let col_k = m.column(k).clone_owned();
            let mut col_j = m.column_mut(j);
            col_j.axpy(-proj, &col_k, 1.0);
        }
        let norm = m.column(j).norm();
        if norm < MIN_PIVOT {
            return Err(Error::NotOrthogonal { defect: 1.0 - norm });
        }
        m.column_mut(j).scale_mut(1.0 / norm);
    }
    Ok(())
}

/// Point of the fiber `R^l`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberVector {
    v: DVector<f64>,
}

impl FiberVector {
    pub fn zeros(dim: usize) -> Self {
        Self {
            v: DVector::zeros(dim),
        }
    }

    pub fn from_vec(coords: Vec<f64>) -> Self {
        Self {
            v: DVector::from_vec(coords),
        }
    }

    pub fn from_slice(coords: &[f64]) -> Self {
        Self {
            v: DVector::from_column_slice(coords),
        }
    }

    /// Identifies `C` with `R^2`.
    pub fn from_complex(z: Complex64) -> Self {
        Self::from_vec(vec![z.re, z.im])
    }

    pub fn to_complex(&self) -> Result<Complex64> {
        if self.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: self.dim(),
            });
        }
        Ok(Complex64::new(self.v[0], self.v[1]))
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    pub fn norm(&self) -> f64 {
        self.v.norm()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        (&self.v - &other.v).norm()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.v.as_slice()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { v: &self.v * s }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Self {
            v: &self.v + &other.v,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Self {
            v: &self.v - &other.v,
        }
    }

    pub fn neg(&self) -> Self {
        Self { v: -&self.v }
    }
}

impl std::ops::Index<usize> for FiberVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.v[i]
    }
}

/// Affine isometry `v -> Psi v + rho`.
#[derive(Debug, Clone, PartialEq)]
pub struct EuclideanIsometry {
    psi: OrthogonalMap,
    rho: FiberVector,
}

impl EuclideanIsometry {
    pub fn new(psi: OrthogonalMap, rho: FiberVector) -> Result<Self> {
        if psi.dim() != rho.dim() {
            return Err(Error::DimensionMismatch {
                expected: psi.dim(),
                got: rho.dim(),
            });
        }
        Ok(Self { psi, rho })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            psi: OrthogonalMap::identity(dim),
            rho: FiberVector::zeros(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.psi.dim()
    }

    pub fn linear_part(&self) -> &OrthogonalMap {
        &self.psi
    }

    pub fn translation_part(&self) -> &FiberVector {
        &self.rho
    }

    pub fn apply(&self, v: &FiberVector) -> Result<FiberVector> {
        Ok(self.psi.apply(v)?.add(&self.rho))
    }

    /// Composition acting left to right on points: `(a.compose(b))(v) = a(b(v))`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        let psi = self.psi.compose(&other.psi)?;
        let rho = self.psi.apply(&other.rho)?.add(&self.rho);
        Ok(Self { psi, rho })
    }

    /// `g^{-1} = (Psi^T, -Psi^T rho)`.
    pub fn inverse(&self) -> Self {
        let psi_inv = self.psi.transpose();
        let rho = psi_inv.apply(&self.rho).expect("dims match").neg();
        Self { psi: psi_inv, rho }
    }

    /// Re-orthonormalizes the linear part in place.
    pub fn renormalize(&mut self) -> Result<()> {
        self.psi.renormalize()
    }
}
