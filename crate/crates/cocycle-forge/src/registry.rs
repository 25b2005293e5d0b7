//! Closed-form registry of twists and observables.
//!
//! Every generator here is an exact formula in the scalar base coordinate
//! `t` (turns). Keeping the registry closed under pointwise evaluation,
//! inversion and frame rotation is what lets the oracles and the solver
//! cross-check each other without any interpolation step. On the torus the
//! registry reads the first angle only.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::isometry::{FiberVector, OrthogonalMap};

/// Angle-valued function of the base coordinate, in radians:
/// `beta(t) = constant + linear * 2 pi t + cos_coeff * cos(2 pi t) + sin_coeff * sin(2 pi t)`.
///
/// Integer `linear` keeps the rotation well defined on the circle; the
/// finite cyclic base accepts any slope.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AngleFn {
    pub constant: f64,
    pub linear: f64,
    pub cos_coeff: f64,
    pub sin_coeff: f64,
}

impl AngleFn {
    pub fn constant(beta: f64) -> Self {
        Self {
            constant: beta,
            ..Self::default()
        }
    }

    pub fn linear(k: f64) -> Self {
        Self {
            linear: k,
            ..Self::default()
        }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        if self.cos_coeff == 0.0 && self.sin_coeff == 0.0 {
            self.constant + self.linear * (TAU * t)
        } else {
            let (s, c) = (TAU * t).sin_cos();
            self.constant + self.linear * (TAU * t) + self.cos_coeff * c + self.sin_coeff * s
        }
    }

    pub fn is_constant(&self) -> bool {
        self.linear == 0.0 && self.cos_coeff == 0.0 && self.sin_coeff == 0.0
    }

    pub fn negate(&self) -> Self {
        Self {
            constant: -self.constant,
            linear: -self.linear,
            cos_coeff: -self.cos_coeff,
            sin_coeff: -self.sin_coeff,
        }
    }
}

/// Orthogonal twist `Psi(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum TwistMap {
    Identity { dim: usize },
    /// `l = 2`, rotation by a fixed angle in radians.
    ConstantRotation { beta: f64 },
    /// Block-diagonal planar rotations plus fixed axes; `flip_last` puts a
    /// sign flip on the last fixed axis.
    DiagonalRotations {
        blocks: Vec<AngleFn>,
        fixed_axes: usize,
        flip_last: bool,
    },
}

/// Resolved view of a twist that acts as a single planar rotation, used by
/// the complex fast path.
#[derive(Debug, Clone, Copy)]
pub enum PlanarAngle {
    Constant(f64),
    Varying(AngleFn),
}

impl PlanarAngle {
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            PlanarAngle::Constant(b) => *b,
            PlanarAngle::Varying(f) => f.eval(t),
        }
    }
}

impl TwistMap {
    pub fn identity(dim: usize) -> Self {
        TwistMap::Identity { dim }
    }

    pub fn constant_rotation(beta: f64) -> Self {
        TwistMap::ConstantRotation { beta }
    }

    /// Rotation by `2 pi k t`, the frame of the harmonic `e^{2 pi i k t}`.
    pub fn harmonic(k: i64) -> Self {
        TwistMap::DiagonalRotations {
            blocks: vec![AngleFn::linear(k as f64)],
            fixed_axes: 0,
            flip_last: false,
        }
    }

    pub fn diagonal(blocks: Vec<AngleFn>, fixed_axes: usize, flip_last: bool) -> Result<Self> {
        if blocks.is_empty() && fixed_axes == 0 {
            return Err(Error::Config("twist needs positive dimension".into()));
        }
        if flip_last && fixed_axes == 0 {
            return Err(Error::Config("flip_last requires a fixed axis".into()));
        }
        Ok(TwistMap::DiagonalRotations {
            blocks,
            fixed_axes,
            flip_last,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            TwistMap::Identity { dim } => *dim,
            TwistMap::ConstantRotation { .. } => 2,
            TwistMap::DiagonalRotations {
                blocks, fixed_axes, ..
            } => 2 * blocks.len() + fixed_axes,
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, TwistMap::Identity { .. })
    }

    /// The pointwise inverse twist `Psi(t)^{-1}`; rotations invert by angle
    /// negation, so the registry is closed under inversion.
    pub fn inverse(&self) -> Self {
        match self {
            TwistMap::Identity { dim } => TwistMap::Identity { dim: *dim },
            TwistMap::ConstantRotation { beta } => TwistMap::ConstantRotation { beta: -beta },
            TwistMap::DiagonalRotations {
                blocks,
                fixed_axes,
                flip_last,
            } => TwistMap::DiagonalRotations {
                blocks: blocks.iter().map(AngleFn::negate).collect(),
                fixed_axes: *fixed_axes,
                flip_last: *flip_last,
            },
        }
    }

    /// Planar-rotation view when the whole twist is one rotation block.
    pub fn planar_angle(&self) -> Option<PlanarAngle> {
        match self {
            TwistMap::Identity { dim: 2 } => Some(PlanarAngle::Constant(0.0)),
            TwistMap::ConstantRotation { beta } => Some(PlanarAngle::Constant(*beta)),
            TwistMap::DiagonalRotations {
                blocks,
                fixed_axes: 0,
                flip_last: false,
            } if blocks.len() == 1 => {
                if blocks[0].is_constant() {
                    Some(PlanarAngle::Constant(blocks[0].constant))
                } else {
                    Some(PlanarAngle::Varying(blocks[0]))
                }
            }
            _ => None,
        }
    }

    pub fn eval(&self, t: f64) -> OrthogonalMap {
        match self {
            TwistMap::Identity { dim } => OrthogonalMap::identity(*dim),
            TwistMap::ConstantRotation { beta } => OrthogonalMap::rotation2(*beta),
            TwistMap::DiagonalRotations {
                blocks,
                fixed_axes,
                flip_last,
            } => {
                let angles: Vec<f64> = blocks.iter().map(|b| b.eval(t)).collect();
                OrthogonalMap::block_rotations(&angles, *fixed_axes, *flip_last)
            }
        }
    }

    /// Writes `Psi(t)` row-major into `out` (length `dim * dim`) without
    /// allocating. Hot loops use this.
    pub fn write_matrix(&self, t: f64, out: &mut [f64]) {
        let d = self.dim();
        debug_assert_eq!(out.len(), d * d);
        out.fill(0.0);
        match self {
            TwistMap::Identity { .. } => {
                for i in 0..d {
                    out[i * d + i] = 1.0;
                }
            }
            TwistMap::ConstantRotation { beta } => {
                let (s, c) = beta.sin_cos();
                out[0] = c;
                out[1] = -s;
                out[2] = s;
                out[3] = c;
            }
            TwistMap::DiagonalRotations {
                blocks,
                fixed_axes,
                flip_last,
            } => {
                for (b, f) in blocks.iter().enumerate() {
                    let (s, c) = f.eval(t).sin_cos();
                    let i = 2 * b;
                    out[i * d + i] = c;
                    out[i * d + i + 1] = -s;
                    out[(i + 1) * d + i] = s;
                    out[(i + 1) * d + i + 1] = c;
                }
                for a in 0..*fixed_axes {
                    let i = 2 * blocks.len() + a;
                    out[i * d + i] = 1.0;
                }
                if *flip_last {
                    out[d * d - 1] = -1.0;
                }
            }
        }
    }
}

/// Real trigonometric polynomial
/// `mean + sum_k cos_coeffs[k-1] cos(2 pi k t) + sin_coeffs[k-1] sin(2 pi k t)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrigPoly {
    pub mean: f64,
    pub cos_coeffs: Vec<f64>,
    pub sin_coeffs: Vec<f64>,
}

impl TrigPoly {
    pub fn constant(mean: f64) -> Self {
        Self {
            mean,
            ..Self::default()
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut acc = self.mean;
        let degree = self.cos_coeffs.len().max(self.sin_coeffs.len());
        for k in 1..=degree {
            let (s, c) = (TAU * k as f64 * t).sin_cos();
            if let Some(&ck) = self.cos_coeffs.get(k - 1) {
                acc += ck * c;
            }
            if let Some(&sk) = self.sin_coeffs.get(k - 1) {
                acc += sk * s;
            }
        }
        acc
    }

    /// `|mean| + sum_k hypot(c_k, s_k)`, an upper bound for `sup |value|`.
    pub fn sup_bound(&self) -> f64 {
        let degree = self.cos_coeffs.len().max(self.sin_coeffs.len());
        let mut b = self.mean.abs();
        for k in 1..=degree {
            let c = self.cos_coeffs.get(k - 1).copied().unwrap_or(0.0);
            let s = self.sin_coeffs.get(k - 1).copied().unwrap_or(0.0);
            b += c.hypot(s);
        }
        b
    }
}

/// Fiber-valued observable `v(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum VectorMap {
    Zero {
        dim: usize,
    },
    Constant {
        value: Vec<f64>,
    },
    /// `C`-valued trigonometric polynomial `sum_k c_k e^{2 pi i k t}`, seen
    /// as a map into `R^2`.
    Fourier {
        coeffs: Vec<(i64, Complex64)>,
    },
    /// One real trig polynomial per fiber component.
    Trig {
        components: Vec<TrigPoly>,
    },
    /// `frame(t) of(t)` or `frame(t)^{-1} of(t)`.
    Rotated {
        frame: TwistMap,
        of: Box<VectorMap>,
        inverse: bool,
    },
    /// `of(t + step) - of(t)`, the exact coboundary of `of` under the
    /// rotation by `step` turns.
    Coboundary {
        of: Box<VectorMap>,
        step: f64,
    },
}

impl VectorMap {
    pub fn zero(dim: usize) -> Self {
        VectorMap::Zero { dim }
    }

    pub fn constant(value: Vec<f64>) -> Self {
        VectorMap::Constant { value }
    }

    pub fn fourier(coeffs: Vec<(i64, Complex64)>) -> Self {
        VectorMap::Fourier { coeffs }
    }

    pub fn rotated(frame: TwistMap, of: VectorMap, inverse: bool) -> Result<Self> {
        if frame.dim() != of.dim() {
            return Err(Error::DimensionMismatch {
                expected: frame.dim(),
                got: of.dim(),
            });
        }
        Ok(VectorMap::Rotated {
            frame,
            of: Box::new(of),
            inverse,
        })
    }

    pub fn coboundary(of: VectorMap, step: f64) -> Self {
        VectorMap::Coboundary {
            of: Box::new(of),
            step,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            VectorMap::Zero { dim } => *dim,
            VectorMap::Constant { value } => value.len(),
            VectorMap::Fourier { .. } => 2,
            VectorMap::Trig { components } => components.len(),
            VectorMap::Rotated { frame, .. } => frame.dim(),
            VectorMap::Coboundary { of, .. } => of.dim(),
        }
    }

    pub fn eval(&self, t: f64) -> FiberVector {
        let mut out = vec![0.0; self.dim()];
        self.eval_into(t, &mut out);
        FiberVector::from_vec(out)
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim());
        match self {
            VectorMap::Zero { .. } => out.fill(0.0),
            VectorMap::Constant { value } => out.copy_from_slice(value),
            VectorMap::Fourier { coeffs } => {
                let z = fourier_eval(coeffs, t);
                out[0] = z.re;
                out[1] = z.im;
            }
            VectorMap::Trig { components } => {
                for (o, p) in out.iter_mut().zip(components) {
                    *o = p.eval(t);
                }
            }
            VectorMap::Rotated { frame, of, inverse } => {
                let d = self.dim();
                let mut inner = vec![0.0; d];
                of.eval_into(t, &mut inner);
                let mut m = vec![0.0; d * d];
                frame.write_matrix(t, &mut m);
                for i in 0..d {
                    let mut acc = 0.0;
                    for j in 0..d {
                        // transpose application realizes the inverse
                        let e = if *inverse { m[j * d + i] } else { m[i * d + j] };
                        acc += e * inner[j];
                    }
                    out[i] = acc;
                }
            }
            VectorMap::Coboundary { of, step } => {
                let d = self.dim();
                let mut ahead = vec![0.0; d];
                of.eval_into(crate::base::reduce_mod1(t + step), &mut ahead);
                of.eval_into(t, out);
                for (o, a) in out.iter_mut().zip(&ahead) {
                    *o = a - *o;
                }
            }
        }
    }

    /// Complex view for `l = 2` maps whose value is naturally a point of `C`.
    pub fn eval_complex(&self, t: f64) -> Option<Complex64> {
        match self {
            VectorMap::Zero { dim: 2 } => Some(Complex64::ZERO),
            VectorMap::Constant { value } if value.len() == 2 => {
                Some(Complex64::new(value[0], value[1]))
            }
            VectorMap::Fourier { coeffs } => Some(fourier_eval(coeffs, t)),
            VectorMap::Trig { components } if components.len() == 2 => {
                Some(Complex64::new(components[0].eval(t), components[1].eval(t)))
            }
            VectorMap::Rotated { frame, of, inverse } => {
                let angle = frame.planar_angle()?.eval(t);
                let z = of.eval_complex(t)?;
                let phase = if *inverse { -angle } else { angle };
                Some(z * Complex64::from_polar(1.0, phase))
            }
            VectorMap::Coboundary { of, step } => {
                let ahead = of.eval_complex(crate::base::reduce_mod1(t + step))?;
                let here = of.eval_complex(t)?;
                Some(ahead - here)
            }
            _ => None,
        }
    }

    /// Whether [`Self::eval_complex`] answers at every `t`.
    pub fn complex_capable(&self) -> bool {
        match self {
            VectorMap::Zero { dim } => *dim == 2,
            VectorMap::Constant { value } => value.len() == 2,
            VectorMap::Fourier { .. } => true,
            VectorMap::Trig { components } => components.len() == 2,
            VectorMap::Rotated { frame, of, .. } => {
                frame.planar_angle().is_some() && of.complex_capable()
            }
            VectorMap::Coboundary { of, .. } => of.complex_capable(),
        }
    }

    /// Analytic upper bound for `sup_t |v(t)|`, never below the true sup.
    pub fn sup_bound(&self) -> f64 {
        match self {
            VectorMap::Zero { .. } => 0.0,
            VectorMap::Constant { value } => crate::numeric::norm(value),
            VectorMap::Fourier { coeffs } => coeffs.iter().map(|(_, c)| c.norm()).sum(),
            VectorMap::Trig { components } => components
                .iter()
                .map(|p| p.sup_bound() * p.sup_bound())
                .sum::<f64>()
                .sqrt(),
            VectorMap::Rotated { of, .. } => of.sup_bound(),
            VectorMap::Coboundary { of, .. } => 2.0 * of.sup_bound(),
        }
    }
}

fn fourier_eval(coeffs: &[(i64, Complex64)], t: f64) -> Complex64 {
    let mut acc = Complex64::ZERO;
    for &(k, c) in coeffs {
        let (s, co) = (TAU * k as f64 * t).sin_cos();
        acc += c * Complex64::new(co, s);
    }
    acc
}

/// One row of the `list` output.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RegistryEntry {
    pub category: &'static str,
    pub name: &'static str,
    pub parameters: &'static str,
    pub notes: &'static str,
}

/// Built-in generators understood by the config layer.
pub fn builtin_entries() -> Vec<RegistryEntry> {
    vec![
        RegistryEntry {
            category: "base",
            name: "circle",
            parameters: "base.alpha (turns, accepts \"golden\")",
            notes: "rotation theta -> theta + alpha mod 1",
        },
        RegistryEntry {
            category: "base",
            name: "torus",
            parameters: "base.alpha (comma-separated turns)",
            notes: "coordinatewise rotation of the d-torus",
        },
        RegistryEntry {
            category: "base",
            name: "finite",
            parameters: "base.period",
            notes: "cyclic shift j -> j + 1 mod p",
        },
        RegistryEntry {
            category: "twist",
            name: "identity",
            parameters: "cocycle.dim",
            notes: "untwisted fiber",
        },
        RegistryEntry {
            category: "twist",
            name: "constant_rotation",
            parameters: "cocycle.beta (radians)",
            notes: "planar rotation e^{i beta}, l = 2",
        },
        RegistryEntry {
            category: "twist",
            name: "diagonal_rotations",
            parameters: "cocycle.psi.blocks; cocycle.psi.fixed_axes; cocycle.psi.flip_last",
            notes: "block rotations with angle functions a + b*2pi*t + c*cos + d*sin",
        },
        RegistryEntry {
            category: "observable",
            name: "zero",
            parameters: "cocycle.dim",
            notes: "zero section",
        },
        RegistryEntry {
            category: "observable",
            name: "constant",
            parameters: "cocycle.rho.value (comma-separated)",
            notes: "constant fiber vector",
        },
        RegistryEntry {
            category: "observable",
            name: "fourier",
            parameters: "cocycle.rho.fourier (\"k:re,im; ...\")",
            notes: "complex trig polynomial sum c_k e^{2pi i k t}",
        },
        RegistryEntry {
            category: "observable",
            name: "trig",
            parameters: "cocycle.rho.trig (\"mean c1 s1 ... | ...\" per component)",
            notes: "real trig polynomial per component",
        },
        RegistryEntry {
            category: "observable",
            name: "coboundary",
            parameters: "cocycle.rho.fourier (inner modes); cocycle.rho.step (defaults to the base step)",
            notes: "exact coboundary v(t + step) - v(t) of the inner observable",
        },
        RegistryEntry {
            category: "observable",
            name: "rotated",
            parameters: "library constructor only",
            notes: "frame(t)^{+-1} applied to an inner observable",
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_rotation_turns_e1_to_e2() {
        let tw = TwistMap::constant_rotation(PI / 2.0);
        let v = tw
            .eval(0.37)
            .apply(&FiberVector::from_vec(vec![1.0, 0.0]))
            .unwrap();
        assert!((v[0]).abs() < 1e-15);
        assert!((v[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn harmonic_frame_at_quarter_turn() {
        let tw = TwistMap::harmonic(1);
        let m = tw.eval(0.25);
        let expect = OrthogonalMap::rotation2(PI / 2.0);
        assert!(m.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn write_matrix_agrees_with_eval() {
        let tw = TwistMap::diagonal(
            vec![AngleFn::linear(2.0), AngleFn::constant(0.4)],
            1,
            true,
        )
        .unwrap();
        let d = tw.dim();
        assert_eq!(d, 5);
        let mut buf = vec![0.0; d * d];
        tw.write_matrix(0.31, &mut buf);
        let m = tw.eval(0.31);
        for i in 0..d {
            for j in 0..d {
                assert_eq!(buf[i * d + j], m.matrix()[(i, j)]);
            }
        }
        assert!((m.det() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_twist_negates_angles() {
        let tw = TwistMap::constant_rotation(0.8);
        let inv = tw.inverse();
        let prod = tw.eval(0.0).compose(&inv.eval(0.0)).unwrap();
        assert!(prod.max_abs_diff(&OrthogonalMap::identity(2)) < 1e-15);
    }

    #[test]
    fn fourier_single_harmonic() {
        let v = VectorMap::fourier(vec![(1, Complex64::new(1.0, 0.0))]);
        let t = 0.2;
        let out = v.eval(t);
        assert!((out[0] - (TAU * t).cos()).abs() < 1e-15);
        assert!((out[1] - (TAU * t).sin()).abs() < 1e-15);
        let z = v.eval_complex(t).unwrap();
        assert_eq!(z.re, out[0]);
        assert_eq!(z.im, out[1]);
    }

    #[test]
    fn coboundary_of_constant_vanishes() {
        let v = VectorMap::coboundary(VectorMap::constant(vec![1.0, -2.0]), 0.3);
        let out = v.eval(0.77);
        assert_eq!(out.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn rotated_inverse_uses_transpose() {
        let frame = TwistMap::constant_rotation(0.6);
        let v = VectorMap::rotated(frame, VectorMap::constant(vec![1.0, 0.0]), true).unwrap();
        let out = v.eval(0.1);
        assert!((out[0] - 0.6f64.cos()).abs() < 1e-15);
        assert!((out[1] + 0.6f64.sin()).abs() < 1e-15);
        let z = v.eval_complex(0.1).unwrap();
        assert!((z.re - out[0]).abs() < 1e-15);
        assert!((z.im - out[1]).abs() < 1e-15);
    }

    #[test]
    fn sup_bounds_dominate_grid_sups() {
        let maps = [
            VectorMap::fourier(vec![
                (1, Complex64::new(0.3, -0.2)),
                (-2, Complex64::new(0.1, 0.05)),
            ]),
            VectorMap::Trig {
                components: vec![
                    TrigPoly {
                        mean: 0.2,
                        cos_coeffs: vec![0.5, 0.1],
                        sin_coeffs: vec![-0.3],
                    },
                    TrigPoly::constant(-1.0),
                ],
            },
            VectorMap::coboundary(
                VectorMap::fourier(vec![(3, Complex64::new(0.0, 1.0))]),
                0.37,
            ),
        ];
        for map in &maps {
            let bound = map.sup_bound();
            for j in 0..512 {
                let t = j as f64 / 512.0;
                assert!(map.eval(t).norm() <= bound + 1e-12);
            }
        }
    }

    #[test]
    fn angle_fn_eval() {
        let f = AngleFn {
            constant: 0.1,
            linear: 2.0,
            cos_coeff: -0.4,
            sin_coeff: 0.25,
        };
        let t = 0.3;
        let manual = 0.1 + 2.0 * TAU * t - 0.4 * (TAU * t).cos() + 0.25 * (TAU * t).sin();
        assert!((f.eval(t) - manual).abs() < 1e-15);
    }

    #[test]
    fn planar_angle_detection() {
        assert!(matches!(
            TwistMap::constant_rotation(1.0).planar_angle(),
            Some(PlanarAngle::Constant(_))
        ));
        assert!(matches!(
            TwistMap::harmonic(2).planar_angle(),
            Some(PlanarAngle::Varying(_))
        ));
        assert!(TwistMap::identity(3).planar_angle().is_none());
        assert!(TwistMap::diagonal(vec![AngleFn::constant(0.2)], 1, false)
            .unwrap()
            .planar_angle()
            .is_none());
    }
}
