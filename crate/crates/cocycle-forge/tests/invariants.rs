//! Structural invariants checked over randomized inputs: isometry algebra,
//! averaging mass, tail-bound refinement, and kernel-path agreement.

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;

use cocycle_forge::averaging::{KernelPath, TwistedSequence};
use cocycle_forge::base::{circle_distance, golden, orbit_coord, reduce_mod1, BasePoint, BaseSystem};
use cocycle_forge::cocycle::CocycleSpec;
use cocycle_forge::error::Error;
use cocycle_forge::isometry::{FiberVector, OrthogonalMap};
use cocycle_forge::registry::{TwistMap, VectorMap};
use cocycle_forge::solver;

fn random_orthogonal(rng: &mut ChaCha12Rng, dim: usize) -> OrthogonalMap {
    let m = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
    let q = m.qr().q();
    OrthogonalMap::from_matrix(q).unwrap()
}

fn random_vector(rng: &mut ChaCha12Rng, dim: usize) -> FiberVector {
    FiberVector::from_vec((0..dim).map(|_| rng.random_range(-2.0..2.0)).collect())
}

#[test]
fn random_orthogonal_maps_preserve_distances() {
    let mut rng = ChaCha12Rng::seed_from_u64(11);
    for trial in 0..1000 {
        let dim = 1 + trial % 5;
        let q = random_orthogonal(&mut rng, dim);
        let v = random_vector(&mut rng, dim);
        let w = random_vector(&mut rng, dim);
        let before = v.distance(&w);
        let after = q.apply(&v).unwrap().distance(&q.apply(&w).unwrap());
        assert!(
            (after - before).abs() <= 1e-12,
            "dim {dim}: distance moved by {:.3e}",
            (after - before).abs()
        );
        let round_trip = q.apply_inverse(&q.apply(&v).unwrap()).unwrap();
        assert!(round_trip.distance(&v) <= 1e-13);
    }
}

#[test]
fn composition_is_associative() {
    let mut rng = ChaCha12Rng::seed_from_u64(12);
    for _ in 0..200 {
        let dim = rng.random_range(1..6);
        let a = random_orthogonal(&mut rng, dim);
        let b = random_orthogonal(&mut rng, dim);
        let c = random_orthogonal(&mut rng, dim);
        let left = a.compose(&b).unwrap().compose(&c).unwrap();
        let right = a.compose(&b.compose(&c).unwrap()).unwrap();
        assert!(left.max_abs_diff(&right) <= 1e-14);
    }
}

#[test]
fn from_matrix_repairs_small_defects_and_rejects_large_ones() {
    let mut rng = ChaCha12Rng::seed_from_u64(13);
    for _ in 0..100 {
        let dim = rng.random_range(2..5);
        let clean = random_orthogonal(&mut rng, dim);

        let mut near = clean.matrix().clone();
        for entry in near.iter_mut() {
            *entry += rng.random_range(-1e-8..1e-8);
        }
        let repaired = OrthogonalMap::from_matrix(near).unwrap();
        assert!(repaired.orthogonality_defect() <= 1e-12);
        assert!(repaired.max_abs_diff(&clean) <= 1e-6);

        let mut far = clean.matrix().clone();
        far[(0, 0)] += 1e-3;
        match OrthogonalMap::from_matrix(far) {
            Err(Error::NotOrthogonal { defect }) => assert!(defect > 1e-6),
            other => panic!("expected NotOrthogonal, got {other:?}"),
        }
    }
}

#[test]
fn abel_mean_of_constant_is_the_constant() {
    // truncated weights are renormalized by their actual mass, so a constant
    // sequence must come back unchanged at every lambda
    let c = vec![0.3, -1.7, 0.9];
    let seq = TwistedSequence::new(
        BaseSystem::circle(golden()),
        TwistMap::identity(3),
        VectorMap::constant(c.clone()),
    )
    .unwrap();
    let x = BasePoint::circle(0.2);
    for &lambda in &[0.5, 0.9, 0.99, 0.999] {
        let m = seq.abel(&x, lambda, 1e-6).unwrap();
        for (got, want) in m.as_slice().iter().zip(&c) {
            assert!(
                (got - want).abs() <= 1e-13,
                "lambda {lambda}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn tighter_tail_bounds_refine_the_series() {
    let spec = CocycleSpec::new(
        BaseSystem::circle(golden()),
        TwistMap::constant_rotation(1.0),
        VectorMap::fourier(vec![
            (1, Complex64::new(1.0, 0.0)),
            (-2, Complex64::new(0.4, -0.3)),
        ]),
    )
    .unwrap();
    let x = BasePoint::circle(0.4);
    let lambda = 0.95;
    let reference = solver::u_lambda_at(&spec, &x, lambda, 1e-15).unwrap();
    let mut prev = f64::INFINITY;
    for &eps in &[1e-4, 1e-7, 1e-10, 1e-13] {
        let u = solver::u_lambda_at(&spec, &x, lambda, eps).unwrap();
        let err = u.distance(&reference);
        assert!(err <= eps, "eps {eps:.0e}: error {err:.3e} above its bound");
        assert!(err <= prev + 1e-15, "refinement must not lose accuracy");
        prev = err;
    }
}

#[test]
fn complex_and_matrix_kernels_agree_term_by_term() {
    let seq = TwistedSequence::new(
        BaseSystem::circle(golden()),
        TwistMap::harmonic(1),
        VectorMap::fourier(vec![
            (0, Complex64::new(0.5, 0.1)),
            (1, Complex64::new(-0.2, 0.8)),
        ]),
    )
    .unwrap();
    let x = BasePoint::circle(0.37);
    let n = 500u64;
    let mut matrix_terms = Vec::new();
    seq.visit(&x, n, KernelPath::Matrix, |_, z| matrix_terms.push(z.to_vec()))
        .unwrap();
    let mut worst = 0.0f64;
    let mut k = 0usize;
    seq.visit(&x, n, KernelPath::Complex, |_, z| {
        for (a, b) in z.iter().zip(&matrix_terms[k]) {
            worst = worst.max((a - b).abs());
        }
        k += 1;
    })
    .unwrap();
    assert_eq!(k, n as usize);
    assert!(worst <= 1e-13, "kernel paths diverged by {worst:.3e}");
}

proptest! {
    #[test]
    fn reduce_mod1_lands_in_unit_interval(x in -1e12f64..1e12f64) {
        let r = reduce_mod1(x);
        prop_assert!((0.0..1.0).contains(&r));
    }

    #[test]
    fn orbit_coord_matches_iterated_steps(
        alpha in 1e-3f64..1.0,
        t0 in 0.0f64..1.0,
        n in 1i64..200,
    ) {
        let direct = orbit_coord(t0, alpha, n);
        let mut t = t0;
        for _ in 0..n {
            t = reduce_mod1(t + alpha);
        }
        prop_assert!(circle_distance(direct, t) <= 1e-11);
    }

    #[test]
    fn circle_distance_is_a_metric_on_representatives(
        a in 0.0f64..1.0,
        b in 0.0f64..1.0,
        c in 0.0f64..1.0,
    ) {
        let ab = circle_distance(a, b);
        prop_assert!((0.0..=0.5).contains(&ab));
        prop_assert!((ab - circle_distance(b, a)).abs() <= 1e-15);
        prop_assert!(ab <= circle_distance(a, c) + circle_distance(c, b) + 1e-12);
    }
}
