use fibercert_core::geometry::{graph_shift, Mat3};
use fibercert_core::sampling;
use fibercert_core::shift::{ShiftFunction, HARMONIC_COUNT};
use fibercert_core::{Config, ConfigurationSpace, FiberVec, ScalarField, Vec3};
use proptest::prelude::*;

fn fd_matches(f: &ShiftFunction, q: &Config) -> bool {
    let h = 1e-6;
    let dirs: Vec<FiberVec> = match q {
        Config::Circle(_) => vec![FiberVec::Circle(1.0)],
        Config::Sphere(x) => {
            let (a, b) = fibercert_core::geometry::sphere_tangent_basis(x);
            vec![FiberVec::Sphere(a), FiberVec::Sphere(b)]
        }
        Config::Rotation(_) => (0..3).map(|i| FiberVec::Body(Vec3::ith(i, 1.0))).collect(),
    };
    let d = f.differential(q);
    let scale = 1.0 + d.euclid_norm() + f.value(q).abs();
    dirs.into_iter().all(|v| {
        let fd = (f.value(&q.retract(&(v * h))) - f.value(&q.retract(&(v * -h)))) / (2.0 * h);
        let an: f64 = d.coords().iter().zip(v.coords()).map(|(a, b)| a * b).sum();
        (fd - an).abs() <= 1e-6 * scale
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fourier_differential(coeffs in prop::collection::vec(-2.0..2.0f64, 6), t in 0.0..6.3f64) {
        let f = ShiftFunction::fourier(coeffs).unwrap();
        prop_assert!(fd_matches(&f, &Config::Circle(t)));
    }

    #[test]
    fn harmonic_differential(coeffs in prop::collection::vec(-1.0..1.0f64, HARMONIC_COUNT), seed in 0u64..1000) {
        let f = ShiftFunction::harmonic(coeffs).unwrap();
        let q = sampling::uniform_config(&ConfigurationSpace::sphere2(), &mut sampling::rng(seed));
        prop_assert!(fd_matches(&f, &q));
    }

    #[test]
    fn trace_differential(a in prop::collection::vec(-1.0..1.0f64, 9), seed in 0u64..1000) {
        let space = ConfigurationSpace::rotation_group(1.0, 2.0, 3.0).unwrap();
        let f = ShiftFunction::trace(space, &Mat3::from_row_slice(&a)).unwrap();
        let q = sampling::uniform_config(&space, &mut sampling::rng(seed));
        prop_assert!(fd_matches(&f, &q));
    }

    #[test]
    fn contraction_differentials(beta in 0.05..2.0f64, u in prop::array::uniform3(0.0..1.0f64), seed in 0u64..1000) {
        let space = ConfigurationSpace::rotation_group(1.0, 1.0, 2.0).unwrap();
        let g = ShiftFunction::projective_quadratic(space, &sampling::shoemake(u), 3f64.sqrt() / (beta / 4.0).tan()).unwrap();
        let q = sampling::uniform_config(&space, &mut sampling::rng(seed));
        prop_assert!(fd_matches(&g, &q));
        let s2 = ConfigurationSpace::sphere2();
        let c = sampling::fibonacci_sphere(7)[seed as usize % 7];
        let f = ShiftFunction::contracted_height(s2, c, Vec3::new(0.3, -0.8, 0.5), (beta / 4.0).tan()).unwrap();
        let q = sampling::uniform_config(&s2, &mut sampling::rng(seed + 1));
        prop_assert!(fd_matches(&f, &q));
    }

    #[test]
    fn graph_shifts_compose_additively(a in -3.0..3.0f64, b in -3.0..3.0f64, seed in 0u64..1000) {
        let f = ShiftFunction::harmonic(vec![0.3, -0.2, 0.5, 0.1, 0.0, 0.7, -0.4, 0.2]).unwrap();
        let x = sampling::phase_points(&ConfigurationSpace::sphere2(), 1, 2.0, seed)[0];
        let two = graph_shift(&f, b, &graph_shift(&f, a, &x));
        let one = graph_shift(&f, a + b, &x);
        prop_assert!(two.distance(&one) <= 1e-12);
    }
}
