use fibercert_core::displacement::{
    classify_fibers, CertificatePath, Displacer, FiberStatus, Grid, SearchBudget, Target,
};
use fibercert_core::shift::ShiftFunction;
use fibercert_core::systems;
use fibercert_core::{Config, ConfigurationSpace, SigmaSet, Vec3};

fn pendulum() -> Displacer {
    Displacer::for_system(&systems::pendulum(), SigmaSet::zero(ConfigurationSpace::circle())).unwrap()
}

#[test]
fn pendulum_levels_certify_and_reverify() {
    let d = pendulum();
    assert!((d.m_h() - 2.0).abs() < 1e-10);
    for c in [0.5, 1.0, 1.9] {
        let cert = d.search(c, &SearchBudget::standard(&ConfigurationSpace::circle(), 11)).unwrap();
        assert!(cert.is_valid(), "c = {c}: margin {}", cert.margin);
        assert!(cert.grid.density >= 10_000);
        let again = d.reverify(&cert, 12).unwrap();
        assert!(again > 0.0);
        assert!((again - cert.margin).abs() <= 0.1 * cert.margin, "c = {c}: {again} vs {}", cert.margin);
    }
}

#[test]
fn paper_constants_are_consistent() {
    let d = pendulum();
    let cert = d.search(1.0, &SearchBudget::standard(&ConfigurationSpace::circle(), 2)).unwrap();
    assert_eq!(cert.path, CertificatePath::Paper);
    let k = cert.constants.unwrap();
    assert!(k.r1 > 0.0 && k.r1.is_finite());
    assert_eq!(k.r3, 2.0 * k.r2 / k.r1);
    assert_eq!(cert.r, k.r3);
    let check = cert.proof_check.unwrap();
    assert!(check.holds && check.min_shift_norm > check.bound);
    // Sublevel {H ≤ 1} at q = 0 has |p| ≤ √2; the enclosing radius is at least that.
    assert!(k.r2 >= 1.05 * 2f64.sqrt() * (1.0 - 1e-6));
}

#[test]
fn paper_constants_for_a_hand_built_shift() {
    let d = pendulum();
    // U = {1 − cos q > 1.5}; critical points of the contracted height sit at π ± 0.2.
    let f = ShiftFunction::contracted_height(
        ConfigurationSpace::circle(),
        Vec3::new(-1.0, 0.0, 0.0),
        Vec3::new(0.0, 1.0, 0.0),
        (0.1f64).tan(),
    )
    .unwrap();
    for q in f.critical_points() {
        assert!(q.distance(&Config::Circle(std::f64::consts::PI)) < 0.2 + 1e-12);
    }
    let u = |q: &Config| match q {
        Config::Circle(a) => 1.0 - a.cos() > 1.5,
        _ => unreachable!(),
    };
    let (k, check) = d.paper_constants(1.0, &f, &u, 0).unwrap();
    assert!(k.r1 > 0.0 && k.r2 > 0.0 && k.r3 > 0.0);
    assert!(check.holds);
    let v = d.verify(1.0, &f, k.r3, Grid { density: 10_000, seed: 1 }, &f.critical_points()).unwrap();
    assert!(v.margin > 0.0);
}

#[test]
fn spherical_pendulum_levels_certify() {
    let sys = systems::spherical_pendulum();
    let d = Displacer::for_system(&sys, SigmaSet::zero(*sys.space())).unwrap();
    let cert = d.search(0.8, &SearchBudget::standard(sys.space(), 0)).unwrap();
    assert!(cert.is_valid());
    let again = d.reverify(&cert, 99).unwrap();
    assert!((again - cert.margin).abs() <= 0.1 * cert.margin);
}

#[test]
fn spherical_pendulum_fiber_trichotomy() {
    let sys = systems::spherical_pendulum();
    let sigma = SigmaSet::zero(*sys.space());
    let ys = vec![vec![0.2, 0.0], vec![0.8, 0.0], vec![0.5, 0.0], vec![1.0, 0.0], vec![3.0, 0.0], vec![0.5, 0.3]];
    let out = classify_fibers(&sys, &ys, sigma, &SearchBudget::standard(sys.space(), 5)).unwrap();
    assert_eq!(out.len(), ys.len());
    let d = Displacer::for_system(&sys, sigma).unwrap();
    for (y, cls) in ys.iter().zip(&out) {
        match (&cls.status, y[0], y[1]) {
            (FiberStatus::Displaced { certificate }, _, b) if b == 0.0 && y[0] < 1.0 => {
                assert!(certificate.is_valid());
                assert_eq!(certificate.y_or_c, Target::Fiber(y.clone()));
                let again = d.reverify(certificate, 1234).unwrap();
                assert!((again - certificate.margin).abs() <= 0.1 * certificate.margin);
            }
            (FiberStatus::Critical { deviation }, a, _) if (a - 1.0).abs() < 1e-12 => assert!(*deviation <= 1e-6),
            (FiberStatus::Disjoint { .. }, a, b) if a > 1.0 || b != 0.0 => {}
            (s, _, _) => panic!("unexpected status for {y:?}: {s:?}"),
        }
    }
}

#[test]
fn fiber_values_must_match_component_count() {
    let sys = systems::spherical_pendulum();
    let sigma = SigmaSet::zero(*sys.space());
    assert!(classify_fibers(&sys, &[vec![0.5]], sigma, &SearchBudget::standard(sys.space(), 0)).is_err());
}

#[test]
fn certificate_json_has_the_documented_fields() {
    let d = pendulum();
    let cert = d.search(0.5, &SearchBudget::standard(&ConfigurationSpace::circle(), 0)).unwrap();
    let v = serde_json::to_value(&cert).unwrap();
    for key in ["system", "y_or_c", "sigma", "basis_coefficients", "R", "margin", "grid", "constants", "path"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["grid"]["density"], 10_000);
    assert_eq!(v["path"], "paper");
}
