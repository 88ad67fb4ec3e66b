//! Seeded and low-discrepancy point sets on the three configuration spaces.
//!
//! Random draws are generated sequentially from one ChaCha8 stream so that a
//! seed fixes the whole set regardless of later parallel evaluation.

use std::f64::consts::{PI, TAU};

use nalgebra::{Quaternion, UnitQuaternion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitBall, UnitDisc, UnitSphere};

use crate::geometry::{
    sphere_tangent_basis, Config, ConfigurationSpace, FiberVec, Mat3, PhasePoint, SpaceKind, Vec3,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Van der Corput radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while index > 0 {
        r += f * (index % base) as f64;
        index /= base;
        f *= inv;
    }
    r
}

/// Point `index` of the Halton sequence in bases 2, 3, 5.
pub fn halton3(index: u64) -> [f64; 3] {
    [
        radical_inverse(index, 2),
        radical_inverse(index, 3),
        radical_inverse(index, 5),
    ]
}

/// Near-uniform Fibonacci lattice of `n` points on S².
pub fn fibonacci_sphere(n: usize) -> Vec<Vec3> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            Vec3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

/// Maps the unit cube to SO(3); uniform input gives Haar-uniform rotations.
pub fn shoemake(u: [f64; 3]) -> Mat3 {
    let (a, b) = ((1.0 - u[0]).sqrt(), u[0].sqrt());
    let (t1, t2) = (TAU * u[1], TAU * u[2]);
    let q = Quaternion::new(b * t2.cos(), a * t1.sin(), a * t1.cos(), b * t2.sin());
    UnitQuaternion::from_quaternion(q).to_rotation_matrix().into_inner()
}

pub fn uniform_config<R: Rng>(space: &ConfigurationSpace, rng: &mut R) -> Config {
    match space.kind() {
        SpaceKind::Circle => Config::Circle(rng.random::<f64>() * TAU),
        SpaceKind::Sphere2 => Config::Sphere(Vec3::from(UnitSphere.sample(rng))),
        SpaceKind::RotationGroup => {
            Config::Rotation(shoemake([rng.random(), rng.random(), rng.random()]))
        }
    }
}

/// Uniform covector in the dual-metric ball `‖p‖_g ≤ radius` over `q`.
pub fn uniform_momentum<R: Rng>(
    space: &ConfigurationSpace,
    q: &Config,
    radius: f64,
    rng: &mut R,
) -> FiberVec {
    match q {
        Config::Circle(_) => FiberVec::Circle(radius * (2.0 * rng.random::<f64>() - 1.0)),
        Config::Sphere(x) => {
            let (e1, e2) = sphere_tangent_basis(x);
            let [a, b]: [f64; 2] = UnitDisc.sample(rng);
            FiberVec::Sphere((e1 * a + e2 * b) * radius)
        }
        Config::Rotation(_) => {
            let w = Vec3::from(UnitBall.sample(rng)) * radius;
            let inertia = space.inertia().expect("rotation space carries inertia");
            FiberVec::Body(w.component_mul(&inertia.map(f64::sqrt)))
        }
    }
}

/// `n` seeded phase points: uniform configuration, momentum uniform in the
/// ball of the given radius.
pub fn phase_points(space: &ConfigurationSpace, n: usize, radius: f64, seed: u64) -> Vec<PhasePoint> {
    let mut r = rng(seed);
    (0..n)
        .map(|_| {
            let q = uniform_config(space, &mut r);
            let p = uniform_momentum(space, &q, radius, &mut r);
            PhasePoint::from_parts(q, p)
        })
        .collect()
}

/// Deterministic low-discrepancy starts: equispaced angles, a Fibonacci
/// lattice, or Halton points pushed through [`shoemake`].
pub fn low_discrepancy(space: &ConfigurationSpace, n: usize) -> Vec<Config> {
    match space.kind() {
        SpaceKind::Circle => (0..n)
            .map(|i| Config::Circle(TAU * (i as f64 + 0.5) / n as f64))
            .collect(),
        SpaceKind::Sphere2 => fibonacci_sphere(n).into_iter().map(Config::Sphere).collect(),
        SpaceKind::RotationGroup => (1..=n as u64)
            .map(|i| Config::Rotation(shoemake(halton3(i))))
            .collect(),
    }
}

/// Seeded space-filling grid of `n` configurations: jittered equispaced
/// angles, a randomly rotated Fibonacci lattice, or a Cranley–Patterson
/// shifted Halton set on SO(3).
pub fn seeded_grid(space: &ConfigurationSpace, n: usize, seed: u64) -> Vec<Config> {
    let mut r = rng(seed);
    match space.kind() {
        SpaceKind::Circle => {
            let offset: f64 = r.random();
            (0..n)
                .map(|i| Config::Circle(TAU * (i as f64 + offset) / n as f64))
                .collect()
        }
        SpaceKind::Sphere2 => {
            let rot = shoemake([r.random(), r.random(), r.random()]);
            fibonacci_sphere(n)
                .into_iter()
                .map(|x| Config::Sphere((rot * x).normalize()))
                .collect()
        }
        SpaceKind::RotationGroup => {
            let shift: [f64; 3] = [r.random(), r.random(), r.random()];
            (1..=n as u64)
                .map(|i| {
                    let h = halton3(i);
                    Config::Rotation(shoemake([
                        (h[0] + shift[0]).fract(),
                        (h[1] + shift[1]).fract(),
                        (h[2] + shift[2]).fract(),
                    ]))
                })
                .collect()
        }
    }
}

/// Covectors of dual norm exactly `radius` spread over the fiber at `q`.
pub fn fiber_sphere(space: &ConfigurationSpace, q: &Config, radius: f64, n: usize) -> Vec<FiberVec> {
    match q {
        Config::Circle(_) => vec![FiberVec::Circle(radius), FiberVec::Circle(-radius)],
        Config::Sphere(x) => {
            let (e1, e2) = sphere_tangent_basis(x);
            (0..n)
                .map(|i| {
                    let t = TAU * i as f64 / n as f64;
                    FiberVec::Sphere((e1 * t.cos() + e2 * t.sin()) * radius)
                })
                .collect()
        }
        Config::Rotation(_) => {
            let sq = space.inertia().expect("rotation space carries inertia").map(f64::sqrt);
            fibonacci_sphere(n)
                .into_iter()
                .map(|u| FiberVec::Body(u.component_mul(&sq) * radius))
                .collect()
        }
    }
}
