//! Sampling fibers `Φ⁻¹(y)` and classifying the rank of `dΦ` along them.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::brackets::PhaseGradient;
use crate::critical::{self, SigmaSet};
use crate::geometry::{sphere_tangent_basis, Config, FiberVec, PhasePoint, SpaceKind, Vec3, CONSTRAINT_TOL};
use crate::sampling;
use crate::systems::IntegrableSystem;

/// Residual bound `|Φ(x) − y|_∞` for an accepted fiber point.
pub const FIBER_TOL: f64 = 1e-9;
pub const MAX_ITERATIONS: usize = 100;
/// Fiber points closer than this are merged.
pub const DEDUP_DISTANCE: f64 = 1e-6;
/// Singular values below `RANK_TOL·(σ_max + 1)` count as zero.
pub const RANK_TOL: f64 = 1e-7;
/// Radius of the momentum ball seeds are drawn from.
pub const SEED_RADIUS: f64 = 5.0;

/// Solved points of one fiber together with the rank of `dΦ` at each.
#[derive(Clone, Debug, Serialize)]
pub struct FiberSample {
    pub y: Vec<f64>,
    #[serde(serialize_with = "phase_coords")]
    pub points: Vec<PhasePoint>,
    pub ranks: Vec<usize>,
    pub empty: bool,
    pub seeds: usize,
    /// `rank_histogram[r]` counts points of rank `r`.
    pub rank_histogram: Vec<usize>,
    pub rank_tolerance: f64,
}

fn phase_coords<S: Serializer>(points: &[PhasePoint], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(points.iter().map(PhasePoint::coords))
}

/// Tangent directions of the phase space at `x`, as `(config, momentum)`
/// increments. The sphere basis keeps `q·p = 0` to first order.
fn tangent_basis(x: &PhasePoint) -> Vec<(FiberVec, FiberVec)> {
    match x {
        PhasePoint::Circle { .. } => vec![(FiberVec::Circle(1.0), FiberVec::Circle(0.0)), (FiberVec::Circle(0.0), FiberVec::Circle(1.0))],
        PhasePoint::Sphere { q, p } => {
            let (t1, t2) = sphere_tangent_basis(q);
            vec![
                (FiberVec::Sphere(t1), FiberVec::Sphere(-q * t1.dot(p))),
                (FiberVec::Sphere(t2), FiberVec::Sphere(-q * t2.dot(p))),
                (FiberVec::Sphere(Vec3::zeros()), FiberVec::Sphere(t1)),
                (FiberVec::Sphere(Vec3::zeros()), FiberVec::Sphere(t2)),
            ]
        }
        PhasePoint::Rotation { .. } => (0..6)
            .map(|i| {
                let e = |j: usize| FiberVec::Body(if i % 3 == j { Vec3::ith(j, 1.0) } else { Vec3::zeros() });
                let v = e(i % 3);
                let zero = FiberVec::Body(Vec3::zeros());
                if i < 3 { (v, zero) } else { (zero, v) }
            })
            .collect(),
    }
}

fn directional(g: &PhaseGradient, dq: &FiberVec, dp: &FiberVec) -> f64 {
    match (g, dq, dp) {
        (PhaseGradient::Circle { dq: a, dp: b }, FiberVec::Circle(u), FiberVec::Circle(v)) => a * u + b * v,
        (PhaseGradient::Sphere { dq: a, dp: b }, FiberVec::Sphere(u), FiberVec::Sphere(v)) => a.dot(u) + b.dot(v),
        (PhaseGradient::Rotation { dl, body }, FiberVec::Body(u), FiberVec::Body(v)) => body.dot(u) + dl.dot(v),
        _ => unreachable!("gradient and tangent share a space"),
    }
}

/// `dΦ` in the coordinates of [`tangent_basis`].
fn jacobian(system: &IntegrableSystem, x: &PhasePoint, basis: &[(FiberVec, FiberVec)]) -> DMatrix<f64> {
    let grads: Vec<PhaseGradient> = system.components().iter().map(|c| c.gradient(x)).collect();
    DMatrix::from_fn(grads.len(), basis.len(), |i, j| directional(&grads[i], &basis[j].0, &basis[j].1))
}

fn step(x: &PhasePoint, basis: &[(FiberVec, FiberVec)], delta: &DVector<f64>) -> PhasePoint {
    let q = x.config();
    let mut dq = basis[0].0 * 0.0;
    let mut dp = basis[0].1 * 0.0;
    for (i, (a, b)) in basis.iter().enumerate() {
        dq = dq + *a * delta[i];
        dp = dp + *b * delta[i];
    }
    PhasePoint::from_parts(q.retract(&dq), x.momentum() + dp).repaired()
}

fn residual(system: &IntegrableSystem, x: &PhasePoint, y: &[f64]) -> DVector<f64> {
    DVector::from_iterator(y.len(), system.eval(x).iter().zip(y).map(|(a, b)| a - b))
}

fn pinv_solve(j: DMatrix<f64>, r: &DVector<f64>) -> DVector<f64> {
    let svd = j.svd(true, true);
    let smax = svd.singular_values.max();
    let eps = 1e-12 * smax.max(1e-300);
    svd.solve(r, eps).unwrap_or_else(|_| DVector::zeros(r.len()))
}

/// Gauss–Newton with backtracking on `Φ(x) = y` in the tangent chart.
fn gauss_newton(
    system: &IntegrableSystem,
    y: &[f64],
    seed: &PhasePoint,
    basis_of: impl Fn(&PhasePoint) -> Vec<(FiberVec, FiberVec)>,
) -> Option<(PhasePoint, usize)> {
    let mut x = *seed;
    let mut r = residual(system, &x, y);
    for it in 0..=MAX_ITERATIONS {
        if r.amax() <= FIBER_TOL && x.residual() <= CONSTRAINT_TOL {
            return Some((x, it));
        }
        if it == MAX_ITERATIONS || !r.iter().all(|v| v.is_finite()) {
            break;
        }
        let basis = basis_of(&x);
        let mut delta = -pinv_solve(jacobian(system, &x, &basis), &r);
        let n = delta.norm();
        if n > 1.0 {
            delta /= n;
        }
        let mut next = step(&x, &basis, &delta);
        let mut rn = residual(system, &next, y);
        for _ in 0..12 {
            if rn.norm() < r.norm() {
                break;
            }
            delta *= 0.5;
            next = step(&x, &basis, &delta);
            rn = residual(system, &next, y);
        }
        x = next;
        r = rn;
    }
    None
}

/// A point of `Φ⁻¹(y)` reached from `seed`, with the iteration count.
pub fn solve_fiber_point(system: &IntegrableSystem, y: &[f64], seed: &PhasePoint) -> Option<(PhasePoint, usize)> {
    if y.len() != system.k() || seed.kind() != system.space().kind() {
        return None;
    }
    gauss_newton(system, y, seed, tangent_basis)
}

/// Singular values of `dΦ` on an orthonormal basis of the tangent space.
pub fn singular_values(system: &IntegrableSystem, x: &PhasePoint) -> Vec<f64> {
    let basis = tangent_basis(x);
    let raw = jacobian(system, x, &basis);
    let j = match x {
        PhasePoint::Sphere { .. } => {
            let b = DMatrix::from_fn(6, basis.len(), |i, c| {
                let (a, m) = (basis[c].0.coords(), basis[c].1.coords());
                if i < 3 { a[i] } else { m[i - 3] }
            });
            let r = b.qr().r();
            raw * r.try_inverse().expect("tangent basis has full rank")
        }
        _ => raw,
    };
    let mut s: Vec<f64> = j.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Rank of `dΦ` at `x` with the relative tolerance [`RANK_TOL`].
pub fn rank(system: &IntegrableSystem, x: &PhasePoint) -> usize {
    let s = singular_values(system, x);
    let smax = s.first().copied().unwrap_or(0.0);
    s.iter().filter(|&&v| v > RANK_TOL * (smax + 1.0)).count()
}

/// Multistart solve of `Φ(x) = y` from `n` seeded points plus the critical
/// points of `Φ₁` on the zero section.
pub fn sample_fiber(system: &IntegrableSystem, y: &[f64], n: usize, seed: u64) -> FiberSample {
    let space = system.space();
    let mut seeds = sampling::phase_points(space, n.max(1), SEED_RADIUS, seed);
    if let Ok(s) = critical::locate_s(system.hamiltonian().as_ref(), &SigmaSet::zero(*space)) {
        seeds.extend(s.clusters.iter().take(16).map(|q| PhasePoint::zero_section(*q)));
    }
    let solved: Vec<Option<PhasePoint>> =
        seeds.par_iter().map(|x0| solve_fiber_point(system, y, x0).map(|r| r.0)).collect();
    let mut points: Vec<PhasePoint> = Vec::new();
    for x in solved.into_iter().flatten() {
        if !points.iter().any(|p| p.distance(&x) <= DEDUP_DISTANCE) {
            points.push(x);
        }
    }
    let ranks: Vec<usize> = points.par_iter().map(|x| rank(system, x)).collect();
    let mut rank_histogram = vec![0; system.k() + 1];
    for r in &ranks {
        rank_histogram[*r] += 1;
    }
    FiberSample {
        y: y.to_vec(),
        empty: points.is_empty(),
        points,
        ranks,
        seeds: seeds.len(),
        rank_histogram,
        rank_tolerance: RANK_TOL,
    }
}

/// Momentum seeds for the fiberwise solve at `q`.
fn momentum_seeds(system: &IntegrableSystem, q: &Config) -> Vec<FiberVec> {
    let space = system.space();
    let n = match space.kind() {
        SpaceKind::Circle => 2,
        SpaceKind::Sphere2 => 8,
        SpaceKind::RotationGroup => 14,
    };
    let mut out = vec![space.zero_fiber()];
    for r in [0.5, 1.0, 2.0, 4.0] {
        out.extend(sampling::fiber_sphere(space, q, r, n));
    }
    out
}

/// Solves `Φ(q, p) = y` over `p` alone.
pub fn solve_momentum(system: &IntegrableSystem, y: &[f64], q: &Config) -> Option<PhasePoint> {
    if y.len() != system.k() {
        return None;
    }
    let vertical = |x: &PhasePoint| -> Vec<(FiberVec, FiberVec)> {
        tangent_basis(x).into_iter().filter(|(a, _)| a.euclid_norm() == 0.0).collect()
    };
    momentum_seeds(system, q)
        .into_iter()
        .find_map(|p| gauss_newton(system, y, &PhasePoint::from_parts(*q, p), vertical).map(|r| r.0))
}

/// Fraction of `q_grid` over which the fiber `Φ⁻¹(y)` has a point.
pub fn projection_coverage(system: &IntegrableSystem, y: &[f64], q_grid: &[Config]) -> f64 {
    if q_grid.is_empty() {
        return 0.0;
    }
    let hits = q_grid.par_iter().filter(|q| solve_momentum(system, y, q).is_some()).count();
    hits as f64 / q_grid.len() as f64
}
