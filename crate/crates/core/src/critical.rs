//! Minimax value `m_H = max_q min_p H`, the critical set `S_H` on a section
//! Σ, the singleton test for `Φ(S_H)` and common critical points.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::brackets::{PhaseField, PhaseGradient};
use crate::error::{Error, Result};
use crate::geometry::{Config, ConfigurationSpace, FiberVec, PhasePoint, ScalarField, SpaceKind, Vec3};
use crate::sampling;
use crate::systems::IntegrableSystem;

pub const TOL_VALUE: f64 = 1e-8;
pub const TOL_SINGLETON: f64 = 1e-6;
pub const CLUSTER_RADIUS: f64 = 1e-4;
pub const MULTISTART: usize = 64;
/// Cluster count above which `S_H` is reported as a continuum.
pub const CONTINUUM_CLUSTERS: usize = 16;
/// Window of the coercivity probe along momentum rays.
pub const COERCIVITY_WINDOW: f64 = 50.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "radius")]
pub enum SigmaKind {
    ZeroSection,
    SphereBundle(f64),
}

/// The compact section Σ ⊂ T*N on which `H` is fiberwise minimal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SigmaSet {
    kind: SigmaKind,
    space: ConfigurationSpace,
}

impl SigmaSet {
    pub fn zero(space: ConfigurationSpace) -> Self {
        Self { kind: SigmaKind::ZeroSection, space }
    }

    pub fn sphere_bundle(space: ConfigurationSpace, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Parameter(format!("sphere bundle radius must be positive, got {radius}")));
        }
        Ok(Self { kind: SigmaKind::SphereBundle(radius), space })
    }

    pub fn kind(&self) -> SigmaKind {
        self.kind
    }

    pub fn space(&self) -> &ConfigurationSpace {
        &self.space
    }

    /// `"zero"` or `"sphere:r"`.
    pub fn label(&self) -> String {
        match self.kind {
            SigmaKind::ZeroSection => "zero".into(),
            SigmaKind::SphereBundle(r) => format!("sphere:{r}"),
        }
    }

    /// Points of Σ over `q`.
    pub fn fiber(&self, q: &Config) -> Vec<PhasePoint> {
        match self.kind {
            SigmaKind::ZeroSection => vec![PhasePoint::zero_section(*q)],
            SigmaKind::SphereBundle(r) => {
                let n = match self.space.kind() {
                    SpaceKind::Circle => 2,
                    SpaceKind::Sphere2 => 16,
                    SpaceKind::RotationGroup => 14,
                };
                sampling::fiber_sphere(&self.space, q, r, n)
                    .into_iter()
                    .map(|p| PhasePoint::from_parts(*q, p))
                    .collect()
            }
        }
    }

    fn check(&self, h: &dyn PhaseField) -> Result<()> {
        if h.space().kind() != self.space.kind() {
            return Err(Error::Usage("section and Hamiltonian live on different spaces".into()));
        }
        Ok(())
    }
}

/// Mean of `H` over the Σ-fiber at `q`.
pub fn sigma_value(h: &dyn PhaseField, sigma: &SigmaSet, q: &Config) -> f64 {
    let pts = sigma.fiber(q);
    pts.iter().map(|x| h.value(x)).sum::<f64>() / pts.len() as f64
}

/// Configuration differential of [`sigma_value`], with momenta carried along
/// so that they stay in the fiber.
pub fn sigma_gradient(h: &dyn PhaseField, sigma: &SigmaSet, q: &Config) -> FiberVec {
    let pts = sigma.fiber(q);
    let n = pts.len() as f64;
    let mut acc = sigma.space().zero_fiber();
    for x in &pts {
        let d = match (x, h.gradient(x)) {
            (PhasePoint::Circle { .. }, PhaseGradient::Circle { dq, .. }) => FiberVec::Circle(dq),
            (PhasePoint::Sphere { q, p }, PhaseGradient::Sphere { dq, dp }) => {
                let g = dq - p * q.dot(&dp);
                FiberVec::Sphere(g - q * q.dot(&g))
            }
            (PhasePoint::Rotation { .. }, PhaseGradient::Rotation { body, .. }) => FiberVec::Body(body),
            _ => unreachable!("gradient kind matches its point"),
        };
        acc = acc + d;
    }
    acc * (1.0 / n)
}

type ValueFn<'a> = &'a (dyn Fn(&Config) -> f64 + Sync);
type GradFn<'a> = &'a (dyn Fn(&Config) -> FiberVec + Sync);

/// Riemannian gradient ascent with Barzilai–Borwein steps and an Armijo
/// safeguard.
fn ascend(value: ValueFn, grad: GradFn, q0: Config, grad_tol: f64, max_iter: usize) -> (Config, f64, bool) {
    let mut q = q0;
    let mut fq = value(&q);
    let mut d = grad(&q);
    let mut alpha = 0.1;
    for _ in 0..max_iter {
        let gn = d.euclid_norm();
        if gn <= grad_tol {
            return (q, fq, true);
        }
        let mut step = alpha;
        let mut accepted = None;
        for _ in 0..60 {
            let cand = q.retract(&(d * step));
            let fc = value(&cand);
            if fc >= fq + 1e-4 * step * gn * gn {
                accepted = Some((cand, fc));
                break;
            }
            step *= 0.5;
        }
        let Some((nq, nf)) = accepted else {
            // No ascent possible at working precision.
            return (q, fq, gn <= 1e3 * grad_tol);
        };
        let nd = grad(&nq);
        let s = d * step;
        let y = transport(&nq, &nd) - transport(&nq, &d);
        let sy = dot(&s, &y).abs();
        alpha = if sy > 0.0 { (dot(&s, &s) / sy).clamp(1e-8, 10.0) } else { 10.0 * step };
        q = nq;
        fq = nf;
        d = nd;
    }
    let ok = d.euclid_norm() <= 1e3 * grad_tol;
    (q, fq, ok)
}

fn transport(q: &Config, v: &FiberVec) -> FiberVec {
    match (q, v) {
        (Config::Sphere(x), FiberVec::Sphere(w)) => FiberVec::Sphere(w - x * x.dot(w)),
        _ => *v,
    }
}

fn dot(a: &FiberVec, b: &FiberVec) -> f64 {
    a.coords().iter().zip(b.coords()).map(|(x, y)| x * y).sum()
}

fn dense_grid(space: &ConfigurationSpace) -> Vec<Config> {
    let n = match space.kind() {
        SpaceKind::Circle => 100_000,
        SpaceKind::Sphere2 => 20_000,
        SpaceKind::RotationGroup => 20_000,
    };
    sampling::low_discrepancy(space, n)
}

/// Outcome of a multistart maximization over the configuration space.
#[derive(Clone, Debug)]
pub struct Maximization {
    pub value: f64,
    /// Every converged local maximizer with its value.
    pub maximizers: Vec<(Config, f64)>,
    pub grid_max: f64,
    /// `value ≥ grid_max − 1e−8`.
    pub certified: bool,
    pub converged: bool,
}

fn maximize(space: &ConfigurationSpace, value: ValueFn, grad: GradFn) -> Maximization {
    let grid = dense_grid(space);
    let vals: Vec<f64> = grid.par_iter().map(value).collect();
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]).then(a.cmp(&b)));
    let grid_max = vals[order[0]];
    let mut starts = sampling::low_discrepancy(space, MULTISTART);
    starts.extend(order.iter().take(4).map(|&i| grid[i]));
    let runs: Vec<(Config, f64, bool)> = starts
        .par_iter()
        .map(|q0| ascend(value, grad, *q0, 1e-11, 5000))
        .collect();
    let best = runs.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    Maximization {
        value: best,
        maximizers: runs.iter().map(|r| (r.0, r.1)).collect(),
        grid_max,
        certified: best >= grid_max - TOL_VALUE,
        converged: runs.iter().filter(|r| r.1 >= best - TOL_VALUE).all(|r| r.2),
    }
}

/// Maximum of a configuration function and a maximizer.
pub fn maximize_scalar(f: &dyn ScalarField) -> (f64, Config) {
    let value = |q: &Config| f.value(q);
    let grad = |q: &Config| f.differential(q);
    let m = maximize(f.space(), &value, &grad);
    let q = m
        .maximizers
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(q, _)| *q)
        .expect("at least one start");
    (m.value, q)
}

/// Maximizes `q ↦ H|_{Σ∩T*_qN}` from 64 low-discrepancy starts and four dense-grid leaders.
pub fn maximize_on_sigma(h: &dyn PhaseField, sigma: &SigmaSet) -> Result<Maximization> {
    sigma.check(h)?;
    let value = |q: &Config| sigma_value(h, sigma, q);
    let grad = |q: &Config| sigma_gradient(h, sigma, q);
    Ok(maximize(sigma.space(), &value, &grad))
}

/// `m_H` on Σ. Fails with a numerical error when the optimizer cannot
/// reach the dense-grid bound.
pub fn compute_m_h(h: &dyn PhaseField, sigma: &SigmaSet) -> Result<f64> {
    let m = maximize_on_sigma(h, sigma)?;
    if !m.certified {
        return Err(Error::Precondition(format!(
            "optimizer best {} below dense-grid bound {}",
            m.value, m.grid_max
        )));
    }
    Ok(m.value)
}

/// Configuration distance used for clustering: via `γ` for reduced
/// rotation fields, geodesic otherwise.
fn cluster_distance(reduced: bool, a: &Config, b: &Config) -> f64 {
    match (a, b) {
        (Config::Rotation(_), Config::Rotation(_)) if reduced => {
            (a.gamma().expect("rotation") - b.gamma().expect("rotation")).norm()
        }
        _ => a.distance(b),
    }
}

#[derive(Clone, Debug)]
pub struct CriticalSet {
    pub m_h: f64,
    /// One representative configuration per cluster.
    pub clusters: Vec<Config>,
    pub continuum: bool,
    pub certified: bool,
}

/// Greedy clustering of the multistart maximizers within `TOL_VALUE` of `m_H`.
pub fn locate_s(h: &dyn PhaseField, sigma: &SigmaSet) -> Result<CriticalSet> {
    let m = maximize_on_sigma(h, sigma)?;
    let reduced = h.is_reduced();
    let mut clusters: Vec<Config> = Vec::new();
    for (q, v) in &m.maximizers {
        if *v < m.value - TOL_VALUE {
            continue;
        }
        if !clusters.iter().any(|c| cluster_distance(reduced, c, q) <= CLUSTER_RADIUS) {
            clusters.push(*q);
        }
    }
    Ok(CriticalSet {
        m_h: m.value,
        continuum: clusters.len() > CONTINUUM_CLUSTERS,
        clusters,
        certified: m.certified,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CriticalReport {
    pub system: String,
    pub sigma: String,
    #[serde(rename = "m_H")]
    pub m_h: f64,
    /// Phase coordinates of the clustered critical points.
    #[serde(rename = "S_samples")]
    pub s_samples: Vec<Vec<f64>>,
    pub y_values: Vec<Vec<f64>>,
    pub singleton_diameter: f64,
    pub y0: Vec<f64>,
    pub is_singleton: bool,
    pub continuum: bool,
    pub certified: bool,
    pub predicted_y0: Option<Vec<f64>>,
    pub max_deviation_from_prediction: Option<f64>,
    pub tol_singleton: f64,
    pub cluster_radius: f64,
}

impl CriticalReport {
    /// Singleton and within `TOL_SINGLETON` of the closed-form value.
    pub fn matches_prediction(&self) -> bool {
        self.is_singleton && self.max_deviation_from_prediction.is_some_and(|d| d <= TOL_SINGLETON)
    }
}

/// Evaluates `Φ` on `S_{Φ₁}` and tests whether the image is one point.
pub fn singleton_check(system: &IntegrableSystem, sigma: &SigmaSet) -> Result<CriticalReport> {
    let h = system.hamiltonian();
    let s = locate_s(h.as_ref(), sigma)?;
    let points: Vec<PhasePoint> = s.clusters.iter().flat_map(|q| sigma.fiber(q)).collect();
    let y_values: Vec<Vec<f64>> = points.iter().map(|x| system.eval(x)).collect();
    let mut diameter = 0.0f64;
    for (i, a) in y_values.iter().enumerate() {
        for b in &y_values[i + 1..] {
            diameter = diameter.max(euclid(a, b));
        }
    }
    let k = system.k();
    let y0: Vec<f64> = (0..k)
        .map(|j| y_values.iter().map(|y| y[j]).sum::<f64>() / y_values.len() as f64)
        .collect();
    let predicted = system.predicted_y0().map(<[f64]>::to_vec);
    let deviation = predicted
        .as_ref()
        .map(|p| p.iter().zip(&y0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    Ok(CriticalReport {
        system: system.name().to_string(),
        sigma: sigma.label(),
        m_h: s.m_h,
        s_samples: points.iter().map(PhasePoint::coords).collect(),
        y_values,
        singleton_diameter: diameter,
        y0,
        is_singleton: diameter <= TOL_SINGLETON,
        continuum: s.continuum,
        certified: s.certified,
        predicted_y0: predicted,
        max_deviation_from_prediction: deviation,
        tol_singleton: TOL_SINGLETON,
        cluster_radius: CLUSTER_RADIUS,
    })
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

#[derive(Clone, Debug)]
pub struct Intersection {
    pub nonempty: bool,
    pub common: Vec<PhasePoint>,
}

/// Points of the zero section lying in every `S_{Hᵢ}`.
///
/// Membership in a discrete `S_{Hᵢ}` means lying within the clustering radius
/// of one of its clusters; for a continuum it means attaining `m_{Hᵢ}` to
/// `TOL_VALUE`.
pub fn intersect_s_sets(hs: &[Arc<dyn PhaseField>]) -> Result<Intersection> {
    let Some(first) = hs.first() else {
        return Err(Error::Usage("intersect_S_sets needs at least one function".into()));
    };
    let sigma = SigmaSet::zero(*first.space());
    let sets: Vec<CriticalSet> = hs.iter().map(|h| locate_s(h.as_ref(), &sigma)).collect::<Result<_>>()?;
    let reduced = hs.iter().all(|h| h.is_reduced());
    let candidates: Vec<Config> = sets.iter().flat_map(|s| s.clusters.iter().copied()).collect();
    let mut common: Vec<Config> = Vec::new();
    for q in candidates {
        let in_all = hs.iter().zip(&sets).all(|(h, s)| {
            if s.continuum {
                sigma_value(h.as_ref(), &sigma, &q) >= s.m_h - TOL_VALUE
            } else {
                s.clusters.iter().any(|c| cluster_distance(reduced, c, &q) <= CLUSTER_RADIUS)
            }
        });
        if in_all && !common.iter().any(|c| cluster_distance(reduced, c, &q) <= CLUSTER_RADIUS) {
            common.push(q);
        }
    }
    Ok(Intersection {
        nonempty: !common.is_empty(),
        common: common.into_iter().map(PhasePoint::zero_section).collect(),
    })
}

/// Sampling plan for [`verify_star`].
#[derive(Clone, Copy, Debug)]
pub struct StarSampling {
    pub q_grid: usize,
    pub p_radius: f64,
    pub seed: u64,
}

impl Default for StarSampling {
    fn default() -> Self {
        Self { q_grid: 400, p_radius: 5.0, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub enum StarWitness {
    /// `H` fails to grow along the ray `s ↦ (q, s·u)` on `[0, 50]`.
    Coercivity { q: Config, direction: FiberVec },
    /// A momentum beating the Σ value in the fiber over `q`.
    FiberMinimum { point: PhasePoint, value: f64, sigma_value: f64 },
    /// `H` is not constant on the Σ-fiber over `q`.
    NotConstantOnSigma { q: Config, spread: f64 },
}

#[derive(Clone, Debug)]
pub struct StarVerdict {
    pub holds: bool,
    pub witness: Option<StarWitness>,
}

fn ray_directions(space: &ConfigurationSpace, q: &Config) -> Vec<FiberVec> {
    match q {
        Config::Circle(_) => vec![FiberVec::Circle(1.0), FiberVec::Circle(-1.0)],
        Config::Sphere(_) => sampling::fiber_sphere(space, q, 1.0, 8),
        Config::Rotation(_) => sampling::fiber_sphere(space, q, 1.0, 14),
    }
}

fn coercive_along(h: &dyn PhaseField, q: &Config, u: &FiberVec) -> bool {
    let vals: Vec<f64> = (0..=20)
        .map(|k| h.value(&PhasePoint::from_parts(*q, *u * (COERCIVITY_WINDOW * k as f64 / 20.0))))
        .collect();
    let tail = vals[10..].windows(2).all(|w| w[1] > w[0]);
    tail && vals[20] >= vals[0] + 1.0
}

fn project_ball(space: &ConfigurationSpace, q: &Config, p: FiberVec, r: f64) -> FiberVec {
    let p = match (q, p) {
        (Config::Sphere(x), FiberVec::Sphere(v)) => FiberVec::Sphere(v - x * x.dot(&v)),
        (_, p) => p,
    };
    let n = space.dual_norm(&p);
    if n > r {
        p * (r / n)
    } else {
        p
    }
}

fn momentum_gradient(h: &dyn PhaseField, x: &PhasePoint) -> FiberVec {
    match h.gradient(x) {
        PhaseGradient::Circle { dp, .. } => FiberVec::Circle(dp),
        PhaseGradient::Sphere { dp, .. } => FiberVec::Sphere(dp),
        PhaseGradient::Rotation { dl, .. } => FiberVec::Body(dl),
    }
}

/// Minimum of `H(q, ·)` over the ball `‖p‖_g ≤ r` by projected gradient
/// descent from the origin, Σ and spread starts.
pub fn fiber_minimum(h: &dyn PhaseField, sigma: &SigmaSet, q: &Config, r: f64) -> PhasePoint {
    let space = sigma.space();
    let mut starts: Vec<FiberVec> = vec![space.zero_fiber()];
    starts.extend(sigma.fiber(q).iter().map(PhasePoint::momentum));
    starts.extend(sampling::fiber_sphere(space, q, 0.5 * r, 6));
    starts.extend(sampling::fiber_sphere(space, q, r, 6));
    let mut best: Option<(PhasePoint, f64)> = None;
    for p0 in starts {
        let mut x = PhasePoint::from_parts(*q, project_ball(space, q, p0, r));
        let mut fx = h.value(&x);
        let mut step = 0.5;
        for _ in 0..300 {
            let g = momentum_gradient(h, &x);
            let mut moved = false;
            for _ in 0..40 {
                let cand = x.with_momentum(project_ball(space, q, x.momentum() - g * step, r));
                let fc = h.value(&cand);
                if fc < fx {
                    let gain = fx - fc;
                    x = cand;
                    fx = fc;
                    moved = gain > 1e-15 * (1.0 + fx.abs());
                    step *= 2.0;
                    break;
                }
                step *= 0.5;
            }
            if !moved {
                break;
            }
        }
        if best.as_ref().is_none_or(|b| fx < b.1) {
            best = Some((x, fx));
        }
    }
    best.expect("at least one start").0
}

/// Sampled check of the coercivity and fiberwise-minimum conditions.
pub fn verify_star(h: &dyn PhaseField, sigma: &SigmaSet, plan: &StarSampling) -> Result<StarVerdict> {
    sigma.check(h)?;
    let space = *sigma.space();
    let grid = sampling::seeded_grid(&space, plan.q_grid, plan.seed);
    let witnesses: Vec<Option<StarWitness>> = grid
        .par_iter()
        .map(|q| {
            for u in ray_directions(&space, q) {
                if !coercive_along(h, q, &u) {
                    return Some(StarWitness::Coercivity { q: *q, direction: u });
                }
            }
            let fib: Vec<f64> = sigma.fiber(q).iter().map(|x| h.value(x)).collect();
            let lo = fib.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = fib.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if hi - lo > TOL_VALUE {
                return Some(StarWitness::NotConstantOnSigma { q: *q, spread: hi - lo });
            }
            let sv = fib.iter().sum::<f64>() / fib.len() as f64;
            let x = fiber_minimum(h, sigma, q, plan.p_radius);
            let v = h.value(&x);
            (v < sv - TOL_VALUE).then_some(StarWitness::FiberMinimum { point: x, value: v, sigma_value: sv })
        })
        .collect();
    let witness = witnesses.into_iter().flatten().next();
    Ok(StarVerdict { holds: witness.is_none(), witness })
}

/// `γ` of a configuration when it is a rotation.
pub fn gamma_of(q: &Config) -> Option<Vec3> {
    q.gamma()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brackets::{Scaled, SphereField};
    use crate::geometry::FnScalar;
    use crate::systems::{self, Rho};
    use std::f64::consts::PI;

    #[test]
    fn pendulum_minimax_value_and_critical_point() {
        let s = systems::pendulum();
        let sigma = SigmaSet::zero(*s.space());
        assert!((compute_m_h(s.hamiltonian().as_ref(), &sigma).unwrap() - 2.0).abs() <= 1e-12);
        let set = locate_s(s.hamiltonian().as_ref(), &sigma).unwrap();
        assert_eq!(set.clusters.len(), 1);
        let Config::Circle(q) = set.clusters[0] else { unreachable!() };
        assert!(crate::geometry::angle_gap(q, PI) < 1e-6);
        assert!(verify_star(s.hamiltonian().as_ref(), &sigma, &StarSampling::default()).unwrap().holds);
    }

    #[test]
    fn circle_optimizer_agrees_with_brute_force() {
        let s = systems::pendulum();
        let h = s.hamiltonian();
        let grid = (0..100_000).map(|i| 2.0 * PI * i as f64 / 100_000.0);
        let brute = grid.map(|q| h.value(&PhasePoint::Circle { q, p: 0.0 })).fold(f64::MIN, f64::max);
        let m = compute_m_h(h.as_ref(), &SigmaSet::zero(*s.space())).unwrap();
        assert!((m - brute).abs() <= 1e-8);
    }

    #[test]
    fn neumann_has_two_antipodal_clusters() {
        let s = systems::neumann(1.0, 2.0, 3.0).unwrap();
        let set = locate_s(s.hamiltonian().as_ref(), &SigmaSet::zero(*s.space())).unwrap();
        assert_eq!(set.clusters.len(), 2);
        for c in &set.clusters {
            let Config::Sphere(q) = c else { unreachable!() };
            assert!((q.z.abs() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn kovalevskaya_without_potential_is_a_continuum() {
        let s = systems::kovalevskaya(1.0, 0.0).unwrap();
        let set = locate_s(s.hamiltonian().as_ref(), &SigmaSet::zero(*s.space())).unwrap();
        assert!(set.continuum);
    }

    #[test]
    fn singleton_reports_match_predictions() {
        for s in [
            systems::spherical_pendulum(),
            systems::kovalevskaya(1.0, 1.0).unwrap(),
            systems::lagrange(2.0, 1.0, 2.0).unwrap(),
            systems::clebsch(1.0, 2.0, 3.0).unwrap(),
        ] {
            let r = singleton_check(&s, &SigmaSet::zero(*s.space())).unwrap();
            assert!(r.matches_prediction(), "{}: {r:?}", s.name());
        }
    }

    #[test]
    fn clebsch_critical_points_are_vertical() {
        let s = systems::clebsch(1.0, 2.0, 3.0).unwrap();
        let set = locate_s(s.hamiltonian().as_ref(), &SigmaSet::zero(*s.space())).unwrap();
        for c in &set.clusters {
            assert!((c.gamma().unwrap().z.abs() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn m_h_scales_linearly() {
        let s = systems::neumann(1.0, 2.0, 3.0).unwrap();
        let sigma = SigmaSet::zero(*s.space());
        let m = compute_m_h(s.hamiltonian().as_ref(), &sigma).unwrap();
        for lam in [0.5, 2.0] {
            let scaled = Scaled { inner: s.hamiltonian().clone(), scale: lam };
            assert!((compute_m_h(&scaled, &sigma).unwrap() - lam * m).abs() <= 1e-8);
        }
    }

    #[test]
    fn m_h_dominates_the_zero_section() {
        let s = systems::spherical_pendulum();
        let sigma = SigmaSet::zero(*s.space());
        let m = compute_m_h(s.hamiltonian().as_ref(), &sigma).unwrap();
        for q in sampling::seeded_grid(s.space(), 5000, 3) {
            assert!(sigma_value(s.hamiltonian().as_ref(), &sigma, &q) <= m + 1e-8);
        }
    }

    #[test]
    fn shifted_minimum_violates_star() {
        let alpha = |q: &Vec3| Vec3::z() - q * q.z;
        let h = SphereField::new(
            move |q, p| 0.5 * (p - alpha(q)).norm_squared(),
            move |q, p| {
                // ∇_q of ½|p − e₃ + q₃q|².
                let r = p - alpha(q);
                let mut dq = r * q.z;
                dq.z += r.dot(q);
                (dq, r)
            },
        );
        let sigma = SigmaSet::zero(ConfigurationSpace::sphere2());
        let v = verify_star(&h, &sigma, &StarSampling::default()).unwrap();
        assert!(!v.holds);
        let Some(StarWitness::FiberMinimum { point, .. }) = v.witness else { panic!("{v:?}") };
        let Config::Sphere(q) = point.config() else { unreachable!() };
        assert!(alpha(&q).norm() > 1e-3);
    }

    #[test]
    fn sphere_bundle_section_for_a_well_profile() {
        let s2 = ConfigurationSpace::sphere2();
        let zero: Arc<dyn ScalarField> = Arc::new(FnScalar::constant(s2, 0.0));
        let sys = systems::convex(s2, zero, Some(Rho::well(1.0))).unwrap();
        let sigma = SigmaSet::sphere_bundle(s2, 1.0).unwrap();
        let v = verify_star(sys.hamiltonian().as_ref(), &sigma, &StarSampling::default()).unwrap();
        assert!(v.holds, "{v:?}");
        assert!(compute_m_h(sys.hamiltonian().as_ref(), &sigma).unwrap().abs() <= 1e-12);
        // The zero section is not fiberwise minimal here.
        let z = verify_star(sys.hamiltonian().as_ref(), &SigmaSet::zero(s2), &StarSampling::default()).unwrap();
        assert!(!z.holds);
    }

    #[test]
    fn neumann_and_clebsch_critical_sets_intersect() {
        let n = systems::neumann(1.0, 2.0, 3.0).unwrap();
        let i = intersect_s_sets(&n.components()[..2]).unwrap();
        assert!(i.nonempty);
        for x in &i.common {
            let PhasePoint::Sphere { q, .. } = x else { unreachable!() };
            assert!((q.z.abs() - 1.0).abs() < 1e-8);
        }
        let c = systems::clebsch(1.0, 2.0, 3.0).unwrap();
        let pair = [c.components()[0].clone(), c.components()[2].clone()];
        assert!(intersect_s_sets(&pair).unwrap().nonempty);
        let single = intersect_s_sets(&n.components()[..1]).unwrap();
        assert_eq!(single.common.len(), 2);
    }

    #[test]
    fn non_positive_bundle_radius_is_rejected() {
        assert!(SigmaSet::sphere_bundle(ConfigurationSpace::circle(), 0.0).is_err());
    }
}
