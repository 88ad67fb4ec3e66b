//! Graph-shift displacement certificates.
//!
//! A certificate pairs a configuration function `f` with a radius `R` and the
//! sampled margin `min_{x∈Σ} H(x + R·df) − c`. Positive margin means the
//! shifted section misses the sublevel set `{H ≤ c}` on the sampled grid.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::brackets::PhaseField;
use crate::critical::{self, SigmaSet, TOL_SINGLETON, TOL_VALUE};
use crate::error::{Error, Result};
use crate::geometry::{
    differential_norm, graph_shift, sphere_tangent_basis, Config, ConfigurationSpace, FiberVec, PhasePoint,
    ScalarField, SpaceKind, Vec3,
};
use crate::optim::NelderMead;
use crate::sampling;
use crate::shift::{Basis, ShiftFunction};
use crate::systems::IntegrableSystem;

/// Safety factor applied to the enclosing momentum radius.
pub const R2_SAFETY: f64 = 1.05;
/// Below this the differential counts as vanishing.
pub const R1_FLOOR: f64 = 1e-9;
/// Momentum window scanned for sublevel radii.
pub const SUBLEVEL_WINDOW: f64 = 50.0;
/// Margins at or below this are rounding noise and do not certify.
pub const MARGIN_FLOOR: f64 = 1e-12;
/// Distance below which a fiber value counts as inside `Φ(Σ)`.
pub const IMAGE_TOL: f64 = 1e-6;

/// Minimum verification density on S¹ and S².
pub const MIN_GRID: usize = 10_000;
/// Minimum verification density on SO(3).
pub const MIN_GRID_ROTATION: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Grid {
    pub density: usize,
    pub seed: u64,
}

impl Grid {
    /// Smallest density accepted by verification on `space`.
    pub fn minimum_density(space: &ConfigurationSpace) -> usize {
        match space.kind() {
            SpaceKind::RotationGroup => MIN_GRID_ROTATION,
            _ => MIN_GRID,
        }
    }

    pub fn standard(space: &ConfigurationSpace, seed: u64) -> Self {
        Self { density: Self::minimum_density(space), seed }
    }

    /// Density used for the constants of the construction.
    fn constants_density(space: &ConfigurationSpace) -> usize {
        match space.kind() {
            SpaceKind::RotationGroup => 20_000,
            _ => MIN_GRID,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PaperConstants {
    #[serde(rename = "R1")]
    pub r1: f64,
    #[serde(rename = "R2")]
    pub r2: f64,
    #[serde(rename = "R3")]
    pub r3: f64,
}

/// Samplewise check of `‖R₃·df_q‖_g > 2R₂/1.05` on the constants grid outside `U`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProofCheck {
    pub min_shift_norm: f64,
    pub bound: f64,
    pub outside_points: usize,
    pub holds: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificatePath {
    Paper,
    Search,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Target {
    Level(f64),
    Fiber(Vec<f64>),
}

#[derive(Clone, Debug, Serialize)]
pub struct DisplacementCertificate {
    pub system: String,
    pub y_or_c: Target,
    pub sigma: String,
    pub basis: Basis,
    pub basis_coefficients: Vec<f64>,
    #[serde(rename = "R")]
    pub r: f64,
    pub margin: f64,
    pub grid: Grid,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constants: Option<PaperConstants>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub proof_check: Option<ProofCheck>,
    pub path: CertificatePath,
    /// Phase coordinates of the Σ-point realizing the margin.
    pub worst_point: Vec<f64>,
    #[serde(skip)]
    pub level: f64,
    #[serde(skip)]
    pub shift: ShiftFunction,
}

impl DisplacementCertificate {
    pub fn is_valid(&self) -> bool {
        self.margin > MARGIN_FLOOR
    }
}

#[derive(Clone, Debug)]
pub struct Verification {
    pub margin: f64,
    pub worst: PhasePoint,
}

/// Limits for [`Displacer::search`].
#[derive(Clone, Copy, Debug)]
pub struct SearchBudget {
    pub grid: Grid,
    /// Objective evaluations across all direct-search restarts.
    pub max_evals: usize,
    /// Coarse configuration points used inside the direct search.
    pub coarse_points: usize,
    pub try_paper: bool,
}

impl SearchBudget {
    pub fn standard(space: &ConfigurationSpace, seed: u64) -> Self {
        Self { grid: Grid::standard(space, seed), max_evals: 6000, coarse_points: 500, try_paper: true }
    }
}

/// A Hamiltonian together with Σ and its minimax value `m_H`.
pub struct Displacer {
    name: String,
    h: Arc<dyn PhaseField>,
    sigma: SigmaSet,
    m_h: f64,
    top: Config,
}

impl std::fmt::Debug for Displacer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Displacer").field("name", &self.name).field("m_h", &self.m_h).finish()
    }
}

impl Displacer {
    pub fn new(name: impl Into<String>, h: Arc<dyn PhaseField>, sigma: SigmaSet) -> Result<Self> {
        let m = critical::maximize_on_sigma(h.as_ref(), &sigma)?;
        if !m.certified {
            return Err(Error::Precondition(format!(
                "optimizer best {} below dense-grid bound {}",
                m.value, m.grid_max
            )));
        }
        let top = m
            .maximizers
            .iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(q, _)| *q)
            .expect("at least one start");
        Ok(Self { name: name.into(), h, sigma, m_h: m.value, top })
    }

    pub fn for_system(system: &IntegrableSystem, sigma: SigmaSet) -> Result<Self> {
        Self::new(system.name(), system.hamiltonian().clone(), sigma)
    }

    pub fn m_h(&self) -> f64 {
        self.m_h
    }

    pub fn sigma(&self) -> &SigmaSet {
        &self.sigma
    }

    /// Grid estimate of `(min, max)` of `H` on Σ; the maximum is `m_H`.
    pub fn sigma_range(&self) -> (f64, f64) {
        let grid = sampling::low_discrepancy(self.space(), 20_000);
        let lo = grid.par_iter().map(|q| self.sigma_value(q)).reduce(|| f64::INFINITY, f64::min);
        (lo.min(self.m_h), self.m_h)
    }

    fn space(&self) -> &ConfigurationSpace {
        self.sigma.space()
    }

    fn sigma_value(&self, q: &Config) -> f64 {
        critical::sigma_value(self.h.as_ref(), &self.sigma, q)
    }

    fn check_level(&self, c: f64) -> Result<()> {
        if !c.is_finite() {
            return Err(Error::Parameter(format!("level must be finite, got {c}")));
        }
        if c >= self.m_h {
            return Err(Error::Precondition(format!("level {c} is not below m_H = {}", self.m_h)));
        }
        Ok(())
    }

    /// `H(q, ·) − c` minimized over the shifted Σ-fiber at `q`.
    fn shifted_gap(&self, c: f64, f: &dyn ScalarField, r: f64, q: &Config) -> (f64, PhasePoint) {
        self.sigma
            .fiber(q)
            .into_iter()
            .map(|x| (self.h.value(&graph_shift(f, r, &x)) - c, x))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .expect("Σ fibers are nonempty")
    }

    /// Largest `‖p‖_g` with `H(q, p) ≤ c`, by ray scans and bisection.
    fn sublevel_radius(&self, c: f64, q: &Config) -> Result<f64> {
        let dirs = sampling::fiber_sphere(self.space(), q, 1.0, ray_count(self.space()));
        let h = |s: f64, u: &FiberVec| self.h.value(&PhasePoint::from_parts(*q, *u * s));
        let steps = 200;
        let ds = SUBLEVEL_WINDOW / steps as f64;
        let mut radius = 0.0f64;
        for u in &dirs {
            let mut last = None;
            for k in 0..=steps {
                if h(k as f64 * ds, u) <= c {
                    last = Some(k);
                }
            }
            let Some(k) = last else { continue };
            if k == steps {
                return Err(Error::Unverifiable(format!(
                    "sublevel {{H ≤ {c}}} reaches the momentum window {SUBLEVEL_WINDOW} at {q:?}"
                )));
            }
            let (mut lo, mut hi) = (k as f64 * ds, (k + 1) as f64 * ds);
            for _ in 0..40 {
                let mid = 0.5 * (lo + hi);
                if h(mid, u) <= c {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            radius = radius.max(hi);
        }
        Ok(radius)
    }

    fn sigma_radius(&self) -> f64 {
        match self.sigma.kind() {
            critical::SigmaKind::ZeroSection => 0.0,
            critical::SigmaKind::SphereBundle(r) => r,
        }
    }

    /// `(R₁, R₂, R₃)` of the construction for `f` and the region `u`, with
    /// the samplewise proof inequality.
    pub fn paper_constants(
        &self,
        c: f64,
        f: &dyn ScalarField,
        u: &(dyn Fn(&Config) -> bool + Sync),
        seed: u64,
    ) -> Result<(PaperConstants, ProofCheck)> {
        self.check_level(c)?;
        let grid = sampling::seeded_grid(self.space(), Grid::constants_density(self.space()), seed);
        let outside: Vec<Config> = grid.into_iter().filter(|q| !u(q)).collect();
        let (r1, argmin) = outside
            .par_iter()
            .map(|q| (differential_norm(f, q), *q))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .unwrap_or((f64::INFINITY, self.top));
        if r1 <= R1_FLOOR {
            return Err(Error::Construction {
                message: format!("shift function is critical outside U (‖df‖ = {r1:e})"),
                point: Box::new(argmin),
            });
        }
        let radii: Vec<f64> = outside.par_iter().map(|q| self.sublevel_radius(c, q)).collect::<Result<_>>()?;
        let enclosing = radii.into_iter().fold(self.sigma_radius(), f64::max);
        let r2 = R2_SAFETY * enclosing;
        let r3 = 2.0 * r2 / r1;
        let min_shift_norm = if outside.is_empty() { f64::INFINITY } else { r3 * r1 };
        let bound = 2.0 * r2 / R2_SAFETY;
        let check = ProofCheck {
            min_shift_norm,
            bound,
            outside_points: outside.len(),
            holds: outside.is_empty() || min_shift_norm > bound,
        };
        Ok((PaperConstants { r1, r2, r3 }, check))
    }

    /// Sampled margin of `Γ_{R·f}(Σ)` above the level `c`, refined by local
    /// minimization from the worst grid point. `critical` lists exact
    /// critical points of `f`, where the shift is the identity.
    pub fn verify(&self, c: f64, f: &dyn ScalarField, r: f64, grid: Grid, critical: &[Config]) -> Result<Verification> {
        let min = Grid::minimum_density(self.space());
        if grid.density < min {
            return Err(Error::Usage(format!("verification grid needs at least {min} points, got {}", grid.density)));
        }
        if f.space().kind() != self.space().kind() {
            return Err(Error::Usage("shift function lives on a different space".into()));
        }
        let points = sampling::seeded_grid(self.space(), grid.density, grid.seed);
        let eval = |q: &Config| self.shifted_gap(c, f, r, q);
        let (mut margin, mut worst) = points
            .par_iter()
            .map(&eval)
            .chain(critical.par_iter().map(|q| self.shifted_gap(c, f, 0.0, q)))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .expect("grid is nonempty");
        let step = grid_spacing(self.space(), grid.density);
        let q0 = worst.config();
        let nm = NelderMead { max_evals: 400, ..NelderMead::default() };
        let local = nm.minimize(|t| eval(&chart(&q0, t)).0, &vec![0.0; self.space().intrinsic_dim()], step);
        let refined = eval(&chart(&q0, &local.x));
        if refined.0 < margin {
            (margin, worst) = refined;
        }
        Ok(Verification { margin, worst })
    }

    /// Certificate for the level `c`: the construction first, then direct
    /// coefficient search.
    pub fn search(&self, c: f64, budget: &SearchBudget) -> Result<DisplacementCertificate> {
        self.search_target(c, Target::Level(c), budget)
    }

    fn search_target(&self, c: f64, target: Target, budget: &SearchBudget) -> Result<DisplacementCertificate> {
        self.check_level(c)?;
        let mut best_margin = f64::NEG_INFINITY;
        if budget.try_paper {
            match self.paper_path(c, target.clone(), budget.grid) {
                Ok(cert) if cert.is_valid() => return Ok(cert),
                Ok(cert) => best_margin = cert.margin,
                Err(Error::Construction { .. }) | Err(Error::Unverifiable(_)) => {}
                Err(e) => return Err(e),
            }
        }
        let cert = self.direct_path(c, target, budget)?;
        if cert.is_valid() {
            return Ok(cert);
        }
        Err(Error::SearchFailure { best_margin: best_margin.max(cert.margin) })
    }

    /// Distance from the top of `H|Σ` to the boundary of `{H|Σ > t}` along
    /// geodesic rays.
    fn boundary_distance(&self, t: f64) -> f64 {
        let q0 = self.top;
        let dirs: Vec<FiberVec> = match q0 {
            Config::Circle(_) => vec![FiberVec::Circle(1.0), FiberVec::Circle(-1.0)],
            Config::Sphere(x) => {
                let (e1, e2) = sphere_tangent_basis(&x);
                (0..36)
                    .map(|i| {
                        let a = 2.0 * PI * i as f64 / 36.0;
                        FiberVec::Sphere(e1 * a.cos() + e2 * a.sin())
                    })
                    .collect()
            }
            Config::Rotation(_) => sampling::fibonacci_sphere(26).into_iter().map(FiberVec::Body).collect(),
        };
        let inside = |s: f64, u: &FiberVec| self.sigma_value(&q0.retract(&(*u * s))) > t;
        dirs.par_iter()
            .map(|u| {
                let mut prev = 0.0;
                let mut s = 1e-9;
                while s < PI {
                    if !inside(s, u) {
                        let (mut lo, mut hi) = (prev, s);
                        for _ in 0..60 {
                            let mid = 0.5 * (lo + hi);
                            if inside(mid, u) {
                                lo = mid;
                            } else {
                                hi = mid;
                            }
                        }
                        return lo;
                    }
                    prev = s;
                    s *= 1.1;
                }
                PI
            })
            .reduce(|| PI, f64::min)
    }

    /// Shift function whose critical points lie within `beta/2` of `center`.
    fn localized_shift(&self, center: &Config, beta: f64) -> Result<ShiftFunction> {
        let space = *self.space();
        match center {
            Config::Circle(a) => {
                let (s, co) = a.sin_cos();
                ShiftFunction::contracted_height(space, Vec3::new(co, s, 0.0), Vec3::new(-s, co, 0.0), (beta / 4.0).tan())
            }
            Config::Sphere(x) => {
                let (e1, _) = sphere_tangent_basis(x);
                ShiftFunction::contracted_height(space, *x, e1, (beta / 4.0).tan())
            }
            Config::Rotation(r) => ShiftFunction::projective_quadratic(space, r, 3f64.sqrt() / (beta / 4.0).tan()),
        }
    }

    fn paper_path(&self, c: f64, target: Target, grid: Grid) -> Result<DisplacementCertificate> {
        let t = 0.5 * (c + self.m_h);
        let beta = 0.9 * self.boundary_distance(t);
        let f = self.localized_shift(&self.top, beta)?;
        let probes = f.critical_points();
        if let Some(bad) = probes.iter().find(|q| self.sigma_value(q) <= t) {
            return Err(Error::Construction {
                message: "critical point of the shift function escaped U".into(),
                point: Box::new(*bad),
            });
        }
        let in_u = |q: &Config| self.sigma_value(q) > t;
        let (constants, check) = self.paper_constants(c, &f, &in_u, grid.seed)?;
        let v = self.verify(c, &f, constants.r3, grid, &probes)?;
        Ok(self.certificate(target, c, f, constants.r3, v, grid, Some((constants, check)), CertificatePath::Paper))
    }

    #[allow(clippy::too_many_arguments)]
    fn certificate(
        &self,
        target: Target,
        c: f64,
        f: ShiftFunction,
        r: f64,
        v: Verification,
        grid: Grid,
        constants: Option<(PaperConstants, ProofCheck)>,
        path: CertificatePath,
    ) -> DisplacementCertificate {
        DisplacementCertificate {
            system: self.name.clone(),
            y_or_c: target,
            sigma: self.sigma.label(),
            basis: f.basis.clone(),
            basis_coefficients: f.coefficients.clone(),
            r,
            margin: v.margin,
            grid,
            constants: constants.map(|c| c.0),
            proof_check: constants.map(|c| c.1),
            path,
            worst_point: v.worst.coords(),
            level: c,
            shift: f,
        }
    }

    /// Initial shift function for the coefficient search.
    fn search_basis(&self) -> Result<(ShiftFunction, Vec<f64>)> {
        match self.top {
            Config::Circle(a) => {
                // −sin(q − a) − ¼ sin 2(q − a) is critical only at a ± 1.196.
                let f = ShiftFunction::fourier(vec![0.0; 6])?;
                let (s1, c1) = a.sin_cos();
                let (s2, c2) = (2.0 * a).sin_cos();
                Ok((f, vec![s1, -c1, 0.25 * s2, -0.25 * c2, 0.0, 0.0]))
            }
            Config::Sphere(x) => {
                let f = ShiftFunction::harmonic(vec![0.0; 8])?;
                // Degree one harmonics are (z, x, y).
                let mut c0 = vec![0.0; 8];
                c0[0] = x.z;
                c0[1] = x.x;
                c0[2] = x.y;
                Ok((f, c0))
            }
            Config::Rotation(r) => {
                let f = ShiftFunction::trace(*self.space(), &crate::geometry::Mat3::zeros())?;
                // tr(AQ) peaks at Q = top for A = topᵀ; row-major Aᵀ is column-major top.
                Ok((f, r.iter().copied().collect()))
            }
        }
    }

    fn direct_path(&self, c: f64, target: Target, budget: &SearchBudget) -> Result<DisplacementCertificate> {
        let (f0, start) = self.search_basis()?;
        let n = start.len();
        let coarse = sampling::seeded_grid(self.space(), budget.coarse_points, budget.grid.seed ^ 0x5eed);
        let objective = |x: &[f64]| {
            let norm = x[..n].iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-12 {
                return f64::INFINITY;
            }
            let coeffs: Vec<f64> = x[..n].iter().map(|v| v / norm).collect();
            let f = f0.with_coefficients(coeffs).expect("finite coefficients");
            let r = x[n].clamp(-30.0, 30.0).exp();
            -coarse.iter().map(|q| self.shifted_gap(c, &f, r, q).0).fold(f64::INFINITY, f64::min)
        };
        let mut rng = sampling::rng(budget.grid.seed);
        let mut best: Option<(Vec<f64>, f64)> = None;
        let mut spent = 0;
        let mut restart = 0usize;
        while spent < budget.max_evals {
            let mut x0: Vec<f64> = if restart == 0 {
                start.clone()
            } else {
                use rand::Rng;
                (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
            };
            x0.push(restart as f64 * 0.7);
            let nm = NelderMead { max_evals: (budget.max_evals - spent).min(1500), ..NelderMead::default() };
            let m = nm.minimize(objective, &x0, 0.5);
            spent += m.evals.max(1);
            if best.as_ref().is_none_or(|b| m.value < b.1) {
                best = Some((m.x, m.value));
            }
            if best.as_ref().is_some_and(|b| b.1 < 0.0) {
                break;
            }
            restart += 1;
        }
        let (x, _) = best.expect("at least one restart");
        let norm = x[..n].iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
        let f = f0.with_coefficients(x[..n].iter().map(|v| v / norm).collect())?;
        let r = x[n].clamp(-30.0, 30.0).exp();
        let v = self.verify(c, &f, r, budget.grid, &[])?;
        Ok(self.certificate(target, c, f, r, v, budget.grid, None, CertificatePath::Search))
    }

    /// Margin of a stored certificate on a fresh grid.
    pub fn reverify(&self, cert: &DisplacementCertificate, seed: u64) -> Result<f64> {
        let grid = Grid { density: cert.grid.density, seed };
        let probes = cert.shift.critical_points();
        Ok(self.verify(cert.level, &cert.shift, cert.r, grid, &probes)?.margin)
    }
}

fn ray_count(space: &ConfigurationSpace) -> usize {
    match space.kind() {
        SpaceKind::Circle => 2,
        SpaceKind::Sphere2 => 16,
        SpaceKind::RotationGroup => 14,
    }
}

/// Typical distance between neighbours in a grid of `n` points.
fn grid_spacing(space: &ConfigurationSpace, n: usize) -> f64 {
    let n = n.max(1) as f64;
    match space.kind() {
        SpaceKind::Circle => 2.0 * PI / n,
        SpaceKind::Sphere2 => (4.0 * PI / n).sqrt(),
        SpaceKind::RotationGroup => (8.0 * PI * PI / n).cbrt(),
    }
}

/// Normal-coordinate chart around `q0`.
fn chart(q0: &Config, t: &[f64]) -> Config {
    match q0 {
        Config::Circle(a) => Config::Circle(a + t[0]),
        Config::Sphere(x) => {
            let (e1, e2) = sphere_tangent_basis(x);
            q0.retract(&FiberVec::Sphere(e1 * t[0] + e2 * t[1]))
        }
        Config::Rotation(_) => q0.retract(&FiberVec::Body(Vec3::new(t[0], t[1], t[2]))),
    }
}

/// Free-function form of [`Displacer::paper_constants`].
pub fn paper_constants(
    h: Arc<dyn PhaseField>,
    sigma: SigmaSet,
    c: f64,
    f: &dyn ScalarField,
    u: &(dyn Fn(&Config) -> bool + Sync),
    seed: u64,
) -> Result<PaperConstants> {
    Ok(Displacer::new("", h, sigma)?.paper_constants(c, f, u, seed)?.0)
}

/// Sampled margin of `Γ_{R·f}(Σ)` above `c` without refinement probes.
pub fn verify_graph_displacement(
    h: &dyn PhaseField,
    c: f64,
    f: &dyn ScalarField,
    r: f64,
    sigma: &SigmaSet,
    grid: Grid,
) -> Result<f64> {
    let min = Grid::minimum_density(sigma.space());
    if grid.density < min {
        return Err(Error::Usage(format!("verification grid needs at least {min} points, got {}", grid.density)));
    }
    let points = sampling::seeded_grid(sigma.space(), grid.density, grid.seed);
    let gap = |q: &Config| {
        sigma
            .fiber(q)
            .iter()
            .map(|x| h.value(&graph_shift(f, r, x)) - c)
            .fold(f64::INFINITY, f64::min)
    };
    let (m, q0) = points
        .par_iter()
        .map(|q| (gap(q), *q))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("grid is nonempty");
    let local = NelderMead { max_evals: 400, ..NelderMead::default() }.minimize(
        |t| gap(&chart(&q0, t)),
        &vec![0.0; sigma.space().intrinsic_dim()],
        grid_spacing(sigma.space(), grid.density),
    );
    Ok(m.min(local.value))
}

/// Certificate for the level `c` of a system's Hamiltonian.
pub fn search_displacing_function(
    system: &IntegrableSystem,
    c: f64,
    sigma: SigmaSet,
    budget: &SearchBudget,
) -> Result<DisplacementCertificate> {
    Displacer::for_system(system, sigma)?.search(c, budget)
}

/// Displacement of a finite cloud from the zero section.
#[derive(Clone, Debug, Serialize)]
pub struct ZeroSectionCertificate {
    /// Center and radius of a configuration ball missed by `π(X)`.
    pub uncovered_center: Vec<f64>,
    pub uncovered_radius: f64,
    pub basis: Basis,
    pub basis_coefficients: Vec<f64>,
    #[serde(rename = "R0")]
    pub r0: f64,
    /// `min_{x∈X} ‖R₀·df_q + p‖_g`.
    pub min_separation: f64,
    pub points: usize,
    pub grid: usize,
    #[serde(skip)]
    pub shift: ShiftFunction,
}

/// Moves `xs` off the zero section by the graph shift of `R₀·f`, with `f`
/// critical only inside a ball that `π(xs)` misses.
pub fn displace_from_zero_section(
    space: &ConfigurationSpace,
    xs: &[PhasePoint],
    density: usize,
) -> Result<ZeroSectionCertificate> {
    if xs.is_empty() {
        return Err(Error::Parameter("point cloud is empty".into()));
    }
    if xs.iter().any(|x| x.kind() != space.kind()) {
        return Err(Error::Usage("point cloud lives on a different space".into()));
    }
    let base: Vec<Config> = xs.iter().map(PhasePoint::config).collect();
    let grid = sampling::low_discrepancy(space, density);
    let (gap, center) = grid
        .par_iter()
        .map(|q| (base.iter().map(|b| q.distance(b)).fold(f64::INFINITY, f64::min), *q))
        .max_by(|a, b| a.0.total_cmp(&b.0).then(b.1.coords()[0].total_cmp(&a.1.coords()[0])))
        .expect("grid is nonempty");
    let resolution = 2.0 * grid_spacing(space, density);
    if gap <= resolution {
        return Err(Error::Unverifiable(format!(
            "no configuration ball wider than the grid resolution {resolution:.3e} is missed by the cloud"
        )));
    }
    let beta = 0.9 * gap;
    let f = match center {
        Config::Circle(a) => {
            let (s, co) = a.sin_cos();
            ShiftFunction::contracted_height(*space, Vec3::new(co, s, 0.0), Vec3::new(-s, co, 0.0), (beta / 4.0).tan())?
        }
        Config::Sphere(x) => {
            let (e1, _) = sphere_tangent_basis(&x);
            ShiftFunction::contracted_height(*space, x, e1, (beta / 4.0).tan())?
        }
        Config::Rotation(r) => ShiftFunction::projective_quadratic(*space, &r, 3f64.sqrt() / (beta / 4.0).tan())?,
    };
    let dnorm = base.iter().map(|q| differential_norm(&f, q)).fold(f64::INFINITY, f64::min);
    if dnorm <= R1_FLOOR {
        let bad = base.iter().find(|q| differential_norm(&f, q) <= R1_FLOOR).copied().unwrap_or(center);
        return Err(Error::Construction { message: "shift function is critical on π(X)".into(), point: Box::new(bad) });
    }
    let pmax = xs.iter().map(|x| space.dual_norm(&x.momentum())).fold(0.0, f64::max);
    let r0 = (2.0 * pmax + 1.0) / dnorm;
    let min_separation = xs
        .iter()
        .map(|x| space.dual_norm(&graph_shift(&f, r0, x).momentum()))
        .fold(f64::INFINITY, f64::min);
    Ok(ZeroSectionCertificate {
        uncovered_center: center.coords(),
        uncovered_radius: gap,
        basis: f.basis.clone(),
        basis_coefficients: f.coefficients.clone(),
        r0,
        min_separation,
        points: xs.len(),
        grid: density,
        shift: f,
    })
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FiberStatus {
    /// The fiber misses Σ, so the identity displaces it.
    Disjoint { reason: String },
    Displaced { certificate: Box<DisplacementCertificate> },
    Critical { deviation: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct FiberClassification {
    pub y: Vec<f64>,
    #[serde(flatten)]
    pub status: FiberStatus,
}

/// `min_{x∈Σ} |Φ(x) − y|`.
pub fn distance_to_image(system: &IntegrableSystem, sigma: &SigmaSet, y: &[f64]) -> f64 {
    let gap = |q: &Config| {
        sigma
            .fiber(q)
            .iter()
            .map(|x| {
                let v = system.eval(x);
                v.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    };
    let space = sigma.space();
    let n = match space.kind() {
        SpaceKind::Circle => 4000,
        _ => 20_000,
    };
    let grid = sampling::low_discrepancy(space, n);
    let mut vals: Vec<(f64, Config)> = grid.par_iter().map(|q| (gap(q), *q)).collect();
    vals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let step = grid_spacing(space, n);
    vals.par_iter()
        .take(8)
        .map(|(v, q0)| {
            let m = NelderMead { max_evals: 1500, ..NelderMead::default() }.minimize(
                |t| gap(&chart(q0, t)),
                &vec![0.0; space.intrinsic_dim()],
                step,
            );
            v.min(m.value)
        })
        .reduce(|| f64::INFINITY, f64::min)
}

/// Trichotomy for fibers of a system whose Σ-critical value is a singleton.
pub fn classify_fibers(
    system: &IntegrableSystem,
    ys: &[Vec<f64>],
    sigma: SigmaSet,
    budget: &SearchBudget,
) -> Result<Vec<FiberClassification>> {
    if let Some(y) = ys.iter().find(|y| y.len() != system.k()) {
        return Err(Error::Parameter(format!("fiber value {y:?} needs {} components", system.k())));
    }
    let report = critical::singleton_check(system, &sigma)?;
    if !report.is_singleton {
        return Err(Error::Precondition(format!("{} fails the singleton check", system.name())));
    }
    let y0 = report.y0.clone();
    let m = y0[0];
    let displacer = Displacer::for_system(system, sigma)?;
    ys.iter()
        .map(|y| {
            let deviation = y.iter().zip(&y0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let status = if deviation <= TOL_SINGLETON {
                FiberStatus::Critical { deviation }
            } else if y[0] > m + TOL_VALUE {
                FiberStatus::Disjoint { reason: format!("first component exceeds m = {m}") }
            } else {
                let d = distance_to_image(system, &sigma, y);
                if d > IMAGE_TOL {
                    FiberStatus::Disjoint { reason: format!("distance {d:e} from the image of Σ") }
                } else if y[0] < m - TOL_VALUE {
                    let cert = displacer.search_target(y[0], Target::Fiber(y.clone()), budget)?;
                    FiberStatus::Displaced { certificate: Box::new(cert) }
                } else {
                    return Err(Error::Inconsistency(format!(
                        "fiber {y:?} sits at the critical level {m} but differs from y0 = {y0:?}"
                    )));
                }
            };
            Ok(FiberClassification { y: y.clone(), status })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::FnScalar;
    use crate::systems;

    fn pendulum() -> Displacer {
        Displacer::for_system(&systems::pendulum(), SigmaSet::zero(ConfigurationSpace::circle())).unwrap()
    }

    #[test]
    fn unshifted_zero_section_meets_sublevel() {
        let sys = systems::spherical_pendulum();
        let sigma = SigmaSet::zero(*sys.space());
        let f = FnScalar::constant(*sys.space(), 0.0);
        let m = verify_graph_displacement(sys.hamiltonian().as_ref(), 0.5, &f, 0.0, &sigma, Grid::standard(sys.space(), 1))
            .unwrap();
        // min_q H(q, 0) = −1.
        assert!((m - (-1.5)).abs() < 1e-9, "{m}");
    }

    #[test]
    fn constant_shift_fails_construction() {
        let d = pendulum();
        let f = FnScalar::constant(ConfigurationSpace::circle(), 3.0);
        let u = |q: &Config| d.sigma_value(q) > 1.5;
        assert!(matches!(d.paper_constants(1.0, &f, &u, 0), Err(Error::Construction { .. })));
    }

    #[test]
    fn level_at_or_above_m_is_rejected() {
        let d = pendulum();
        let b = SearchBudget::standard(&ConfigurationSpace::circle(), 0);
        assert!(matches!(d.search(d.m_h(), &b), Err(Error::Precondition(_))));
        assert!(matches!(d.search(5.0, &b), Err(Error::Precondition(_))));
    }

    #[test]
    fn coarse_grid_is_a_usage_error() {
        let d = pendulum();
        let f = FnScalar::constant(ConfigurationSpace::circle(), 0.0);
        let g = Grid { density: 100, seed: 0 };
        assert!(matches!(d.verify(1.0, &f, 0.0, g, &[]), Err(Error::Usage(_))));
    }

    #[test]
    fn paper_path_close_to_critical_level() {
        let d = pendulum();
        let c = d.m_h() - 1e-9;
        let cert = d.search(c, &SearchBudget::standard(&ConfigurationSpace::circle(), 3)).unwrap();
        assert_eq!(cert.path, CertificatePath::Paper);
        assert!(cert.margin > 0.0 && cert.margin < 1e-8, "{}", cert.margin);
    }

    #[test]
    fn direct_search_alone_finds_pendulum_certificate() {
        let d = pendulum();
        let mut b = SearchBudget::standard(&ConfigurationSpace::circle(), 5);
        b.try_paper = false;
        let cert = d.search(1.0, &b).unwrap();
        assert_eq!(cert.path, CertificatePath::Search);
        assert!(cert.is_valid());
        assert!(cert.constants.is_none());
    }

    #[test]
    fn zero_section_single_point() {
        let s2 = ConfigurationSpace::sphere2();
        let x = PhasePoint::zero_section(Config::Sphere(Vec3::z()));
        let cert = displace_from_zero_section(&s2, &[x], 2000).unwrap();
        assert!(cert.r0 > 0.0 && cert.min_separation > 0.0);
        assert!(cert.uncovered_center[2] < -0.99);
    }

    #[test]
    fn zero_section_dense_cloud_is_unverifiable() {
        let s2 = ConfigurationSpace::sphere2();
        let xs: Vec<PhasePoint> = sampling::fibonacci_sphere(40_000)
            .into_iter()
            .map(|q| PhasePoint::zero_section(Config::Sphere(q)))
            .collect();
        assert!(matches!(displace_from_zero_section(&s2, &xs, 2000), Err(Error::Unverifiable(_))));
    }

    #[test]
    fn zero_section_off_section_cloud_needs_positive_r0() {
        let circle = ConfigurationSpace::circle();
        let xs: Vec<PhasePoint> =
            (0..20).map(|i| PhasePoint::from_parts(Config::Circle(0.1 * i as f64), FiberVec::Circle(1.0 + i as f64))).collect();
        let cert = displace_from_zero_section(&circle, &xs, 4000).unwrap();
        assert!(cert.r0 > 0.0);
        assert!(cert.min_separation > 0.0);
    }
}
