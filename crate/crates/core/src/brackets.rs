//! Phase-space functions and their Poisson brackets.
//!
//! * T*S¹: canonical bracket `∂_qF ∂_pG − ∂_pF ∂_qG`.
//! * T*S²: Dirac bracket of T*ℝ³ restricted by `φ₁ = |q|² − 1`, `φ₂ = q·p`.
//! * T*SO(3): left-trivialized bracket
//!   `{F,G} = −ℓ·(∇_ℓF × ∇_ℓG) + δF·∇_ℓG − ∇_ℓF·δG`, with `δ` the body
//!   differential in `Q`. For functions of `(ℓ, γ)` this is the Lie–Poisson
//!   bracket `−ℓ·(∇_ℓF×∇_ℓG) − γ·(∇_ℓF×∇_γG + ∇_γF×∇_ℓG)`.
//!
//! Time evolution is `Ġ = {G, F}` along the field of `F`.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Config, ConfigurationSpace, FiberVec, PhasePoint, ScalarField, SpaceKind, Vec3};
use crate::sampling;
use crate::systems::IntegrableSystem;

/// Gradient of a phase function in the chart of its space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PhaseGradient {
    Circle { dq: f64, dp: f64 },
    /// Ambient gradients in ℝ³ × ℝ³; need not be tangent.
    Sphere { dq: Vec3, dp: Vec3 },
    /// `dl = ∇_ℓF`, `body = δF`.
    Rotation { dl: Vec3, body: Vec3 },
}

impl PhaseGradient {
    pub fn scaled(self, s: f64) -> Self {
        match self {
            PhaseGradient::Circle { dq, dp } => PhaseGradient::Circle { dq: s * dq, dp: s * dp },
            PhaseGradient::Sphere { dq, dp } => PhaseGradient::Sphere { dq: dq * s, dp: dp * s },
            PhaseGradient::Rotation { dl, body } => PhaseGradient::Rotation { dl: dl * s, body: body * s },
        }
    }

    /// `a·self + b·other`.
    pub fn combine(self, a: f64, other: Self, b: f64) -> Self {
        match (self, other) {
            (PhaseGradient::Circle { dq, dp }, PhaseGradient::Circle { dq: eq, dp: ep }) => {
                PhaseGradient::Circle { dq: a * dq + b * eq, dp: a * dp + b * ep }
            }
            (PhaseGradient::Sphere { dq, dp }, PhaseGradient::Sphere { dq: eq, dp: ep }) => {
                PhaseGradient::Sphere { dq: dq * a + eq * b, dp: dp * a + ep * b }
            }
            (PhaseGradient::Rotation { dl, body }, PhaseGradient::Rotation { dl: el, body: eb }) => {
                PhaseGradient::Rotation { dl: dl * a + el * b, body: body * a + eb * b }
            }
            (x, y) => panic!("gradients over different spaces: {x:?} and {y:?}"),
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        match self {
            PhaseGradient::Circle { dq, dp } => vec![*dq, *dp],
            PhaseGradient::Sphere { dq, dp } => dq.iter().chain(dp.iter()).copied().collect(),
            PhaseGradient::Rotation { dl, body } => dl.iter().chain(body.iter()).copied().collect(),
        }
    }
}

/// Kinetic-plus-potential structure `F = k·½‖p‖²_g + s·V(q)` used by
/// splitting integrators.
#[derive(Clone)]
pub struct Splitting {
    pub kinetic: f64,
    pub potential_scale: f64,
    pub potential: Option<Arc<dyn ScalarField>>,
}

/// A smooth function on T*N.
pub trait PhaseField: Send + Sync {
    fn space(&self) -> &ConfigurationSpace;
    fn value(&self, x: &PhasePoint) -> f64;
    fn gradient(&self, x: &PhasePoint) -> PhaseGradient;

    /// On T*SO(3): whether the field depends on `Q` only through `γ = Qᵀe₃`.
    fn is_reduced(&self) -> bool {
        false
    }
    /// Value as a function of `(ℓ, γ)` for reduced fields.
    fn reduced_value(&self, _l: &Vec3, _g: &Vec3) -> Option<f64> {
        None
    }
    /// `(∇_ℓF, ∇_γF)` for reduced fields.
    fn reduced_gradient(&self, _l: &Vec3, _g: &Vec3) -> Option<(Vec3, Vec3)> {
        None
    }
    fn splitting(&self) -> Option<Splitting> {
        None
    }
}

type CircleFn = dyn Fn(f64, f64) -> f64 + Send + Sync;
type CircleGrad = dyn Fn(f64, f64) -> (f64, f64) + Send + Sync;
type AmbientFn = dyn Fn(&Vec3, &Vec3) -> f64 + Send + Sync;
type AmbientGrad = dyn Fn(&Vec3, &Vec3) -> (Vec3, Vec3) + Send + Sync;

/// A function of `(q, p)` on T*S¹.
#[derive(Clone)]
pub struct CircleField {
    space: ConfigurationSpace,
    value: Arc<CircleFn>,
    grad: Arc<CircleGrad>,
    splitting: Option<Splitting>,
}

impl CircleField {
    pub fn new(
        value: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        grad: impl Fn(f64, f64) -> (f64, f64) + Send + Sync + 'static,
    ) -> Self {
        Self {
            space: ConfigurationSpace::circle(),
            value: Arc::new(value),
            grad: Arc::new(grad),
            splitting: None,
        }
    }

    pub fn with_splitting(mut self, s: Splitting) -> Self {
        self.splitting = Some(s);
        self
    }
}

impl PhaseField for CircleField {
    fn space(&self) -> &ConfigurationSpace {
        &self.space
    }
    fn value(&self, x: &PhasePoint) -> f64 {
        let PhasePoint::Circle { q, p } = x else { panic!("circle field at {x:?}") };
        (self.value)(*q, *p)
    }
    fn gradient(&self, x: &PhasePoint) -> PhaseGradient {
        let PhasePoint::Circle { q, p } = x else { panic!("circle field at {x:?}") };
        let (dq, dp) = (self.grad)(*q, *p);
        PhaseGradient::Circle { dq, dp }
    }
    fn splitting(&self) -> Option<Splitting> {
        self.splitting.clone()
    }
}

/// A function on T*S² given by an ambient formula on ℝ³ × ℝ³.
#[derive(Clone)]
pub struct SphereField {
    space: ConfigurationSpace,
    value: Arc<AmbientFn>,
    grad: Arc<AmbientGrad>,
    splitting: Option<Splitting>,
}

impl SphereField {
    pub fn new(
        value: impl Fn(&Vec3, &Vec3) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&Vec3, &Vec3) -> (Vec3, Vec3) + Send + Sync + 'static,
    ) -> Self {
        Self {
            space: ConfigurationSpace::sphere2(),
            value: Arc::new(value),
            grad: Arc::new(grad),
            splitting: None,
        }
    }

    pub fn with_splitting(mut self, s: Splitting) -> Self {
        self.splitting = Some(s);
        self
    }
}

impl PhaseField for SphereField {
    fn space(&self) -> &ConfigurationSpace {
        &self.space
    }
    fn value(&self, x: &PhasePoint) -> f64 {
        let PhasePoint::Sphere { q, p } = x else { panic!("sphere field at {x:?}") };
        (self.value)(q, p)
    }
    fn gradient(&self, x: &PhasePoint) -> PhaseGradient {
        let PhasePoint::Sphere { q, p } = x else { panic!("sphere field at {x:?}") };
        let (dq, dp) = (self.grad)(q, p);
        PhaseGradient::Sphere { dq, dp }
    }
    fn splitting(&self) -> Option<Splitting> {
        self.splitting.clone()
    }
}

/// A function of `(ℓ, γ)` on T*SO(3).
#[derive(Clone)]
pub struct TopField {
    space: ConfigurationSpace,
    value: Arc<AmbientFn>,
    grad: Arc<AmbientGrad>,
    splitting: Option<Splitting>,
}

impl TopField {
    pub fn new(
        space: ConfigurationSpace,
        value: impl Fn(&Vec3, &Vec3) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&Vec3, &Vec3) -> (Vec3, Vec3) + Send + Sync + 'static,
    ) -> Self {
        assert_eq!(space.kind(), SpaceKind::RotationGroup);
        Self {
            space,
            value: Arc::new(value),
            grad: Arc::new(grad),
            splitting: None,
        }
    }

    pub fn with_splitting(mut self, s: Splitting) -> Self {
        self.splitting = Some(s);
        self
    }
}

fn rotation_parts(x: &PhasePoint) -> (Vec3, Vec3) {
    match x {
        PhasePoint::Rotation { l, .. } => (*l, x.gamma().expect("rotation point")),
        other => panic!("rotation field at {other:?}"),
    }
}

impl PhaseField for TopField {
    fn space(&self) -> &ConfigurationSpace {
        &self.space
    }
    fn value(&self, x: &PhasePoint) -> f64 {
        let (l, g) = rotation_parts(x);
        (self.value)(&l, &g)
    }
    fn gradient(&self, x: &PhasePoint) -> PhaseGradient {
        let (l, g) = rotation_parts(x);
        let (dl, dg) = (self.grad)(&l, &g);
        PhaseGradient::Rotation { dl, body: dg.cross(&g) }
    }
    fn is_reduced(&self) -> bool {
        true
    }
    fn reduced_value(&self, l: &Vec3, g: &Vec3) -> Option<f64> {
        Some((self.value)(l, g))
    }
    fn reduced_gradient(&self, l: &Vec3, g: &Vec3) -> Option<(Vec3, Vec3)> {
        Some((self.grad)(l, g))
    }
    fn splitting(&self) -> Option<Splitting> {
        self.splitting.clone()
    }
}

/// `s·(f ∘ π)` for a configuration function `f`.
#[derive(Clone)]
pub struct Lifted {
    f: Arc<dyn ScalarField>,
    scale: f64,
}

impl Lifted {
    pub fn new(f: Arc<dyn ScalarField>) -> Self {
        Self { f, scale: 1.0 }
    }

    /// The function whose time-t flow is `graph_shift(f, t, ·)`.
    ///
    /// With `Ġ = {G, F}` the flow of `f∘π` moves `p` by `−t·df`, so the
    /// generator of the fiberwise translation by `+t·df` is `−f∘π`.
    pub fn shift_generator(f: Arc<dyn ScalarField>) -> Self {
        Self { f, scale: -1.0 }
    }
}

impl PhaseField for Lifted {
    fn space(&self) -> &ConfigurationSpace {
        self.f.space()
    }
    fn value(&self, x: &PhasePoint) -> f64 {
        self.scale * self.f.value(&x.config())
    }
    fn gradient(&self, x: &PhasePoint) -> PhaseGradient {
        let s = self.scale;
        match self.f.differential(&x.config()) {
            FiberVec::Circle(d) => PhaseGradient::Circle { dq: s * d, dp: 0.0 },
            FiberVec::Sphere(d) => PhaseGradient::Sphere { dq: d * s, dp: Vec3::zeros() },
            FiberVec::Body(d) => PhaseGradient::Rotation { dl: Vec3::zeros(), body: d * s },
        }
    }
    fn splitting(&self) -> Option<Splitting> {
        Some(Splitting {
            kinetic: 0.0,
            potential_scale: self.scale,
            potential: Some(self.f.clone()),
        })
    }
}

/// `s·F`.
#[derive(Clone)]
pub struct Scaled {
    pub inner: Arc<dyn PhaseField>,
    pub scale: f64,
}

impl PhaseField for Scaled {
    fn space(&self) -> &ConfigurationSpace {
        self.inner.space()
    }
    fn value(&self, x: &PhasePoint) -> f64 {
        self.scale * self.inner.value(x)
    }
    fn gradient(&self, x: &PhasePoint) -> PhaseGradient {
        self.inner.gradient(x).scaled(self.scale)
    }
    fn is_reduced(&self) -> bool {
        self.inner.is_reduced()
    }
    fn reduced_value(&self, l: &Vec3, g: &Vec3) -> Option<f64> {
        self.inner.reduced_value(l, g).map(|v| v * self.scale)
    }
    fn reduced_gradient(&self, l: &Vec3, g: &Vec3) -> Option<(Vec3, Vec3)> {
        self.inner
            .reduced_gradient(l, g)
            .map(|(a, b)| (a * self.scale, b * self.scale))
    }
    fn splitting(&self) -> Option<Splitting> {
        self.inner.splitting().map(|s| Splitting {
            kinetic: s.kinetic * self.scale,
            potential_scale: s.potential_scale * self.scale,
            potential: s.potential,
        })
    }
}

/// Pointwise product `F·G`.
#[derive(Clone)]
pub struct Product {
    pub a: Arc<dyn PhaseField>,
    pub b: Arc<dyn PhaseField>,
}

impl PhaseField for Product {
    fn space(&self) -> &ConfigurationSpace {
        self.a.space()
    }
    fn value(&self, x: &PhasePoint) -> f64 {
        self.a.value(x) * self.b.value(x)
    }
    fn gradient(&self, x: &PhasePoint) -> PhaseGradient {
        let (va, vb) = (self.a.value(x), self.b.value(x));
        self.a.gradient(x).combine(vb, self.b.gradient(x), va)
    }
    fn is_reduced(&self) -> bool {
        self.a.is_reduced() && self.b.is_reduced()
    }
    fn reduced_value(&self, l: &Vec3, g: &Vec3) -> Option<f64> {
        Some(self.a.reduced_value(l, g)? * self.b.reduced_value(l, g)?)
    }
    fn reduced_gradient(&self, l: &Vec3, g: &Vec3) -> Option<(Vec3, Vec3)> {
        let (va, vb) = (self.a.reduced_value(l, g)?, self.b.reduced_value(l, g)?);
        let (al, ag) = self.a.reduced_gradient(l, g)?;
        let (bl, bg) = self.b.reduced_gradient(l, g)?;
        Some((al * vb + bl * va, ag * vb + bg * va))
    }
}

/// Central finite-difference gradient with step `h`.
///
/// Sphere fields are differentiated in ambient ℝ⁶; on SO(3) the `Q` part is
/// differentiated along `Q exp(±h êᵢ)`.
pub fn fd_gradient(f: &dyn PhaseField, x: &PhasePoint, h: f64) -> PhaseGradient {
    let c = |a: PhasePoint, b: PhasePoint| (f.value(&a) - f.value(&b)) / (2.0 * h);
    match *x {
        PhasePoint::Circle { q, p } => PhaseGradient::Circle {
            dq: c(PhasePoint::Circle { q: q + h, p }, PhasePoint::Circle { q: q - h, p }),
            dp: c(PhasePoint::Circle { q, p: p + h }, PhasePoint::Circle { q, p: p - h }),
        },
        PhasePoint::Sphere { q, p } => {
            let mut dq = Vec3::zeros();
            let mut dp = Vec3::zeros();
            for i in 0..3 {
                let e = Vec3::ith(i, h);
                dq[i] = c(PhasePoint::Sphere { q: q + e, p }, PhasePoint::Sphere { q: q - e, p });
                dp[i] = c(PhasePoint::Sphere { q, p: p + e }, PhasePoint::Sphere { q, p: p - e });
            }
            PhaseGradient::Sphere { dq, dp }
        }
        PhasePoint::Rotation { rot, l } => {
            let cfg = Config::Rotation(rot);
            let mut dl = Vec3::zeros();
            let mut body = Vec3::zeros();
            for i in 0..3 {
                let e = Vec3::ith(i, h);
                dl[i] = c(PhasePoint::Rotation { rot, l: l + e }, PhasePoint::Rotation { rot, l: l - e });
                let plus = cfg.retract(&FiberVec::Body(e));
                let minus = cfg.retract(&FiberVec::Body(-e));
                body[i] = c(
                    PhasePoint::from_parts(plus, FiberVec::Body(l)),
                    PhasePoint::from_parts(minus, FiberVec::Body(l)),
                );
            }
            PhaseGradient::Rotation { dl, body }
        }
    }
}

/// Bracket of two gradients at `x`; antisymmetric in IEEE arithmetic.
pub fn bracket_of_gradients(x: &PhasePoint, gf: &PhaseGradient, gg: &PhaseGradient) -> f64 {
    match (x, gf, gg) {
        (
            PhasePoint::Circle { .. },
            PhaseGradient::Circle { dq: fq, dp: fp },
            PhaseGradient::Circle { dq: gq, dp: gp },
        ) => fq * gp - fp * gq,
        (
            PhasePoint::Sphere { q, p },
            PhaseGradient::Sphere { dq: fq, dp: fp },
            PhaseGradient::Sphere { dq: gq, dp: gp },
        ) => {
            let canonical = fq.dot(gp) - fp.dot(gq);
            // {X, φ₁} = −2 q·∇_pX and {X, φ₂} = q·∇_qX − p·∇_pX.
            let (a_f, a_g) = (-2.0 * q.dot(fp), -2.0 * q.dot(gp));
            let (b_f, b_g) = (q.dot(fq) - p.dot(fp), q.dot(gq) - p.dot(gp));
            canonical + 0.5 * (b_f * a_g - a_f * b_g)
        }
        (
            PhasePoint::Rotation { l, .. },
            PhaseGradient::Rotation { dl: fl, body: fb },
            PhaseGradient::Rotation { dl: gl, body: gb },
        ) => -l.dot(&fl.cross(gl)) + (fb.dot(gl) - fl.dot(gb)),
        _ => panic!("bracket_of_gradients: mismatched kinds at {x:?}"),
    }
}

/// `{F, G}(x)`.
pub fn bracket(f: &dyn PhaseField, g: &dyn PhaseField, x: &PhasePoint) -> Result<f64> {
    let (kf, kg) = (f.space().kind(), g.space().kind());
    if kf != kg || kf != x.kind() {
        return Err(Error::Usage(format!(
            "bracket of fields on {kf:?} and {kg:?} at a point of {:?}",
            x.kind()
        )));
    }
    Ok(bracket_of_gradients(x, &f.gradient(x), &g.gradient(x)))
}

#[derive(Clone, Debug)]
pub struct CommutationReport {
    pub max_abs: f64,
    pub worst_point: PhasePoint,
    pub samples: usize,
}

/// Largest `|{Φᵢ, Φⱼ}|` over `n` seeded points of the momentum ball
/// `‖p‖_g ≤ 5`.
pub fn verify_commutation(system: &IntegrableSystem, n: usize, seed: u64) -> Result<CommutationReport> {
    if n == 0 {
        return Err(Error::Usage("verify_commutation needs at least one sample".into()));
    }
    let space = system.space();
    if space.kind() == SpaceKind::RotationGroup {
        if let Some(c) = system.components().iter().position(|c| !c.is_reduced()) {
            return Err(Error::Usage(format!(
                "component {c} of {} depends on the rotation beyond γ",
                system.name()
            )));
        }
    }
    let points = sampling::phase_points(space, n, 5.0, seed);
    let comps = system.components();
    let per_point: Vec<f64> = points
        .par_iter()
        .map(|x| {
            let grads: Vec<PhaseGradient> = comps.iter().map(|c| c.gradient(x)).collect();
            let mut worst = 0.0f64;
            for i in 0..grads.len() {
                for j in i + 1..grads.len() {
                    worst = worst.max(bracket_of_gradients(x, &grads[i], &grads[j]).abs());
                }
            }
            worst
        })
        .collect();
    let (idx, max_abs) = per_point
        .iter()
        .copied()
        .enumerate()
        .fold((0, -1.0), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    Ok(CommutationReport {
        max_abs,
        worst_point: points[idx],
        samples: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{FnScalar, Mat3};
    use crate::sampling::phase_points;
    use crate::systems;
    use proptest::prelude::*;

    fn gamma_dot_l(space: ConfigurationSpace) -> Arc<dyn PhaseField> {
        Arc::new(TopField::new(space, |l, g| l.dot(g), |l, g| (*g, *l)))
    }

    fn gamma_sq(space: ConfigurationSpace) -> Arc<dyn PhaseField> {
        Arc::new(TopField::new(space, |_, g| g.norm_squared(), |_, g| (Vec3::zeros(), 2.0 * g)))
    }

    fn rot_space() -> ConfigurationSpace {
        ConfigurationSpace::rotation_group(1.0, 2.0, 3.0).unwrap()
    }

    #[test]
    fn self_bracket_vanishes_exactly() {
        let sys = systems::spherical_pendulum();
        for x in phase_points(sys.space(), 100, 5.0, 3) {
            for c in sys.components() {
                assert_eq!(bracket(c.as_ref(), c.as_ref(), &x).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn casimirs_commute_with_every_top_integral() {
        for sys in [
            systems::kovalevskaya(1.0, 1.0).unwrap(),
            systems::clebsch(1.0, 2.0, 3.0).unwrap(),
            systems::lagrange(2.0, 1.0, 2.0).unwrap(),
        ] {
            let space = *sys.space();
            let casimirs = [gamma_dot_l(space), gamma_sq(space)];
            for x in phase_points(&space, 300, 5.0, 11) {
                for c in &casimirs {
                    for f in sys.components() {
                        let v = bracket(f.as_ref(), c.as_ref(), &x).unwrap();
                        assert!(v.abs() <= 1e-12, "{}: {v}", sys.name());
                    }
                }
            }
        }
    }

    #[test]
    fn mismatched_spaces_are_usage_errors() {
        let a = systems::pendulum();
        let b = systems::spherical_pendulum();
        let x = PhasePoint::Circle { q: 0.1, p: 0.2 };
        let err = bracket(a.components()[0].as_ref(), b.components()[0].as_ref(), &x).unwrap_err();
        assert!(matches!(err, Error::Usage(_)));
    }

    #[test]
    fn non_reduced_rotation_components_are_rejected() {
        let space = rot_space();
        let f: Arc<dyn ScalarField> = Arc::new(FnScalar::vertical(space, |g| g.z, |_| Vec3::z()));
        let sys = IntegrableSystem::new("lifted", space, vec![Arc::new(Lifted::new(f))], vec![], None).unwrap();
        assert!(matches!(verify_commutation(&sys, 10, 0), Err(Error::Usage(_))));
    }

    #[test]
    fn spherical_pendulum_commutes() {
        let sys = systems::spherical_pendulum();
        let rep = verify_commutation(&sys, 1000, 1).unwrap();
        assert!(rep.max_abs <= 1e-9, "{}", rep.max_abs);
    }

    #[test]
    fn non_commuting_control_is_detected() {
        let sys = systems::noncommuting_control();
        let rep = verify_commutation(&sys, 1000, 1).unwrap();
        assert!(rep.max_abs > 1e-3, "{}", rep.max_abs);
    }

    #[test]
    fn analytic_gradients_match_finite_differences() {
        for sys in systems::catalog() {
            for x in phase_points(sys.space(), 50, 5.0, 5) {
                for c in sys.components() {
                    let a = c.gradient(&x);
                    let n = fd_gradient(c.as_ref(), &x, 1e-5);
                    let (ca, cn) = (a.coords(), n.coords());
                    let scale = ca.iter().fold(1.0f64, |m, v| m.max(v.abs()));
                    for (u, v) in ca.iter().zip(&cn) {
                        assert!(
                            (u - v).abs() <= 1e-6 * scale,
                            "{}: analytic {ca:?} vs fd {cn:?}",
                            sys.name()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn reduced_bracket_matches_lie_poisson_formula() {
        let sys = systems::kovalevskaya(1.0, 1.0).unwrap();
        let (h, g) = (&sys.components()[0], &sys.components()[2]);
        for x in phase_points(sys.space(), 100, 5.0, 9) {
            let (l, gam) = rotation_parts(&x);
            let (hl, hg) = h.reduced_gradient(&l, &gam).unwrap();
            let (gl, gg) = g.reduced_gradient(&l, &gam).unwrap();
            let lp = -l.dot(&hl.cross(&gl)) - gam.dot(&(hl.cross(&gg) + hg.cross(&gl)));
            let b = bracket(h.as_ref(), g.as_ref(), &x).unwrap();
            assert!((b - lp).abs() <= 1e-10 * (1.0 + lp.abs()));
        }
    }

    fn sphere_fields() -> Vec<Arc<dyn PhaseField>> {
        vec![
            Arc::new(SphereField::new(
                |q, p| q.x * p.y + q.z * q.z,
                |q, p| (Vec3::new(p.y, 0.0, 2.0 * q.z), Vec3::new(0.0, q.x, 0.0)),
            )),
            Arc::new(SphereField::new(
                |q, p| p.norm_squared() * q.y,
                |q, p| (Vec3::new(0.0, p.norm_squared(), 0.0), 2.0 * q.y * p),
            )),
            Arc::new(SphereField::new(
                |q, p| (q.x + p.z).sin(),
                |q, p| {
                    let c = (q.x + p.z).cos();
                    (Vec3::new(c, 0.0, 0.0), Vec3::new(0.0, 0.0, c))
                },
            )),
        ]
    }

    fn top_fields() -> Vec<Arc<dyn PhaseField>> {
        let s = rot_space();
        vec![
            Arc::new(TopField::new(s, |l, g| l.x * g.y, |l, g| (Vec3::new(g.y, 0.0, 0.0), Vec3::new(0.0, l.x, 0.0)))),
            Arc::new(TopField::new(s, |l, g| l.z * l.z + g.x, |l, _| (Vec3::new(0.0, 0.0, 2.0 * l.z), Vec3::x()))),
            Arc::new(TopField::new(s, |l, g| l.y * g.z * g.x, |l, g| {
                (Vec3::new(0.0, g.z * g.x, 0.0), Vec3::new(l.y * g.z, 0.0, l.y * g.x))
            })),
        ]
    }

    fn jacobi(fs: &[Arc<dyn PhaseField>], x: &PhasePoint) -> f64 {
        // {F,{G,K}} via a finite-difference gradient of the inner bracket.
        struct Inner(Arc<dyn PhaseField>, Arc<dyn PhaseField>);
        impl PhaseField for Inner {
            fn space(&self) -> &ConfigurationSpace {
                self.0.space()
            }
            fn value(&self, x: &PhasePoint) -> f64 {
                bracket(self.0.as_ref(), self.1.as_ref(), x).unwrap()
            }
            fn gradient(&self, x: &PhasePoint) -> PhaseGradient {
                fd_gradient(self, x, 1e-5)
            }
        }
        let cyc = |a: usize, b: usize, c: usize| {
            let inner = Inner(fs[b].clone(), fs[c].clone());
            bracket(fs[a].as_ref(), &inner, x).unwrap()
        };
        cyc(0, 1, 2) + cyc(1, 2, 0) + cyc(2, 0, 1)
    }

    #[test]
    fn jacobi_identity_on_sphere_and_rotation_group() {
        let sf = sphere_fields();
        for x in phase_points(&ConfigurationSpace::sphere2(), 40, 2.0, 21) {
            assert!(jacobi(&sf, &x).abs() <= 1e-7, "sphere {}", jacobi(&sf, &x));
        }
        let tf = top_fields();
        for x in phase_points(&rot_space(), 40, 2.0, 22) {
            assert!(jacobi(&tf, &x).abs() <= 1e-7, "rotation {}", jacobi(&tf, &x));
        }
    }

    proptest! {
        #[test]
        fn antisymmetry_is_exact(seed in 0u64..500) {
            let sf = sphere_fields();
            let x = phase_points(&ConfigurationSpace::sphere2(), 1, 5.0, seed)[0];
            for f in &sf {
                for g in &sf {
                    let a = bracket(f.as_ref(), g.as_ref(), &x).unwrap();
                    let b = bracket(g.as_ref(), f.as_ref(), &x).unwrap();
                    prop_assert_eq!(a, -b);
                }
            }
            let tf = top_fields();
            let y = phase_points(&rot_space(), 1, 5.0, seed)[0];
            for f in &tf {
                for g in &tf {
                    let a = bracket(f.as_ref(), g.as_ref(), &y).unwrap();
                    let b = bracket(g.as_ref(), f.as_ref(), &y).unwrap();
                    prop_assert_eq!(a, -b);
                }
            }
        }

        #[test]
        fn leibniz_rule(seed in 0u64..500) {
            let sf = sphere_fields();
            let x = phase_points(&ConfigurationSpace::sphere2(), 1, 3.0, seed)[0];
            let fg = Product { a: sf[0].clone(), b: sf[1].clone() };
            let lhs = bracket(&fg, sf[2].as_ref(), &x).unwrap();
            let rhs = sf[0].value(&x) * bracket(sf[1].as_ref(), sf[2].as_ref(), &x).unwrap()
                + sf[1].value(&x) * bracket(sf[0].as_ref(), sf[2].as_ref(), &x).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
        }

        #[test]
        fn rotation_casimirs_commute(seed in 0u64..500) {
            let space = rot_space();
            let y = phase_points(&space, 1, 5.0, seed)[0];
            for f in top_fields() {
                for c in [gamma_dot_l(space), gamma_sq(space)] {
                    prop_assert!(bracket(f.as_ref(), c.as_ref(), &y).unwrap().abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn body_bracket_accepts_non_reduced_fields() {
        let space = rot_space();
        let f: Arc<dyn ScalarField> = Arc::new(FnScalar::vertical(space, |g| g.x, |_| Vec3::x()));
        let lifted = Lifted::new(f);
        let x = PhasePoint::Rotation { rot: Mat3::identity(), l: Vec3::new(1.0, 0.0, 0.0) };
        assert!(bracket(&lifted, &lifted, &x).unwrap() == 0.0);
    }
}
