//! Configuration spaces S¹, S², SO(3), their cotangent bundles and the
//! graph-shift map `(q, p) ↦ (q, p + t·df_q)`.
//!
//! Conventions fixed for the whole crate:
//!
//! * Covectors on S² are stored as ambient vectors of ℝ³ lying in the tangent
//!   plane (round-metric identification).
//! * T*SO(3) is left (body) trivialized: a phase point is `(Q, ℓ)` with `ℓ`
//!   the body angular momentum, `ℓᵢ = Iᵢ ωᵢ`.
//! * The columns of `Q` are the body axes; the "vertical" map is
//!   `ν(Q) = Qᵀ e₃ = γ`, i.e. `γᵢ = Q₃ᵢ`.
//! * Configuration differentials on SO(3) are left-trivialized:
//!   `δf · ξ = d/ds f(Q exp(s ξ̂))` at `s = 0`.

use std::f64::consts::TAU;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::{Matrix3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Residual tolerance of every phase-space constraint.
pub const CONSTRAINT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    Circle,
    Sphere2,
    RotationGroup,
}

impl SpaceKind {
    pub fn intrinsic_dim(self) -> usize {
        match self {
            SpaceKind::Circle => 1,
            SpaceKind::Sphere2 => 2,
            SpaceKind::RotationGroup => 3,
        }
    }

    pub fn ambient_dim(self) -> usize {
        match self {
            SpaceKind::Circle => 2,
            SpaceKind::Sphere2 => 3,
            SpaceKind::RotationGroup => 9,
        }
    }
}

/// A configuration manifold together with its Riemannian metric.
///
/// Circle and sphere carry the round metric; the rotation group carries the
/// left-invariant metric `g(ω, ω') = Σ Iᵢ ωᵢ ω'ᵢ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConfigurationSpace {
    kind: SpaceKind,
    inertia: Vec3,
}

impl ConfigurationSpace {
    pub fn circle() -> Self {
        Self {
            kind: SpaceKind::Circle,
            inertia: Vec3::repeat(1.0),
        }
    }

    pub fn sphere2() -> Self {
        Self {
            kind: SpaceKind::Sphere2,
            inertia: Vec3::repeat(1.0),
        }
    }

    pub fn rotation_group(i1: f64, i2: f64, i3: f64) -> Result<Self> {
        for (name, v) in [("I1", i1), ("I2", i2), ("I3", i3)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Parameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self {
            kind: SpaceKind::RotationGroup,
            inertia: Vec3::new(i1, i2, i3),
        })
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.kind.intrinsic_dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.kind.ambient_dim()
    }

    /// Principal moments for the rotation group, `None` for round metrics.
    pub fn inertia(&self) -> Option<Vec3> {
        (self.kind == SpaceKind::RotationGroup).then_some(self.inertia)
    }

    /// Dual-metric norm `‖p‖_g` of a covector.
    pub fn dual_norm(&self, p: &FiberVec) -> f64 {
        match p {
            FiberVec::Circle(v) => v.abs(),
            FiberVec::Sphere(v) => v.norm(),
            FiberVec::Body(l) => l.component_div(&self.inertia).dot(l).sqrt(),
        }
    }

    pub fn zero_fiber(&self) -> FiberVec {
        match self.kind {
            SpaceKind::Circle => FiberVec::Circle(0.0),
            SpaceKind::Sphere2 => FiberVec::Sphere(Vec3::zeros()),
            SpaceKind::RotationGroup => FiberVec::Body(Vec3::zeros()),
        }
    }

    pub(crate) fn check_kind(&self, kind: SpaceKind, what: &str) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::Usage(format!(
                "{what}: expected a point of {:?}, got {:?}",
                self.kind, kind
            )))
        }
    }
}

/// A point of the configuration manifold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Config {
    /// Angle in radians; any real representative of the class mod 2π.
    Circle(f64),
    /// Unit vector of ℝ³.
    Sphere(Vec3),
    /// Rotation matrix whose columns are the body axes.
    Rotation(Mat3),
}

impl Config {
    pub fn kind(&self) -> SpaceKind {
        match self {
            Config::Circle(_) => SpaceKind::Circle,
            Config::Sphere(_) => SpaceKind::Sphere2,
            Config::Rotation(_) => SpaceKind::RotationGroup,
        }
    }

    /// `ν(Q) = Qᵀe₃` for rotations.
    pub fn gamma(&self) -> Option<Vec3> {
        match self {
            Config::Rotation(q) => Some(vertical(q)),
            _ => None,
        }
    }

    /// Distance to the constraint set (0 on the circle).
    pub fn residual(&self) -> f64 {
        match self {
            Config::Circle(_) => 0.0,
            Config::Sphere(q) => (q.norm_squared() - 1.0).abs(),
            Config::Rotation(q) => {
                let orth = (q.transpose() * q - Mat3::identity()).amax();
                if q.determinant() > 0.0 {
                    orth
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    pub fn repaired(&self) -> Config {
        match self {
            Config::Circle(q) => Config::Circle(*q),
            Config::Sphere(q) => Config::Sphere(q.normalize()),
            Config::Rotation(q) => Config::Rotation(polar(q)),
        }
    }

    /// Geodesic distance for the round metrics and rotation angle on SO(3).
    pub fn distance(&self, other: &Config) -> f64 {
        match (self, other) {
            (Config::Circle(a), Config::Circle(b)) => angle_gap(*a, *b),
            (Config::Sphere(a), Config::Sphere(b)) => a.angle(b),
            (Config::Rotation(a), Config::Rotation(b)) => {
                let c = ((a.transpose() * b).trace() - 1.0) / 2.0;
                c.clamp(-1.0, 1.0).acos()
            }
            _ => f64::INFINITY,
        }
    }

    /// Moves along the geodesic (exponential map) in direction `v`.
    ///
    /// On SO(3) `v` is a body vector and the result is `Q exp(v̂)`.
    pub fn retract(&self, v: &FiberVec) -> Config {
        match (self, v) {
            (Config::Circle(q), FiberVec::Circle(dv)) => Config::Circle(q + dv),
            (Config::Sphere(q), FiberVec::Sphere(dv)) => {
                let t = dv - q * q.dot(dv);
                let n = t.norm();
                if n < 1e-300 {
                    return Config::Sphere(*q);
                }
                Config::Sphere((q * n.cos() + t * (n.sin() / n)).normalize())
            }
            (Config::Rotation(q), FiberVec::Body(w)) => Config::Rotation(q * so3_exp(w)),
            _ => panic!("retract: fiber vector {v:?} does not match configuration {self:?}"),
        }
    }

    /// Flat coordinates (angle, unit vector, or row-major matrix).
    pub fn coords(&self) -> Vec<f64> {
        match self {
            Config::Circle(q) => vec![*q],
            Config::Sphere(q) => q.iter().copied().collect(),
            Config::Rotation(q) => q.transpose().iter().copied().collect(),
        }
    }
}

/// A tangent or cotangent vector in the fiber over a configuration point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FiberVec {
    Circle(f64),
    /// Ambient vector in ℝ³, tangent to the sphere.
    Sphere(Vec3),
    /// Body-frame vector.
    Body(Vec3),
}

impl FiberVec {
    pub fn kind(&self) -> SpaceKind {
        match self {
            FiberVec::Circle(_) => SpaceKind::Circle,
            FiberVec::Sphere(_) => SpaceKind::Sphere2,
            FiberVec::Body(_) => SpaceKind::RotationGroup,
        }
    }

    /// Euclidean norm of the stored components.
    pub fn euclid_norm(&self) -> f64 {
        match self {
            FiberVec::Circle(v) => v.abs(),
            FiberVec::Sphere(v) | FiberVec::Body(v) => v.norm(),
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        match self {
            FiberVec::Circle(v) => vec![*v],
            FiberVec::Sphere(v) | FiberVec::Body(v) => v.iter().copied().collect(),
        }
    }

    fn zip(self, rhs: FiberVec, op: impl Fn(f64, f64) -> f64) -> FiberVec {
        match (self, rhs) {
            (FiberVec::Circle(a), FiberVec::Circle(b)) => FiberVec::Circle(op(a, b)),
            (FiberVec::Sphere(a), FiberVec::Sphere(b)) => FiberVec::Sphere(a.zip_map(&b, op)),
            (FiberVec::Body(a), FiberVec::Body(b)) => FiberVec::Body(a.zip_map(&b, op)),
            (a, b) => panic!("fiber vectors over different spaces: {a:?} and {b:?}"),
        }
    }
}

impl Add for FiberVec {
    type Output = FiberVec;
    fn add(self, rhs: FiberVec) -> FiberVec {
        self.zip(rhs, |a, b| a + b)
    }
}

impl Sub for FiberVec {
    type Output = FiberVec;
    fn sub(self, rhs: FiberVec) -> FiberVec {
        self.zip(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for FiberVec {
    type Output = FiberVec;
    fn mul(self, s: f64) -> FiberVec {
        match self {
            FiberVec::Circle(v) => FiberVec::Circle(v * s),
            FiberVec::Sphere(v) => FiberVec::Sphere(v * s),
            FiberVec::Body(v) => FiberVec::Body(v * s),
        }
    }
}

impl Neg for FiberVec {
    type Output = FiberVec;
    fn neg(self) -> FiberVec {
        self * -1.0
    }
}

/// A point of T*N in the coordinates described in the module docs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PhasePoint {
    Circle { q: f64, p: f64 },
    Sphere { q: Vec3, p: Vec3 },
    Rotation { rot: Mat3, l: Vec3 },
}

impl PhasePoint {
    /// Builds a phase point, checking that the parts live over the same
    /// space and satisfy the constraints to [`CONSTRAINT_TOL`].
    pub fn new(q: Config, p: FiberVec) -> Result<Self> {
        let x = Self::assemble(q, p)
            .ok_or_else(|| Error::Usage(format!("momentum {p:?} does not match {q:?}")))?;
        x.check()?;
        Ok(x)
    }

    pub(crate) fn assemble(q: Config, p: FiberVec) -> Option<Self> {
        match (q, p) {
            (Config::Circle(q), FiberVec::Circle(p)) => Some(PhasePoint::Circle { q, p }),
            (Config::Sphere(q), FiberVec::Sphere(p)) => Some(PhasePoint::Sphere { q, p }),
            (Config::Rotation(rot), FiberVec::Body(l)) => Some(PhasePoint::Rotation { rot, l }),
            _ => None,
        }
    }

    /// Like [`PhasePoint::new`] without the residual check.
    ///
    /// # Panics
    /// If `q` and `p` belong to different spaces.
    pub fn from_parts(q: Config, p: FiberVec) -> Self {
        Self::assemble(q, p).expect("configuration and momentum over different spaces")
    }

    pub fn zero_section(q: Config) -> Self {
        let p = match q {
            Config::Circle(_) => FiberVec::Circle(0.0),
            Config::Sphere(_) => FiberVec::Sphere(Vec3::zeros()),
            Config::Rotation(_) => FiberVec::Body(Vec3::zeros()),
        };
        Self::from_parts(q, p)
    }

    pub fn kind(&self) -> SpaceKind {
        match self {
            PhasePoint::Circle { .. } => SpaceKind::Circle,
            PhasePoint::Sphere { .. } => SpaceKind::Sphere2,
            PhasePoint::Rotation { .. } => SpaceKind::RotationGroup,
        }
    }

    pub fn config(&self) -> Config {
        match self {
            PhasePoint::Circle { q, .. } => Config::Circle(*q),
            PhasePoint::Sphere { q, .. } => Config::Sphere(*q),
            PhasePoint::Rotation { rot, .. } => Config::Rotation(*rot),
        }
    }

    pub fn momentum(&self) -> FiberVec {
        match self {
            PhasePoint::Circle { p, .. } => FiberVec::Circle(*p),
            PhasePoint::Sphere { p, .. } => FiberVec::Sphere(*p),
            PhasePoint::Rotation { l, .. } => FiberVec::Body(*l),
        }
    }

    pub fn with_momentum(&self, p: FiberVec) -> Self {
        Self::from_parts(self.config(), p)
    }

    pub fn gamma(&self) -> Option<Vec3> {
        match self {
            PhasePoint::Rotation { rot, .. } => Some(vertical(rot)),
            _ => None,
        }
    }

    /// Largest constraint residual.
    pub fn residual(&self) -> f64 {
        match self {
            PhasePoint::Circle { .. } => 0.0,
            PhasePoint::Sphere { q, p } => (q.norm_squared() - 1.0).abs().max(q.dot(p).abs()),
            PhasePoint::Rotation { rot, .. } => Config::Rotation(*rot).residual(),
        }
    }

    fn check(&self) -> Result<()> {
        let r = self.residual();
        if r <= CONSTRAINT_TOL {
            Ok(())
        } else {
            let what = match self {
                PhasePoint::Sphere { .. } => "sphere phase point (|q|²−1, q·p)",
                _ => "rotation matrix orthogonality",
            };
            Err(Error::ConstraintViolation { what, residual: r })
        }
    }

    /// Renormalizes `q`, re-projects `p` onto the tangent plane, or polar
    /// projects `Q`.
    pub fn repaired(&self) -> Self {
        match self {
            PhasePoint::Circle { .. } => *self,
            PhasePoint::Sphere { q, p } => {
                let q = q.normalize();
                PhasePoint::Sphere { q, p: p - q * q.dot(p) }
            }
            PhasePoint::Rotation { rot, l } => PhasePoint::Rotation { rot: polar(rot), l: *l },
        }
    }

    /// Flat coordinates: `(q, p)`, `(q₁..q₃, p₁..p₃)`, or `(Q row-major, ℓ)`.
    pub fn coords(&self) -> Vec<f64> {
        let mut c = self.config().coords();
        c.extend(self.momentum().coords());
        c
    }

    /// Euclidean distance in [`PhasePoint::coords`], with the circle angle wrapped.
    pub fn distance(&self, other: &PhasePoint) -> f64 {
        match (self, other) {
            (PhasePoint::Circle { q: a, p: pa }, PhasePoint::Circle { q: b, p: pb }) => {
                angle_gap(*a, *b).hypot(pa - pb)
            }
            _ => self
                .coords()
                .iter()
                .zip(other.coords())
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

/// A smooth function on the configuration space with its differential.
///
/// The differential is a covector over `q`: the plain derivative on S¹, the
/// tangential gradient on S² and the left-trivialized body differential on
/// SO(3).
pub trait ScalarField: Send + Sync {
    fn space(&self) -> &ConfigurationSpace;
    fn value(&self, q: &Config) -> f64;
    fn differential(&self, q: &Config) -> FiberVec;
}

type ValueFn = dyn Fn(&Config) -> f64 + Send + Sync;
type DiffFn = dyn Fn(&Config) -> FiberVec + Send + Sync;

/// A [`ScalarField`] assembled from closures.
#[derive(Clone)]
pub struct FnScalar {
    space: ConfigurationSpace,
    value: Arc<ValueFn>,
    diff: Arc<DiffFn>,
}

impl FnScalar {
    pub fn circle(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            space: ConfigurationSpace::circle(),
            value: Arc::new(move |q| f(circle_angle(q))),
            diff: Arc::new(move |q| FiberVec::Circle(df(circle_angle(q)))),
        }
    }

    /// A function on S² given by an ambient formula and its ambient gradient;
    /// the differential is the tangential projection.
    pub fn sphere(
        f: impl Fn(&Vec3) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&Vec3) -> Vec3 + Send + Sync + 'static,
    ) -> Self {
        Self {
            space: ConfigurationSpace::sphere2(),
            value: Arc::new(move |q| f(&sphere_point(q))),
            diff: Arc::new(move |q| {
                let x = sphere_point(q);
                let g = grad(&x);
                FiberVec::Sphere(g - x * x.dot(&g))
            }),
        }
    }

    /// `f ∘ ν` on SO(3) for a function `f` of `γ = Qᵀe₃` given with its
    /// ambient gradient. Body differential is `∇f × γ`.
    pub fn vertical(
        space: ConfigurationSpace,
        f: impl Fn(&Vec3) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&Vec3) -> Vec3 + Send + Sync + 'static,
    ) -> Self {
        assert_eq!(space.kind(), SpaceKind::RotationGroup);
        Self {
            space,
            value: Arc::new(move |q| f(&rotation_gamma(q))),
            diff: Arc::new(move |q| {
                let g = rotation_gamma(q);
                FiberVec::Body(grad(&g).cross(&g))
            }),
        }
    }

    pub fn constant(space: ConfigurationSpace, c: f64) -> Self {
        let zero = space.zero_fiber();
        Self {
            space,
            value: Arc::new(move |_| c),
            diff: Arc::new(move |_| zero),
        }
    }
}

impl ScalarField for FnScalar {
    fn space(&self) -> &ConfigurationSpace {
        &self.space
    }
    fn value(&self, q: &Config) -> f64 {
        (self.value)(q)
    }
    fn differential(&self, q: &Config) -> FiberVec {
        (self.diff)(q)
    }
}

fn circle_angle(q: &Config) -> f64 {
    match q {
        Config::Circle(a) => *a,
        other => panic!("expected a circle point, got {other:?}"),
    }
}

fn sphere_point(q: &Config) -> Vec3 {
    match q {
        Config::Sphere(x) => *x,
        other => panic!("expected a sphere point, got {other:?}"),
    }
}

fn rotation_gamma(q: &Config) -> Vec3 {
    match q {
        Config::Rotation(r) => vertical(r),
        other => panic!("expected a rotation, got {other:?}"),
    }
}

/// Metric flat `g♭`: tangent vector to covector.
pub fn legendre(space: &ConfigurationSpace, q: &Config, v: &FiberVec) -> Result<FiberVec> {
    space.check_kind(q.kind(), "legendre")?;
    space.check_kind(v.kind(), "legendre")?;
    match (q, v) {
        (Config::Sphere(x), FiberVec::Sphere(w)) => {
            let r = x.dot(w).abs();
            if r > CONSTRAINT_TOL {
                return Err(Error::ConstraintViolation {
                    what: "velocity not tangent to the sphere",
                    residual: r,
                });
            }
            Ok(*v)
        }
        (_, FiberVec::Body(w)) => Ok(FiberVec::Body(w.component_mul(&space.inertia))),
        _ => Ok(*v),
    }
}

/// Metric sharp `g♯`, the inverse of [`legendre`].
pub fn inverse_legendre(space: &ConfigurationSpace, q: &Config, p: &FiberVec) -> Result<FiberVec> {
    space.check_kind(q.kind(), "inverse_legendre")?;
    space.check_kind(p.kind(), "inverse_legendre")?;
    match (q, p) {
        (Config::Sphere(x), FiberVec::Sphere(w)) => {
            let r = x.dot(w).abs();
            if r > CONSTRAINT_TOL {
                return Err(Error::ConstraintViolation {
                    what: "covector not tangent to the sphere",
                    residual: r,
                });
            }
            Ok(*p)
        }
        (_, FiberVec::Body(l)) => Ok(FiberVec::Body(l.component_div(&space.inertia))),
        _ => Ok(*p),
    }
}

/// `(q, p) ↦ (q, p + t·df_q)`.
pub fn graph_shift(f: &dyn ScalarField, t: f64, x: &PhasePoint) -> PhasePoint {
    let q = x.config();
    let shifted = x.momentum() + f.differential(&q) * t;
    let y = PhasePoint::from_parts(q, shifted);
    match y {
        PhasePoint::Sphere { q, p } => PhasePoint::Sphere { q, p: p - q * q.dot(&p) },
        other => other,
    }
}

/// `‖df_q‖_g` in the dual metric.
pub fn differential_norm(f: &dyn ScalarField, q: &Config) -> f64 {
    f.space().dual_norm(&f.differential(q))
}

/// Skew matrix with `hat(v) w = v × w`.
pub fn hat(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

pub fn so3_exp(v: &Vec3) -> Mat3 {
    Rotation3::new(*v).into_inner()
}

/// Cayley map `(I − A/2)⁻¹ (I + A/2)` of a skew matrix.
pub fn cayley(a: &Mat3) -> Mat3 {
    let id = Mat3::identity();
    (id - a * 0.5)
        .try_inverse()
        .expect("I − A/2 is invertible for skew A")
        * (id + a * 0.5)
}

/// Nearest rotation matrix (orthogonal polar factor with positive determinant).
pub fn polar(m: &Mat3) -> Mat3 {
    let svd = m.svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let mut r = u * vt;
    if r.determinant() < 0.0 {
        let mut u2 = u;
        u2.column_mut(2).neg_mut();
        r = u2 * vt;
    }
    r
}

/// `Qᵀ e₃`, the vertical direction seen in the body frame.
pub fn vertical(q: &Mat3) -> Vec3 {
    Vec3::new(q[(2, 0)], q[(2, 1)], q[(2, 2)])
}

/// A rotation whose vertical image is the given unit vector.
pub fn rotation_with_gamma(gamma: &Vec3) -> Mat3 {
    let g = gamma.normalize();
    let helper = if g.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let r0 = helper.cross(&g).normalize();
    let r1 = g.cross(&r0);
    // Rows of Q are the space axes in body coordinates; the third row is γ.
    Mat3::from_rows(&[r0.transpose(), r1.transpose(), g.transpose()])
}

/// Orthonormal basis of the tangent plane of S² at `q`.
pub fn sphere_tangent_basis(q: &Vec3) -> (Vec3, Vec3) {
    let helper = if q.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let e1 = (helper - q * q.dot(&helper)).normalize();
    let e2 = q.cross(&e1);
    (e1, e2)
}

/// Absolute angular separation on ℝ/2πℤ.
pub fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn body(x: f64, y: f64, z: f64) -> FiberVec {
        FiberVec::Body(Vec3::new(x, y, z))
    }

    #[test]
    fn legendre_on_rotation_group_multiplies_by_inertia() {
        let space = ConfigurationSpace::rotation_group(2.0, 2.0, 1.0).unwrap();
        let q = Config::Rotation(Mat3::identity());
        let l = legendre(&space, &q, &body(1.0, 0.0, 3.0)).unwrap();
        assert_eq!(l, body(2.0, 0.0, 3.0));
        let w = inverse_legendre(&space, &q, &body(2.0, 0.0, 3.0)).unwrap();
        assert_eq!(w, body(1.0, 0.0, 3.0));
    }

    #[test]
    fn legendre_on_sphere_is_identity_on_tangent_vectors() {
        let s = ConfigurationSpace::sphere2();
        let q = Config::Sphere(Vec3::z());
        let v = FiberVec::Sphere(Vec3::new(1.0, 2.0, 0.0));
        assert_eq!(legendre(&s, &q, &v).unwrap(), v);
        let q = Config::Sphere(Vec3::x());
        let p = FiberVec::Sphere(Vec3::new(0.0, 1.0, 1.0));
        assert_eq!(inverse_legendre(&s, &q, &p).unwrap(), p);
        assert_eq!(legendre(&s, &q, &s.zero_fiber()).unwrap(), s.zero_fiber());
    }

    #[test]
    fn legendre_rejects_normal_velocity() {
        let s = ConfigurationSpace::sphere2();
        let q = Config::Sphere(Vec3::z());
        let err = legendre(&s, &q, &FiberVec::Sphere(Vec3::new(0.0, 0.0, 1.0))).unwrap_err();
        assert!(matches!(err, Error::ConstraintViolation { .. }));
    }

    #[test]
    fn non_positive_inertia_is_rejected() {
        assert!(ConfigurationSpace::rotation_group(1.0, 0.0, 1.0).is_err());
        assert!(ConfigurationSpace::rotation_group(1.0, 1.0, -2.0).is_err());
    }

    #[test]
    fn graph_shift_of_sine_on_circle() {
        let f = FnScalar::circle(f64::sin, f64::cos);
        let x = PhasePoint::Circle { q: 0.0, p: 0.5 };
        assert_eq!(graph_shift(&f, 1.0, &x), PhasePoint::Circle { q: 0.0, p: 1.5 });
        assert_eq!(graph_shift(&f, 0.0, &x), x);
    }

    #[test]
    fn differential_norm_of_height_on_sphere() {
        let f = FnScalar::sphere(|q| q.z, |_| Vec3::z());
        assert!((differential_norm(&f, &Config::Sphere(Vec3::x())) - 1.0).abs() < 1e-15);
        assert_eq!(differential_norm(&f, &Config::Sphere(Vec3::z())), 0.0);
        let c = FnScalar::constant(ConfigurationSpace::sphere2(), 3.0);
        assert_eq!(differential_norm(&c, &Config::Sphere(Vec3::y())), 0.0);
    }

    #[test]
    fn vertical_differential_matches_rotation_derivative() {
        let space = ConfigurationSpace::rotation_group(1.0, 2.0, 3.0).unwrap();
        let f = FnScalar::vertical(space, |g| g.x * g.y + g.z, |g| Vec3::new(g.y, g.x, 1.0));
        let q = Config::Rotation(so3_exp(&Vec3::new(0.3, -0.7, 1.1)));
        let FiberVec::Body(d) = f.differential(&q) else { unreachable!() };
        let h = 1e-6;
        for i in 0..3 {
            let e = Vec3::ith(i, h);
            let fd = (f.value(&q.retract(&FiberVec::Body(e)))
                - f.value(&q.retract(&FiberVec::Body(-e))))
                / (2.0 * h);
            assert!((fd - d[i]).abs() < 1e-8, "component {i}: {fd} vs {}", d[i]);
        }
    }

    #[test]
    fn phase_point_constraints_are_checked() {
        assert!(PhasePoint::new(Config::Sphere(Vec3::z()), FiberVec::Sphere(Vec3::x())).is_ok());
        assert!(PhasePoint::new(Config::Sphere(Vec3::z()), FiberVec::Sphere(Vec3::z())).is_err());
        assert!(PhasePoint::new(Config::Sphere(Vec3::z() * 1.1), FiberVec::Sphere(Vec3::x())).is_err());
        let reflect = Mat3::from_diagonal(&Vec3::new(1.0, 1.0, -1.0));
        assert!(PhasePoint::new(Config::Rotation(reflect), body(0.0, 0.0, 0.0)).is_err());
        assert!(PhasePoint::new(Config::Circle(0.0), body(0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn rotation_with_gamma_hits_target() {
        let g = Vec3::new(0.2, -0.5, 0.3).normalize();
        let q = rotation_with_gamma(&g);
        assert!((vertical(&q) - g).norm() < 1e-15);
        assert!(Config::Rotation(q).residual() < 1e-14);
    }

    #[test]
    fn cayley_is_orthogonal() {
        let c = cayley(&hat(&Vec3::new(0.4, 1.0, -2.0)));
        assert!(Config::Rotation(c).residual() < 1e-14);
    }
}
