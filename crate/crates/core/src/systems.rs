//! Catalog of integrable systems as ordered tuples of commuting phase
//! functions, each with the closed-form value `y₀` of its critical fiber.

use std::sync::Arc;

use crate::brackets::{CircleField, PhaseField, SphereField, Splitting, TopField};
use crate::critical;
use crate::error::{Error, Result};
use crate::geometry::{Config, ConfigurationSpace, FiberVec, FnScalar, PhasePoint, ScalarField, SpaceKind, Vec3};

/// Component formula in the velocity picture, evaluated at `(q, v)`; on
/// SO(3) `v` is the body angular velocity `ω`.
pub type VelocityFn = Arc<dyn Fn(&Config, &FiberVec) -> f64 + Send + Sync>;

/// A moment map `Φ = (Φ₁, …, Φ_k)` with `Φ₁` the distinguished Hamiltonian.
#[derive(Clone)]
pub struct IntegrableSystem {
    name: String,
    space: ConfigurationSpace,
    components: Vec<Arc<dyn PhaseField>>,
    component_names: Vec<String>,
    params: Vec<(String, f64)>,
    predicted_y0: Option<Vec<f64>>,
    velocity: Vec<VelocityFn>,
}

impl std::fmt::Debug for IntegrableSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IntegrableSystem")
            .field("name", &self.name)
            .field("space", &self.space)
            .field("components", &self.component_names)
            .field("params", &self.params)
            .field("predicted_y0", &self.predicted_y0)
            .finish()
    }
}

impl IntegrableSystem {
    pub fn new(
        name: impl Into<String>,
        space: ConfigurationSpace,
        components: Vec<Arc<dyn PhaseField>>,
        params: Vec<(String, f64)>,
        predicted_y0: Option<Vec<f64>>,
    ) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Parameter("a moment map needs at least one component".into()));
        }
        if let Some(c) = components.iter().find(|c| c.space().kind() != space.kind()) {
            return Err(Error::Usage(format!(
                "component on {:?} in a system on {:?}",
                c.space().kind(),
                space.kind()
            )));
        }
        if let Some(y) = &predicted_y0 {
            if y.len() != components.len() {
                return Err(Error::Parameter(format!(
                    "predicted y0 has {} entries for {} components",
                    y.len(),
                    components.len()
                )));
            }
        }
        let component_names = (1..=components.len()).map(|i| format!("Phi{i}")).collect();
        Ok(Self {
            name: name.into(),
            space,
            components,
            component_names,
            params,
            predicted_y0,
            velocity: Vec::new(),
        })
    }

    fn named(mut self, names: &[&str]) -> Self {
        self.component_names = names.iter().map(|s| s.to_string()).collect();
        self
    }

    fn with_velocity(mut self, v: Vec<VelocityFn>) -> Self {
        debug_assert_eq!(v.len(), self.components.len());
        self.velocity = v;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn space(&self) -> &ConfigurationSpace {
        &self.space
    }
    pub fn components(&self) -> &[Arc<dyn PhaseField>] {
        &self.components
    }
    pub fn component_names(&self) -> &[String] {
        &self.component_names
    }
    pub fn k(&self) -> usize {
        self.components.len()
    }
    pub fn hamiltonian(&self) -> &Arc<dyn PhaseField> {
        &self.components[0]
    }
    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }
    pub fn predicted_y0(&self) -> Option<&[f64]> {
        self.predicted_y0.as_deref()
    }
    /// Velocity-picture formulas, one per component, when known.
    pub fn velocity_formulas(&self) -> &[VelocityFn] {
        &self.velocity
    }

    /// `Φ(x)`.
    pub fn eval(&self, x: &PhasePoint) -> Vec<f64> {
        self.components.iter().map(|c| c.value(x)).collect()
    }

    /// Same system with only the listed components.
    pub fn restricted(&self, idx: &[usize]) -> Self {
        let pick = |v: &Vec<f64>| idx.iter().map(|&i| v[i]).collect::<Vec<_>>();
        Self {
            name: self.name.clone(),
            space: self.space,
            components: idx.iter().map(|&i| self.components[i].clone()).collect(),
            component_names: idx.iter().map(|&i| self.component_names[i].clone()).collect(),
            params: self.params.clone(),
            predicted_y0: self.predicted_y0.as_ref().map(pick),
            velocity: if self.velocity.is_empty() {
                Vec::new()
            } else {
                idx.iter().map(|&i| self.velocity[i].clone()).collect()
            },
        }
    }
}

fn param(name: &str, v: f64) -> (String, f64) {
    (name.to_string(), v)
}

fn circle_v(q: &Config, v: &FiberVec) -> (f64, f64) {
    match (q, v) {
        (Config::Circle(q), FiberVec::Circle(v)) => (*q, *v),
        _ => panic!("circle velocity formula at {q:?}, {v:?}"),
    }
}

fn sphere_v(q: &Config, v: &FiberVec) -> (Vec3, Vec3) {
    match (q, v) {
        (Config::Sphere(q), FiberVec::Sphere(v)) => (*q, *v),
        _ => panic!("sphere velocity formula at {q:?}, {v:?}"),
    }
}

fn body_v(q: &Config, v: &FiberVec) -> (Vec3, Vec3) {
    match (q, v) {
        (Config::Rotation(_), FiberVec::Body(w)) => (q.gamma().expect("rotation"), *w),
        _ => panic!("body velocity formula at {q:?}, {v:?}"),
    }
}

/// `H = ½p² + 1 − cos q` on T*S¹.
pub fn pendulum() -> IntegrableSystem {
    let potential: Arc<dyn ScalarField> = Arc::new(FnScalar::circle(|q| 1.0 - q.cos(), f64::sin));
    let h = CircleField::new(|q, p| 0.5 * p * p + 1.0 - q.cos(), |q, p| (q.sin(), p)).with_splitting(Splitting {
        kinetic: 1.0,
        potential_scale: 1.0,
        potential: Some(potential),
    });
    IntegrableSystem::new("pendulum", ConfigurationSpace::circle(), vec![Arc::new(h)], vec![], Some(vec![2.0]))
        .expect("valid system")
        .named(&["H"])
        .with_velocity(vec![Arc::new(|q, v| {
            let (q, v) = circle_v(q, v);
            0.5 * v * v + 1.0 - q.cos()
        })])
}

fn height_potential() -> Arc<dyn ScalarField> {
    Arc::new(FnScalar::sphere(|q| q.z, |_| Vec3::z()))
}

fn spherical_pendulum_h() -> SphereField {
    SphereField::new(|q, p| 0.5 * p.norm_squared() + q.z, |_, p| (Vec3::z(), *p)).with_splitting(Splitting {
        kinetic: 1.0,
        potential_scale: 1.0,
        potential: Some(height_potential()),
    })
}

/// `H = ½|p|² + q₃`, `G = q₁p₂ − q₂p₁` on T*S².
pub fn spherical_pendulum() -> IntegrableSystem {
    let g = SphereField::new(
        |q, p| q.x * p.y - q.y * p.x,
        |q, p| (Vec3::new(p.y, -p.x, 0.0), Vec3::new(-q.y, q.x, 0.0)),
    );
    IntegrableSystem::new(
        "spherical_pendulum",
        ConfigurationSpace::sphere2(),
        vec![Arc::new(spherical_pendulum_h()), Arc::new(g)],
        vec![],
        Some(vec![1.0, 0.0]),
    )
    .expect("valid system")
    .named(&["H", "G"])
    .with_velocity(vec![
        Arc::new(|q, v| {
            let (q, v) = sphere_v(q, v);
            0.5 * v.norm_squared() + q.z
        }),
        Arc::new(|q, v| {
            let (q, v) = sphere_v(q, v);
            q.x * v.y - q.y * v.x
        }),
    ])
}

/// Neumann problem with `0 < a₁ < a₂ < a₃`.
pub fn neumann(a1: f64, a2: f64, a3: f64) -> Result<IntegrableSystem> {
    if !(0.0 < a1 && a1 < a2 && a2 < a3 && a3.is_finite()) {
        return Err(Error::Parameter(format!("neumann needs 0 < a1 < a2 < a3, got ({a1}, {a2}, {a3})")));
    }
    let a = Vec3::new(a1, a2, a3);
    let a_sq = a.component_mul(&a);
    let potential: Arc<dyn ScalarField> = Arc::new(FnScalar::sphere(
        move |q| 0.5 * a.dot(&q.component_mul(q)),
        move |q| a.component_mul(q),
    ));
    let h = SphereField::new(
        move |q, p| 0.5 * p.norm_squared() + 0.5 * a.dot(&q.component_mul(q)),
        move |q, p| (a.component_mul(q), *p),
    )
    .with_splitting(Splitting {
        kinetic: 1.0,
        potential_scale: 1.0,
        potential: Some(potential),
    });
    let g = SphereField::new(
        move |q, p| {
            let aq2 = a.dot(&q.component_mul(q));
            0.5 * a.dot(&p.component_mul(p)) + 0.5 * p.norm_squared() * aq2 + 0.5 * a_sq.dot(&q.component_mul(q))
        },
        move |q, p| {
            let aq2 = a.dot(&q.component_mul(q));
            (
                a.component_mul(q) * p.norm_squared() + a_sq.component_mul(q),
                a.component_mul(p) + p * aq2,
            )
        },
    );
    let gv: VelocityFn = Arc::new(move |q, v| {
        let (q, v) = sphere_v(q, v);
        let aq2 = a.dot(&q.component_mul(&q));
        0.5 * a.dot(&v.component_mul(&v)) + 0.5 * v.norm_squared() * aq2 + 0.5 * a_sq.dot(&q.component_mul(&q))
    });
    Ok(IntegrableSystem::new(
        "neumann",
        ConfigurationSpace::sphere2(),
        vec![Arc::new(h), Arc::new(g)],
        vec![param("a1", a1), param("a2", a2), param("a3", a3)],
        Some(vec![a3 / 2.0, a3 * a3 / 2.0]),
    )?
    .named(&["H", "G"])
    .with_velocity(vec![
        Arc::new(move |q, v| {
            let (q, v) = sphere_v(q, v);
            0.5 * v.norm_squared() + 0.5 * a.dot(&q.component_mul(&q))
        }),
        gv,
    ]))
}

/// A potential on S² ⊂ ℝ³ given with its ambient gradient.
#[derive(Clone)]
pub struct Potential {
    pub f: Arc<dyn Fn(&Vec3) -> f64 + Send + Sync>,
    pub grad: Arc<dyn Fn(&Vec3) -> Vec3 + Send + Sync>,
}

impl Potential {
    pub fn new(
        f: impl Fn(&Vec3) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&Vec3) -> Vec3 + Send + Sync + 'static,
    ) -> Self {
        Self { f: Arc::new(f), grad: Arc::new(grad) }
    }

    pub fn zero() -> Self {
        Self::new(|_| 0.0, |_| Vec3::zeros())
    }

    /// Numerical maximum over the unit sphere.
    pub fn max_on_sphere(&self) -> f64 {
        let field = FnScalar::sphere(
            {
                let f = self.f.clone();
                move |x| f(x)
            },
            {
                let g = self.grad.clone();
                move |x| g(x)
            },
        );
        critical::maximize_scalar(&field).0
    }
}

struct TopParts {
    space: ConfigurationSpace,
    h: TopField,
    lz: TopField,
    hv: VelocityFn,
    lzv: VelocityFn,
}

fn top_parts(i: Vec3, f: &Potential) -> Result<TopParts> {
    let space = ConfigurationSpace::rotation_group(i.x, i.y, i.z)?;
    let (fv, fg) = (f.f.clone(), f.grad.clone());
    let (fv2, fg2) = (f.f.clone(), f.grad.clone());
    let pot: Arc<dyn ScalarField> = Arc::new(FnScalar::vertical(space, move |g| fv2(g), move |g| fg2(g)));
    let h = TopField::new(
        space,
        {
            let fv = fv.clone();
            move |l, g| 0.5 * l.component_mul(l).component_div(&i).sum() + fv(g)
        },
        move |l, g| (l.component_div(&i), fg(g)),
    )
    .with_splitting(Splitting {
        kinetic: 1.0,
        potential_scale: 1.0,
        potential: Some(pot),
    });
    let lz = TopField::new(space, |l, g| l.dot(g), |l, g| (*g, *l));
    let hv: VelocityFn = Arc::new(move |q, v| {
        let (n, w) = body_v(q, v);
        0.5 * i.dot(&w.component_mul(&w)) + fv(&n)
    });
    let lzv: VelocityFn = Arc::new(move |q, v| {
        let (n, w) = body_v(q, v);
        i.component_mul(&n).dot(&w)
    });
    Ok(TopParts { space, h, lz, hv, lzv })
}

/// Heavy top `H = Σℓᵢ²/(2Iᵢ) + f(γ)` with `L_z = ℓ·γ`.
pub fn top(i1: f64, i2: f64, i3: f64, f: Potential) -> Result<IntegrableSystem> {
    let t = top_parts(Vec3::new(i1, i2, i3), &f)?;
    let y0 = vec![f.max_on_sphere(), 0.0];
    Ok(IntegrableSystem::new(
        "top",
        t.space,
        vec![Arc::new(t.h), Arc::new(t.lz)],
        vec![param("I1", i1), param("I2", i2), param("I3", i3)],
        Some(y0),
    )?
    .named(&["H", "Lz"])
    .with_velocity(vec![t.hv, t.lzv]))
}

/// Lagrange top: `I₁ = I₂`, `f = c·γ₃`, third integral `ℓ₃`.
pub fn lagrange(i1: f64, i3: f64, c: f64) -> Result<IntegrableSystem> {
    let t = top_parts(Vec3::new(i1, i1, i3), &Potential::new(move |g| c * g.z, move |_| Vec3::new(0.0, 0.0, c)))?;
    let g = TopField::new(t.space, |l, _| l.z, |_, _| (Vec3::z(), Vec3::zeros()));
    Ok(IntegrableSystem::new(
        "lagrange",
        t.space,
        vec![Arc::new(t.h), Arc::new(t.lz), Arc::new(g)],
        vec![param("I1", i1), param("I3", i3), param("c", c)],
        Some(vec![c.abs(), 0.0, 0.0]),
    )?
    .named(&["H", "Lz", "G"])
    .with_velocity(vec![t.hv, t.lzv, Arc::new(move |q, v| i3 * body_v(q, v).1.z)]))
}

/// Kovalevskaya top: `I₁ = I₂ = 2I₃`, `f = a·γ₁`.
pub fn kovalevskaya(i3: f64, a: f64) -> Result<IntegrableSystem> {
    let i1 = 2.0 * i3;
    let inertia = Vec3::new(i1, i1, i3);
    let t = top_parts(inertia, &Potential::new(move |g| a * g.x, move |_| Vec3::new(a, 0.0, 0.0)))?;
    let k = 2.0 * a / i1;
    let uw = move |w: &Vec3, g: &Vec3| (w.x * w.x - w.y * w.y - k * g.x, 2.0 * w.x * w.y - k * g.y);
    let g = TopField::new(
        t.space,
        move |l, g| {
            let (u, v) = uw(&l.component_div(&inertia), g);
            u * u + v * v
        },
        move |l, g| {
            let w = l.component_div(&inertia);
            let (u, v) = uw(&w, g);
            let dl = Vec3::new(
                (4.0 * u * w.x + 4.0 * v * w.y) / i1,
                (-4.0 * u * w.y + 4.0 * v * w.x) / i1,
                0.0,
            );
            (dl, Vec3::new(-2.0 * k * u, -2.0 * k * v, 0.0))
        },
    );
    let gv: VelocityFn = Arc::new(move |q, v| {
        let (n, w) = body_v(q, v);
        let (u, v) = uw(&w, &n);
        u * u + v * v
    });
    Ok(IntegrableSystem::new(
        "kovalevskaya",
        t.space,
        vec![Arc::new(t.h), Arc::new(t.lz), Arc::new(g)],
        vec![param("I3", i3), param("a", a)],
        Some(vec![a.abs(), 0.0, 4.0 * a * a / (i1 * i1)]),
    )?
    .named(&["H", "Lz", "G"])
    .with_velocity(vec![t.hv, t.lzv, gv]))
}

/// Clebsch top with `0 < I₁ < I₂ < I₃`.
pub fn clebsch(i1: f64, i2: f64, i3: f64) -> Result<IntegrableSystem> {
    if !(0.0 < i1 && i1 < i2 && i2 < i3 && i3.is_finite()) {
        return Err(Error::Parameter(format!("clebsch needs 0 < I1 < I2 < I3, got ({i1}, {i2}, {i3})")));
    }
    let inertia = Vec3::new(i1, i2, i3);
    let d = 2.0 * i1 * i2 * i3;
    let t = top_parts(
        inertia,
        &Potential::new(
            move |g| inertia.dot(&g.component_mul(g)) / d,
            move |g| 2.0 * inertia.component_mul(g) / d,
        ),
    )?;
    let w = Vec3::new(i2 * i3, i3 * i1, i1 * i2);
    let g = TopField::new(
        t.space,
        move |l, g| 0.5 * l.norm_squared() - w.dot(&g.component_mul(g)) / d,
        move |l, g| (*l, -2.0 * w.component_mul(g) / d),
    );
    let gv: VelocityFn = Arc::new(move |q, v| {
        let (n, om) = body_v(q, v);
        let l = inertia.component_mul(&om);
        0.5 * l.norm_squared() - w.dot(&n.component_mul(&n)) / d
    });
    Ok(IntegrableSystem::new(
        "clebsch",
        t.space,
        vec![Arc::new(t.h), Arc::new(t.lz), Arc::new(g)],
        vec![param("I1", i1), param("I2", i2), param("I3", i3)],
        Some(vec![1.0 / (2.0 * i1 * i2), 0.0, -1.0 / (2.0 * i3)]),
    )?
    .named(&["H", "Lz", "G"])
    .with_velocity(vec![t.hv, t.lzv, gv]))
}

/// Free rigid body (`f = 0`) with third integral `|ℓ|²`.
pub fn euler(i1: f64, i2: f64, i3: f64) -> Result<IntegrableSystem> {
    let inertia = Vec3::new(i1, i2, i3);
    let t = top_parts(inertia, &Potential::zero())?;
    let g = TopField::new(t.space, |l, _| l.norm_squared(), |l, _| (2.0 * l, Vec3::zeros()));
    let gv: VelocityFn = Arc::new(move |q, v| inertia.component_mul(&body_v(q, v).1).norm_squared());
    Ok(IntegrableSystem::new(
        "euler",
        t.space,
        vec![Arc::new(t.h), Arc::new(t.lz), Arc::new(g)],
        vec![param("I1", i1), param("I2", i2), param("I3", i3)],
        Some(vec![0.0, 0.0, 0.0]),
    )?
    .named(&["H", "Lz", "G"])
    .with_velocity(vec![t.hv, t.lzv, gv]))
}

/// Radial kinetic profile `ρ` of `H = ρ(‖p‖²_g) + U(q)`.
#[derive(Clone)]
pub struct Rho {
    pub f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub df: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// Location of the minimum on `[0, ∞)`.
    pub argmin: f64,
}

impl Rho {
    /// The default profile `x/2`.
    pub fn half() -> Self {
        Self { f: Arc::new(|x| 0.5 * x), df: Arc::new(|_| 0.5), argmin: 0.0 }
    }

    /// `(x − r²)²`, minimal on the sphere bundle of radius `r`.
    pub fn well(r: f64) -> Self {
        let r2 = r * r;
        Self {
            f: Arc::new(move |x| (x - r2).powi(2)),
            df: Arc::new(move |x| 2.0 * (x - r2)),
            argmin: r2,
        }
    }

    /// Wraps a profile after a finite-window coercivity test on `[0, 10⁴]`
    /// and a numerical location of its minimum.
    pub fn new(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let xs: Vec<f64> = (0..=4000).map(|i| 1e4 * (i as f64 / 4000.0).powi(2)).collect();
        let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("rho is not finite on [0, 1e4]".into()));
        }
        let (imin, vmin) = vals
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |a, (i, v)| if v < a.1 { (i, v) } else { a });
        let tail_increasing = vals[imin..].windows(2).all(|w| w[1] >= w[0]);
        let last = *vals.last().expect("nonempty window");
        if imin == vals.len() - 1 || !tail_increasing || last < vmin + 1.0 {
            return Err(Error::Parameter("rho fails the coercivity test on [0, 1e4]".into()));
        }
        let lo = if imin == 0 { 0.0 } else { xs[imin - 1] };
        let argmin = golden_min(&f, lo, xs[imin + 1]);
        Ok(Self { f: Arc::new(f), df: Arc::new(df), argmin })
    }

    pub fn min_value(&self) -> f64 {
        (self.f)(self.argmin)
    }
}

fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) <= f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let m = 0.5 * (a + b);
    if f(0.0) <= f(m) && a <= 1e-12 {
        0.0
    } else {
        m
    }
}

/// `H = ρ(‖p‖²_g) + U(q)` with `ρ(x) = x/2` by default.
pub fn convex(space: ConfigurationSpace, u: Arc<dyn ScalarField>, rho: Option<Rho>) -> Result<IntegrableSystem> {
    if u.space().kind() != space.kind() {
        return Err(Error::Usage("potential lives on a different space".into()));
    }
    let default = rho.is_none();
    let rho = rho.unwrap_or_else(Rho::half);
    let (umax, _) = critical::maximize_scalar(u.as_ref());
    let y0 = umax + rho.min_value();
    let splitting = default.then(|| Splitting {
        kinetic: 1.0,
        potential_scale: 1.0,
        potential: Some(u.clone()),
    });
    let h: Arc<dyn PhaseField> = Arc::new(ConvexField { space, u, rho, splitting });
    Ok(IntegrableSystem::new("convex", space, vec![h], vec![], Some(vec![y0]))?.named(&["H"]))
}

struct ConvexField {
    space: ConfigurationSpace,
    u: Arc<dyn ScalarField>,
    rho: Rho,
    splitting: Option<Splitting>,
}

impl PhaseField for ConvexField {
    fn space(&self) -> &ConfigurationSpace {
        &self.space
    }
    fn value(&self, x: &PhasePoint) -> f64 {
        let p = x.momentum();
        let n2 = match (&p, self.space.inertia()) {
            (FiberVec::Sphere(v), _) => v.norm_squared(),
            _ => self.space.dual_norm(&p).powi(2),
        };
        (self.rho.f)(n2) + self.u.value(&x.config())
    }
    fn gradient(&self, x: &PhasePoint) -> crate::brackets::PhaseGradient {
        use crate::brackets::PhaseGradient as G;
        let du = self.u.differential(&x.config());
        match (x, du) {
            (PhasePoint::Circle { p, .. }, FiberVec::Circle(d)) => G::Circle { dq: d, dp: 2.0 * (self.rho.df)(p * p) * p },
            (PhasePoint::Sphere { p, .. }, FiberVec::Sphere(d)) => G::Sphere { dq: d, dp: p * (2.0 * (self.rho.df)(p.norm_squared())) },
            (PhasePoint::Rotation { l, .. }, FiberVec::Body(d)) => {
                let i = self.space.inertia().expect("rotation inertia");
                let n2 = l.component_mul(l).component_div(&i).sum();
                G::Rotation { dl: l.component_div(&i) * (2.0 * (self.rho.df)(n2)), body: d }
            }
            _ => panic!("convex field at {x:?}"),
        }
    }
    fn splitting(&self) -> Option<Splitting> {
        self.splitting.clone()
    }
}

/// Spherical-pendulum energy paired with `q₃p₁`, which does not commute
/// with it.
pub fn noncommuting_control() -> IntegrableSystem {
    let g = SphereField::new(|q, p| q.z * p.x, |q, p| (Vec3::new(0.0, 0.0, p.x), Vec3::new(q.z, 0.0, 0.0)));
    IntegrableSystem::new(
        "noncommuting_control",
        ConfigurationSpace::sphere2(),
        vec![Arc::new(spherical_pendulum_h()), Arc::new(g)],
        vec![],
        None,
    )
    .expect("valid system")
    .named(&["H", "q3p1"])
}

/// Static description of a catalog family.
#[derive(Clone, Copy, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub space: SpaceKind,
    pub params: &'static [(&'static str, f64)],
    pub constraint: &'static str,
    pub components: &'static str,
    pub y0_formula: &'static str,
}

pub const CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        name: "pendulum",
        space: SpaceKind::Circle,
        params: &[],
        constraint: "none",
        components: "H = p^2/2 + 1 - cos q",
        y0_formula: "(2)",
    },
    CatalogEntry {
        name: "spherical_pendulum",
        space: SpaceKind::Sphere2,
        params: &[],
        constraint: "none",
        components: "H = |p|^2/2 + q3, G = q1 p2 - q2 p1",
        y0_formula: "(1, 0)",
    },
    CatalogEntry {
        name: "neumann",
        space: SpaceKind::Sphere2,
        params: &[("a1", 1.0), ("a2", 2.0), ("a3", 3.0)],
        constraint: "0 < a1 < a2 < a3",
        components: "H = |p|^2/2 + sum a_i q_i^2 / 2, G",
        y0_formula: "(a3/2, a3^2/2)",
    },
    CatalogEntry {
        name: "lagrange",
        space: SpaceKind::RotationGroup,
        params: &[("I1", 2.0), ("I3", 1.0), ("c", 2.0)],
        constraint: "I1, I3 > 0; I2 = I1; f = c*gamma3",
        components: "H, Lz = l.gamma, G = l3",
        y0_formula: "(|c|, 0, 0)",
    },
    CatalogEntry {
        name: "kovalevskaya",
        space: SpaceKind::RotationGroup,
        params: &[("I3", 1.0), ("a", 1.0)],
        constraint: "I3 > 0; I1 = I2 = 2*I3; f = a*gamma1",
        components: "H, Lz = l.gamma, G",
        y0_formula: "(|a|, 0, 4a^2/I1^2)",
    },
    CatalogEntry {
        name: "clebsch",
        space: SpaceKind::RotationGroup,
        params: &[("I1", 1.0), ("I2", 2.0), ("I3", 3.0)],
        constraint: "0 < I1 < I2 < I3",
        components: "H, Lz = l.gamma, G",
        y0_formula: "(1/(2 I1 I2), 0, -1/(2 I3))",
    },
    CatalogEntry {
        name: "euler",
        space: SpaceKind::RotationGroup,
        params: &[("I1", 1.0), ("I2", 2.0), ("I3", 3.0)],
        constraint: "I1, I2, I3 > 0; f = 0",
        components: "H, Lz = l.gamma, G = |l|^2",
        y0_formula: "(0, 0, 0)",
    },
    CatalogEntry {
        name: "convex_sphere",
        space: SpaceKind::Sphere2,
        params: &[("u1", 0.0), ("u2", 0.0), ("u3", 1.0)],
        constraint: "optional r > 0 selects rho(x) = (x - r^2)^2",
        components: "H = rho(|p|^2) + u.q",
        y0_formula: "(|u| + rho(min))",
    },
];

/// Builds a catalog system by name; missing parameters take catalog
/// defaults, unknown ones are rejected. `noncommuting_control` is accepted
/// without parameters.
pub fn from_name(name: &str, params: &[(String, f64)]) -> Result<IntegrableSystem> {
    if name == "noncommuting_control" {
        return match params.first() {
            Some((k, _)) => Err(Error::Usage(format!("system '{name}' has no parameter '{k}'"))),
            None => Ok(noncommuting_control()),
        };
    }
    let entry = CATALOG
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::Usage(format!("unknown system '{name}'")))?;
    let allows_r = name == "convex_sphere";
    for (k, _) in params {
        if !entry.params.iter().any(|(n, _)| n == k) && !(allows_r && k == "r") {
            return Err(Error::Usage(format!("system '{name}' has no parameter '{k}'")));
        }
    }
    let get = |key: &str| -> f64 {
        params
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| *v)
            .or_else(|| entry.params.iter().find(|(k, _)| *k == key).map(|(_, v)| *v))
            .unwrap_or(f64::NAN)
    };
    match name {
        "pendulum" => Ok(pendulum()),
        "spherical_pendulum" => Ok(spherical_pendulum()),
        "neumann" => neumann(get("a1"), get("a2"), get("a3")),
        "lagrange" => lagrange(get("I1"), get("I3"), get("c")),
        "kovalevskaya" => kovalevskaya(get("I3"), get("a")),
        "clebsch" => clebsch(get("I1"), get("I2"), get("I3")),
        "euler" => euler(get("I1"), get("I2"), get("I3")),
        "convex_sphere" => {
            let u = Vec3::new(get("u1"), get("u2"), get("u3"));
            let pot: Arc<dyn ScalarField> = Arc::new(FnScalar::sphere(move |q| u.dot(q), move |_| u));
            let rho = params.iter().find(|(k, _)| k == "r").map(|(_, r)| *r);
            let rho = match rho {
                Some(r) if r > 0.0 && r.is_finite() => Some(Rho::well(r)),
                Some(r) => return Err(Error::Parameter(format!("r must be positive, got {r}"))),
                None => None,
            };
            let mut sys = convex(ConfigurationSpace::sphere2(), pot, rho)?;
            sys.name = "convex_sphere".into();
            sys.params = params.to_vec();
            Ok(sys)
        }
        _ => unreachable!("catalog names are matched above"),
    }
}

/// Every catalog system at its default parameters, excluding the convex family.
pub fn catalog() -> Vec<IntegrableSystem> {
    CATALOG
        .iter()
        .filter(|e| e.name != "convex_sphere")
        .map(|e| from_name(e.name, &[]).expect("catalog defaults are valid"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brackets::verify_commutation;
    use crate::geometry::{legendre, rotation_with_gamma, Mat3};
    use crate::sampling;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12
    }

    fn sphere(q: [f64; 3], p: [f64; 3]) -> PhasePoint {
        PhasePoint::Sphere { q: Vec3::from(q), p: Vec3::from(p) }
    }

    fn rot(l: [f64; 3], g: Vec3) -> PhasePoint {
        PhasePoint::Rotation { rot: rotation_with_gamma(&g), l: Vec3::from(l) }
    }

    #[test]
    fn pendulum_values() {
        let s = pendulum();
        let h = |q, p| s.eval(&PhasePoint::Circle { q, p })[0];
        assert!(close(h(std::f64::consts::PI, 0.0), 2.0));
        assert_eq!(h(0.0, 0.0), 0.0);
        assert_eq!(h(0.0, 2.0), 2.0);
        assert_eq!(s.predicted_y0(), Some(&[2.0][..]));
    }

    #[test]
    fn spherical_pendulum_values() {
        let s = spherical_pendulum();
        assert_eq!(s.eval(&sphere([0.0, 0.0, 1.0], [0.0; 3])), vec![1.0, 0.0]);
        assert_eq!(s.eval(&sphere([1.0, 0.0, 0.0], [0.0, 1.0, 0.0])), vec![0.5, 1.0]);
        for x in sampling::phase_points(s.space(), 50, 5.0, 2) {
            assert_eq!(s.eval(&x.with_momentum(FiberVec::Sphere(Vec3::zeros())))[1], 0.0);
        }
    }

    #[test]
    fn neumann_values_and_ordering() {
        let s = neumann(1.0, 2.0, 3.0).unwrap();
        assert_eq!(s.eval(&sphere([0.0, 0.0, 1.0], [0.0; 3])), vec![1.5, 4.5]);
        assert_eq!(s.eval(&sphere([0.0, 0.0, -1.0], [0.0; 3])), vec![1.5, 4.5]);
        assert_eq!(s.eval(&sphere([1.0, 0.0, 0.0], [0.0; 3]))[0], 0.5);
        assert!(matches!(neumann(1.0, 3.0, 2.0), Err(Error::Parameter(_))));
        assert!(matches!(neumann(0.0, 1.0, 2.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn top_values() {
        let free = top(1.0, 2.0, 3.0, Potential::zero()).unwrap();
        assert_eq!(free.eval(&rot([0.0; 3], Vec3::new(0.6, 0.0, 0.8)))[0], 0.0);
        assert!(close(free.eval(&rot([0.0, 0.0, 3.0], Vec3::z()))[1], 3.0));
        let heavy = top(1.0, 2.0, 3.0, Potential::new(|g| g.z, |_| Vec3::z())).unwrap();
        assert!(close(heavy.eval(&rot([0.0; 3], Vec3::z()))[0], 1.0));
        assert!((heavy.predicted_y0().unwrap()[0] - 1.0).abs() < 1e-10);
        assert!(top(1.0, -2.0, 3.0, Potential::zero()).is_err());
    }

    #[test]
    fn lagrange_values() {
        assert_eq!(lagrange(2.0, 1.0, 2.0).unwrap().predicted_y0(), Some(&[2.0, 0.0, 0.0][..]));
        assert_eq!(lagrange(2.0, 1.0, 0.0).unwrap().predicted_y0(), Some(&[0.0, 0.0, 0.0][..]));
        let s = lagrange(2.0, 1.0, 2.0).unwrap();
        assert_eq!(s.eval(&rot([1.0, 2.0, 5.0], Vec3::z()))[2], 5.0);
        assert!(lagrange(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn kovalevskaya_values() {
        let s = kovalevskaya(1.0, 1.0).unwrap();
        assert_eq!(s.predicted_y0(), Some(&[1.0, 0.0, 1.0][..]));
        assert!(close(s.eval(&rot([0.0; 3], Vec3::x()))[2], 1.0));
        assert_eq!(kovalevskaya(1.0, 0.0).unwrap().predicted_y0(), Some(&[0.0, 0.0, 0.0][..]));
        assert!(kovalevskaya(-1.0, 1.0).is_err());
    }

    #[test]
    fn clebsch_values() {
        let s = clebsch(1.0, 2.0, 3.0).unwrap();
        let y0 = s.predicted_y0().unwrap();
        assert_eq!(y0[0], 0.25);
        assert!(close(y0[2], -1.0 / 6.0));
        assert!(close(s.eval(&rot([0.0; 3], Vec3::z()))[2], -1.0 / 6.0));
        assert!(clebsch(2.0, 1.0, 3.0).is_err());
    }

    #[test]
    fn convex_predicted_values() {
        let s2 = ConfigurationSpace::sphere2();
        let zero: Arc<dyn ScalarField> = Arc::new(FnScalar::constant(s2, 0.0));
        assert!(convex(s2, zero.clone(), None).unwrap().predicted_y0().unwrap()[0].abs() < 1e-12);
        let height: Arc<dyn ScalarField> = Arc::new(FnScalar::sphere(|q| q.z, |_| Vec3::z()));
        assert!((convex(s2, height, None).unwrap().predicted_y0().unwrap()[0] - 1.0).abs() < 1e-10);
        let well = Rho::new(|x| (x - 1.0).powi(2), |x| 2.0 * (x - 1.0)).unwrap();
        assert!((well.argmin - 1.0).abs() < 1e-6);
        assert!(convex(s2, zero, Some(well)).unwrap().predicted_y0().unwrap()[0].abs() < 1e-10);
    }

    #[test]
    fn non_coercive_rho_is_rejected() {
        assert!(Rho::new(|x| -x, |_| -1.0).is_err());
        assert!(Rho::new(|x| (-x).exp(), |x| -(-x).exp()).is_err());
        assert!(Rho::new(|x| x.sin(), |x| x.cos()).is_err());
    }

    #[test]
    fn catalog_commutes() {
        for s in catalog() {
            let r = verify_commutation(&s, 1000, 17).unwrap();
            assert!(r.max_abs <= 1e-8, "{}: {}", s.name(), r.max_abs);
        }
    }

    #[test]
    fn velocity_and_momentum_pictures_agree() {
        for s in catalog() {
            let formulas = s.velocity_formulas();
            assert_eq!(formulas.len(), s.k(), "{}", s.name());
            for x in sampling::phase_points(s.space(), 200, 3.0, 8) {
                let q = x.config();
                // Use the momentum sample as a velocity and map it forward.
                let v = x.momentum();
                let p = legendre(s.space(), &q, &v).unwrap();
                let y = PhasePoint::from_parts(q, p);
                for (c, f) in s.components().iter().zip(formulas) {
                    let (a, b) = (f(&q, &v), c.value(&y));
                    assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{}: {a} vs {b}", s.name());
                }
            }
        }
    }

    #[test]
    fn vertical_image_is_unit() {
        let space = ConfigurationSpace::rotation_group(1.0, 1.0, 1.0).unwrap();
        let mut r = sampling::rng(4);
        for _ in 0..10_000 {
            let Config::Rotation(m) = sampling::uniform_config(&space, &mut r) else { unreachable!() };
            let g = crate::geometry::vertical(&m);
            assert!((g.norm_squared() - 1.0).abs() <= 1e-12);
        }
        let _ = Mat3::identity();
    }

    #[test]
    fn from_name_validates_parameters() {
        assert!(matches!(from_name("nope", &[]), Err(Error::Usage(_))));
        assert!(matches!(from_name("neumann", &[("b".into(), 1.0)]), Err(Error::Usage(_))));
        let s = from_name("neumann", &[("a3".into(), 5.0)]).unwrap();
        assert_eq!(s.predicted_y0().unwrap()[0], 2.5);
        assert!(from_name("convex_sphere", &[("r".into(), 1.0)]).is_ok());
    }
}
