//! Hamiltonian vector fields and structure-preserving flows.
//!
//! Fields follow `Ġ = {G, F}`: on T*S¹ this is `(∂_pF, −∂_qF)`; on T*S² the
//! Dirac field tangent to the constraint set; on T*SO(3)
//! `ℓ̇ = ℓ×Ω − δF`, `Q̇ = QΩ̂` with `Ω = ∇_ℓF`, hence `γ̇ = γ×Ω`.

use serde::Serialize;

use crate::brackets::{PhaseField, PhaseGradient, Splitting};
use crate::error::{Error, Result};
use crate::geometry::{cayley, hat, Mat3, PhasePoint, Vec3};
use crate::systems::IntegrableSystem;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Fixed-step symmetric second-order scheme.
    Symmetric,
    /// Dormand–Prince 5(4) with projection after every accepted step.
    Adaptive { rtol: f64, atol: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlowSpec {
    pub t_end: f64,
    /// Output spacing; the fixed-step method also steps with it.
    pub h: f64,
    pub method: Method,
}

impl FlowSpec {
    pub fn symmetric(t_end: f64, h: f64) -> Self {
        Self { t_end, h, method: Method::Symmetric }
    }

    pub fn adaptive(t_end: f64, h: f64) -> Self {
        Self { t_end, h, method: Method::Adaptive { rtol: 1e-11, atol: 1e-12 } }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Parameter(format!("flow time must be positive, got {}", self.t_end)));
        }
        if !(self.h > 0.0 && self.h <= self.t_end) {
            return Err(Error::Parameter(format!("step {} outside (0, T]", self.h)));
        }
        Ok(())
    }

    /// Number of output intervals `⌈T/h⌉`.
    pub fn steps(&self) -> usize {
        ((self.t_end / self.h) * (1.0 - 1e-12)).ceil().max(1.0) as usize
    }
}

/// Tangent vector to T*N.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PhaseTangent {
    Circle { dq: f64, dp: f64 },
    Sphere { dq: Vec3, dp: Vec3 },
    /// `Q̇ = Q·hat(omega)`.
    Rotation { omega: Vec3, dl: Vec3 },
}

pub fn hamiltonian_vector_field(f: &dyn PhaseField, x: &PhasePoint) -> PhaseTangent {
    tangent_from_gradient(x, &f.gradient(x))
}

fn tangent_from_gradient(x: &PhasePoint, g: &PhaseGradient) -> PhaseTangent {
    match (x, g) {
        (PhasePoint::Circle { .. }, PhaseGradient::Circle { dq, dp }) => PhaseTangent::Circle { dq: *dp, dp: -dq },
        (PhasePoint::Sphere { q, p }, PhaseGradient::Sphere { dq, dp }) => {
            let qp = q.dot(dp);
            PhaseTangent::Sphere {
                dq: dp - q * qp,
                dp: -dq + q * (q.dot(dq) - p.dot(dp)) + p * qp,
            }
        }
        (PhasePoint::Rotation { l, .. }, PhaseGradient::Rotation { dl, body }) => {
            PhaseTangent::Rotation { omega: *dl, dl: l.cross(dl) - body }
        }
        _ => panic!("vector field: gradient kind does not match {x:?}"),
    }
}

/// Trajectory sampled at `t_k = k·T/N`, `N = ⌈T/h⌉`.
pub fn flow(f: &dyn PhaseField, x0: &PhasePoint, spec: &FlowSpec) -> Result<Vec<PhasePoint>> {
    spec.validate()?;
    if f.space().kind() != x0.kind() {
        return Err(Error::Usage("flow: field and initial point live on different spaces".into()));
    }
    let n = spec.steps();
    let dt = spec.t_end / n as f64;
    let mut out = Vec::with_capacity(n + 1);
    out.push(*x0);
    let mut x = *x0;
    match spec.method {
        Method::Symmetric => {
            let split = f.splitting();
            for k in 0..n {
                x = symmetric_step(f, split.as_ref(), &x, dt).map_err(|message| Error::Integration {
                    message,
                    time: k as f64 * dt,
                    last_good: Box::new(x),
                })?;
                out.push(x);
            }
        }
        Method::Adaptive { rtol, atol } => {
            let mut stepper = Dopri::new(f, rtol, atol, dt);
            for k in 0..n {
                x = stepper.advance(&x, dt).map_err(|message| Error::Integration {
                    message,
                    time: k as f64 * dt,
                    last_good: Box::new(x),
                })?;
                out.push(x);
            }
        }
    }
    Ok(out)
}

fn symmetric_step(
    f: &dyn PhaseField,
    split: Option<&Splitting>,
    x: &PhasePoint,
    h: f64,
) -> std::result::Result<PhasePoint, String> {
    match (x, split) {
        (PhasePoint::Circle { .. }, Some(s)) | (PhasePoint::Sphere { .. }, Some(s)) => Ok(strang(s, x, h)),
        (PhasePoint::Rotation { .. }, _) if f.is_reduced() => reduced_midpoint(f, x, h),
        (PhasePoint::Rotation { .. }, _) => rotation_midpoint(f, x, h),
        _ => ambient_midpoint(f, x, h),
    }
}

fn kick(s: &Splitting, x: &PhasePoint, tau: f64) -> PhasePoint {
    match &s.potential {
        None => *x,
        Some(v) => {
            let d = v.differential(&x.config());
            x.with_momentum(x.momentum() - d * (tau * s.potential_scale))
        }
    }
}

fn drift(s: &Splitting, x: &PhasePoint, tau: f64) -> PhasePoint {
    let k = s.kinetic;
    match *x {
        PhasePoint::Circle { q, p } => PhasePoint::Circle { q: q + tau * k * p, p },
        PhasePoint::Sphere { q, p } => {
            let speed = p.norm();
            if speed == 0.0 || k == 0.0 {
                return *x;
            }
            let dir = p / speed;
            let (sn, cs) = (k * speed * tau).sin_cos();
            PhasePoint::Sphere { q: q * cs + dir * sn, p: (dir * cs - q * sn) * speed }.repaired()
        }
        PhasePoint::Rotation { .. } => unreachable!("rotation flows use the midpoint rule"),
    }
}

fn strang(s: &Splitting, x: &PhasePoint, h: f64) -> PhasePoint {
    let a = kick(s, x, 0.5 * h);
    let b = drift(s, &a, h);
    kick(s, &b, 0.5 * h).repaired()
}

const MIDPOINT_TOL: f64 = 1e-15;
const MIDPOINT_ITERS: usize = 100;

/// Implicit midpoint on `(ℓ, γ)`; `Q` follows by the Cayley update
/// `Q₁ = Q₀·cay(hΩ̂)`, which reproduces the midpoint `γ` exactly.
fn reduced_midpoint(f: &dyn PhaseField, x: &PhasePoint, h: f64) -> std::result::Result<PhasePoint, String> {
    let PhasePoint::Rotation { rot, l } = *x else { unreachable!() };
    let g0 = x.gamma().expect("rotation");
    let (mut l1, mut g1) = (l, g0);
    let mut omega = Vec3::zeros();
    for it in 0..MIDPOINT_ITERS {
        let (lm, gm) = ((l + l1) * 0.5, (g0 + g1) * 0.5);
        let (dl, dg) = f.reduced_gradient(&lm, &gm).ok_or("reduced gradient missing")?;
        omega = dl;
        let nl = l + (lm.cross(&dl) + gm.cross(&dg)) * h;
        let ng = g0 + gm.cross(&dl) * h;
        let change = (nl - l1).amax().max((ng - g1).amax());
        let scale = 1.0 + nl.amax();
        l1 = nl;
        g1 = ng;
        if change <= MIDPOINT_TOL * scale {
            break;
        }
        if it + 1 == MIDPOINT_ITERS && change > 1e-10 * scale {
            return Err(format!("midpoint iteration stalled (change {change:e})"));
        }
    }
    let q1 = newton_schulz(&(rot * cayley(&hat(&(omega * h)))));
    Ok(PhasePoint::Rotation { rot: q1, l: l1 })
}

/// Implicit midpoint for fields that depend on all of `Q`.
fn rotation_midpoint(f: &dyn PhaseField, x: &PhasePoint, h: f64) -> std::result::Result<PhasePoint, String> {
    let PhasePoint::Rotation { rot, l } = *x else { unreachable!() };
    let mut l1 = l;
    let mut omega = Vec3::zeros();
    for it in 0..MIDPOINT_ITERS {
        let lm = (l + l1) * 0.5;
        let qm = rot * cayley(&hat(&(omega * (0.5 * h))));
        let PhaseGradient::Rotation { dl, body } = f.gradient(&PhasePoint::Rotation { rot: qm, l: lm }) else {
            unreachable!()
        };
        let nl = l + (lm.cross(&dl) - body) * h;
        let change = (nl - l1).amax().max((dl - omega).amax() * h);
        l1 = nl;
        omega = dl;
        if change <= MIDPOINT_TOL * (1.0 + nl.amax()) {
            break;
        }
        if it + 1 == MIDPOINT_ITERS && change > 1e-10 {
            return Err(format!("midpoint iteration stalled (change {change:e})"));
        }
    }
    Ok(PhasePoint::Rotation { rot: newton_schulz(&(rot * cayley(&hat(&(omega * h))))), l: l1 })
}

/// Implicit midpoint in ambient coordinates followed by projection.
fn ambient_midpoint(f: &dyn PhaseField, x: &PhasePoint, h: f64) -> std::result::Result<PhasePoint, String> {
    let y0 = to_vec(x);
    let mut y1 = y0.clone();
    for it in 0..MIDPOINT_ITERS {
        let ym: Vec<f64> = y0.iter().zip(&y1).map(|(a, b)| 0.5 * (a + b)).collect();
        let k = ambient_rhs(f, x, &ym);
        let ny: Vec<f64> = y0.iter().zip(&k).map(|(a, d)| a + h * d).collect();
        let change = ny.iter().zip(&y1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let scale = 1.0 + ny.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        y1 = ny;
        if change <= MIDPOINT_TOL * scale {
            break;
        }
        if it + 1 == MIDPOINT_ITERS && change > 1e-10 * scale {
            return Err(format!("midpoint iteration stalled (change {change:e})"));
        }
    }
    Ok(from_vec(x, &y1).repaired())
}

/// One Newton–Schulz orthonormalization step.
fn newton_schulz(q: &Mat3) -> Mat3 {
    q * 1.5 - q * q.transpose() * q * 0.5
}

fn to_vec(x: &PhasePoint) -> Vec<f64> {
    match x {
        PhasePoint::Circle { q, p } => vec![*q, *p],
        PhasePoint::Sphere { q, p } => q.iter().chain(p.iter()).copied().collect(),
        PhasePoint::Rotation { rot, l } => rot.iter().chain(l.iter()).copied().collect(),
    }
}

fn from_vec(like: &PhasePoint, y: &[f64]) -> PhasePoint {
    match like {
        PhasePoint::Circle { .. } => PhasePoint::Circle { q: y[0], p: y[1] },
        PhasePoint::Sphere { .. } => PhasePoint::Sphere {
            q: Vec3::new(y[0], y[1], y[2]),
            p: Vec3::new(y[3], y[4], y[5]),
        },
        PhasePoint::Rotation { .. } => PhasePoint::Rotation {
            rot: Mat3::from_column_slice(&y[..9]),
            l: Vec3::new(y[9], y[10], y[11]),
        },
    }
}

fn ambient_rhs(f: &dyn PhaseField, like: &PhasePoint, y: &[f64]) -> Vec<f64> {
    let x = from_vec(like, y);
    match hamiltonian_vector_field(f, &x) {
        PhaseTangent::Circle { dq, dp } => vec![dq, dp],
        PhaseTangent::Sphere { dq, dp } => dq.iter().chain(dp.iter()).copied().collect(),
        PhaseTangent::Rotation { omega, dl } => {
            let PhasePoint::Rotation { rot, .. } = x else { unreachable!() };
            (rot * hat(&omega)).iter().chain(dl.iter()).copied().collect()
        }
    }
}

/// Dormand–Prince 5(4) stepper with constraint projection.
struct Dopri<'a> {
    f: &'a dyn PhaseField,
    rtol: f64,
    atol: f64,
    h: f64,
}

const MAX_SUBSTEPS: usize = 100_000;

impl<'a> Dopri<'a> {
    fn new(f: &'a dyn PhaseField, rtol: f64, atol: f64, h: f64) -> Self {
        Self { f, rtol, atol, h }
    }

    fn advance(&mut self, x: &PhasePoint, span: f64) -> std::result::Result<PhasePoint, String> {
        const A: [[f64; 6]; 7] = [
            [0.0; 6],
            [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
            [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
            [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
            [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
            [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
            [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
        ];
        const E: [f64; 7] = [
            71.0 / 57600.0,
            0.0,
            -71.0 / 16695.0,
            71.0 / 1920.0,
            -17253.0 / 339200.0,
            22.0 / 525.0,
            -1.0 / 40.0,
        ];
        let mut t = 0.0;
        let mut x = *x;
        let mut substeps = 0;
        while t < span * (1.0 - 1e-14) {
            substeps += 1;
            if substeps > MAX_SUBSTEPS {
                return Err("step rejection overflow".into());
            }
            let h = self.h.min(span - t);
            let y = to_vec(&x);
            let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
            k.push(ambient_rhs(self.f, &x, &y));
            for i in 1..7 {
                let yi: Vec<f64> = (0..y.len())
                    .map(|d| y[d] + h * (0..i).map(|j| A[i][j] * k[j][d]).sum::<f64>())
                    .collect();
                k.push(ambient_rhs(self.f, &x, &yi));
            }
            let y5: Vec<f64> = (0..y.len())
                .map(|d| y[d] + h * (0..6).map(|j| A[6][j] * k[j][d]).sum::<f64>())
                .collect();
            let err = (0..y.len())
                .map(|d| {
                    let e = h * (0..7).map(|j| E[j] * k[j][d]).sum::<f64>();
                    let sc = self.atol + self.rtol * y[d].abs().max(y5[d].abs());
                    (e / sc).powi(2)
                })
                .sum::<f64>()
                .sqrt()
                / (y.len() as f64).sqrt();
            if !err.is_finite() {
                return Err("non-finite state".into());
            }
            if err <= 1.0 {
                t += h;
                x = from_vec(&x, &y5).repaired();
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            self.h = (h * factor).max(1e-14 * span.max(1.0));
        }
        Ok(x)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConservationReport {
    pub component_names: Vec<String>,
    /// `max_t |Φⱼ(x_t) − Φⱼ(x₀)| / max(|Φⱼ(x₀)|, 1)`.
    pub drifts: Vec<f64>,
    /// Drifts of `|γ|²` and `ℓ·γ` on T*SO(3).
    pub casimir_drifts: Option<[f64; 2]>,
    pub max_residual: f64,
    pub steps: usize,
}

/// Relative drift with a unit floor on the denominator.
pub fn relative_drift(values: impl IntoIterator<Item = f64>, initial: f64) -> f64 {
    let denom = initial.abs().max(1.0);
    values.into_iter().map(|v| (v - initial).abs()).fold(0.0, f64::max) / denom
}

/// Flows under `Φ₁` and records the drift of every component.
pub fn conservation_report(
    system: &IntegrableSystem,
    x0: &PhasePoint,
    spec: &FlowSpec,
) -> Result<(ConservationReport, Vec<PhasePoint>)> {
    let traj = flow(system.hamiltonian().as_ref(), x0, spec)?;
    let drifts = system
        .components()
        .iter()
        .map(|c| relative_drift(traj.iter().map(|x| c.value(x)), c.value(x0)))
        .collect();
    let casimir_drifts = x0.gamma().map(|g0| {
        let l0 = match x0 {
            PhasePoint::Rotation { l, .. } => *l,
            _ => unreachable!(),
        };
        let parts: Vec<(Vec3, Vec3)> = traj
            .iter()
            .map(|x| match x {
                PhasePoint::Rotation { l, .. } => (*l, x.gamma().expect("rotation")),
                _ => unreachable!(),
            })
            .collect();
        [
            relative_drift(parts.iter().map(|(_, g)| g.norm_squared()), g0.norm_squared()),
            relative_drift(parts.iter().map(|(l, g)| l.dot(g)), l0.dot(&g0)),
        ]
    });
    let max_residual = traj.iter().map(PhasePoint::residual).fold(0.0, f64::max);
    Ok((
        ConservationReport {
            component_names: system.component_names().to_vec(),
            drifts,
            casimir_drifts,
            max_residual,
            steps: traj.len() - 1,
        },
        traj,
    ))
}

/// Final point of the flow of `f` for time `t` with step `h`.
pub fn flow_to(f: &dyn PhaseField, x0: &PhasePoint, t: f64, h: f64) -> Result<PhasePoint> {
    let traj = flow(f, x0, &FlowSpec::symmetric(t, h.min(t)))?;
    Ok(*traj.last().expect("trajectory has at least one point"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brackets::{Lifted, Scaled};
    use crate::geometry::{graph_shift, rotation_with_gamma, ConfigurationSpace, FnScalar, ScalarField};
    use crate::sampling;
    use crate::systems;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};
    use std::sync::Arc;

    #[test]
    fn pendulum_equilibria_have_zero_field() {
        let h = systems::pendulum();
        for q in [0.0, PI] {
            let PhaseTangent::Circle { dq, dp } =
                hamiltonian_vector_field(h.hamiltonian().as_ref(), &PhasePoint::Circle { q, p: 0.0 })
            else {
                unreachable!()
            };
            assert_eq!(dq, 0.0);
            assert!(dp.abs() < 1e-15);
        }
    }

    #[test]
    fn euler_top_principal_axis_is_steady() {
        let e = systems::euler(1.0, 2.0, 3.0).unwrap();
        let x = PhasePoint::Rotation { rot: Mat3::identity(), l: Vec3::x() };
        let PhaseTangent::Rotation { dl, .. } = hamiltonian_vector_field(e.hamiltonian().as_ref(), &x) else {
            unreachable!()
        };
        assert_eq!(dl, Vec3::zeros());
    }

    #[test]
    fn pendulum_energy_drift_over_long_run() {
        let h = systems::pendulum();
        let x0 = PhasePoint::Circle { q: FRAC_PI_2, p: 0.0 };
        let traj = flow(h.hamiltonian().as_ref(), &x0, &FlowSpec::symmetric(100.0, 1e-3)).unwrap();
        assert_eq!(traj.len(), 100_001);
        let e0 = h.hamiltonian().value(&x0);
        let drift = relative_drift(traj.iter().map(|x| h.hamiltonian().value(x)), e0);
        assert!(drift <= 1e-6, "{drift}");
    }

    #[test]
    fn zero_hamiltonian_is_stationary() {
        let s2 = ConfigurationSpace::sphere2();
        let zero = Lifted::new(Arc::new(FnScalar::constant(s2, 0.0)));
        let x0 = sampling::phase_points(&s2, 1, 2.0, 1)[0];
        for x in flow(&zero, &x0, &FlowSpec::symmetric(1.0, 0.1)).unwrap() {
            assert!(x.distance(&x0) <= 1e-15);
        }
    }

    #[test]
    fn flow_rejects_bad_specs() {
        let h = systems::pendulum();
        let x0 = PhasePoint::Circle { q: 0.0, p: 0.0 };
        assert!(flow(h.hamiltonian().as_ref(), &x0, &FlowSpec::symmetric(-1.0, 0.1)).is_err());
        assert!(flow(h.hamiltonian().as_ref(), &x0, &FlowSpec::symmetric(1.0, 2.0)).is_err());
    }

    fn shift_functions() -> Vec<Arc<dyn ScalarField>> {
        let rot = ConfigurationSpace::rotation_group(1.0, 2.0, 3.0).unwrap();
        vec![
            Arc::new(FnScalar::circle(f64::sin, f64::cos)),
            Arc::new(FnScalar::sphere(|q| q.x * q.y + q.z, |q| Vec3::new(q.y, q.x, 1.0))),
            Arc::new(FnScalar::vertical(rot, |g| g.x * g.z, |g| Vec3::new(g.z, 0.0, g.x))),
        ]
    }

    #[test]
    fn graph_shift_is_the_flow_of_the_shift_generator() {
        for f in shift_functions() {
            let gen = Lifted::shift_generator(f.clone());
            for x in sampling::phase_points(f.space(), 50, 3.0, 4) {
                let a = graph_shift(f.as_ref(), 0.7, &x);
                let b = flow_to(&gen, &x, 0.7, 0.01).unwrap();
                assert!(a.distance(&b) <= 1e-8, "{a:?} vs {b:?}");
                // The lift itself translates the other way.
                let c = flow_to(&Lifted::new(f.clone()), &x, 0.7, 0.01).unwrap();
                assert!(graph_shift(f.as_ref(), -0.7, &x).distance(&c) <= 1e-8);
            }
        }
    }

    #[test]
    fn kovalevskaya_conservation_and_casimirs() {
        let s = systems::kovalevskaya(1.0, 1.0).unwrap();
        let x0 = PhasePoint::Rotation {
            rot: rotation_with_gamma(&Vec3::new(0.3, -0.5, 0.8).normalize()),
            l: Vec3::new(0.4, -0.3, 0.5),
        };
        let (rep, _) = conservation_report(&s, &x0, &FlowSpec::symmetric(50.0, 1e-3)).unwrap();
        for d in &rep.drifts {
            assert!(*d <= 1e-6, "{rep:?}");
        }
        let [c1, c2] = rep.casimir_drifts.unwrap();
        assert!(c1 <= 1e-10 && c2 <= 1e-10, "{rep:?}");
        assert!(rep.max_residual <= 1e-10);
    }

    #[test]
    fn adaptive_method_matches_symmetric_on_sphere() {
        let s = systems::spherical_pendulum();
        let x0 = sampling::phase_points(s.space(), 1, 1.0, 6)[0];
        let a = flow(s.hamiltonian().as_ref(), &x0, &FlowSpec::adaptive(2.0, 0.1)).unwrap();
        let b = flow(s.hamiltonian().as_ref(), &x0, &FlowSpec::symmetric(2.0, 1e-4)).unwrap();
        assert_eq!(a.len(), 21);
        assert!(a.last().unwrap().distance(b.last().unwrap()) < 1e-7);
        assert!(a.iter().all(|x| x.residual() <= 1e-10));
    }

    #[test]
    fn sphere_midpoint_fallback_conserves_energy() {
        // A field without splitting structure exercises the ambient midpoint.
        let s = systems::spherical_pendulum();
        let g = Scaled { inner: s.components()[1].clone(), scale: 1.0 };
        let x0 = sampling::phase_points(s.space(), 1, 1.0, 3)[0];
        let traj = flow(&g, &x0, &FlowSpec::symmetric(5.0, 1e-3)).unwrap();
        let h = s.hamiltonian();
        let drift = relative_drift(traj.iter().map(|x| h.value(x)), h.value(&x0));
        assert!(drift <= 1e-8, "{drift}");
        assert!(traj.iter().all(|x| x.residual() <= 1e-10));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn symmetric_flow_is_reversible(seed in 0u64..1000) {
            for s in [systems::spherical_pendulum(), systems::clebsch(1.0, 2.0, 3.0).unwrap()] {
                let x0 = sampling::phase_points(s.space(), 1, 1.5, seed)[0];
                let fwd = flow_to(s.hamiltonian().as_ref(), &x0, 2.0, 1e-3).unwrap();
                let back = Scaled { inner: s.hamiltonian().clone(), scale: -1.0 };
                let x1 = flow_to(&back, &fwd, 2.0, 1e-3).unwrap();
                prop_assert!(x1.distance(&x0) <= 1e-6, "{}", x1.distance(&x0));
            }
        }
    }
}
