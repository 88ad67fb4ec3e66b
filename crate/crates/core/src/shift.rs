//! Finite-basis configuration functions used as graph-shift generators.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

use nalgebra::{Matrix4, Quaternion, Rotation3, UnitQuaternion, Vector4};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Config, ConfigurationSpace, FiberVec, Mat3, ScalarField, SpaceKind, Vec3};

/// Number of real solid harmonics of degrees 1 through 4.
pub const HARMONIC_COUNT: usize = 24;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Basis {
    /// `Σₖ aₖ cos kq + bₖ sin kq`, coefficients `[a₁, b₁, a₂, b₂, …]`.
    Fourier,
    /// Real solid harmonics of degrees 1..=4 restricted to S².
    Harmonic,
    /// `tr(AQ)` with `A` stored row-major.
    Trace,
    /// `scale · u·F(x)` where `F` is the conformal map of S² fixing `±center`
    /// that is the dilation `w ↦ w/λ` in stereographic coordinates from
    /// `−center`. On S¹ the points are `(cos q, sin q, 0)`.
    ContractedHeight { axis: [f64; 3], center: [f64; 3], lambda: f64 },
    /// `scale · yᵀKy / yᵀy` with `y = L⁻¹x` on unit quaternions `x`, where
    /// `L⁻¹` divides the component along `center` by `mu`. All four
    /// eigenvectors of `K` make the same angle with `center`.
    ProjectiveQuadratic { center: [f64; 4], mu: f64 },
}

/// A configuration function `f` given by coefficients over a fixed basis.
#[derive(Clone, Debug, Serialize)]
pub struct ShiftFunction {
    #[serde(skip)]
    space: ConfigurationSpace,
    pub basis: Basis,
    pub coefficients: Vec<f64>,
    #[serde(skip)]
    quadric: Option<Quadric>,
}

#[derive(Clone, Debug)]
struct Quadric {
    k: Matrix4<f64>,
    m: Matrix4<f64>,
    /// Unit quaternions of the critical points (up to sign).
    critical: Vec<Vector4<f64>>,
}

impl ShiftFunction {
    pub fn fourier(coefficients: Vec<f64>) -> Result<Self> {
        if !coefficients.len().is_multiple_of(2) {
            return Err(Error::Parameter("Fourier coefficients come in (a, b) pairs".into()));
        }
        Self::checked(ConfigurationSpace::circle(), Basis::Fourier, coefficients, None)
    }

    pub fn harmonic(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() > HARMONIC_COUNT {
            return Err(Error::Parameter(format!("at most {HARMONIC_COUNT} harmonic coefficients")));
        }
        Self::checked(ConfigurationSpace::sphere2(), Basis::Harmonic, coefficients, None)
    }

    pub fn trace(space: ConfigurationSpace, a: &Mat3) -> Result<Self> {
        if space.kind() != SpaceKind::RotationGroup {
            return Err(Error::Usage("trace basis lives on the rotation group".into()));
        }
        let coefficients = a.transpose().iter().copied().collect();
        Self::checked(space, Basis::Trace, coefficients, None)
    }

    /// Height along `axis ⊥ center` pulled back by a conformal dilation;
    /// its two critical points lie at angle `2·atan(λ)` from `center`.
    pub fn contracted_height(space: ConfigurationSpace, center: Vec3, axis: Vec3, lambda: f64) -> Result<Self> {
        if space.kind() == SpaceKind::RotationGroup {
            return Err(Error::Usage("contracted height lives on S¹ or S²".into()));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Parameter(format!("lambda must be positive, got {lambda}")));
        }
        let c = center.normalize();
        let u = (axis - c * c.dot(&axis)).normalize();
        if space.kind() == SpaceKind::Circle && (c.z.abs() > 1e-12 || u.z.abs() > 1e-12) {
            return Err(Error::Parameter("circle contraction needs center and axis in the xy-plane".into()));
        }
        let basis = Basis::ContractedHeight { axis: u.into(), center: c.into(), lambda };
        Self::checked(space, basis, vec![1.0], None)
    }

    /// Quotient of quadrics on S³/±1 whose four critical points lie at
    /// rotation angle `2·atan(√3/μ)` from `center`.
    pub fn projective_quadratic(space: ConfigurationSpace, center: &Mat3, mu: f64) -> Result<Self> {
        if space.kind() != SpaceKind::RotationGroup {
            return Err(Error::Usage("projective quadratic lives on the rotation group".into()));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::Parameter(format!("mu must be positive, got {mu}")));
        }
        let c = quaternion_of(center);
        let quadric = build_quadric(&c, mu);
        let basis = Basis::ProjectiveQuadratic { center: [c[0], c[1], c[2], c[3]], mu };
        Self::checked(space, basis, vec![1.0], Some(quadric))
    }

    fn checked(space: ConfigurationSpace, basis: Basis, coefficients: Vec<f64>, quadric: Option<Quadric>) -> Result<Self> {
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Parameter("shift coefficients must be finite".into()));
        }
        Ok(Self { space, basis, coefficients, quadric })
    }

    /// Same basis with new coefficients.
    pub fn with_coefficients(&self, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != self.coefficients.len() {
            return Err(Error::Parameter("coefficient count must not change".into()));
        }
        Self::checked(self.space, self.basis.clone(), coefficients, self.quadric.clone())
    }

    /// Known critical points for the contraction bases.
    pub fn critical_points(&self) -> Vec<Config> {
        match (&self.basis, &self.quadric) {
            (Basis::ContractedHeight { axis, center, lambda }, _) => {
                let (u, c) = (Vec3::from(*axis), Vec3::from(*center));
                [u, -u]
                    .iter()
                    .map(|v| {
                        let x = mobius(&c, *lambda, v).0.normalize();
                        match self.space.kind() {
                            SpaceKind::Circle => Config::Circle(x.y.atan2(x.x)),
                            _ => Config::Sphere(x),
                        }
                    })
                    .collect()
            }
            (Basis::ProjectiveQuadratic { .. }, Some(q)) => q.critical.iter().map(|x| Config::Rotation(rotation_of(x))).collect(),
            _ => Vec::new(),
        }
    }
}

impl ScalarField for ShiftFunction {
    fn space(&self) -> &ConfigurationSpace {
        &self.space
    }

    fn value(&self, q: &Config) -> f64 {
        self.eval(q).0
    }

    fn differential(&self, q: &Config) -> FiberVec {
        self.eval(q).1
    }
}

impl ShiftFunction {
    fn eval(&self, q: &Config) -> (f64, FiberVec) {
        let c = &self.coefficients;
        match (&self.basis, q) {
            (Basis::Fourier, Config::Circle(t)) => {
                let (mut v, mut d) = (0.0, 0.0);
                for (i, ab) in c.chunks(2).enumerate() {
                    let k = (i + 1) as f64;
                    let (s, co) = (k * t).sin_cos();
                    v += ab[0] * co + ab[1] * s;
                    d += k * (ab[1] * co - ab[0] * s);
                }
                (v, FiberVec::Circle(d))
            }
            (Basis::Harmonic, Config::Sphere(x)) => {
                let (mut v, mut g) = (0.0, Vec3::zeros());
                for (coef, poly) in c.iter().zip(harmonics()) {
                    if *coef != 0.0 {
                        let (pv, pg) = poly.eval(x);
                        v += coef * pv;
                        g += pg * *coef;
                    }
                }
                (v, FiberVec::Sphere(g - x * x.dot(&g)))
            }
            (Basis::Trace, Config::Rotation(r)) => {
                let a = Mat3::from_row_slice(c);
                let aq = a * r;
                let d = Vec3::from_fn(|i, _| {
                    let e = crate::geometry::hat(&Vec3::ith(i, 1.0));
                    (aq * e).trace()
                });
                (aq.trace(), FiberVec::Body(d))
            }
            (Basis::ContractedHeight { axis, center, lambda }, _) => {
                let (u, cc) = (Vec3::from(*axis), Vec3::from(*center));
                let s = c[0];
                match q {
                    Config::Circle(t) => {
                        let x = Vec3::new(t.cos(), t.sin(), 0.0);
                        let (f, jt) = mobius_height(&cc, 1.0 / lambda, &u, &x);
                        (s * f, FiberVec::Circle(s * jt.dot(&Vec3::new(-t.sin(), t.cos(), 0.0))))
                    }
                    Config::Sphere(x) => {
                        let (f, jt) = mobius_height(&cc, 1.0 / lambda, &u, x);
                        (s * f, FiberVec::Sphere((jt - x * x.dot(&jt)) * s))
                    }
                    Config::Rotation(_) => panic!("contracted height on the rotation group"),
                }
            }
            (Basis::ProjectiveQuadratic { .. }, Config::Rotation(r)) => {
                let quad = self.quadric.as_ref().expect("quadric data accompanies its basis");
                let x = quaternion_of(r);
                let y = quad.m * x;
                let yy = y.dot(&y);
                let f = y.dot(&(quad.k * y)) / yy;
                let grad = quad.m * ((quad.k * y - y * f) * (2.0 / yy));
                let xq = Quaternion::new(x[3], x[0], x[1], x[2]);
                let d = Vec3::from_fn(|i, _| {
                    let e = Vec3::ith(i, 0.5);
                    let t = xq * Quaternion::new(0.0, e.x, e.y, e.z);
                    grad.dot(&Vector4::new(t.i, t.j, t.k, t.w))
                });
                (c[0] * f, FiberVec::Body(d * c[0]))
            }
            (b, q) => panic!("shift basis {b:?} evaluated at {q:?}"),
        }
    }
}

/// `F_μ(x)`, numerator and denominator of the map `w ↦ μw` in
/// stereographic coordinates from `−c`.
fn mobius(c: &Vec3, mu: f64, x: &Vec3) -> (Vec3, Vec3, f64) {
    let z = c.dot(x);
    let n = c * ((1.0 - mu).powi(2) * z + (1.0 - mu * mu)) + x * (2.0 * mu);
    let d = (1.0 - mu * mu) * z + 1.0 + mu * mu;
    (n / d, n, d)
}

/// `u·F_μ(x)` and the ambient gradient `Jᵀu`.
fn mobius_height(c: &Vec3, mu: f64, u: &Vec3, x: &Vec3) -> (f64, Vec3) {
    let (f, n, d) = mobius(c, mu, x);
    let jt = (c * ((1.0 - mu).powi(2) * c.dot(u)) + u * (2.0 * mu)) / d - c * ((1.0 - mu * mu) * n.dot(u) / (d * d));
    (u.dot(&f), jt)
}

/// Unit quaternion `(i, j, k, w)` of a rotation matrix.
pub fn quaternion_of(r: &Mat3) -> Vector4<f64> {
    let q = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(*r));
    q.into_inner().coords
}

pub fn rotation_of(x: &Vector4<f64>) -> Mat3 {
    let q = UnitQuaternion::from_quaternion(Quaternion::new(x[3], x[0], x[1], x[2]));
    q.to_rotation_matrix().into_inner()
}

fn build_quadric(c: &Vector4<f64>, mu: f64) -> Quadric {
    let c = c.normalize();
    // Orthonormal frame with first vector c.
    let mut frame: Vec<Vector4<f64>> = vec![c];
    for i in 0..4 {
        let mut v = Vector4::ith(i, 1.0);
        for b in &frame {
            v -= b * b.dot(&v);
        }
        if v.norm() > 1e-6 && frame.len() < 4 {
            frame.push(v.normalize());
        }
    }
    let e = Matrix4::from_columns(&frame);
    #[rustfmt::skip]
    let hadamard = Matrix4::new(
        1.0, 1.0, 1.0, 1.0,
        1.0, -1.0, 1.0, -1.0,
        1.0, 1.0, -1.0, -1.0,
        1.0, -1.0, -1.0, 1.0,
    ) * 0.5;
    let v = e * hadamard;
    let k = v * Matrix4::from_diagonal(&Vector4::new(1.0, 2.0, 3.0, 4.0)) * v.transpose();
    let m = Matrix4::identity() + c * c.transpose() * (1.0 / mu - 1.0);
    let l = Matrix4::identity() + c * c.transpose() * (mu - 1.0);
    let critical = (0..4).map(|j| (l * v.column(j)).normalize()).collect();
    Quadric { k, m, critical }
}

/// Largest angular separation of the critical points from the center:
/// `2·atan(λ)` for the height and `2·atan(√3/μ)` for the quadric.
pub fn critical_radius(basis: &Basis) -> f64 {
    match basis {
        Basis::ContractedHeight { lambda, .. } => 2.0 * lambda.atan(),
        Basis::ProjectiveQuadratic { mu, .. } => 2.0 * (3f64.sqrt() / mu).atan(),
        _ => FRAC_PI_2 * 2.0,
    }
}

/// Sparse polynomial in `x, y, z`.
#[derive(Clone, Debug, Default)]
struct Poly(BTreeMap<[u8; 3], f64>);

impl Poly {
    fn constant(c: f64) -> Self {
        Poly([([0, 0, 0], c)].into_iter().collect())
    }

    fn monomial(e: [u8; 3]) -> Self {
        Poly([(e, 1.0)].into_iter().collect())
    }

    fn add(&self, o: &Poly, s: f64) -> Poly {
        let mut r = self.0.clone();
        for (e, c) in &o.0 {
            *r.entry(*e).or_insert(0.0) += s * c;
        }
        Poly(r)
    }

    fn scale(&self, s: f64) -> Poly {
        Poly(self.0.iter().map(|(e, c)| (*e, c * s)).collect())
    }

    fn mul(&self, o: &Poly) -> Poly {
        let mut r: BTreeMap<[u8; 3], f64> = BTreeMap::new();
        for (a, ca) in &self.0 {
            for (b, cb) in &o.0 {
                let e = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
                *r.entry(e).or_insert(0.0) += ca * cb;
            }
        }
        Poly(r)
    }

    fn eval(&self, x: &Vec3) -> (f64, Vec3) {
        let pw = |b: f64, e: u8| if e == 0 { 1.0 } else { b.powi(e as i32) };
        let mut v = 0.0;
        let mut g = Vec3::zeros();
        for (e, c) in &self.0 {
            let (px, py, pz) = (pw(x.x, e[0]), pw(x.y, e[1]), pw(x.z, e[2]));
            v += c * px * py * pz;
            if e[0] > 0 {
                g.x += c * e[0] as f64 * pw(x.x, e[0] - 1) * py * pz;
            }
            if e[1] > 0 {
                g.y += c * e[1] as f64 * px * pw(x.y, e[1] - 1) * pz;
            }
            if e[2] > 0 {
                g.z += c * e[2] as f64 * px * py * pw(x.z, e[2] - 1);
            }
        }
        (v, g)
    }
}

/// Unnormalized real solid harmonics `Π_l^m C_m`, `Π_l^m S_m`, degrees 1..=4,
/// ordered by degree then `m = 0, 1c, 1s, 2c, 2s, …`.
fn harmonics() -> &'static [Poly] {
    static CELL: OnceLock<Vec<Poly>> = OnceLock::new();
    CELL.get_or_init(|| {
        let (x, y, z) = (Poly::monomial([1, 0, 0]), Poly::monomial([0, 1, 0]), Poly::monomial([0, 0, 1]));
        let r2 = x.mul(&x).add(&y.mul(&y), 1.0).add(&z.mul(&z), 1.0);
        let lmax = 4usize;
        // C_m + i S_m = (x + i y)^m.
        let mut cs = vec![(Poly::constant(1.0), Poly::default())];
        for m in 0..lmax {
            let (c, s) = &cs[m];
            cs.push((x.mul(c).add(&y.mul(s), -1.0), x.mul(s).add(&y.mul(c), 1.0)));
        }
        let mut out = Vec::with_capacity(HARMONIC_COUNT);
        // pi[m][l] = Π_l^m.
        let mut pi: Vec<Vec<Poly>> = Vec::new();
        for m in 0..=lmax {
            let mut row = vec![Poly::default(); lmax + 1];
            let dfact: f64 = (1..=m).map(|k| (2 * k - 1) as f64).product();
            row[m] = Poly::constant(dfact);
            if m < lmax {
                row[m + 1] = z.mul(&row[m]).scale((2 * m + 1) as f64);
            }
            for l in m + 2..=lmax {
                let a = z.mul(&row[l - 1]).scale((2 * l - 1) as f64);
                let b = r2.mul(&row[l - 2]).scale((l + m - 1) as f64);
                row[l] = a.add(&b, -1.0).scale(1.0 / (l - m) as f64);
            }
            pi.push(row);
        }
        for l in 1..=lmax {
            out.push(pi[0][l].clone());
            for m in 1..=l {
                out.push(pi[m][l].mul(&cs[m].0));
                out.push(pi[m][l].mul(&cs[m].1));
            }
        }
        out
    })
}
