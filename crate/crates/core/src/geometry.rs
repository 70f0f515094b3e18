//! Mid-surfaces of zero Gaussian curvature.
//!
//! A surface is generated by four profiles: `B(z)` and the θ-periodic
//! `a(θ), b(θ), c(θ)`, giving
//!
//! ```text
//! A_z = B'(z),   A_θ = a(θ) B(z) + b(θ),   κ_θ = c(θ) / A_θ,   κ_z = 0.
//! ```
//!
//! Cylinders over closed planar curves and cones over closed curves on the
//! unit sphere carry a 3D embedding; surfaces assembled directly from
//! profiles do not.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::expr::{Expr, Func};
use crate::jet::{Jet, Scalar};
use crate::spline::{CubicSpline, MonotoneCubic};
use crate::wrap;

pub type Vec3 = [f64; 3];

/// A closed-form function of one variable that is not an [`Expr`].
pub trait ProfileFn: Send + Sync {
    fn eval_jet(&self, x: Jet) -> Jet;
    fn value(&self, x: f64) -> f64 {
        self.eval_jet(Jet::constant(x)).value()
    }
}

#[derive(Clone)]
enum ProfileRep {
    Expr(Expr),
    Spline(CubicSpline),
    Custom(Arc<dyn ProfileFn>),
}

/// Scalar function of one variable with exact derivatives.
#[derive(Clone)]
pub struct Profile1D {
    rep: ProfileRep,
    period: Option<f64>,
}

impl fmt::Debug for Profile1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.rep {
            ProfileRep::Expr(e) => write!(f, "Profile1D::Expr({e:?})"),
            ProfileRep::Spline(s) => write!(f, "Profile1D::Spline({} samples)", s.samples().len()),
            ProfileRep::Custom(_) => write!(f, "Profile1D::Custom"),
        }
    }
}

impl Profile1D {
    /// Expression in the single variable `Var(0)`.
    pub fn expr(e: Expr) -> Self {
        Self { rep: ProfileRep::Expr(e), period: None }
    }

    pub fn constant(v: f64) -> Self {
        Self::expr(Expr::Const(v))
    }

    /// Identity `x ↦ x`.
    pub fn identity() -> Self {
        Self::expr(Expr::Var(0))
    }

    /// Parses an expression in the variable `var`.
    pub fn parse(src: &str, var: &str) -> Result<Self> {
        Ok(Self::expr(Expr::parse(src, &[var])?))
    }

    pub fn spline(s: CubicSpline) -> Self {
        let period = s.period();
        Self { rep: ProfileRep::Spline(s), period }
    }

    pub fn custom(f: Arc<dyn ProfileFn>) -> Self {
        Self { rep: ProfileRep::Custom(f), period: None }
    }

    pub fn with_period(mut self, p: f64) -> Self {
        self.period = Some(p);
        self
    }

    pub fn period(&self) -> Option<f64> {
        self.period
    }

    pub fn eval_jet(&self, x: Jet) -> Jet {
        match &self.rep {
            ProfileRep::Expr(e) => e.eval(&[x]),
            ProfileRep::Spline(s) => s.eval(x),
            ProfileRep::Custom(f) => f.eval_jet(x),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match &self.rep {
            ProfileRep::Expr(e) => e.eval(&[x]),
            ProfileRep::Spline(s) => s.value(x),
            ProfileRep::Custom(f) => f.value(x),
        }
    }

    /// Value and first derivative.
    pub fn value_d(&self, x: f64) -> (f64, f64) {
        match &self.rep {
            ProfileRep::Expr(e) => {
                let d = e.eval(&[crate::jet::Dual3::var(x, 0)]);
                (d.v, d.d[0])
            }
            _ => {
                let j = self.eval_jet(Jet::theta(x).truncated(1));
                (j.value(), j.d(1, 0))
            }
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.value_d(x).1
    }

    /// True when the profile is identically zero on the probe points.
    fn is_zero_on(&self, xs: &[f64]) -> bool {
        xs.iter().all(|&x| self.value(x) == 0.0)
    }
}

/// Sample points used for periodicity and dependence checks.
fn probe_points(p: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| (i as f64 + 0.318_309_886) * p / n as f64).collect()
}

// ---------------------------------------------------------------------------
// Curves

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveKind {
    /// Closed curve in the xy-plane (third coordinate zero).
    Planar,
    /// Closed curve on the unit sphere, northern hemisphere.
    Spherical,
}

#[derive(Clone, Debug)]
enum CurveRep {
    Closed([Expr; 3]),
    /// Quintic Hermite data at uniform arclength nodes: position, first and
    /// second derivative.
    Hermite { pos: Vec<Vec3>, d1: Vec<Vec3>, d2: Vec<Vec3> },
}

/// Closed curve parametrized by arclength on `[0, length)`.
#[derive(Clone, Debug)]
pub struct PlanarCurve {
    kind: CurveKind,
    points: Vec<Vec3>,
    rep: CurveRep,
    length: f64,
    curvature_samples: Option<Vec<f64>>,
}

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}
fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
fn norm(a: Vec3) -> f64 {
    Float::sqrt(dot(a, a))
}
fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}
fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn cross_s<S: Scalar>(a: &[S; 3], b: &[S; 3]) -> [S; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}
fn dot_s<S: Scalar>(a: &[S; 3], b: &[S; 3]) -> S {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Quintic Hermite interpolation on `[0, h]` at local coordinate `d`.
#[allow(clippy::too_many_arguments)]
fn quintic<S: Scalar>(d: S, h: f64, f0: f64, d0: f64, a0: f64, f1: f64, d1: f64, a1: f64) -> S {
    let s = d / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s3 * s;
    let s5 = s4 * s;
    let h0 = -(s3 * 10.0) + s4 * 15.0 - s5 * 6.0 + 1.0;
    let h1 = s - s3 * 6.0 + s4 * 8.0 - s5 * 3.0;
    let h2 = (s2 - s3 * 3.0 + s4 * 3.0 - s5) * 0.5;
    let h3 = s3 * 10.0 - s4 * 15.0 + s5 * 6.0;
    let h4 = -(s3 * 4.0) + s4 * 7.0 - s5 * 3.0;
    let h5 = (s3 - s4 * 2.0 + s5) * 0.5;
    h0 * f0 + h1 * (h * d0) + h2 * (h * h * a0) + h3 * f1 + h4 * (h * d1) + h5 * (h * h * a1)
}

// eighth-order central differences
const D1: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
const D2C: f64 = -205.0 / 72.0;
const D2: [f64; 4] = [8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];

fn periodic_derivatives(pts: &[Vec3], du: f64) -> (Vec<Vec3>, Vec<Vec3>) {
    let n = pts.len();
    let mut d1 = vec![[0.0; 3]; n];
    let mut d2 = vec![[0.0; 3]; n];
    for i in 0..n {
        for k in 0..3 {
            let mut a = 0.0;
            let mut b = D2C * pts[i][k];
            for (m, (c1, c2)) in D1.iter().zip(D2.iter()).enumerate() {
                let off = m + 1;
                let p = pts[(i + off) % n][k];
                let q = pts[(i + n - off) % n][k];
                a += c1 * (p - q);
                b += c2 * (p + q);
            }
            d1[i][k] = a / du;
            d2[i][k] = b / (du * du);
        }
    }
    (d1, d2)
}

impl PlanarCurve {
    /// Circle of radius `r` in the xy-plane, counter-clockwise.
    pub fn circle(r: f64) -> Self {
        let th = Expr::Var(0) / Expr::c(r);
        let comps = [
            Expr::c(r) * Expr::call(Func::Cos, th.clone()),
            Expr::c(r) * Expr::call(Func::Sin, th),
            Expr::c(0.0),
        ];
        Self::closed_form(CurveKind::Planar, comps, 2.0 * PI * r)
    }

    /// Circle of latitude on the unit sphere at the given colatitude.
    pub fn spherical_circle(colatitude: f64) -> Self {
        let s = Float::sin(colatitude);
        let th = Expr::Var(0) / Expr::c(s);
        let comps = [
            Expr::c(s) * Expr::call(Func::Cos, th.clone()),
            Expr::c(s) * Expr::call(Func::Sin, th),
            Expr::c(Float::cos(colatitude)),
        ];
        Self::closed_form(CurveKind::Spherical, comps, 2.0 * PI * s)
    }

    /// Curve given by arclength-parametrized closed-form components in the
    /// variable `Var(0)`.
    pub fn closed_form(kind: CurveKind, comps: [Expr; 3], length: f64) -> Self {
        let points = (0..64)
            .map(|i| {
                let th = i as f64 * length / 64.0;
                [comps[0].eval(&[th]), comps[1].eval(&[th]), comps[2].eval(&[th])]
            })
            .collect();
        Self { kind, points, rep: CurveRep::Closed(comps), length, curvature_samples: None }
    }

    /// Builds an arclength parametrization from samples of a closed curve.
    ///
    /// The samples should be equispaced in some smooth parameter. Derivatives
    /// come from periodic eighth-order differences; arclength is a corrected
    /// cumulative trapezoid, inverted with a monotone cubic start and Newton
    /// polishing. The result is resampled on uniform arclength nodes.
    pub fn from_points(kind: CurveKind, mut points: Vec<Vec3>) -> Result<Self> {
        let n = points.len();
        if n < 16 {
            return Err(Error::InvalidCurve(format!("need at least 16 points, got {n}")));
        }
        if points.iter().any(|p| p.iter().any(|v| !v.is_finite())) {
            return Err(Error::InvalidCurve("non-finite coordinate".into()));
        }
        match kind {
            CurveKind::Planar => {
                if points.iter().any(|p| p[2] != 0.0) {
                    return Err(Error::InvalidCurve("planar curve with nonzero z".into()));
                }
            }
            CurveKind::Spherical => {
                for (i, p) in points.iter().enumerate() {
                    if (norm(*p) - 1.0).abs() > 1e-8 {
                        return Err(Error::InvalidCurve(format!("point {i} is not on the unit sphere")));
                    }
                    if p[2] <= 0.0 {
                        return Err(Error::InvalidCurve(format!("point {i} is not in the northern hemisphere")));
                    }
                }
            }
        }
        // closure: the implicit closing segment must look like the others
        let seg: Vec<f64> = (0..n).map(|i| norm(sub(points[(i + 1) % n], points[i]))).collect();
        let mut sorted = seg.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = sorted[n / 2];
        if seg.iter().any(|&s| s == 0.0) {
            return Err(Error::InvalidCurve("repeated point".into()));
        }
        if seg[n - 1] > 10.0 * median {
            return Err(Error::NonClosed(seg[n - 1]));
        }
        // orientation and simplicity on a planar projection
        let proj: Vec<[f64; 2]> = match kind {
            CurveKind::Planar => points.iter().map(|p| [p[0], p[1]]).collect(),
            CurveKind::Spherical => points.iter().map(|p| [p[0] / p[2], p[1] / p[2]]).collect(),
        };
        check_simple(&proj)?;
        let area: f64 = (0..n)
            .map(|i| {
                let (a, b) = (proj[i], proj[(i + 1) % n]);
                a[0] * b[1] - a[1] * b[0]
            })
            .sum();
        if area < 0.0 {
            points.reverse();
        }

        let du = 1.0;
        let (x1, x2) = periodic_derivatives(&points, du);
        let g: Vec<f64> = x1.iter().map(|d| norm(*d)).collect();
        let gp: Vec<f64> = (0..n).map(|i| dot(x1[i], x2[i]) / g[i]).collect();
        // cumulative trapezoid with Euler–Maclaurin end correction
        let mut s_nodes = vec![0.0; n + 1];
        for i in 0..n {
            let j = (i + 1) % n;
            s_nodes[i + 1] = s_nodes[i] + 0.5 * du * (g[i] + g[j]) - du * du / 12.0 * (gp[j] - gp[i]);
        }
        let length = s_nodes[n];
        let u_nodes: Vec<f64> = (0..=n).map(|i| i as f64).collect();
        let inverse = MonotoneCubic::new(s_nodes.clone(), u_nodes);

        let arclength = |u: f64| -> (f64, f64) {
            let i = (Float::floor(u) as usize).min(n - 1);
            let j = (i + 1) % n;
            let d = crate::jet::Dual3::var(u - i as f64, 0);
            let s = quintic(d, du, s_nodes[i], g[i], gp[i], s_nodes[i + 1], g[j], gp[j]);
            (s.v, s.d[0])
        };
        let position = |u: f64| -> (Vec3, Vec3, Vec3) {
            let i = (Float::floor(wrap(u, n as f64)) as usize).min(n - 1);
            let j = (i + 1) % n;
            let local = wrap(u, n as f64) - i as f64;
            let d = Jet::theta(local).truncated(2);
            let mut p = [0.0; 3];
            let mut v = [0.0; 3];
            let mut a = [0.0; 3];
            for k in 0..3 {
                let f = quintic(d, du, points[i][k], x1[i][k], x2[i][k], points[j][k], x1[j][k], x2[j][k]);
                p[k] = f.value();
                v[k] = f.d(1, 0);
                a[k] = f.d(2, 0);
            }
            (p, v, a)
        };

        let m = n;
        let step = length / m as f64;
        let mut pos = Vec::with_capacity(m);
        let mut d1 = Vec::with_capacity(m);
        let mut d2 = Vec::with_capacity(m);
        let mut kappa = Vec::with_capacity(m);
        for jn in 0..m {
            let target = jn as f64 * step;
            let mut u = inverse.eval(target);
            for _ in 0..30 {
                let (s, ds) = arclength(u.clamp(0.0, n as f64 - 1e-12));
                let du_step = (s - target) / ds;
                u -= du_step;
                if du_step.abs() < 1e-15 * n as f64 {
                    break;
                }
            }
            let (p, xu, xuu) = position(u);
            let gu = norm(xu);
            let gpu = dot(xu, xuu) / gu;
            let t = scale(xu, 1.0 / gu);
            let acc = sub(scale(xuu, 1.0 / (gu * gu)), scale(xu, gpu / (gu * gu * gu)));
            let k = match kind {
                CurveKind::Planar => t[0] * acc[1] - t[1] * acc[0],
                CurveKind::Spherical => dot(p, cross(t, acc)),
            };
            pos.push(p);
            d1.push(t);
            d2.push(acc);
            kappa.push(k);
        }
        Ok(Self {
            kind,
            points,
            rep: CurveRep::Hermite { pos, d1, d2 },
            length,
            curvature_samples: Some(kappa),
        })
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    /// Arclength `p` of the closed curve.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// The input samples (or a 64-point sampling of closed forms).
    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    /// Position on the curve at arclength `theta` (wrapped).
    pub fn eval<S: Scalar>(&self, theta: S) -> [S; 3] {
        match &self.rep {
            CurveRep::Closed(c) => [c[0].eval(&[theta]), c[1].eval(&[theta]), c[2].eval(&[theta])],
            CurveRep::Hermite { pos, d1, d2 } => {
                let n = pos.len();
                let h = self.length / n as f64;
                let tv = theta.value();
                let s = wrap(tv / h, n as f64);
                let i = (Float::floor(s) as usize).min(n - 1);
                let j = (i + 1) % n;
                let d = theta - (tv - (s - i as f64) * h);
                let mut out = [S::cst(0.0); 3];
                for (k, o) in out.iter_mut().enumerate() {
                    *o = quintic(d, h, pos[i][k], d1[i][k], d2[i][k], pos[j][k], d1[j][k], d2[j][k]);
                }
                out
            }
        }
    }

    /// `Γ(θ), Γ'(θ), Γ''(θ)`.
    pub fn derivatives(&self, theta: f64) -> (Vec3, Vec3, Vec3) {
        let j = self.eval(Jet::theta(theta).truncated(2));
        let mut out = ([0.0; 3], [0.0; 3], [0.0; 3]);
        for k in 0..3 {
            out.0[k] = j[k].value();
            out.1[k] = j[k].d(1, 0);
            out.2[k] = j[k].d(2, 0);
        }
        out
    }

    /// Signed curvature for planar curves, `(σ, σ', σ'')` for spherical ones.
    pub fn curvature_profile(&self) -> Profile1D {
        match &self.curvature_samples {
            Some(k) => Profile1D::spline(CubicSpline::periodic(k.clone(), self.length)),
            None => Profile1D::custom(Arc::new(CurvatureOf(self.clone()))).with_period(self.length),
        }
    }
}

struct CurvatureOf(PlanarCurve);

impl ProfileFn for CurvatureOf {
    fn eval_jet(&self, x: Jet) -> Jet {
        let order = x.order().min(crate::jet::MAX_ORDER - 2);
        let th = Jet::theta(x.value()).truncated(order + 2);
        let g = self.0.eval(th);
        let d1 = [g[0].dtheta(), g[1].dtheta(), g[2].dtheta()];
        let d2 = [d1[0].dtheta(), d1[1].dtheta(), d1[2].dtheta()];
        let k = match self.0.kind {
            CurveKind::Planar => d1[0] * d2[1] - d1[1] * d2[0],
            CurveKind::Spherical => {
                let c = cross_s(&d1, &d2);
                let g0 = [g[0].truncated(order), g[1].truncated(order), g[2].truncated(order)];
                dot_s(&g0, &c)
            }
        };
        let mut derivs = [0.0; crate::jet::MAX_ORDER + 1];
        for (i, d) in derivs.iter_mut().enumerate().take(order + 1) {
            *d = k.d(i, 0);
        }
        x.truncated(order).compose(&derivs)
    }
}

fn check_simple(p: &[[f64; 2]]) -> Result<()> {
    let n = p.len();
    let orient = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    for i in 0..n {
        let (a, b) = (p[i], p[(i + 1) % n]);
        let (minx, maxx) = (a[0].min(b[0]), a[0].max(b[0]));
        let (miny, maxy) = (a[1].min(b[1]), a[1].max(b[1]));
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (c, d) = (p[j], p[(j + 1) % n]);
            if c[0].max(d[0]) < minx || c[0].min(d[0]) > maxx || c[1].max(d[1]) < miny || c[1].min(d[1]) > maxy {
                continue;
            }
            let (o1, o2) = (orient(a, b, c), orient(a, b, d));
            let (o3, o4) = (orient(c, d, a), orient(c, d, b));
            if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
                return Err(Error::SelfIntersection(i, j));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Surfaces

#[derive(Clone, Debug)]
pub enum Embedding {
    /// `r(θ, z) = Γ(θ) + z e_z`.
    Cylinder(PlanarCurve),
    /// `r(θ, z) = z σ(θ)`.
    Cone(PlanarCurve),
}

/// Orthonormal frame `(e_t, e_θ, e_z)`; `e_t` is the outward normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    pub e_t: Vec3,
    pub e_theta: Vec3,
    pub e_z: Vec3,
}

impl Frame {
    pub fn as_rows(&self) -> [Vec3; 3] {
        [self.e_t, self.e_theta, self.e_z]
    }
}

/// Frame and mid-surface point as jets in `(θ, z)`.
pub(crate) struct JetFrame {
    pub r: [Jet; 3],
    pub e: [[Jet; 3]; 3],
}

impl Embedding {
    fn curve(&self) -> &PlanarCurve {
        match self {
            Embedding::Cylinder(c) | Embedding::Cone(c) => c,
        }
    }

    pub(crate) fn jet_frame(&self, theta: f64, z: f64, order: usize) -> JetFrame {
        let th = Jet::theta(theta).truncated(order + 1);
        let zj = Jet::z(z).truncated(order + 1);
        let g = self.curve().eval(th);
        let gd = [g[0].dtheta(), g[1].dtheta(), g[2].dtheta()];
        let g = [g[0].truncated(order), g[1].truncated(order), g[2].truncated(order)];
        let zj = zj.truncated(order);
        let normalize = |v: [Jet; 3]| {
            let inv = dot_s(&v, &v).sqrt().recip();
            [v[0] * inv, v[1] * inv, v[2] * inv]
        };
        match self {
            Embedding::Cylinder(_) => {
                let r = [g[0] + zj * 0.0, g[1] + zj * 0.0, g[2] + zj];
                let e_theta = normalize(gd);
                let one = Jet::constant(1.0).truncated(order);
                let zero = Jet::constant(0.0).truncated(order);
                let e_z = [zero, zero, one];
                let n = normalize(cross_s(&e_theta, &e_z));
                JetFrame { r, e: [n, e_theta, e_z] }
            }
            Embedding::Cone(_) => {
                let r = [zj * g[0], zj * g[1], zj * g[2]];
                let e_z = normalize(g);
                let proj = dot_s(&gd, &e_z);
                let e_theta = normalize([gd[0] - proj * e_z[0], gd[1] - proj * e_z[1], gd[2] - proj * e_z[2]]);
                let n = normalize(cross_s(&e_theta, &e_z));
                JetFrame { r, e: [n, e_theta, e_z] }
            }
        }
    }
}

/// Validation grid for positivity checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ValidationGrid {
    pub n_theta: usize,
    pub n_z: usize,
}

impl Default for ValidationGrid {
    fn default() -> Self {
        Self { n_theta: 256, n_z: 64 }
    }
}

/// Metric and curvature data at one mid-surface point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfacePoint {
    pub a_z: f64,
    pub a_theta: f64,
    pub a: f64,
    pub c: f64,
}

impl SurfacePoint {
    pub fn kappa_theta(&self) -> f64 {
        self.c / self.a_theta
    }
}

#[derive(Clone, Debug)]
pub struct ZeroGaussSurface {
    b_z: Profile1D,
    a: Profile1D,
    b: Profile1D,
    c: Profile1D,
    p: f64,
    z_range: (f64, f64),
    embedding: Option<Embedding>,
    uniformly_convex: bool,
    min_a_theta: f64,
    max_c: f64,
    min_c: f64,
}

/// Builds a surface from its generating profiles with the default
/// validation grid.
pub fn build_surface(
    b_z: Profile1D,
    a: Profile1D,
    b: Profile1D,
    c: Profile1D,
    p: f64,
    z_range: (f64, f64),
) -> Result<ZeroGaussSurface> {
    ZeroGaussSurface::new(b_z, a, b, c, p, z_range, ValidationGrid::default())
}

impl ZeroGaussSurface {
    pub fn new(
        b_z: Profile1D,
        a: Profile1D,
        b: Profile1D,
        c: Profile1D,
        p: f64,
        z_range: (f64, f64),
        grid: ValidationGrid,
    ) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::InvalidArgument(format!("period must be positive, got {p}")));
        }
        let (lo, hi) = z_range;
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidArgument(format!("degenerate z range [{lo}, {hi}]")));
        }
        let probes = probe_points(p, 64);
        for (name, prof) in [("a", &a), ("b", &b), ("c", &c)] {
            if let Some(q) = prof.period() {
                if (q - p).abs() > 1e-9 * p {
                    return Err(Error::NonPeriodic(name));
                }
            } else {
                for &x in &probes {
                    let (u, v) = (prof.value(x), prof.value(x + p));
                    if (u - v).abs() > 1e-10 * (1.0 + u.abs()) {
                        return Err(Error::NonPeriodic(name));
                    }
                }
            }
        }
        let mut surf = Self {
            b_z,
            a,
            b,
            c,
            p,
            z_range,
            embedding: None,
            uniformly_convex: false,
            min_a_theta: f64::INFINITY,
            max_c: f64::NEG_INFINITY,
            min_c: f64::INFINITY,
        };
        let nz = grid.n_z.max(2);
        for j in 0..nz {
            let z = lo + (hi - lo) * j as f64 / (nz - 1) as f64;
            let (bz, dbz) = surf.b_z.value_d(z);
            if !(dbz > 0.0) {
                return Err(Error::PositivityViolation { quantity: "A_z", theta: 0.0, z, value: dbz });
            }
            for i in 0..grid.n_theta {
                let th = p * i as f64 / grid.n_theta as f64;
                let at = surf.a.value(th) * bz + surf.b.value(th);
                if !(at > 0.0) {
                    return Err(Error::PositivityViolation { quantity: "A_theta", theta: th, z, value: at });
                }
                surf.min_a_theta = surf.min_a_theta.min(at);
            }
        }
        for i in 0..grid.n_theta {
            let cv = surf.c.value(p * i as f64 / grid.n_theta as f64);
            if !cv.is_finite() {
                return Err(Error::InvalidArgument("c(theta) is not finite".into()));
            }
            surf.max_c = surf.max_c.max(cv);
            surf.min_c = surf.min_c.min(cv);
        }
        surf.uniformly_convex = surf.min_c > 0.0;
        Ok(surf)
    }

    pub fn with_embedding(mut self, e: Embedding) -> Self {
        self.embedding = Some(e);
        self
    }

    pub fn embedding(&self) -> Option<&Embedding> {
        self.embedding.as_ref()
    }

    pub fn period(&self) -> f64 {
        self.p
    }

    pub fn z_range(&self) -> (f64, f64) {
        self.z_range
    }

    pub fn uniformly_convex(&self) -> bool {
        self.uniformly_convex
    }

    /// Minimum of `A_θ` over the validation grid.
    pub fn min_a_theta(&self) -> f64 {
        self.min_a_theta
    }

    pub fn max_c(&self) -> f64 {
        self.max_c
    }

    pub fn min_c(&self) -> f64 {
        self.min_c
    }

    pub fn profile_b(&self) -> &Profile1D {
        &self.b_z
    }
    pub fn profile_a(&self) -> &Profile1D {
        &self.a
    }
    pub fn profile_bt(&self) -> &Profile1D {
        &self.b
    }
    pub fn profile_c(&self) -> &Profile1D {
        &self.c
    }

    /// Largest thickness for which `A_θ + t c` stays positive on `|t| ≤ h/2`
    /// everywhere on the validation grid.
    pub fn max_thickness(&self) -> f64 {
        let cmax = self.max_c.abs().max(self.min_c.abs());
        if cmax == 0.0 {
            f64::INFINITY
        } else {
            2.0 * self.min_a_theta / cmax
        }
    }

    /// Coefficients at `(θ, z)` without domain checks; θ is wrapped.
    pub fn point(&self, theta: f64, z: f64) -> SurfacePoint {
        let th = wrap(theta, self.p);
        let (bz, dbz) = self.b_z.value_d(z);
        let a = self.a.value(th);
        SurfacePoint { a_z: dbz, a_theta: a * bz + self.b.value(th), a, c: self.c.value(th) }
    }

    pub fn metric_at(&self, theta: f64, z: f64) -> Result<(f64, f64, f64)> {
        self.check_z(z)?;
        let sp = self.point(theta, z);
        Ok((sp.a_z, sp.a_theta, sp.kappa_theta()))
    }

    pub(crate) fn check_z(&self, z: f64) -> Result<()> {
        let (lo, hi) = self.z_range;
        let tol = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        if z < lo - tol || z > hi + tol || !z.is_finite() {
            Err(Error::OutOfDomain(z))
        } else {
            Ok(())
        }
    }

    /// Point `R(t, θ, z) = r(θ, z) + t n(θ, z)` and the frame there.
    pub fn embed_point(&self, t: f64, theta: f64, z: f64) -> Result<(Vec3, Frame)> {
        let emb = self.embedding.as_ref().ok_or(Error::NoEmbedding)?;
        let jf = emb.jet_frame(wrap(theta, self.p), z, 0);
        let e: [Vec3; 3] = core::array::from_fn(|i| core::array::from_fn(|k| jf.e[i][k].value()));
        let x = core::array::from_fn(|k| jf.r[k].value() + t * e[0][k]);
        Ok((x, Frame { e_t: e[0], e_theta: e[1], e_z: e[2] }))
    }

    /// Jets of `A_z, A_θ, κ_θ, κ_z` at `(θ, z)`, from the embedding when one
    /// exists and from the generating profiles otherwise.
    fn metric_jets(&self, theta: f64, z: f64) -> [Jet; 4] {
        const ORD: usize = 3;
        match &self.embedding {
            Some(emb) => {
                let jf = emb.jet_frame(theta, z, ORD);
                let rt = [jf.r[0].dtheta(), jf.r[1].dtheta(), jf.r[2].dtheta()];
                let rz = [jf.r[0].dz(), jf.r[1].dz(), jf.r[2].dz()];
                let n = jf.e[0];
                let nt = [n[0].dtheta(), n[1].dtheta(), n[2].dtheta()];
                let nz = [n[0].dz(), n[1].dz(), n[2].dz()];
                let at2 = dot_s(&rt, &rt);
                let az2 = dot_s(&rz, &rz);
                let kt = dot_s(&nt, &rt) / at2;
                let kz = dot_s(&nz, &rz) / az2;
                [az2.sqrt(), at2.sqrt(), kt, kz]
            }
            None => {
                let th = Jet::theta(theta).truncated(ORD);
                let zj = Jet::z(z).truncated(ORD + 1);
                let bz = self.b_z.eval_jet(zj);
                let az = bz.dz();
                let bz = bz.truncated(ORD);
                let at = self.a.eval_jet(th) * bz + self.b.eval_jet(th);
                let kt = self.c.eval_jet(th) / at;
                [az, at, kt, Jet::constant(0.0).truncated(ORD)]
            }
        }
    }

    /// Maximum absolute residuals of the Codazzi and Gauss relations on an
    /// `n × n` tensor grid.
    pub fn codazzi_gauss_residual(&self, n_samples: usize) -> (f64, f64) {
        let n = n_samples.max(2);
        let (lo, hi) = self.z_range;
        let mut rc: f64 = 0.0;
        let mut rg: f64 = 0.0;
        for j in 0..n {
            let z = lo + (hi - lo) * j as f64 / (n - 1) as f64;
            for i in 0..n {
                let th = self.p * i as f64 / n as f64;
                let [az, at, kt, kz] = self.metric_jets(th, z);
                let c1 = kz.dtheta() - (kt - kz).truncated(2) * az.dtheta() / az.truncated(2);
                let c2 = kt.dz() - (kz - kt).truncated(2) * at.dz() / at.truncated(2);
                let g = (at.dz() / az.truncated(2)).dz()
                    + (az.dtheta() / at.truncated(2)).dtheta()
                    + (az * at * kz * kt).truncated(1);
                rc = rc.max(c1.value().abs()).max(c2.value().abs());
                rg = rg.max(g.value().abs());
            }
        }
        (rc, rg)
    }
}

/// Cylinder over a closed planar curve: `B = z, a = 0, b = 1, c = κ`.
pub fn cylinder_from_curve(curve: PlanarCurve, z_range: (f64, f64)) -> Result<ZeroGaussSurface> {
    if curve.kind() != CurveKind::Planar {
        return Err(Error::InvalidCurve("cylinder needs a planar curve".into()));
    }
    let p = curve.length();
    let c = curve.curvature_profile();
    let s = build_surface(
        Profile1D::identity(),
        Profile1D::constant(0.0),
        Profile1D::constant(1.0),
        c,
        p,
        z_range,
    )?;
    Ok(s.with_embedding(Embedding::Cylinder(curve)))
}

/// Cone with apex at the origin over a closed spherical curve:
/// `B = z, a = 1, b = 0, c = (σ, σ', σ'')`.
pub fn cone_from_curve(curve: PlanarCurve, z_range: (f64, f64)) -> Result<ZeroGaussSurface> {
    if curve.kind() != CurveKind::Spherical {
        return Err(Error::InvalidCurve("cone needs a spherical curve".into()));
    }
    if z_range.0 <= 0.0 && z_range.1 >= 0.0 {
        return Err(Error::ApexIncluded(z_range.0, z_range.1));
    }
    let p = curve.length();
    let c = curve.curvature_profile();
    let s = build_surface(
        Profile1D::identity(),
        Profile1D::constant(1.0),
        Profile1D::constant(0.0),
        c,
        p,
        z_range,
    )?;
    Ok(s.with_embedding(Embedding::Cone(curve)))
}

/// Linear dependence of `a` and `b` on probe points.
///
/// Returns the separable factors of `A_z / A_θ = H(θ) / G(z)` as
/// `(H, G)` closures' building blocks: `Some(Separable)` when dependent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Separable {
    /// `b = λ a`: `A_θ = a (B + λ)`, `H = 1/a`, `G = (B + λ)/B'`.
    BOverA(f64),
    /// `a = λ b`: `A_θ = b (λ B + 1)`, `H = 1/b`, `G = (λ B + 1)/B'`.
    AOverB(f64),
}

impl ZeroGaussSurface {
    pub fn separability(&self) -> Option<Separable> {
        let xs = probe_points(self.p, 97);
        let av: Vec<f64> = xs.iter().map(|&x| self.a.value(x)).collect();
        let bv: Vec<f64> = xs.iter().map(|&x| self.b.value(x)).collect();
        let na: f64 = av.iter().map(|v| v * v).sum::<f64>().sqrt();
        let nb: f64 = bv.iter().map(|v| v * v).sum::<f64>().sqrt();
        let tol = 1e-10 * (na + nb);
        let b_nonvanishing = bv.iter().all(|v| v.abs() > 0.0) && !self.b.is_zero_on(&xs);
        let a_nonvanishing = av.iter().all(|v| v.abs() > 0.0);
        let fit = |num: &[f64], den: &[f64]| {
            let dd: f64 = den.iter().map(|v| v * v).sum();
            let lam = num.iter().zip(den).map(|(x, y)| x * y).sum::<f64>() / dd;
            let res: f64 = num.iter().zip(den).map(|(x, y)| (x - lam * y).powi(2)).sum::<f64>().sqrt();
            (lam, res)
        };
        if b_nonvanishing {
            let (lam, res) = fit(&av, &bv);
            if res <= tol {
                return Some(Separable::AOverB(lam));
            }
        }
        if a_nonvanishing {
            let (lam, res) = fit(&bv, &av);
            if res <= tol {
                return Some(Separable::BOverA(lam));
            }
        }
        None
    }
}

// ---------------------------------------------------------------------------
// Presets

/// Circular cylinder of radius `r` over `z ∈ [0, length]`.
pub fn circular_cylinder(r: f64, length: f64) -> Result<ZeroGaussSurface> {
    let curve = PlanarCurve::circle(r);
    let s = build_surface(
        Profile1D::identity(),
        Profile1D::constant(0.0),
        Profile1D::constant(1.0),
        Profile1D::constant(1.0 / r),
        curve.length(),
        (0.0, length),
    )?;
    Ok(s.with_embedding(Embedding::Cylinder(curve)))
}

/// Ellipse samples `(ax cos s, ay sin s)` at `n` equispaced parameter values.
pub fn ellipse_points(ax: f64, ay: f64, n: usize) -> Vec<Vec3> {
    (0..n)
        .map(|i| {
            let s = 2.0 * PI * i as f64 / n as f64;
            [ax * Float::cos(s), ay * Float::sin(s), 0.0]
        })
        .collect()
}

/// Cylinder over a sampled ellipse.
pub fn ellipse_cylinder(ax: f64, ay: f64, length: f64, samples: usize) -> Result<ZeroGaussSurface> {
    let curve = PlanarCurve::from_points(CurveKind::Planar, ellipse_points(ax, ay, samples))?;
    cylinder_from_curve(curve, (0.0, length))
}

/// Circular cone over the spherical circle at `colatitude`.
pub fn circular_cone(colatitude: f64, zmin: f64, zmax: f64) -> Result<ZeroGaussSurface> {
    cone_from_curve(PlanarCurve::spherical_circle(colatitude), (zmin, zmax))
}

/// Curvature of the flat-patch stadium: zero on two straight runs of length
/// `flat`, `(8/3) sin⁴` bumps of length π in between (each turning by π).
#[derive(Clone, Copy, Debug)]
pub struct FlatPatchCurvature {
    pub flat: f64,
}

impl FlatPatchCurvature {
    pub fn period(&self) -> f64 {
        2.0 * (self.flat + PI)
    }
}

impl ProfileFn for FlatPatchCurvature {
    fn eval_jet(&self, x: Jet) -> Jet {
        let half = self.flat + PI;
        let s = wrap(x.value(), half);
        if s < self.flat {
            Jet::constant(0.0).truncated(x.order())
        } else {
            // local arc coordinate keeps the derivative part of x
            let local = x - (x.value() - (s - self.flat));
            local.sin().powi(4) * (8.0 / 3.0)
        }
    }
}

/// Tangent angle of the flat-patch curve at arclength `s ∈ [0, p)`.
fn flat_patch_angle(flat: f64, s: f64) -> f64 {
    let half = flat + PI;
    let k = Float::floor(s / half);
    let r = s - k * half;
    let within = if r < flat {
        0.0
    } else {
        let u = r - flat;
        // ∫ (8/3) sin⁴ = (8/3)(3u/8 − sin 2u/4 + sin 4u/32)
        (8.0 / 3.0) * (3.0 * u / 8.0 - Float::sin(2.0 * u) / 4.0 + Float::sin(4.0 * u) / 32.0)
    };
    PI / 2.0 + k * PI + within
}

/// Convex closed cylinder with two flat strips (`c = 0` on `θ ∈ [0, flat]`
/// and on the opposite side), spliced with C³ curvature.
pub fn flat_patch_cylinder(flat: f64, length: f64) -> Result<ZeroGaussSurface> {
    let kappa = FlatPatchCurvature { flat };
    let p = kappa.period();
    let n = 1024;
    let mut pts = Vec::with_capacity(n);
    let rule = crate::quadrature::gauss_legendre(8, 0.0, 1.0);
    let ds = p / n as f64;
    let (mut x, mut y) = (0.0, 0.0);
    for i in 0..n {
        pts.push([x, y, 0.0]);
        let s0 = i as f64 * ds;
        for (u, w) in rule.iter() {
            let ang = flat_patch_angle(flat, s0 + u * ds);
            x += w * ds * Float::cos(ang);
            y += w * ds * Float::sin(ang);
        }
    }
    // the analytic curve starts on the flat strip heading in +y; move it so
    // the strip sits at x = max
    let curve = PlanarCurve::from_points(CurveKind::Planar, pts)?;
    let s = build_surface(
        Profile1D::identity(),
        Profile1D::constant(0.0),
        Profile1D::constant(1.0),
        Profile1D::custom(Arc::new(kappa)).with_period(p),
        p,
        (0.0, length),
    )?;
    Ok(s.with_embedding(Embedding::Cylinder(curve)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_cylinder_metric() {
        let s = circular_cylinder(1.0, 1.0).unwrap();
        let (az, at, k) = s.metric_at(0.3, 0.5).unwrap();
        assert_eq!((az, at, k), (1.0, 1.0, 1.0));
        assert!(s.uniformly_convex());
        assert_eq!(s.metric_at(2.0 * PI + 0.3, 0.2).unwrap(), s.metric_at(0.3, 0.2).unwrap());
        assert!(matches!(s.metric_at(0.0, 1.5), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn cone_profiles_from_table() {
        let s = build_surface(
            Profile1D::identity(),
            Profile1D::constant(1.0),
            Profile1D::constant(0.0),
            Profile1D::constant(1.0),
            2.0,
            (1.0, 2.0),
        )
        .unwrap();
        let (_, at, _) = s.metric_at(0.1, 1.7).unwrap();
        assert!((at - 1.7).abs() < 1e-15);
        let err = build_surface(
            Profile1D::identity(),
            Profile1D::constant(1.0),
            Profile1D::constant(0.0),
            Profile1D::constant(1.0),
            2.0,
            (-1.0, 1.0),
        )
        .unwrap_err();
        assert!(matches!(err, Error::PositivityViolation { quantity: "A_theta", .. }));
    }

    #[test]
    fn non_periodic_profile_rejected() {
        let err = build_surface(
            Profile1D::identity(),
            Profile1D::constant(0.0),
            Profile1D::constant(1.0),
            Profile1D::parse("2 + sin(x)", "x").unwrap(),
            3.0,
            (0.0, 1.0),
        )
        .unwrap_err();
        assert_eq!(err, Error::NonPeriodic("c"));
    }

    #[test]
    fn cone_circle_curvature_is_cot() {
        let s = circular_cone(PI / 4.0, 1.0, 2.0).unwrap();
        let (az, at, k) = s.metric_at(0.7, 2.0).unwrap();
        assert!((az - 1.0).abs() < 1e-15);
        assert!((at - 2.0).abs() < 1e-15);
        assert!((k - 0.5).abs() < 1e-14, "{k}");
        assert!(matches!(circular_cone(PI / 4.0, -1.0, 1.0), Err(Error::ApexIncluded(..))));
    }

    #[test]
    fn embed_unit_cylinder() {
        let s = circular_cylinder(1.0, 1.0).unwrap();
        let (x, f) = s.embed_point(0.05, 0.0, 1.0).unwrap();
        assert!((x[0] - 1.05).abs() < 1e-15 && x[1].abs() < 1e-15 && (x[2] - 1.0).abs() < 1e-15);
        assert!((f.e_t[0] - 1.0).abs() < 1e-15);
        let (x, f) = s.embed_point(0.0, PI / 2.0, 0.0).unwrap();
        assert!(x[0].abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
        assert!((f.e_theta[0] + 1.0).abs() < 1e-15);
        let abstract_s = build_surface(
            Profile1D::identity(),
            Profile1D::constant(0.0),
            Profile1D::constant(1.0),
            Profile1D::constant(1.0),
            1.0,
            (0.0, 1.0),
        )
        .unwrap();
        assert_eq!(abstract_s.embed_point(0.0, 0.0, 0.5).unwrap_err(), Error::NoEmbedding);
    }

    #[test]
    fn codazzi_gauss_closed_form() {
        let (rc, rg) = circular_cylinder(1.0, 1.0).unwrap().codazzi_gauss_residual(16);
        assert!(rc < 1e-12 && rg < 1e-12);
        let (rc, rg) = circular_cone(PI / 4.0, 1.0, 2.0).unwrap().codazzi_gauss_residual(16);
        assert!(rc < 1e-10 && rg < 1e-10, "{rc} {rg}");
    }

    #[test]
    fn separability_detection() {
        let cyl = circular_cylinder(1.0, 1.0).unwrap();
        assert_eq!(cyl.separability(), Some(Separable::AOverB(0.0)));
        let cone = circular_cone(PI / 4.0, 1.0, 2.0).unwrap();
        assert_eq!(cone.separability(), Some(Separable::BOverA(0.0)));
        let s = build_surface(
            Profile1D::identity(),
            Profile1D::constant(1.0),
            Profile1D::parse("2 + sin(x)", "x").unwrap(),
            Profile1D::constant(1.0),
            2.0 * PI,
            (0.0, 1.0),
        )
        .unwrap();
        assert_eq!(s.separability(), None);
    }

    #[test]
    fn ellipse_curve_reparametrization() {
        let curve = PlanarCurve::from_points(CurveKind::Planar, ellipse_points(2.0, 1.0, 512)).unwrap();
        for i in 0..50 {
            let th = curve.length() * i as f64 / 512.0;
            let (_, d1, _) = curve.derivatives(th);
            assert!((norm(d1) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn non_simple_curve_rejected() {
        // figure-eight
        let pts: Vec<Vec3> = (0..200)
            .map(|i| {
                let s = 2.0 * PI * i as f64 / 200.0;
                [Float::sin(s), Float::sin(s) * Float::cos(s), 0.0]
            })
            .collect();
        assert!(matches!(PlanarCurve::from_points(CurveKind::Planar, pts), Err(Error::SelfIntersection(..))));
    }

    #[test]
    fn open_curve_rejected() {
        let pts: Vec<Vec3> = (0..100)
            .map(|i| {
                let s = 1.5 * PI * i as f64 / 99.0;
                [Float::cos(s), Float::sin(s), 0.0]
            })
            .collect();
        assert!(matches!(PlanarCurve::from_points(CurveKind::Planar, pts), Err(Error::NonClosed(_))));
    }

    #[test]
    fn flat_patch_is_convex_with_zero_strip() {
        let s = flat_patch_cylinder(2.0, 1.0).unwrap();
        assert!(!s.uniformly_convex());
        assert_eq!(s.point(1.0, 0.5).c, 0.0);
        assert!(s.point(2.0 + PI / 2.0, 0.5).c > 2.6);
        assert!(s.min_c() >= 0.0);
        // the sampled embedding closes and has the right perimeter
        let emb = match s.embedding().unwrap() {
            Embedding::Cylinder(c) => c.clone(),
            _ => unreachable!(),
        };
        assert!((emb.length() - s.period()).abs() < 1e-8, "{} vs {}", emb.length(), s.period());
    }
}
