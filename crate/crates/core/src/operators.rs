//! Curvilinear gradients, weighted energy norms and Korn functionals.
//!
//! Frame components are ordered `(t, θ, z)`. A gradient `G` has rows indexed
//! by the displacement component and columns by the differentiation
//! direction:
//!
//! ```text
//!       ∂t        (1/D)∂θ + connection        (1/A_z)∂z
//! t  [ u_t,t   (u_t,θ − c u_θ)/D             u_t,z/A_z ]
//! θ  [ u_θ,t   (u_θ,θ + c u_t + a u_z)/D     u_θ,z/A_z ]
//! z  [ u_z,t   (u_z,θ − a u_θ)/D             u_z,z/A_z ]
//! ```
//!
//! with `D = A_θ + t c` for the full gradient and `D = A_θ` for the
//! simplified one.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use num_traits::Float;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{Frame, SurfacePoint, Vec3, ZeroGaussSurface};
use crate::jet::{Dual3, Jet, Scalar};
use crate::quadrature::{gauss_legendre, gauss_panels, periodic_trapezoid, Rule1D};
use crate::solver::Grid3;
use crate::wrap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GradKind {
    Full,
    Simplified,
}

/// Boundary-condition subspaces a field can claim membership of.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BcTag {
    /// Clamped at `z = L−`, `u_t = u_θ = 0` at `z = L+`.
    V1,
    /// `u_θ = u_z = 0` at both ends.
    V2,
    /// V2 end conditions with `u_θ = 0` on the θ-edges instead of periodicity.
    V3,
    PeriodicOnly,
}

/// 3×3 tensor in frame components `(t, θ, z)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FrameTensor(pub [[f64; 3]; 3]);

impl FrameTensor {
    pub const ZERO: Self = Self([[0.0; 3]; 3]);

    pub fn identity() -> Self {
        let mut m = Self::ZERO;
        for i in 0..3 {
            m.0[i][i] = 1.0;
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = self.0[j][i];
            }
        }
        m
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().flatten().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        Float::sqrt(self.norm_sq())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Add for FrameTensor {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        for i in 0..3 {
            for j in 0..3 {
                self.0[i][j] += o.0[i][j];
            }
        }
        self
    }
}

impl Sub for FrameTensor {
    type Output = Self;
    fn sub(mut self, o: Self) -> Self {
        for i in 0..3 {
            for j in 0..3 {
                self.0[i][j] -= o.0[i][j];
            }
        }
        self
    }
}

impl Mul<f64> for FrameTensor {
    type Output = Self;
    fn mul(mut self, s: f64) -> Self {
        self.0.iter_mut().flatten().for_each(|v| *v *= s);
        self
    }
}

pub fn sym_part(m: &FrameTensor) -> FrameTensor {
    (*m + m.transpose()) * 0.5
}

/// Value and coordinate partials of a field at one point; `grad[i][k]` is
/// `∂u_i/∂q_k` with `q = (t, θ, z)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FieldSample {
    pub value: [f64; 3],
    pub grad: [[f64; 3]; 3],
}

/// Displacement field in frame components `(u_t, u_θ, u_z)`.
pub trait DisplacementField: Sync {
    fn sample(&self, t: f64, theta: f64, z: f64) -> FieldSample;

    /// Largest angular frequency in θ, for quadrature sizing.
    fn wavenumber(&self) -> f64 {
        0.0
    }

    fn bc_tag(&self) -> Option<BcTag> {
        None
    }
}

impl<F: DisplacementField + ?Sized> DisplacementField for &F {
    fn sample(&self, t: f64, theta: f64, z: f64) -> FieldSample {
        (**self).sample(t, theta, z)
    }
    fn wavenumber(&self) -> f64 {
        (**self).wavenumber()
    }
    fn bc_tag(&self) -> Option<BcTag> {
        (**self).bc_tag()
    }
}

/// Field given by three expressions in `(t, θ, z)` = `Var(0), Var(1), Var(2)`.
#[derive(Clone, Debug)]
pub struct ExprField {
    pub comps: [Expr; 3],
    pub wavenumber: f64,
    pub bc: Option<BcTag>,
}

impl ExprField {
    pub fn new(comps: [Expr; 3]) -> Self {
        Self { comps, wavenumber: 0.0, bc: None }
    }

    /// Parses the three components from infix strings in `t, theta, z`.
    pub fn parse(ut: &str, utheta: &str, uz: &str) -> Result<Self> {
        let vars = ["t", "theta", "z"];
        Ok(Self::new([Expr::parse(ut, &vars)?, Expr::parse(utheta, &vars)?, Expr::parse(uz, &vars)?]))
    }

    pub fn with_wavenumber(mut self, k: f64) -> Self {
        self.wavenumber = k;
        self
    }

    pub fn with_bc(mut self, bc: BcTag) -> Self {
        self.bc = Some(bc);
        self
    }
}

impl DisplacementField for ExprField {
    fn sample(&self, t: f64, theta: f64, z: f64) -> FieldSample {
        let vars = [Dual3::var(t, 0), Dual3::var(theta, 1), Dual3::var(z, 2)];
        let mut out = FieldSample::default();
        for (i, e) in self.comps.iter().enumerate() {
            let d = e.eval(&vars);
            out.value[i] = d.v;
            out.grad[i] = d.d;
        }
        out
    }
    fn wavenumber(&self) -> f64 {
        self.wavenumber
    }
    fn bc_tag(&self) -> Option<BcTag> {
        self.bc
    }
}

/// `α u + β v`.
pub struct Combination<U, V> {
    pub alpha: f64,
    pub u: U,
    pub beta: f64,
    pub v: V,
}

impl<U: DisplacementField, V: DisplacementField> DisplacementField for Combination<U, V> {
    fn sample(&self, t: f64, theta: f64, z: f64) -> FieldSample {
        let (a, b) = (self.u.sample(t, theta, z), self.v.sample(t, theta, z));
        let mut out = FieldSample::default();
        for i in 0..3 {
            out.value[i] = self.alpha * a.value[i] + self.beta * b.value[i];
            for k in 0..3 {
                out.grad[i][k] = self.alpha * a.grad[i][k] + self.beta * b.grad[i][k];
            }
        }
        out
    }
    fn wavenumber(&self) -> f64 {
        self.u.wavenumber().max(self.v.wavenumber())
    }
}

/// Assembles the gradient matrix from a field sample and the local geometry.
pub fn gradient_from_sample(sp: &SurfacePoint, f: &FieldSample, t: f64, kind: GradKind) -> FrameTensor {
    let den = match kind {
        GradKind::Full => sp.a_theta + t * sp.c,
        GradKind::Simplified => sp.a_theta,
    };
    let (u, g) = (f.value, f.grad);
    let (c, a) = (sp.c, sp.a);
    FrameTensor([
        [g[0][0], (g[0][1] - c * u[1]) / den, g[0][2] / sp.a_z],
        [g[1][0], (g[1][1] + c * u[0] + a * u[2]) / den, g[1][2] / sp.a_z],
        [g[2][0], (g[2][1] - a * u[1]) / den, g[2][2] / sp.a_z],
    ])
}

pub fn gradient(
    s: &ZeroGaussSurface,
    u: &dyn DisplacementField,
    point: (f64, f64, f64),
    kind: GradKind,
) -> Result<FrameTensor> {
    let (t, theta, z) = point;
    s.check_z(z)?;
    let sp = s.point(theta, z);
    if kind == GradKind::Full && !(sp.a_theta + t * sp.c > 0.0) {
        return Err(Error::DegenerateMetric { t, theta, value: sp.a_theta + t * sp.c });
    }
    Ok(gradient_from_sample(&sp, &u.sample(t, theta, z), t, kind))
}

/// Tensor-product rule for the shell `I_h × [0, p) × [L−, L+]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadratureSpec {
    /// Gauss–Legendre nodes through the thickness.
    pub n_t: usize,
    /// Trapezoid nodes in θ.
    pub n_theta: usize,
    pub z_panels: usize,
    pub z_nodes: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { n_t: 4, n_theta: 128, z_panels: 16, z_nodes: 6 }
    }
}

impl QuadratureSpec {
    /// Default rule with at least 32 θ-nodes per wave of the field.
    pub fn for_field(s: &ZeroGaussSurface, u: &dyn DisplacementField) -> Self {
        let waves = u.wavenumber() * s.period() / (2.0 * core::f64::consts::PI);
        let n_theta = (Float::ceil(32.0 * waves) as usize).max(128);
        Self { n_theta, ..Self::default() }
    }

    pub(crate) fn rules(&self, s: &ZeroGaussSurface, h: f64) -> (Rule1D, Rule1D, Rule1D) {
        let (lo, hi) = s.z_range();
        (
            gauss_legendre(self.n_t, -0.5 * h, 0.5 * h),
            periodic_trapezoid(self.n_theta, s.period()),
            gauss_panels(self.z_panels, self.z_nodes, lo, hi),
        )
    }
}

/// Squared weighted L² norms; weight `A_z A_θ`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NormBundle {
    pub grad_full_sq: f64,
    pub sym_full_sq: f64,
    pub grad_simp_sq: f64,
    pub sym_simp_sq: f64,
    pub ut_sq: f64,
    pub utheta_sq: f64,
    pub uz_sq: f64,
    /// Fewer than 8 θ-nodes per wave of the declared wavenumber.
    pub unresolved: bool,
}

/// Checks `A_θ + t c > 0` on `|t| ≤ h/2` over the validation grid.
pub fn check_thickness(s: &ZeroGaussSurface, h: f64) -> Result<()> {
    if h >= s.max_thickness() {
        let theta = 0.0;
        let value = s.min_a_theta() - 0.5 * h * s.max_c().abs().max(s.min_c().abs());
        return Err(Error::DegenerateMetric { t: 0.5 * h, theta, value });
    }
    Ok(())
}

pub fn energy_norms(
    s: &ZeroGaussSurface,
    u: &dyn DisplacementField,
    h: f64,
    q: &QuadratureSpec,
) -> Result<NormBundle> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!("thickness must be positive, got {h}")));
    }
    check_thickness(s, h)?;
    let (rt, rth, rz) = q.rules(s, h);
    let mut nb = NormBundle::default();
    let waves = u.wavenumber() * s.period() / (2.0 * core::f64::consts::PI);
    nb.unresolved = (q.n_theta as f64) < 8.0 * waves;
    for (z, wz) in rz.iter() {
        for (th, wth) in rth.iter() {
            let sp = s.point(th, z);
            let wa = wz * wth * sp.a_z * sp.a_theta;
            for (t, wt) in rt.iter() {
                let w = wa * wt;
                let f = u.sample(t, th, z);
                let gf = gradient_from_sample(&sp, &f, t, GradKind::Full);
                let gs = gradient_from_sample(&sp, &f, t, GradKind::Simplified);
                nb.grad_full_sq += w * gf.norm_sq();
                nb.sym_full_sq += w * sym_part(&gf).norm_sq();
                nb.grad_simp_sq += w * gs.norm_sq();
                nb.sym_simp_sq += w * sym_part(&gs).norm_sq();
                nb.ut_sq += w * f.value[0] * f.value[0];
                nb.utheta_sq += w * f.value[1] * f.value[1];
                nb.uz_sq += w * f.value[2] * f.value[2];
            }
        }
    }
    Ok(nb)
}

/// Rayleigh quotients and the first-and-a-half ratio.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KornFunctionals {
    pub q_full: f64,
    pub q_simp: f64,
    pub r_15: f64,
}

impl KornFunctionals {
    pub fn from_norms(nb: &NormBundle, h: f64) -> Result<Self> {
        if nb.grad_full_sq == 0.0 || nb.grad_simp_sq == 0.0 {
            return Err(Error::ZeroField);
        }
        let e = Float::sqrt(nb.sym_simp_sq);
        let rhs = Float::sqrt(nb.ut_sq) * e / h + nb.sym_simp_sq;
        Ok(Self {
            q_full: nb.sym_full_sq / nb.grad_full_sq,
            q_simp: nb.sym_simp_sq / nb.grad_simp_sq,
            r_15: if rhs > 0.0 { nb.grad_simp_sq / rhs } else { f64::INFINITY },
        })
    }
}

pub fn korn_functionals(
    s: &ZeroGaussSurface,
    u: &dyn DisplacementField,
    h: f64,
    q: &QuadratureSpec,
) -> Result<KornFunctionals> {
    KornFunctionals::from_norms(&energy_norms(s, u, h, q)?, h)
}

/// `(∫∫ u_θ,z u_z,θ, ∫∫ u_θ,θ u_z,z)` over the slice `t = const` in plain
/// `dθ dz` measure.
pub fn slice_cross_terms(s: &ZeroGaussSurface, u: &dyn DisplacementField, t: f64, q: &QuadratureSpec) -> (f64, f64) {
    let (lo, hi) = s.z_range();
    let rth = periodic_trapezoid(q.n_theta, s.period());
    let rz = gauss_panels(q.z_panels, q.z_nodes, lo, hi);
    let (mut mixed, mut diag) = (0.0, 0.0);
    for (z, wz) in rz.iter() {
        for (th, wth) in rth.iter() {
            let g = u.sample(t, th, z).grad;
            mixed += wz * wth * g[1][2] * g[2][1];
            diag += wz * wth * g[1][1] * g[2][2];
        }
    }
    (mixed, diag)
}

/// Infinitesimal rigid motion `x ↦ A x + b` in frame components.
#[derive(Clone, Debug)]
pub struct RigidField<'a> {
    surface: &'a ZeroGaussSurface,
    a: [[f64; 3]; 3],
    b: Vec3,
}

pub fn rigid_motion_field<'a>(s: &'a ZeroGaussSurface, a: [[f64; 3]; 3], b: Vec3) -> Result<RigidField<'a>> {
    if s.embedding().is_none() {
        return Err(Error::NoEmbedding);
    }
    for i in 0..3 {
        for j in 0..3 {
            if (a[i][j] + a[j][i]).abs() > 1e-14 * (1.0 + a[i][j].abs()) {
                return Err(Error::InvalidArgument("rigid motion matrix must be skew".into()));
            }
        }
    }
    Ok(RigidField { surface: s, a, b })
}

/// The six basis rigid motions: three translations, three rotations.
pub fn rigid_basis() -> [([[f64; 3]; 3], Vec3); 6] {
    let z = [[0.0; 3]; 3];
    let rot = |i: usize, j: usize| {
        let mut m = [[0.0; 3]; 3];
        m[i][j] = -1.0;
        m[j][i] = 1.0;
        m
    };
    [
        (z, [1.0, 0.0, 0.0]),
        (z, [0.0, 1.0, 0.0]),
        (z, [0.0, 0.0, 1.0]),
        (rot(1, 2), [0.0; 3]),
        (rot(2, 0), [0.0; 3]),
        (rot(0, 1), [0.0; 3]),
    ]
}

impl DisplacementField for RigidField<'_> {
    fn sample(&self, t: f64, theta: f64, z: f64) -> FieldSample {
        let emb = self.surface.embedding().expect("checked at construction");
        let jf = emb.jet_frame(wrap(theta, self.surface.period()), z, 1);
        let n = jf.e[0];
        let x: [Jet; 3] = core::array::from_fn(|k| jf.r[k] + n[k] * t);
        let ax: [Jet; 3] =
            core::array::from_fn(|i| x[0] * self.a[i][0] + x[1] * self.a[i][1] + x[2] * self.a[i][2] + self.b[i]);
        let an: [Jet; 3] = core::array::from_fn(|i| n[0] * self.a[i][0] + n[1] * self.a[i][1] + n[2] * self.a[i][2]);
        let mut out = FieldSample::default();
        for i in 0..3 {
            let e = &jf.e[i];
            let ui = ax[0] * e[0] + ax[1] * e[1] + ax[2] * e[2];
            let ut = an[0] * e[0] + an[1] * e[1] + an[2] * e[2];
            out.value[i] = ui.value();
            out.grad[i] = [ut.value(), ui.d(1, 0), ui.d(0, 1)];
        }
        out
    }
}

/// Relative Frobenius error between the full gradient and the frame
/// projection of the Cartesian Jacobian of `U = u_i e_i`, the latter by
/// central differences of step `eps` through the embedding.
pub fn cartesian_consistency(
    s: &ZeroGaussSurface,
    u: &dyn DisplacementField,
    point: (f64, f64, f64),
    eps: f64,
) -> Result<f64> {
    let (t, th, z) = point;
    let exact = gradient(s, u, point, GradKind::Full)?;
    let push = |q: [f64; 3]| -> Result<(Vec3, Vec3)> {
        let (x, f) = s.embed_point(q[0], q[1], q[2])?;
        let v = u.sample(q[0], q[1], q[2]).value;
        let e = f.as_rows();
        Ok((x, core::array::from_fn(|k| v[0] * e[0][k] + v[1] * e[1][k] + v[2] * e[2][k])))
    };
    // columns: ∂X/∂q_k and ∂U/∂q_k
    let mut dx = [[0.0; 3]; 3];
    let mut du = [[0.0; 3]; 3];
    for k in 0..3 {
        let mut qp = [t, th, z];
        let mut qm = [t, th, z];
        qp[k] += eps;
        qm[k] -= eps;
        let (xp, up) = push(qp)?;
        let (xm, um) = push(qm)?;
        for r in 0..3 {
            dx[r][k] = (xp[r] - xm[r]) / (2.0 * eps);
            du[r][k] = (up[r] - um[r]) / (2.0 * eps);
        }
    }
    let inv = invert3(&dx).ok_or(Error::DegenerateMetric { t, theta: th, value: 0.0 })?;
    let mut jac = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            jac[r][c] = (0..3).map(|k| du[r][k] * inv[k][c]).sum();
        }
    }
    let frame: Frame = s.embed_point(t, th, z)?.1;
    let e = frame.as_rows();
    let mut approx = FrameTensor::ZERO;
    for i in 0..3 {
        for j in 0..3 {
            approx.0[i][j] = (0..3).map(|r| e[i][r] * (0..3).map(|c| jac[r][c] * e[j][c]).sum::<f64>()).sum();
        }
    }
    let scale = exact.norm().max(f64::MIN_POSITIVE);
    Ok((approx - exact).norm() / scale)
}

fn invert3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (a, b) = ((j + 1) % 3, (j + 2) % 3);
            let (c, d) = ((i + 1) % 3, (i + 2) % 3);
            r[i][j] = (m[a][c] * m[b][d] - m[a][d] * m[b][c]) / det;
        }
    }
    Some(r)
}

/// Field sampled on the nodes of a [`Grid3`], differentiated by
/// fourth-order central differences in θ (periodic) and z (second-order
/// one-sided at the ends) and exactly in t between the two nearest t-nodes.
#[derive(Clone, Debug)]
pub struct GridField {
    grid: Grid3,
    /// `values[comp][node]` with `node = grid.node_index(i_t, i_θ, i_z)`.
    values: [Vec<f64>; 3],
    bc: Option<BcTag>,
}

impl GridField {
    pub fn new(grid: Grid3, values: [Vec<f64>; 3], bc: Option<BcTag>) -> Result<Self> {
        let n = grid.node_count();
        if values.iter().any(|v| v.len() != n) {
            return Err(Error::InvalidArgument("grid field length does not match the grid".into()));
        }
        Ok(Self { grid, values, bc })
    }

    /// Nodal interpolant of any field.
    pub fn interpolate(grid: Grid3, u: &dyn DisplacementField) -> Self {
        let mut values = [vec![0.0; grid.node_count()], vec![0.0; grid.node_count()], vec![0.0; grid.node_count()]];
        for iz in 0..grid.z.len() {
            for ith in 0..grid.theta.len() {
                for it in 0..grid.t.len() {
                    let v = u.sample(grid.t[it], grid.theta[ith], grid.z[iz]).value;
                    let k = grid.node_index(it, ith, iz);
                    for c in 0..3 {
                        values[c][k] = v[c];
                    }
                }
            }
        }
        Self { grid, values, bc: u.bc_tag() }
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn values(&self) -> &[Vec<f64>; 3] {
        &self.values
    }

    fn at(&self, c: usize, it: usize, ith: usize, iz: usize) -> f64 {
        self.values[c][self.grid.node_index(it, ith, iz)]
    }

    /// Nodal value and θ/z differences at `(it, iθ, iz)`.
    fn nodal(&self, c: usize, it: usize, ith: usize, iz: usize) -> (f64, f64, f64) {
        let g = &self.grid;
        let nth = g.theta.len();
        let nz = g.z.len();
        let dth = g.theta_step();
        let dz = g.z_step();
        let periodic = g.periodic;
        let f = |k: isize| -> f64 {
            let k = if periodic { k.rem_euclid(nth as isize) } else { k.clamp(0, nth as isize - 1) };
            self.at(c, it, k as usize, iz)
        };
        let i = ith as isize;
        let d_theta = if periodic || (ith >= 2 && ith + 2 < nth) {
            (8.0 * (f(i + 1) - f(i - 1)) - (f(i + 2) - f(i - 2))) / (12.0 * dth)
        } else if ith == 0 {
            (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * dth)
        } else if ith == nth - 1 {
            (3.0 * f(i) - 4.0 * f(i - 1) + f(i - 2)) / (2.0 * dth)
        } else {
            (f(i + 1) - f(i - 1)) / (2.0 * dth)
        };
        let gz = |k: usize| self.at(c, it, ith, k);
        let d_z = if iz >= 2 && iz + 2 < nz {
            (8.0 * (gz(iz + 1) - gz(iz - 1)) - (gz(iz + 2) - gz(iz - 2))) / (12.0 * dz)
        } else if iz == 0 {
            (-3.0 * gz(0) + 4.0 * gz(1) - gz(2)) / (2.0 * dz)
        } else if iz == nz - 1 {
            (3.0 * gz(iz) - 4.0 * gz(iz - 1) + gz(iz - 2)) / (2.0 * dz)
        } else {
            (gz(iz + 1) - gz(iz - 1)) / (2.0 * dz)
        };
        (self.at(c, it, ith, iz), d_theta, d_z)
    }
}

/// Lagrange weights for the stencil `{0, 1, 2, 3}` at position `s`.
fn lagrange4(s: f64) -> [f64; 4] {
    [
        -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0,
        s * (s - 2.0) * (s - 3.0) / 2.0,
        -s * (s - 1.0) * (s - 3.0) / 2.0,
        s * (s - 1.0) * (s - 2.0) / 6.0,
    ]
}

/// First stencil node and weights for a 4-point stencil around `s`.
fn stencil(s: f64, n: usize, periodic: bool) -> (isize, [f64; 4]) {
    let base = Float::floor(s) as isize - 1;
    let base = if periodic { base } else { base.clamp(0, n as isize - 4) };
    (base, lagrange4(s - base as f64))
}

impl DisplacementField for GridField {
    fn sample(&self, t: f64, theta: f64, z: f64) -> FieldSample {
        let g = &self.grid;
        let (nt, nth, nz) = (g.t.len(), g.theta.len(), g.z.len());
        let (t0, t1) = (g.t[0], g.t[nt - 1]);
        let st = ((t - t0) / (t1 - t0) * (nt - 1) as f64).clamp(0.0, (nt - 1) as f64);
        let it = (Float::floor(st) as usize).min(nt - 2);
        let ft = st - it as f64;
        let dt = g.t[it + 1] - g.t[it];
        let sth = if g.periodic { wrap(theta, g.period) } else { theta } / g.theta_step();
        let sz = ((z - g.z_range().0) / g.z_step()).clamp(0.0, (nz - 1) as f64);
        let (thbase, wth) = stencil(sth, nth, g.periodic);
        let (zbase, wz) = stencil(sz, nz, false);

        let mut out = FieldSample::default();
        for c in 0..3 {
            let mut acc = [[0.0; 3]; 2];
            for (a, wa) in wth.iter().enumerate() {
                let kth = (thbase + a as isize).rem_euclid(nth as isize) as usize;
                for (b, wb) in wz.iter().enumerate() {
                    let kz = (zbase + b as isize) as usize;
                    for (side, itn) in [it, it + 1].into_iter().enumerate() {
                        let (v, dth_v, dz_v) = self.nodal(c, itn, kth, kz);
                        acc[side][0] += wa * wb * v;
                        acc[side][1] += wa * wb * dth_v;
                        acc[side][2] += wa * wb * dz_v;
                    }
                }
            }
            out.value[c] = (1.0 - ft) * acc[0][0] + ft * acc[1][0];
            out.grad[c] = [
                (acc[1][0] - acc[0][0]) / dt,
                (1.0 - ft) * acc[0][1] + ft * acc[1][1],
                (1.0 - ft) * acc[0][2] + ft * acc[1][2],
            ];
        }
        out
    }

    fn bc_tag(&self) -> Option<BcTag> {
        self.bc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{circular_cone, circular_cylinder};
    use core::f64::consts::PI;

    fn unit() -> ZeroGaussSurface {
        circular_cylinder(1.0, 1.0).unwrap()
    }

    #[test]
    fn rotation_gradient_examples() {
        let s = unit();
        let u = ExprField::parse("0", "1 + t", "0").unwrap();
        let g = gradient(&s, &u, (0.03, 0.4, 0.5), GradKind::Full).unwrap();
        let mut want = FrameTensor::ZERO;
        want.0[0][1] = -1.0;
        want.0[1][0] = 1.0;
        assert!((g - want).max_abs() < 1e-15);
        assert!(sym_part(&g).max_abs() < 1e-15);
        let g = gradient(&s, &u, (0.03, 0.4, 0.5), GradKind::Simplified).unwrap();
        assert!((g.0[0][1] + 1.03).abs() < 1e-15);
        assert!((sym_part(&g).0[0][1] + 0.015).abs() < 1e-15);
    }

    #[test]
    fn sym_part_examples() {
        assert_eq!(sym_part(&FrameTensor::identity()), FrameTensor::identity());
        let mut m = FrameTensor::ZERO;
        m.0[0][1] = 1.0;
        let e = sym_part(&m);
        assert_eq!((e.0[0][1], e.0[1][0]), (0.5, 0.5));
        m.0[1][0] = -1.0;
        assert_eq!(sym_part(&m), FrameTensor::ZERO);
    }

    #[test]
    fn degenerate_metric_reported() {
        let s = circular_cylinder(0.1, 1.0).unwrap();
        let u = ExprField::parse("t", "0", "0").unwrap();
        assert!(matches!(gradient(&s, &u, (-0.2, 0.0, 0.5), GradKind::Full), Err(Error::DegenerateMetric { .. })));
        assert!(energy_norms(&s, &u, 0.25, &QuadratureSpec::default()).is_err());
    }

    #[test]
    fn norms_closed_forms() {
        let s = unit();
        let h = 0.1;
        let q = QuadratureSpec::default();
        let nb = energy_norms(&s, &ExprField::parse("0", "0", "z").unwrap(), h, &q).unwrap();
        assert!((nb.sym_simp_sq - 2.0 * PI * h).abs() < 1e-12);
        let nb = energy_norms(&s, &ExprField::parse("0", "1 + t", "0").unwrap(), h, &q).unwrap();
        assert!(nb.sym_full_sq < 1e-24);
        assert!((nb.grad_full_sq - 4.0 * PI * h).abs() < 1e-12);
        let zero = ExprField::parse("0", "0", "0").unwrap();
        assert_eq!(korn_functionals(&s, &zero, h, &q).unwrap_err(), Error::ZeroField);
    }

    #[test]
    fn rigid_examples_on_unit_cylinder() {
        let s = unit();
        let f = rigid_motion_field(&s, [[0.0; 3]; 3], [0.0, 0.0, 1.0]).unwrap().sample(0.02, 1.1, 0.3);
        assert!((f.value[2] - 1.0).abs() < 1e-15 && f.value[0].abs() < 1e-15 && f.value[1].abs() < 1e-15);
        let f = rigid_motion_field(&s, [[0.0; 3]; 3], [1.0, 0.0, 0.0]).unwrap().sample(0.0, 1.1, 0.3);
        assert!((f.value[0] - 1.1f64.cos()).abs() < 1e-15 && (f.value[1] + 1.1f64.sin()).abs() < 1e-15);
        let rot = [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]];
        let f = rigid_motion_field(&s, rot, [0.0; 3]).unwrap().sample(0.02, 1.1, 0.3);
        assert!(f.value[0].abs() < 1e-15 && (f.value[1] - 1.02).abs() < 1e-14);
    }

    #[test]
    fn rigid_kernel_on_both_presets() {
        for s in [unit(), circular_cone(PI / 4.0, 1.0, 2.0).unwrap()] {
            for (a, b) in rigid_basis() {
                let u = rigid_motion_field(&s, a, b).unwrap();
                for k in 0..20 {
                    let pt = (0.01 * ((k % 5) as f64 - 2.0), 0.37 * k as f64, 1.0 + 0.04 * k as f64 - if s.z_range().0 == 0.0 { 0.9 } else { 0.0 });
                    let g = gradient(&s, &u, pt, GradKind::Full).unwrap();
                    assert!(sym_part(&g).max_abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn cartesian_consistency_smooth_field() {
        let s = unit();
        let u = ExprField::parse("sin(theta)*cos(z)", "t*z", "cos(theta)^2").unwrap();
        let err = cartesian_consistency(&s, &u, (0.01, 0.7, 0.4), 1e-5).unwrap();
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn grid_field_reproduces_smooth_field() {
        let s = unit();
        let grid = Grid3::new(&s, 0.1, 2, 64, 33).unwrap();
        let u = ExprField::parse("sin(theta)*z", "cos(2*theta)*(1+t)", "z^2").unwrap();
        let gf = GridField::interpolate(grid, &u);
        let (a, b) = (gf.sample(0.01, 0.3, 0.41), u.sample(0.01, 0.3, 0.41));
        for c in 0..3 {
            assert!((a.value[c] - b.value[c]).abs() < 1e-5);
            for k in 0..3 {
                assert!((a.grad[c][k] - b.grad[c][k]).abs() < 1e-3, "{c} {k}");
            }
        }
    }
}
