//! Test fields that realise the optimal Korn scaling.
//!
//! Shell fields have the form `u = v(θ, z) + t w(θ, z)` with the membrane
//! strain `E₀` (the `t = 0` part of the symmetrized simplified gradient)
//! vanishing except for its zz entry:
//!
//! ```text
//! w_t = 0
//! w_θ = −(v_t,θ − c v_θ)/A_θ
//! w_z = −v_t,z / A_z
//! v_t = −(v_θ,θ + a v_z)/c
//! ```
//!
//! `v_θ, v_z` come from a potential φ. When `a, b` are linearly dependent,
//! `A_z/A_θ = H(θ)/G(z)` and `v_z = A_θ G H φ_z`, `v_θ = −A_θ H² φ_θ`.
//! Otherwise, with `ρ = b/a`,
//! `v_θ = (1/a) ∂θ(φ_θ/ρ')`, `v_z = (B'φ_θ + ρ'φ_z − (B + ρ)φ_θz)/(B'ρ')`.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::expr::{Expr, Func};
use crate::geometry::{Separable, ZeroGaussSurface};
use crate::jet::{Jet, Scalar, MAX_ORDER};
use crate::operators::{gradient_from_sample, sym_part, BcTag, DisplacementField, FieldSample, GradKind};
use crate::quadrature::gauss_panels;
use crate::wrap;

/// Scalar function of `(θ, z)` with jet evaluation.
pub trait ScalarField2: Send + Sync {
    fn eval_jet(&self, theta: Jet, z: Jet) -> Jet;

    /// Largest angular frequency in θ.
    fn wavenumber(&self) -> f64 {
        0.0
    }

    fn value(&self, theta: f64, z: f64) -> f64 {
        self.eval_jet(Jet::constant(theta), Jet::constant(z)).value()
    }
}

/// Expression in `θ = Var(0)`, `z = Var(1)`.
#[derive(Clone, Debug)]
pub struct ExprPhi {
    pub expr: Expr,
    pub wavenumber: f64,
}

impl ExprPhi {
    pub fn parse(src: &str, wavenumber: f64) -> Result<Self> {
        Ok(Self { expr: Expr::parse(src, &["theta", "z"])?, wavenumber })
    }
}

impl ScalarField2 for ExprPhi {
    fn eval_jet(&self, theta: Jet, z: Jet) -> Jet {
        self.expr.eval(&[theta, z])
    }
    fn wavenumber(&self) -> f64 {
        self.wavenumber
    }
}

/// `⌊h^{-1/4}⌋`, exact at fourth powers.
pub fn oscillation_number(h: f64) -> u32 {
    let mut n = Float::floor(Float::powf(h, -0.25)) as u32;
    while ((n + 1) as f64).powi(4) * h <= 1.0 + 1e-12 {
        n += 1;
    }
    while n > 1 && (n as f64).powi(4) * h > 1.0 + 1e-12 {
        n -= 1;
    }
    n.max(1)
}

/// `exp(1 − 1/(1 − s²))` on `|s| < 1`, zero elsewhere; peak value 1.
fn bump_jet(s: Jet) -> Jet {
    let v = s.value();
    if v.abs() >= 1.0 {
        return Jet::constant(0.0).truncated(s.order());
    }
    let one_minus = -(s * s) + 1.0;
    (-(one_minus.recip()) + 1.0).exp()
}

/// Smooth cutoff supported on `(θ₀, θ₁) × (z₀, z₁)`; θ is taken modulo `p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoxBump {
    pub theta: (f64, f64),
    pub z: (f64, f64),
    pub period: f64,
}

impl BoxBump {
    fn factor(lo: f64, hi: f64, x: Jet) -> Jet {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        bump_jet((x - mid) / half)
    }

    pub fn theta_factor(&self, theta: Jet) -> Jet {
        let v = theta.value();
        let local = theta - (v - wrap(v, self.period));
        Self::factor(self.theta.0, self.theta.1, local)
    }

    pub fn z_factor(&self, z: Jet) -> Jet {
        Self::factor(self.z.0, self.z.1, z)
    }
}

impl ScalarField2 for BoxBump {
    fn eval_jet(&self, theta: Jet, z: Jet) -> Jet {
        self.theta_factor(theta) * self.z_factor(z)
    }
}

/// `φʰ(θ, z) = η(θ, z) Φ(n θ, z)`.
#[derive(Clone)]
pub struct OscillatingPhi {
    pub base: Arc<dyn ScalarField2>,
    pub n: u32,
    pub cutoff: Option<BoxBump>,
}

impl ScalarField2 for OscillatingPhi {
    fn eval_jet(&self, theta: Jet, z: Jet) -> Jet {
        let f = self.base.eval_jet(theta * self.n as f64, z);
        match &self.cutoff {
            Some(b) => {
                let eta = b.eval_jet(theta, z);
                if eta.value() == 0.0 && (0..=eta.order()).all(|k| (0..=k).all(|j| eta.d(k - j, j) == 0.0)) {
                    return eta;
                }
                f * eta
            }
            None => f,
        }
    }
    fn wavenumber(&self) -> f64 {
        self.n as f64 * self.base.wavenumber()
    }
}

pub fn oscillating_phi(base: Arc<dyn ScalarField2>, h: f64, cutoff: Option<BoxBump>) -> OscillatingPhi {
    OscillatingPhi { base, n: oscillation_number(h), cutoff }
}

/// `Φ(θ', z) = cos(2πθ'/p) sin²(π(z − L−)/(L+ − L−))`.
pub fn default_profile(s: &ZeroGaussSurface) -> ExprPhi {
    let p = s.period();
    let (lo, hi) = s.z_range();
    let th = Expr::c(2.0 * PI / p) * Expr::var(0);
    let zz = Expr::c(PI / (hi - lo)) * (Expr::var(1) - Expr::c(lo));
    let expr = Expr::call(Func::Cos, th) * Expr::call(Func::Sin, zz).powi(2);
    ExprPhi { expr, wavenumber: 2.0 * PI / p }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AnsatzCase {
    /// `a, b` linearly dependent.
    Separable(Separable),
    /// `ρ = b/a` with `ρ' ≠ 0` on the support.
    General,
    /// Plate bending on a flat part of a cylinder.
    Kirchhoff,
}

/// `u = v + t w` built from a potential φ.
#[derive(Clone)]
pub struct AnsatzField {
    surface: ZeroGaussSurface,
    phi: Arc<dyn ScalarField2>,
    case: AnsatzCase,
}

impl AnsatzField {
    pub fn case(&self) -> AnsatzCase {
        self.case
    }

    pub fn phi(&self) -> &Arc<dyn ScalarField2> {
        &self.phi
    }

    /// Jets of `v` and `w` at `(θ, z)`.
    pub fn membrane_parts(&self, theta: f64, z: f64) -> ([Jet; 3], [Jet; 3]) {
        let s = &self.surface;
        let th = Jet::theta(theta);
        let zj = Jet::z(z);
        let phi = self.phi.eval_jet(th, zj);
        let a = s.profile_a().eval_jet(th);
        let bt = s.profile_bt().eval_jet(th);
        let c = s.profile_c().eval_jet(th);
        let bz = s.profile_b().eval_jet(zj);
        let dbz = bz.dz();
        let a_theta = a * bz + bt;
        let zero = Jet::constant(0.0);
        let (vt, vth, vz) = match self.case {
            AnsatzCase::Kirchhoff => {
                let v = [phi, zero, zero];
                let w = [zero, -(phi.dtheta() / a_theta.truncated(MAX_ORDER - 1)), -(phi.dz() / dbz)];
                return (v, w);
            }
            AnsatzCase::Separable(sep) => {
                let (hf, g) = match sep {
                    Separable::BOverA(l) => (a.recip(), (bz + l) / dbz),
                    Separable::AOverB(l) => (bt.recip(), (bz * l + 1.0) / dbz),
                };
                let vz = a_theta * g * hf * phi.dz();
                let vth = -(a_theta * hf * hf * phi.dtheta());
                let vt = -((vth.dtheta() + a * vz) / c);
                (vt, vth, vz)
            }
            AnsatzCase::General => {
                let rho = bt / a;
                let drho = rho.dtheta();
                let pth = phi.dtheta();
                let psi = pth / drho;
                let vth = psi.dtheta() / a;
                let vz = (dbz * pth + drho * phi.dz() - (bz + rho) * pth.dz()) / (dbz * drho);
                let vt = -((vth.dtheta() + a * vz) / c);
                (vt, vth, vz)
            }
        };
        let wth = -((vt.dtheta() - c * vth) / a_theta);
        let wz = -(vt.dz() / dbz);
        ([vt, vth, vz], [zero.truncated(wth.order()), wth, wz])
    }
}

impl DisplacementField for AnsatzField {
    fn sample(&self, t: f64, theta: f64, z: f64) -> FieldSample {
        let (v, w) = self.membrane_parts(theta, z);
        let mut out = FieldSample::default();
        for i in 0..3 {
            let u = v[i].truncated(1) + w[i].truncated(1) * t;
            out.value[i] = u.value();
            out.grad[i] = [w[i].value(), u.d(1, 0), u.d(0, 1)];
        }
        out
    }

    fn wavenumber(&self) -> f64 {
        self.phi.wavenumber()
    }

    fn bc_tag(&self) -> Option<BcTag> {
        Some(BcTag::V2)
    }
}

fn probe_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64)
}

/// Separable-case field; φ should be p-periodic and vanish with its
/// z-derivative at the ends.
pub fn case1_field(s: &ZeroGaussSurface, phi: Arc<dyn ScalarField2>) -> Result<AnsatzField> {
    let sep = s.separability().ok_or(Error::NotSeparable)?;
    let p = s.period();
    for th in probe_grid(0.0, p, 512) {
        if s.point(th, s.z_range().0).c == 0.0 {
            return Err(Error::ZeroCurvature(th));
        }
    }
    if s.min_c() <= 0.0 && s.max_c() >= 0.0 {
        return Err(Error::ZeroCurvature(0.0));
    }
    Ok(AnsatzField { surface: s.clone(), phi, case: AnsatzCase::Separable(sep) })
}

/// Non-separable field with φ supported in `interval × (L−, L+)`.
pub fn case2_field(s: &ZeroGaussSurface, phi: Arc<dyn ScalarField2>, interval: (f64, f64)) -> Result<AnsatzField> {
    let (lo, hi) = interval;
    let p = s.period();
    if !(lo < hi && hi - lo < p) {
        return Err(Error::InvalidArgument(alloc::format!("bad case-2 interval ({lo}, {hi})")));
    }
    for th in probe_grid(lo, hi, 400) {
        let a = s.profile_a().value(th);
        if a == 0.0 {
            return Err(Error::DegenerateCase2(th));
        }
        let j = Jet::theta(th).truncated(1);
        let rho = s.profile_bt().eval_jet(j) / s.profile_a().eval_jet(j);
        let d = rho.d(1, 0);
        if d.abs() < 1e-12 {
            return Err(Error::DegenerateCase2(th));
        }
        if s.profile_c().value(th) == 0.0 {
            return Err(Error::ZeroCurvature(th));
        }
    }
    let (zlo, zhi) = s.z_range();
    let mut scale: f64 = 0.0;
    let mut leak: f64 = 0.0;
    for th in probe_grid(0.0, p, 512) {
        let inside = {
            let w = wrap(th - lo, p);
            w > 0.0 && w < hi - lo
        };
        for z in probe_grid(zlo - 0.05 * (zhi - zlo), zhi + 0.05 * (zhi - zlo), 64) {
            let v = phi.value(th, z).abs();
            scale = scale.max(v);
            if !inside || z <= zlo || z >= zhi {
                leak = leak.max(v);
            }
        }
    }
    if leak > 1e-14 * scale.max(1.0) {
        return Err(Error::SupportViolation(leak));
    }
    Ok(AnsatzField { surface: s.clone(), phi, case: AnsatzCase::General })
}

/// Plate bending field `u = (φ, −t φ_θ/A_θ, −t φ_z/A_z)` for φ supported
/// where the surface is flat (`c = 0`, `a = 0`).
pub fn shell_kirchhoff_field(s: &ZeroGaussSurface, phi: Arc<dyn ScalarField2>, support: BoxBump) -> Result<AnsatzField> {
    for th in probe_grid(support.theta.0, support.theta.1, 200) {
        let sp = s.point(th, 0.5 * (support.z.0 + support.z.1));
        if sp.c != 0.0 || sp.a != 0.0 {
            return Err(Error::InvalidArgument(alloc::format!("surface is not flat at theta={th}")));
        }
    }
    Ok(AnsatzField { surface: s.clone(), phi, case: AnsatzCase::Kirchhoff })
}

/// Largest off-zz entry of `E₀` over an `n × n` grid.
pub fn membrane_residual(s: &ZeroGaussSurface, f: &dyn DisplacementField, n: usize) -> f64 {
    let (lo, hi) = s.z_range();
    let mut r: f64 = 0.0;
    for z in probe_grid(lo, hi, n) {
        for th in probe_grid(0.0, s.period(), n) {
            let sp = s.point(th, z);
            let e = sym_part(&gradient_from_sample(&sp, &f.sample(0.0, th, z), 0.0, GradKind::Simplified));
            for i in 0..3 {
                for j in 0..3 {
                    if (i, j) != (2, 2) {
                        r = r.max(e.0[i][j].abs());
                    }
                }
            }
        }
    }
    r
}

/// Plate field `u = (−x₃φ,₁, −x₃φ,₂, φ)` on `Ω × (−h/2, h/2)`.
#[derive(Clone, Debug)]
pub struct KirchhoffPlate {
    pub phi: Expr,
    pub h: f64,
}

pub fn kirchhoff_field(phi: Expr, h: f64) -> KirchhoffPlate {
    KirchhoffPlate { phi, h }
}

/// Per-unit-thickness norms of a plate field and of its potential.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlateNorms {
    /// `(1/h) ∫ |∇u|²`.
    pub grad_sq: f64,
    /// `(1/h) ∫ |e(u)|²`.
    pub sym_sq: f64,
    pub grad_phi_sq: f64,
    pub hess_phi_sq: f64,
}

impl PlateNorms {
    pub fn quotient(&self) -> f64 {
        self.sym_sq / self.grad_sq
    }
}

impl KirchhoffPlate {
    /// Cartesian gradient `∂_j u_i` at a point.
    pub fn gradient(&self, x: [f64; 3]) -> [[f64; 3]; 3] {
        let j = self.phi.eval(&[Jet::theta(x[0]).truncated(2), Jet::z(x[1]).truncated(2)]);
        let (p1, p2) = (j.d(1, 0), j.d(0, 1));
        let (p11, p12, p22) = (j.d(2, 0), j.d(1, 1), j.d(0, 2));
        let x3 = x[2];
        [[-x3 * p11, -x3 * p12, -p1], [-x3 * p12, -x3 * p22, -p2], [p1, p2, 0.0]]
    }

    /// Quadrature over `[x0, x1] × [y0, y1] × I_h` on `panels²` cells.
    pub fn norms(&self, rect: [(f64, f64); 2], panels: usize) -> PlateNorms {
        let rx = gauss_panels(panels, 6, rect[0].0, rect[0].1);
        let ry = gauss_panels(panels, 6, rect[1].0, rect[1].1);
        let rt = gauss_panels(1, 4, -0.5 * self.h, 0.5 * self.h);
        let mut n = PlateNorms { grad_sq: 0.0, sym_sq: 0.0, grad_phi_sq: 0.0, hess_phi_sq: 0.0 };
        for (x, wx) in rx.iter() {
            for (y, wy) in ry.iter() {
                let j = self.phi.eval(&[Jet::theta(x).truncated(2), Jet::z(y).truncated(2)]);
                n.grad_phi_sq += wx * wy * (j.d(1, 0).powi(2) + j.d(0, 1).powi(2));
                n.hess_phi_sq += wx * wy * (j.d(2, 0).powi(2) + 2.0 * j.d(1, 1).powi(2) + j.d(0, 2).powi(2));
                for (t, wt) in rt.iter() {
                    let g = self.gradient([x, y, t]);
                    let w = wx * wy * wt / self.h;
                    for i in 0..3 {
                        for k in 0..3 {
                            let e = 0.5 * (g[i][k] + g[k][i]);
                            n.grad_sq += w * g[i][k] * g[i][k];
                            n.sym_sq += w * e * e;
                        }
                    }
                }
            }
        }
        n
    }

    /// Largest entry of the `x₃ = 0` strain over a sample grid.
    pub fn membrane_residual(&self, rect: [(f64, f64); 2], n: usize) -> f64 {
        let mut r: f64 = 0.0;
        for x in probe_grid(rect[0].0, rect[0].1, n) {
            for y in probe_grid(rect[1].0, rect[1].1, n) {
                let g = self.gradient([x, y, 0.0]);
                for i in 0..3 {
                    for k in 0..3 {
                        r = r.max((0.5 * (g[i][k] + g[k][i])).abs());
                    }
                }
            }
        }
        r
    }
}

/// Least-squares slope and r² of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let lx: Vec<f64> = x.iter().map(|v| Float::ln(*v)).collect();
    let ly: Vec<f64> = y.iter().map(|v| Float::ln(*v)).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = ly.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_surface, circular_cone, circular_cylinder, Profile1D};
    use crate::operators::{korn_functionals, QuadratureSpec};

    fn cos2() -> Arc<dyn ScalarField2> {
        Arc::new(ExprPhi::parse("cos(2*theta)", 2.0).unwrap())
    }

    #[test]
    fn oscillation_numbers() {
        assert_eq!(oscillation_number(1.0 / 16.0), 2);
        assert_eq!(oscillation_number(0.01), 3);
        assert_eq!(oscillation_number(1.0), 1);
        for n in 2..8u32 {
            assert_eq!(oscillation_number(1.0 / (n as f64).powi(4)), n);
        }
    }

    #[test]
    fn unit_cylinder_cos2_components() {
        let s = circular_cylinder(1.0, 1.0).unwrap();
        let f = case1_field(&s, cos2()).unwrap();
        let th = 0.37;
        let (v, w) = f.membrane_parts(th, 0.5);
        let s2 = (2.0 * th).sin();
        assert!((v[1].value() - 2.0 * s2).abs() < 1e-14);
        assert!((v[0].value() + 4.0 * (2.0 * th).cos()).abs() < 1e-14);
        assert!(v[2].value().abs() < 1e-14);
        assert!((w[1].value() + 6.0 * s2).abs() < 1e-13);
        assert!(w[2].value().abs() < 1e-14 && w[0].value() == 0.0);
        assert!(membrane_residual(&s, &f, 24) < 1e-12);
    }

    #[test]
    fn cone_components() {
        let s = circular_cone(PI / 4.0, 1.0, 2.0).unwrap();
        let phi: Arc<dyn ScalarField2> = Arc::new(ExprPhi::parse("cos(theta*3)*(z-1)^3*(2-z)^3", 3.0).unwrap());
        let f = case1_field(&s, phi.clone()).unwrap();
        let (th, z) = (0.4, 1.3);
        let (v, _) = f.membrane_parts(th, z);
        let j = phi.eval_jet(Jet::theta(th), Jet::z(z));
        assert!((v[2].value() - z * z * j.d(0, 1)).abs() < 1e-13);
        assert!((v[1].value() + z * j.d(1, 0)).abs() < 1e-13);
        assert!(membrane_residual(&s, &f, 24) < 1e-10);
    }

    fn wavy() -> ZeroGaussSurface {
        build_surface(
            Profile1D::identity(),
            Profile1D::constant(1.0),
            Profile1D::parse("2 + sin(x)", "x").unwrap(),
            Profile1D::constant(1.0),
            2.0 * PI,
            (0.0, 1.0),
        )
        .unwrap()
    }

    #[test]
    fn general_case() {
        let s = wavy();
        assert!(matches!(case1_field(&s, cos2()), Err(Error::NotSeparable)));
        let bump = BoxBump { theta: (0.2, 1.2), z: (0.0, 1.0), period: 2.0 * PI };
        let f = case2_field(&s, Arc::new(bump), (0.2, 1.2)).unwrap();
        assert!(membrane_residual(&s, &f, 40) < 1e-9);
        let wide = BoxBump { theta: (0.1, 1.2), ..bump };
        assert!(matches!(case2_field(&s, Arc::new(wide), (0.2, 1.2)), Err(Error::SupportViolation(_))));
        let cyl = circular_cylinder(1.0, 1.0).unwrap();
        assert!(matches!(case2_field(&cyl, Arc::new(bump), (0.2, 1.2)), Err(Error::DegenerateCase2(_))));
    }

    #[test]
    fn random_field_has_membrane_strain() {
        let s = circular_cylinder(1.0, 1.0).unwrap();
        let u = crate::operators::ExprField::parse("sin(theta)*z", "z*cos(theta)", "t").unwrap();
        assert!(membrane_residual(&s, &u, 8) > 0.1);
    }

    #[test]
    fn plate_identities_for_saddle() {
        let k = kirchhoff_field(Expr::parse("theta*z", &["theta", "z"]).unwrap(), 0.1);
        let n = k.norms([(0.0, 1.0), (0.0, 1.0)], 2);
        assert!((n.grad_phi_sq - 2.0 / 3.0).abs() < 1e-14);
        assert!((n.hess_phi_sq - 2.0).abs() < 1e-14);
        assert!((n.sym_sq - 0.01 / 6.0).abs() < 1e-15);
        assert!((n.grad_sq - (2.0 * n.grad_phi_sq + 0.01 / 12.0 * n.hess_phi_sq)).abs() < 1e-13);
        assert!(k.membrane_residual([(0.0, 1.0), (0.0, 1.0)], 8) < 1e-15);
    }

    #[test]
    fn cylinder_quotient_decreases_with_h() {
        let s = circular_cylinder(1.0, 1.0).unwrap();
        let base: Arc<dyn ScalarField2> = Arc::new(default_profile(&s));
        let q: Vec<f64> = [2u32, 3]
            .iter()
            .map(|&n| {
                let h = 1.0 / (n as f64).powi(4);
                let f = case1_field(&s, Arc::new(oscillating_phi(base.clone(), h, None))).unwrap();
                korn_functionals(&s, &f, h, &QuadratureSpec::for_field(&s, &f)).unwrap().q_full
            })
            .collect();
        assert!(q[1] < q[0]);
    }

    #[test]
    fn slope_of_exact_power() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(1.5)).collect();
        let (s, r2) = loglog_slope(&x, &y);
        assert!((s - 1.5).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
    }
}
