//! Two-dimensional Korn machinery on thin rectangles
//! `R_h = (−h/2, h/2) × (0, p)`.
//!
//! For a planar displacement `φ = (u, v)` and coefficients `a₁, b₁, a₂, b₂`
//! of `y`,
//!
//! ```text
//! G = [ u_x   a₁ u_y + b₁ v ]      E = (G + Gᵀ)/2.
//!     [ v_x   a₂ v_y + b₂ u ]
//! ```

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jet::{Dual3, Jet, Scalar};
use crate::quadrature::gauss_panels;

/// Boundary behaviour that makes the first-and-a-half inequality hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// `u(x, 0) = u(x, p)`.
    Periodic,
    /// `v(x, 0) = 0`.
    Dirichlet,
}

/// Values and first partials of `(u, v)` at a point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PlanarSample {
    pub u: f64,
    pub v: f64,
    pub ux: f64,
    pub uy: f64,
    pub vx: f64,
    pub vy: f64,
}

pub trait PlanarField: Sync {
    fn sample(&self, x: f64, y: f64) -> PlanarSample;
}

/// `(u, v)` from expressions in `x = Var(0)`, `y = Var(1)`.
#[derive(Clone, Debug)]
pub struct ExprPlanarField {
    pub u: Expr,
    pub v: Expr,
}

impl ExprPlanarField {
    pub fn parse(u: &str, v: &str) -> Result<Self> {
        Ok(Self { u: Expr::parse(u, &["x", "y"])?, v: Expr::parse(v, &["x", "y"])? })
    }
}

impl PlanarField for ExprPlanarField {
    fn sample(&self, x: f64, y: f64) -> PlanarSample {
        let vars = [Dual3::var(x, 0), Dual3::var(y, 1)];
        let u = self.u.eval(&vars);
        let v = self.v.eval(&vars);
        PlanarSample { u: u.v, v: v.v, ux: u.d[0], uy: u.d[1], vx: v.d[0], vy: v.d[1] }
    }
}

/// Coefficients `a₁, b₁, a₂, b₂` as expressions in `y = Var(0)`.
#[derive(Clone, Debug)]
pub struct PlanarCoeffs {
    pub a1: Expr,
    pub b1: Expr,
    pub a2: Expr,
    pub b2: Expr,
}

impl PlanarCoeffs {
    /// `a₁ = a₂ = 1`, `b₁ = b₂ = 0`: the Cartesian gradient.
    pub fn unit() -> Self {
        Self { a1: Expr::c(1.0), b1: Expr::c(0.0), a2: Expr::c(1.0), b2: Expr::c(0.0) }
    }

    /// `(α, −κ, α, κ)`.
    pub fn rotating(alpha: Expr, kappa: Expr) -> Self {
        Self { a1: alpha.clone(), b1: -kappa.clone(), a2: alpha, b2: kappa }
    }

    fn at(&self, y: f64) -> [f64; 4] {
        [self.a1.eval(&[y]), self.b1.eval(&[y]), self.a2.eval(&[y]), self.b2.eval(&[y])]
    }

    /// Rejects a zero or a sign change of `a₁` or `a₂` along sorted `ys`.
    fn check(&self, ys: impl Iterator<Item = f64>) -> Result<()> {
        let mut prev: Option<(f64, [f64; 4])> = None;
        for y in ys {
            let c = self.at(y);
            let (a1, a2) = (c[0], c[2]);
            if a1 == 0.0 || a2 == 0.0 || !a1.is_finite() || !a2.is_finite() {
                return Err(Error::CoeffVanishes(y));
            }
            if let Some((y0, c0)) = prev {
                if c0[0].signum() != a1.signum() || c0[2].signum() != a2.signum() {
                    return Err(Error::CoeffVanishes(0.5 * (y0 + y)));
                }
            }
            prev = Some((y, c));
        }
        Ok(())
    }
}

/// `G` at one point.
pub fn planar_gradient(f: &dyn PlanarField, c: &PlanarCoeffs, x: f64, y: f64) -> [[f64; 2]; 2] {
    let s = f.sample(x, y);
    let [a1, b1, a2, b2] = c.at(y);
    [[s.ux, a1 * s.uy + b1 * s.v], [s.vx, a2 * s.vy + b2 * s.u]]
}

/// Squared norms over `R_h`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PlanarNorms {
    pub g_sq: f64,
    pub e_sq: f64,
    pub u_sq: f64,
    pub v_sq: f64,
}

impl PlanarNorms {
    pub fn phi_sq(&self) -> f64 {
        self.u_sq + self.v_sq
    }
}

/// Gauss–Legendre panels on `R_h`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlanarQuadrature {
    pub x_panels: usize,
    pub y_panels: usize,
    pub nodes: usize,
}

impl Default for PlanarQuadrature {
    fn default() -> Self {
        Self { x_panels: 2, y_panels: 32, nodes: 6 }
    }
}

pub fn planar_forms(
    f: &dyn PlanarField,
    c: &PlanarCoeffs,
    h: f64,
    p: f64,
    q: &PlanarQuadrature,
) -> Result<PlanarNorms> {
    let rx = gauss_panels(q.x_panels, q.nodes, -0.5 * h, 0.5 * h);
    let ry = gauss_panels(q.y_panels, q.nodes, 0.0, p);
    c.check(core::iter::once(0.0).chain(ry.nodes.iter().copied()).chain([p]))?;
    let mut n = PlanarNorms::default();
    for (y, wy) in ry.iter() {
        for (x, wx) in rx.iter() {
            let w = wx * wy;
            let s = f.sample(x, y);
            let g = planar_gradient(f, c, x, y);
            let off = 0.5 * (g[0][1] + g[1][0]);
            n.g_sq += w * g.iter().flatten().map(|v| v * v).sum::<f64>();
            n.e_sq += w * (g[0][0].powi(2) + g[1][1].powi(2) + 2.0 * off * off);
            n.u_sq += w * s.u * s.u;
            n.v_sq += w * s.v * s.v;
        }
    }
    Ok(n)
}

/// Largest violation of the variant's boundary condition on 64 x-samples.
pub fn variant_error(f: &dyn PlanarField, variant: Variant, h: f64, p: f64) -> f64 {
    (0..64)
        .map(|i| {
            let x = -0.5 * h + h * (i as f64 + 0.5) / 64.0;
            match variant {
                Variant::Periodic => (f.sample(x, 0.0).u - f.sample(x, p).u).abs(),
                Variant::Dirichlet => f.sample(x, 0.0).v.abs(),
            }
        })
        .fold(0.0, f64::max)
}

/// Ratio of `‖G‖²` to the right-hand side of the first-and-a-half bound:
/// `‖u‖‖E‖/h + ‖E‖² + ‖φ‖²` (periodic) or `‖E‖(‖u‖/h + ‖E‖)` (Dirichlet).
pub fn korn15_ratio(
    f: &dyn PlanarField,
    c: &PlanarCoeffs,
    h: f64,
    p: f64,
    variant: Variant,
    q: &PlanarQuadrature,
) -> Result<f64> {
    let err = variant_error(f, variant, h, p);
    if err > 1e-10 {
        return Err(Error::VariantViolation(err));
    }
    let n = planar_forms(f, c, h, p, q)?;
    let (u, e) = (Float::sqrt(n.u_sq), Float::sqrt(n.e_sq));
    let den = match variant {
        Variant::Periodic => u * e / h + n.e_sq + n.phi_sq(),
        Variant::Dirichlet => e * (u / h + e),
    };
    if den == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(n.g_sq / den)
}

/// Truncated Fourier series `Σ (c_k cos(ωk y) + s_k sin(ωk y))`.
#[derive(Clone, Debug, PartialEq)]
struct Series {
    omega: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl Series {
    fn random(rng: &mut ChaCha8Rng, modes: usize, omega: f64, with_cos: bool, with_sin: bool) -> Self {
        let mut draw = |on: bool| -> Vec<f64> {
            (0..=modes).map(|k| if on { rng.gen_range(-1.0..1.0) / (1.0 + k as f64) } else { 0.0 }).collect()
        };
        let cos = draw(with_cos);
        let mut sin = draw(with_sin);
        sin[0] = 0.0;
        Self { omega, cos, sin }
    }

    /// Value and first two derivatives.
    fn eval(&self, y: f64) -> [f64; 3] {
        let mut out = [0.0; 3];
        for k in 0..self.cos.len() {
            let w = self.omega * k as f64;
            let (s, c) = Float::sin_cos(w * y);
            out[0] += self.cos[k] * c + self.sin[k] * s;
            out[1] += w * (-self.cos[k] * s + self.sin[k] * c);
            out[2] += -w * w * (self.cos[k] * c + self.sin[k] * s);
        }
        out
    }
}

/// Seeded random admissible field.
///
/// Components are polynomials in the scaled thickness coordinate
/// `s = 2x/h` with Fourier coefficients in `y`, plus a bending part
/// `(w, −x w')` that realises the worst case of the inequality.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomPlanarField {
    h: f64,
    u_terms: Vec<Series>,
    v_terms: Vec<Series>,
    bend: Series,
    bend_weight: f64,
}

impl RandomPlanarField {
    pub fn new(seed: u64, h: f64, p: f64, variant: Variant) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let omega = match variant {
            Variant::Periodic => 2.0 * PI / p,
            Variant::Dirichlet => PI / p,
        };
        let modes = 4;
        let u_terms = (0..3).map(|_| Series::random(&mut rng, modes, omega, true, variant == Variant::Dirichlet)).collect();
        // Dirichlet: v is a sine series, so v(x, 0) = 0
        let v_terms =
            (0..3).map(|_| Series::random(&mut rng, modes, omega, variant == Variant::Periodic, true)).collect();
        // w' must vanish at y = 0 in the Dirichlet case: cosine series
        let bend = Series::random(&mut rng, modes, omega, true, variant == Variant::Periodic);
        let mix: f64 = rng.gen_range(0.0..1.0);
        let bend_weight = if mix < 0.5 { 1.0 / h } else { mix };
        Self { h, u_terms, v_terms, bend, bend_weight }
    }
}

impl PlanarField for RandomPlanarField {
    fn sample(&self, x: f64, y: f64) -> PlanarSample {
        let s = 2.0 * x / self.h;
        let ds = 2.0 / self.h;
        let mut out = PlanarSample::default();
        let mut pow = 1.0;
        let mut dpow = 0.0;
        for (k, (ut, vt)) in self.u_terms.iter().zip(&self.v_terms).enumerate() {
            let (a, b) = (ut.eval(y), vt.eval(y));
            out.u += pow * a[0];
            out.uy += pow * a[1];
            out.ux += dpow * ds * a[0];
            out.v += pow * b[0];
            out.vy += pow * b[1];
            out.vx += dpow * ds * b[0];
            dpow = (k + 1) as f64 * pow;
            pow *= s;
        }
        let w = self.bend.eval(y);
        let m = self.bend_weight;
        out.u += m * w[0];
        out.uy += m * w[1];
        out.v -= m * x * w[1];
        out.vx -= m * w[1];
        out.vy -= m * x * w[2];
        out
    }
}

/// Node grid on `R_h` for harmonic extension.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid2 {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub p: f64,
}

impl Grid2 {
    pub fn x(&self, i: usize) -> f64 {
        -0.5 * self.h + self.h * i as f64 / (self.nx - 1) as f64
    }
    pub fn y(&self, j: usize) -> f64 {
        self.p * j as f64 / (self.ny - 1) as f64
    }
    pub fn dx(&self) -> f64 {
        self.h / (self.nx - 1) as f64
    }
    pub fn dy(&self) -> f64 {
        self.p / (self.ny - 1) as f64
    }
    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }
    fn boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.nx - 1 || j == self.ny - 1
    }
}

/// Nodal values on a [`Grid2`], row-major in y.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField2 {
    pub grid: Grid2,
    pub values: Vec<f64>,
}

impl GridField2 {
    pub fn sample(grid: Grid2, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = vec![0.0; grid.nx * grid.ny];
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                values[grid.idx(i, j)] = f(grid.x(i), grid.y(j));
            }
        }
        Self { grid, values }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    /// Five-point Laplacian at an interior node.
    pub fn laplacian(&self, i: usize, j: usize) -> f64 {
        let (dx, dy) = (self.grid.dx(), self.grid.dy());
        (self.at(i + 1, j) - 2.0 * self.at(i, j) + self.at(i - 1, j)) / (dx * dx)
            + (self.at(i, j + 1) - 2.0 * self.at(i, j) + self.at(i, j - 1)) / (dy * dy)
    }

    /// Largest interior Laplacian relative to the field's value scale over
    /// `min(dx, dy)²`.
    pub fn harmonic_residual(&self) -> f64 {
        let g = self.grid;
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let d2 = g.dx().min(g.dy()).powi(2);
        let mut r: f64 = 0.0;
        for j in 1..g.ny - 1 {
            for i in 1..g.nx - 1 {
                r = r.max(self.laplacian(i, j).abs());
            }
        }
        r * d2 / scale
    }

    /// Discrete Dirichlet energy `Σ_cells (|D_x w|² + |D_y w|²) dx dy`,
    /// cell differences averaged over the two opposite edges.
    pub fn dirichlet_energy(&self) -> f64 {
        let (x2, y2) = self.cell_energies();
        x2 + y2
    }

    /// `(‖w_x‖², ‖w_y‖²)` from cell differences.
    pub fn cell_energies(&self) -> (f64, f64) {
        let g = self.grid;
        let (dx, dy) = (g.dx(), g.dy());
        let (mut ex, mut ey) = (0.0, 0.0);
        for j in 0..g.ny - 1 {
            for i in 0..g.nx - 1 {
                let wx0 = (self.at(i + 1, j) - self.at(i, j)) / dx;
                let wx1 = (self.at(i + 1, j + 1) - self.at(i, j + 1)) / dx;
                let wy0 = (self.at(i, j + 1) - self.at(i, j)) / dy;
                let wy1 = (self.at(i + 1, j + 1) - self.at(i + 1, j)) / dy;
                ex += 0.5 * (wx0 * wx0 + wx1 * wx1) * dx * dy;
                ey += 0.5 * (wy0 * wy0 + wy1 * wy1) * dx * dy;
            }
        }
        (ex, ey)
    }

    /// `‖w‖²` by the trapezoid rule.
    pub fn l2_sq(&self) -> f64 {
        let g = self.grid;
        let mut s = 0.0;
        for j in 0..g.ny {
            for i in 0..g.nx {
                let wi = if i == 0 || i == g.nx - 1 { 0.5 } else { 1.0 };
                let wj = if j == 0 || j == g.ny - 1 { 0.5 } else { 1.0 };
                s += wi * wj * self.at(i, j).powi(2);
            }
        }
        s * g.dx() * g.dy()
    }
}

/// Solves the five-point Dirichlet problem with the boundary values of
/// `boundary` by conjugate gradients.
pub fn harmonic_extension(boundary: &GridField2, tol: f64, maxit: usize) -> Result<GridField2> {
    let g = boundary.grid;
    if g.nx < 3 || g.ny < 3 {
        return Err(Error::ResolutionTooLow("harmonic extension needs 3×3 nodes"));
    }
    let (cx, cy) = (1.0 / (g.dx() * g.dx()), 1.0 / (g.dy() * g.dy()));
    let (mx, my) = (g.nx - 2, g.ny - 2);
    let n = mx * my;
    let id = |i: usize, j: usize| (j - 1) * mx + (i - 1);
    // -Δ w = 0 with known boundary moved to the right-hand side
    let mut rhs = vec![0.0; n];
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            let mut r = 0.0;
            for (ii, jj, c) in [(i - 1, j, cx), (i + 1, j, cx), (i, j - 1, cy), (i, j + 1, cy)] {
                if g.boundary(ii, jj) {
                    r += c * boundary.at(ii, jj);
                }
            }
            rhs[id(i, j)] = r;
        }
    }
    let apply = |x: &[f64], y: &mut [f64]| {
        for j in 1..g.ny - 1 {
            for i in 1..g.nx - 1 {
                let mut v = 2.0 * (cx + cy) * x[id(i, j)];
                if i > 1 {
                    v -= cx * x[id(i - 1, j)];
                }
                if i < g.nx - 2 {
                    v -= cx * x[id(i + 1, j)];
                }
                if j > 1 {
                    v -= cy * x[id(i, j - 1)];
                }
                if j < g.ny - 2 {
                    v -= cy * x[id(i, j + 1)];
                }
                y[id(i, j)] = v;
            }
        }
    };
    let diag = 2.0 * (cx + cy);
    let mut x: Vec<f64> = rhs.iter().map(|r| r / diag).collect();
    let mut ax = vec![0.0; n];
    apply(&x, &mut ax);
    let mut r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut z: Vec<f64> = r.iter().map(|v| v / diag).collect();
    let mut d = z.clone();
    let bnorm = Float::sqrt(rhs.iter().map(|v| v * v).sum::<f64>()).max(f64::MIN_POSITIVE);
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ad = vec![0.0; n];
    let mut done = false;
    for _ in 0..maxit {
        let rn = Float::sqrt(r.iter().map(|v| v * v).sum::<f64>());
        if rn <= tol * bnorm {
            done = true;
            break;
        }
        apply(&d, &mut ad);
        let alpha = rz / d.iter().zip(&ad).map(|(a, b)| a * b).sum::<f64>();
        for k in 0..n {
            x[k] += alpha * d[k];
            r[k] -= alpha * ad[k];
            z[k] = r[k] / diag;
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            d[k] = z[k] + beta * d[k];
        }
    }
    if !done {
        let rn = Float::sqrt(r.iter().map(|v| v * v).sum::<f64>());
        if rn > tol * bnorm {
            return Err(Error::NonConvergence { iterations: maxit, residual: rn / bnorm });
        }
    }
    let mut out = boundary.clone();
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            out.values[g.idx(i, j)] = x[id(i, j)];
        }
    }
    Ok(out)
}

/// `(2√3/h)‖w‖‖w_x‖ + ‖w_x‖² − ‖w_y‖²` for a closed-form harmonic `w(x, y)`
/// on `R_h`; the expression uses `x = Var(0)`, `y = Var(1)`.
pub fn harmonic_gap(w: &Expr, h: f64, p: f64) -> Result<f64> {
    let rx = gauss_panels(4, 8, -0.5 * h, 0.5 * h);
    let ry = gauss_panels(64, 8, 0.0, p);
    let (mut w2, mut wx2, mut wy2, mut lap, mut scale) = (0.0, 0.0, 0.0, 0.0f64, 0.0f64);
    for (y, wy) in ry.iter() {
        for (x, wxw) in rx.iter() {
            let j = w.eval(&[Jet::theta(x).truncated(2), Jet::z(y).truncated(2)]);
            let wt = wxw * wy;
            w2 += wt * j.value().powi(2);
            wx2 += wt * j.d(1, 0).powi(2);
            wy2 += wt * j.d(0, 1).powi(2);
            lap = lap.max((j.d(2, 0) + j.d(0, 2)).abs());
            scale = scale.max(j.d(2, 0).abs()).max(j.d(0, 2).abs());
        }
    }
    if lap > 1e-8 * scale.max(f64::MIN_POSITIVE) && lap > 1e-300 {
        return Err(Error::NotHarmonic(lap / scale));
    }
    Ok(2.0 * Float::sqrt(3.0) / h * Float::sqrt(w2) * Float::sqrt(wx2) + wx2 - wy2)
}

/// Grid version of [`harmonic_gap`] with discrete norms.
pub fn harmonic_gap_grid(w: &GridField2) -> Result<f64> {
    let r = w.harmonic_residual();
    if r > 1e-8 {
        return Err(Error::NotHarmonic(r));
    }
    let (wx2, wy2) = w.cell_energies();
    let w2 = w.l2_sq();
    Ok(2.0 * Float::sqrt(3.0) / w.grid.h * Float::sqrt(w2) * Float::sqrt(wx2) + wx2 - wy2)
}

/// Separable harmonics `T(ky) H(kx)`, `k = 2πn/p`, `T ∈ {cos, sin}`,
/// `H ∈ {cosh, sinh}`.
pub fn separable_harmonics(p: f64, n_max: usize) -> Vec<Expr> {
    use crate::expr::Func;
    let mut out = Vec::new();
    for n in 1..=n_max {
        let k = 2.0 * PI * n as f64 / p;
        for t in [Func::Cos, Func::Sin] {
            for hf in [Func::Cosh, Func::Sinh] {
                let ty = Expr::call(t, Expr::c(k) * Expr::var(1));
                let hx = Expr::call(hf, Expr::c(k) * Expr::var(0));
                out.push(ty * hx);
            }
        }
    }
    out
}
