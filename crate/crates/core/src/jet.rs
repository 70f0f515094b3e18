//! Forward-mode differentiation types.
//!
//! [`Jet`] is a truncated two-variable Taylor expansion in `(θ, z)` carrying
//! all mixed partials up to [`MAX_ORDER`]. The ansatz constructions divide,
//! multiply and differentiate profile functions several times over, and every
//! partial has to be exact to round-off, so they never touch finite
//! differences. [`Dual3`] carries first partials in `(t, θ, z)` and is what the
//! strain operators consume.

use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_traits::Float;

/// Highest total derivative order tracked by a [`Jet`].
pub const MAX_ORDER: usize = 6;
const NCOEF: usize = (MAX_ORDER + 1) * (MAX_ORDER + 2) / 2;

#[inline]
const fn idx(i: usize, j: usize) -> usize {
    let k = i + j;
    k * (k + 1) / 2 + j
}

const FACT: [f64; MAX_ORDER + 1] = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0];

/// Arithmetic shared by `f64`, [`Jet`] and [`Dual3`], so expression trees and
/// ansatz formulas can be written once and evaluated at any differentiation
/// depth.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn cst(v: f64) -> Self;
    fn value(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn powf(self, p: f64) -> Self;
    fn powi(self, n: i32) -> Self;
    fn recip(self) -> Self;
    fn sinh(self) -> Self {
        let e = self.exp();
        let r = e.recip();
        (e - r) * 0.5
    }
    fn cosh(self) -> Self {
        let e = self.exp();
        let r = e.recip();
        (e + r) * 0.5
    }
    fn tan(self) -> Self {
        self.sin() / self.cos()
    }
}

impl Scalar for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sin(self) -> Self {
        Float::sin(self)
    }
    fn cos(self) -> Self {
        Float::cos(self)
    }
    fn exp(self) -> Self {
        Float::exp(self)
    }
    fn ln(self) -> Self {
        Float::ln(self)
    }
    fn sqrt(self) -> Self {
        Float::sqrt(self)
    }
    fn powf(self, p: f64) -> Self {
        Float::powf(self, p)
    }
    fn powi(self, n: i32) -> Self {
        Float::powi(self, n)
    }
    fn recip(self) -> Self {
        1.0 / self
    }
    fn sinh(self) -> Self {
        Float::sinh(self)
    }
    fn cosh(self) -> Self {
        Float::cosh(self)
    }
    fn tan(self) -> Self {
        Float::tan(self)
    }
}

/// Truncated Taylor expansion in two variables (θ, z).
///
/// Coefficient `(i, j)` stores `∂θ^i ∂z^j f / (i! j!)`. `order` is the highest
/// total order that is still exact; it drops by one with every
/// differentiation and is the minimum of the operands in arithmetic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    order: u8,
    c: [f64; NCOEF],
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; NCOEF];
        c[0] = v;
        Self { order: MAX_ORDER as u8, c }
    }

    /// The independent variable θ evaluated at `theta`.
    pub fn theta(theta: f64) -> Self {
        let mut j = Self::constant(theta);
        j.c[idx(1, 0)] = 1.0;
        j
    }

    /// The independent variable z evaluated at `z`.
    pub fn z(z: f64) -> Self {
        let mut j = Self::constant(z);
        j.c[idx(0, 1)] = 1.0;
        j
    }

    pub fn order(&self) -> usize {
        self.order as usize
    }

    /// Truncates to a lower order; cheaper arithmetic afterwards.
    pub fn truncated(mut self, order: usize) -> Self {
        let order = order.min(self.order as usize);
        for k in order + 1..=MAX_ORDER {
            for j in 0..=k {
                self.c[idx(k - j, j)] = 0.0;
            }
        }
        self.order = order as u8;
        self
    }

    /// `∂θ^i ∂z^j` at the expansion point. Panics if `i + j` exceeds the
    /// exact order.
    pub fn d(&self, i: usize, j: usize) -> f64 {
        assert!(i + j <= self.order as usize, "derivative ({i},{j}) beyond jet order {}", self.order);
        self.c[idx(i, j)] * FACT[i] * FACT[j]
    }

    pub fn dtheta(&self) -> Self {
        self.shifted(1, 0)
    }

    pub fn dz(&self) -> Self {
        self.shifted(0, 1)
    }

    fn shifted(&self, di: usize, dj: usize) -> Self {
        assert!(self.order > 0, "cannot differentiate an order-0 jet");
        let order = self.order as usize - 1;
        let mut c = [0.0; NCOEF];
        for k in 0..=order {
            for j in 0..=k {
                let i = k - j;
                let (si, sj) = (i + di, j + dj);
                let factor = if di == 1 { si as f64 } else { sj as f64 };
                c[idx(i, j)] = factor * self.c[idx(si, sj)];
            }
        }
        Self { order: order as u8, c }
    }

    /// Evaluates `Σ_k f^{(k)}(g₀)/k! δ^k` where `derivs[k] = f^{(k)}(g₀)`.
    pub(crate) fn compose(self, derivs: &[f64; MAX_ORDER + 1]) -> Self {
        let order = self.order as usize;
        let mut delta = self;
        delta.c[0] = 0.0;
        let mut out = Jet::constant(derivs[0]);
        out.order = self.order;
        let mut power = Jet::constant(1.0);
        power.order = self.order;
        for (k, dk) in derivs.iter().enumerate().take(order + 1).skip(1) {
            power = power * delta;
            let coef = dk / FACT[k];
            for n in 0..NCOEF {
                out.c[n] += coef * power.c[n];
            }
        }
        out
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Jet) -> Jet {
        self.order = self.order.min(rhs.order);
        for n in 0..NCOEF {
            self.c[n] += rhs.c[n];
        }
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: Jet) -> Jet {
        self.order = self.order.min(rhs.order);
        for n in 0..NCOEF {
            self.c[n] -= rhs.c[n];
        }
        self
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        for v in self.c.iter_mut() {
            *v = -*v;
        }
        self
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let order = self.order.min(rhs.order) as usize;
        let mut c = [0.0; NCOEF];
        for k in 0..=order {
            for j in 0..=k {
                let i = k - j;
                let mut acc = 0.0;
                for i1 in 0..=i {
                    for j1 in 0..=j {
                        acc += self.c[idx(i1, j1)] * rhs.c[idx(i - i1, j - j1)];
                    }
                }
                c[idx(i, j)] = acc;
            }
        }
        Jet { order: order as u8, c }
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet) -> Jet {
        self * rhs.recip()
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.c[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.c[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, rhs: f64) -> Jet {
        for v in self.c.iter_mut() {
            *v *= rhs;
        }
        self
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self * (1.0 / rhs)
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self = *self + rhs;
    }
}

impl SubAssign for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        *self = *self - rhs;
    }
}

impl MulAssign for Jet {
    fn mul_assign(&mut self, rhs: Jet) {
        *self = *self * rhs;
    }
}

impl Scalar for Jet {
    fn cst(v: f64) -> Self {
        Jet::constant(v)
    }
    fn value(&self) -> f64 {
        self.c[0]
    }
    fn sin(self) -> Self {
        let (s, c) = (Float::sin(self.c[0]), Float::cos(self.c[0]));
        let cycle = [s, c, -s, -c];
        let mut d = [0.0; MAX_ORDER + 1];
        for (k, v) in d.iter_mut().enumerate() {
            *v = cycle[k % 4];
        }
        self.compose(&d)
    }
    fn cos(self) -> Self {
        let (s, c) = (Float::sin(self.c[0]), Float::cos(self.c[0]));
        let cycle = [c, -s, -c, s];
        let mut d = [0.0; MAX_ORDER + 1];
        for (k, v) in d.iter_mut().enumerate() {
            *v = cycle[k % 4];
        }
        self.compose(&d)
    }
    fn exp(self) -> Self {
        self.compose(&[Float::exp(self.c[0]); MAX_ORDER + 1])
    }
    fn ln(self) -> Self {
        let x = self.c[0];
        let mut d = [0.0; MAX_ORDER + 1];
        d[0] = Float::ln(x);
        for k in 1..=MAX_ORDER {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            d[k] = sign * FACT[k - 1] / Float::powi(x, k as i32);
        }
        self.compose(&d)
    }
    fn sqrt(self) -> Self {
        self.powf(0.5)
    }
    fn powf(self, p: f64) -> Self {
        let x = self.c[0];
        let mut d = [0.0; MAX_ORDER + 1];
        let mut falling = 1.0;
        for (k, v) in d.iter_mut().enumerate() {
            *v = falling * Float::powf(x, p - k as f64);
            falling *= p - k as f64;
        }
        self.compose(&d)
    }
    fn powi(self, n: i32) -> Self {
        if n >= 0 {
            let mut out = Jet::constant(1.0);
            out.order = self.order;
            for _ in 0..n {
                out = out * self;
            }
            out
        } else {
            self.powi(-n).recip()
        }
    }
    fn recip(self) -> Self {
        let x = self.c[0];
        let mut d = [0.0; MAX_ORDER + 1];
        for (k, v) in d.iter_mut().enumerate() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            *v = sign * FACT[k] / Float::powi(x, k as i32 + 1);
        }
        self.compose(&d)
    }
    fn sinh(self) -> Self {
        let (s, c) = (Float::sinh(self.c[0]), Float::cosh(self.c[0]));
        let mut d = [0.0; MAX_ORDER + 1];
        for (k, v) in d.iter_mut().enumerate() {
            *v = if k % 2 == 0 { s } else { c };
        }
        self.compose(&d)
    }
    fn cosh(self) -> Self {
        let (s, c) = (Float::sinh(self.c[0]), Float::cosh(self.c[0]));
        let mut d = [0.0; MAX_ORDER + 1];
        for (k, v) in d.iter_mut().enumerate() {
            *v = if k % 2 == 0 { c } else { s };
        }
        self.compose(&d)
    }
}

/// Value plus first partials in `(t, θ, z)`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Dual3 {
    pub v: f64,
    pub d: [f64; 3],
}

impl Dual3 {
    pub fn var(v: f64, k: usize) -> Self {
        let mut d = [0.0; 3];
        d[k] = 1.0;
        Self { v, d }
    }

    fn chain(self, f: f64, df: f64) -> Self {
        Self { v: f, d: [df * self.d[0], df * self.d[1], df * self.d[2]] }
    }
}

impl Add for Dual3 {
    type Output = Dual3;
    fn add(self, r: Dual3) -> Dual3 {
        Dual3 { v: self.v + r.v, d: [self.d[0] + r.d[0], self.d[1] + r.d[1], self.d[2] + r.d[2]] }
    }
}

impl Sub for Dual3 {
    type Output = Dual3;
    fn sub(self, r: Dual3) -> Dual3 {
        Dual3 { v: self.v - r.v, d: [self.d[0] - r.d[0], self.d[1] - r.d[1], self.d[2] - r.d[2]] }
    }
}

impl Mul for Dual3 {
    type Output = Dual3;
    fn mul(self, r: Dual3) -> Dual3 {
        let mut d = [0.0; 3];
        for k in 0..3 {
            d[k] = self.d[k] * r.v + self.v * r.d[k];
        }
        Dual3 { v: self.v * r.v, d }
    }
}

impl Div for Dual3 {
    type Output = Dual3;
    fn div(self, r: Dual3) -> Dual3 {
        let inv = 1.0 / r.v;
        let mut d = [0.0; 3];
        for k in 0..3 {
            d[k] = (self.d[k] - self.v * inv * r.d[k]) * inv;
        }
        Dual3 { v: self.v * inv, d }
    }
}

impl Neg for Dual3 {
    type Output = Dual3;
    fn neg(self) -> Dual3 {
        Dual3 { v: -self.v, d: [-self.d[0], -self.d[1], -self.d[2]] }
    }
}

impl Add<f64> for Dual3 {
    type Output = Dual3;
    fn add(mut self, r: f64) -> Dual3 {
        self.v += r;
        self
    }
}

impl Sub<f64> for Dual3 {
    type Output = Dual3;
    fn sub(mut self, r: f64) -> Dual3 {
        self.v -= r;
        self
    }
}

impl Mul<f64> for Dual3 {
    type Output = Dual3;
    fn mul(self, r: f64) -> Dual3 {
        Dual3 { v: self.v * r, d: [self.d[0] * r, self.d[1] * r, self.d[2] * r] }
    }
}

impl Div<f64> for Dual3 {
    type Output = Dual3;
    fn div(self, r: f64) -> Dual3 {
        self * (1.0 / r)
    }
}

impl Scalar for Dual3 {
    fn cst(v: f64) -> Self {
        Dual3 { v, d: [0.0; 3] }
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn sin(self) -> Self {
        self.chain(Float::sin(self.v), Float::cos(self.v))
    }
    fn cos(self) -> Self {
        self.chain(Float::cos(self.v), -Float::sin(self.v))
    }
    fn exp(self) -> Self {
        let e = Float::exp(self.v);
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(Float::ln(self.v), 1.0 / self.v)
    }
    fn sqrt(self) -> Self {
        let s = Float::sqrt(self.v);
        self.chain(s, 0.5 / s)
    }
    fn powf(self, p: f64) -> Self {
        self.chain(Float::powf(self.v, p), p * Float::powf(self.v, p - 1.0))
    }
    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Dual3::cst(1.0);
        }
        self.chain(Float::powi(self.v, n), n as f64 * Float::powi(self.v, n - 1))
    }
    fn recip(self) -> Self {
        self.chain(1.0 / self.v, -1.0 / (self.v * self.v))
    }
    fn sinh(self) -> Self {
        self.chain(Float::sinh(self.v), Float::cosh(self.v))
    }
    fn cosh(self) -> Self {
        self.chain(Float::cosh(self.v), Float::sinh(self.v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn product_rule_mixed_partials() {
        // f = sin(θ) z² ; ∂θ∂z² f = 2 cos θ
        let th = Jet::theta(0.7);
        let z = Jet::z(1.3);
        let f = th.sin() * z * z;
        assert!(close(f.d(1, 2), 2.0 * 0.7f64.cos(), 1e-14));
        assert!(close(f.d(3, 1), -2.0 * 1.3 * 0.7f64.cos(), 1e-14));
        assert!(close(f.d(0, 3), 0.0, 1e-14));
    }

    #[test]
    fn reciprocal_and_ln_derivatives() {
        let x = Jet::theta(2.0);
        let r = x.recip();
        // d^4/dx^4 (1/x) = 24 / x^5
        assert!(close(r.d(4, 0), 24.0 / 32.0, 1e-13));
        let l = x.ln();
        // d^3/dx^3 ln x = 2/x^3
        assert!(close(l.d(3, 0), 2.0 / 8.0, 1e-13));
        let s = x.sqrt();
        // d^2/dx^2 sqrt x = -1/4 x^{-3/2}
        assert!(close(s.d(2, 0), -0.25 * 2.0f64.powf(-1.5), 1e-13));
    }

    #[test]
    fn differentiation_lowers_order() {
        let f = (Jet::theta(0.3) * Jet::z(0.5)).exp();
        let g = f.dtheta().dz();
        assert_eq!(g.order(), MAX_ORDER - 2);
        // ∂θ∂z e^{θz} = (1 + θz) e^{θz}
        let expect = (1.0 + 0.15) * 0.15f64.exp();
        assert!(close(g.value(), expect, 1e-14));
        assert!(close(g.d(1, 0), f.d(2, 1), 1e-13));
    }

    #[test]
    fn dual_quotient_rule() {
        let t = Dual3::var(0.1, 0);
        let th = Dual3::var(0.4, 1);
        let q = (t + 1.0) / th.cos();
        assert!(close(q.d[0], 1.0 / 0.4f64.cos(), 1e-15));
        assert!(close(q.d[1], 1.1 * 0.4f64.sin() / 0.4f64.cos().powi(2), 1e-14));
        assert_eq!(q.d[2], 0.0);
    }
}
