//! Cubic splines on uniform grids and monotone cubic interpolation.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::jet::Scalar;

/// Interpolating cubic spline on a uniform grid `x_i = x0 + iΔ`.
///
/// Periodic splines take `n` samples over one period (the sample at `x0 + p`
/// is implied). Non-periodic splines use natural end conditions.
#[derive(Clone, Debug, PartialEq)]
pub struct CubicSpline {
    x0: f64,
    step: f64,
    y: Vec<f64>,
    m: Vec<f64>,
    periodic: bool,
}

impl CubicSpline {
    pub fn periodic(y: Vec<f64>, period: f64) -> Self {
        let n = y.len();
        assert!(n >= 3, "periodic spline needs at least three samples");
        let step = period / n as f64;
        let rhs: Vec<f64> = (0..n)
            .map(|i| {
                let (prev, next) = (y[(i + n - 1) % n], y[(i + 1) % n]);
                6.0 * (next - 2.0 * y[i] + prev) / (step * step)
            })
            .collect();
        let m = solve_cyclic(1.0, 4.0, 1.0, &rhs);
        Self { x0: 0.0, step, y, m, periodic: true }
    }

    pub fn natural(y: Vec<f64>, x0: f64, x1: f64) -> Self {
        let n = y.len();
        assert!(n >= 2);
        let step = (x1 - x0) / (n - 1) as f64;
        let mut m = vec![0.0; n];
        if n > 2 {
            let k = n - 2;
            let mut diag = vec![4.0; k];
            let mut rhs: Vec<f64> =
                (1..n - 1).map(|i| 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (step * step)).collect();
            for i in 1..k {
                let f = 1.0 / diag[i - 1];
                diag[i] -= f;
                rhs[i] -= f * rhs[i - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for i in (0..k - 1).rev() {
                m[i + 1] = (rhs[i] - m[i + 2]) / diag[i];
            }
        }
        Self { x0, step, y, m, periodic: false }
    }

    pub fn period(&self) -> Option<f64> {
        self.periodic.then(|| self.step * self.y.len() as f64)
    }

    pub fn samples(&self) -> &[f64] {
        &self.y
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    fn index(&self, xv: f64) -> usize {
        let n = self.y.len();
        let s = (xv - self.x0) / self.step;
        if self.periodic {
            (Float::floor(crate::wrap(s, n as f64)) as usize).min(n - 1)
        } else {
            (Float::floor(s).max(0.0) as usize).min(n - 2)
        }
    }

    /// Evaluates the spline on any scalar type. Derivative information in
    /// `x` propagates through the local cubic.
    pub fn eval<S: Scalar>(&self, x: S) -> S {
        let n = self.y.len();
        let xv = x.value();
        let i = self.index(xv);
        let j = if self.periodic { (i + 1) % n } else { i + 1 };
        // local coordinate keeps the derivative part of x
        let base = if self.periodic {
            let s = crate::wrap((xv - self.x0) / self.step, n as f64);
            xv - (s - i as f64) * self.step
        } else {
            self.x0 + i as f64 * self.step
        };
        let d = x - base;
        let h = self.step;
        let (yi, yj, mi, mj) = (self.y[i], self.y[j], self.m[i], self.m[j]);
        let b = (yj - yi) / h - h * (2.0 * mi + mj) / 6.0;
        let c3 = (mj - mi) / (6.0 * h);
        // Horner: yi + d (b + d (mi/2 + d c3))
        (((d * c3) + mi * 0.5) * d + b) * d + yi
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x)
    }
}

/// Solves the cyclic tridiagonal system with constant bands.
fn solve_cyclic(a: f64, b: f64, c: f64, rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    // Sherman–Morrison with gamma = -b
    let gamma = -b;
    let mut diag = vec![b; n];
    diag[0] = b - gamma;
    diag[n - 1] = b - a * c / gamma;
    let solve = |r: &[f64]| -> Vec<f64> {
        let mut cp = vec![0.0; n];
        let mut dp = vec![0.0; n];
        cp[0] = c / diag[0];
        dp[0] = r[0] / diag[0];
        for i in 1..n {
            let den = diag[i] - a * cp[i - 1];
            cp[i] = c / den;
            dp[i] = (r[i] - a * dp[i - 1]) / den;
        }
        let mut x = vec![0.0; n];
        x[n - 1] = dp[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = dp[i] - cp[i] * x[i + 1];
        }
        x
    };
    let x = solve(rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = c;
    let z = solve(&u);
    let fact = (x[0] + a * x[n - 1] / gamma) / (1.0 + z[0] + a * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect()
}

/// Monotone piecewise-cubic Hermite interpolant (Fritsch–Carlson slopes).
#[derive(Clone, Debug)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl MonotoneCubic {
    /// `x` strictly increasing, `y` monotone.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        assert!(n >= 2 && y.len() == n);
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
        let mut d = vec![0.0; n];
        d[0] = delta[0];
        d[n - 1] = delta[n - 2];
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] <= 0.0 {
                d[i] = 0.0;
            } else {
                let (h0, h1) = (x[i] - x[i - 1], x[i + 1] - x[i]);
                let w1 = 2.0 * h1 + h0;
                let w2 = h1 + 2.0 * h0;
                d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        Self { x, y, d }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let i = match self.x.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => return self.y[i],
            Err(0) => 0,
            Err(i) if i >= n => n - 2,
            Err(i) => i - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s),
            s * (1.0 - s) * (1.0 - s),
            s * s * (3.0 - 2.0 * s),
            s * s * (s - 1.0),
        );
        h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::Jet;
    use core::f64::consts::PI;

    #[test]
    fn periodic_spline_interpolates_and_converges() {
        let errs: Vec<f64> = [32usize, 64]
            .iter()
            .map(|&n| {
                let y = (0..n).map(|i| (2.0 * PI * i as f64 / n as f64).sin()).collect();
                let s = CubicSpline::periodic(y, 2.0 * PI);
                (0..200)
                    .map(|k| {
                        let x = 0.0314 * k as f64 + 0.01;
                        (s.value(x) - x.sin()).abs()
                    })
                    .fold(0.0, f64::max)
            })
            .collect();
        assert!(errs[0] < 1e-5);
        assert!(errs[0] / errs[1] > 12.0, "fourth-order: {errs:?}");
    }

    #[test]
    fn spline_jet_derivatives_are_piecewise_exact() {
        let y = (0..64).map(|i| (2.0 * PI * i as f64 / 64.0).cos()).collect();
        let s = CubicSpline::periodic(y, 2.0 * PI);
        let j = s.eval(Jet::theta(1.0 + 2.0 * PI));
        assert!((j.d(1, 0) + 1f64.sin()).abs() < 1e-4);
        assert!((j.d(2, 0) + 1f64.cos()).abs() < 5e-3);
        assert_eq!(j.d(4, 0), 0.0);
    }

    #[test]
    fn natural_spline_reproduces_lines() {
        let s = CubicSpline::natural(vec![1.0, 3.0, 5.0, 7.0], 0.0, 3.0);
        assert!((s.value(2.5) - 6.0).abs() < 1e-14);
        assert!((s.value(0.25) - 1.5).abs() < 1e-14);
    }

    #[test]
    fn monotone_cubic_preserves_order() {
        let x = vec![0.0, 1.0, 1.1, 3.0, 3.05, 6.0];
        let y = vec![0.0, 0.1, 2.0, 2.1, 5.0, 5.2];
        let m = MonotoneCubic::new(x, y);
        let mut prev = -1.0;
        for k in 0..=600 {
            let v = m.eval(k as f64 * 0.01);
            assert!(v >= prev - 1e-14);
            prev = v;
        }
    }
}
