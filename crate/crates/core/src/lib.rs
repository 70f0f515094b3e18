//! Numerical laboratory for Korn inequalities on shells of zero Gaussian
//! curvature.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the CLI and sweep
//! orchestration live in the `shellkorn` companion crate.
//!
//! - [`geometry`]: mid-surfaces generated by `(B, a, b, c)`, cylinders and
//!   cones built from curves, embeddings and curvature checks.
//! - [`operators`]: the exact and simplified curvilinear gradients, energy
//!   norms and the Korn functionals.
//! - [`ansatz`]: Kirchhoff plate fields and the oscillating membrane-free
//!   shell fields that realise the optimal scaling.
//! - [`planar`]: the two-dimensional weighted Korn machinery and harmonic
//!   extensions on thin rectangles.
//! - [`solver`]: finite-element forms and the smallest generalized
//!   eigenvalue, i.e. the discrete Korn constant.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod ansatz;
pub mod dense;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod jet;
pub mod operators;
pub mod planar;
pub mod quadrature;
pub mod solver;
pub mod sparse;
pub mod spline;

pub use error::{Error, Result};

/// Wraps `x` into `[0, p)`.
#[inline]
pub fn wrap(x: f64, p: f64) -> f64 {
    let r = x % p;
    if r < 0.0 {
        let w = r + p;
        if w >= p {
            0.0
        } else {
            w
        }
    } else {
        r
    }
}
