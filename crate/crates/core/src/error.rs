use alloc::string::String;

use crate::expr::ParseError;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{quantity} = {value} is not positive at theta={theta}, z={z}")]
    PositivityViolation { quantity: &'static str, theta: f64, z: f64, value: f64 },
    #[error("profile {0} is not periodic with the declared period")]
    NonPeriodic(&'static str),
    #[error("curve is not closed: gap {0}")]
    NonClosed(f64),
    #[error("curve self-intersects between segments {0} and {1}")]
    SelfIntersection(usize, usize),
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("z range [{0}, {1}] contains the cone apex")]
    ApexIncluded(f64, f64),
    #[error("z = {0} outside the shell")]
    OutOfDomain(f64),
    #[error("surface has no 3D embedding")]
    NoEmbedding,
    #[error("A_theta + t c = {value} <= 0 at t={t}, theta={theta}")]
    DegenerateMetric { t: f64, theta: f64, value: f64 },
    #[error("field has zero gradient energy")]
    ZeroField,
    #[error("a(theta) and b(theta) are linearly independent")]
    NotSeparable,
    #[error("c(theta) vanishes at theta={0}")]
    ZeroCurvature(f64),
    #[error("rho' vanishes at theta={0} inside the case-2 interval")]
    DegenerateCase2(f64),
    #[error("phi is not supported inside the declared box (|phi| = {0} outside)")]
    SupportViolation(f64),
    #[error("planar coefficient vanishes at y={0}")]
    CoeffVanishes(f64),
    #[error("denominator is zero")]
    ZeroDenominator,
    #[error("field violates its declared boundary variant (error {0})")]
    VariantViolation(f64),
    #[error("no convergence after {iterations} iterations (residual {residual})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("field is not harmonic (scaled Laplacian residual {0})")]
    NotHarmonic(f64),
    #[error("grid resolution too low: {0}")]
    ResolutionTooLow(&'static str),
    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPD { row: usize, pivot: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("expression parse error: {0}")]
    Parse(ParseError),
}

impl From<ParseError> for Error {
    fn from(e: ParseError) -> Self {
        Error::Parse(e)
    }
}
