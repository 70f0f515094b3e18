use std::path::PathBuf;

use shellkorn_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("{path}:{line}: {msg}")]
    Config { path: String, line: usize, msg: String },
    #[error("{0}")]
    Core(#[from] CoreError),
    #[error("at h = {h}: {source}")]
    AtThickness { h: f64, source: CoreError },
    #[error("need at least 3 rows to fit an exponent, got {0}")]
    InsufficientData(usize),
    #[error("value {value} at h = {h} is not positive")]
    NonPositiveValue { h: f64, value: f64 },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

pub type Result<T> = std::result::Result<T, LabError>;

impl LabError {
    pub(crate) fn config(path: &str, line: usize, msg: impl Into<String>) -> Self {
        LabError::Config { path: path.to_string(), line, msg: msg.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io { path: path.into(), source }
    }

    /// Process exit status for the CLI: 2 for bad input, 3 when a solver
    /// gives up, 4 for geometry that fails validation, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        let core = match self {
            LabError::Config { .. } | LabError::InsufficientData(_) | LabError::NonPositiveValue { .. } => return 2,
            LabError::Io { .. } => return 1,
            LabError::Core(e) | LabError::AtThickness { source: e, .. } => e,
        };
        match core {
            CoreError::NonConvergence { .. } => 3,
            CoreError::PositivityViolation { .. }
            | CoreError::NonPeriodic(_)
            | CoreError::NonClosed(_)
            | CoreError::SelfIntersection(..)
            | CoreError::InvalidCurve(_)
            | CoreError::ApexIncluded(..)
            | CoreError::DegenerateMetric { .. }
            | CoreError::NoEmbedding => 4,
            CoreError::Parse(_) | CoreError::InvalidArgument(_) => 2,
            _ => 1,
        }
    }
}
