//! Experiment harness around `shellkorn-core`: configuration and curve
//! files, thickness sweeps run in parallel, exponent fits, CSV/SVG reports
//! and binary dumps of assembled form pairs.

pub mod checks;
pub mod config;
pub mod curve_file;
pub mod error;
pub mod fit;
pub mod kslf;
pub mod report;
pub mod surface;
pub mod sweep;

pub use config::{ExperimentConfig, Mode};
pub use error::{LabError, Result};
pub use fit::{fit_exponent, FitResult};
pub use report::emit_report;
pub use sweep::{run_sweep, SweepResult, SweepRow};
