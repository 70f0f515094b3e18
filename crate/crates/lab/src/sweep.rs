use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use shellkorn_core::ansatz::{
    case1_field, case2_field, default_profile, membrane_residual, oscillating_phi, oscillation_number,
    shell_kirchhoff_field, AnsatzField, BoxBump, ScalarField2,
};
use shellkorn_core::geometry::ZeroGaussSurface;
use shellkorn_core::operators::{korn_functionals, BcTag, GradKind, QuadratureSpec};
use shellkorn_core::solver::{assemble_forms, min_generalized_eig, EigOptions, ResolutionPolicy};
use shellkorn_core::Error as CoreError;

use crate::config::{AnsatzChoice, ExperimentConfig, Mode, Preset, SurfaceSpec};
use crate::error::{LabError, Result};
use crate::fit::{fit_exponent, FitResult};
use crate::kslf;
use crate::surface;

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub h: f64,
    pub n: u32,
    pub mode: Mode,
    pub bc: BcTag,
    pub kind: GradKind,
    /// Rayleigh quotient (ansatz) or smallest eigenvalue (eig).
    pub value: f64,
    pub iters: usize,
    /// Eigen-residual, or the largest off-zz membrane strain of the field.
    pub residual: f64,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    /// Sorted by mode, then by decreasing `h`.
    pub rows: Vec<SweepRow>,
    pub seed: u64,
}

impl SweepResult {
    pub fn rows_for(&self, mode: Mode) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.mode == mode)
    }

    pub fn modes(&self) -> Vec<Mode> {
        let mut m: Vec<Mode> = self.rows.iter().map(|r| r.mode).collect();
        m.dedup();
        m
    }

    pub fn fit(&self, mode: Mode) -> Result<FitResult> {
        let pts: Vec<(f64, f64)> = self.rows_for(mode).map(|r| (r.h, r.value)).collect();
        fit_exponent(&pts)
    }
}

/// Optimal ansatz field for thickness `h` on `s`.
pub fn ansatz_field(s: &ZeroGaussSurface, spec: &SurfaceSpec, choice: AnsatzChoice, h: f64) -> shellkorn_core::Result<AnsatzField> {
    let p = s.period();
    let (zlo, zhi) = s.z_range();
    let flat_strip = match spec {
        SurfaceSpec::Preset(Preset::CylinderFlatPatch { flat, .. }) => Some((0.0, *flat)),
        _ => None,
    };
    let oscillating = |cutoff: Option<BoxBump>| -> Arc<dyn ScalarField2> {
        Arc::new(oscillating_phi(Arc::new(default_profile(s)), h, cutoff))
    };
    let kirchhoff = |support: (f64, f64)| {
        let bump = BoxBump { theta: support, z: (zlo, zhi), period: p };
        shell_kirchhoff_field(s, Arc::new(bump), bump)
    };
    match choice {
        AnsatzChoice::Separable => case1_field(s, oscillating(None)),
        AnsatzChoice::General { interval } => {
            let cutoff = BoxBump { theta: interval, z: (zlo, zhi), period: p };
            case2_field(s, oscillating(Some(cutoff)), interval)
        }
        AnsatzChoice::Kirchhoff { support } => match support.or(flat_strip) {
            Some(sup) => kirchhoff(sup),
            None => Err(CoreError::InvalidArgument("kirchhoff ansatz needs a flat support strip".into())),
        },
        AnsatzChoice::Auto => match (s.separability(), flat_strip) {
            (_, Some(strip)) => kirchhoff(strip),
            (Some(_), None) => case1_field(s, oscillating(None)),
            (None, None) => Err(CoreError::NotSeparable),
        },
    }
}

/// Quadrature used for ansatz quotients.
pub fn ansatz_quadrature(s: &ZeroGaussSurface, f: &AnsatzField) -> QuadratureSpec {
    let q = QuadratureSpec::for_field(s, f);
    match f.case() {
        shellkorn_core::ansatz::AnsatzCase::Kirchhoff => QuadratureSpec { n_theta: q.n_theta.max(2048), z_panels: 32, ..q },
        _ => q,
    }
}

fn ansatz_row(cfg: &ExperimentConfig, s: &ZeroGaussSurface, h: f64) -> shellkorn_core::Result<SweepRow> {
    let start = Instant::now();
    let f = ansatz_field(s, &cfg.surface, cfg.ansatz, h)?;
    let q = ansatz_quadrature(s, &f);
    let kf = korn_functionals(s, &f, h, &q)?;
    let value = match cfg.kind {
        GradKind::Full => kf.q_full,
        GradKind::Simplified => kf.q_simp,
    };
    let residual = membrane_residual(s, &f, 24);
    Ok(SweepRow {
        h,
        n: oscillation_number(h),
        mode: Mode::Ansatz,
        bc: cfg.bc,
        kind: cfg.kind,
        value,
        iters: 0,
        residual,
        wall_ms: if cfg.output.timings { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 },
    })
}

pub fn policy(cfg: &ExperimentConfig) -> ResolutionPolicy {
    let d = ResolutionPolicy::default();
    ResolutionPolicy {
        n_t: cfg.resolution.n_t.unwrap_or(d.n_t),
        n_theta: cfg.resolution.n_theta.or(d.n_theta),
        n_z: cfg.resolution.n_z.unwrap_or(d.n_z),
    }
}

pub fn eig_options(cfg: &ExperimentConfig) -> EigOptions {
    EigOptions { tol: cfg.tol, maxit: cfg.maxit, block: cfg.block, seed: cfg.seed }
}

fn eig_row(cfg: &ExperimentConfig, s: &ZeroGaussSurface, h: f64, index: usize) -> Result<SweepRow> {
    let start = Instant::now();
    if cfg.bc == BcTag::PeriodicOnly {
        return Err(CoreError::InvalidArgument("PeriodicOnly admits rigid motions".into()).into());
    }
    let grid = policy(cfg).grid(s, h)?;
    let fp = assemble_forms(s, &grid, h, cfg.bc, cfg.kind)?;
    if cfg.output.dump {
        let path = cfg.output.dir.join(format!("{}-h{index}.kslf", cfg.output.prefix));
        kslf::write_file(&path, &fp)?;
    }
    let mut r = min_generalized_eig(&fp, &eig_options(cfg))?;
    if cfg.output.timings {
        r.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    }
    Ok(SweepRow {
        h,
        n: oscillation_number(h),
        mode: Mode::Eig,
        bc: cfg.bc,
        kind: cfg.kind,
        value: r.lambda,
        iters: r.iterations,
        residual: r.residual,
        wall_ms: r.wall_ms,
    })
}

fn annotate(h: f64, e: LabError) -> LabError {
    match e {
        LabError::Core(source) => LabError::AtThickness { h, source },
        other => other,
    }
}

/// One row per `(mode, h)`; rows run in parallel on the current rayon pool.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate().map_err(|msg| LabError::config("<config>", 0, msg))?;
    let s = surface::build(&cfg.surface)?;
    if cfg.output.dump {
        std::fs::create_dir_all(&cfg.output.dir).map_err(|e| LabError::io(&cfg.output.dir, e))?;
    }
    let mut modes = cfg.modes.clone();
    modes.sort();
    modes.dedup();
    let tasks: Vec<(Mode, usize, f64)> =
        modes.iter().flat_map(|&m| cfg.h.iter().enumerate().map(move |(i, &h)| (m, i, h))).collect();
    let results: Vec<Result<SweepRow>> = tasks
        .par_iter()
        .map(|&(mode, i, h)| {
            match mode {
                Mode::Ansatz => ansatz_row(cfg, &s, h).map_err(LabError::from),
                Mode::Eig => eig_row(cfg, &s, h, i),
            }
            .map_err(|e| annotate(h, e))
        })
        .collect();
    let mut rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.mode.cmp(&b.mode).then(b.h.total_cmp(&a.h)));
    Ok(SweepResult { rows, seed: cfg.seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Preset;

    fn cylinder(ns: &[u32], modes: Vec<Mode>) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(
            SurfaceSpec::Preset(Preset::CylinderCircular { radius: 1.0, length: 4.0 }),
            ExperimentConfig::h_from_n(ns),
            modes,
        );
        cfg.output.timings = false;
        cfg
    }

    #[test]
    fn ansatz_quotients_fall_with_h() {
        let r = run_sweep(&cylinder(&[2, 3, 4, 5, 6], vec![Mode::Ansatz])).unwrap();
        assert_eq!(r.rows.len(), 5);
        assert!(r.rows.windows(2).all(|w| w[1].value < w[0].value && w[1].h < w[0].h));
        assert!(r.rows.iter().all(|row| row.value > 0.0 && row.value <= 1.0 && row.residual < 1e-10));
        assert_eq!(r.rows.iter().map(|row| row.n).collect::<Vec<_>>(), vec![2, 3, 4, 5, 6]);
    }

    #[test]
    fn rows_are_sorted_by_mode_then_h() {
        let mut cfg = cylinder(&[2, 3, 4], vec![Mode::Eig, Mode::Ansatz]);
        cfg.resolution.n_theta = Some(16);
        cfg.resolution.n_z = Some(8);
        let r = run_sweep(&cfg).unwrap();
        let order: Vec<_> = r.rows.iter().map(|row| (row.mode, row.n)).collect();
        assert_eq!(
            order,
            vec![(Mode::Ansatz, 2), (Mode::Ansatz, 3), (Mode::Ansatz, 4), (Mode::Eig, 2), (Mode::Eig, 3), (Mode::Eig, 4)]
        );
    }

    #[test]
    fn empty_h_list_is_a_config_error() {
        let cfg = cylinder(&[], vec![Mode::Ansatz]);
        assert!(matches!(run_sweep(&cfg), Err(LabError::Config { .. })));
    }

    #[test]
    fn failures_name_the_thickness() {
        let mut cfg = cylinder(&[2], vec![Mode::Ansatz]);
        cfg.ansatz = AnsatzChoice::Kirchhoff { support: Some((0.0, 1.0)) };
        match run_sweep(&cfg) {
            Err(LabError::AtThickness { h, .. }) => assert_eq!(h, 1.0 / 16.0),
            other => panic!("{other:?}"),
        }
    }
}
