use rayon::prelude::*;
use shellkorn_core::expr::Expr;
use shellkorn_core::planar::{
    harmonic_gap, korn15_ratio, separable_harmonics, PlanarCoeffs, PlanarQuadrature, RandomPlanarField, Variant,
};

use crate::error::Result;

pub const RATIO_THICKNESSES: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];

#[derive(Clone, Debug, PartialEq)]
pub struct PlanarReport {
    pub harmonics: usize,
    pub min_gap: f64,
    /// `|gap(x) − 2hp|` at `h = 1/8`, `p = 1`.
    pub linear_gap_error: f64,
    pub fields: usize,
    /// `(h, largest ratio over the random fields)`.
    pub max_ratio: Vec<(f64, f64)>,
    pub seed: u64,
}

impl PlanarReport {
    /// Largest ratio relative to the coarsest thickness.
    pub fn worst_growth(&self) -> f64 {
        let base = self.max_ratio[0].1;
        self.max_ratio.iter().map(|(_, r)| r / base).fold(0.0, f64::max)
    }
}

/// Sharp harmonic inequality on separable harmonics for `p ∈ {1, 2π}`,
/// `h ∈ {1, …, 1/64}`, and the Dirichlet ratio on `fields` random fields.
pub fn planar_check(seed: u64, fields: usize) -> Result<PlanarReport> {
    let mut cases = Vec::new();
    for p in [1.0, std::f64::consts::TAU] {
        for w in separable_harmonics(p, 8) {
            for k in 0..=6 {
                cases.push((w.clone(), 0.5f64.powi(k), p));
            }
        }
    }
    let harmonics = cases.len() / 7;
    let gaps = cases.par_iter().map(|(w, h, p)| harmonic_gap(w, *h, *p)).collect::<Vec<_>>();
    let mut min_gap = f64::INFINITY;
    for g in gaps {
        min_gap = min_gap.min(g?);
    }
    let linear_gap_error = (harmonic_gap(&Expr::var(0), 0.125, 1.0)? - 0.25).abs();
    let q = PlanarQuadrature::default();
    let coeffs = PlanarCoeffs::unit();
    let mut max_ratio = Vec::new();
    for h in RATIO_THICKNESSES {
        let ratios = (0..fields as u64)
            .into_par_iter()
            .map(|i| {
                let f = RandomPlanarField::new(seed.wrapping_add(i), h, 1.0, Variant::Dirichlet);
                korn15_ratio(&f, &coeffs, h, 1.0, Variant::Dirichlet, &q)
            })
            .collect::<Vec<_>>();
        let mut m: f64 = 0.0;
        for r in ratios {
            m = m.max(r?);
        }
        max_ratio.push((h, m));
    }
    Ok(PlanarReport { harmonics, min_gap, linear_gap_error, fields, max_ratio, seed })
}
