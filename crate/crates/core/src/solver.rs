//! Finite-element Korn constants.
//!
//! Displacements are trilinear on a tensor grid in `(t, θ, z)`. Both energy
//! forms use 2×2×2 Gauss points per cell; the gradient entry `(i, k)` is
//! sampled with its θ coordinate moved to the cell midpoint whenever θ is
//! one of `i, k`, and likewise for z. This removes shear and membrane
//! locking of the low-order cell in the thin limit. The smallest generalized
//! eigenvalue of `(A_E, A_G)` is found by LOBPCG with a Cholesky
//! preconditioner.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ansatz::oscillation_number;
use crate::dense::sym_eigen;
use crate::error::{Error, Result};
use crate::geometry::ZeroGaussSurface;
use crate::operators::{check_thickness, BcTag, DisplacementField, GradKind};
use crate::quadrature::gauss_legendre_ref;
use crate::sparse::{Csr, Skyline, Triplets};

/// Tensor-product node grid on the shell.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid3 {
    /// Through-thickness nodes, uniform on `[-h/2, h/2]`.
    pub t: Vec<f64>,
    /// θ nodes; `N_θ` uniform nodes on `[0, p)` when periodic, `N_θ + 1`
    /// on `[0, p]` otherwise.
    pub theta: Vec<f64>,
    pub z: Vec<f64>,
    pub periodic: bool,
    pub period: f64,
    /// Cell quadrature points and weights (including `A_z A_θ`).
    measure: f64,
}

impl Grid3 {
    pub fn new(s: &ZeroGaussSurface, h: f64, n_t: usize, n_theta: usize, n_z: usize) -> Result<Self> {
        if n_t < 2 {
            return Err(Error::ResolutionTooLow("need at least 2 t-nodes"));
        }
        if n_theta < 8 {
            return Err(Error::ResolutionTooLow("need at least 8 theta-nodes"));
        }
        if n_z < 4 {
            return Err(Error::ResolutionTooLow("need at least 4 z-nodes"));
        }
        if !(h > 0.0) {
            return Err(Error::InvalidArgument(alloc::format!("thickness must be positive, got {h}")));
        }
        check_thickness(s, h)?;
        let p = s.period();
        let (lo, hi) = s.z_range();
        let t = (0..n_t).map(|i| -0.5 * h + h * i as f64 / (n_t - 1) as f64).collect();
        let theta = (0..n_theta).map(|i| p * i as f64 / n_theta as f64).collect();
        let z = (0..n_z).map(|i| lo + (hi - lo) * i as f64 / (n_z - 1) as f64).collect();
        let mut g = Self { t, theta, z, periodic: true, period: p, measure: 0.0 };
        g.measure = g.cell_measure(s);
        Ok(g)
    }

    /// Same grid with θ treated as an interval `[0, p]` (one extra node).
    pub fn open_theta(&self, s: &ZeroGaussSurface) -> Self {
        if !self.periodic {
            return self.clone();
        }
        let n = self.theta.len();
        let theta = (0..=n).map(|i| self.period * i as f64 / n as f64).collect();
        let mut g = Self { theta, periodic: false, ..self.clone() };
        g.measure = g.cell_measure(s);
        g
    }

    pub fn node_count(&self) -> usize {
        self.t.len() * self.theta.len() * self.z.len()
    }

    pub fn node_index(&self, it: usize, ith: usize, iz: usize) -> usize {
        (iz * self.theta.len() + ith) * self.t.len() + it
    }

    pub fn theta_step(&self) -> f64 {
        self.theta[1] - self.theta[0]
    }

    pub fn z_step(&self) -> f64 {
        self.z[1] - self.z[0]
    }

    pub fn z_range(&self) -> (f64, f64) {
        (self.z[0], self.z[self.z.len() - 1])
    }

    pub fn thickness(&self) -> f64 {
        self.t[self.t.len() - 1] - self.t[0]
    }

    fn theta_cells(&self) -> usize {
        if self.periodic {
            self.theta.len()
        } else {
            self.theta.len() - 1
        }
    }

    /// Sum of all cell quadrature weights.
    pub fn total_weight(&self) -> f64 {
        self.measure
    }

    fn cell_measure(&self, s: &ZeroGaussSurface) -> f64 {
        let (g, w) = gauss_legendre_ref(2);
        let (dth, dz) = (self.theta_step(), self.z_step());
        let mut total = 0.0;
        for iz in 0..self.z.len() - 1 {
            for ith in 0..self.theta_cells() {
                for (a, wa) in g.iter().zip(&w) {
                    for (b, wb) in g.iter().zip(&w) {
                        let th = self.theta[ith] + 0.5 * dth * (1.0 + a);
                        let z = self.z[iz] + 0.5 * dz * (1.0 + b);
                        let sp = s.point(th, z);
                        total += 0.25 * wa * wb * dth * dz * sp.a_z * sp.a_theta;
                    }
                }
            }
        }
        total * self.thickness()
    }
}

pub fn make_grid(s: &ZeroGaussSurface, h: f64, n_t: usize, n_theta: usize, n_z: usize) -> Result<Grid3> {
    Grid3::new(s, h, n_t, n_theta, n_z)
}

/// Sparse `(A_E, A_G)` on the free degrees of freedom.
#[derive(Clone, Debug)]
pub struct FormPair {
    pub a_e: Csr,
    pub a_g: Csr,
    /// `dof_map[3 * node + component]` is the column of that DOF, or `None`
    /// when the boundary condition removes it.
    pub dof_map: Vec<Option<usize>>,
    pub grid: Grid3,
    pub h: f64,
    pub bc: BcTag,
    pub kind: GradKind,
}

impl FormPair {
    pub fn free_dofs(&self) -> usize {
        self.a_e.dim()
    }

    /// Nodal interpolant restricted to the free DOFs.
    pub fn interpolate(&self, u: &dyn DisplacementField) -> Vec<f64> {
        let g = &self.grid;
        let mut x = vec![0.0; self.free_dofs()];
        for iz in 0..g.z.len() {
            for ith in 0..g.theta.len() {
                for it in 0..g.t.len() {
                    let v = u.sample(g.t[it], g.theta[ith], g.z[iz]).value;
                    let node = g.node_index(it, ith, iz);
                    for (c, vc) in v.iter().enumerate() {
                        if let Some(k) = self.dof_map[3 * node + c] {
                            x[k] = *vc;
                        }
                    }
                }
            }
        }
        x
    }

    /// Expands free DOFs into nodal component arrays.
    pub fn expand(&self, x: &[f64]) -> [Vec<f64>; 3] {
        let n = self.grid.node_count();
        let mut out = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for node in 0..n {
            for (c, o) in out.iter_mut().enumerate() {
                if let Some(k) = self.dof_map[3 * node + c] {
                    o[node] = x[k];
                }
            }
        }
        out
    }

    /// `xᵀA_E x / xᵀA_G x`.
    pub fn quotient(&self, x: &[f64]) -> Result<f64> {
        let g = self.a_g.quad(x);
        if g <= 0.0 {
            return Err(Error::ZeroField);
        }
        Ok(self.a_e.quad(x) / g)
    }
}

fn constrained(bc: BcTag, grid: &Grid3, ith: usize, iz: usize, comp: usize) -> bool {
    let last_z = grid.z.len() - 1;
    let end = iz == 0 || iz == last_z;
    match bc {
        BcTag::PeriodicOnly => false,
        BcTag::V1 => (iz == 0) || (iz == last_z && comp < 2),
        BcTag::V2 => end && comp > 0,
        BcTag::V3 => (end && comp > 0) || (comp == 1 && (ith == 0 || ith == grid.theta.len() - 1)),
    }
}

pub fn assemble_forms(s: &ZeroGaussSurface, grid: &Grid3, h: f64, bc: BcTag, kind: GradKind) -> Result<FormPair> {
    check_thickness(s, h)?;
    let grid = match bc {
        BcTag::V3 => grid.open_theta(s),
        _ => grid.clone(),
    };
    let (nt, nth, nz) = (grid.t.len(), grid.theta.len(), grid.z.len());
    let mut dof_map = vec![None; 3 * grid.node_count()];
    let mut free = 0;
    for iz in 0..nz {
        for ith in 0..nth {
            for it in 0..nt {
                let node = grid.node_index(it, ith, iz);
                for c in 0..3 {
                    if !constrained(bc, &grid, ith, iz, c) {
                        dof_map[3 * node + c] = Some(free);
                        free += 1;
                    }
                }
            }
        }
    }

    let (gp, gw) = gauss_legendre_ref(2);
    let mut te = Triplets::new(free);
    let mut tg = Triplets::new(free);
    let dth = grid.theta_step();
    let dz = grid.z_step();
    // local coordinates in [0, 1]: two Gauss points then the midpoint
    let loc = [0.5 * (1.0 + gp[0]), 0.5 * (1.0 + gp[1]), 0.5];
    for iz in 0..nz - 1 {
        for ith in 0..grid.theta_cells() {
            let geo: [[_; 3]; 3] = core::array::from_fn(|a| {
                core::array::from_fn(|b| s.point(grid.theta[ith] + loc[a] * dth, grid.z[iz] + loc[b] * dz))
            });
            for it in 0..nt - 1 {
                let dt = grid.t[it + 1] - grid.t[it];
                let mut ke = [[0.0; 24]; 24];
                let mut kg = [[0.0; 24]; 24];
                for (qt, wt) in gp.iter().zip(&gw) {
                    let lt = 0.5 * (1.0 + qt);
                    let t = grid.t[it] + lt * dt;
                    for qa in 0..2 {
                        for qb in 0..2 {
                            let sp0 = geo[qa][qb];
                            let w = 0.125 * wt * gw[qa] * gw[qb] * dt * dth * dz * sp0.a_z * sp0.a_theta;
                            let rows = gradient_rows(&geo, qa, qb, lt, dt, dth, dz, t, kind);
                            accumulate(&mut ke, &mut kg, &rows, w);
                        }
                    }
                }
                let nodes: [usize; 8] = core::array::from_fn(|a| {
                    let (at, ath, az) = (a & 1, (a >> 1) & 1, (a >> 2) & 1);
                    grid.node_index(it + at, (ith + ath) % nth, iz + az)
                });
                let dofs: [Option<usize>; 24] = core::array::from_fn(|k| dof_map[3 * nodes[k / 3] + k % 3]);
                for (r, dr) in dofs.iter().enumerate() {
                    let Some(i) = dr else { continue };
                    for (c, dc) in dofs.iter().enumerate() {
                        let Some(j) = dc else { continue };
                        te.push(*i, *j, ke[r][c]);
                        tg.push(*i, *j, kg[r][c]);
                    }
                }
            }
        }
    }
    Ok(FormPair { a_e: te.to_csr(), a_g: tg.to_csr(), dof_map, grid, h, bc, kind })
}

/// Coefficient rows of the nine gradient entries with respect to the 24
/// local DOFs `(node, component)`, node bits `(t, θ, z)`.
#[allow(clippy::too_many_arguments)]
fn gradient_rows(
    geo: &[[crate::geometry::SurfacePoint; 3]; 3],
    qa: usize,
    qb: usize,
    lt: f64,
    dt: f64,
    dth: f64,
    dz: f64,
    t: f64,
    kind: GradKind,
) -> [[[f64; 24]; 3]; 3] {
    let gp = [0.5 * (1.0 - 1.0 / Float::sqrt(3.0)), 0.5 * (1.0 + 1.0 / Float::sqrt(3.0)), 0.5];
    let mut rows = [[[0.0; 24]; 3]; 3];
    for i in 0..3 {
        for k in 0..3 {
            let mid_th = i == 1 || k == 1;
            let mid_z = i == 2 || k == 2;
            let a = if mid_th { 2 } else { qa };
            let b = if mid_z { 2 } else { qb };
            let sp = geo[a][b];
            let (lth, lz) = (gp[a], gp[b]);
            let den = match kind {
                GradKind::Full => sp.a_theta + t * sp.c,
                GradKind::Simplified => sp.a_theta,
            };
            // connection matrix of the θ column
            let conn = [[0.0, -sp.c, 0.0], [sp.c, 0.0, sp.a], [0.0, -sp.a, 0.0]];
            let row = &mut rows[i][k];
            for node in 0..8 {
                let (bt, bth, bz) = (node & 1, (node >> 1) & 1, (node >> 2) & 1);
                let f = |bit: usize, x: f64| if bit == 1 { x } else { 1.0 - x };
                let df = |bit: usize| if bit == 1 { 1.0 } else { -1.0 };
                let (nt_, nth_, nz_) = (f(bt, lt), f(bth, lth), f(bz, lz));
                let n = nt_ * nth_ * nz_;
                match k {
                    0 => row[3 * node + i] += df(bt) / dt * nth_ * nz_,
                    1 => {
                        row[3 * node + i] += nt_ * df(bth) / dth * nz_ / den;
                        for (j, cj) in conn[i].iter().enumerate() {
                            row[3 * node + j] += n * cj / den;
                        }
                    }
                    _ => row[3 * node + i] += nt_ * nth_ * df(bz) / dz / sp.a_z,
                }
            }
        }
    }
    rows
}

fn accumulate(ke: &mut [[f64; 24]; 24], kg: &mut [[f64; 24]; 24], rows: &[[[f64; 24]; 3]; 3], w: f64) {
    for i in 0..3 {
        for k in 0..3 {
            let g = &rows[i][k];
            let nz: Vec<usize> = (0..24).filter(|&r| g[r] != 0.0).collect();
            for &r in &nz {
                for &c in &nz {
                    kg[r][c] += w * g[r] * g[c];
                }
            }
            let sym: [f64; 24] = core::array::from_fn(|r| 0.5 * (rows[i][k][r] + rows[k][i][r]));
            let nz: Vec<usize> = (0..24).filter(|&r| sym[r] != 0.0).collect();
            for &r in &nz {
                for &c in &nz {
                    ke[r][c] += w * sym[r] * sym[c];
                }
            }
        }
    }
}

/// Result of the smallest generalized eigenpair computation.
#[derive(Clone, Debug, PartialEq)]
pub struct EigResult {
    pub lambda: f64,
    /// Minimizer on the free DOFs, `A_G`-normalized.
    pub vector: Vec<f64>,
    pub iterations: usize,
    /// `‖A_E x − λ A_G x‖ / ‖A_G x‖`.
    pub residual: f64,
    /// Filled in by callers that keep time; always 0 here.
    pub wall_ms: f64,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigOptions {
    pub tol: f64,
    pub maxit: usize,
    pub block: usize,
    pub seed: u64,
}

impl Default for EigOptions {
    fn default() -> Self {
        Self { tol: 1e-8, maxit: 500, block: 3, seed: 0x5eed }
    }
}

/// Cholesky factor of `A_E`, shifted by a small multiple of `A_G` when
/// `A_E` is numerically singular.
fn preconditioner(a: &Csr, b: &Csr) -> Result<Skyline> {
    match Skyline::factor(a) {
        Ok(f) => Ok(f),
        Err(_) => {
            let mut shift = 1e-10;
            loop {
                if let Ok(f) = Skyline::factor(&a.add_scaled(b, shift)) {
                    return Ok(f);
                }
                shift *= 100.0;
                if shift > 1.0 {
                    return Err(Error::NotPD { row: 0, pivot: 0.0 });
                }
            }
        }
    }
}

/// Smallest eigenpair of `A_E x = λ A_G x` by locally optimal block
/// preconditioned conjugate gradients.
pub fn min_generalized_eig(fp: &FormPair, opts: &EigOptions) -> Result<EigResult> {
    min_eig_pair(&fp.a_e, &fp.a_g, opts)
}

pub fn min_eig_pair(a: &Csr, b: &Csr, opts: &EigOptions) -> Result<EigResult> {
    let n = a.dim();
    if n == 0 || b.dim() != n {
        return Err(Error::InvalidArgument("empty or mismatched matrices".into()));
    }
    // definiteness probe
    Skyline::factor(b)?;
    let prec = preconditioner(a, b)?;
    let m = opts.block.clamp(1, n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    for xi in x.iter_mut() {
        prec.solve(xi);
    }
    let mut p: Vec<Vec<f64>> = Vec::new();
    let mut lam = vec![f64::INFINITY; m];
    let mut prev = f64::INFINITY;
    let mut ax = vec![0.0; n];
    let mut bx = vec![0.0; n];

    for iter in 0..=opts.maxit {
        // Rayleigh–Ritz on span [X, W, P]
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(3 * m);
        basis.extend(x.iter().cloned());
        let nx = basis.len();
        if iter > 0 {
            for xi in &x {
                a.matvec(xi, &mut ax);
                b.matvec(xi, &mut bx);
                let l = dot(xi, &ax) / dot(xi, &bx);
                let mut r: Vec<f64> = ax.iter().zip(&bx).map(|(u, v)| u - l * v).collect();
                prec.solve(&mut r);
                basis.push(r);
            }
            basis.extend(p.iter().cloned());
        }
        let q = b_orthonormalize(b, basis);
        let k = q.len();
        let aq: Vec<Vec<f64>> = q
            .iter()
            .map(|v| {
                let mut y = vec![0.0; n];
                a.matvec(v, &mut y);
                y
            })
            .collect();
        let mut small = vec![0.0; k * k];
        for i in 0..k {
            for j in i..k {
                let v = dot(&q[i], &aq[j]);
                small[i * k + j] = v;
                small[j * k + i] = v;
            }
        }
        let (vals, vecs) = sym_eigen(&small, k);
        let mk = m.min(k);
        let mut newx = vec![vec![0.0; n]; mk];
        let mut newp = vec![vec![0.0; n]; mk];
        for c in 0..mk {
            for (r, qr) in q.iter().enumerate() {
                let coef = vecs[r * k + c];
                for (o, v) in newx[c].iter_mut().zip(qr) {
                    *o += coef * v;
                }
                // q's first columns span the old X
                if r >= nx.min(k) {
                    for (o, v) in newp[c].iter_mut().zip(qr) {
                        *o += coef * v;
                    }
                }
            }
        }
        x = newx;
        p = newp;
        lam[..mk].copy_from_slice(&vals[..mk]);

        let x0 = &x[0];
        a.matvec(x0, &mut ax);
        b.matvec(x0, &mut bx);
        let l0 = lam[0];
        let res: f64 = ax.iter().zip(&bx).map(|(u, v)| (u - l0 * v).powi(2)).sum::<f64>().sqrt();
        let bnorm: f64 = bx.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rel = res / bnorm;
        let change = (prev - l0).abs() / l0.abs().max(f64::MIN_POSITIVE);
        if iter > 0 && rel < opts.tol && change < opts.tol {
            return Ok(EigResult { lambda: l0, vector: x0.clone(), iterations: iter, residual: rel, wall_ms: 0.0, seed: opts.seed });
        }
        prev = l0;
        if iter == opts.maxit {
            return Err(Error::NonConvergence { iterations: iter, residual: rel });
        }
    }
    unreachable!()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Modified Gram–Schmidt in the `B` inner product, applied twice; drops
/// vectors that are numerically dependent on earlier ones.
fn b_orthonormalize(b: &Csr, vs: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = b.dim();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vs.len());
    let mut bout: Vec<Vec<f64>> = Vec::with_capacity(vs.len());
    let mut bv = vec![0.0; n];
    for mut v in vs {
        b.matvec(&v, &mut bv);
        let norm0 = Float::sqrt(dot(&v, &bv).max(0.0));
        if norm0 == 0.0 || !norm0.is_finite() {
            continue;
        }
        for _ in 0..2 {
            for (q, bq) in out.iter().zip(&bout) {
                let c = dot(&v, bq);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= c * qi;
                }
            }
        }
        b.matvec(&v, &mut bv);
        let norm = Float::sqrt(dot(&v, &bv).max(0.0));
        if norm <= 1e-10 * norm0 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        bv.iter_mut().for_each(|x| *x /= norm);
        out.push(v);
        bout.push(bv.clone());
    }
    out
}

/// Grid sizes as a function of thickness.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResolutionPolicy {
    pub n_t: usize,
    /// Fixed θ-node count; default is `max(32, 16 n(h))`.
    pub n_theta: Option<usize>,
    pub n_z: usize,
}

impl Default for ResolutionPolicy {
    fn default() -> Self {
        Self { n_t: 2, n_theta: None, n_z: 32 }
    }
}

impl ResolutionPolicy {
    pub fn sizes(&self, h: f64) -> (usize, usize, usize) {
        let n_theta = self.n_theta.unwrap_or_else(|| 32.max(16 * oscillation_number(h) as usize));
        (self.n_t, n_theta, self.n_z)
    }

    pub fn grid(&self, s: &ZeroGaussSurface, h: f64) -> Result<Grid3> {
        let (a, b, c) = self.sizes(h);
        make_grid(s, h, a, b, c)
    }
}

/// Discrete Korn constant `min xᵀA_E x / xᵀA_G x` under `bc`.
pub fn korn_constant(
    s: &ZeroGaussSurface,
    h: f64,
    bc: BcTag,
    policy: &ResolutionPolicy,
    kind: GradKind,
    opts: &EigOptions,
) -> Result<EigResult> {
    if bc == BcTag::PeriodicOnly {
        return Err(Error::InvalidArgument("PeriodicOnly admits rigid motions; use V1, V2 or V3".into()));
    }
    let grid = policy.grid(s, h)?;
    let fp = assemble_forms(s, &grid, h, bc, kind)?;
    min_generalized_eig(&fp, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{circular_cone, circular_cylinder};
    use crate::operators::ExprField;
    use core::f64::consts::PI;

    fn diag(v: &[f64]) -> Csr {
        let mut t = Triplets::new(v.len());
        for (i, x) in v.iter().enumerate() {
            t.push(i, i, *x);
        }
        t.to_csr()
    }

    #[test]
    fn grid_measure_closed_forms() {
        let s = circular_cylinder(1.0, 1.0).unwrap();
        let g = make_grid(&s, 0.1, 2, 16, 5).unwrap();
        assert!((g.total_weight() - 2.0 * PI * 0.1).abs() < 1e-12);
        let c = circular_cone(PI / 4.0, 1.0, 2.0).unwrap();
        let g = make_grid(&c, 0.1, 2, 16, 5).unwrap();
        assert!((g.total_weight() - 1.5 * 0.1 * c.period()).abs() < 1e-12);
        assert!(matches!(make_grid(&s, 0.1, 2, 4, 5), Err(Error::ResolutionTooLow(_))));
    }

    #[test]
    fn tiny_v2_dof_count_and_symmetry() {
        let s = circular_cylinder(1.0, 1.0).unwrap();
        let g = make_grid(&s, 0.1, 2, 8, 4).unwrap();
        let g3 = Grid3 { z: vec![0.0, 0.5, 1.0], ..g };
        let fp = assemble_forms(&s, &g3, 0.1, BcTag::V2, GradKind::Full).unwrap();
        assert_eq!(fp.free_dofs(), 80);
        assert!(fp.a_e.asymmetry() < 1e-14 && fp.a_g.asymmetry() < 1e-14);
    }

    #[test]
    fn diagonal_pairs() {
        let r = min_eig_pair(&diag(&[2.0, 5.0]), &diag(&[1.0, 1.0]), &EigOptions::default()).unwrap();
        assert!((r.lambda - 2.0).abs() < 1e-12);
        assert!(r.vector[1].abs() < 1e-6 && (r.vector[0].abs() - 1.0).abs() < 1e-8);
        let a = diag(&[1.0, 2.0, 3.0, 4.0]);
        let r = min_eig_pair(&a, &a, &EigOptions::default()).unwrap();
        assert!((r.lambda - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rigid_rotation_quotient_shrinks_with_refinement() {
        let s = circular_cylinder(1.0, 1.0).unwrap();
        let u = ExprField::parse("0", "1 + t", "0").unwrap();
        let q: Vec<f64> = [16usize, 32]
            .iter()
            .map(|&n| {
                let g = make_grid(&s, 0.1, 2, n, 5).unwrap();
                let fp = assemble_forms(&s, &g, 0.1, BcTag::PeriodicOnly, GradKind::Full).unwrap();
                fp.quotient(&fp.interpolate(&u)).unwrap()
            })
            .collect();
        assert!(q[1] < 0.3 * q[0], "{q:?}");
    }

    #[test]
    fn korn_constant_rejects_periodic_only() {
        let s = circular_cylinder(1.0, 1.0).unwrap();
        let r = korn_constant(&s, 0.1, BcTag::PeriodicOnly, &ResolutionPolicy::default(), GradKind::Full, &EigOptions::default());
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }
}
