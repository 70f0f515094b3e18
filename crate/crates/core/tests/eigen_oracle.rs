use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shellkorn_core::geometry::{circular_cone, circular_cylinder, ZeroGaussSurface};
use shellkorn_core::operators::{BcTag, ExprField, GradKind};
use shellkorn_core::solver::*;
use shellkorn_core::sparse::Csr;

fn dense(a: &Csr) -> DMatrix<f64> {
    let n = a.dim();
    DMatrix::from_row_slice(n, n, &a.to_dense())
}

/// Smallest eigenvalue of `A x = λ B x` through `B = L Lᵀ`.
fn dense_min_eig(a: &Csr, b: &Csr) -> f64 {
    let l = dense(b).cholesky().expect("B is positive definite").l();
    let li = l.clone().try_inverse().unwrap();
    let c = &li * dense(a) * li.transpose();
    let c = 0.5 * (&c + c.transpose());
    SymmetricEigen::new(c).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

fn small_pair(s: &ZeroGaussSurface, h: f64, bc: BcTag, kind: GradKind) -> FormPair {
    let grid = Grid3::new(s, h, 2, 8, 4).unwrap();
    assemble_forms(s, &grid, h, bc, kind).unwrap()
}

#[test]
fn lobpcg_matches_dense_solve() {
    let cyl = circular_cylinder(1.0, 2.0).unwrap();
    let cone = circular_cone(std::f64::consts::FRAC_PI_4, 1.0, 2.0).unwrap();
    for (s, h) in [(&cyl, 0.1), (&cyl, 0.05), (&cone, 0.1)] {
        for bc in [BcTag::V1, BcTag::V2, BcTag::V3] {
            for kind in [GradKind::Full, GradKind::Simplified] {
                let fp = small_pair(s, h, bc, kind);
                assert!(fp.free_dofs() <= 200, "{} dofs", fp.free_dofs());
                let r = min_generalized_eig(&fp, &EigOptions::default()).unwrap();
                let exact = dense_min_eig(&fp.a_e, &fp.a_g);
                assert!((r.lambda - exact).abs() <= 1e-8 * exact, "{bc:?} {kind:?}: {} vs {exact}", r.lambda);
            }
        }
    }
}

#[test]
fn v1_and_v2_remove_the_expected_dofs() {
    let s = circular_cylinder(1.0, 2.0).unwrap();
    let (nt, nth, nz) = (2, 8, 4);
    let ring = nt * nth;
    let total = 3 * ring * nz;
    let v1 = small_pair(&s, 0.1, BcTag::V1, GradKind::Full);
    let v2 = small_pair(&s, 0.1, BcTag::V2, GradKind::Full);
    // V1: everything at the first end, (u_t, u_θ) at the last
    assert_eq!(v1.free_dofs(), total - 3 * ring - 2 * ring);
    // V2: (u_θ, u_z) at both ends
    assert_eq!(v2.free_dofs(), total - 4 * ring);
    let first_end_ut = (0..ring).map(|node| 3 * node);
    for d in first_end_ut {
        assert!(v1.dof_map[d].is_none() && v2.dof_map[d].is_some());
    }
}

#[test]
fn assembly_is_deterministic() {
    let s = circular_cone(std::f64::consts::FRAC_PI_4, 1.0, 2.0).unwrap();
    let a = small_pair(&s, 0.1, BcTag::V2, GradKind::Full);
    let b = small_pair(&s, 0.1, BcTag::V2, GradKind::Full);
    let ta: Vec<_> = a.a_e.triplets().map(|(i, j, v)| (i, j, v.to_bits())).collect();
    let tb: Vec<_> = b.a_e.triplets().map(|(i, j, v)| (i, j, v.to_bits())).collect();
    assert_eq!(ta, tb);
}

#[test]
fn eigenvalue_bounds_every_interpolated_quotient() {
    let s = circular_cylinder(1.0, 2.0).unwrap();
    let grid = Grid3::new(&s, 0.1, 2, 16, 8).unwrap();
    let fp = assemble_forms(&s, &grid, 0.1, BcTag::V2, GradKind::Full).unwrap();
    let r = min_generalized_eig(&fp, &EigOptions::default()).unwrap();
    assert!(r.lambda > 0.0 && r.lambda <= 1.0);
    let u = ExprField::parse("cos(2*theta)*z*(2-z)", "sin(2*theta)*z*(2-z)", "cos(2*theta)*z*(2-z)").unwrap();
    let x = fp.interpolate(&u);
    assert!(r.lambda <= fp.quotient(&x).unwrap() + 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let x: Vec<f64> = (0..fp.free_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        assert!(r.lambda <= fp.quotient(&x).unwrap() + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn strain_form_is_dominated(seed in any::<u64>()) {
        thread_local! {
            static PAIR: FormPair = {
                let s = circular_cone(std::f64::consts::FRAC_PI_4, 1.0, 2.0).unwrap();
                small_pair(&s, 0.1, BcTag::V2, GradKind::Full)
            };
        }
        PAIR.with(|fp| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<f64> = (0..fp.free_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (e, g) = (fp.a_e.quad(&x), fp.a_g.quad(&x));
            prop_assert!(e >= -1e-14 * g);
            prop_assert!(e <= g * (1.0 + 1e-12));
            Ok(())
        })?;
    }
}
