mod common;

use common::*;
use num_complex::Complex64 as C;
use qdrd_core::factor::thin_qr_mgs;
use qdrd_core::lsq::{solve_ls_qdrd, solve_ls_qr};
use qdrd_core::matrix::ComplexMatrix;
use qdrd_core::opcount::{NullTally, OpCounter, Phase};
use qdrd_core::random::{gaussian_matrix, gaussian_vector, trial_rng};

/// Random tall system whose triangular factor is not close to singular.
fn well_conditioned(seed: u64) -> (ComplexMatrix, Vec<C>) {
    let mut rng = trial_rng(seed);
    loop {
        let m = 2 + (seed % 7) as usize;
        let n = 1 + (seed / 7 % m as u64) as usize;
        let a = gaussian_matrix(&mut rng, m, n);
        let y = gaussian_vector(&mut rng, m).to_vec();
        let r = thin_qr_mgs(&mut NullTally, &a).unwrap().r;
        let diag: Vec<f64> = (0..n).map(|k| r[(k, k)].re).collect();
        let (lo, hi) = diag
            .iter()
            .fold((f64::MAX, 0f64), |(l, h), &d| (l.min(d), h.max(d)));
        if lo >= 1e-2 * hi {
            return (a, y);
        }
    }
}

#[test]
fn both_paths_agree_and_satisfy_normal_equations() {
    for seed in 0..300 {
        let (a, y) = well_conditioned(seed);
        let qr = solve_ls_qr(&mut NullTally, &a, &y).unwrap();
        let qdrd = solve_ls_qdrd(&mut NullTally, &a, &y).unwrap();
        assert!(qr.x_star.max_abs_diff(&qdrd.x_star) <= 1e-9, "seed {seed}");

        // A^H (y - A x) = 0 at the minimizer
        let ad = dense(&a);
        let ax = mat_vec(&ad, &qdrd.x_star);
        let res: Vec<C> = y.iter().zip(&ax).map(|(p, q)| p - q).collect();
        let grad = mat_vec(&adjoint(&ad), &res);
        let scale = frob(&ad) * y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(
            grad.iter().all(|g| g.norm() <= 1e-10 * scale.max(1.0)),
            "seed {seed}"
        );

        let direct = residual_sq(&ad, &qr.x_star, &y);
        assert!(
            (qr.residual_sq - direct).abs() <= 1e-9 * direct.max(1.0),
            "seed {seed}"
        );
        assert!(
            (qdrd.residual_sq - direct).abs() <= 1e-9 * direct.max(1.0),
            "seed {seed}"
        );
    }
}

#[test]
fn square_consistent_system_is_solved_exactly() {
    let a = ComplexMatrix::from_real(2, 2, &[3.0, 1.0, 4.0, 2.0]).unwrap();
    let y = [C::new(5.0, 0.0), C::new(8.0, 0.0)];
    for sol in [
        solve_ls_qr(&mut NullTally, &a, &y).unwrap(),
        solve_ls_qdrd(&mut NullTally, &a, &y).unwrap(),
    ] {
        // 3 + 2 = 5, 4 + 4 = 8
        assert!((sol.x_star[0] - C::new(1.0, 0.0)).norm() < 1e-12);
        assert!((sol.x_star[1] - C::new(2.0, 0.0)).norm() < 1e-12);
        assert!(sol.residual_sq < 1e-20);
    }
}

#[test]
fn qdrd_path_has_no_roots_and_no_back_substitution_divisions() {
    for seed in 0..50 {
        let (a, y) = well_conditioned(seed);
        let n = a.cols() as u64;
        let mut qr_ops = OpCounter::new();
        solve_ls_qr(&mut qr_ops, &a, &y).unwrap();
        let mut qdrd_ops = OpCounter::new();
        solve_ls_qdrd(&mut qdrd_ops, &a, &y).unwrap();
        assert_eq!(qdrd_ops.total().sqrts, 0);
        assert_eq!(qdrd_ops.get(Phase::BackSubstitution).divs, 0);
        assert_eq!(qr_ops.total().sqrts, n);
        assert_eq!(qr_ops.get(Phase::BackSubstitution).divs, n);
    }
}
