mod common;

use common::*;
use num_complex::Complex64 as C;
use qdrd_core::factor::{qdrd_sqrt_free, thin_qr_mgs};
use qdrd_core::mimo::sample_noise;
use qdrd_core::opcount::NullTally;
use qdrd_core::random::{gaussian_matrix, trial_rng};

fn covariance(samples: &[Vec<C>]) -> Dense {
    let k = samples[0].len();
    let mut cov = vec![vec![C::new(0.0, 0.0); k]; k];
    for s in samples {
        for i in 0..k {
            for j in 0..k {
                cov[i][j] += s[i] * s[j].conj();
            }
        }
    }
    let count = samples.len() as f64;
    cov.iter()
        .map(|row| row.iter().map(|z| z / count).collect())
        .collect()
}

/// Largest `|c_ij − e_ij| / sqrt(e_ii e_jj)`.
fn worst_normalized_error(cov: &Dense, expected: &Dense) -> f64 {
    let k = cov.len();
    let mut worst = 0f64;
    for i in 0..k {
        for j in 0..k {
            let scale = (expected[i][i].re * expected[j][j].re).sqrt();
            worst = worst.max((cov[i][j] - expected[i][j]).norm() / scale);
        }
    }
    worst
}

#[test]
fn projected_noise_covariances() {
    let var = 0.5;
    let a = gaussian_matrix(&mut trial_rng(21), 3, 3);
    let qh = adjoint(&dense(&thin_qr_mgs(&mut NullTally, &a).unwrap().q));
    let f = qdrd_sqrt_free(&mut NullTally, &a).unwrap();
    let qph = adjoint(&dense(&f.q_prime));
    let noise = sample_noise(3, var, 99, 40_000);

    let white: Vec<Vec<C>> = noise.iter().map(|w| mat_vec(&qh, w)).collect();
    let coloured: Vec<Vec<C>> = noise.iter().map(|w| mat_vec(&qph, w)).collect();

    let iso = diag(&[var; 3]);
    assert!(worst_normalized_error(&covariance(&white), &iso) < 0.05);
    let shaped: Vec<f64> = f.d_prime.iter().map(|d| var / d).collect();
    assert!(worst_normalized_error(&covariance(&coloured), &diag(&shaped)) < 0.05);
}
