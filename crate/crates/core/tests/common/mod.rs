//! Naive reference arithmetic, written without the library's kernels.

#![allow(dead_code)]

use num_complex::Complex64 as C;
use qdrd_core::matrix::ComplexMatrix;

pub type Dense = Vec<Vec<C>>;

pub fn dense(a: &ComplexMatrix) -> Dense {
    (0..a.rows()).map(|i| a.row(i).to_vec()).collect()
}

pub fn mul(a: &Dense, b: &Dense) -> Dense {
    let (m, k, n) = (a.len(), b.len(), b[0].len());
    let mut out = vec![vec![C::new(0.0, 0.0); n]; m];
    for i in 0..m {
        for j in 0..n {
            for l in 0..k {
                out[i][j] += a[i][l] * b[l][j];
            }
        }
    }
    out
}

pub fn adjoint(a: &Dense) -> Dense {
    let (m, n) = (a.len(), a[0].len());
    (0..n)
        .map(|j| (0..m).map(|i| a[i][j].conj()).collect())
        .collect()
}

pub fn scale_cols(a: &Dense, d: &[f64]) -> Dense {
    a.iter()
        .map(|row| row.iter().zip(d).map(|(z, s)| z * s).collect())
        .collect()
}

pub fn eye(n: usize) -> Dense {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| C::new(if i == j { 1.0 } else { 0.0 }, 0.0))
                .collect()
        })
        .collect()
}

pub fn diag(d: &[f64]) -> Dense {
    let mut out = eye(d.len());
    for (i, &v) in d.iter().enumerate() {
        out[i][i] = C::new(v, 0.0);
    }
    out
}

pub fn frob(a: &Dense) -> f64 {
    a.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frob_diff(a: &Dense, b: &Dense) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// `‖a − b‖_F / max(‖b‖_F, 1)`.
pub fn rel_err(a: &Dense, b: &Dense) -> f64 {
    frob_diff(a, b) / frob(b).max(1.0)
}

pub fn is_upper(a: &Dense, tol: f64) -> bool {
    a.iter()
        .enumerate()
        .all(|(i, row)| row.iter().take(i.min(row.len())).all(|z| z.norm() <= tol))
}

pub fn mat_vec(a: &Dense, x: &[C]) -> Vec<C> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum())
        .collect()
}

pub fn residual_sq(a: &Dense, x: &[C], y: &[C]) -> f64 {
    mat_vec(a, x)
        .iter()
        .zip(y)
        .map(|(ax, yi)| (yi - ax).norm_sqr())
        .sum()
}
