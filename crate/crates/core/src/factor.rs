//! Thin QR (modified Gram-Schmidt), full QR (Householder) and the
//! square-root-free QDRD factorization `A = Q' D' R'`.
//!
//! Conventions shared by all three:
//!
//! * the diagonal of `R` is real and positive (thin and full QR);
//! * `Q' = Q D^-1`, `D' = D^2`, `R' = D^-1 R` where `D = diag(R)`, so the
//!   columns of `Q'` are orthogonal with `Q'^H Q' = D'^-1` and `R'` has a
//!   unit diagonal;
//! * a column is rank deficient when its squared residual norm is at most
//!   [`RANK_TOL`] times `||A||_F^2`.

use crate::error::{Error, Result};
use crate::matrix::{arith, dot, ComplexMatrix, C64};
use crate::opcount::{Phase, Tally};

/// Relative threshold on squared residual column norms.
pub const RANK_TOL: f64 = 1e-24;

/// Thin factorization `A = Q R` with `Q` (m x n) orthonormal columns and
/// `R` (n x n) upper triangular with a real positive diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct QrFactors {
    pub q: ComplexMatrix,
    pub r: ComplexMatrix,
}

/// Full factorization `A = Q̄ R̄` with `Q̄` unitary (m x m) and `R̄` (m x n)
/// zero below row `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct FullQrFactors {
    pub q_bar: ComplexMatrix,
    pub r_bar: ComplexMatrix,
}

impl FullQrFactors {
    /// First `n` columns of `Q̄`.
    pub fn thin_q(&self) -> ComplexMatrix {
        self.q_bar.columns(0, self.r_bar.cols())
    }

    /// The `m - n` trailing columns of `Q̄`, spanning the orthogonal
    /// complement of `range(A)`. `None` when `A` is square.
    pub fn q_tilde(&self) -> Option<ComplexMatrix> {
        let (m, n) = self.r_bar.shape();
        (m > n).then(|| self.q_bar.columns(n, m))
    }

    /// Top `n x n` block of `R̄`.
    pub fn thin_r(&self) -> ComplexMatrix {
        let n = self.r_bar.cols();
        ComplexMatrix::from_fn(n, n, |i, j| self.r_bar[(i, j)])
    }
}

/// Square-root-free factorization `A = Q' diag(d') R'`.
#[derive(Clone, Debug, PartialEq)]
pub struct QdrdFactors {
    /// m x n, orthogonal columns with squared norms `1 / d'`.
    pub q_prime: ComplexMatrix,
    /// Diagonal of `D'`, i.e. the squared diagonal of the thin-QR `R`.
    pub d_prime: Vec<f64>,
    /// n x n upper triangular, unit diagonal.
    pub r_prime: ComplexMatrix,
}

fn check_tall(a: &ComplexMatrix, op: &'static str) -> Result<()> {
    if a.rows() < a.cols() {
        return Err(Error::DimensionMismatch {
            op,
            detail: format!("need rows >= cols, got {}x{}", a.rows(), a.cols()),
        });
    }
    Ok(())
}

fn col_dot<T: Tally + ?Sized>(
    t: &mut T,
    a: &ComplexMatrix,
    i: usize,
    b: &ComplexMatrix,
    j: usize,
) -> C64 {
    let u: Vec<C64> = (0..a.rows()).map(|k| a[(k, i)]).collect();
    let v: Vec<C64> = (0..b.rows()).map(|k| b[(k, j)]).collect();
    dot(t, &u, &v)
}

/// `dst[:, j] -= coef * src`
fn col_axpy<T: Tally + ?Sized>(
    t: &mut T,
    dst: &mut ComplexMatrix,
    j: usize,
    coef: C64,
    src: &[C64],
) {
    for (k, &s) in src.iter().enumerate() {
        let p = arith::mul(t, coef, s);
        dst[(k, j)] = arith::sub(t, dst[(k, j)], p);
    }
}

fn col_scale<T: Tally + ?Sized>(t: &mut T, m: &mut ComplexMatrix, j: usize, s: f64) {
    for k in 0..m.rows() {
        m[(k, j)] = arith::scale(t, m[(k, j)], s);
    }
}

/// Thin QR by modified Gram-Schmidt.
///
/// Projections and squared residual norms are counted under
/// [`Phase::Factorization`]; the square root, reciprocal and column scaling
/// that turn a residual into a unit vector are counted under
/// [`Phase::Normalization`]. That is exactly `n` square roots and `n`
/// divisions in the normalization phase.
pub fn thin_qr_mgs<T: Tally + ?Sized>(t: &mut T, a: &ComplexMatrix) -> Result<QrFactors> {
    check_tall(a, "thin_qr_mgs")?;
    let n = a.cols();
    let threshold = RANK_TOL * a.frobenius_sq();
    let mut q = a.clone();
    let mut r = ComplexMatrix::zeros(n, n);

    for j in 0..n {
        t.set_phase(Phase::Factorization);
        for i in 0..j {
            let rij = col_dot(t, &q, i, &q, j);
            r[(i, j)] = rij;
            let qi = q.column(i);
            col_axpy(t, &mut q, j, rij, &qi);
        }
        let d = col_dot(t, &q, j, &q, j).re;
        if d.is_nan() || d <= threshold {
            return Err(Error::RankDeficient {
                column: j,
                value: d,
            });
        }

        t.set_phase(Phase::Normalization);
        let rjj = arith::sqrt(t, d);
        let inv = arith::recip(t, rjj);
        col_scale(t, &mut q, j, inv);
        r[(j, j)] = C64::new(rjj, 0.0);
    }
    Ok(QrFactors { q, r })
}

/// Square-root-free QDRD by a Gram-Schmidt recurrence on the unnormalized
/// residuals `v_j`:
///
/// ```text
/// d'_j  = v_j^H v_j
/// q'_j  = v_j / d'_j
/// r'_ij = q'_i^H v_j           (i < j, v_j updated after each projection)
/// v_j  <- v_j - r'_ij v_i
/// ```
///
/// Uses one division per column (the reciprocal of `d'_j`) and no square
/// roots. Everything is counted under [`Phase::Factorization`].
pub fn qdrd_sqrt_free<T: Tally + ?Sized>(t: &mut T, a: &ComplexMatrix) -> Result<QdrdFactors> {
    check_tall(a, "qdrd_sqrt_free")?;
    let n = a.cols();
    let threshold = RANK_TOL * a.frobenius_sq();
    let mut v = a.clone();
    let mut q_prime = ComplexMatrix::zeros(a.rows(), n);
    let mut d_prime = Vec::with_capacity(n);
    let mut r_prime = ComplexMatrix::zeros(n, n);

    t.set_phase(Phase::Factorization);
    for j in 0..n {
        for i in 0..j {
            let rij = col_dot(t, &q_prime, i, &v, j);
            r_prime[(i, j)] = rij;
            let vi = v.column(i);
            col_axpy(t, &mut v, j, rij, &vi);
        }
        let d = col_dot(t, &v, j, &v, j).re;
        if d.is_nan() || d <= threshold {
            return Err(Error::RankDeficient {
                column: j,
                value: d,
            });
        }
        let inv = arith::recip(t, d);
        for k in 0..a.rows() {
            q_prime[(k, j)] = arith::scale(t, v[(k, j)], inv);
        }
        d_prime.push(d);
        r_prime[(j, j)] = C64::new(1.0, 0.0);
    }
    Ok(QdrdFactors {
        q_prime,
        d_prime,
        r_prime,
    })
}

/// Recovers the normalized factors from a QDRD: `D = sqrt(D')`,
/// `Q = Q' D`, `R = D R'`. Uses `n` square roots; this is the reference
/// path, not part of any square-root-free pipeline.
pub fn relate_qdrd_to_qr<T: Tally + ?Sized>(t: &mut T, f: &QdrdFactors) -> Result<QrFactors> {
    let n = f.d_prime.len();
    if f.q_prime.cols() != n || f.r_prime.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            op: "relate_qdrd_to_qr",
            detail: format!(
                "Q' is {}x{}, R' is {}x{}, d' has {} entries",
                f.q_prime.rows(),
                f.q_prime.cols(),
                f.r_prime.rows(),
                f.r_prime.cols(),
                n
            ),
        });
    }
    if let Some((index, &value)) = f
        .d_prime
        .iter()
        .enumerate()
        .find(|(_, &d)| d.is_nan() || d <= 0.0)
    {
        return Err(Error::NonPositiveWeight { index, value });
    }
    t.set_phase(Phase::Normalization);
    let d: Vec<f64> = f.d_prime.iter().map(|&x| arith::sqrt(t, x)).collect();
    let mut q = f.q_prime.clone();
    for (j, &dj) in d.iter().enumerate() {
        col_scale(t, &mut q, j, dj);
    }
    let mut r = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        r[(i, i)] = C64::new(d[i], 0.0);
        for j in i + 1..n {
            r[(i, j)] = arith::scale(t, f.r_prime[(i, j)], d[i]);
        }
    }
    Ok(QrFactors { q, r })
}

/// Full QR by Householder reflections, re-phased so that the first `n`
/// diagonal entries of `R̄` are real and nonnegative. Rank-deficient input
/// is accepted (a zero diagonal entry is left as zero).
pub fn full_qr_householder<T: Tally + ?Sized>(
    t: &mut T,
    a: &ComplexMatrix,
) -> Result<FullQrFactors> {
    check_tall(a, "full_qr_householder")?;
    let (m, n) = a.shape();
    let mut r = a.clone();
    let mut q = ComplexMatrix::identity(m);
    t.set_phase(Phase::Factorization);

    for k in 0..n {
        let x: Vec<C64> = (k..m).map(|i| r[(i, k)]).collect();
        let tail: f64 = x[1..].iter().map(|z| z.norm_sqr()).sum();
        if tail == 0.0 {
            // already triangular in this column
            continue;
        }
        let xsq = crate::matrix::sq_norm2(t, &x);
        let xnorm = arith::sqrt(t, xsq);
        let x0sq = arith::abs_sq(t, x[0]);
        let x0abs = arith::sqrt(t, x0sq);
        let phase = if x0abs > 0.0 {
            let inv = arith::recip(t, x0abs);
            arith::scale(t, x[0], inv)
        } else {
            C64::new(1.0, 0.0)
        };
        // v = x + phase * ||x|| e1 avoids cancellation in v[0]
        let mut v = x;
        let shift = arith::scale(t, phase, xnorm);
        v[0] = arith::add(t, v[0], shift);
        let vnorm2 = crate::matrix::sq_norm2(t, &v);
        let inv = arith::recip(t, vnorm2);
        let beta = arith::rmul(t, 2.0, inv);

        // R[k.., k..] <- (I - beta v v^H) R[k.., k..]
        for j in k..n {
            let col: Vec<C64> = (k..m).map(|i| r[(i, j)]).collect();
            let vc = dot(t, &v, &col);
            let s = arith::scale(t, vc, beta);
            for (off, &vi) in v.iter().enumerate() {
                let p = arith::mul(t, s, vi);
                r[(k + off, j)] = arith::sub(t, r[(k + off, j)], p);
            }
        }
        for i in k + 1..m {
            r[(i, k)] = C64::new(0.0, 0.0);
        }
        // Q <- Q (I - beta v v^H)
        for i in 0..m {
            let row: Vec<C64> = (k..m).map(|c| q[(i, c)].conj()).collect();
            // s = Q[i, k..] v
            let qv = dot(t, &row, &v);
            let s = arith::scale(t, qv, beta);
            for (off, &vi) in v.iter().enumerate() {
                let p = arith::mul(t, s, vi.conj());
                q[(i, k + off)] = arith::sub(t, q[(i, k + off)], p);
            }
        }
    }

    for k in 0..n {
        let rkk = r[(k, k)];
        let rsq = arith::abs_sq(t, rkk);
        let mag = arith::sqrt(t, rsq);
        if mag == 0.0 {
            continue;
        }
        let inv = arith::recip(t, mag);
        let p = arith::scale(t, rkk, inv);
        for i in 0..m {
            q[(i, k)] = arith::mul(t, q[(i, k)], p);
        }
        for j in k..n {
            r[(k, j)] = arith::conj_mul(t, p, r[(k, j)]);
        }
        r[(k, k)] = C64::new(mag, 0.0);
    }

    Ok(FullQrFactors { q_bar: q, r_bar: r })
}
