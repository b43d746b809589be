//! Unconstrained least squares `min ||y - A x||^2` through either
//! factorization.
//!
//! With `A = Q R` the minimizer solves `R x = Q^H y`. With `A = Q' D' R'`
//! the normal equations reduce to `R' x = Q'^H y`: the normalizer cancels
//! and, since `R'` has a unit diagonal, back substitution needs no division.

use crate::error::{Error, Result};
use crate::factor::{qdrd_sqrt_free, thin_qr_mgs};
use crate::matrix::{adjoint_mul_vec, arith, mat_vec, sq_norm2, ComplexMatrix, ComplexVector, C64};
use crate::opcount::{Phase, Tally};

#[derive(Clone, Debug, PartialEq)]
pub struct LsSolution {
    pub x_star: ComplexVector,
    /// `||y - A x_star||^2`
    pub residual_sq: f64,
}

fn check_triangular_system(r: &ComplexMatrix, b: &[C64], op: &'static str) -> Result<()> {
    if r.rows() != r.cols() || b.len() != r.rows() {
        return Err(Error::DimensionMismatch {
            op,
            detail: format!(
                "{}x{} system with right-hand side of length {}",
                r.rows(),
                r.cols(),
                b.len()
            ),
        });
    }
    Ok(())
}

/// `b_i - sum_{j > i} r_ij x_j`
fn eliminate<T: Tally + ?Sized>(t: &mut T, r: &ComplexMatrix, x: &[C64], b: C64, i: usize) -> C64 {
    let mut s = b;
    for j in i + 1..r.cols() {
        let p = arith::mul(t, r[(i, j)], x[j]);
        s = arith::sub(t, s, p);
    }
    s
}

/// Solves `r x = b` for upper-triangular `r`, reading only the upper
/// triangle. Performs exactly one real division per row.
pub fn back_substitute<T: Tally + ?Sized>(
    t: &mut T,
    r: &ComplexMatrix,
    b: &[C64],
) -> Result<ComplexVector> {
    check_triangular_system(r, b, "back_substitute")?;
    t.set_phase(Phase::BackSubstitution);
    let n = r.rows();
    let mut x = vec![C64::default(); n];
    for i in (0..n).rev() {
        let s = eliminate(t, r, &x, b[i], i);
        let d = r[(i, i)];
        if d == C64::default() {
            return Err(Error::SingularDiagonal { row: i });
        }
        x[i] = if d.im == 0.0 {
            let inv = arith::recip(t, d.re);
            arith::scale(t, s, inv)
        } else {
            let inv = arith::crecip(t, d);
            arith::mul(t, s, inv)
        };
    }
    Ok(x.into())
}

/// Solves `r x = b` assuming `r` has a unit diagonal (the diagonal is not
/// read). Division free.
pub fn back_substitute_unit_diag<T: Tally + ?Sized>(
    t: &mut T,
    r: &ComplexMatrix,
    b: &[C64],
) -> Result<ComplexVector> {
    check_triangular_system(r, b, "back_substitute_unit_diag")?;
    t.set_phase(Phase::BackSubstitution);
    let n = r.rows();
    let mut x = vec![C64::default(); n];
    for i in (0..n).rev() {
        x[i] = eliminate(t, r, &x, b[i], i);
    }
    Ok(x.into())
}

fn check_ls(a: &ComplexMatrix, y: &[C64], op: &'static str) -> Result<()> {
    if y.len() != a.rows() {
        return Err(Error::DimensionMismatch {
            op,
            detail: format!(
                "A is {}x{} but y has length {}",
                a.rows(),
                a.cols(),
                y.len()
            ),
        });
    }
    Ok(())
}

/// Least squares through the thin QR. The residual is `||y||^2 - ||Q^H y||^2`,
/// which equals `||Q~^H y||^2` for the trailing block `Q~` of the full
/// factorization.
pub fn solve_ls_qr<T: Tally + ?Sized>(
    t: &mut T,
    a: &ComplexMatrix,
    y: &[C64],
) -> Result<LsSolution> {
    check_ls(a, y, "solve_ls_qr")?;
    let f = thin_qr_mgs(t, a)?;
    t.set_phase(Phase::BackSubstitution);
    let z = adjoint_mul_vec(t, &f.q, y)?;
    let x_star = back_substitute(t, &f.r, &z)?;
    let y2 = sq_norm2(t, y);
    let z2 = sq_norm2(t, &z);
    let residual_sq = arith::radd(t, y2, -z2).max(0.0);
    Ok(LsSolution {
        x_star,
        residual_sq,
    })
}

/// Least squares through the square-root-free QDRD, never touching `D'`.
/// The residual is recomputed directly as `||y - A x||^2`.
pub fn solve_ls_qdrd<T: Tally + ?Sized>(
    t: &mut T,
    a: &ComplexMatrix,
    y: &[C64],
) -> Result<LsSolution> {
    check_ls(a, y, "solve_ls_qdrd")?;
    let f = qdrd_sqrt_free(t, a)?;
    t.set_phase(Phase::BackSubstitution);
    let z = adjoint_mul_vec(t, &f.q_prime, y)?;
    let x_star = back_substitute_unit_diag(t, &f.r_prime, &z)?;
    let ax = mat_vec(t, a, &x_star)?;
    let e: Vec<C64> = y
        .iter()
        .zip(ax.iter())
        .map(|(&yi, &v)| arith::sub(t, yi, v))
        .collect();
    let residual_sq = sq_norm2(t, &e);
    Ok(LsSolution {
        x_star,
        residual_sq,
    })
}
