//! Dense complex matrices and vectors.
//!
//! Storage is row-major. Kernels that do arithmetic take a [`Tally`] and
//! report every real operation they perform; helpers that exist only for
//! validation (`frobenius_sq`, `max_abs_diff`, ...) are not counted.

use std::ops::{Deref, DerefMut, Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::opcount::Tally;

pub type C64 = Complex64;

/// Counted scalar arithmetic.
pub mod arith {
    use super::C64;
    use crate::opcount::{Op, Tally};

    #[inline]
    pub fn mul<T: Tally + ?Sized>(t: &mut T, a: C64, b: C64) -> C64 {
        t.record(Op::Mul, 4);
        t.record(Op::Add, 2);
        a * b
    }

    /// `conj(a) * b`
    #[inline]
    pub fn conj_mul<T: Tally + ?Sized>(t: &mut T, a: C64, b: C64) -> C64 {
        t.record(Op::Mul, 4);
        t.record(Op::Add, 2);
        a.conj() * b
    }

    #[inline]
    pub fn add<T: Tally + ?Sized>(t: &mut T, a: C64, b: C64) -> C64 {
        t.record(Op::Add, 2);
        a + b
    }

    #[inline]
    pub fn sub<T: Tally + ?Sized>(t: &mut T, a: C64, b: C64) -> C64 {
        t.record(Op::Add, 2);
        a - b
    }

    /// `|a|^2`
    #[inline]
    pub fn abs_sq<T: Tally + ?Sized>(t: &mut T, a: C64) -> f64 {
        t.record(Op::Mul, 2);
        t.record(Op::Add, 1);
        a.norm_sqr()
    }

    /// Complex times real.
    #[inline]
    pub fn scale<T: Tally + ?Sized>(t: &mut T, a: C64, s: f64) -> C64 {
        t.record(Op::Mul, 2);
        a * s
    }

    #[inline]
    pub fn radd<T: Tally + ?Sized>(t: &mut T, a: f64, b: f64) -> f64 {
        t.record(Op::Add, 1);
        a + b
    }

    #[inline]
    pub fn rmul<T: Tally + ?Sized>(t: &mut T, a: f64, b: f64) -> f64 {
        t.record(Op::Mul, 1);
        a * b
    }

    #[inline]
    pub fn recip<T: Tally + ?Sized>(t: &mut T, a: f64) -> f64 {
        t.record(Op::Div, 1);
        1.0 / a
    }

    #[inline]
    pub fn sqrt<T: Tally + ?Sized>(t: &mut T, a: f64) -> f64 {
        t.record(Op::Sqrt, 1);
        a.sqrt()
    }

    /// `1 / a` for complex `a`, using one real division.
    #[inline]
    pub fn crecip<T: Tally + ?Sized>(t: &mut T, a: C64) -> C64 {
        let den = abs_sq(t, a);
        let inv = recip(t, den);
        scale(t, a.conj(), inv)
    }
}

/// A dense complex column vector.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ComplexVector(Vec<C64>);

impl ComplexVector {
    pub fn zeros(len: usize) -> Self {
        ComplexVector(vec![C64::new(0.0, 0.0); len])
    }

    pub fn from_real(values: &[f64]) -> Self {
        ComplexVector(values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn into_inner(self) -> Vec<C64> {
        self.0
    }

    /// View as an `len x 1` matrix.
    pub fn to_column(&self) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.0.len(),
            cols: 1,
            data: self.0.clone(),
        }
    }

    pub fn max_abs_diff(&self, other: &ComplexVector) -> f64 {
        assert_eq!(self.len(), other.len());
        self.iter()
            .zip(other.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Deref for ComplexVector {
    type Target = [C64];

    fn deref(&self) -> &[C64] {
        &self.0
    }
}

impl DerefMut for ComplexVector {
    fn deref_mut(&mut self) -> &mut [C64] {
        &mut self.0
    }
}

impl From<Vec<C64>> for ComplexVector {
    fn from(v: Vec<C64>) -> Self {
        ComplexVector(v)
    }
}

impl FromIterator<C64> for ComplexVector {
    fn from_iter<I: IntoIterator<Item = C64>>(iter: I) -> Self {
        ComplexVector(iter.into_iter().collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch {
                op: "ComplexMatrix::new",
                detail: format!("dimensions must be positive, got {rows}x{cols}"),
            });
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                op: "ComplexMatrix::new",
                detail: format!(
                    "{rows}x{cols} needs {} entries, got {}",
                    rows * cols,
                    data.len()
                ),
            });
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Real matrix from row-major values.
    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        Self::new(
            rows,
            cols,
            values.iter().map(|&v| C64::new(v, 0.0)).collect(),
        )
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    pub fn diag_real(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> ComplexVector {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[C64]) {
        assert_eq!(v.len(), self.rows);
        for (i, &x) in v.iter().enumerate() {
            self[(i, j)] = x;
        }
    }

    /// Columns `start..end` as a new matrix.
    pub fn columns(&self, start: usize, end: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.rows, end - start, |i, j| self[(i, start + j)])
    }

    /// The matrix as a vector, if it has exactly one column.
    pub fn to_vector(&self) -> Result<ComplexVector> {
        if self.cols != 1 {
            return Err(Error::DimensionMismatch {
                op: "to_vector",
                detail: format!("expected a column, got {}x{}", self.rows, self.cols),
            });
        }
        Ok(ComplexVector(self.data.clone()))
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.frobenius_sq().sqrt()
    }

    /// Frobenius norm of `self - other`.
    pub fn frobenius_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest modulus strictly below the diagonal.
    pub fn max_below_diagonal(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols.min(i) {
                worst = worst.max(self[(i, j)].norm());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Conjugate transpose.
pub fn hermitian(a: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(a.cols, a.rows, |i, j| a[(j, i)].conj())
}

/// Sum of `terms`, counting one real add per complex accumulation step after
/// the first.
#[inline]
fn counted_sum<T: Tally + ?Sized>(t: &mut T, terms: impl Iterator<Item = C64>) -> C64 {
    let mut acc: Option<C64> = None;
    for z in terms {
        acc = Some(match acc {
            None => z,
            Some(s) => arith::add(t, s, z),
        });
    }
    acc.unwrap_or_default()
}

/// `u^H v`. For length `k`: `4k` mults and `2k + 2(k-1)` adds.
pub fn dot<T: Tally + ?Sized>(t: &mut T, u: &[C64], v: &[C64]) -> C64 {
    debug_assert_eq!(u.len(), v.len());
    let mut acc: Option<C64> = None;
    for (&a, &b) in u.iter().zip(v) {
        let p = arith::conj_mul(t, a, b);
        acc = Some(match acc {
            None => p,
            Some(s) => arith::add(t, s, p),
        });
    }
    acc.unwrap_or_default()
}

/// Standard matrix product. Each output entry of inner dimension `k` costs
/// `4k` mults and `4k - 2` adds.
pub fn matmul<T: Tally + ?Sized>(
    t: &mut T,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch {
            op: "matmul",
            detail: format!("{}x{} times {}x{}", a.rows, a.cols, b.rows, b.cols),
        });
    }
    let mut out = ComplexMatrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for j in 0..b.cols {
            let terms: Vec<C64> = (0..a.cols)
                .map(|k| arith::mul(t, a[(i, k)], b[(k, j)]))
                .collect();
            out[(i, j)] = counted_sum(t, terms.into_iter());
        }
    }
    Ok(out)
}

/// `a * x`.
pub fn mat_vec<T: Tally + ?Sized>(
    t: &mut T,
    a: &ComplexMatrix,
    x: &[C64],
) -> Result<ComplexVector> {
    if a.cols != x.len() {
        return Err(Error::DimensionMismatch {
            op: "mat_vec",
            detail: format!("{}x{} times vector of length {}", a.rows, a.cols, x.len()),
        });
    }
    Ok((0..a.rows)
        .map(|i| {
            let terms: Vec<C64> = a
                .row(i)
                .iter()
                .zip(x)
                .map(|(&aij, &xj)| arith::mul(t, aij, xj))
                .collect();
            counted_sum(t, terms.into_iter())
        })
        .collect())
}

/// `a^H * y` without forming the conjugate transpose.
pub fn adjoint_mul_vec<T: Tally + ?Sized>(
    t: &mut T,
    a: &ComplexMatrix,
    y: &[C64],
) -> Result<ComplexVector> {
    if a.rows != y.len() {
        return Err(Error::DimensionMismatch {
            op: "adjoint_mul_vec",
            detail: format!(
                "({}x{})^H times vector of length {}",
                a.rows,
                a.cols,
                y.len()
            ),
        });
    }
    Ok((0..a.cols)
        .map(|j| {
            let col: Vec<C64> = (0..a.rows).map(|i| a[(i, j)]).collect();
            dot(t, &col, y)
        })
        .collect())
}

/// Squared Euclidean norm. For length `k`: `2k` mults and `2k - 1` adds.
pub fn sq_norm2<T: Tally + ?Sized>(t: &mut T, v: &[C64]) -> f64 {
    let mut acc: Option<f64> = None;
    for &z in v {
        let s = arith::abs_sq(t, z);
        acc = Some(match acc {
            None => s,
            Some(a) => arith::radd(t, a, s),
        });
    }
    acc.unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcount::{NullTally, OpCounter, Phase};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_times_identity() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(matmul(&mut NullTally, &i2, &i2).unwrap(), i2);
    }

    #[test]
    fn permutation_times_column() {
        let p = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let b = ComplexMatrix::from_real(2, 1, &[1.0, 2.0]).unwrap();
        let out = matmul(&mut NullTally, &p, &b).unwrap();
        assert_eq!(out, ComplexMatrix::from_real(2, 1, &[2.0, 1.0]).unwrap());
    }

    #[test]
    fn conjugate_pair_product() {
        let a = ComplexMatrix::new(1, 1, vec![c(1.0, 1.0)]).unwrap();
        let b = ComplexMatrix::new(1, 1, vec![c(1.0, -1.0)]).unwrap();
        let out = matmul(&mut NullTally, &a, &b).unwrap();
        assert_eq!(out[(0, 0)], c(2.0, 0.0));
    }

    #[test]
    fn matmul_rejects_mismatch() {
        let a = ComplexMatrix::zeros(2, 3);
        let b = ComplexMatrix::zeros(2, 3);
        assert!(matches!(
            matmul(&mut NullTally, &a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn hermitian_cases() {
        let sym = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 5.0]).unwrap();
        assert_eq!(hermitian(&sym), sym);

        let i = ComplexMatrix::new(1, 1, vec![c(0.0, 1.0)]).unwrap();
        assert_eq!(hermitian(&i)[(0, 0)], c(0.0, -1.0));

        let a = ComplexMatrix::from_fn(2, 3, |i, j| c(i as f64 + 0.5, j as f64 - 1.0));
        let h = hermitian(&a);
        assert_eq!(h.shape(), (3, 2));
        assert_eq!(hermitian(&h), a);
    }

    #[test]
    fn sq_norm2_cases() {
        assert_eq!(sq_norm2(&mut NullTally, &ComplexVector::zeros(3)), 0.0);
        assert_eq!(
            sq_norm2(&mut NullTally, &ComplexVector::from_real(&[3.0, 4.0])),
            25.0
        );
        let v = ComplexVector::from(vec![c(1.0, 1.0), c(1.0, -1.0)]);
        assert_eq!(sq_norm2(&mut NullTally, &v), 4.0);
    }

    #[test]
    fn counts_match_hand_formulas() {
        // 2x3 times 3x2: 4 entries, each 3 complex mults + 2 complex adds
        let a = ComplexMatrix::from_fn(2, 3, |i, j| c(i as f64, j as f64));
        let b = ComplexMatrix::from_fn(3, 2, |i, j| c(j as f64, i as f64));
        let mut t = OpCounter::new();
        matmul(&mut t, &a, &b).unwrap();
        let k = 3u64;
        assert_eq!(t.total().mults, 4 * 4 * k);
        assert_eq!(t.total().adds, 4 * (2 * k + 2 * (k - 1)));
        assert_eq!(t.total().divs, 0);

        let mut t = OpCounter::new();
        t.set_phase(Phase::Detection);
        sq_norm2(&mut t, &ComplexVector::zeros(5));
        assert_eq!(t.get(Phase::Detection).mults, 10);
        assert_eq!(t.get(Phase::Detection).adds, 9);

        let mut t = OpCounter::new();
        dot(&mut t, &[c(1.0, 0.0); 4], &[c(0.0, 1.0); 4]);
        assert_eq!(t.total().mults, 16);
        assert_eq!(t.total().adds, 8 + 6);

        let mut t = OpCounter::new();
        arith::crecip(&mut t, c(3.0, 4.0));
        assert_eq!(t.total().divs, 1);
        assert_eq!(t.total().mults, 4);
    }

    #[test]
    fn adjoint_matches_explicit_hermitian() {
        let a = ComplexMatrix::from_fn(3, 2, |i, j| c(i as f64 - j as f64, 0.5 * (i + j) as f64));
        let y = ComplexVector::from(vec![c(1.0, 2.0), c(-1.0, 0.5), c(0.25, -3.0)]);
        let direct = adjoint_mul_vec(&mut NullTally, &a, &y).unwrap();
        let via = mat_vec(&mut NullTally, &hermitian(&a), &y).unwrap();
        assert!(direct.max_abs_diff(&via) < 1e-14);
    }

    #[test]
    fn new_validates_entry_count() {
        assert!(ComplexMatrix::new(2, 2, vec![C64::default(); 3]).is_err());
        assert!(ComplexMatrix::new(0, 2, vec![]).is_err());
    }
}
