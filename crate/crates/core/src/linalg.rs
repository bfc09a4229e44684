//! Small dense complex matrices and the Hermitian log-determinant kernel.
//!
//! Matrices in this crate are tiny (at most a few tens of rows), so a plain
//! row-major `Vec` is all that is needed.

use std::ops::{Index, IndexMut};

use num_complex::Complex;
use num_traits::Zero;

use crate::{Error, Real, Result};

/// Relative tolerance for the Hermitian symmetry check.
pub const HERMITIAN_RTOL: f64 = 1e-8;
/// Pivots below `-PSD_RTOL * max|a_ij|` mark the matrix as indefinite.
pub const PSD_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<Complex<T>>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::ShapeMismatch("columns of unequal length".into()));
        }
        Ok(Self::from_fn(rows, columns.len(), |r, c| columns[c][r]))
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, c: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::ShapeMismatch(format!("{}x{} times {}x{}", self.rows, self.cols, rhs.rows, rhs.cols)));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                for c in 0..rhs.cols {
                    out[(r, c)] += a * rhs[(k, c)];
                }
            }
        }
        Ok(out)
    }

    /// `AᴴA` (cols x cols).
    pub fn gram(&self) -> Self {
        let n = self.cols;
        let mut g = Self::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut acc = Complex::zero();
                for r in 0..self.rows {
                    acc += self[(r, i)].conj() * self[(r, j)];
                }
                g[(i, j)] = acc;
                g[(j, i)] = acc.conj();
            }
            g[(i, i)].im = T::zero();
        }
        g
    }

    /// `AAᴴ` (rows x rows).
    pub fn outer_gram(&self) -> Self {
        let n = self.rows;
        let mut g = Self::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut acc = Complex::zero();
                for c in 0..self.cols {
                    acc += self[(i, c)] * self[(j, c)].conj();
                }
                g[(i, j)] = acc;
                g[(j, i)] = acc.conj();
            }
            g[(i, i)].im = T::zero();
        }
        g
    }

    /// The smaller of `AᴴA` and `AAᴴ`; both share the same non-zero eigenvalues.
    pub fn compact_gram(&self) -> Self {
        if self.cols <= self.rows {
            self.gram()
        } else {
            self.outer_gram()
        }
    }

    pub fn scale(&self, s: T) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn frobenius_norm_sqr(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc.max(z.norm()))
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex<T> {
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[r * self.cols + c]
    }
}

/// `log₂ det(A)` for a Hermitian positive semi-definite `A`, via Cholesky.
///
/// A singular matrix (a zero pivot within tolerance) yields `-inf`.
pub fn logdet_hermitian_psd<T: Real>(a: &CMatrix<T>) -> Result<T> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch(format!("{}x{} is not square", a.rows(), a.cols())));
    }
    let n = a.rows();
    let scale = a.max_abs();
    let herm_tol = T::lit(HERMITIAN_RTOL) * scale;
    for i in 0..n {
        for j in i..n {
            if (a[(i, j)] - a[(j, i)].conj()).norm() > herm_tol {
                return Err(Error::Domain(format!("matrix is not Hermitian at ({i}, {j})")));
            }
        }
    }

    let neg_tol = T::lit(PSD_RTOL) * scale;
    let mut l = CMatrix::<T>::zeros(n, n);
    let mut log_det = T::zero();
    for j in 0..n {
        let mut pivot = a[(j, j)].re;
        for k in 0..j {
            pivot -= l[(j, k)].norm_sqr();
        }
        if pivot < -neg_tol {
            return Err(Error::Domain(format!("matrix is indefinite (pivot {j} = {pivot})")));
        }
        if pivot <= T::zero() {
            return Ok(T::neg_infinity());
        }
        let d = pivot.sqrt();
        l[(j, j)] = Complex::new(d, T::zero());
        log_det += pivot.log2();
        let inv_d = d.recip();
        for i in (j + 1)..n {
            let mut acc = a[(i, j)];
            for k in 0..j {
                acc -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = acc * inv_d;
        }
    }
    Ok(log_det)
}

/// `log₂ det(I + s·G)` for a Hermitian PSD `G` and `s ≥ 0`.
pub fn logdet_identity_plus<T: Real>(g: &CMatrix<T>, s: T) -> Result<T> {
    if s == T::zero() {
        return Ok(T::zero());
    }
    let mut m = g.scale(s);
    for i in 0..m.rows().min(m.cols()) {
        m[(i, i)].re += T::one();
    }
    logdet_hermitian_psd(&m)
}
