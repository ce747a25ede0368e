//! Small dense row-major matrix with a classical blocked product.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::{Magnitude, Real};

const BLOCK: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Copy + Zero> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self
    where
        S: One,
    {
        Self::from_fn(n, n, |i, j| if i == j { S::one() } else { S::zero() })
    }

    pub fn diagonal(d: &[S]) -> Self {
        let n = d.len();
        Self::from_fn(n, n, |i, j| if i == j { d[i] } else { S::zero() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn map<R: Copy + Zero>(&self, f: impl Fn(S) -> R) -> Matrix<R> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    /// `self * diag(d)`.
    pub fn scale_columns(&self, d: &[S]) -> Self
    where
        S: Mul<Output = S>,
    {
        assert_eq!(d.len(), self.cols);
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * d[j])
    }

    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Self {
        let (r0, c0) = (rows.start, cols.start);
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(r0 + i, c0 + j)])
    }

    /// Classical `O(n^3)` product, blocked over the shared dimension and the
    /// output columns. Summation order inside every dot product is ascending
    /// in the shared index, so results are deterministic.
    pub fn matmul(&self, other: &Self) -> Self
    where
        S: Add<Output = S> + Mul<Output = S>,
    {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let (n, m, q) = (self.rows, self.cols, other.cols);
        let mut out = Self::zeros(n, q);
        for kb in (0..m).step_by(BLOCK) {
            let ke = (kb + BLOCK).min(m);
            for jb in (0..q).step_by(BLOCK) {
                let je = (jb + BLOCK).min(q);
                for i in 0..n {
                    let orow = i * q;
                    for k in kb..ke {
                        let a = self.data[i * m + k];
                        let brow = k * q;
                        for j in jb..je {
                            out.data[orow + j] = out.data[orow + j] + a * other.data[brow + j];
                        }
                    }
                }
            }
        }
        out
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }
}

impl<S: Copy + Zero + Sub<Output = S> + Magnitude> Matrix<S> {
    /// `max |a_ij - b_ij|`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).magnitude())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .map(Magnitude::magnitude)
            .fold(0.0, f64::max)
    }

    pub fn symmetry_residual(&self) -> f64 {
        self.max_abs_diff(&self.transpose())
    }
}

impl<T: Real> Matrix<Complex<T>> {
    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn real_part(&self) -> Matrix<T> {
        self.map(|z| z.re)
    }

    pub fn max_imag(&self) -> f64 {
        self.data
            .iter()
            .map(|z| z.im.abs().as_f64())
            .fold(0.0, f64::max)
    }
}

impl<T: Real> Matrix<T> {
    pub fn to_complex(&self) -> Matrix<Complex<T>> {
        self.map(|x| Complex::new(x, T::zero()))
    }

    /// `max |U U^T - I|` for a real matrix.
    pub fn orthogonality_residual(&self) -> f64 {
        self.matmul(&self.transpose())
            .max_abs_diff(&Matrix::identity(self.rows))
    }
}

impl<S> Index<(usize, usize)> for Matrix<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}
