//! Minimal dense linear algebra: row-major matrices and a Cholesky factor.

use std::ops::{Index, IndexMut};

use thiserror::Error;

use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot} is {value})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major data.
    pub fn from_row_slice(rows: usize, cols: usize, data: &[T]) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data length");
        Self {
            rows,
            cols,
            data: data.to_vec(),
        }
    }

    pub fn column(values: &[T]) -> Self {
        Self::from_row_slice(values.len(), 1, values)
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimensions");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] = out[(i, j)] + a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimensions");
        (0..self.rows)
            .map(|i| dot(self.row(i), v))
            .collect()
    }

    /// `selfᵀ v`.
    pub fn tr_mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.rows, v.len(), "transposed matrix-vector dimensions");
        let mut out = vec![T::zero(); self.cols];
        for (i, &vi) in v.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o = *o + a * vi;
            }
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |m, v| if v.abs() > m { v.abs() } else { m })
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Lower-triangular Cholesky factor `A = L Lᵀ` of a symmetric positive-definite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky<T> {
    l: Matrix<T>,
}

impl<T: Scalar> Cholesky<T> {
    pub fn factor(a: &Matrix<T>) -> Result<Self, LinalgError> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(LinalgError::NotSquare {
                rows: n,
                cols: a.ncols(),
            });
        }
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut diag = a[(j, j)];
            for k in 0..j {
                diag = diag - l[(j, k)] * l[(j, k)];
            }
            if !(diag > T::zero()) {
                return Err(LinalgError::NotPositiveDefinite {
                    pivot: j,
                    value: diag.to_f64().unwrap_or(f64::NAN),
                });
            }
            let ljj = diag.sqrt();
            l[(j, j)] = ljj;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s = s - l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / ljj;
            }
        }
        Ok(Self { l })
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    pub fn l(&self) -> &Matrix<T> {
        &self.l
    }

    /// Factor of the trailing `(n-1)×(n-1)` block of `A`, i.e. `A` with its
    /// first row and column removed. Uses a rank-one update, `O(n²)`.
    pub fn remove_first(&mut self) {
        let n = self.dim();
        assert!(n > 0, "cannot shrink an empty factor");
        let m = n - 1;
        let mut l = Matrix::from_fn(m, m, |i, j| self.l[(i + 1, j + 1)]);
        let mut x: Vec<T> = (1..n).map(|i| self.l[(i, 0)]).collect();
        for k in 0..m {
            let lkk = l[(k, k)];
            let r = lkk.hypot(x[k]);
            let c = r / lkk;
            let s = x[k] / lkk;
            l[(k, k)] = r;
            for i in (k + 1)..m {
                let lik = (l[(i, k)] + s * x[i]) / c;
                x[i] = c * x[i] - s * lik;
                l[(i, k)] = lik;
            }
        }
        self.l = l;
    }

    /// Factor of `[[A, b], [bᵀ, c]]` given the factor of `A`, `O(n²)`.
    pub fn append(&mut self, b: &[T], c: T) -> Result<(), LinalgError> {
        let n = self.dim();
        if b.len() != n {
            return Err(LinalgError::DimensionMismatch {
                expected: n,
                got: b.len(),
            });
        }
        let row = self.solve_lower(b);
        let diag = c - dot(&row, &row);
        if !(diag > T::zero()) {
            return Err(LinalgError::NotPositiveDefinite {
                pivot: n,
                value: diag.to_f64().unwrap_or(f64::NAN),
            });
        }
        let mut l = Matrix::zeros(n + 1, n + 1);
        for i in 0..n {
            for j in 0..=i {
                l[(i, j)] = self.l[(i, j)];
            }
        }
        for (j, v) in row.into_iter().enumerate() {
            l[(n, j)] = v;
        }
        l[(n, n)] = diag.sqrt();
        self.l = l;
        Ok(())
    }

    /// Factor of the empty matrix.
    pub fn empty() -> Self {
        Self {
            l: Matrix::zeros(0, 0),
        }
    }

    /// Solves `L y = b`.
    pub fn solve_lower(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        assert_eq!(b.len(), n, "rhs length");
        let mut y = b.to_vec();
        for i in 0..n {
            let row = self.l.row(i);
            let mut s = y[i];
            for k in 0..i {
                s = s - row[k] * y[k];
            }
            y[i] = s / row[i];
        }
        y
    }

    /// Solves `Lᵀ x = y`.
    pub fn solve_upper(&self, y: &[T]) -> Vec<T> {
        let n = self.dim();
        assert_eq!(y.len(), n, "rhs length");
        let mut x = y.to_vec();
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s = s - self.l[(k, i)] * x[k];
            }
            x[i] = s / self.l[(i, i)];
        }
        x
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        self.solve_upper(&self.solve_lower(b))
    }

    /// Explicit inverse `A⁻¹`, symmetrised.
    pub fn inverse(&self) -> Matrix<T> {
        let n = self.dim();
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![T::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = T::zero());
            e[j] = T::one();
            let col = self.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        let half = T::lit(0.5);
        for i in 0..n {
            for j in 0..i {
                let s = (inv[(i, j)] + inv[(j, i)]) * half;
                inv[(i, j)] = s;
                inv[(j, i)] = s;
            }
        }
        inv
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_reconstructs_spd_matrix() {
        let a = Matrix::<f64>::from_row_slice(3, 3, &[4.0, 2.0, 0.6, 2.0, 5.0, 1.0, 0.6, 1.0, 3.0]);
        let ch = Cholesky::factor(&a).unwrap();
        let l = ch.l();
        let back = l.matmul(&l.transpose());
        for i in 0..3 {
            for j in 0..3 {
                assert!((back[(i, j)] - a[(i, j)]).abs() < 1e-14);
            }
        }
        let x = ch.solve(&[1.0, 2.0, 3.0]);
        let ax = a.mul_vec(&x);
        for (v, b) in ax.iter().zip([1.0, 2.0, 3.0]) {
            assert!((v - b).abs() < 1e-13);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = Matrix::<f64>::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            Cholesky::factor(&a),
            Err(LinalgError::NotPositiveDefinite { pivot: 1, .. })
        ));
        let r = Matrix::<f64>::zeros(2, 3);
        assert!(matches!(Cholesky::factor(&r), Err(LinalgError::NotSquare { .. })));
    }

    #[test]
    fn incremental_updates_match_fresh_factor() {
        let a = Matrix::<f64>::from_row_slice(
            4,
            4,
            &[
                5.0, 1.0, 0.5, 0.2, 1.0, 4.0, 0.3, 0.1, 0.5, 0.3, 3.0, 0.4, 0.2, 0.1, 0.4, 2.0,
            ],
        );
        let mut ch = Cholesky::factor(&a).unwrap();
        ch.remove_first();
        let sub = Matrix::from_fn(3, 3, |i, j| a[(i + 1, j + 1)]);
        let fresh = Cholesky::factor(&sub).unwrap();
        assert!(ch.l().as_slice().iter().zip(fresh.l().as_slice()).all(|(x, y)| (x - y).abs() < 1e-14));

        let mut grow = Cholesky::factor(&Matrix::from_fn(3, 3, |i, j| a[(i, j)])).unwrap();
        grow.append(&[0.2, 0.1, 0.4], 2.0).unwrap();
        let full = Cholesky::factor(&a).unwrap();
        assert!(grow.l().as_slice().iter().zip(full.l().as_slice()).all(|(x, y)| (x - y).abs() < 1e-14));

        let mut e = Cholesky::<f64>::empty();
        e.append(&[], 4.0).unwrap();
        assert_eq!(e.l()[(0, 0)], 2.0);
        assert!(e.append(&[4.0], 1.0).is_err());
    }

    #[test]
    fn inverse_is_symmetric() {
        let a = Matrix::<f64>::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let inv = Cholesky::factor(&a).unwrap().inverse();
        assert!(inv.is_symmetric());
        let id = a.matmul(&inv);
        assert!((id[(0, 0)] - 1.0).abs() < 1e-14 && id[(0, 1)].abs() < 1e-14);
    }
}
