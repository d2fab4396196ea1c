//! Small dense matrices: just enough for correlation submatrix inversion,
//! least squares and implied covariances.

use std::ops::{Index, IndexMut};

use thiserror::Error;

use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is numerically singular (pivot {pivot:e} in column {column})")]
    Singular { column: usize, pivot: f64 },
    #[error("design matrix is rank deficient at column {column}")]
    RankDeficient { column: usize },
    #[error("dimension mismatch: {0}")]
    Shape(String),
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Scalar> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![F::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = F::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<F>]) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(LinalgError::Shape("ragged rows".into()));
        }
        Ok(Self { rows: r, cols: c, data: rows.concat() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::Shape(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == F::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> F {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (*a - *b).abs())
            .fold(F::zero(), F::max)
    }

    /// Gauss-Jordan inverse with partial pivoting. Fails when the best
    /// available pivot falls below `pivot_tol` in absolute value.
    pub fn inverse(&self, pivot_tol: F) -> Result<Self, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::Shape("inverse of non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let (piv_row, piv_abs) = (col..n)
                .map(|r| (r, a[(r, col)].abs()))
                .fold((col, F::neg_infinity()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(piv_abs >= pivot_tol) {
                return Err(LinalgError::Singular { column: col, pivot: piv_abs.as_f64() });
            }
            if piv_row != col {
                a.swap_rows(piv_row, col);
                inv.swap_rows(piv_row, col);
            }
            let p = a[(col, col)];
            for j in 0..n {
                a[(col, j)] = a[(col, j)] / p;
                inv[(col, j)] = inv[(col, j)] / p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a[(r, col)];
                if factor == F::zero() {
                    continue;
                }
                for j in 0..n {
                    a[(r, j)] = a[(r, j)] - factor * a[(col, j)];
                    inv[(r, j)] = inv[(r, j)] - factor * inv[(col, j)];
                }
            }
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl<F> Index<(usize, usize)> for Matrix<F> {
    type Output = F;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &F {
        &self.data[i * self.cols + j]
    }
}

impl<F> IndexMut<(usize, usize)> for Matrix<F> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut F {
        &mut self.data[i * self.cols + j]
    }
}

/// Least-squares solution of `x * beta ~ y` by Householder QR.
///
/// `columns` holds the regressors column by column (each of length `n`).
/// Returns the coefficients and the residual sum of squares. A column whose
/// reflected diagonal is below `rank_tol` times the largest one so far is
/// reported as rank deficient.
pub fn least_squares_qr<F: Scalar>(
    columns: &[Vec<F>],
    y: &[F],
    rank_tol: F,
) -> Result<(Vec<F>, F), LinalgError> {
    let n = y.len();
    let p = columns.len();
    if columns.iter().any(|c| c.len() != n) {
        return Err(LinalgError::Shape("regressor length differs from response".into()));
    }
    if p > n {
        return Err(LinalgError::RankDeficient { column: n });
    }
    let mut a: Vec<Vec<F>> = columns.to_vec();
    let mut b = y.to_vec();
    let mut diag = vec![F::zero(); p];
    let mut scale = F::zero();

    for k in 0..p {
        let norm = a[k][k..].iter().map(|v| *v * *v).sum::<F>().sqrt();
        scale = scale.max(norm);
        if norm <= rank_tol * scale || norm == F::zero() {
            return Err(LinalgError::RankDeficient { column: k });
        }
        let alpha = if a[k][k] > F::zero() { -norm } else { norm };
        // v = x - alpha e1, stored in place
        a[k][k] = a[k][k] - alpha;
        let vnorm2 = a[k][k..].iter().map(|v| *v * *v).sum::<F>();
        diag[k] = alpha;
        let (head, tail) = a.split_at_mut(k + 1);
        let v = &head[k][k..];
        for col in tail.iter_mut() {
            let dot: F = v.iter().zip(&col[k..]).map(|(a, b)| *a * *b).sum();
            let f = (dot + dot) / vnorm2;
            for (c, vi) in col[k..].iter_mut().zip(v) {
                *c = *c - f * *vi;
            }
        }
        let dot: F = v.iter().zip(&b[k..]).map(|(a, b)| *a * *b).sum();
        let f = (dot + dot) / vnorm2;
        for (c, vi) in b[k..].iter_mut().zip(v) {
            *c = *c - f * *vi;
        }
    }

    // back substitution on R beta = Q^T y
    let mut beta = vec![F::zero(); p];
    for k in (0..p).rev() {
        let mut s = b[k];
        for j in k + 1..p {
            s = s - a[j][k] * beta[j];
        }
        beta[k] = s / diag[k];
    }
    let rss = b[p..].iter().map(|v| *v * *v).sum();
    Ok((beta, rss))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_2x2() {
        let m = Matrix::from_rows(&[vec![4.0, 7.0], vec![2.0, 6.0]]).unwrap();
        let inv = m.inverse(1e-12).unwrap();
        let prod = m.matmul(&inv).unwrap();
        assert!(prod.max_abs_diff(&Matrix::identity(2)) < 1e-14);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let m = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(m.inverse(1e-12), Err(LinalgError::Singular { .. })));
    }

    #[test]
    fn qr_recovers_exact_line() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 2.0 * v).collect();
        let (beta, rss) = least_squares_qr(&[vec![1.0; 10], x], &y, 1e-10).unwrap();
        assert!((beta[0] - 3.0).abs() < 1e-12);
        assert!((beta[1] + 2.0).abs() < 1e-12);
        assert!(rss < 1e-20);
    }

    #[test]
    fn qr_flags_collinear_columns() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let x2: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let err = least_squares_qr(&[vec![1.0; 10], x, x2], &[0.0; 10], 1e-10).unwrap_err();
        assert_eq!(err, LinalgError::RankDeficient { column: 2 });
    }
}
