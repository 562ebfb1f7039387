//! Minimal dense linear algebra for the regression objectives: row-major
//! matrices, normal-equation assembly, and a Cholesky solve for symmetric
//! positive-definite systems. Problem sizes here stay small (d <= a few
//! hundred), so hand-rolled loops are plenty.

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(rows * cols, data.len());
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// `A x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `A^T v`.
    pub fn t_matvec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let row = self.row(i);
            let vi = v[i];
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * vi;
            }
        }
        out
    }

    /// Adds `v` to every diagonal entry (square matrices only).
    pub fn add_diagonal(&mut self, v: f64) {
        debug_assert_eq!(self.rows, self.cols);
        for i in 0..self.rows {
            self.data[i * self.cols + i] += v;
        }
    }

    /// `A^T A`, a cols x cols symmetric matrix.
    pub fn gram(&self) -> DenseMatrix {
        let n = self.cols;
        let mut g = vec![0.0; n * n];
        for i in 0..self.rows {
            let row = self.row(i);
            for j in 0..n {
                let rj = row[j];
                for k in j..n {
                    g[j * n + k] += rj * row[k];
                }
            }
        }
        for j in 0..n {
            for k in 0..j {
                g[j * n + k] = g[k * n + j];
            }
        }
        DenseMatrix::from_rows(n, n, g)
    }
}

/// Solves `A x = b` for symmetric positive-definite `A` via a Cholesky
/// factorization. Fails with a structured error when a pivot collapses
/// (matrix not positive definite, or conditioning beyond float range).
pub(crate) fn cholesky_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.rows();
    assert_eq!(a.cols(), n);
    assert_eq!(b.len(), n);
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a.data()[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return Err(Error::Solver(format!(
                        "Cholesky pivot {i} is {sum:.3e}; matrix not positive definite"
                    )));
                }
                l[i * n + j] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    // Forward solve L y = b.
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i * n + k] * y[k];
        }
        y[i] = sum / l[i * n + i];
    }
    // Backward solve L^T x = y.
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in i + 1..n {
            sum -= l[k * n + i] * x[k];
        }
        x[i] = sum / l[i * n + i];
    }
    Ok(x)
}
