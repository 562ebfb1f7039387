//! Ridge regression: dataset generator, value/gradient, and the closed-form
//! optimum `(H^T H + c I) x = H^T b`.

use super::certificate::{CertificateMethod, OptimumCertificate};
use super::linalg::{cholesky_solve, DenseMatrix};
use crate::core::{DenseVector, Gradient, Objective};
use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone)]
pub struct RidgeDataset {
    h: DenseMatrix,
    b: Vec<f64>,
    c: f64,
}

impl RidgeDataset {
    pub fn new(d: usize, rows: Vec<f64>, b: Vec<f64>, c: f64) -> Result<Self> {
        if d == 0 || b.is_empty() || rows.len() != d * b.len() {
            return Err(Error::invalid("dataset", "inconsistent dimensions"));
        }
        if c <= 0.0 || !c.is_finite() {
            return Err(Error::invalid("c", "regularization constant must be positive"));
        }
        Ok(Self { h: DenseMatrix::from_rows(b.len(), d, rows), b, c })
    }

    pub fn n_samples(&self) -> usize {
        self.b.len()
    }

    pub fn dim(&self) -> usize {
        self.h.cols()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.h.row(i)
    }

    pub fn target(&self, i: usize) -> f64 {
        self.b[i]
    }

    pub fn regularization(&self) -> f64 {
        self.c
    }

    /// Trace bound on the smoothness constant of `1/2 |b - Hx|^2 + c/2 |x|^2`.
    pub fn smoothness_bound(&self) -> f64 {
        self.h.data().iter().map(|v| v * v).sum::<f64>() + self.c
    }
}

pub fn ridge_value(ds: &RidgeDataset, x: &DenseVector) -> f64 {
    let hx = ds.h.matvec(x.as_slice());
    let resid: f64 = ds.b.iter().zip(&hx).map(|(b, h)| (b - h) * (b - h)).sum();
    let reg: f64 = x.iter().map(|v| v * v).sum();
    0.5 * resid + 0.5 * ds.c * reg
}

pub fn ridge_grad(ds: &RidgeDataset, x: &DenseVector) -> DenseVector {
    let hx = ds.h.matvec(x.as_slice());
    let diff: Vec<f64> = hx.iter().zip(&ds.b).map(|(h, b)| h - b).collect();
    let mut g = ds.h.t_matvec(&diff);
    for (gj, xj) in g.iter_mut().zip(x.iter()) {
        *gj += ds.c * xj;
    }
    DenseVector::from_raw(g)
}

/// Closed-form optimum via a symmetric positive-definite solve of
/// `(H^T H + c I) x = H^T b`; `c > 0` guarantees positive definiteness.
pub fn ridge_optimum(ds: &RidgeDataset) -> Result<OptimumCertificate> {
    let mut gram = ds.h.gram();
    gram.add_diagonal(ds.c);
    let rhs = ds.h.t_matvec(&ds.b);
    let x = cholesky_solve(&gram, &rhs)?;
    let x_star = DenseVector::new(x)
        .map_err(|_| Error::Solver("ridge solve produced non-finite solution".to_string()))?;
    let residual = ridge_grad(ds, &x_star).norm();
    Ok(OptimumCertificate {
        f_star: ridge_value(ds, &x_star),
        x_star,
        method: CertificateMethod::ClosedForm,
        residual_grad_norm: residual,
    })
}

impl Objective for RidgeDataset {
    fn dim(&self) -> usize {
        self.dim()
    }
    fn value(&self, x: &DenseVector) -> f64 {
        ridge_value(self, x)
    }
}

impl Gradient for RidgeDataset {
    fn gradient(&self, x: &DenseVector) -> DenseVector {
        ridge_grad(self, x)
    }
}

/// Generates `H_ij ~ N(0, 1)` and `b = H x_star + eps` with
/// `eps_i ~ N(0, noise_std^2)`.
pub fn gen_ridge(
    d: usize,
    n: usize,
    x_star: &DenseVector,
    c: f64,
    noise_std: f64,
    rng: &mut RngStream,
) -> Result<RidgeDataset> {
    if d == 0 || n == 0 {
        return Err(Error::invalid("gen_ridge", "d and N must be at least 1"));
    }
    if x_star.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: x_star.dim() });
    }
    if noise_std < 0.0 || !noise_std.is_finite() {
        return Err(Error::invalid("noise_std", "must be non-negative"));
    }
    let mut rows = Vec::with_capacity(n * d);
    let mut b = Vec::with_capacity(n);
    for _ in 0..n {
        let start = rows.len();
        for _ in 0..d {
            rows.push(rng.next_gaussian());
        }
        let signal: f64 =
            rows[start..].iter().zip(x_star.iter()).map(|(h, x)| h * x).sum::<f64>();
        b.push(signal + noise_std * rng.next_gaussian());
    }
    RidgeDataset::new(d, rows, b, c)
}
