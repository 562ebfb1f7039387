//! Quadratic verification objective `f(x) = x^T A x / 2 + b^T x` with the
//! ball-smoothed surrogate in closed form: averaging over the unit ball adds
//! `r^2 tr(A) / (2 (d + 2))` to the value and leaves the gradient unchanged,
//! which makes this family the reference oracle for the estimator checks.

use crate::core::{DenseVector, Gradient, Objective};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct QuadraticObjective {
    dim: usize,
    a: Vec<f64>, // row-major symmetric d x d
    b: DenseVector,
}

impl QuadraticObjective {
    pub fn new(a: Vec<f64>, b: DenseVector) -> Result<Self> {
        let d = b.dim();
        if a.len() != d * d {
            return Err(Error::invalid("A", "matrix must be d x d"));
        }
        for i in 0..d {
            for j in 0..i {
                if a[i * d + j] != a[j * d + i] {
                    return Err(Error::invalid("A", format!("not symmetric at ({i}, {j})")));
                }
            }
        }
        if !a.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite { context: "QuadraticObjective::new".to_string() });
        }
        Ok(Self { dim: d, a, b })
    }

    /// Diagonal quadratic: `A = diag(diag)`.
    pub fn diagonal(diag: &[f64], b: DenseVector) -> Result<Self> {
        let d = b.dim();
        if diag.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: diag.len() });
        }
        let mut a = vec![0.0; d * d];
        for (i, v) in diag.iter().enumerate() {
            a[i * d + i] = *v;
        }
        Self::new(a, b)
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.a[i * self.dim + i]).sum()
    }

    /// Spectral norm upper bound via the Frobenius norm; exact for scaled
    /// identities, good enough as a smoothness constant in tests.
    pub fn smoothness_bound(&self) -> f64 {
        self.a.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Exact smoothed surrogate `f_r(x) = f(x) + r^2 tr(A) / (2 (d + 2))`.
    pub fn smoothed_value(&self, x: &DenseVector, r: f64) -> f64 {
        self.value(x) + r * r * self.trace() / (2.0 * (self.dim as f64 + 2.0))
    }

    /// The smoothed gradient of a quadratic equals the true gradient.
    pub fn smoothed_gradient(&self, x: &DenseVector, _r: f64) -> DenseVector {
        self.gradient(x)
    }
}

impl Objective for QuadraticObjective {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &DenseVector) -> f64 {
        let d = self.dim;
        let mut quad = 0.0;
        for i in 0..d {
            let row = &self.a[i * d..(i + 1) * d];
            let ax: f64 = row.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
            quad += x[i] * ax;
        }
        0.5 * quad + self.b.dot(x)
    }
}

impl Gradient for QuadraticObjective {
    fn gradient(&self, x: &DenseVector) -> DenseVector {
        let d = self.dim;
        let mut g = vec![0.0; d];
        for i in 0..d {
            let row = &self.a[i * d..(i + 1) * d];
            g[i] = row.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>() + self.b[i];
        }
        DenseVector::from_raw(g)
    }
}
