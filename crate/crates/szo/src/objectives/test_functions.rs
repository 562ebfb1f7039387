//! Two-dimensional artificial test functions with known global minima.

use crate::core::{DenseVector, Gradient, Objective};

/// Beale function: sum of three squared residuals, global minimum 0 at
/// (3, 0.5).
#[derive(Debug, Clone, Copy, Default)]
pub struct Beale;

pub const BEALE_MINIMIZER: [f64; 2] = [3.0, 0.5];

pub fn beale_value(x: &DenseVector) -> f64 {
    let (x1, x2) = (x[0], x[1]);
    let e1 = 1.5 - x1 + x1 * x2;
    let e2 = 2.25 - x1 + x1 * x2 * x2;
    let e3 = 2.625 - x1 + x1 * x2 * x2 * x2;
    e1 * e1 + e2 * e2 + e3 * e3
}

pub fn beale_grad(x: &DenseVector) -> DenseVector {
    let (x1, x2) = (x[0], x[1]);
    let powers = [x2, x2 * x2, x2 * x2 * x2];
    let consts = [1.5, 2.25, 2.625];
    let mut g1 = 0.0;
    let mut g2 = 0.0;
    for j in 0..3 {
        let e = consts[j] - x1 + x1 * powers[j];
        g1 += 2.0 * e * (powers[j] - 1.0);
        let dpow = (j as f64 + 1.0) * if j == 0 { 1.0 } else { powers[j - 1] };
        g2 += 2.0 * e * x1 * dpow;
    }
    DenseVector::from_raw(vec![g1, g2])
}

impl Objective for Beale {
    fn dim(&self) -> usize {
        2
    }
    fn value(&self, x: &DenseVector) -> f64 {
        beale_value(x)
    }
}

impl Gradient for Beale {
    fn gradient(&self, x: &DenseVector) -> DenseVector {
        beale_grad(x)
    }
}

/// Matyas function `0.26 (x1^2 + x2^2) - 0.48 x1 x2`, global minimum 0 at
/// the origin.
#[derive(Debug, Clone, Copy, Default)]
pub struct Matyas;

pub fn matyas_value(x: &DenseVector) -> f64 {
    let (x1, x2) = (x[0], x[1]);
    0.26 * (x1 * x1 + x2 * x2) - 0.48 * x1 * x2
}

pub fn matyas_grad(x: &DenseVector) -> DenseVector {
    let (x1, x2) = (x[0], x[1]);
    DenseVector::from_raw(vec![0.52 * x1 - 0.48 * x2, 0.52 * x2 - 0.48 * x1])
}

impl Objective for Matyas {
    fn dim(&self) -> usize {
        2
    }
    fn value(&self, x: &DenseVector) -> f64 {
        matyas_value(x)
    }
}

impl Gradient for Matyas {
    fn gradient(&self, x: &DenseVector) -> DenseVector {
        matyas_grad(x)
    }
}
