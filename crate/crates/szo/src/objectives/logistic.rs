//! Binary logistic regression: dataset generator, loss, and analytic
//! gradient. The loss is the mean of `log(1 + exp(-y_i a_i^T x))`, computed
//! through a large-margin-safe softplus so d = 50 iterates cannot overflow.

use super::linalg::DenseMatrix;
use crate::core::{DenseVector, Gradient, Objective};
use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone)]
pub struct LogisticDataset {
    a: DenseMatrix,
    y: Vec<f64>,
}

impl LogisticDataset {
    /// Builds a dataset from raw rows and +-1 labels.
    pub fn new(d: usize, rows: Vec<f64>, labels: Vec<f64>) -> Result<Self> {
        if d == 0 || labels.is_empty() || rows.len() != d * labels.len() {
            return Err(Error::invalid("dataset", "inconsistent dimensions"));
        }
        if !labels.iter().all(|y| *y == 1.0 || *y == -1.0) {
            return Err(Error::invalid("labels", "labels must be exactly -1 or +1"));
        }
        Ok(Self { a: DenseMatrix::from_rows(labels.len(), d, rows), y: labels })
    }

    pub fn n_samples(&self) -> usize {
        self.y.len()
    }

    pub fn dim(&self) -> usize {
        self.a.cols()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.a.row(i)
    }

    pub fn label(&self, i: usize) -> f64 {
        self.y[i]
    }

    /// Trace bound on the smoothness constant: the Hessian is
    /// `(1/N) sum sigma'(m_i) a_i a_i^T` with `sigma' <= 1/4`.
    pub fn smoothness_bound(&self) -> f64 {
        let n = self.n_samples() as f64;
        let sum_sq: f64 = self.a.data().iter().map(|v| v * v).sum();
        sum_sq / (4.0 * n)
    }
}

/// `softplus(t) = log(1 + e^t)` without overflow for large |t|.
#[inline]
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// `sigma(-m) = 1 / (1 + e^m)` without overflow.
#[inline]
fn sigmoid_neg(m: f64) -> f64 {
    if m >= 0.0 {
        let e = (-m).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + m.exp())
    }
}

pub fn logistic_value(ds: &LogisticDataset, x: &DenseVector) -> f64 {
    let n = ds.n_samples();
    let mut total = 0.0;
    for i in 0..n {
        let margin: f64 = ds.row(i).iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>() * ds.label(i);
        total += softplus(-margin);
    }
    total / n as f64
}

pub fn logistic_grad(ds: &LogisticDataset, x: &DenseVector) -> DenseVector {
    let n = ds.n_samples();
    let d = ds.dim();
    let mut g = vec![0.0; d];
    for i in 0..n {
        let yi = ds.label(i);
        let margin: f64 = ds.row(i).iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>() * yi;
        let w = -yi * sigmoid_neg(margin);
        for (gj, aj) in g.iter_mut().zip(ds.row(i)) {
            *gj += w * aj;
        }
    }
    let inv_n = 1.0 / n as f64;
    DenseVector::from_raw(g.into_iter().map(|v| v * inv_n).collect())
}

impl Objective for LogisticDataset {
    fn dim(&self) -> usize {
        self.dim()
    }
    fn value(&self, x: &DenseVector) -> f64 {
        logistic_value(self, x)
    }
}

impl Gradient for LogisticDataset {
    fn gradient(&self, x: &DenseVector) -> DenseVector {
        logistic_grad(self, x)
    }
}

/// Generates a dataset with `A_ij ~ Unif([-1, 1])` and labels
/// `y_i = sign(a_i^T x_star + eps_i)`, `eps_i ~ Unif([-0.5, 0.5])`.
/// `sign(0)` is defined as +1.
pub fn gen_logistic(
    d: usize,
    n: usize,
    x_star: &DenseVector,
    rng: &mut RngStream,
) -> Result<LogisticDataset> {
    if d == 0 || n == 0 {
        return Err(Error::invalid("gen_logistic", "d and N must be at least 1"));
    }
    if x_star.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: x_star.dim() });
    }
    let mut rows = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let start = rows.len();
        for _ in 0..d {
            rows.push(rng.next_range(-1.0, 1.0));
        }
        let margin: f64 =
            rows[start..].iter().zip(x_star.iter()).map(|(a, b)| a * b).sum::<f64>();
        let noise = rng.next_range(-0.5, 0.5);
        labels.push(if margin + noise >= 0.0 { 1.0 } else { -1.0 });
    }
    LogisticDataset::new(d, rows, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::finite_difference_gradient;

    #[test]
    fn value_at_origin_is_log_two() {
        let mut rng = RngStream::new(17);
        let x_star = DenseVector::filled(2, 0.5).unwrap();
        let ds = gen_logistic(2, 20, &x_star, &mut rng).unwrap();
        let v = logistic_value(&ds, &DenseVector::zeros(2));
        assert!((v - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn generator_respects_ranges_and_labels() {
        let mut rng = RngStream::new(18);
        let x_star = DenseVector::filled(2, 0.5).unwrap();
        let ds = gen_logistic(2, 20, &x_star, &mut rng).unwrap();
        for i in 0..ds.n_samples() {
            assert!(ds.row(i).iter().all(|a| a.abs() <= 1.0));
            assert!(ds.label(i) == 1.0 || ds.label(i) == -1.0);
        }
    }

    #[test]
    fn labels_balance_under_zero_target() {
        // With x_star = 0 labels equal sign(eps), a fair coin.
        let mut rng = RngStream::new(19);
        let ds = gen_logistic(3, 10_000, &DenseVector::zeros(3), &mut rng).unwrap();
        let plus = (0..ds.n_samples()).filter(|i| ds.label(*i) == 1.0).count();
        let freq = plus as f64 / ds.n_samples() as f64;
        assert!((freq - 0.5).abs() <= 0.05, "balance {freq}");
    }

    #[test]
    fn generator_is_deterministic() {
        let x_star = DenseVector::filled(2, 0.5).unwrap();
        let a = gen_logistic(2, 50, &x_star, &mut RngStream::new(20)).unwrap();
        let b = gen_logistic(2, 50, &x_star, &mut RngStream::new(20)).unwrap();
        for i in 0..50 {
            assert_eq!(a.row(i), b.row(i));
            assert_eq!(a.label(i), b.label(i));
        }
    }

    #[test]
    fn separable_margin_drives_loss_to_zero_monotonically() {
        let ds = LogisticDataset::new(2, vec![1.0, 0.0], vec![1.0]).unwrap();
        let mut prev = f64::INFINITY;
        for t in [0.0, 2.0, 5.0, 10.0, 30.0, 100.0] {
            let v = logistic_value(&ds, &DenseVector::new(vec![t, 0.0]).unwrap());
            assert!(v < prev);
            prev = v;
        }
        assert!(prev < 1e-40);
    }

    #[test]
    fn large_margins_do_not_overflow() {
        let ds = LogisticDataset::new(1, vec![1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let v = logistic_value(&ds, &DenseVector::new(vec![800.0]).unwrap());
        assert!(v.is_finite());
        assert!((v - 400.0).abs() < 1e-9); // one term ~0, the other ~800, averaged
        let g = logistic_grad(&ds, &DenseVector::new(vec![800.0]).unwrap());
        assert!(g[0].is_finite());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = RngStream::new(21);
        let x_star = DenseVector::filled(4, 0.5).unwrap();
        let ds = gen_logistic(4, 30, &x_star, &mut rng).unwrap();
        for _ in 0..20 {
            let x = DenseVector::from_raw((0..4).map(|_| rng.next_range(-2.0, 2.0)).collect());
            let g = logistic_grad(&ds, &x);
            let fd = finite_difference_gradient(&ds, &x, 1e-5);
            let rel = g.distance(&fd) / g.norm().max(1.0);
            assert!(rel <= 1e-6, "relative error {rel}");
        }
    }
}
