//! Uniform sphere/ball samplers, the single-point gradient estimator, and
//! Monte-Carlo probes of the ball-smoothed surrogate it targets.
//!
//! The estimator `(d/r) f(x + r u) u` with `u` uniform on the unit sphere is
//! an unbiased estimator of the gradient of the smoothed surrogate
//! `f_r(x) = E[f(x + r y)]`, `y` uniform on the unit ball. The Monte-Carlo
//! helpers here exist to check exactly that at runtime.

use crate::core::{DenseVector, EvalCounter};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// A unit vector drawn from (or validated against) the unit sphere.
#[derive(Debug, Clone)]
pub struct SphereSample {
    u: DenseVector,
}

impl SphereSample {
    /// Wraps an externally supplied direction, enforcing unit norm to 1e-12
    /// relative tolerance. Used for forced-direction tests.
    pub fn from_unit_vector(u: DenseVector) -> Result<Self> {
        let norm = u.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("u", format!("not a unit vector: norm {norm}")));
        }
        Ok(Self { u })
    }

    pub fn direction(&self) -> &DenseVector {
        &self.u
    }

    pub fn into_vector(self) -> DenseVector {
        self.u
    }
}

/// Uniform sample from the unit sphere: a normalized standard-Gaussian
/// vector, with a resample on the (floating-point) zero-norm event.
pub fn sample_sphere(rng: &mut RngStream, d: usize) -> Result<SphereSample> {
    if d == 0 {
        return Err(Error::invalid("d", "dimension must be at least 1"));
    }
    loop {
        let raw: Vec<f64> = (0..d).map(|_| rng.next_gaussian()).collect();
        let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 && norm.is_finite() {
            let u = DenseVector::from_raw(raw.into_iter().map(|v| v / norm).collect());
            return Ok(SphereSample { u });
        }
    }
}

/// Uniform sample from the closed unit ball: sphere direction scaled by
/// U^(1/d). Rejection sampling would be hopeless at d = 50.
pub fn sample_ball(rng: &mut RngStream, d: usize) -> Result<DenseVector> {
    let sphere = sample_sphere(rng, d)?;
    let radius = rng.next_f64().powf(1.0 / d as f64);
    Ok(DenseVector::from_raw(sphere.direction().iter().map(|v| v * radius).collect()))
}

/// Single-point gradient estimate `(d/r) f(x + r u) u`. Consumes exactly one
/// oracle query.
pub fn single_point_estimate(
    oracle: &EvalCounter,
    x: &DenseVector,
    r: f64,
    u: &SphereSample,
) -> Result<DenseVector> {
    if r <= 0.0 || !r.is_finite() {
        return Err(Error::invalid("r", "smoothing radius must be positive"));
    }
    let d = x.dim();
    let perturbed = x.add_scaled(r, u.direction());
    let f = oracle.eval(&perturbed)?;
    let scale = (d as f64 / r) * f;
    Ok(DenseVector::from_raw(u.direction().iter().map(|v| scale * v).collect()))
}

/// Monte-Carlo estimate of the smoothed value `f_r(x)` over `n` ball samples.
/// Returns (mean, standard error); consumes exactly `n` oracle queries.
pub fn estimate_smoothed_value(
    oracle: &EvalCounter,
    x: &DenseVector,
    r: f64,
    n: u64,
    rng: &mut RngStream,
) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::invalid("n", "sample count must be at least 2"));
    }
    if r <= 0.0 || !r.is_finite() {
        return Err(Error::invalid("r", "smoothing radius must be positive"));
    }
    let d = x.dim();
    // Welford running mean/variance.
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for i in 0..n {
        let y = sample_ball(rng, d)?;
        let f = oracle.eval(&x.add_scaled(r, &y))?;
        let delta = f - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (f - mean);
    }
    let var = m2 / (n - 1) as f64;
    Ok((mean, (var / n as f64).sqrt()))
}

/// Componentwise mean and standard error of `n` independent single-point
/// estimates; the mean estimates the smoothed gradient at `x`. Consumes
/// exactly `n` oracle queries.
pub fn smoothed_gradient_stats(
    oracle: &EvalCounter,
    x: &DenseVector,
    r: f64,
    n: u64,
    rng: &mut RngStream,
) -> Result<(DenseVector, DenseVector)> {
    if n < 2 {
        return Err(Error::invalid("n", "sample count must be at least 2"));
    }
    if r <= 0.0 || !r.is_finite() {
        return Err(Error::invalid("r", "smoothing radius must be positive"));
    }
    let d = x.dim();
    let mut mean = vec![0.0; d];
    let mut m2 = vec![0.0; d];
    for i in 0..n {
        let u = sample_sphere(rng, d)?;
        let perturbed = x.add_scaled(r, u.direction());
        let f = oracle.eval(&perturbed)?;
        let scale = (d as f64 / r) * f;
        let count = (i + 1) as f64;
        for j in 0..d {
            let g = scale * u.direction()[j];
            let delta = g - mean[j];
            mean[j] += delta / count;
            m2[j] += delta * (g - mean[j]);
        }
    }
    let nf = n as f64;
    let stderr: Vec<f64> = m2.iter().map(|m| (m / (nf - 1.0) / nf).sqrt()).collect();
    Ok((DenseVector::from_raw(mean), DenseVector::from_raw(stderr)))
}

/// Arithmetic mean of `n` independent single-point estimates.
pub fn estimate_smoothed_gradient(
    oracle: &EvalCounter,
    x: &DenseVector,
    r: f64,
    n: u64,
    rng: &mut RngStream,
) -> Result<DenseVector> {
    smoothed_gradient_stats(oracle, x, r, n, rng).map(|(mean, _)| mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::Objective;

    struct SquaredNorm {
        dim: usize,
    }

    impl Objective for SquaredNorm {
        fn dim(&self) -> usize {
            self.dim
        }
        fn value(&self, x: &DenseVector) -> f64 {
            x.iter().map(|v| v * v).sum()
        }
    }

    struct Linear {
        a: Vec<f64>,
    }

    impl Objective for Linear {
        fn dim(&self) -> usize {
            self.a.len()
        }
        fn value(&self, x: &DenseVector) -> f64 {
            self.a.iter().zip(x.iter()).map(|(a, x)| a * x).sum()
        }
    }

    #[test]
    fn sphere_rejects_zero_dimension() {
        let mut rng = RngStream::new(1);
        assert!(sample_sphere(&mut rng, 0).is_err());
        assert!(sample_ball(&mut rng, 0).is_err());
    }

    #[test]
    fn sphere_d1_is_a_fair_coin() {
        let mut rng = RngStream::new(2024);
        let n = 10_000;
        let mut plus = 0u64;
        for _ in 0..n {
            let u = sample_sphere(&mut rng, 1).unwrap();
            let v = u.direction()[0];
            assert!(v == 1.0 || v == -1.0, "d=1 sample must be exactly +-1, got {v}");
            if v == 1.0 {
                plus += 1;
            }
        }
        let freq = plus as f64 / n as f64;
        assert!((freq - 0.5).abs() <= 0.02, "frequency {freq}");
    }

    #[test]
    fn sphere_samples_have_unit_norm() {
        let mut rng = RngStream::new(3);
        for _ in 0..1000 {
            let u = sample_sphere(&mut rng, 5).unwrap();
            assert!((u.direction().norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn sphere_coordinate_means_vanish() {
        // E[u] = 0 by symmetry; Var(u_j) = 1/d, so the standard error of each
        // coordinate mean is 1/sqrt(d n).
        let mut rng = RngStream::new(4);
        let d = 3;
        let n = 1_000_000u64;
        let mut sums = [0.0f64; 3];
        for _ in 0..n {
            let u = sample_sphere(&mut rng, d).unwrap();
            for j in 0..d {
                sums[j] += u.direction()[j];
            }
        }
        let bound = 3.0 / ((d as f64) * n as f64).sqrt();
        for (j, s) in sums.iter().enumerate() {
            let mean = s / n as f64;
            assert!(mean.abs() <= bound, "coordinate {j}: mean {mean}, bound {bound}");
        }
    }

    #[test]
    fn ball_samples_stay_inside() {
        let mut rng = RngStream::new(5);
        for _ in 0..2000 {
            let y = sample_ball(&mut rng, 7).unwrap();
            assert!(y.norm() <= 1.0 + 1e-15);
        }
    }

    #[test]
    fn ball_second_moment_matches_analytic_value() {
        // E[|y|^2] = d / (d + 2) for the uniform unit ball.
        let mut rng = RngStream::new(6);
        let n = 1_000_000u64;
        let mut sum = 0.0;
        for _ in 0..n {
            let y = sample_ball(&mut rng, 2).unwrap();
            sum += y.norm().powi(2);
        }
        let mean = sum / n as f64;
        assert!((mean - 0.5).abs() <= 0.005, "E[|y|^2] = {mean}");
    }

    #[test]
    fn ball_d1_reduces_to_uniform_interval() {
        let mut rng = RngStream::new(7);
        let n = 1_000_000u64;
        let mut sum = 0.0;
        for _ in 0..n {
            sum += sample_ball(&mut rng, 1).unwrap()[0];
        }
        let mean = sum / n as f64;
        assert!(mean.abs() <= 0.005, "mean {mean}");
    }

    #[test]
    fn single_point_estimate_worked_example() {
        // f = |x|^2 at the origin, r = 0.1, u = (1, 0): (d/r) f(ru) u = (0.2, 0).
        let obj = SquaredNorm { dim: 2 };
        let oracle = EvalCounter::new(&obj);
        let x = DenseVector::zeros(2);
        let u = SphereSample::from_unit_vector(DenseVector::new(vec![1.0, 0.0]).unwrap()).unwrap();
        let g = single_point_estimate(&oracle, &x, 0.1, &u).unwrap();
        assert!((g[0] - 0.2).abs() < 1e-15);
        assert_eq!(g[1], 0.0);
        assert_eq!(oracle.queries(), 1);
    }

    #[test]
    fn single_point_estimate_zero_objective() {
        struct Zero;
        impl Objective for Zero {
            fn dim(&self) -> usize {
                3
            }
            fn value(&self, _: &DenseVector) -> f64 {
                0.0
            }
        }
        let obj = Zero;
        let oracle = EvalCounter::new(&obj);
        let mut rng = RngStream::new(8);
        let u = sample_sphere(&mut rng, 3).unwrap();
        let g = single_point_estimate(&oracle, &DenseVector::zeros(3), 0.7, &u).unwrap();
        assert!(g.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn single_point_estimate_linear_1d() {
        // f(x) = 3x, x = 0, r = 0.5, u = +1: (1/0.5) * 1.5 * 1 = 3.
        let obj = Linear { a: vec![3.0] };
        let oracle = EvalCounter::new(&obj);
        let u = SphereSample::from_unit_vector(DenseVector::new(vec![1.0]).unwrap()).unwrap();
        let g = single_point_estimate(&oracle, &DenseVector::zeros(1), 0.5, &u).unwrap();
        assert!((g[0] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn single_point_estimate_rejects_bad_radius() {
        let obj = SquaredNorm { dim: 2 };
        let oracle = EvalCounter::new(&obj);
        let u = SphereSample::from_unit_vector(DenseVector::new(vec![1.0, 0.0]).unwrap()).unwrap();
        assert!(single_point_estimate(&oracle, &DenseVector::zeros(2), 0.0, &u).is_err());
        assert!(single_point_estimate(&oracle, &DenseVector::zeros(2), -1.0, &u).is_err());
    }

    #[test]
    fn smoothed_value_of_squared_norm_at_origin() {
        // f_r(0) = r^2 d / (d + 2) for f = |x|^2: here 0.01 * 2/4 = 0.005.
        let obj = SquaredNorm { dim: 2 };
        let oracle = EvalCounter::new(&obj);
        let mut rng = RngStream::new(9);
        let n = 100_000;
        let (mean, stderr) =
            estimate_smoothed_value(&oracle, &DenseVector::zeros(2), 0.1, n, &mut rng).unwrap();
        assert!((mean - 0.005).abs() <= 3.0 * stderr, "mean {mean}, stderr {stderr}");
        assert_eq!(oracle.queries(), n);
    }

    #[test]
    fn smoothing_of_linear_function_is_exact() {
        let obj = Linear { a: vec![1.0, 2.0] };
        let oracle = EvalCounter::new(&obj);
        let mut rng = RngStream::new(10);
        let x = DenseVector::new(vec![0.3, -0.7]).unwrap();
        let fx = 0.3 - 1.4;
        let (mean, stderr) = estimate_smoothed_value(&oracle, &x, 0.5, 50_000, &mut rng).unwrap();
        assert!((mean - fx).abs() <= 3.0 * stderr);
    }

    #[test]
    fn tiny_radius_recovers_the_plain_value() {
        let obj = SquaredNorm { dim: 2 };
        let oracle = EvalCounter::new(&obj);
        let mut rng = RngStream::new(11);
        let x = DenseVector::new(vec![1.0, -0.5]).unwrap();
        let fx = obj.value(&x);
        let (mean, stderr) = estimate_smoothed_value(&oracle, &x, 1e-8, 1000, &mut rng).unwrap();
        assert!((mean - fx).abs() <= 1e-12 + 3.0 * stderr);
    }

    #[test]
    fn smoothed_gradient_of_constant_vanishes() {
        struct Constant;
        impl Objective for Constant {
            fn dim(&self) -> usize {
                3
            }
            fn value(&self, _: &DenseVector) -> f64 {
                4.25
            }
        }
        let obj = Constant;
        let oracle = EvalCounter::new(&obj);
        let mut rng = RngStream::new(12);
        let (mean, stderr) =
            smoothed_gradient_stats(&oracle, &DenseVector::zeros(3), 0.2, 200_000, &mut rng)
                .unwrap();
        for j in 0..3 {
            assert!(mean[j].abs() <= 3.0 * stderr[j], "component {j}");
        }
    }

    #[test]
    fn smoothed_gradient_of_linear_function() {
        let obj = Linear { a: vec![1.0, 2.0] };
        let oracle = EvalCounter::new(&obj);
        let mut rng = RngStream::new(13);
        let x = DenseVector::new(vec![0.4, 0.9]).unwrap();
        let n = 1_000_000;
        let (mean, stderr) = smoothed_gradient_stats(&oracle, &x, 0.3, n, &mut rng).unwrap();
        for (j, a) in [1.0, 2.0].iter().enumerate() {
            assert!(
                (mean[j] - a).abs() <= 3.0 * stderr[j],
                "component {j}: {} vs {a} (se {})",
                mean[j],
                stderr[j]
            );
        }
        assert_eq!(oracle.queries(), n);
    }

    #[test]
    fn smoothed_gradient_of_quadratic_at_off_origin_point() {
        // For quadratics the smoothed gradient equals the true gradient.
        let obj = SquaredNorm { dim: 2 };
        let oracle = EvalCounter::new(&obj);
        let mut rng = RngStream::new(14);
        let x = DenseVector::new(vec![1.0, 0.0]).unwrap();
        let (mean, stderr) = smoothed_gradient_stats(&oracle, &x, 0.1, 1_000_000, &mut rng).unwrap();
        let expected = [2.0, 0.0];
        for j in 0..2 {
            assert!(
                (mean[j] - expected[j]).abs() <= 3.0 * stderr[j],
                "component {j}: {} vs {} (se {})",
                mean[j],
                expected[j],
                stderr[j]
            );
        }
    }

    #[test]
    fn samplers_are_bit_reproducible() {
        let mut a = RngStream::new(321);
        let mut b = RngStream::new(321);
        for _ in 0..100 {
            let ua = sample_sphere(&mut a, 4).unwrap();
            let ub = sample_sphere(&mut b, 4).unwrap();
            for j in 0..4 {
                assert_eq!(ua.direction()[j].to_bits(), ub.direction()[j].to_bits());
            }
        }
    }
}
