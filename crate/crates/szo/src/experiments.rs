//! Multi-trial experiment runner and aggregate statistics in the
//! mean / 3-sigma-band presentation, plus the convergence metrics used to
//! compare methods (threshold times, empirical rate slopes, variance
//! ratios).
//!
//! Determinism: the dataset is generated once from its own seed; trial `i`
//! of method `m` draws from a stream derived from `(base_seed, m, i)`, keyed
//! by the method's stable string identifier so that list order is
//! irrelevant. A spec plus base seed therefore fixes every output byte of
//! the trace and aggregate CSVs.

use std::io::Write;

use rayon::prelude::*;

use crate::core::{DenseVector, Gradient, Objective};
use crate::error::{Error, Result};
use crate::objectives::{
    beale_certificate, gen_logistic, gen_ridge, logistic_certificate, matyas_certificate,
    ridge_optimum, Beale, LogisticDataset, Matyas, OptimumCertificate, RidgeDataset,
};
use crate::optimizers::{run_optimizer, Method, RunOptions, RunOutcome, SzoHyperparams};
use crate::rng::RngStream;

/// Which benchmark objective to build, with its generator parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ObjectiveSpec {
    Logistic { d: usize, n_samples: usize, x_star: DenseVector, dataset_seed: u64 },
    Ridge {
        d: usize,
        n_samples: usize,
        x_star: DenseVector,
        reg_c: f64,
        noise_std: f64,
        dataset_seed: u64,
    },
    Beale,
    Matyas,
}

impl ObjectiveSpec {
    pub fn dim(&self) -> usize {
        match self {
            ObjectiveSpec::Logistic { d, .. } | ObjectiveSpec::Ridge { d, .. } => *d,
            ObjectiveSpec::Beale | ObjectiveSpec::Matyas => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ObjectiveSpec::Logistic { .. } => "logistic",
            ObjectiveSpec::Ridge { .. } => "ridge",
            ObjectiveSpec::Beale => "beale",
            ObjectiveSpec::Matyas => "matyas",
        }
    }
}

/// A constructed objective: the dataset (for the regression problems) plus
/// its optimum certificate.
pub enum BuiltObjective {
    Logistic(LogisticDataset),
    Ridge(RidgeDataset),
    Beale(Beale),
    Matyas(Matyas),
}

impl BuiltObjective {
    pub fn objective(&self) -> &dyn Objective {
        match self {
            BuiltObjective::Logistic(ds) => ds,
            BuiltObjective::Ridge(ds) => ds,
            BuiltObjective::Beale(f) => f,
            BuiltObjective::Matyas(f) => f,
        }
    }

    pub fn gradient_objective(&self) -> &dyn Gradient {
        match self {
            BuiltObjective::Logistic(ds) => ds,
            BuiltObjective::Ridge(ds) => ds,
            BuiltObjective::Beale(f) => f,
            BuiltObjective::Matyas(f) => f,
        }
    }

    pub fn certificate(&self) -> Result<OptimumCertificate> {
        match self {
            BuiltObjective::Logistic(ds) => logistic_certificate(ds, 1e-10),
            BuiltObjective::Ridge(ds) => ridge_optimum(ds),
            BuiltObjective::Beale(_) => Ok(beale_certificate()),
            BuiltObjective::Matyas(_) => Ok(matyas_certificate()),
        }
    }
}

/// The dataset is generated once per spec (shared by all methods and
/// trials) from a stream derived from the dataset seed.
pub fn build_objective(spec: &ObjectiveSpec) -> Result<BuiltObjective> {
    match spec {
        ObjectiveSpec::Logistic { d, n_samples, x_star, dataset_seed } => {
            let mut rng = RngStream::new(*dataset_seed).derive_tagged("dataset");
            Ok(BuiltObjective::Logistic(gen_logistic(*d, *n_samples, x_star, &mut rng)?))
        }
        ObjectiveSpec::Ridge { d, n_samples, x_star, reg_c, noise_std, dataset_seed } => {
            let mut rng = RngStream::new(*dataset_seed).derive_tagged("dataset");
            Ok(BuiltObjective::Ridge(gen_ridge(
                *d,
                *n_samples,
                x_star,
                *reg_c,
                *noise_std,
                &mut rng,
            )?))
        }
        ObjectiveSpec::Beale => Ok(BuiltObjective::Beale(Beale)),
        ObjectiveSpec::Matyas => Ok(BuiltObjective::Matyas(Matyas)),
    }
}

/// One method entry of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSpec {
    pub method: Method,
    pub hp: SzoHyperparams,
}

/// Full experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub objective: ObjectiveSpec,
    pub methods: Vec<MethodSpec>,
    pub iters: u64,
    pub trials: u64,
    pub base_seed: u64,
    pub x0: DenseVector,
    pub record_stride: u64,
    /// Worker threads for the trial pool; 0 means all available parallelism.
    pub workers: usize,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::invalid("methods", "at least one method is required"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials", "at least one trial is required"));
        }
        if self.record_stride == 0 {
            return Err(Error::invalid("record_stride", "must be at least 1"));
        }
        if self.x0.dim() != self.objective.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.objective.dim(),
                got: self.x0.dim(),
            });
        }
        Ok(())
    }
}

/// All trials of one method.
#[derive(Debug)]
pub struct MethodRuns {
    pub method: Method,
    pub hp: SzoHyperparams,
    pub runs: Vec<RunOutcome>,
}

impl MethodRuns {
    pub fn diverged_count(&self) -> usize {
        self.runs.iter().filter(|r| r.diverged).count()
    }

    pub fn total_algorithmic_queries(&self) -> u64 {
        self.runs.iter().map(|r| r.algorithmic_queries).sum()
    }

    pub fn total_bookkeeping_queries(&self) -> u64 {
        self.runs.iter().map(|r| r.bookkeeping_queries).sum()
    }
}

/// Runs every (method, trial) pair over a worker pool. Results are collected
/// in deterministic order regardless of scheduling.
pub fn run_trials(spec: &ExperimentSpec, built: &BuiltObjective) -> Result<Vec<MethodRuns>> {
    spec.validate()?;
    let objective = built.objective();
    let base = RngStream::new(spec.base_seed);
    let opts = RunOptions {
        record_stride: spec.record_stride,
        store_iterates: Some(false),
        ..RunOptions::default()
    };

    let jobs: Vec<(usize, u64)> = (0..spec.methods.len())
        .flat_map(|m| (0..spec.trials).map(move |i| (m, i)))
        .collect();

    let run_one = |&(m, i): &(usize, u64)| -> Result<RunOutcome> {
        let ms = &spec.methods[m];
        let mut rng = base.derive_tagged(ms.method.as_str()).derive(i);
        run_optimizer(ms.method, objective, &spec.x0, spec.iters, &ms.hp, &mut rng, &opts)
    };

    let outcomes: Vec<Result<RunOutcome>> = if spec.workers == 1 {
        jobs.iter().map(run_one).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(spec.workers)
            .build()
            .map_err(|e| Error::invalid("workers", e.to_string()))?;
        pool.install(|| jobs.par_iter().map(run_one).collect())
    };

    let mut per_method: Vec<MethodRuns> = spec
        .methods
        .iter()
        .map(|ms| MethodRuns { method: ms.method, hp: ms.hp, runs: Vec::new() })
        .collect();
    for ((m, _), outcome) in jobs.iter().zip(outcomes) {
        per_method[*m].runs.push(outcome?);
    }
    Ok(per_method)
}

/// Per-recorded-iteration mean, sample standard deviation, and 3-sigma band
/// of the optimality gap, over non-diverged trials only.
#[derive(Debug, Clone)]
pub struct AggregateStats {
    pub iters: Vec<u64>,
    pub mean_gap: Vec<f64>,
    pub std_gap: Vec<f64>,
    pub band_lo: Vec<f64>,
    pub band_hi: Vec<f64>,
    /// Number of trials contributing (non-diverged).
    pub n_alive: usize,
    pub diverged_trials: usize,
}

impl AggregateStats {
    pub fn len(&self) -> usize {
        self.iters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iters.is_empty()
    }

    pub fn final_mean_gap(&self) -> f64 {
        *self.mean_gap.last().expect("aggregate is never empty")
    }

    pub fn final_std_gap(&self) -> f64 {
        *self.std_gap.last().expect("aggregate is never empty")
    }

    fn index_of_iter(&self, iter: u64) -> Option<usize> {
        self.iters.iter().position(|k| *k == iter)
    }
}

/// Aggregates the traces of one method against a certified `f_star`.
/// Diverged trials are excluded and counted; all surviving traces must share
/// the recording grid.
pub fn aggregate(runs: &[RunOutcome], f_star: f64) -> Result<AggregateStats> {
    let alive: Vec<&RunOutcome> = runs.iter().filter(|r| !r.diverged).collect();
    let diverged_trials = runs.len() - alive.len();
    if alive.is_empty() {
        return Err(Error::NoTrials(format!("all {} trials diverged", runs.len())));
    }
    let grid: Vec<u64> = alive[0].trace.records().iter().map(|r| r.iter).collect();
    for run in &alive {
        let this: Vec<u64> = run.trace.records().iter().map(|r| r.iter).collect();
        if this != grid {
            return Err(Error::invalid("traces", "recording grids differ across trials"));
        }
    }
    let n = alive.len();
    let mut mean_gap = Vec::with_capacity(grid.len());
    let mut std_gap = Vec::with_capacity(grid.len());
    let mut band_lo = Vec::with_capacity(grid.len());
    let mut band_hi = Vec::with_capacity(grid.len());
    for idx in 0..grid.len() {
        let gaps: Vec<f64> =
            alive.iter().map(|run| run.trace.records()[idx].f_x - f_star).collect();
        let mean = gaps.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (gaps.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        mean_gap.push(mean);
        std_gap.push(std);
        band_lo.push(mean - 3.0 * std);
        band_hi.push(mean + 3.0 * std);
    }
    Ok(AggregateStats {
        iters: grid,
        mean_gap,
        std_gap,
        band_lo,
        band_hi,
        n_alive: n,
        diverged_trials,
    })
}

/// First recorded iteration whose mean gap is at or below `eps`.
pub fn iterations_to_threshold(agg: &AggregateStats, eps: f64) -> Option<u64> {
    agg.iters
        .iter()
        .zip(&agg.mean_gap)
        .find(|(_, gap)| **gap <= eps)
        .map(|(iter, _)| *iter)
}

/// Least-squares slope of `log(mean_gap)` against `log(iter)` over the
/// recorded iterations in `[lo, hi]`. Requires positive gaps and `lo >= 1`.
pub fn rate_slope(agg: &AggregateStats, lo: u64, hi: u64) -> Result<f64> {
    if lo == 0 {
        return Err(Error::invalid("window", "slope window must start at iteration 1 or later"));
    }
    let points: Vec<(f64, f64)> = agg
        .iters
        .iter()
        .zip(&agg.mean_gap)
        .filter(|(k, _)| (lo..=hi).contains(*k))
        .map(|(k, gap)| ((*k as f64).ln(), *gap))
        .collect();
    if points.len() < 2 {
        return Err(Error::invalid("window", "need at least two records in the window"));
    }
    if points.iter().any(|(_, g)| *g <= 0.0) {
        return Err(Error::invalid("window", "mean gaps must be positive for a log-log fit"));
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|(x, _)| x).sum();
    let sy: f64 = points.iter().map(|(_, y)| y.ln()).sum();
    let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = points.iter().map(|(x, y)| x * y.ln()).sum();
    let denom = n * sxx - sx * sx;
    if denom == 0.0 {
        return Err(Error::invalid("window", "degenerate window"));
    }
    Ok((n * sxy - sx * sy) / denom)
}

/// Ratio of gap standard deviations `std_a(k) / std_b(k)` at recorded
/// iteration `k`.
pub fn variance_ratio(agg_a: &AggregateStats, agg_b: &AggregateStats, iter: u64) -> Result<f64> {
    let ia = agg_a
        .index_of_iter(iter)
        .ok_or_else(|| Error::invalid("iter", "not a recorded iteration of the first aggregate"))?;
    let ib = agg_b
        .index_of_iter(iter)
        .ok_or_else(|| Error::invalid("iter", "not a recorded iteration of the second aggregate"))?;
    let sb = agg_b.std_gap[ib];
    if sb == 0.0 {
        return Err(Error::invalid("iter", "second aggregate has zero deviation at this iteration"));
    }
    Ok(agg_a.std_gap[ia] / sb)
}

/// Writes per-trial trace rows: `method,trial,iter,f_value,gap,queries`.
pub const TRACE_CSV_HEADER: &str = "method,trial,iter,f_value,gap,queries";

pub fn write_trace_rows(
    w: &mut impl Write,
    method: Method,
    runs: &[RunOutcome],
    f_star: f64,
) -> Result<()> {
    for (trial, run) in runs.iter().enumerate() {
        for rec in run.trace.records() {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                method.as_str(),
                trial,
                rec.iter,
                rec.f_x,
                rec.f_x - f_star,
                rec.queries
            )?;
        }
    }
    Ok(())
}

/// Writes aggregate rows: `method,iter,mean_gap,std_gap,band_lo,band_hi,n_alive`.
pub const AGGREGATE_CSV_HEADER: &str = "method,iter,mean_gap,std_gap,band_lo,band_hi,n_alive";

pub fn write_aggregate_rows(
    w: &mut impl Write,
    method: Method,
    agg: &AggregateStats,
) -> Result<()> {
    for i in 0..agg.len() {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            method.as_str(),
            agg.iters[i],
            agg.mean_gap[i],
            agg.std_gap[i],
            agg.band_lo[i],
            agg.band_hi[i],
            agg.n_alive
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::Trace;

    fn synthetic_outcome(gaps: &[f64], f_star: f64, stride: u64) -> RunOutcome {
        let mut trace = Trace::new(false);
        let x = DenseVector::zeros(2);
        for (i, g) in gaps.iter().enumerate() {
            trace.record(i as u64 * stride, &x, f_star + g, i as u64).unwrap();
        }
        RunOutcome {
            method: Method::VanillaSzo,
            trace,
            diverged: false,
            algorithmic_queries: gaps.len() as u64,
            bookkeeping_queries: gaps.len() as u64,
            final_x: x,
            second_moments: None,
        }
    }

    fn synthetic_aggregate(gaps: Vec<f64>, iters: Vec<u64>) -> AggregateStats {
        let n = gaps.len();
        assert_eq!(n, iters.len());
        AggregateStats {
            iters,
            band_lo: gaps.clone(),
            band_hi: gaps.clone(),
            std_gap: vec![0.0; n],
            mean_gap: gaps,
            n_alive: 1,
            diverged_trials: 0,
        }
    }

    #[test]
    fn single_trial_band_collapses_to_the_mean() {
        let runs = vec![synthetic_outcome(&[1.0, 0.5], 2.0, 1)];
        let agg = aggregate(&runs, 2.0).unwrap();
        assert_eq!(agg.std_gap, vec![0.0, 0.0]);
        assert_eq!(agg.band_lo, agg.mean_gap);
        assert_eq!(agg.band_hi, agg.mean_gap);
        assert_eq!(agg.n_alive, 1);
    }

    #[test]
    fn two_trial_aggregate_by_hand() {
        let runs =
            vec![synthetic_outcome(&[5.0, 1.0], 0.0, 1), synthetic_outcome(&[5.0, 3.0], 0.0, 1)];
        let agg = aggregate(&runs, 0.0).unwrap();
        assert_eq!(agg.mean_gap[1], 2.0);
        let expected_std = 2.0f64.sqrt();
        assert!((agg.std_gap[1] - expected_std).abs() < 1e-15);
        assert!((agg.band_lo[1] - (2.0 - 3.0 * expected_std)).abs() < 1e-15);
        assert!((agg.band_hi[1] - (2.0 + 3.0 * expected_std)).abs() < 1e-15);
    }

    #[test]
    fn all_diverged_trials_error() {
        let mut run = synthetic_outcome(&[1.0], 0.0, 1);
        run.diverged = true;
        assert!(matches!(aggregate(&[run], 0.0), Err(Error::NoTrials(_))));
    }

    #[test]
    fn aggregate_is_order_independent() {
        let a = synthetic_outcome(&[4.0, 2.0], 0.0, 1);
        let b = synthetic_outcome(&[6.0, 1.0], 0.0, 1);
        let c = synthetic_outcome(&[5.0, 3.0], 0.0, 1);
        let fwd = aggregate(&[a, b, c], 0.0).unwrap();
        let a = synthetic_outcome(&[4.0, 2.0], 0.0, 1);
        let b = synthetic_outcome(&[6.0, 1.0], 0.0, 1);
        let c = synthetic_outcome(&[5.0, 3.0], 0.0, 1);
        let rev = aggregate(&[c, b, a], 0.0).unwrap();
        assert_eq!(fwd.mean_gap, rev.mean_gap);
        assert_eq!(fwd.std_gap, rev.std_gap);
    }

    #[test]
    fn threshold_scan_worked_examples() {
        let agg = synthetic_aggregate(vec![1.0, 0.5, 0.1], vec![0, 10, 20]);
        assert_eq!(iterations_to_threshold(&agg, 0.2), Some(20));
        assert_eq!(iterations_to_threshold(&agg, 2.0), Some(0));
        assert_eq!(iterations_to_threshold(&agg, 0.01), None);
    }

    #[test]
    fn rate_slope_recovers_exact_power_laws() {
        let iters: Vec<u64> = (1..=100).collect();
        let minus_two_thirds: Vec<f64> =
            iters.iter().map(|k| (*k as f64).powf(-2.0 / 3.0)).collect();
        let agg = synthetic_aggregate(minus_two_thirds, iters.clone());
        let slope = rate_slope(&agg, 1, 100).unwrap();
        assert!((slope + 2.0 / 3.0).abs() <= 1e-6, "slope {slope}");

        let inverse: Vec<f64> = iters.iter().map(|k| 1.0 / *k as f64).collect();
        let agg = synthetic_aggregate(inverse, iters.clone());
        let slope = rate_slope(&agg, 1, 100).unwrap();
        assert!((slope + 1.0).abs() <= 1e-6, "slope {slope}");

        let constant: Vec<f64> = iters.iter().map(|_| 0.75).collect();
        let agg = synthetic_aggregate(constant, iters);
        let slope = rate_slope(&agg, 1, 100).unwrap();
        assert!(slope.abs() <= 1e-12, "slope {slope}");
    }

    #[test]
    fn rate_slope_contract_errors() {
        let agg = synthetic_aggregate(vec![1.0, 0.5], vec![0, 10]);
        assert!(rate_slope(&agg, 0, 10).is_err()); // window touches iter 0
        assert!(rate_slope(&agg, 10, 10).is_err()); // single point
        let agg = synthetic_aggregate(vec![-1.0, 0.5], vec![5, 10]);
        assert!(rate_slope(&agg, 5, 10).is_err()); // non-positive gap
    }

    #[test]
    fn variance_ratio_worked_examples() {
        let mut a = synthetic_aggregate(vec![1.0], vec![7]);
        let mut b = synthetic_aggregate(vec![1.0], vec![7]);
        a.std_gap = vec![2.0];
        b.std_gap = vec![2.0];
        assert_eq!(variance_ratio(&a, &b, 7).unwrap(), 1.0);
        a.std_gap = vec![0.0];
        assert_eq!(variance_ratio(&a, &b, 7).unwrap(), 0.0);
        b.std_gap = vec![0.0];
        assert!(variance_ratio(&a, &b, 7).is_err());
        assert!(variance_ratio(&a, &b, 8).is_err());
    }

    #[test]
    fn run_trials_is_deterministic_and_respects_grid() {
        let spec = ExperimentSpec {
            objective: ObjectiveSpec::Logistic {
                d: 2,
                n_samples: 20,
                x_star: DenseVector::filled(2, 0.5).unwrap(),
                dataset_seed: 7,
            },
            methods: vec![
                MethodSpec {
                    method: Method::HlfSzo,
                    hp: SzoHyperparams::new(0.05, 0.1, 0.9, 1.0).unwrap(),
                },
                MethodSpec {
                    method: Method::VanillaSzo,
                    hp: SzoHyperparams::new(5e-4, 0.1, 0.0, 0.0).unwrap(),
                },
            ],
            iters: 50,
            trials: 4,
            base_seed: 999,
            x0: DenseVector::zeros(2),
            record_stride: 10,
            workers: 2,
        };
        let built = build_objective(&spec.objective).unwrap();
        let first = run_trials(&spec, &built).unwrap();
        let second = run_trials(&spec, &built).unwrap();
        for (a, b) in first.iter().zip(&second) {
            assert_eq!(a.method, b.method);
            for (ra, rb) in a.runs.iter().zip(&b.runs) {
                assert_eq!(ra.trace.len(), rb.trace.len());
                for (pa, pb) in ra.trace.records().iter().zip(rb.trace.records()) {
                    assert_eq!(pa.iter, pb.iter);
                    assert_eq!(pa.f_x.to_bits(), pb.f_x.to_bits());
                    assert_eq!(pa.queries, pb.queries);
                }
            }
        }
        // Grid: 0, 10, 20, 30, 40, 50.
        let grid: Vec<u64> =
            first[0].runs[0].trace.records().iter().map(|r| r.iter).collect();
        assert_eq!(grid, vec![0, 10, 20, 30, 40, 50]);
    }

    #[test]
    fn single_trial_zero_iters_gives_one_record_per_method() {
        let spec = ExperimentSpec {
            objective: ObjectiveSpec::Matyas,
            methods: vec![MethodSpec {
                method: Method::HfSzo,
                hp: SzoHyperparams::new(0.02, 0.01, 0.0, 1.0).unwrap(),
            }],
            iters: 0,
            trials: 1,
            base_seed: 1,
            x0: DenseVector::new(vec![-5.0, -5.0]).unwrap(),
            record_stride: 1,
            workers: 1,
        };
        let built = build_objective(&spec.objective).unwrap();
        let runs = run_trials(&spec, &built).unwrap();
        assert_eq!(runs.len(), 1);
        assert_eq!(runs[0].runs.len(), 1);
        assert_eq!(runs[0].runs[0].trace.len(), 1);
    }

    #[test]
    fn csv_rows_have_the_documented_shape() {
        let runs = vec![synthetic_outcome(&[1.0, 0.5], 0.25, 5)];
        let mut buf = Vec::new();
        write_trace_rows(&mut buf, Method::HfSzo, &runs, 0.25).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let first = text.lines().next().unwrap();
        assert_eq!(first.split(',').count(), TRACE_CSV_HEADER.split(',').count());
        assert!(first.starts_with("hf_szo,0,0,"));

        let agg = aggregate(&runs, 0.25).unwrap();
        let mut buf = Vec::new();
        write_aggregate_rows(&mut buf, Method::HfSzo, &agg).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().next().unwrap().split(',').count(),
            AGGREGATE_CSV_HEADER.split(',').count()
        );
    }
}
