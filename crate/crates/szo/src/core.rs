//! Shared domain types: decision vectors, counted value oracles, and
//! per-iteration traces.

use std::cell::Cell;
use std::ops::Index;

use crate::error::{Error, Result};

/// A fixed-dimension vector of finite 64-bit reals. This is the universal
/// decision-variable type; construction rejects NaN/Inf entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseVector {
    entries: Vec<f64>,
}

impl DenseVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("dim", "dimension must be at least 1"));
        }
        if !entries.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite { context: "DenseVector::new".to_string() });
        }
        Ok(Self { entries })
    }

    /// Constructs without the finiteness check. Used on hot paths where the
    /// caller inspects the result for divergence itself.
    pub(crate) fn from_raw(entries: Vec<f64>) -> Self {
        Self { entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { entries: vec![0.0; dim.max(1)] }
    }

    pub fn filled(dim: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; dim.max(1)])
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.entries.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|v| v.is_finite())
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &DenseVector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.entries.iter().zip(other.iter()).map(|(a, b)| a * b).sum()
    }

    /// Euclidean distance to `other`.
    pub fn distance(&self, other: &DenseVector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.entries
            .iter()
            .zip(other.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Returns `self + scale * dir`, without finiteness validation.
    pub fn add_scaled(&self, scale: f64, dir: &DenseVector) -> DenseVector {
        debug_assert_eq!(self.dim(), dir.dim());
        DenseVector::from_raw(
            self.entries.iter().zip(dir.iter()).map(|(x, u)| x + scale * u).collect(),
        )
    }
}

impl Index<usize> for DenseVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.entries[i]
    }
}

/// A value-only black box. Implementations must be deterministic: identical
/// inputs yield identical outputs within a process run.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &DenseVector) -> f64;
}

/// Analytic-gradient extension of [`Objective`]. Used by verification and
/// benchmark code only; the zeroth-order steppers never see it.
pub trait Gradient: Objective {
    fn gradient(&self, x: &DenseVector) -> DenseVector;
}

/// Query-counting wrapper around an objective. Every call to [`EvalCounter::eval`]
/// increments the counter by exactly one, whether or not the output is usable.
pub struct EvalCounter<'a> {
    objective: &'a dyn Objective,
    queries: Cell<u64>,
}

impl<'a> EvalCounter<'a> {
    pub fn new(objective: &'a dyn Objective) -> Self {
        Self { objective, queries: Cell::new(0) }
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn queries(&self) -> u64 {
        self.queries.get()
    }

    /// Counted evaluation with dimension and finiteness checks.
    pub fn eval(&self, x: &DenseVector) -> Result<f64> {
        if x.dim() != self.objective.dim() {
            return Err(Error::DimensionMismatch { expected: self.objective.dim(), got: x.dim() });
        }
        self.queries.set(self.queries.get() + 1);
        let value = self.objective.value(x);
        if !value.is_finite() {
            return Err(Error::NonFinite {
                context: format!("objective value at iterate {}", preview(x)),
            });
        }
        Ok(value)
    }
}

fn preview(x: &DenseVector) -> String {
    const SHOW: usize = 4;
    let head: Vec<String> = x.iter().take(SHOW).map(|v| format!("{v:.6e}")).collect();
    if x.dim() > SHOW {
        format!("[{}, ...] (dim {})", head.join(", "), x.dim())
    } else {
        format!("[{}]", head.join(", "))
    }
}

/// One recorded point of an optimizer run.
#[derive(Debug, Clone)]
pub struct TraceRecord {
    pub iter: u64,
    /// Present only when the trace stores iterates (kept off for large dims
    /// to bound memory).
    pub x: Option<DenseVector>,
    pub f_x: f64,
    pub queries: u64,
}

/// Per-iteration record of an optimizer run. Iterations are strictly
/// increasing and query counts non-decreasing.
#[derive(Debug, Clone)]
pub struct Trace {
    records: Vec<TraceRecord>,
    store_x: bool,
}

impl Trace {
    pub fn new(store_x: bool) -> Self {
        Self { records: Vec::new(), store_x }
    }

    pub fn stores_iterates(&self) -> bool {
        self.store_x
    }

    pub fn record(&mut self, iter: u64, x: &DenseVector, f_x: f64, queries: u64) -> Result<()> {
        if let Some(last) = self.records.last() {
            if iter <= last.iter {
                return Err(Error::TraceOrder { last: last.iter, got: iter });
            }
            if queries < last.queries {
                return Err(Error::TraceQueries { last: last.queries, got: queries });
            }
        }
        let stored = if self.store_x { Some(x.clone()) } else { None };
        self.records.push(TraceRecord { iter, x: stored, f_x, queries });
        Ok(())
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

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

    #[test]
    fn counted_eval_zero_case() {
        let obj = SquaredNorm { dim: 2 };
        let counter = EvalCounter::new(&obj);
        assert_eq!(counter.queries(), 0);
        let v = counter.eval(&DenseVector::zeros(2)).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(counter.queries(), 1);
    }

    #[test]
    fn counted_eval_direct_value() {
        let obj = SquaredNorm { dim: 2 };
        let counter = EvalCounter::new(&obj);
        counter.eval(&DenseVector::zeros(2)).unwrap();
        let v = counter.eval(&DenseVector::new(vec![3.0, 4.0]).unwrap()).unwrap();
        assert_eq!(v, 25.0);
        assert_eq!(counter.queries(), 2);
    }

    #[test]
    fn counted_eval_dimension_mismatch() {
        let obj = SquaredNorm { dim: 2 };
        let counter = EvalCounter::new(&obj);
        let err = counter.eval(&DenseVector::zeros(3)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 2, got: 3 }));
        // A rejected call never touches the objective.
        assert_eq!(counter.queries(), 0);
    }

    #[test]
    fn counted_eval_rejects_non_finite_output() {
        struct Bad;
        impl Objective for Bad {
            fn dim(&self) -> usize {
                1
            }
            fn value(&self, _x: &DenseVector) -> f64 {
                f64::NAN
            }
        }
        let obj = Bad;
        let counter = EvalCounter::new(&obj);
        let err = counter.eval(&DenseVector::zeros(1)).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
        // The query itself still happened.
        assert_eq!(counter.queries(), 1);
    }

    #[test]
    fn dense_vector_rejects_non_finite() {
        assert!(DenseVector::new(vec![1.0, f64::NAN]).is_err());
        assert!(DenseVector::new(vec![1.0, f64::INFINITY]).is_err());
        assert!(DenseVector::new(vec![]).is_err());
    }

    #[test]
    fn trace_appends_in_order() {
        let mut trace = Trace::new(true);
        let x = DenseVector::new(vec![1.0, 1.0]).unwrap();
        trace.record(0, &x, 2.0, 1).unwrap();
        assert_eq!(trace.len(), 1);
        trace.record(1, &x, 2.0, 2).unwrap();
        assert_eq!(trace.len(), 2);
    }

    #[test]
    fn trace_rejects_out_of_order_iter() {
        let mut trace = Trace::new(false);
        let x = DenseVector::zeros(2);
        trace.record(0, &x, 2.0, 1).unwrap();
        let err = trace.record(0, &x, 2.0, 2).unwrap_err();
        assert!(matches!(err, Error::TraceOrder { last: 0, got: 0 }));
    }

    #[test]
    fn trace_rejects_decreasing_queries() {
        let mut trace = Trace::new(false);
        let x = DenseVector::zeros(2);
        trace.record(0, &x, 2.0, 5).unwrap();
        let err = trace.record(1, &x, 2.0, 4).unwrap_err();
        assert!(matches!(err, Error::TraceQueries { last: 5, got: 4 }));
    }

    #[test]
    fn trace_respects_store_flag() {
        let mut trace = Trace::new(false);
        let x = DenseVector::zeros(2);
        trace.record(0, &x, 0.0, 0).unwrap();
        assert!(trace.records()[0].x.is_none());

        let mut trace = Trace::new(true);
        trace.record(0, &x, 0.0, 0).unwrap();
        assert_eq!(trace.records()[0].x.as_ref().unwrap(), &x);
    }
}
