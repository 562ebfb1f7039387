//! Single-point zeroth-order (SZO) optimization with high-pass and low-pass
//! filters, plus the continuous-time extremum-seeking analogue and a
//! multi-trial benchmark harness.
//!
//! The update rules implemented here estimate gradients from one function
//! value per iteration: draw a uniform unit direction `u`, query
//! `f(x + r u)`, and step along `-(d/r) f(x + r u) u`. Two first-order
//! filters refine that signal:
//!
//! * a high-pass filter on successive perturbed values
//!   (`z_k = (1 - beta) z_{k-1} + f_k - f_{k-1}`), which at `beta = 1`
//!   reduces to residual feedback `f_k - f_{k-1}` and strips the slowly
//!   varying component that dominates the estimator's variance;
//! * a low-pass filter on the descent direction, algebraically identical to
//!   a heavy-ball momentum term `alpha (x_k - x_{k-1})`.
//!
//! The crate provides the six update rules (`vanilla_szo`, `two_point_sym`,
//! `two_point_fwd`, `hf_szo`, `lf_szo`, `hlf_szo`) plus the raw filter-form
//! recursion they are discretized from, benchmark objectives with certified
//! optima, deterministic seeded sampling, convergence-condition calculators,
//! an extremum-seeking ODE simulator, and an experiment runner that
//! aggregates repeated trials into mean and 3-sigma bands.
//!
//! The `szo` binary exposes canned experiment configurations, beta sweeps,
//! verification suites, and the hyperparameter calculator; see the README.

pub mod config;
pub mod core;
pub mod error;
pub mod es_sim;
pub mod experiments;
pub mod objectives;
pub mod optimizers;
pub mod rng;
pub mod sampling;

pub use crate::core::{DenseVector, EvalCounter, Gradient, Objective, Trace, TraceRecord};
pub use crate::error::{Error, Result};
pub use crate::rng::RngStream;
pub use crate::sampling::{
    estimate_smoothed_gradient, estimate_smoothed_value, sample_ball, sample_sphere,
    single_point_estimate, smoothed_gradient_stats, SphereSample,
};
