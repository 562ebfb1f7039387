//! The single-point and two-point zeroth-order update rules, the raw
//! filter-form recursion they discretize, and the multi-step runner.
//!
//! All single-point methods share one code path for the arithmetic they have
//! in common, so the reduction identities are exact at the bit level under a
//! shared direction stream:
//!
//! * `hlf(alpha = 0)` produces the same iterates as `hf`,
//! * `hlf(beta = 0)` the same as `lf`,
//! * `hf(beta = 0)` and `lf(alpha = 0)` the same as `vanilla`.
//!
//! The high-pass recursion is evaluated as
//! `z_k = ((1 - beta) z_{k-1} - f_{k-1}) + f_k` so that at `beta = 0` the
//! telescoping `z_k = f_k` holds exactly in floating point, not just in
//! exact arithmetic.

mod theorem;

pub use theorem::{theorem_bounds, ConvexityCase, TheoremBounds, TheoremInputs};

use crate::core::{DenseVector, EvalCounter, Objective, Trace};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::sampling::{sample_sphere, SphereSample};

/// Trial values beyond this magnitude are treated as divergence; sweeps
/// intentionally cross stability boundaries and must keep statistics
/// well-defined.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// Stable string identifiers, used in config files and CSV output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    VanillaSzo,
    TwoPointSym,
    TwoPointFwd,
    HfSzo,
    LfSzo,
    HlfSzo,
    FilterForm,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::VanillaSzo,
        Method::TwoPointSym,
        Method::TwoPointFwd,
        Method::HfSzo,
        Method::LfSzo,
        Method::HlfSzo,
        Method::FilterForm,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::VanillaSzo => "vanilla_szo",
            Method::TwoPointSym => "two_point_sym",
            Method::TwoPointFwd => "two_point_fwd",
            Method::HfSzo => "hf_szo",
            Method::LfSzo => "lf_szo",
            Method::HlfSzo => "hlf_szo",
            Method::FilterForm => "filter_form",
        }
    }

    /// Algorithmic oracle queries per iteration.
    pub fn queries_per_step(&self) -> u64 {
        match self {
            Method::TwoPointSym | Method::TwoPointFwd => 2,
            _ => 1,
        }
    }

    pub fn uses_alpha(&self) -> bool {
        matches!(self, Method::LfSzo | Method::HlfSzo | Method::FilterForm)
    }

    pub fn uses_beta(&self) -> bool {
        matches!(self, Method::HfSzo | Method::HlfSzo | Method::FilterForm)
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .iter()
            .copied()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::invalid("method", format!("unknown method `{s}`")))
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Step size, smoothing radius, and the two filter coefficients.
/// `alpha` is the low-pass/momentum coefficient in [0, 1]; `beta >= 0` is the
/// high-pass coefficient (`beta = 1` is pure residual feedback).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SzoHyperparams {
    pub eta: f64,
    pub r: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl SzoHyperparams {
    pub fn new(eta: f64, r: f64, alpha: f64, beta: f64) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::invalid("eta", "step size must be positive"));
        }
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::invalid("r", "smoothing radius must be positive"));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::invalid("alpha", "momentum coefficient must lie in [0, 1]"));
        }
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::invalid("beta", "high-pass coefficient must be non-negative"));
        }
        Ok(Self { eta, r, alpha, beta })
    }

    pub fn basic(eta: f64, r: f64) -> Result<Self> {
        Self::new(eta, r, 0.0, 0.0)
    }
}

/// Where step directions come from. Production runs draw them from an
/// [`RngStream`]; deterministic unit tests inject a fixed sequence.
pub trait DirectionSource {
    fn next_direction(&mut self, d: usize) -> Result<SphereSample>;
}

impl DirectionSource for RngStream {
    fn next_direction(&mut self, d: usize) -> Result<SphereSample> {
        sample_sphere(self, d)
    }
}

/// Externally supplied direction sequence for worked-example tests.
pub struct ForcedDirections {
    dirs: Vec<DenseVector>,
    cursor: usize,
    cycle: bool,
}

impl ForcedDirections {
    pub fn new(dirs: Vec<DenseVector>) -> Self {
        Self { dirs, cursor: 0, cycle: false }
    }

    /// Cycles through `dirs` forever.
    pub fn cycling(dirs: Vec<DenseVector>) -> Self {
        Self { dirs, cursor: 0, cycle: true }
    }
}

impl DirectionSource for ForcedDirections {
    fn next_direction(&mut self, d: usize) -> Result<SphereSample> {
        if self.dirs.is_empty() || (!self.cycle && self.cursor >= self.dirs.len()) {
            return Err(Error::invalid("directions", "forced sequence exhausted"));
        }
        let dir = self.dirs[self.cursor % self.dirs.len()].clone();
        self.cursor += 1;
        if dir.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: dir.dim() });
        }
        SphereSample::from_unit_vector(dir)
    }
}

/// Initialization rule for the filtered residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZInit {
    /// `z_0 = f(x_0 + r u_0)`: the first query seeds the filter, preserving
    /// the strict one-query-per-iteration property.
    #[default]
    MainText,
    /// The first step instead queries both `f(x +- r u)` and seeds
    /// `z = (f_plus - f_minus) / 2` (one extra query, total T + 1).
    SymmetricFirstStep,
}

/// Mutable state shared by all single-point steppers: current and previous
/// iterate, the filtered residual, and the last queried perturbed value.
/// At `k = 0`, `x_prev == x_curr` (so the first momentum term vanishes) and
/// `z_prev == f_prev == 0` (so the first filter output is exactly `f_0`).
#[derive(Debug, Clone)]
pub struct SzoState {
    pub(crate) x_curr: DenseVector,
    pub(crate) x_prev: DenseVector,
    pub(crate) z_prev: f64,
    pub(crate) f_prev: f64,
    pub(crate) k: u64,
    z_init: ZInit,
}

impl SzoState {
    pub fn new(x0: DenseVector) -> Self {
        Self::with_z_init(x0, ZInit::MainText)
    }

    pub fn with_z_init(x0: DenseVector, z_init: ZInit) -> Self {
        Self { x_prev: x0.clone(), x_curr: x0, z_prev: 0.0, f_prev: 0.0, k: 0, z_init }
    }

    pub fn x(&self) -> &DenseVector {
        &self.x_curr
    }

    pub fn x_prev(&self) -> &DenseVector {
        &self.x_prev
    }

    pub fn iteration(&self) -> u64 {
        self.k
    }

    /// Squared norm of the last displacement `x_k - x_{k-1}`.
    pub fn last_step_sq(&self) -> f64 {
        self.x_curr.iter().zip(self.x_prev.iter()).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    fn commit(&mut self, x_next: DenseVector) -> StepStatus {
        if !x_next.is_finite() {
            return StepStatus::Diverged;
        }
        self.x_prev = std::mem::replace(&mut self.x_curr, x_next);
        self.k += 1;
        StepStatus::Advanced
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepStatus {
    Advanced,
    /// A non-finite or out-of-range value appeared; the state was left
    /// untouched and the trial should stop.
    Diverged,
}

/// Outcome of one step: the status plus the scalar `z` that multiplied
/// `(d/r) u` in the attempted update (used by the second-moment logger).
#[derive(Debug, Clone, Copy)]
pub struct StepOutcome {
    pub status: StepStatus,
    pub z: f64,
}

impl StepOutcome {
    fn diverged() -> Self {
        Self { status: StepStatus::Diverged, z: 0.0 }
    }

    fn advanced(z: f64) -> Self {
        Self { status: StepStatus::Advanced, z }
    }

    pub fn is_diverged(&self) -> bool {
        self.status == StepStatus::Diverged
    }
}

/// Counted query with divergence screening. `Ok(None)` means the trial
/// diverged (non-finite or beyond [`DIVERGENCE_LIMIT`]); contract errors
/// still propagate.
fn screened_eval(oracle: &EvalCounter, x: &DenseVector) -> Result<Option<f64>> {
    match oracle.eval(x) {
        Ok(f) if f.abs() > DIVERGENCE_LIMIT => Ok(None),
        Ok(f) => Ok(Some(f)),
        Err(Error::NonFinite { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

#[inline]
fn step_scale(hp: &SzoHyperparams, d: usize, z: f64) -> f64 {
    hp.eta * (d as f64 / hp.r) * z
}

#[inline]
fn descend(x: &DenseVector, coef: f64, u: &DenseVector) -> DenseVector {
    DenseVector::from_raw(x.iter().zip(u.iter()).map(|(xi, ui)| xi - coef * ui).collect())
}

#[inline]
fn descend_with_momentum(
    x: &DenseVector,
    coef: f64,
    u: &DenseVector,
    alpha: f64,
    x_prev: &DenseVector,
) -> DenseVector {
    DenseVector::from_raw(
        x.iter()
            .zip(u.iter())
            .zip(x_prev.iter())
            .map(|((xi, ui), pi)| xi - coef * ui + alpha * (xi - pi))
            .collect(),
    )
}

/// High-pass recursion, arranged so that `beta = 0` telescopes exactly:
/// `(1 * z_prev - f_prev)` is a true zero whenever `z_prev == f_prev`.
#[inline]
fn filtered_residual(beta: f64, z_prev: f64, f_prev: f64, f_k: f64) -> f64 {
    ((1.0 - beta) * z_prev - f_prev) + f_k
}

/// Vanilla single-point update `x - eta (d/r) f(x + r u) u`. One query.
pub fn step_vanilla(
    state: &mut SzoState,
    oracle: &EvalCounter,
    hp: &SzoHyperparams,
    dirs: &mut dyn DirectionSource,
) -> Result<StepOutcome> {
    let d = state.x_curr.dim();
    let u = dirs.next_direction(d)?;
    let Some(f_k) = screened_eval(oracle, &state.x_curr.add_scaled(hp.r, u.direction()))? else {
        return Ok(StepOutcome::diverged());
    };
    let coef = step_scale(hp, d, f_k);
    let next = descend(&state.x_curr, coef, u.direction());
    Ok(match state.commit(next) {
        StepStatus::Advanced => StepOutcome::advanced(f_k),
        StepStatus::Diverged => StepOutcome::diverged(),
    })
}

/// Symmetric two-point update `x - eta (d/2r) (f(x + r u) - f(x - r u)) u`.
/// Two queries.
pub fn step_two_point_symmetric(
    state: &mut SzoState,
    oracle: &EvalCounter,
    hp: &SzoHyperparams,
    dirs: &mut dyn DirectionSource,
) -> Result<StepOutcome> {
    let d = state.x_curr.dim();
    let u = dirs.next_direction(d)?;
    let Some(f_plus) = screened_eval(oracle, &state.x_curr.add_scaled(hp.r, u.direction()))? else {
        return Ok(StepOutcome::diverged());
    };
    let Some(f_minus) = screened_eval(oracle, &state.x_curr.add_scaled(-hp.r, u.direction()))?
    else {
        return Ok(StepOutcome::diverged());
    };
    let z = 0.5 * (f_plus - f_minus);
    let coef = step_scale(hp, d, z);
    let next = descend(&state.x_curr, coef, u.direction());
    Ok(match state.commit(next) {
        StepStatus::Advanced => StepOutcome::advanced(z),
        StepStatus::Diverged => StepOutcome::diverged(),
    })
}

/// Forward-difference two-point update
/// `x - eta (d/r) (f(x + r u) - f(x)) u`. Two queries.
pub fn step_two_point_forward(
    state: &mut SzoState,
    oracle: &EvalCounter,
    hp: &SzoHyperparams,
    dirs: &mut dyn DirectionSource,
) -> Result<StepOutcome> {
    let d = state.x_curr.dim();
    let u = dirs.next_direction(d)?;
    let Some(f_plus) = screened_eval(oracle, &state.x_curr.add_scaled(hp.r, u.direction()))? else {
        return Ok(StepOutcome::diverged());
    };
    let Some(f_base) = screened_eval(oracle, &state.x_curr)? else {
        return Ok(StepOutcome::diverged());
    };
    let z = f_plus - f_base;
    let coef = step_scale(hp, d, z);
    let next = descend(&state.x_curr, coef, u.direction());
    Ok(match state.commit(next) {
        StepStatus::Advanced => StepOutcome::advanced(z),
        StepStatus::Diverged => StepOutcome::diverged(),
    })
}

/// Single-point update with a high-pass filter on successive perturbed
/// values. One query per step: the previous perturbed value is inherited
/// from the last iteration. `hp.alpha` is ignored.
pub fn step_hf(
    state: &mut SzoState,
    oracle: &EvalCounter,
    hp: &SzoHyperparams,
    dirs: &mut dyn DirectionSource,
) -> Result<StepOutcome> {
    let d = state.x_curr.dim();
    let u = dirs.next_direction(d)?;
    let Some((z_k, f_carry)) = filtered_query(state, oracle, hp, &u)? else {
        return Ok(StepOutcome::diverged());
    };
    let coef = step_scale(hp, d, z_k);
    let next = descend(&state.x_curr, coef, u.direction());
    Ok(match state.commit(next) {
        StepStatus::Advanced => {
            state.z_prev = z_k;
            state.f_prev = f_carry;
            StepOutcome::advanced(z_k)
        }
        StepStatus::Diverged => StepOutcome::diverged(),
    })
}

/// Single-point update with the low-pass (heavy-ball momentum) term
/// `alpha (x_k - x_{k-1})`. One query per step. `hp.beta` is ignored.
pub fn step_lf(
    state: &mut SzoState,
    oracle: &EvalCounter,
    hp: &SzoHyperparams,
    dirs: &mut dyn DirectionSource,
) -> Result<StepOutcome> {
    let d = state.x_curr.dim();
    let u = dirs.next_direction(d)?;
    let Some(f_k) = screened_eval(oracle, &state.x_curr.add_scaled(hp.r, u.direction()))? else {
        return Ok(StepOutcome::diverged());
    };
    let coef = step_scale(hp, d, f_k);
    let next = descend_with_momentum(&state.x_curr, coef, u.direction(), hp.alpha, &state.x_prev);
    Ok(match state.commit(next) {
        StepStatus::Advanced => StepOutcome::advanced(f_k),
        StepStatus::Diverged => StepOutcome::diverged(),
    })
}

/// The combined update: high-pass filtered residual plus momentum. One
/// query per step.
pub fn step_hlf(
    state: &mut SzoState,
    oracle: &EvalCounter,
    hp: &SzoHyperparams,
    dirs: &mut dyn DirectionSource,
) -> Result<StepOutcome> {
    let d = state.x_curr.dim();
    let u = dirs.next_direction(d)?;
    let Some((z_k, f_carry)) = filtered_query(state, oracle, hp, &u)? else {
        return Ok(StepOutcome::diverged());
    };
    let coef = step_scale(hp, d, z_k);
    let next = descend_with_momentum(&state.x_curr, coef, u.direction(), hp.alpha, &state.x_prev);
    Ok(match state.commit(next) {
        StepStatus::Advanced => {
            state.z_prev = z_k;
            state.f_prev = f_carry;
            StepOutcome::advanced(z_k)
        }
        StepStatus::Diverged => StepOutcome::diverged(),
    })
}

/// Shared query-and-filter logic of `step_hf`/`step_hlf`. Returns
/// `(z_k, value to carry as f_prev)` or `None` on divergence.
fn filtered_query(
    state: &SzoState,
    oracle: &EvalCounter,
    hp: &SzoHyperparams,
    u: &SphereSample,
) -> Result<Option<(f64, f64)>> {
    if state.k == 0 && state.z_init == ZInit::SymmetricFirstStep {
        let Some(f_plus) = screened_eval(oracle, &state.x_curr.add_scaled(hp.r, u.direction()))?
        else {
            return Ok(None);
        };
        let Some(f_minus) = screened_eval(oracle, &state.x_curr.add_scaled(-hp.r, u.direction()))?
        else {
            return Ok(None);
        };
        return Ok(Some((0.5 * (f_plus - f_minus), f_plus)));
    }
    let Some(f_k) = screened_eval(oracle, &state.x_curr.add_scaled(hp.r, u.direction()))? else {
        return Ok(None);
    };
    Ok(Some((filtered_residual(hp.beta, state.z_prev, state.f_prev, f_k), f_k)))
}

/// The `(eta, alpha, beta)` triple produced by discretizing the filter
/// dynamics; the smoothing radius is not part of the map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretizedParams {
    pub eta: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl DiscretizedParams {
    pub fn with_radius(&self, r: f64) -> Result<SzoHyperparams> {
        SzoHyperparams::new(self.eta, r, self.alpha, self.beta)
    }
}

/// Discretization map from filter cutoffs and time resolution to the SZO
/// hyperparameters: `beta = delta*omega_h`, `eta = delta^2*omega_l`,
/// `alpha = 1 - delta*omega_l`.
pub fn params_from_discretization(
    delta: f64,
    omega_h: f64,
    omega_l: f64,
) -> Result<DiscretizedParams> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::invalid("delta", "discretization resolution must be positive"));
    }
    if !(omega_h >= 0.0) || !omega_h.is_finite() {
        return Err(Error::invalid("omega_h", "high-pass cutoff must be non-negative"));
    }
    if !(omega_l > 0.0) || !omega_l.is_finite() {
        return Err(Error::invalid("omega_l", "low-pass cutoff must be positive"));
    }
    if delta * omega_l > 1.0 {
        return Err(Error::Infeasible(format!(
            "delta*omega_l = {} > 1 would make alpha negative",
            delta * omega_l
        )));
    }
    Ok(DiscretizedParams {
        eta: delta * delta * omega_l,
        alpha: 1.0 - delta * omega_l,
        beta: delta * omega_h,
    })
}

/// Filter-form parameters: the raw `(delta, omega_h, omega_l)` triple plus
/// the smoothing radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterParams {
    pub delta: f64,
    pub omega_h: f64,
    pub omega_l: f64,
    pub r: f64,
}

impl FilterParams {
    pub fn new(delta: f64, omega_h: f64, omega_l: f64, r: f64) -> Result<Self> {
        params_from_discretization(delta, omega_h, omega_l)?;
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::invalid("r", "smoothing radius must be positive"));
        }
        Ok(Self { delta, omega_h, omega_l, r })
    }

    /// The equivalent SZO hyperparameters.
    pub fn to_hyperparams(&self) -> SzoHyperparams {
        let p = params_from_discretization(self.delta, self.omega_h, self.omega_l)
            .expect("validated at construction");
        SzoHyperparams { eta: p.eta, r: self.r, alpha: p.alpha, beta: p.beta }
    }

    /// Inverse of the discretization map: `delta = eta / (1 - alpha)`,
    /// `omega_l = (1 - alpha) / delta`, `omega_h = beta / delta`. Requires
    /// `alpha < 1`.
    pub fn from_hyperparams(hp: &SzoHyperparams) -> Result<Self> {
        if hp.alpha >= 1.0 {
            return Err(Error::invalid("alpha", "filter form requires alpha < 1"));
        }
        if !(hp.eta > 0.0) {
            return Err(Error::invalid("eta", "filter form requires a positive step size"));
        }
        let delta = hp.eta / (1.0 - hp.alpha);
        FilterParams::new(delta, hp.beta / delta, (1.0 - hp.alpha) / delta, hp.r)
    }
}

/// State of the raw filter-form recursion: the low-pass output `y` is kept
/// explicitly instead of being eliminated into a momentum term.
#[derive(Debug, Clone)]
pub struct FilterState {
    pub(crate) x_curr: DenseVector,
    pub(crate) y: DenseVector,
    pub(crate) z_prev: f64,
    pub(crate) f_prev: f64,
    pub(crate) k: u64,
}

impl FilterState {
    pub fn new(x0: DenseVector) -> Self {
        let y = DenseVector::zeros(x0.dim());
        Self { x_curr: x0, y, z_prev: 0.0, f_prev: 0.0, k: 0 }
    }

    pub fn x(&self) -> &DenseVector {
        &self.x_curr
    }

    pub fn iteration(&self) -> u64 {
        self.k
    }
}

/// One step of the pre-elimination recursion:
/// `z_k = (1 - delta*omega_h) z_{k-1} + f_k - f_{k-1}`,
/// `y_{k+1} = (1 - delta*omega_l) y_k + delta*omega_l g_k` with
/// `g_k = (d/r) z_k u_k`, and `x_{k+1} = x_k - delta y_{k+1}`.
pub fn step_filter_form(
    state: &mut FilterState,
    oracle: &EvalCounter,
    params: &FilterParams,
    dirs: &mut dyn DirectionSource,
) -> Result<StepOutcome> {
    let d = state.x_curr.dim();
    let u = dirs.next_direction(d)?;
    let Some(f_k) = screened_eval(oracle, &state.x_curr.add_scaled(params.r, u.direction()))?
    else {
        return Ok(StepOutcome::diverged());
    };
    let beta = params.delta * params.omega_h;
    let z_k = filtered_residual(beta, state.z_prev, state.f_prev, f_k);
    let g_scale = (d as f64 / params.r) * z_k;
    let keep = 1.0 - params.delta * params.omega_l;
    let blend = params.delta * params.omega_l;
    let y_next: Vec<f64> = state
        .y
        .iter()
        .zip(u.direction().iter())
        .map(|(yi, ui)| keep * yi + blend * (g_scale * ui))
        .collect();
    let x_next: Vec<f64> = state
        .x_curr
        .iter()
        .zip(&y_next)
        .map(|(xi, yi)| xi - params.delta * yi)
        .collect();
    let x_next = DenseVector::from_raw(x_next);
    let y_next = DenseVector::from_raw(y_next);
    if !x_next.is_finite() || !y_next.is_finite() {
        return Ok(StepOutcome::diverged());
    }
    state.x_curr = x_next;
    state.y = y_next;
    state.z_prev = z_k;
    state.f_prev = f_k;
    state.k += 1;
    Ok(StepOutcome::advanced(z_k))
}

/// Options for [`run_optimizer`].
#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Record every this many iterations (the initial and final points are
    /// always recorded).
    pub record_stride: u64,
    /// Whether the trace stores iterates; `None` stores them only for
    /// dim <= 10 to bound memory.
    pub store_iterates: Option<bool>,
    pub z_init: ZInit,
    /// Accumulate empirical second moments of `z`, the gradient estimate,
    /// and the displacement (inspection only).
    pub collect_second_moments: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            record_stride: 1,
            store_iterates: None,
            z_init: ZInit::MainText,
            collect_second_moments: false,
        }
    }
}

/// Empirical second moments accumulated over a run; inspection only.
#[derive(Debug, Clone, Copy, Default)]
pub struct SecondMoments {
    pub steps: u64,
    pub sum_z_sq: f64,
    pub sum_g_sq: f64,
    pub sum_p_sq: f64,
}

impl SecondMoments {
    pub fn mean_z_sq(&self) -> f64 {
        self.sum_z_sq / self.steps.max(1) as f64
    }

    pub fn mean_g_sq(&self) -> f64 {
        self.sum_g_sq / self.steps.max(1) as f64
    }

    pub fn mean_p_sq(&self) -> f64 {
        self.sum_p_sq / self.steps.max(1) as f64
    }
}

/// Result of a full optimizer run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub method: Method,
    pub trace: Trace,
    pub diverged: bool,
    /// Queries consumed by the update rule itself: exactly `T` for the
    /// single-point family and `2T` for the two-point family.
    pub algorithmic_queries: u64,
    /// Queries spent recording `f(x_k)` at the unperturbed iterates; counted
    /// separately so the algorithmic invariant stays exact.
    pub bookkeeping_queries: u64,
    pub final_x: DenseVector,
    pub second_moments: Option<SecondMoments>,
}

/// Runs `iters` steps of `method`, recording `f(x_k)` on a stride through a
/// separate bookkeeping counter. Divergence truncates the trace and sets the
/// flag instead of propagating non-finite values.
pub fn run_optimizer(
    method: Method,
    objective: &dyn Objective,
    x0: &DenseVector,
    iters: u64,
    hp: &SzoHyperparams,
    rng: &mut RngStream,
    opts: &RunOptions,
) -> Result<RunOutcome> {
    if x0.dim() != objective.dim() {
        return Err(Error::DimensionMismatch { expected: objective.dim(), got: x0.dim() });
    }
    if opts.record_stride == 0 {
        return Err(Error::invalid("record_stride", "must be at least 1"));
    }
    let store_x = opts.store_iterates.unwrap_or(x0.dim() <= 10);
    let algo = EvalCounter::new(objective);
    let book = EvalCounter::new(objective);
    let mut trace = Trace::new(store_x);
    let mut diverged = false;
    let mut moments =
        if opts.collect_second_moments { Some(SecondMoments::default()) } else { None };

    // Filter-form runs derive the raw parameters from the hyperparameters.
    let filter_params =
        if method == Method::FilterForm { Some(FilterParams::from_hyperparams(hp)?) } else { None };
    let mut szo_state = SzoState::with_z_init(x0.clone(), opts.z_init);
    let mut filter_state = FilterState::new(x0.clone());

    // Initial record.
    match screened_eval(&book, x0)? {
        Some(f0) => trace.record(0, x0, f0, algo.queries())?,
        None => diverged = true,
    }

    if !diverged {
        for k in 0..iters {
            let outcome = match method {
                Method::VanillaSzo => step_vanilla(&mut szo_state, &algo, hp, rng)?,
                Method::TwoPointSym => step_two_point_symmetric(&mut szo_state, &algo, hp, rng)?,
                Method::TwoPointFwd => step_two_point_forward(&mut szo_state, &algo, hp, rng)?,
                Method::HfSzo => step_hf(&mut szo_state, &algo, hp, rng)?,
                Method::LfSzo => step_lf(&mut szo_state, &algo, hp, rng)?,
                Method::HlfSzo => step_hlf(&mut szo_state, &algo, hp, rng)?,
                Method::FilterForm => step_filter_form(
                    &mut filter_state,
                    &algo,
                    filter_params.as_ref().expect("set above"),
                    rng,
                )?,
            };
            if outcome.is_diverged() {
                diverged = true;
                break;
            }
            if let Some(m) = moments.as_mut() {
                let x = if method == Method::FilterForm {
                    &filter_state.x_curr
                } else {
                    &szo_state.x_curr
                };
                let d = x.dim() as f64;
                m.steps += 1;
                m.sum_z_sq += outcome.z * outcome.z;
                let g = d / hp.r * outcome.z;
                m.sum_g_sq += g * g;
                m.sum_p_sq += if method == Method::FilterForm {
                    // p = -delta * y_next
                    let delta = filter_params.as_ref().unwrap().delta;
                    delta * delta * filter_state.y.iter().map(|v| v * v).sum::<f64>()
                } else {
                    szo_state.last_step_sq()
                };
            }
            if (k + 1) % opts.record_stride == 0 || k + 1 == iters {
                let x = if method == Method::FilterForm {
                    &filter_state.x_curr
                } else {
                    &szo_state.x_curr
                };
                match screened_eval(&book, x)? {
                    Some(f) => trace.record(k + 1, x, f, algo.queries())?,
                    None => {
                        diverged = true;
                        break;
                    }
                }
            }
        }
    }

    let final_x = if method == Method::FilterForm {
        filter_state.x_curr.clone()
    } else {
        szo_state.x_curr.clone()
    };
    Ok(RunOutcome {
        method,
        trace,
        diverged,
        algorithmic_queries: algo.queries(),
        bookkeeping_queries: book.queries(),
        final_x,
        second_moments: moments,
    })
}
