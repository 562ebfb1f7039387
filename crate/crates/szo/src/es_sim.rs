//! Continuous-time extremum-seeking simulator (scalar state): sinusoidal
//! probing, demodulation, optional high-pass and low-pass filters, and the
//! integrator loop, plus numerical verification of the averaging argument.
//!
//! Unfiltered loop: `dx/dt = -(2/a) f(x + a sin(wt)) sin(wt)`.
//!
//! Filtered loop: with `v = f(x + a sin(wt))`, the high-pass `s/(s + w_H)` is
//! realized in strictly proper state-space form (`dxi/dt = -w_H xi + v`,
//! `z = v - w_H xi`), avoiding the differentiated input of the transfer
//! function; the demodulated estimate `g = (2/a) z sin(wt)` passes through
//! the low-pass `dy/dt = w_L (g - y)` and the integrator `dx/dt = -y`.
//!
//! The period average of the unfiltered field approximates the gradient flow
//! `dx/dt = -f'(x)` for small probe amplitude; for quadratics the average
//! equals the derivative exactly, which makes them the tracking oracle.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct EsParams {
    /// Probe amplitude `a`.
    pub amplitude: f64,
    /// Probe frequency `w`.
    pub frequency: f64,
    /// High-pass cutoff `w_H` (ignored when `use_filters` is false).
    pub omega_h: f64,
    /// Low-pass cutoff `w_L` (ignored when `use_filters` is false).
    pub omega_l: f64,
    pub use_filters: bool,
}

impl EsParams {
    pub fn unfiltered(amplitude: f64, frequency: f64) -> Result<Self> {
        Self::validate(amplitude, frequency)?;
        Ok(Self { amplitude, frequency, omega_h: 0.0, omega_l: 1.0, use_filters: false })
    }

    pub fn filtered(amplitude: f64, frequency: f64, omega_h: f64, omega_l: f64) -> Result<Self> {
        Self::validate(amplitude, frequency)?;
        if !(omega_h >= 0.0) || !omega_h.is_finite() {
            return Err(Error::invalid("omega_h", "high-pass cutoff must be non-negative"));
        }
        if !(omega_l > 0.0) || !omega_l.is_finite() {
            return Err(Error::invalid("omega_l", "low-pass cutoff must be positive"));
        }
        Ok(Self { amplitude, frequency, omega_h, omega_l, use_filters: true })
    }

    fn validate(amplitude: f64, frequency: f64) -> Result<()> {
        if !(amplitude > 0.0) || !amplitude.is_finite() {
            return Err(Error::invalid("amplitude", "probe amplitude must be positive"));
        }
        if !(frequency > 0.0) || !frequency.is_finite() {
            return Err(Error::invalid("frequency", "probe frequency must be positive"));
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        std::f64::consts::TAU / self.frequency
    }
}

/// State of the loop: plant input `x`, high-pass internal state `xi`,
/// low-pass output `y`, and time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EsState {
    pub x: f64,
    pub xi: f64,
    pub y: f64,
    pub t: f64,
}

impl EsState {
    pub fn at_rest(x0: f64) -> Self {
        Self { x: x0, xi: 0.0, y: 0.0, t: 0.0 }
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.xi.is_finite() && self.y.is_finite()
    }
}

/// Time derivative of the state (the `t` slot carries dt/dt = 1 implicitly).
#[derive(Debug, Clone, Copy)]
pub struct EsDerivative {
    pub dx: f64,
    pub dxi: f64,
    pub dy: f64,
}

pub fn es_rhs(state: &EsState, params: &EsParams, f: &dyn Fn(f64) -> f64) -> EsDerivative {
    let probe = (params.frequency * state.t).sin();
    let v = f(state.x + params.amplitude * probe);
    if params.use_filters {
        let z = v - params.omega_h * state.xi;
        let g = 2.0 / params.amplitude * z * probe;
        EsDerivative {
            dx: -state.y,
            dxi: -params.omega_h * state.xi + v,
            dy: params.omega_l * (g - state.y),
        }
    } else {
        EsDerivative { dx: -(2.0 / params.amplitude) * v * probe, dxi: 0.0, dy: 0.0 }
    }
}

#[derive(Debug, Clone)]
pub struct EsTrajectory {
    pub states: Vec<EsState>,
    pub diverged: bool,
}

/// Classical fourth-order Runge-Kutta integration of the loop. Requires at
/// least 20 steps per probe period.
pub fn integrate_es(
    x0: f64,
    params: &EsParams,
    f: &dyn Fn(f64) -> f64,
    horizon: f64,
    dt: f64,
) -> Result<EsTrajectory> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::invalid("dt", "step size must be positive"));
    }
    if dt > params.period() / 20.0 {
        return Err(Error::invalid(
            "dt",
            format!("too coarse: need dt <= {:.6e} for 20 steps per period", params.period() / 20.0),
        ));
    }
    if !(horizon >= 0.0) || !horizon.is_finite() {
        return Err(Error::invalid("horizon", "must be non-negative"));
    }
    // Guard against a horizon that is an exact multiple of dt landing on
    // floor(n - epsilon) after rounding.
    let steps = (horizon / dt + 1e-9).floor() as u64;
    let mut state = EsState::at_rest(x0);
    let mut states = Vec::with_capacity(steps as usize + 1);
    states.push(state);
    for _ in 0..steps {
        state = rk4_step(&state, params, f, dt);
        if !state.is_finite() {
            return Ok(EsTrajectory { states, diverged: true });
        }
        states.push(state);
    }
    Ok(EsTrajectory { states, diverged: false })
}

fn rk4_step(state: &EsState, params: &EsParams, f: &dyn Fn(f64) -> f64, dt: f64) -> EsState {
    let shift = |s: &EsState, k: &EsDerivative, h: f64| EsState {
        x: s.x + h * k.dx,
        xi: s.xi + h * k.dxi,
        y: s.y + h * k.dy,
        t: s.t + h,
    };
    let k1 = es_rhs(state, params, f);
    let k2 = es_rhs(&shift(state, &k1, dt / 2.0), params, f);
    let k3 = es_rhs(&shift(state, &k2, dt / 2.0), params, f);
    let k4 = es_rhs(&shift(state, &k3, dt), params, f);
    EsState {
        x: state.x + dt / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx),
        xi: state.xi + dt / 6.0 * (k1.dxi + 2.0 * k2.dxi + 2.0 * k3.dxi + k4.dxi),
        y: state.y + dt / 6.0 * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy),
        t: state.t + dt,
    }
}

// 8-point Gauss-Legendre nodes/weights on [-1, 1].
const GL_NODES: [f64; 4] =
    [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
const GL_WEIGHTS: [f64; 4] =
    [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];

/// Period average of the demodulated loop field,
/// `(1/T) Int_0^T (2/a) f(x + a sin(wt)) sin(wt) dt` with `T = 2 pi / w`,
/// by composite 8-point Gauss-Legendre over 128 subintervals (1024 nodes).
pub fn average_dynamics(f: &dyn Fn(f64) -> f64, x: f64, a: f64, omega: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::invalid("a", "probe amplitude must be positive"));
    }
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::invalid("omega", "probe frequency must be positive"));
    }
    let period = std::f64::consts::TAU / omega;
    let subintervals = 128;
    let h = period / subintervals as f64;
    let integrand = |t: f64| {
        let s = (omega * t).sin();
        2.0 / a * f(x + a * s) * s
    };
    let mut total = 0.0;
    for i in 0..subintervals {
        let mid = (i as f64 + 0.5) * h;
        let half = 0.5 * h;
        let mut acc = 0.0;
        for j in 0..4 {
            acc += GL_WEIGHTS[j] * (integrand(mid + half * GL_NODES[j]) + integrand(mid - half * GL_NODES[j]));
        }
        total += acc * half;
    }
    Ok(total / period)
}

/// Report of the discrete bridge check: the filter-form recursion against
/// the combined-filter method with mapped parameters, on a shared objective
/// and direction stream.
#[derive(Debug, Clone)]
pub struct BridgeReport {
    pub steps: u64,
    /// Maximum over iterations of `|x_a - x_b| / (1 + |x_a|)`.
    pub max_rel_deviation: f64,
}

/// Runs both recursions side by side and reports the worst per-iterate
/// relative deviation. The two paths are algebraically identical after
/// eliminating the low-pass state, so the deviation measures only
/// floating-point divergence.
pub fn discretization_bridge(
    objective: &dyn crate::core::Objective,
    x0: &crate::core::DenseVector,
    params: &crate::optimizers::FilterParams,
    steps: u64,
    seed: u64,
) -> Result<BridgeReport> {
    use crate::core::EvalCounter;
    use crate::optimizers::{step_filter_form, step_hlf, FilterState, SzoState};
    use crate::rng::RngStream;

    let hp = params.to_hyperparams();
    let oracle_hlf = EvalCounter::new(objective);
    let oracle_ff = EvalCounter::new(objective);
    let mut hlf = SzoState::new(x0.clone());
    let mut ff = FilterState::new(x0.clone());
    let mut rng_hlf = RngStream::new(seed);
    let mut rng_ff = RngStream::new(seed);
    let mut max_rel: f64 = 0.0;
    for k in 0..steps {
        let a = step_hlf(&mut hlf, &oracle_hlf, &hp, &mut rng_hlf)?;
        let b = step_filter_form(&mut ff, &oracle_ff, params, &mut rng_ff)?;
        if a.is_diverged() || b.is_diverged() {
            return Err(Error::NonFinite { context: format!("bridge run diverged at step {k}") });
        }
        let dev = hlf.x().distance(ff.x()) / (1.0 + hlf.x().norm());
        max_rel = max_rel.max(dev);
    }
    Ok(BridgeReport { steps, max_rel_deviation: max_rel })
}
