//! Convergence-condition calculator: given the problem constants, returns
//! the admissible step size, the admissible smoothing-radius window, and the
//! leading term of the guaranteed bound for the combined-filter method.
//!
//! For a G-Lipschitz, L-smooth objective, alpha in [0, 1), beta in (0, 2),
//! and horizon T, the conditions are
//!
//! ```text
//! eta <= (1 - alpha) (1 - |1 - beta|)^2 / (25 L d T^(1/3))
//! 4 eta d G / ((1 - |1 - beta|)(1 - alpha)) <= r <= G / (L T^(1/3))
//! ```
//!
//! With `eta` at its maximum the radius window is always non-empty; an
//! explicitly supplied smaller-or-larger `eta` can make it infeasible, which
//! is reported rather than clamped.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvexityCase {
    Convex,
    Nonconvex,
}

impl ConvexityCase {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConvexityCase::Convex => "convex",
            ConvexityCase::Nonconvex => "nonconvex",
        }
    }
}

impl std::str::FromStr for ConvexityCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "convex" => Ok(ConvexityCase::Convex),
            "nonconvex" => Ok(ConvexityCase::Nonconvex),
            other => Err(Error::invalid("case", format!("unknown case `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TheoremInputs {
    /// Smoothness constant L.
    pub smoothness: f64,
    /// Lipschitz constant G.
    pub lipschitz: f64,
    pub dim: usize,
    pub iters: u64,
    pub alpha: f64,
    pub beta: f64,
    pub case: ConvexityCase,
    /// `|x_1 - x*|^2` (convex) or `f(x_1) - f*` (nonconvex). The analysis
    /// gives no procedure for estimating it, so it is user-supplied.
    pub gap_constant: f64,
    /// Step size to check; defaults to the admissible maximum.
    pub eta: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TheoremBounds {
    pub eta_max: f64,
    pub eta_used: f64,
    pub r_min: f64,
    pub r_max: f64,
    /// True iff `eta_used <= eta_max` and the radius window is non-empty.
    pub feasible: bool,
    pub bound_leading_term: f64,
    pub case: ConvexityCase,
}

pub fn theorem_bounds(inputs: &TheoremInputs) -> Result<TheoremBounds> {
    let l = inputs.smoothness;
    let g = inputs.lipschitz;
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::invalid("smoothness", "L must be positive"));
    }
    if !(g > 0.0) || !g.is_finite() {
        return Err(Error::invalid("lipschitz", "G must be positive"));
    }
    if inputs.dim == 0 {
        return Err(Error::invalid("dim", "dimension must be at least 1"));
    }
    if inputs.iters == 0 {
        return Err(Error::invalid("iters", "horizon must be at least 1"));
    }
    if !(0.0..1.0).contains(&inputs.alpha) {
        return Err(Error::invalid("alpha", "the analysis requires alpha in [0, 1)"));
    }
    if !(inputs.beta > 0.0 && inputs.beta < 2.0) {
        return Err(Error::invalid("beta", "the analysis requires beta in (0, 2)"));
    }
    if !(inputs.gap_constant >= 0.0) || !inputs.gap_constant.is_finite() {
        return Err(Error::invalid("gap_constant", "must be non-negative"));
    }

    let beta_tilde = 1.0 - (1.0 - inputs.beta).abs();
    let d = inputs.dim as f64;
    let t_cbrt = (inputs.iters as f64).cbrt();
    let one_minus_alpha = 1.0 - inputs.alpha;

    let eta_max = one_minus_alpha * beta_tilde * beta_tilde / (25.0 * l * d * t_cbrt);
    let eta_used = match inputs.eta {
        Some(eta) if eta > 0.0 && eta.is_finite() => eta,
        Some(_) => return Err(Error::invalid("eta", "step size must be positive")),
        None => eta_max,
    };
    let r_min = 4.0 * eta_used * d * g / (beta_tilde * one_minus_alpha);
    let r_max = g / (l * t_cbrt);
    let feasible = eta_used <= eta_max && r_min <= r_max;

    let t_two_thirds = t_cbrt * t_cbrt;
    let bound_leading_term = match inputs.case {
        ConvexityCase::Convex => {
            (d / t_two_thirds)
                * (75.0 * l * inputs.gap_constant / (4.0 * beta_tilde * beta_tilde)
                    + 3.0 * g * g / (4.0 * l * d))
        }
        ConvexityCase::Nonconvex => {
            (d / t_two_thirds)
                * (100.0 * l * inputs.gap_constant / (beta_tilde * beta_tilde) + 8.0 * g * g / d)
        }
    };

    Ok(TheoremBounds {
        eta_max,
        eta_used,
        r_min,
        r_max,
        feasible,
        bound_leading_term,
        case: inputs.case,
    })
}
