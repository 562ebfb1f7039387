//! Run configuration: a strict key-value schema (unknown keys are rejected
//! so hyperparameter typos cannot pass silently), shipped canned cases, and
//! the conversion to an [`ExperimentSpec`].

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::core::DenseVector;
use crate::error::{Error, Result};
use crate::experiments::{ExperimentSpec, MethodSpec, ObjectiveSpec};
use crate::optimizers::{Method, SzoHyperparams};

/// A scalar fill (`x0 = 0.5` means `0.5` in every coordinate) or an explicit
/// vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FillOrVec {
    Fill(f64),
    Vector(Vec<f64>),
}

impl FillOrVec {
    pub fn materialize(&self, d: usize, key: &str) -> Result<DenseVector> {
        match self {
            FillOrVec::Fill(v) => DenseVector::filled(d, *v)
                .map_err(|e| Error::config(key, e.to_string())),
            FillOrVec::Vector(v) => {
                if v.len() != d {
                    return Err(Error::config(
                        key,
                        format!("expected {d} entries, got {}", v.len()),
                    ));
                }
                DenseVector::new(v.clone()).map_err(|e| Error::config(key, e.to_string()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveConfig {
    /// One of `logistic`, `ridge`, `beale`, `matyas`.
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_star: Option<FillOrVec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reg_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodConfig {
    pub name: String,
    pub eta: f64,
    pub r: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub label: String,
    /// Base seed; trial streams derive from it.
    pub seed: u64,
    pub iters: u64,
    pub trials: u64,
    #[serde(default = "default_stride")]
    pub record_stride: u64,
    /// Worker threads; 0 means all available parallelism.
    #[serde(default)]
    pub workers: usize,
    /// Output directory; the CLI `--out` flag overrides it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
    pub x0: FillOrVec,
    pub objective: ObjectiveConfig,
    pub methods: Vec<MethodConfig>,
}

fn default_stride() -> u64 {
    1
}

impl RunConfig {
    /// Full semantic validation; every error names the offending key path.
    pub fn validate(&self) -> Result<()> {
        if self.label.is_empty() {
            return Err(Error::config("label", "must not be empty"));
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if self.record_stride == 0 {
            return Err(Error::config("record_stride", "must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(Error::config("methods", "at least one method is required"));
        }
        self.objective_spec()?;
        for (i, m) in self.methods.iter().enumerate() {
            let at = |field: &str| format!("methods[{i}].{field}");
            let method: Method = m
                .name
                .parse()
                .map_err(|_| Error::config(&at("name"), format!("unknown method `{}`", m.name)))?;
            if !(m.eta > 0.0) || !m.eta.is_finite() {
                return Err(Error::config(&at("eta"), "step size must be positive"));
            }
            if !(m.r > 0.0) || !m.r.is_finite() {
                return Err(Error::config(&at("r"), "smoothing radius must be positive"));
            }
            match m.alpha {
                Some(a) if !(0.0..=1.0).contains(&a) => {
                    return Err(Error::config(&at("alpha"), "must lie in [0, 1]"));
                }
                Some(_) if !method.uses_alpha() => {
                    return Err(Error::config(
                        &at("alpha"),
                        format!("not applicable to `{}`", method),
                    ));
                }
                None if method.uses_alpha() => {
                    return Err(Error::config(&at("alpha"), format!("required by `{}`", method)));
                }
                _ => {}
            }
            match m.beta {
                Some(b) if !(b >= 0.0) || !b.is_finite() => {
                    return Err(Error::config(&at("beta"), "must be non-negative"));
                }
                Some(_) if !method.uses_beta() => {
                    return Err(Error::config(
                        &at("beta"),
                        format!("not applicable to `{}`", method),
                    ));
                }
                None if method.uses_beta() => {
                    return Err(Error::config(&at("beta"), format!("required by `{}`", method)));
                }
                _ => {}
            }
            if method == Method::FilterForm && m.alpha == Some(1.0) {
                return Err(Error::config(&at("alpha"), "filter form requires alpha < 1"));
            }
        }
        Ok(())
    }

    fn objective_spec(&self) -> Result<ObjectiveSpec> {
        let o = &self.objective;
        let require_d = || o.d.ok_or_else(|| Error::config("objective.d", "required"));
        let forbid = |present: bool, key: &str| {
            if present {
                Err(Error::config(key, format!("not applicable to `{}`", o.kind)))
            } else {
                Ok(())
            }
        };
        match o.kind.as_str() {
            "logistic" | "ridge" => {
                let d = require_d()?;
                let n = o
                    .n_samples
                    .ok_or_else(|| Error::config("objective.n_samples", "required"))?;
                let x_star = o
                    .x_star
                    .as_ref()
                    .ok_or_else(|| Error::config("objective.x_star", "required"))?
                    .materialize(d, "objective.x_star")?;
                let dataset_seed = o
                    .dataset_seed
                    .ok_or_else(|| Error::config("objective.dataset_seed", "required"))?;
                if d == 0 || n == 0 {
                    return Err(Error::config("objective", "d and n_samples must be positive"));
                }
                if o.kind == "logistic" {
                    forbid(o.reg_c.is_some(), "objective.reg_c")?;
                    forbid(o.noise_std.is_some(), "objective.noise_std")?;
                    Ok(ObjectiveSpec::Logistic { d, n_samples: n, x_star, dataset_seed })
                } else {
                    let reg_c =
                        o.reg_c.ok_or_else(|| Error::config("objective.reg_c", "required"))?;
                    if !(reg_c > 0.0) {
                        return Err(Error::config("objective.reg_c", "must be positive"));
                    }
                    let noise_std = o
                        .noise_std
                        .ok_or_else(|| Error::config("objective.noise_std", "required"))?;
                    if !(noise_std >= 0.0) {
                        return Err(Error::config("objective.noise_std", "must be non-negative"));
                    }
                    Ok(ObjectiveSpec::Ridge { d, n_samples: n, x_star, reg_c, noise_std, dataset_seed })
                }
            }
            "beale" | "matyas" => {
                if let Some(d) = o.d {
                    if d != 2 {
                        return Err(Error::config("objective.d", "test functions are 2-D"));
                    }
                }
                forbid(o.n_samples.is_some(), "objective.n_samples")?;
                forbid(o.x_star.is_some(), "objective.x_star")?;
                forbid(o.dataset_seed.is_some(), "objective.dataset_seed")?;
                forbid(o.reg_c.is_some(), "objective.reg_c")?;
                forbid(o.noise_std.is_some(), "objective.noise_std")?;
                if o.kind == "beale" {
                    Ok(ObjectiveSpec::Beale)
                } else {
                    Ok(ObjectiveSpec::Matyas)
                }
            }
            other => Err(Error::config("objective.kind", format!("unknown kind `{other}`"))),
        }
    }

    /// Converts to a runnable spec (validates first).
    pub fn to_experiment_spec(&self) -> Result<ExperimentSpec> {
        self.validate()?;
        let objective = self.objective_spec()?;
        let d = objective.dim();
        let x0 = self.x0.materialize(d, "x0")?;
        let methods = self
            .methods
            .iter()
            .map(|m| {
                let method: Method = m.name.parse()?;
                let hp =
                    SzoHyperparams::new(m.eta, m.r, m.alpha.unwrap_or(0.0), m.beta.unwrap_or(0.0))?;
                Ok(MethodSpec { method, hp })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ExperimentSpec {
            objective,
            methods,
            iters: self.iters,
            trials: self.trials,
            base_seed: self.seed,
            x0,
            record_stride: self.record_stride,
            workers: self.workers,
        })
    }
}

/// Parses a config document; `origin` is used in error messages.
pub fn parse_config_str(text: &str, origin: &str) -> Result<RunConfig> {
    let config: RunConfig =
        toml::from_str(text).map_err(|e| Error::config(origin, e.message().to_string()))?;
    config.validate()?;
    Ok(config)
}

/// Resolves `name_or_path`: a shipped case name (see [`builtin_names`]) or a
/// path to a TOML file.
pub fn load_config(name_or_path: &str) -> Result<RunConfig> {
    if let Some(text) = builtin_config(name_or_path) {
        return parse_config_str(text, name_or_path);
    }
    let path = Path::new(name_or_path);
    if !path.exists() {
        return Err(Error::config(
            name_or_path,
            format!(
                "no such file, and not a shipped case (shipped: {})",
                builtin_names().join(", ")
            ),
        ));
    }
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&text, name_or_path)
}

macro_rules! builtin_cases {
    ($(($name:literal, $file:literal)),+ $(,)?) => {
        /// Shipped one-command reproductions with the published
        /// hyperparameters and desk-scale horizons.
        pub fn builtin_config(name: &str) -> Option<&'static str> {
            match name {
                $($name => Some(include_str!($file)),)+
                _ => None,
            }
        }

        pub fn builtin_names() -> Vec<&'static str> {
            vec![$($name),+]
        }
    };
}

builtin_cases![
    ("case_1_1a", "../configs/case_1_1a.toml"),
    ("case_1_1b", "../configs/case_1_1b.toml"),
    ("case_1_2a", "../configs/case_1_2a.toml"),
    ("case_1_2b", "../configs/case_1_2b.toml"),
    ("case_2_1a", "../configs/case_2_1a.toml"),
    ("case_2_1b", "../configs/case_2_1b.toml"),
    ("case_2_2a", "../configs/case_2_2a.toml"),
    ("case_2_2b", "../configs/case_2_2b.toml"),
];
