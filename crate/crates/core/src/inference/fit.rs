use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::inference::bound::{bound_with, kl_divergence};
use crate::inference::vb::vb_update;
use crate::inference::{check_inputs, em_step, geo_views, init_factors, mean_views, reconstruct, FactorState};
use crate::model::{Observation, PltfModel};
use crate::scalar::Scalar;
use crate::tensor::NamedTensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Method {
    Em,
    #[default]
    Vb,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "em" => Ok(Method::Em),
            "vb" => Ok(Method::Vb),
            other => Err(Error::InvalidArgument(format!("unknown method `{other}`"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Em => "em",
            Method::Vb => "vb",
        })
    }
}

/// Which EM fixed point to iterate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EmPrior {
    /// Prior terms dropped (the sparse-prior approximation).
    #[default]
    Flat,
    /// MAP update including the `(A−1)` and `A/B` prior terms. With `A < 1` the
    /// numerator can go negative; the element is clamped at 0.
    Full,
}

impl FromStr for EmPrior {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "flat" => Ok(EmPrior::Flat),
            "full" => Ok(EmPrior::Full),
            other => Err(Error::InvalidArgument(format!("unknown EM prior mode `{other}`"))),
        }
    }
}

impl fmt::Display for EmPrior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EmPrior::Flat => "flat",
            EmPrior::Full => "full",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitConfig {
    pub method: Method,
    pub max_iters: usize,
    /// Stop once the relative change of the monitored trace drops to `tol`.
    /// Zero disables early stopping.
    pub tol: f64,
    pub seed: u64,
    pub em_prior: EmPrior,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            method: Method::Vb,
            max_iters: 2000,
            tol: 0.0,
            seed: 0,
            em_prior: EmPrior::Flat,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult<T> {
    pub states: Vec<FactorState<T>>,
    /// Bound after each VB epoch; empty for EM.
    pub bound_trace: Vec<T>,
    /// Masked KL divergence after each EM sweep; empty for VB.
    pub divergence_trace: Vec<T>,
    pub iterations_run: usize,
    pub converged: bool,
    pub seed: u64,
    pub method: Method,
}

impl<T: Scalar> FitResult<T> {
    pub fn final_bound(&self) -> Option<T> {
        self.bound_trace.last().copied()
    }

    pub fn final_divergence(&self) -> Option<T> {
        self.divergence_trace.last().copied()
    }

    /// Model-selection score: the bound for VB, the negated divergence for EM.
    pub fn score(&self) -> f64 {
        match self.method {
            Method::Vb => self.final_bound().map_or(f64::NEG_INFINITY, |b| b.as_f64()),
            Method::Em => self.final_divergence().map_or(f64::NEG_INFINITY, |d| -d.as_f64()),
        }
    }

    /// `X̂` from the factor means (`X̂_E` for VB, `X̂` for EM).
    pub fn reconstruction(&self, model: &PltfModel<T>) -> Result<NamedTensor<T>> {
        reconstruct(&mean_views(&self.states), model)
    }

    /// The monitored trace: bound (VB) or divergence (EM).
    pub fn trace(&self) -> &[T] {
        match self.method {
            Method::Vb => &self.bound_trace,
            Method::Em => &self.divergence_trace,
        }
    }
}

fn settled<T: Scalar>(trace: &[T], tol: f64) -> bool {
    if tol <= 0.0 || trace.len() < 2 {
        return false;
    }
    let prev = trace[trace.len() - 2].as_f64();
    let cur = trace[trace.len() - 1].as_f64();
    (cur - prev).abs() <= tol * prev.abs().max(f64::MIN_POSITIVE)
}

/// Fit `model` to `obs` from a seeded random initialisation.
pub fn fit<T: Scalar>(model: &PltfModel<T>, obs: &Observation<T>, config: &FitConfig) -> Result<FitResult<T>> {
    model.validate().map_err(Error::InvalidModel)?;
    if config.max_iters == 0 {
        return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
    }
    if !(config.tol >= 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be non-negative, got {}", config.tol)));
    }
    let mut states = init_factors(model, config.seed)?;
    check_inputs(&states, model, obs)?;

    let mut bound_trace = Vec::new();
    let mut divergence_trace = Vec::new();
    let mut converged = false;
    let mut iterations_run = 0;

    match config.method {
        Method::Vb => {
            let mut xl = reconstruct(&geo_views(&states), model)?;
            for it in 1..=config.max_iters {
                states = vb_update(&states, model, obs, &xl).map_err(|e| e.at_iteration(it))?;
                xl = reconstruct(&geo_views(&states), model)?;
                let xe = reconstruct(&mean_views(&states), model)?;
                let b = bound_with(&states, model, obs, &xl, &xe).map_err(|e| e.at_iteration(it))?;
                bound_trace.push(b);
                iterations_run = it;
                if settled(&bound_trace, config.tol) {
                    converged = true;
                    break;
                }
            }
        }
        Method::Em => {
            for it in 1..=config.max_iters {
                states = em_step(&states, model, obs, config.em_prior).map_err(|e| e.at_iteration(it))?;
                let xhat = reconstruct(&mean_views(&states), model)?;
                let d = kl_divergence(obs.data(), &xhat, obs.mask()).map_err(|e| e.at_iteration(it))?;
                divergence_trace.push(d);
                iterations_run = it;
                if settled(&divergence_trace, config.tol) {
                    converged = true;
                    break;
                }
            }
        }
    }

    Ok(FitResult {
        states,
        bound_trace,
        divergence_trace,
        iterations_run,
        converged,
        seed: config.seed,
        method: config.method,
    })
}
