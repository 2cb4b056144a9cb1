//! Inference engines: multiplicative EM and variational Bayes, the variational
//! lower bound, and the latent multinomial statistics.

mod bound;
mod em;
mod fit;
mod latent;
mod state;
mod vb;

pub use bound::{compute_bound, gamma_kl, kl_divergence};
pub use em::em_step;
pub use fit::{fit, EmPrior, FitConfig, FitResult, Method};
pub use latent::{latent_stats, latent_stats_with_limit, LatentStats, LATENT_STATS_LIMIT};
pub use state::{init_factors, FactorState};
pub use vb::vb_step;

use crate::error::{Error, Result};
use crate::model::{Observation, PltfModel};
use crate::scalar::Scalar;
use crate::tensor::{describe, full_product, NamedTensor};

pub(crate) fn mean_views<T>(states: &[FactorState<T>]) -> Vec<&NamedTensor<T>> {
    states.iter().map(|s| &s.mean).collect()
}

pub(crate) fn geo_views<T>(states: &[FactorState<T>]) -> Vec<&NamedTensor<T>> {
    states.iter().map(|s| &s.geo_mean).collect()
}

pub(crate) fn reconstruct<T: Scalar>(
    views: &[&NamedTensor<T>],
    model: &PltfModel<T>,
) -> Result<NamedTensor<T>> {
    full_product(views, model.observed())
}

pub(crate) fn check_inputs<T: Scalar>(
    states: &[FactorState<T>],
    model: &PltfModel<T>,
    obs: &Observation<T>,
) -> Result<()> {
    if obs.indices() != model.observed() {
        return Err(Error::ShapeMismatch {
            expected: describe(model.observed()),
            found: describe(obs.indices()),
        });
    }
    if states.len() != model.num_factors() {
        return Err(Error::InvalidArgument(format!(
            "{} factor states for {} factors",
            states.len(),
            model.num_factors()
        )));
    }
    for (s, f) in states.iter().zip(model.factors()) {
        if s.mean.indices() != f.indices() {
            return Err(Error::ShapeMismatch {
                expected: describe(f.indices()),
                found: describe(s.mean.indices()),
            });
        }
    }
    Ok(())
}

/// Turn a division-by-zero in `M∘X / X̂` into a singular-model error.
pub(crate) fn singular(e: Error) -> Error {
    match e {
        Error::Domain { cell, .. } => Error::Singular {
            iteration: None,
            cell,
        },
        other => other,
    }
}
