use crate::error::{Error, Result};
use crate::inference::{check_inputs, geo_views, reconstruct, singular, FactorState};
use crate::model::{Observation, PltfModel};
use crate::scalar::Scalar;
use crate::tensor::{delta, full_product, hadamard, safe_div, NamedTensor};

/// Default cap on the number of latent configurations [`latent_stats`] will
/// materialise.
pub const LATENT_STATS_LIMIT: usize = 1 << 22;

/// Cell probabilities and expected latent counts of the multinomial `q(S)`,
/// materialised over the full index set `V`.
#[derive(Clone, Debug)]
pub struct LatentStats<T> {
    /// `P(v) = Λ_L(v) / X̂_L(v₀)` with `Λ_L(v) = ∏_α L_α(v_α)`.
    pub probabilities: NamedTensor<T>,
    /// `⟨S(v)⟩ = M(v₀) X(v₀) P(v)`.
    pub expected_counts: NamedTensor<T>,
    /// `max_{v₀} |Σ_{v̄₀} ⟨S(v)⟩ − M(v₀) X(v₀)|`.
    pub conservation_error: T,
    /// Per factor: `max |Σ_{v̄_α} ⟨S(v)⟩ − L_α ∘ Δ^L_α(M∘X/X̂_L)|`.
    pub factored_identity_error: Vec<T>,
}

pub fn latent_stats<T: Scalar>(
    states: &[FactorState<T>],
    model: &PltfModel<T>,
    obs: &Observation<T>,
) -> Result<LatentStats<T>> {
    latent_stats_with_limit(states, model, obs, LATENT_STATS_LIMIT)
}

pub fn latent_stats_with_limit<T: Scalar>(
    states: &[FactorState<T>],
    model: &PltfModel<T>,
    obs: &Observation<T>,
    limit: usize,
) -> Result<LatentStats<T>> {
    check_inputs(states, model, obs)?;
    let count = model.configurations();
    if count > limit as u128 {
        return Err(Error::TooLarge {
            count: usize::try_from(count).unwrap_or(usize::MAX),
            limit,
        });
    }
    let l_views = geo_views(states);
    let intensity = full_product(&l_views, model.indices())?;
    let xl = reconstruct(&l_views, model)?;
    let probabilities = safe_div(&intensity, &xl.sum_to(model.indices())?)?;
    let expected_counts = hadamard(&obs.masked_data().sum_to(model.indices())?, &probabilities)?;

    let conservation_error = expected_counts
        .sum_to(model.observed())?
        .max_abs_diff(obs.masked_data())?;

    let ratio = safe_div(obs.masked_data(), &xl).map_err(singular)?;
    let factored_identity_error = model
        .factors()
        .iter()
        .enumerate()
        .map(|(alpha, spec)| {
            let direct = expected_counts.sum_to(spec.indices())?;
            let factored = hadamard(l_views[alpha], &delta(alpha, &ratio, &l_views)?)?;
            direct.max_abs_diff(&factored)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(LatentStats {
        probabilities,
        expected_counts,
        conservation_error,
        factored_identity_error,
    })
}
