use crate::error::Result;
use crate::inference::{check_inputs, geo_views, reconstruct, singular, FactorState};
use crate::model::{Observation, PltfModel};
use crate::scalar::Scalar;
use crate::special::digamma;
use crate::tensor::{delta, hadamard, safe_div, NamedTensor};

/// One epoch of variational Bayes.
///
/// With `X̂_L` built from the incoming geometric means, every unclamped
/// factor in declaration order gets
///
/// ```text
/// C_α = A_α + L_α ∘ Δ^L_α(M ∘ X / X̂_L)
/// D_α = (A_α/B_α + Δ^E_α(M))⁻¹
/// E_α = C_α ∘ D_α
/// ```
///
/// where `Δ^L` uses the incoming `L` views and `Δ^E` the most recent `E`
/// views. Only after all factors are done is `L_α = exp(ψ(C_α)) ∘ D_α` refreshed.
pub fn vb_step<T: Scalar>(
    states: &[FactorState<T>],
    model: &PltfModel<T>,
    obs: &Observation<T>,
) -> Result<Vec<FactorState<T>>> {
    check_inputs(states, model, obs)?;
    let xl = reconstruct(&geo_views(states), model)?;
    vb_update(states, model, obs, &xl)
}

pub(crate) fn vb_update<T: Scalar>(
    states: &[FactorState<T>],
    model: &PltfModel<T>,
    obs: &Observation<T>,
    xl: &NamedTensor<T>,
) -> Result<Vec<FactorState<T>>> {
    let ratio = safe_div(obs.masked_data(), xl).map_err(singular)?;
    let l_views = geo_views(states);
    let mut means: Vec<NamedTensor<T>> = states.iter().map(|s| s.mean.clone()).collect();
    let mut shape_scale: Vec<Option<(NamedTensor<T>, NamedTensor<T>)>> = vec![None; states.len()];

    for (alpha, spec) in model.factors().iter().enumerate() {
        if spec.is_clamped() {
            continue;
        }
        let a = spec.prior().shape();
        let dl = delta(alpha, &ratio, &l_views)?;
        let counts = hadamard(l_views[alpha], &dl)?;
        let c = a.zip_map(&counts, |a, s| a + s)?;

        let e_views: Vec<&NamedTensor<T>> = means.iter().collect();
        let de = delta(alpha, obs.mask(), &e_views)?;
        let d = spec.prior().rate().zip_map(&de, |r, m| T::one() / (r + m))?;

        means[alpha] = hadamard(&c, &d)?;
        shape_scale[alpha] = Some((c, d));
    }

    states
        .iter()
        .zip(shape_scale)
        .zip(means)
        .map(|((old, cd), mean)| match cd {
            None => Ok(old.clone()),
            Some((c, d)) => {
                let geo_mean = c.zip_map(&d, |c, d| digamma(c).exp() * d)?;
                Ok(FactorState {
                    shape: c,
                    scale: d,
                    mean,
                    geo_mean,
                })
            }
        })
        .collect()
}
