use crate::error::Result;
use crate::inference::{check_inputs, fit::EmPrior, singular, FactorState};
use crate::model::{Observation, PltfModel};
use crate::scalar::Scalar;
use crate::tensor::{delta, full_product, safe_div, NamedTensor};

/// One sweep of multiplicative EM over the unclamped factors in declaration
/// order. `X̂` is recomputed before each factor update.
///
/// Flat mode: `Z ← Z ∘ Δ(M∘X/X̂) / Δ(M)`. Elements with `Δ(M) = 0` touch no
/// observed cell and are left unchanged.
///
/// Full mode: `Z ← ((A−1) + Z∘Δ(M∘X/X̂)) / (A/B + Δ(M))`, clipped at zero.
pub fn em_step<T: Scalar>(
    states: &[FactorState<T>],
    model: &PltfModel<T>,
    obs: &Observation<T>,
    mode: EmPrior,
) -> Result<Vec<FactorState<T>>> {
    check_inputs(states, model, obs)?;
    let mut z: Vec<NamedTensor<T>> = states.iter().map(|s| s.mean.clone()).collect();
    for (alpha, spec) in model.factors().iter().enumerate() {
        if spec.is_clamped() {
            continue;
        }
        let views: Vec<&NamedTensor<T>> = z.iter().collect();
        let xhat = full_product(&views, model.observed())?;
        let ratio = safe_div(obs.masked_data(), &xhat).map_err(singular)?;
        let num = delta(alpha, &ratio, &views)?;
        let den = delta(alpha, obs.mask(), &views)?;
        let current = &z[alpha];
        let updated: Vec<T> = match mode {
            EmPrior::Flat => current
                .values()
                .iter()
                .zip(num.values().iter().zip(den.values()))
                .map(|(&zv, (&n, &d))| if d == T::zero() { zv } else { zv * n / d })
                .collect(),
            EmPrior::Full => {
                let a = spec.prior().shape().values();
                let rate = spec.prior().rate();
                current
                    .values()
                    .iter()
                    .zip(num.values().iter().zip(den.values()))
                    .zip(a.iter().zip(rate.values()))
                    .map(|((&zv, (&n, &d)), (&a, &r))| {
                        let top = a - T::one() + zv * n;
                        if top <= T::zero() {
                            T::zero()
                        } else {
                            top / (r + d)
                        }
                    })
                    .collect()
            }
        };
        z[alpha] = NamedTensor::nonneg(current.indices().to_vec(), updated)?;
    }
    z.into_iter()
        .zip(model.factors())
        .map(|(values, spec)| FactorState::point(values, spec.prior().shape()))
        .collect()
}
