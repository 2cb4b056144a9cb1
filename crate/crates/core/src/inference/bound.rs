use crate::error::{Error, Result};
use crate::inference::{check_inputs, geo_views, mean_views, reconstruct, FactorState};
use crate::model::{Observation, PltfModel};
use crate::scalar::Scalar;
use crate::special::{digamma, ln_gamma};
use crate::tensor::{describe, NamedTensor};

/// Variational lower bound on `log p(X)`.
///
/// With `q(S)` at its optimum for the current `L` views, the bound reduces to
///
/// ```text
/// Σ_{v₀: M=1} [X log X̂_L − X̂_E − log Γ(X+1)]  −  Σ_α Σ_{v_α} KL(G(C, D) ‖ G(A, B/A))
/// ```
///
/// summed over unclamped factors.
pub fn compute_bound<T: Scalar>(
    states: &[FactorState<T>],
    model: &PltfModel<T>,
    obs: &Observation<T>,
) -> Result<T> {
    check_inputs(states, model, obs)?;
    let xl = reconstruct(&geo_views(states), model)?;
    let xe = reconstruct(&mean_views(states), model)?;
    bound_with(states, model, obs, &xl, &xe)
}

pub(crate) fn bound_with<T: Scalar>(
    states: &[FactorState<T>],
    model: &PltfModel<T>,
    obs: &Observation<T>,
    xl: &NamedTensor<T>,
    xe: &NamedTensor<T>,
) -> Result<T> {
    let mut data = T::zero();
    let cells = obs
        .masked_data()
        .values()
        .iter()
        .zip(obs.mask().values())
        .zip(xl.values().iter().zip(xe.values()));
    for (k, ((&x, &m), (&l, &e))) in cells.enumerate() {
        if m == T::zero() {
            continue;
        }
        if x > T::zero() {
            if l <= T::zero() {
                return Err(Error::Singular {
                    iteration: None,
                    cell: xl.unravel(k),
                });
            }
            data += x * l.ln();
        }
        data -= e;
    }
    data -= obs.log_factorial_sum();

    let mut kl = T::zero();
    for (state, spec) in states.iter().zip(model.factors()) {
        if spec.is_clamped() {
            continue;
        }
        let prior = spec.prior();
        let a = prior.shape().values();
        let b = prior.mean().values();
        for (k, (&c, &d)) in state.shape.values().iter().zip(state.scale.values()).enumerate() {
            kl += gamma_kl(c, d, a[k], b[k] / a[k]);
        }
    }
    let bound = data - kl;
    if !bound.is_finite() {
        return Err(Error::NonFinite(0));
    }
    Ok(bound)
}

/// `KL(G(shape c, scale d) ‖ G(shape a, scale s))`.
pub fn gamma_kl<T: Scalar>(c: T, d: T, a: T, s: T) -> T {
    (c - a) * digamma(c) - ln_gamma(c) + ln_gamma(a) + a * (s.ln() - d.ln()) + c * (d / s - T::one())
}

/// Masked generalized KL divergence `Σ M (X log(X/X̂) − X + X̂)` with
/// `0 log 0 = 0`.
pub fn kl_divergence<T: Scalar>(
    x: &NamedTensor<T>,
    x_hat: &NamedTensor<T>,
    mask: &NamedTensor<T>,
) -> Result<T> {
    for other in [x_hat, mask] {
        if !x.same_shape(other) {
            return Err(Error::ShapeMismatch {
                expected: describe(x.indices()),
                found: describe(other.indices()),
            });
        }
    }
    let mut total = T::zero();
    let cells = x.values().iter().zip(x_hat.values()).zip(mask.values());
    for (k, ((&x, &xh), &m)) in cells.enumerate() {
        if m == T::zero() {
            continue;
        }
        if x > T::zero() {
            if xh <= T::zero() {
                return Err(Error::Singular {
                    iteration: None,
                    cell: x_hat.unravel(k),
                });
            }
            // x ln(x/x̂) − x + x̂ = x̂ [(1+t) ln(1+t) − t] with t = x/x̂ − 1,
            // which avoids cancellation near an exact fit.
            let t = x / xh - T::one();
            let cell = xh * ((T::one() + t) * t.ln_1p() - t);
            total += m * cell.max(T::zero());
        } else {
            total += m * xh;
        }
    }
    Ok(total)
}
