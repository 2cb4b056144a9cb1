use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::model::PltfModel;
use crate::scalar::Scalar;
use crate::special::digamma;
use crate::tensor::{hadamard, NamedTensor};

/// Gamma posterior `q(Z_α) = G(shape C, scale D)` with its two expectations:
/// the mean `E = C∘D` and the geometric mean `L = exp(ψ(C))∘D`.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorState<T> {
    pub(crate) shape: NamedTensor<T>,
    pub(crate) scale: NamedTensor<T>,
    pub(crate) mean: NamedTensor<T>,
    pub(crate) geo_mean: NamedTensor<T>,
}

impl<T: Scalar> FactorState<T> {
    /// Consistent state from shape `C` and scale `D`.
    pub fn from_shape_scale(shape: NamedTensor<T>, scale: NamedTensor<T>) -> Result<Self> {
        let mean = hadamard(&shape, &scale)?;
        let geo_mean = shape.zip_map(&scale, |c, d| digamma(c).exp() * d)?;
        Ok(FactorState {
            shape,
            scale,
            mean,
            geo_mean,
        })
    }

    /// Point-mass state: `E = L = values`, with `C = A`, `D = values / A` kept
    /// for reporting.
    pub fn point(values: NamedTensor<T>, prior_shape: &NamedTensor<T>) -> Result<Self> {
        Self::with_views(values.clone(), values, prior_shape)
    }

    /// Arbitrary mean and geometric-mean views (used at initialisation, where
    /// they are drawn independently).
    pub fn with_views(
        mean: NamedTensor<T>,
        geo_mean: NamedTensor<T>,
        prior_shape: &NamedTensor<T>,
    ) -> Result<Self> {
        let scale = mean.zip_map(prior_shape, |e, a| e / a)?;
        if !geo_mean.same_shape(&mean) {
            return Err(Error::InvalidArgument("mean and geometric-mean views differ in shape".into()));
        }
        Ok(FactorState {
            shape: prior_shape.clone(),
            scale,
            mean,
            geo_mean,
        })
    }

    /// `C`.
    pub fn shape(&self) -> &NamedTensor<T> {
        &self.shape
    }

    /// `D`.
    pub fn scale(&self) -> &NamedTensor<T> {
        &self.scale
    }

    /// `E = ⟨Z⟩`.
    pub fn mean(&self) -> &NamedTensor<T> {
        &self.mean
    }

    /// `L = exp⟨log Z⟩`.
    pub fn geo_mean(&self) -> &NamedTensor<T> {
        &self.geo_mean
    }
}

/// Draw initial `L` and `E` independently from each factor's prior
/// `G(A, B/A)`, factor by factor in declaration order (`L` before `E`).
/// Clamped factors take their fixed values.
pub fn init_factors<T: Scalar>(model: &PltfModel<T>, seed: u64) -> Result<Vec<FactorState<T>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    model
        .factors()
        .iter()
        .map(|f| {
            let a = f.prior().shape();
            if let Some(fixed) = f.fixed() {
                return FactorState::point(fixed.clone(), a);
            }
            let b = f.prior().mean();
            let mut draw = || -> Result<NamedTensor<T>> {
                let values = a
                    .values()
                    .iter()
                    .zip(b.values())
                    .map(|(&a, &b)| {
                        let (a, b) = (a.as_f64(), b.as_f64());
                        let g = Gamma::new(a, b / a)
                            .map_err(|e| Error::InvalidArgument(format!("gamma prior: {e}")))?;
                        Ok(T::of(g.sample(&mut rng)).max(T::min_positive_value()))
                    })
                    .collect::<Result<Vec<T>>>()?;
                NamedTensor::nonneg(f.indices().to_vec(), values)
            };
            let geo = draw()?;
            let mean = draw()?;
            FactorState::with_views(mean, geo, a)
        })
        .collect()
}
