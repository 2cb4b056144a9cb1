use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};

use crate::error::{Error, Result};
use crate::model::{build_cp, PltfModel, PriorDefaults};
use crate::scalar::Scalar;
use crate::tensor::{full_product, NamedTensor};

/// A synthetic CP instance with its ground truth.
#[derive(Clone, Debug)]
pub struct SyntheticData<T> {
    pub model: PltfModel<T>,
    /// Observed tensor: `intensity` itself, or a Poisson draw from it.
    pub data: NamedTensor<T>,
    /// Ground-truth factors `Z1, Z2, Z3`.
    pub factors: Vec<NamedTensor<T>>,
    /// `Λ₀ = Σ_r Z1 Z2 Z3`.
    pub intensity: NamedTensor<T>,
}

/// Draw CP factors from `G(A, B/A)` and form `X`, optionally Poisson-sampled.
pub fn generate_cp<T: Scalar>(
    dims: [usize; 3],
    rank: usize,
    priors: PriorDefaults<T>,
    seed: u64,
    poisson: bool,
) -> Result<SyntheticData<T>> {
    let model = build_cp(dims, rank, priors)?;
    let (a, b) = (priors.a.as_f64(), priors.b.as_f64());
    let gamma = Gamma::new(a, b / a).map_err(|e| Error::InvalidArgument(format!("gamma prior: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let factors = model
        .factors()
        .iter()
        .map(|f| {
            let n = f.indices().iter().map(|i| i.cardinality()).product();
            let values = (0..n).map(|_| T::of(gamma.sample(&mut rng))).collect();
            NamedTensor::nonneg(f.indices().to_vec(), values)
        })
        .collect::<Result<Vec<_>>>()?;
    let views: Vec<&NamedTensor<T>> = factors.iter().collect();
    let intensity = full_product(&views, model.observed())?;

    let data = if poisson {
        let values = intensity
            .values()
            .iter()
            .map(|&lam| {
                let lam = lam.as_f64();
                if lam <= 0.0 {
                    return Ok(T::zero());
                }
                let p = Poisson::new(lam).map_err(|e| Error::InvalidArgument(format!("poisson rate {lam}: {e}")))?;
                Ok(T::of(p.sample(&mut rng)))
            })
            .collect::<Result<Vec<_>>>()?;
        NamedTensor::nonneg(intensity.indices().to_vec(), values)?
    } else {
        intensity.clone()
    };

    Ok(SyntheticData {
        model,
        data,
        factors,
        intensity,
    })
}
