use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::inference::{fit, FitConfig};
use crate::model::{build_cp, build_tucker, Observation, PltfModel, PriorDefaults};
use crate::scalar::Scalar;

/// Structure family swept over by [`sweep_order`]. For Tucker the order `r`
/// means an `r × r × r` core.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ModelFamily {
    #[default]
    Cp,
    Tucker,
}

impl ModelFamily {
    pub fn build<T: Scalar>(self, dims: [usize; 3], order: usize, priors: PriorDefaults<T>) -> Result<PltfModel<T>> {
        match self {
            ModelFamily::Cp => build_cp(dims, order, priors),
            ModelFamily::Tucker => build_tucker(dims, [order; 3], priors),
        }
    }
}

impl FromStr for ModelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cp" => Ok(ModelFamily::Cp),
            "tucker" => Ok(ModelFamily::Tucker),
            other => Err(Error::InvalidArgument(format!("unknown model family `{other}`"))),
        }
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelFamily::Cp => "cp",
            ModelFamily::Tucker => "tucker",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub orders: Vec<usize>,
    /// Best score over restarts, per order.
    pub best_bound: Vec<f64>,
    /// `restart_bounds[o][r]`: score of restart `r` at `orders[o]`.
    pub restart_bounds: Vec<Vec<f64>>,
    /// Order with the highest `best_bound`; ties go to the smaller order.
    pub selected_order: usize,
}

/// Seed of restart `restart` at `order`, derived from `base` with a
/// splitmix64 finaliser so neighbouring cells get unrelated streams.
pub fn restart_seed(base: u64, order: usize, restart: usize) -> u64 {
    let mut z = base
        .wrapping_add((order as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add((restart as u64).wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fit every order in `r_min..=r_max` from `restarts` random starts and pick
/// the order whose best restart scores highest. The score is the bound for
/// VB and the negated divergence for EM. `config.seed` is the base seed.
pub fn sweep_order<T: Scalar>(
    family: ModelFamily,
    obs: &Observation<T>,
    r_min: usize,
    r_max: usize,
    restarts: usize,
    priors: PriorDefaults<T>,
    config: &FitConfig,
) -> Result<SweepReport> {
    if r_min == 0 || r_min > r_max {
        return Err(Error::InvalidArgument(format!(
            "order range must satisfy 1 <= r_min <= r_max, got {r_min}..={r_max}"
        )));
    }
    if restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be at least 1".into()));
    }
    let dims: [usize; 3] = obs
        .indices()
        .iter()
        .map(|i| i.cardinality())
        .collect::<Vec<_>>()
        .try_into()
        .map_err(|d: Vec<usize>| Error::InvalidArgument(format!("order sweeps need a 3-way tensor, got {} ways", d.len())))?;

    let orders: Vec<usize> = (r_min..=r_max).collect();
    let cells: Vec<(usize, usize)> = orders
        .iter()
        .flat_map(|&o| (0..restarts).map(move |r| (o, r)))
        .collect();
    let scores = cells
        .par_iter()
        .map(|&(order, restart)| {
            let tag = |e: Error| Error::Sweep {
                order,
                restart,
                source: Box::new(e),
            };
            let model = family.build(dims, order, priors).map_err(tag)?;
            let cfg = FitConfig {
                seed: restart_seed(config.seed, order, restart),
                ..config.clone()
            };
            let res = fit(&model, obs, &cfg).map_err(tag)?;
            log::debug!("order {order} restart {restart}: score {}", res.score());
            Ok(res.score())
        })
        .collect::<Result<Vec<f64>>>()?;

    let restart_bounds: Vec<Vec<f64>> = scores.chunks(restarts).map(|c| c.to_vec()).collect();
    let best_bound: Vec<f64> = restart_bounds
        .iter()
        .map(|c| c.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let mut best = 0;
    for (k, &b) in best_bound.iter().enumerate() {
        if b > best_bound[best] {
            best = k;
        }
    }
    Ok(SweepReport {
        selected_order: orders[best],
        orders,
        best_bound,
        restart_bounds,
    })
}
