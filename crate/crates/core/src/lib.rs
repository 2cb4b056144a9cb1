//! Probabilistic latent tensor factorization (PLTF) under the KL / Poisson
//! observation model.
//!
//! An observed non-negative tensor `X` over the visible indices is modelled as
//! the marginal of a latent Poisson tensor whose intensity is the product of
//! gamma-distributed factors over arbitrary index subsets. CP and Tucker are
//! two instances; any other structure can be declared index by index.
//!
//! Two inference engines are provided: multiplicative EM for point estimates
//! and variational Bayes, which also yields a lower bound on the log marginal
//! likelihood that is used for model-order selection. Missing cells are
//! handled through a 0/1 mask throughout.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the aliases at the
//! crate root fix the element type to `f64`, which is what the CLI uses.

pub mod coo;
pub mod config;
pub mod error;
pub mod eval;
pub mod inference;
pub mod model;
pub mod scalar;
pub mod special;
pub mod tensor;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use tensor::{delta, full_product, hadamard, safe_div, IndexDef, NamedTensor};

pub use coo::CooTable;
pub use config::{ModelConfig, ModelKind};
pub use eval::{
    auc, generate_cp, link_prediction_run, make_holdout, sweep_order, HoldoutSplit, ModelFamily,
    SweepReport, SyntheticData,
};
pub use inference::{
    compute_bound, em_step, fit, init_factors, kl_divergence, latent_stats, vb_step, EmPrior,
    FactorState, FitConfig, FitResult, LatentStats, Method,
};
pub use model::{build_cp, build_tucker, FactorSpec, GammaPrior, Observation, PltfModel, PriorDefaults, Violation};

/// Dense named tensor of `f64`.
pub type Tensor = NamedTensor<f64>;
/// Dense named tensor of `f32`.
pub type Tensor32 = NamedTensor<f32>;
pub type Model = PltfModel<f64>;
pub type Model32 = PltfModel<f32>;
pub type Obs = Observation<f64>;
pub type State = FactorState<f64>;
pub type Fit = FitResult<f64>;
pub type Fit32 = FitResult<f32>;
pub type Synthetic = SyntheticData<f64>;
pub type Split = HoldoutSplit<f64>;
