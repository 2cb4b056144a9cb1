//! Experiment harness: synthetic data, holdout masks, model-order sweeps and
//! AUC link-prediction scoring.

mod auc;
mod holdout;
mod links;
mod sweep;
mod synth;

pub use auc::auc;
pub use holdout::{make_holdout, HoldoutSplit};
pub use links::{binarize, link_prediction_run};
pub use sweep::{restart_seed, sweep_order, ModelFamily, SweepReport};
pub use synth::{generate_cp, SyntheticData};
