use crate::error::{Error, Result};
use crate::eval::{auc, HoldoutSplit};
use crate::inference::{fit, FitConfig};
use crate::model::PltfModel;
use crate::scalar::Scalar;
use crate::tensor::NamedTensor;

/// `1` where `x > 0`, else `0`.
pub fn binarize<T: Scalar>(x: &NamedTensor<T>) -> NamedTensor<T> {
    x.map(|v| if v > T::zero() { T::one() } else { T::zero() })
        .expect("mapping to {0, 1} keeps values finite")
}

/// Fit `model` on the training cells of `x_full` and score the held-out
/// cells by the reconstruction from the factor means. Positives are the
/// held-out cells with `x > 0`.
pub fn link_prediction_run<T: Scalar>(
    model: &PltfModel<T>,
    x_full: &NamedTensor<T>,
    split: &HoldoutSplit<T>,
    config: &FitConfig,
) -> Result<f64> {
    if split.test_cells.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let obs = split.observe(x_full)?;
    let res = fit(model, &obs, config)?;
    let xhat = res.reconstruction(model)?;
    let scores: Vec<f64> = split.test_cells.iter().map(|&c| xhat.values()[c].as_f64()).collect();
    let labels: Vec<bool> = split
        .test_cells
        .iter()
        .map(|&c| x_full.values()[c] > T::zero())
        .collect();
    auc(&scores, &labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{generate_cp, make_holdout};
    use crate::model::{build_cp, PriorDefaults};

    #[test]
    fn empty_test_set() {
        let m = build_cp::<f64>([3, 3, 3], 1, PriorDefaults::default()).unwrap();
        let x = NamedTensor::ones(m.observed().to_vec()).unwrap();
        let split = make_holdout(m.observed(), 0.0, 1).unwrap();
        assert!(matches!(
            link_prediction_run(&m, &x, &split, &FitConfig::default()),
            Err(Error::EmptyTestSet)
        ));
    }

    #[test]
    fn runs_and_is_a_probability() {
        let p = PriorDefaults::new(1.0, 1.0);
        let s = generate_cp::<f64>([8, 8, 4], 2, p, 3, true).unwrap();
        let x = binarize(&s.data);
        let split = make_holdout(s.model.observed(), 0.5, 3).unwrap();
        let cfg = FitConfig {
            max_iters: 50,
            ..FitConfig::default()
        };
        let a = link_prediction_run(&s.model, &x, &split, &cfg).unwrap();
        assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn binarize_thresholds_at_zero() {
        let t = NamedTensor::from_vec(
            vec![crate::tensor::IndexDef::new("i", 4).unwrap()],
            vec![0.0, 0.5, 3.0, 0.0],
        )
        .unwrap();
        assert_eq!(binarize(&t).values(), &[0.0, 1.0, 1.0, 0.0]);
    }
}
