mod common;

use common::brute_auc;
use pltf::eval::{binarize, restart_seed};
use pltf::{
    auc, fit, generate_cp, link_prediction_run, make_holdout, sweep_order, Error, FitConfig, Method, ModelFamily, Obs,
    PriorDefaults, Split,
};
use proptest::prelude::*;

fn scores_and_labels() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    // Scores from a small integer grid so ties are common.
    (2usize..60)
        .prop_flat_map(|n| (prop::collection::vec(0u8..8, n), prop::collection::vec(any::<bool>(), n)))
        .prop_filter("both classes present", |(_, l)| l.iter().any(|&x| x) && l.iter().any(|&x| !x))
        .prop_map(|(s, l)| (s.into_iter().map(f64::from).collect(), l))
}

proptest! {
    #[test]
    fn auc_matches_pairwise_count((s, l) in scores_and_labels()) {
        prop_assert!((auc(&s, &l).unwrap() - brute_auc(&s, &l)).abs() < 1e-12);
    }

    #[test]
    fn auc_ignores_monotone_transforms((s, l) in scores_and_labels()) {
        let t: Vec<f64> = s.iter().map(|x| (0.3 * x).exp() * 5.0 - 2.0).collect();
        prop_assert_eq!(auc(&s, &l).unwrap(), auc(&t, &l).unwrap());
    }

    #[test]
    fn holdout_is_disjoint_and_sized(d in prop::collection::vec(1usize..9, 1..4), f in 0.0f64..0.99, seed in any::<u64>()) {
        let idx: Vec<pltf::IndexDef> = d.iter().enumerate().map(|(k, &c)| pltf::IndexDef::new(format!("a{k}"), c).unwrap()).collect();
        let n: usize = d.iter().product();
        let s: Split = make_holdout(&idx, f, seed).unwrap();
        prop_assert_eq!(s.test_cells.len(), (f * n as f64).round() as usize);
        prop_assert!(s.test_cells.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(s.test_cells.iter().all(|&c| s.train_mask.values()[c] == 0.0));
        let train = s.train_mask.values().iter().filter(|&&m| m == 1.0).count();
        prop_assert_eq!(train + s.test_cells.len(), n);
        prop_assert_eq!(&s, &make_holdout::<f64>(&idx, f, seed).unwrap());
    }
}

#[test]
fn auc_degenerate_orderings() {
    let s: Vec<f64> = (0..10).map(f64::from).collect();
    let l: Vec<bool> = (0..10).map(|k| k >= 5).collect();
    assert_eq!(auc(&s, &l).unwrap(), 1.0);
    let flipped: Vec<bool> = l.iter().map(|x| !x).collect();
    assert_eq!(auc(&s, &flipped).unwrap(), 0.0);
    assert!(matches!(auc(&s, &[true; 10]), Err(Error::SingleClass)));
}

#[test]
fn noiseless_rank_one_with_unit_factors_is_all_ones() {
    // A huge shape with unit mean pins every factor draw to 1.
    let s = generate_cp::<f64>([3, 4, 2], 1, PriorDefaults::new(1e12, 1.0), 1, false).unwrap();
    assert!(s.data.values().iter().all(|&x| (x - 1.0).abs() < 1e-4));
}

#[test]
fn ground_truth_scores_separate_thresholded_labels() {
    let s = generate_cp::<f64>([10, 10, 6], 3, PriorDefaults::new(1.0, 1.0), 4, false).unwrap();
    let mut sorted = s.intensity.values().to_vec();
    sorted.sort_by(f64::total_cmp);
    let threshold = sorted[sorted.len() / 2];
    let split: Split = make_holdout(s.model.observed(), 0.5, 4).unwrap();
    let scores: Vec<f64> = split.test_cells.iter().map(|&c| s.intensity.values()[c]).collect();
    let labels: Vec<bool> = scores.iter().map(|&v| v > threshold).collect();
    assert_eq!(auc(&scores, &labels).unwrap(), 1.0);
}

#[test]
fn sweep_selection_does_not_depend_on_enumeration_order() {
    let p = PriorDefaults::new(1.0, 1.0);
    let s = generate_cp::<f64>([6, 5, 4], 2, p, 8, true).unwrap();
    let obs = Obs::fully_observed(s.data).unwrap();
    let cfg = FitConfig {
        max_iters: 40,
        seed: 5,
        ..FitConfig::default()
    };
    let rep = sweep_order(ModelFamily::Cp, &obs, 1, 3, 2, p, &cfg).unwrap();

    // Refit every cell in reverse order and rebuild the report by hand.
    let mut best = vec![f64::NEG_INFINITY; 3];
    for order in (1..=3).rev() {
        for restart in (0..2).rev() {
            let model = ModelFamily::Cp.build([6, 5, 4], order, p).unwrap();
            let c = FitConfig {
                seed: restart_seed(5, order, restart),
                ..cfg.clone()
            };
            let b = fit(&model, &obs, &c).unwrap().final_bound().unwrap();
            assert_eq!(b, rep.restart_bounds[order - 1][restart]);
            best[order - 1] = best[order - 1].max(b);
        }
    }
    assert_eq!(best, rep.best_bound);
    let top = best.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(rep.selected_order, 1 + best.iter().position(|&b| b == top).unwrap());
}

#[test]
fn em_sweep_scores_by_divergence() {
    let p = PriorDefaults::new(1.0, 1.0);
    let s = generate_cp::<f64>([5, 5, 4], 2, p, 2, true).unwrap();
    let obs = Obs::fully_observed(s.data).unwrap();
    let cfg = FitConfig {
        method: Method::Em,
        max_iters: 30,
        ..FitConfig::default()
    };
    let rep = sweep_order(ModelFamily::Cp, &obs, 1, 2, 1, p, &cfg).unwrap();
    assert!(rep.best_bound.iter().all(|&b| b <= 0.0));
}

#[test]
fn link_prediction_rejects_empty_test_set() {
    let s = generate_cp::<f64>([4, 4, 2], 1, PriorDefaults::new(1.0, 1.0), 1, true).unwrap();
    let split: Split = make_holdout(s.model.observed(), 0.0, 1).unwrap();
    assert!(matches!(
        link_prediction_run(&s.model, &s.data, &split, &FitConfig::default()),
        Err(Error::EmptyTestSet)
    ));
}

#[test]
fn link_prediction_beats_chance_on_structured_data() {
    let s = generate_cp::<f64>([12, 12, 5], 2, PriorDefaults::new(0.5, 1.0), 3, true).unwrap();
    let x = binarize(&s.data);
    let split: Split = make_holdout(s.model.observed(), 0.4, 3).unwrap();
    let cfg = FitConfig {
        max_iters: 200,
        ..FitConfig::default()
    };
    let a = link_prediction_run(&s.model, &x, &split, &cfg).unwrap();
    assert!(a > 0.7, "{a}");
}
