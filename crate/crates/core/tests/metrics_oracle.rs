mod common;

use approx::assert_abs_diff_eq;
use common::brute_force_auc;
use hybrid_select::metrics::{auc, classification_metrics, confusion_at, evaluate_scores, roc_points, ConfusionMatrix};
use proptest::prelude::*;

/// Labels with both classes and scores on a coarse grid so ties are common.
fn labeled_scores() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..=200).prop_flat_map(|n| {
        (
            prop::collection::vec(prop::bool::ANY, n),
            prop::collection::vec(0u8..12, n),
        )
            .prop_map(|(labels, s)| {
                let mut y: Vec<f64> = labels.into_iter().map(|b| f64::from(u8::from(b))).collect();
                y[0] = 1.0;
                y[1] = 0.0;
                (y, s.into_iter().map(|v| f64::from(v) / 4.0).collect())
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn auc_equals_pairwise_concordance((y, s) in labeled_scores()) {
        let a = auc(&y, &s).unwrap();
        prop_assert!((a - brute_force_auc(&y, &s)).abs() <= 1e-12);
    }

    #[test]
    fn auc_is_rank_invariant((y, s) in labeled_scores()) {
        let warped: Vec<f64> = s.iter().map(|v| v.powi(3) * 7.0 - 2.0).collect();
        prop_assert_eq!(auc(&y, &s).unwrap(), auc(&y, &warped).unwrap());
    }

    #[test]
    fn reversed_scores_flip_auc((y, s) in labeled_scores()) {
        let neg: Vec<f64> = s.iter().map(|v| -v).collect();
        prop_assert!((auc(&y, &s).unwrap() + auc(&y, &neg).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn roc_is_monotone_staircase((y, s) in labeled_scores()) {
        let pts = roc_points(&y, &s).unwrap();
        prop_assert_eq!(pts[0], (0.0, 0.0));
        prop_assert_eq!(*pts.last().unwrap(), (1.0, 1.0));
        for w in pts.windows(2) {
            prop_assert!(w[1].0 >= w[0].0 && w[1].1 >= w[0].1);
        }
    }

    #[test]
    fn confusion_cells_partition_rows((y, s) in labeled_scores(), t in 0.0f64..3.0) {
        let cm = confusion_at(&y, &s, t).unwrap();
        prop_assert_eq!(cm.total(), y.len());
        let m = evaluate_scores(&y, &s, t).unwrap();
        if let (Some(r), Some(sp), Some(b)) = (m.recall, m.specificity, m.balanced_accuracy) {
            prop_assert!((b - (r + sp) / 2.0).abs() < 1e-15);
        }
    }
}

#[test]
fn elastic_net_row_golden_values() {
    let m = classification_metrics(&ConfusionMatrix::new(187, 97, 37, 218)).unwrap();
    assert_abs_diff_eq!(m.accuracy.unwrap(), 0.7514, epsilon = 5e-5);
    assert_abs_diff_eq!(m.recall.unwrap(), 0.6585, epsilon = 5e-5);
    assert_abs_diff_eq!(m.specificity.unwrap(), 0.8549, epsilon = 5e-5);
    assert_abs_diff_eq!(m.precision.unwrap(), 0.8348, epsilon = 5e-5);
    assert_abs_diff_eq!(m.f1.unwrap(), 0.7362, epsilon = 5e-5);
    assert_abs_diff_eq!(m.balanced_accuracy.unwrap(), 0.7567, epsilon = 5e-5);
}

#[test]
fn test_split_total_matches_the_confusion_tables() {
    for cm in [
        ConfusionMatrix::new(187, 97, 39, 216),
        ConfusionMatrix::new(187, 97, 34, 221),
        ConfusionMatrix::new(187, 97, 37, 218),
    ] {
        assert_eq!(cm.total(), 539);
    }
}
