use std::collections::BTreeSet;

use hybrid_select::dataframe::{kfold_stratified, split_random, split_stratified, Dataset};
use proptest::prelude::*;

fn binary(n: usize, n_pos: usize) -> Dataset {
    let y: Vec<f64> = (0..n).map(|i| f64::from(u8::from(i % n.max(1) < n_pos))).collect();
    Dataset::from_columns(vec![("x", (0..n).map(|i| i as f64).collect())], Some(("y", y))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn folds_hold_proportional_class_shares(
        n in 20usize..400,
        balance in 0.05f64..0.95,
        k in 2usize..=10,
        seed in any::<u64>(),
    ) {
        let n_pos = ((n as f64 * balance).round() as usize).clamp(k, n - k);
        let d = binary(n, n_pos);
        let folds = kfold_stratified(&d, k, seed).unwrap();
        let y = d.target().unwrap();
        let share = n_pos as f64 / k as f64;
        let mut seen = 0;
        for f in 0..k {
            let rows = folds.validation_rows(f);
            seen += rows.len();
            let pos = rows.iter().filter(|&&r| y[r] == 1.0).count() as f64;
            prop_assert!((pos - share).abs() <= 1.0, "fold {f}: {pos} positives vs share {share}");
            let train: BTreeSet<usize> = folds.training_rows(f).into_iter().collect();
            prop_assert!(rows.iter().all(|r| !train.contains(r)));
            prop_assert_eq!(train.len() + rows.len(), n);
        }
        prop_assert_eq!(seen, n);
        prop_assert_eq!(folds, kfold_stratified(&d, k, seed).unwrap());
    }

    #[test]
    fn stratified_split_is_disjoint_and_sized(n in 30usize..600, balance in 0.1f64..0.9, seed in any::<u64>()) {
        let n_pos = ((n as f64 * balance) as usize).clamp(3, n - 3);
        let d = binary(n, n_pos);
        let (train, test) = split_stratified(&d, 0.2, seed).unwrap();
        prop_assert_eq!(test.n_rows(), n / 5);
        prop_assert_eq!(train.n_rows() + test.n_rows(), n);
        let a: BTreeSet<usize> = train.row_ids().iter().copied().collect();
        prop_assert!(test.row_ids().iter().all(|r| !a.contains(r)));
    }
}

#[test]
fn insurance_scale_split_has_539_test_rows() {
    // 1,420 positives give the 284 positive / 255 negative test split of
    // the golden confusion tables.
    let d = binary(2697, 1420);
    let (train, test) = split_stratified(&d, 0.2, 2024).unwrap();
    assert_eq!(test.n_rows(), 539);
    assert_eq!(train.n_rows(), 2158);
    let pos = test.target().unwrap().iter().filter(|&&v| v == 1.0).count();
    assert_eq!((pos, 539 - pos), (284, 255));
}

#[test]
fn continuous_targets_get_plain_folds() {
    let d = Dataset::from_columns(
        vec![("x", (0..23).map(f64::from).collect())],
        Some(("y", (0..23).map(|i| f64::from(i) * 0.37).collect())),
    )
    .unwrap();
    let folds = kfold_stratified(&d, 4, 5).unwrap();
    let sizes = folds.fold_sizes();
    assert_eq!(sizes.iter().sum::<usize>(), 23);
    assert!(sizes.iter().all(|&s| s == 5 || s == 6));
    let (train, test) = split_random(&d, 0.25, 1).unwrap();
    assert_eq!(train.n_rows() + test.n_rows(), 23);
}
