mod common;

use common::*;
use hybrid_select::dataframe::Dataset;
use hybrid_select::gbt::{
    fit_gbdt, fit_random_forest, importance_gain, ForestConfig, GbtConfig, Growth, HessianMode, Loss, Predictor,
    Task,
};

fn config_for(seed: u64) -> GbtConfig {
    let growth = [Growth::DepthWise, Growth::LeafWise, Growth::Symmetric][seed as usize % 3];
    GbtConfig {
        n_trees: 25,
        max_depth: 2 + seed as usize % 4,
        learning_rate: [0.05, 0.3, 1.0][seed as usize % 3],
        l2_leaf_reg: [0.0, 1.0, 5.0][(seed as usize / 3) % 3],
        growth,
        num_leaves: (growth == Growth::LeafWise).then_some(6),
        min_samples_leaf: 1 + seed as usize % 5,
        hessian: if seed.is_multiple_of(4) { HessianMode::Unit } else { HessianMode::Newton },
        seed,
        ..GbtConfig::default()
    }
}

#[test]
fn training_loss_never_increases() {
    for seed in 0..20u64 {
        let (d, loss) = if seed % 2 == 0 {
            (gaussian_instance(80 + seed as usize * 5, 6, seed), Loss::Squared)
        } else {
            (binomial_instance(80 + seed as usize * 5, 6, seed), Loss::Logistic)
        };
        let mut c = config_for(seed);
        c.loss = loss;
        if loss == Loss::Logistic {
            // A full Newton step can overshoot the logistic loss.
            c.learning_rate = c.learning_rate.min(0.3);
        }
        let m = fit_gbdt(&d, &c).unwrap();
        assert_eq!(m.training_loss.len(), c.n_trees + 1);
        for (r, w) in m.training_loss.windows(2).enumerate() {
            assert!(w[1] <= w[0] * (1.0 + 1e-12), "seed {seed}, round {r}: {} -> {}", w[0], w[1]);
        }
    }
}

#[test]
fn stump_predicts_the_four_point_example() {
    let d = Dataset::from_columns(vec![("x", vec![1.0, 2.0, 3.0, 4.0])], Some(("y", vec![0.0, 0.0, 1.0, 1.0]))).unwrap();
    let c = GbtConfig {
        n_trees: 1,
        max_depth: 1,
        learning_rate: 1.0,
        l2_leaf_reg: 0.0,
        loss: Loss::Squared,
        ..GbtConfig::default()
    };
    let m = fit_gbdt(&d, &c).unwrap();
    assert_eq!(m.predict(&d).unwrap(), vec![0.0, 0.0, 1.0, 1.0]);
    let split = m.trees[0].nodes[0].split.as_ref().unwrap();
    assert_eq!(split.gain, 1.0);
    assert!(split.threshold > 2.0 && split.threshold < 3.0);
}

#[test]
fn monotone_transforms_leave_predictions_bit_identical() {
    let warp = |v: f64| (0.5 * v).exp() * 3.0 + v * v * v;
    for seed in 0..6u64 {
        let d = if seed % 2 == 0 { gaussian_instance(120, 5, seed) } else { binomial_instance(120, 5, seed) };
        let warped = |ds: &Dataset| {
            let cols = columns_of(ds).into_iter().map(|c| c.into_iter().map(warp).collect()).collect();
            with_names(cols, ds.target().unwrap().to_vec())
        };
        let mut c = config_for(seed);
        c.loss = if seed % 2 == 0 { Loss::Squared } else { Loss::Logistic };
        // Thresholds sit at midpoints, so points strictly inside a gap may
        // route differently after warping. Training rows cannot.
        let a = fit_gbdt(&d, &c).unwrap().predict(&d).unwrap();
        let b = fit_gbdt(&warped(&d), &c).unwrap().predict(&warped(&d)).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()), "seed {seed}");
    }
}

#[test]
fn refits_are_bit_identical() {
    let d = binomial_instance(150, 8, 11);
    let mut c = config_for(2);
    c.loss = Loss::Logistic;
    assert_eq!(fit_gbdt(&d, &c).unwrap(), fit_gbdt(&d, &c).unwrap());
    let f = ForestConfig {
        n_trees: 30,
        mtry: 3,
        min_samples_leaf: 1,
        max_depth: None,
        bootstrap: true,
        task: Task::Classification,
        seed: 4,
    };
    let a = fit_random_forest(&d, &f).unwrap();
    let b = fit_random_forest(&d, &f).unwrap();
    assert_eq!(a.predict(&d).unwrap(), b.predict(&d).unwrap());
}

#[test]
fn forest_probabilities_and_importance() {
    let d = binomial_instance(200, 6, 21);
    let f = ForestConfig {
        n_trees: 40,
        mtry: 2,
        min_samples_leaf: 1,
        max_depth: None,
        bootstrap: true,
        task: Task::Classification,
        seed: 9,
    };
    let m = fit_random_forest(&d, &f).unwrap();
    assert!(m.predict(&d).unwrap().iter().all(|p| (0.0..=1.0).contains(p)));
    assert!(m.bootstrap_counts.iter().all(|c| c.iter().sum::<u32>() as usize == d.n_rows()));
    let imp = importance_gain(&m);
    assert_eq!(imp.len(), 6);
    assert!(imp.values().all(|&v| v >= 0.0));
}
