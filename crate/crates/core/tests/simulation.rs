use hybrid_select::gbt::Learner;
use hybrid_select::pipeline::{make_folds, run_regularized_baseline};
use hybrid_select::regpath::select_features;
use hybrid_select::simgen::{
    cell_inputs, friedman1, friedman1_response, run_simulation_grid, summarize_rmse, FriedmanSpec, SimConfig,
};
use hybrid_select::tuner::{ParamDist, SearchSpace};

fn tiny() -> SimConfig {
    let mut cfg = SimConfig {
        ns: vec![60, 90],
        ps: vec![6],
        replicates: 2,
        test_size: 50,
        ..SimConfig::default()
    };
    cfg.pipeline.n_trials = 1;
    cfg.pipeline.learners = vec![Learner::XgbLike, Learner::Rf];
    for l in Learner::ALL {
        cfg.pipeline
            .space_overrides
            .insert(l, SearchSpace::default().with("n_trees", ParamDist::IntUniform { lo: 5, hi: 10 }));
    }
    cfg
}

#[test]
fn grid_emits_one_record_per_model_and_cell() {
    let cfg = tiny();
    let records = run_simulation_grid(&cfg).unwrap();
    let per_cell = cfg.model_ids().len();
    assert_eq!(per_cell, 3 + 2 * 4);
    assert_eq!(records.len(), 2 * 2 * per_cell);
    assert!(records.iter().all(|r| r.error.is_none() && r.rmse.is_some_and(|v| v > 0.0)));
    let cells: Vec<(usize, usize)> = records.iter().step_by(per_cell).map(|r| (r.n, r.replicate)).collect();
    assert_eq!(cells, vec![(60, 0), (60, 1), (90, 0), (90, 1)]);
    assert_eq!(records, run_simulation_grid(&cfg).unwrap());

    let summary = summarize_rmse(&records).unwrap();
    assert_eq!(summary.len(), per_cell);
    assert!(summary.iter().all(|s| s.count == 4 && s.failed == 0));
    assert!(summary.windows(2).all(|w| w[0].mean <= w[1].mean));
}

#[test]
fn noise_predictors_do_not_enter_the_response() {
    let d = friedman1(&FriedmanSpec {
        noise_sd: 0.0,
        ..FriedmanSpec::new(50, 9, 3)
    })
    .unwrap();
    let y = d.target().unwrap();
    for (i, &yi) in y.iter().enumerate() {
        let row: Vec<f64> = d.columns().iter().map(|c| c.values[i]).collect();
        assert!(row.iter().all(|v| (0.0..1.0).contains(v)));
        let mut scrambled = row.clone();
        scrambled[5..].iter_mut().for_each(|v| *v = 1.0 - *v);
        assert_eq!(yi, friedman1_response(&row[..5]));
        assert_eq!(friedman1_response(&row), friedman1_response(&scrambled));
    }
}

#[test]
fn cells_are_independent_of_each_other() {
    let cfg = SimConfig::default();
    let (tr_a, te_a, pc_a) = cell_inputs(&cfg, 200, 10, 0).unwrap();
    let (tr_b, _, pc_b) = cell_inputs(&cfg, 200, 10, 1).unwrap();
    assert_ne!(tr_a.columns()[0].values, tr_b.columns()[0].values);
    assert_ne!(pc_a.seed, pc_b.seed);
    assert_eq!(te_a.row_ids()[0], 200);
    assert_eq!(pc_a.ridge_top_m, Some(10));
}

#[test]
fn lasso_keeps_the_linear_terms() {
    let cfg = SimConfig::default();
    let (train, test, pc) = cell_inputs(&cfg, 500, 20, 0).unwrap();
    let folds = make_folds(&train, pc.k, pc.fold_seed()).unwrap();
    let run = run_regularized_baseline(&train, &test, 1.0, &folds, &pc).unwrap();
    let names = select_features(&run.fit, None).unwrap().names();
    assert!(names.contains(&"x4".to_string()) && names.contains(&"x5".to_string()), "{names:?}");
}
