//! Acceptance suite: one PASS/FAIL line per criterion, then a single
//! assertion over all of them. Run with
//! `cargo test --release -p hybrid-select-cli --test acceptance -- --nocapture`
//! to see the lines when everything passes.

#[path = "../../core/tests/common/mod.rs"]
mod common;
mod support;

use std::fs;
use std::time::Instant;

use common::*;
use hybrid_select::dataframe::{kfold_stratified, split_stratified, Dataset};
use hybrid_select::gbt::{fit_gbdt, GbtConfig, Growth, Loss, Predictor};
use hybrid_select::metrics::{auc, classification_metrics, ConfusionMatrix, MetricBlock};
use hybrid_select::pipeline::{make_folds, run_regularized_baseline};
use hybrid_select::regpath::{fit_enet, kkt_residual, lambda_max, select_features, soft_threshold, Family, PenaltySpec, SolverOptions};
use hybrid_select::rng::rng_from;
use hybrid_select::simgen::{
    cell_inputs, friedman1_classification, is_boosted_id, is_pure_linear_id, run_simulation_grid, summarize_rmse,
    FriedmanSpec, SimConfig,
};
use rand::Rng;
use support::*;

type Check<'a> = Box<dyn Fn() -> Verdict + 'a>;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn tight() -> SolverOptions {
    SolverOptions {
        tol: 1e-10,
        deviance_tol: 1e-12,
        ..SolverOptions::default()
    }
}

fn c1_metrics_golden() -> Verdict {
    // (name, TP, FN, FP, TN, accuracy, sensitivity, specificity, precision, F1, balanced accuracy)
    let rows: [(&str, [usize; 4], [f64; 6]); 3] = [
        ("ridge", [187, 97, 39, 216], [0.7477, 0.6585, 0.8471, 0.8274, 0.7330, 0.7528]),
        ("lasso", [187, 97, 34, 221], [0.7570, 0.6585, 0.8667, 0.8462, 0.7402, 0.7626]),
        ("elasticnet", [187, 97, 37, 218], [0.7514, 0.6585, 0.8549, 0.8348, 0.7362, 0.7567]),
    ];
    let names = ["accuracy", "sensitivity", "specificity", "precision", "f1", "balanced_accuracy"];
    let mut misses = Vec::new();
    for (model, [tp, fn_, fp, tn], want) in rows {
        let m: MetricBlock = classification_metrics(&ConfusionMatrix::new(tp, fn_, fp, tn)).unwrap();
        let got = [m.accuracy, m.recall, m.specificity, m.precision, m.f1, m.balanced_accuracy];
        for ((name, g), w) in names.iter().zip(got).zip(want) {
            let g = g.unwrap();
            if (g - w).abs() > 5e-5 {
                misses.push(format!("{model} {name} {g:.5} vs {w:.4}"));
            }
        }
    }
    if misses.is_empty() {
        verdict(true, "18/18 cells within 5e-5")
    } else {
        verdict(false, format!("{}/18 cells off: {}", misses.len(), misses.join("; ")))
    }
}

fn c2_auc_oracle() -> Verdict {
    let mut rng = rng_from(2);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(2..=200);
        let mut y: Vec<f64> = (0..n).map(|_| f64::from(u8::from(rng.random_bool(0.4)))).collect();
        y[0] = 1.0;
        y[1] = 0.0;
        // Coarse grid so ties are frequent.
        let s: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(0..15u8)) / 7.0).collect();
        worst = worst.max((auc(&y, &s).unwrap() - brute_force_auc(&y, &s)).abs());
    }
    verdict(worst <= 1e-12, format!("100 instances, max |AUC - pairwise| = {worst:.1e}"))
}

fn c3_elastic_net() -> Verdict {
    let mut rng = rng_from(3);
    let mut worst_kkt = 0.0f64;
    for i in 0..50u64 {
        let n = rng.random_range(10..=200);
        let p = rng.random_range(1..=50);
        let alpha = [0.1, 0.5, 0.9, 1.0][i as usize % 4];
        let d = gaussian_instance(n, p, 1000 + i);
        let lambda = rng.random_range(0.02..0.8) * lambda_max(&d, alpha).unwrap();
        let fit = fit_enet(&d, Family::Gaussian, PenaltySpec::new(alpha, lambda).unwrap(), &tight()).unwrap();
        worst_kkt = worst_kkt.max(kkt_residual(&fit, &d).unwrap());
    }
    for i in 0..20u64 {
        let n = rng.random_range(40..=200);
        let p = rng.random_range(1..=20);
        let alpha = [0.3, 0.5, 1.0][i as usize % 3];
        let d = binomial_instance(n, p, 2000 + i);
        let lambda = rng.random_range(0.05..0.8) * lambda_max(&d, alpha).unwrap();
        let fit = fit_enet(&d, Family::Binomial, PenaltySpec::new(alpha, lambda).unwrap(), &tight()).unwrap();
        worst_kkt = worst_kkt.max(kkt_residual(&fit, &d).unwrap());
    }

    let mut worst_closed = 0.0f64;
    for i in 0..50u64 {
        let n = rng.random_range(5..=200);
        let alpha: f64 = rng.random_range(0.0..=1.0);
        let lambda: f64 = rng.random_range(0.0..1.5);
        let x = standardize_1n(&normal_columns(n, 1, 3000 + i)).remove(0);
        let y = normal_columns(n, 1, 4000 + i).remove(0);
        let d = Dataset::from_columns(vec![("x", x.clone())], Some(("y", y.clone()))).unwrap();
        let fit = fit_enet(&d, Family::Gaussian, PenaltySpec::new(alpha, lambda).unwrap(), &tight()).unwrap();
        let ybar = y.iter().sum::<f64>() / n as f64;
        let xy = x.iter().zip(&y).map(|(a, b)| a * (b - ybar)).sum::<f64>() / n as f64;
        let expected = soft_threshold(xy, lambda * alpha) / (1.0 + lambda * (1.0 - alpha));
        worst_closed = worst_closed.max((fit.beta_std[0] - expected).abs());
    }

    let mut nonzero_at_max = 0;
    for i in 0..10u64 {
        for alpha in [0.5, 1.0] {
            for (family, d) in [
                (Family::Gaussian, gaussian_instance(60, 8, 5000 + i)),
                (Family::Binomial, binomial_instance(60, 8, 5000 + i)),
            ] {
                let lm = lambda_max(&d, alpha).unwrap();
                let fit = fit_enet(&d, family, PenaltySpec::new(alpha, lm).unwrap(), &tight()).unwrap();
                nonzero_at_max += fit.beta_std.iter().filter(|&&b| b != 0.0).count();
            }
        }
    }
    verdict(
        worst_kkt <= 1e-6 && worst_closed <= 1e-8 && nonzero_at_max == 0,
        format!(
            "max KKT {worst_kkt:.1e} over 50 gaussian + 20 binomial; univariate max err {worst_closed:.1e}; \
             {nonzero_at_max} nonzero coefficients at lambda_max"
        ),
    )
}

fn binary(n: usize, n_pos: usize) -> Dataset {
    let y: Vec<f64> = (0..n).map(|i| f64::from(u8::from(i < n_pos))).collect();
    Dataset::from_columns(vec![("x", vec![0.0; n])], Some(("y", y))).unwrap()
}

fn c4_stratification() -> Verdict {
    let mut rng = rng_from(4);
    let mut worst = 0.0f64;
    for i in 0..200u64 {
        let k = rng.random_range(2..=10);
        let n = rng.random_range(4 * k..=500);
        let n_pos = ((n as f64 * rng.random_range(0.05..0.95)).round() as usize).clamp(k, n - k);
        let d = binary(n, n_pos);
        let folds = kfold_stratified(&d, k, i).unwrap();
        let y = d.target().unwrap();
        for f in 0..k {
            let pos = folds.validation_rows(f).iter().filter(|&&r| y[r] == 1.0).count() as f64;
            worst = worst.max((pos - n_pos as f64 / k as f64).abs());
        }
    }
    let (_, test) = split_stratified(&binary(2697, 1420), 0.2, 2024).unwrap();
    let pos = test.target().unwrap().iter().filter(|&&v| v == 1.0).count();
    verdict(
        worst <= 1.0 && test.n_rows() == 539 && pos == 284,
        format!(
            "200 draws, max |fold positives - share| = {worst:.3}; 2697 rows -> test {} ({pos} positive)",
            test.n_rows()
        ),
    )
}

fn c5_boosting() -> Verdict {
    let mut increases = 0;
    for seed in 0..20u64 {
        let logistic = seed % 2 == 1;
        let d = if logistic { binomial_instance(150, 6, seed) } else { gaussian_instance(150, 6, seed) };
        let c = GbtConfig {
            n_trees: 30,
            max_depth: 2 + seed as usize % 4,
            learning_rate: if logistic { 0.3 } else { [0.1, 0.5, 1.0][seed as usize % 3] },
            growth: [Growth::DepthWise, Growth::LeafWise, Growth::Symmetric][seed as usize % 3],
            num_leaves: Some(8),
            loss: if logistic { Loss::Logistic } else { Loss::Squared },
            ..GbtConfig::default()
        };
        let m = fit_gbdt(&d, &c).unwrap();
        increases += m.training_loss.windows(2).filter(|w| w[1] > w[0] * (1.0 + 1e-12)).count();
    }

    let four = Dataset::from_columns(vec![("x", vec![1.0, 2.0, 3.0, 4.0])], Some(("y", vec![0.0, 0.0, 1.0, 1.0]))).unwrap();
    let stump = GbtConfig {
        n_trees: 1,
        max_depth: 1,
        learning_rate: 1.0,
        l2_leaf_reg: 0.0,
        ..GbtConfig::default()
    };
    let stump_ok = fit_gbdt(&four, &stump).unwrap().predict(&four).unwrap() == vec![0.0, 0.0, 1.0, 1.0];

    let mut identical = true;
    for seed in 0..6u64 {
        let d = binomial_instance(120, 5, 70 + seed);
        let warped = with_names(
            columns_of(&d).into_iter().map(|c| c.into_iter().map(|v| v.exp() + 2.0 * v).collect()).collect(),
            d.target().unwrap().to_vec(),
        );
        let c = GbtConfig {
            n_trees: 20,
            max_depth: 3,
            loss: Loss::Logistic,
            growth: [Growth::DepthWise, Growth::LeafWise, Growth::Symmetric][seed as usize % 3],
            num_leaves: Some(6),
            ..GbtConfig::default()
        };
        let a = fit_gbdt(&d, &c).unwrap().predict(&d).unwrap();
        let b = fit_gbdt(&warped, &c).unwrap().predict(&warped).unwrap();
        identical &= a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits());
    }
    verdict(
        increases == 0 && stump_ok && identical,
        format!(
            "{increases} loss increases over 20 fits; stump [0,0,1,1]: {stump_ok}; monotone transform bit-identical: {identical}"
        ),
    )
}

fn c6_simulation_ranking() -> Verdict {
    let cfg = SimConfig {
        ns: vec![1000],
        ps: vec![10],
        replicates: 30,
        ..SimConfig::default()
    };
    let records = run_simulation_grid(&cfg).unwrap();
    let summary = summarize_rmse(&records).unwrap();
    let failed: usize = summary.iter().map(|s| s.failed).sum();
    let linear: Vec<_> = summary.iter().filter(|s| is_pure_linear_id(&s.model_id)).collect();
    let boosted: Vec<_> = summary.iter().filter(|s| is_boosted_id(&s.model_id)).collect();
    let best_linear = linear.iter().map(|s| s.mean).fold(f64::INFINITY, f64::min);
    let worst_linear = linear.iter().map(|s| s.mean).fold(f64::NEG_INFINITY, f64::max);
    let best_boosted = boosted.iter().map(|s| s.mean).fold(f64::INFINITY, f64::min);
    let worst_boosted = boosted.iter().map(|s| s.mean).fold(f64::NEG_INFINITY, f64::max);
    let gap = best_linear - worst_boosted;
    verdict(
        failed == 0
            && linear.len() == 3
            && boosted.len() == 16
            && gap >= 0.3
            && best_linear >= 2.3
            && worst_linear <= 3.1
            && best_boosted >= 1.2
            && worst_boosted <= 2.3,
        format!(
            "linear means [{best_linear:.3}, {worst_linear:.3}], boosted means [{best_boosted:.3}, {worst_boosted:.3}], \
             gap {gap:.3}, {failed} failed records"
        ),
    )
}

fn c7_selection_recovery() -> Verdict {
    let cfg = SimConfig::default();
    let reps = 30;
    let mut x4x5 = 0;
    let mut true_kept = 0usize;
    let mut noise_dropped = 0.0;
    for rep in 0..reps {
        let (train, test, pc) = cell_inputs(&cfg, 500, 50, rep).unwrap();
        let folds = make_folds(&train, pc.k, pc.fold_seed()).unwrap();
        let run = run_regularized_baseline(&train, &test, 1.0, &folds, &pc).unwrap();
        let names = select_features(&run.fit, None).map(|s| s.names()).unwrap_or_default();
        let has = |v: &str| names.iter().any(|n| n == v);
        x4x5 += usize::from(has("x4") && has("x5"));
        true_kept += (1..=5).filter(|j| has(&format!("x{j}"))).count();
        let noise = (6..=50).filter(|j| has(&format!("x{j}"))).count();
        noise_dropped += 1.0 - noise as f64 / 45.0;
    }
    let mean_true = true_kept as f64 / reps as f64;
    let mean_dropped = noise_dropped / reps as f64;
    verdict(
        x4x5 == reps && mean_true >= 3.0 && mean_dropped >= 0.8,
        format!(
            "x4 and x5 kept in {x4x5}/{reps}; mean true kept {mean_true:.2}/5; mean noise discarded {mean_dropped:.3}"
        ),
    )
}

fn records_pass_audit(dir: &std::path::Path) -> (usize, usize) {
    let text = fs::read_to_string(dir.join("records.jsonl")).unwrap();
    let mut total = 0;
    let mut ok = 0;
    for line in text.lines() {
        let r: serde_json::Value = serde_json::from_str(line).unwrap();
        total += 1;
        let a = &r["leakage_audit"];
        ok += usize::from(a["disjoint_split"] == true && a["fitted_on_train_only"] == true);
    }
    (ok, total)
}

fn c8_determinism_and_leakage(tmp: &std::path::Path) -> Verdict {
    let data = classification_csv(tmp, 300, 8, 8);
    let cfg = small_config(tmp, 2, 30);
    let (cfg, data) = (cfg.to_str().unwrap(), data.to_str().unwrap());
    let mut snaps = Vec::new();
    for (name, workers) in [("m1", "1"), ("m1b", "1"), ("m8", "8")] {
        let out = tmp.join(name);
        let o = run(&[
            "matrix", "--config", cfg, "--input", data, "--target", "y", "--seed", "11", "--workers", workers, "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        snaps.push(snapshot(&out));
    }
    let matrix_same = snaps[0] == snaps[1] && snaps[0] == snaps[2];
    let (audit_ok, audit_total) = records_pass_audit(&tmp.join("m1"));

    let mut sims = Vec::new();
    for (name, workers) in [("s1", "1"), ("s1b", "1"), ("s8", "8")] {
        let out = tmp.join(name);
        let o = run(&[
            "simulate", "--config", cfg, "--seed", "12", "--workers", workers, "--ns", "100", "--ps", "6",
            "--replicates", "3", "--test-size", "100", "--out", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        sims.push(snapshot(&out));
    }
    let sim_same = sims[0] == sims[1] && sims[0] == sims[2];
    verdict(
        matrix_same && sim_same && audit_ok == audit_total,
        format!(
            "matrix identical across reruns and workers 1/8: {matrix_same} ({} files); simulate: {sim_same} ({} files); \
             leakage audit {audit_ok}/{audit_total}",
            snaps[0].len(),
            sims[0].len()
        ),
    )
}

fn c9_completeness(tmp: &std::path::Path) -> Verdict {
    let path = tmp.join("friedman500.csv");
    write_dataset(&friedman1_classification(&FriedmanSpec::new(500, 10, 9)).unwrap(), &path);
    let out = tmp.join("full");
    let started = Instant::now();
    let o = run(&["matrix", "--input", path.to_str().unwrap(), "--target", "y", "--seed", "9", "--out", out.to_str().unwrap()]);
    let secs = started.elapsed().as_secs_f64();
    if !o.status.success() {
        return verdict(false, format!("matrix exited {:?}: {}", o.status.code(), stderr(&o)));
    }
    let text = fs::read_to_string(out.join("records.jsonl")).unwrap();
    let (mut pure, mut full, mut hybrid, mut complete) = (0, 0, 0, 0);
    for line in text.lines() {
        let r: serde_json::Value = serde_json::from_str(line).unwrap();
        match r["selection"].as_str().unwrap() {
            "pure-regularized" => pure += 1,
            "none" => full += 1,
            _ => hybrid += 1,
        }
        let block = &r["evaluation"]["classification"]["metrics"];
        let keys = ["auc", "accuracy", "recall", "specificity", "precision", "f1", "balanced_accuracy"];
        complete += usize::from(r["error"].is_null() && keys.iter().all(|k| block[k].is_number()));
    }
    let (audit_ok, audit_total) = records_pass_audit(&out);
    verdict(
        (pure, full, hybrid) == (3, 5, 15) && complete == 23 && audit_ok == 23 && secs < 300.0,
        format!(
            "{pure} pure + {full} full + {hybrid} hybrid, {complete} with full metric blocks, leakage audit \
             {audit_ok}/{audit_total}, {secs:.0} s"
        ),
    )
}

#[test]
fn acceptance() {
    let tmp = tempfile::tempdir().unwrap();
    let criteria: Vec<(&str, Check)> = vec![
        ("metrics golden test", Box::new(c1_metrics_golden)),
        ("AUC oracle equivalence", Box::new(c2_auc_oracle)),
        ("elastic-net correctness", Box::new(c3_elastic_net)),
        ("stratification", Box::new(c4_stratification)),
        ("boosting invariants", Box::new(c5_boosting)),
        ("simulation ranking", Box::new(c6_simulation_ranking)),
        ("selection recovery", Box::new(c7_selection_recovery)),
        ("determinism and leakage", Box::new(|| c8_determinism_and_leakage(tmp.path()))),
        ("23-model completeness", Box::new(|| c9_completeness(tmp.path()))),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let v = check();
        println!(
            "criterion {}: {} {name}: {} [{:.1} s]",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            started.elapsed().as_secs_f64()
        );
        if !v.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
