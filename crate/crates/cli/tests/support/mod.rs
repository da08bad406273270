//! Helpers for driving the binary in integration tests.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hybrid_select::dataframe::Dataset;
use hybrid_select::simgen::{friedman1_classification, FriedmanSpec};

pub fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hybrid-select"));
    c.env_remove("HYBRID_SELECT_OUT");
    c
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn write_dataset(d: &Dataset, path: &Path) {
    d.save_csv(path).unwrap();
}

/// A 0/1 Friedman table with target column `y`.
pub fn classification_csv(dir: &Path, n: usize, p: usize, seed: u64) -> PathBuf {
    let path = dir.join("data.csv");
    write_dataset(&friedman1_classification(&FriedmanSpec::new(n, p, seed)).unwrap(), &path);
    path
}

/// A run configuration with a small tuning budget, written to `dir`.
pub fn small_config(dir: &Path, n_trials: usize, max_trees: i64) -> PathBuf {
    let trees = serde_json::json!({"dist": "int_uniform", "lo": 5, "hi": max_trees});
    let depth = serde_json::json!({"dist": "int_uniform", "lo": 2, "hi": 3});
    let mut overrides = serde_json::Map::new();
    for l in ["rf", "xgb-like", "lgbm-like", "cat-like", "gbm-like"] {
        let mut space = serde_json::json!({"n_trees": trees});
        if l != "rf" {
            space["max_depth"] = depth.clone();
        }
        overrides.insert(l.into(), space);
    }
    let cfg = serde_json::json!({
        "matrix": {"k": 3, "n_trials": n_trials, "space_overrides": overrides},
        "simulation": {"pipeline": {"k": 3, "n_trials": n_trials, "space_overrides": overrides}},
    });
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path
}

/// File name to contents for every file in `dir` except wall-clock timings.
pub fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "timings.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect()
}
