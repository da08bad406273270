//! Random-search hyperparameter tuning with k-fold cross-validation.
//!
//! Trial `t` draws its configuration and its model seed from substreams keyed
//! by `t`, so trials can run on any number of workers in any order and still
//! give the same records.

use std::collections::BTreeSet;

use indexmap::IndexMap;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataframe::{Dataset, FoldAssignment};
use crate::error::{Error, Result};
use crate::gbt::Predictor;
use crate::metrics;
use crate::rng::{rng_from, substream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Int(i64),
    Real(f64),
}

impl ParamValue {
    pub fn as_f64(self) -> f64 {
        match self {
            ParamValue::Int(v) => v as f64,
            ParamValue::Real(v) => v,
        }
    }

    /// Integer view; reals are rounded.
    pub fn as_i64(self) -> i64 {
        match self {
            ParamValue::Int(v) => v,
            ParamValue::Real(v) => v.round() as i64,
        }
    }
}

impl std::fmt::Display for ParamValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParamValue::Int(v) => write!(f, "{v}"),
            ParamValue::Real(v) => write!(f, "{v}"),
        }
    }
}

pub type Hyperparams = IndexMap<String, ParamValue>;

/// Renders `a=1;b=0.5` in key order.
pub fn format_hyperparams(h: &Hyperparams) -> String {
    h.iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(";")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case")]
pub enum ParamDist {
    /// Integers in `[lo, hi]`, both ends included.
    IntUniform { lo: i64, hi: i64 },
    Uniform { lo: f64, hi: f64 },
    /// `exp(U(ln lo, ln hi))`.
    LogUniform { lo: f64, hi: f64 },
    /// `2^k` with `k` an integer in `[lo, hi]`.
    Pow2IntUniform { lo: i64, hi: i64 },
    Fixed { value: ParamValue },
}

impl ParamDist {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            ParamDist::IntUniform { lo, hi } => lo <= hi,
            ParamDist::Pow2IntUniform { lo, hi } => lo <= hi && (0..62).contains(&lo) && hi < 62,
            ParamDist::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && lo < hi,
            ParamDist::LogUniform { lo, hi } => lo > 0.0 && hi.is_finite() && lo < hi,
            ParamDist::Fixed { value } => value.as_f64().is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid distribution {self:?}")))
        }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> ParamValue {
        match *self {
            ParamDist::IntUniform { lo, hi } => ParamValue::Int(rng.random_range(lo..=hi)),
            ParamDist::Uniform { lo, hi } => ParamValue::Real(rng.random_range(lo..hi)),
            ParamDist::LogUniform { lo, hi } => {
                ParamValue::Real(rng.random_range(lo.ln()..hi.ln()).exp().clamp(lo, hi))
            }
            ParamDist::Pow2IntUniform { lo, hi } => ParamValue::Int(1i64 << rng.random_range(lo..=hi)),
            ParamDist::Fixed { value } => value,
        }
    }
}

/// Named parameter distributions, sampled in insertion order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SearchSpace {
    pub params: IndexMap<String, ParamDist>,
}

impl SearchSpace {
    pub fn with(mut self, name: &str, dist: ParamDist) -> Self {
        self.params.insert(name.to_string(), dist);
        self
    }

    /// Replace or add every distribution in `overrides`.
    pub fn merged(&self, overrides: &SearchSpace) -> SearchSpace {
        let mut out = self.clone();
        for (k, v) in &overrides.params {
            out.params.insert(k.clone(), *v);
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        self.params.values().try_for_each(ParamDist::validate)
    }
}

/// One independent draw per parameter.
pub fn sample_config(space: &SearchSpace, rng: &mut ChaCha8Rng) -> Hyperparams {
    space
        .params
        .iter()
        .map(|(k, d)| (k.clone(), d.sample(rng)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TuneMetric {
    Auc,
    Rmse,
}

impl TuneMetric {
    pub fn maximize(self) -> bool {
        matches!(self, TuneMetric::Auc)
    }

    pub fn score(self, labels: &[f64], predictions: &[f64]) -> Result<f64> {
        match self {
            TuneMetric::Auc => metrics::auc(labels, predictions),
            TuneMetric::Rmse => metrics::rmse(labels, predictions),
        }
    }

    pub fn better(self, a: f64, b: f64) -> bool {
        if self.maximize() {
            a > b
        } else {
            a < b
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub config: Hyperparams,
    pub per_fold_metric: Vec<f64>,
    pub mean_metric: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedTrial {
    pub trial: usize,
    pub config: Hyperparams,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub metric: TuneMetric,
    pub best_trial: usize,
    pub best_config: Hyperparams,
    pub best_seed: u64,
    pub trials: Vec<TrialRecord>,
    pub failed: Vec<FailedTrial>,
    /// Row ids of every row any CV fit or score touched.
    #[serde(skip)]
    pub rows_seen: BTreeSet<usize>,
}

impl SearchResult {
    pub fn best(&self) -> &TrialRecord {
        self.trials
            .iter()
            .find(|t| t.trial == self.best_trial)
            .expect("best trial is among the records")
    }
}

/// Seed for trial `t` of a search seeded with `seed`: `(config_seed, model_seed)`.
pub fn trial_seeds(seed: u64, t: usize) -> (u64, u64) {
    (substream(seed, &[t as u64, 0]), substream(seed, &[t as u64, 1]))
}

/// Sample `n_trials` configurations and score each by cross-validation on
/// `train`. `fit` receives the configuration, the fold's training rows and a
/// model seed. The best mean wins; ties go to the earliest trial. A trial
/// whose fit or metric fails on any fold is dropped and logged.
pub fn random_search<M, F>(
    train: &Dataset,
    space: &SearchSpace,
    n_trials: usize,
    folds: &FoldAssignment,
    metric: TuneMetric,
    seed: u64,
    fit: F,
) -> Result<SearchResult>
where
    M: Predictor,
    F: Fn(&Hyperparams, &Dataset, u64) -> Result<M> + Sync,
{
    if n_trials == 0 {
        return Err(Error::Config("n_trials must be at least 1".into()));
    }
    space.validate()?;
    if folds.fold_of_row.len() != train.n_rows() {
        return Err(Error::Input("fold assignment does not match the training rows".into()));
    }
    let fold_data: Vec<(Dataset, Dataset)> = (0..folds.k)
        .map(|f| {
            (
                train.select_rows(&folds.training_rows(f)),
                train.select_rows(&folds.validation_rows(f)),
            )
        })
        .collect();
    let mut rows_seen = BTreeSet::new();
    for (a, b) in &fold_data {
        rows_seen.extend(a.row_ids().iter().copied());
        rows_seen.extend(b.row_ids().iter().copied());
    }

    let outcomes: Vec<std::result::Result<TrialRecord, FailedTrial>> = (0..n_trials)
        .into_par_iter()
        .map(|t| {
            let (config_seed, model_seed) = trial_seeds(seed, t);
            let config = sample_config(space, &mut rng_from(config_seed));
            let scored: Result<Vec<f64>> = fold_data
                .iter()
                .map(|(tr, va)| {
                    let model = fit(&config, tr, model_seed)?;
                    metric.score(va.require_target()?, &model.predict(va)?)
                })
                .collect();
            match scored {
                Ok(per_fold_metric) => {
                    let mean_metric = per_fold_metric.iter().sum::<f64>() / per_fold_metric.len() as f64;
                    Ok(TrialRecord {
                        trial: t,
                        seed: model_seed,
                        config,
                        per_fold_metric,
                        mean_metric,
                    })
                }
                Err(e) => Err(FailedTrial {
                    trial: t,
                    config,
                    reason: e.to_string(),
                }),
            }
        })
        .collect();

    let mut trials = Vec::new();
    let mut failed = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => trials.push(r),
            Err(f) => {
                log::warn!("trial {} discarded: {}", f.trial, f.reason);
                failed.push(f);
            }
        }
    }
    let mut best: Option<&TrialRecord> = None;
    for r in &trials {
        if r.mean_metric.is_finite() && best.is_none_or(|b| metric.better(r.mean_metric, b.mean_metric)) {
            best = Some(r);
        }
    }
    let best = best.ok_or_else(|| {
        Error::Search(format!(
            "all {n_trials} trials failed; first reason: {}",
            failed.first().map_or("non-finite metric", |f| f.reason.as_str())
        ))
    })?;
    let (best_trial, best_config, best_seed) = (best.trial, best.config.clone(), best.seed);
    Ok(SearchResult {
        metric,
        best_trial,
        best_config,
        best_seed,
        trials,
        failed,
        rows_seen,
    })
}
