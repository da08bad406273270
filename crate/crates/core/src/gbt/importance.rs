//! Gain and permutation feature importance.

use indexmap::IndexMap;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{FittedModel, ForestModel, GbtModel, Predictor, Tree};
use crate::dataframe::Dataset;
use crate::error::Result;
use crate::metrics;
use crate::rng::{rng_from, substream};

pub trait TreeEnsemble {
    fn ensemble_trees(&self) -> &[Tree];
    fn ensemble_features(&self) -> &[String];
}

impl TreeEnsemble for GbtModel {
    fn ensemble_trees(&self) -> &[Tree] {
        &self.trees
    }
    fn ensemble_features(&self) -> &[String] {
        &self.feature_names
    }
}

impl TreeEnsemble for ForestModel {
    fn ensemble_trees(&self) -> &[Tree] {
        &self.trees
    }
    fn ensemble_features(&self) -> &[String] {
        &self.feature_names
    }
}

impl TreeEnsemble for FittedModel {
    fn ensemble_trees(&self) -> &[Tree] {
        self.trees()
    }
    fn ensemble_features(&self) -> &[String] {
        self.feature_names()
    }
}

/// Summed split gain per feature over every tree; unused features get 0.
pub fn importance_gain<M: TreeEnsemble>(model: &M) -> IndexMap<String, f64> {
    let names = model.ensemble_features();
    let mut totals = vec![0.0; names.len()];
    for t in model.ensemble_trees() {
        for s in t.nodes.iter().filter_map(|n| n.split.as_ref()) {
            totals[s.feature] += s.gain;
        }
    }
    names.iter().cloned().zip(totals).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PermutationMetric {
    /// Drop in AUC.
    Auc,
    /// Rise in RMSE.
    Rmse,
}

impl PermutationMetric {
    fn degradation(self, labels: &[f64], base: f64, scores: &[f64]) -> Result<f64> {
        Ok(match self {
            PermutationMetric::Auc => base - metrics::auc(labels, scores)?,
            PermutationMetric::Rmse => metrics::rmse(labels, scores)? - base,
        })
    }
}

/// Mean metric degradation over `n_repeats` shuffles of each feature column.
/// Shuffle `r` of feature `j` uses the substream `(seed, j, r)`, so runs with
/// more repeats extend rather than replace those with fewer.
pub fn importance_permutation<M: Predictor>(
    model: &M,
    d: &Dataset,
    metric: PermutationMetric,
    seed: u64,
    n_repeats: usize,
) -> Result<IndexMap<String, f64>> {
    let labels = d.require_target()?;
    let base_scores = model.predict(d)?;
    let base = match metric {
        PermutationMetric::Auc => metrics::auc(labels, &base_scores)?,
        PermutationMetric::Rmse => metrics::rmse(labels, &base_scores)?,
    };
    let mut out = IndexMap::new();
    for (j, name) in model.feature_names().iter().enumerate() {
        let original = d
            .column(name)
            .ok_or_else(|| crate::Error::Schema(format!("missing column `{name}`")))?;
        let mut total = 0.0;
        for r in 0..n_repeats {
            let mut shuffled = original.to_vec();
            shuffled.shuffle(&mut rng_from(substream(seed, &[j as u64, r as u64])));
            let permuted = d.with_feature(name, shuffled)?;
            total += metric.degradation(labels, base, &model.predict(&permuted)?)?;
        }
        out.insert(name.clone(), if n_repeats == 0 { 0.0 } else { total / n_repeats as f64 });
    }
    Ok(out)
}
