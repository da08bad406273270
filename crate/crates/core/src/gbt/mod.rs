//! Tree ensembles: Newton-boosted decision trees and a bootstrap random
//! forest, both grown by one exact-greedy engine.
//!
//! A split's gain is `GL²/(HL+λ) + GR²/(HR+λ) − G²/(H+λ)` over gradient and
//! hessian sums, and a leaf's weight is `−G/(H+λ)`. With squared loss,
//! unit hessians and `λ = 0` the gain is the reduction in squared error, which
//! is also what the forest maximizes (for 0/1 targets it is half the Gini
//! decrease, so both pick the same splits).

mod grow;
mod importance;
mod preset;

pub use importance::{importance_gain, importance_permutation, PermutationMetric, TreeEnsemble};
pub use preset::{FittedModel, Learner, LearnerConfig};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataframe::Dataset;
use crate::error::{Error, Result};
use crate::rng::{rng_from, substream};
use grow::{grow_tree, GrowInput, GrowParams, Policy, Presorted};

/// Hessian floor for logistic loss.
pub const HESSIAN_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
    pub left: usize,
    pub right: usize,
}

/// Every node carries `value = −G/(H+λ)` for its rows; only leaves' values
/// reach predictions. Rows with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub value: f64,
    pub split: Option<Split>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict_row(&self, row: impl Fn(usize) -> f64) -> f64 {
        let mut k = 0;
        loop {
            let node = &self.nodes[k];
            match &node.split {
                None => return node.value,
                Some(s) => k = if row(s.feature) <= s.threshold { s.left } else { s.right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &Tree, k: usize) -> usize {
            match &t.nodes[k].split {
                None => 0,
                Some(s) => 1 + walk(t, s.left).max(walk(t, s.right)),
            }
        }
        walk(self, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.split.is_none()).count()
    }

    fn predict_columns(&self, cols: &[&[f64]], out: &mut [f64], scale: f64) {
        for (i, o) in out.iter_mut().enumerate() {
            *o += scale * self.predict_row(|f| cols[f][i]);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    Logistic,
    Squared,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Growth {
    DepthWise,
    LeafWise,
    /// Every node of a level shares one split.
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HessianMode {
    /// Second-order leaf weights from the loss curvature.
    Newton,
    /// First-order weights: every row counts 1 in H.
    Unit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub l2_leaf_reg: f64,
    pub growth: Growth,
    /// Leaf cap for leaf-wise growth.
    pub num_leaves: Option<usize>,
    pub min_samples_leaf: usize,
    pub loss: Loss,
    pub hessian: HessianMode,
    pub seed: u64,
}

impl Default for GbtConfig {
    fn default() -> Self {
        GbtConfig {
            n_trees: 100,
            max_depth: 6,
            learning_rate: 0.1,
            l2_leaf_reg: 1.0,
            growth: Growth::DepthWise,
            num_leaves: None,
            min_samples_leaf: 1,
            loss: Loss::Squared,
            hessian: HessianMode::Newton,
            seed: 0,
        }
    }
}

impl GbtConfig {
    /// `n_trees = 0` and `learning_rate = 0` are accepted and give a model
    /// that predicts the base score.
    pub fn validate(&self) -> Result<()> {
        if self.max_depth == 0 {
            return Err(Error::Config("max_depth must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.learning_rate) {
            return Err(Error::Config(format!("learning_rate {} outside [0, 1]", self.learning_rate)));
        }
        if !(self.l2_leaf_reg >= 0.0 && self.l2_leaf_reg.is_finite()) {
            return Err(Error::Config("l2_leaf_reg must be finite and >= 0".into()));
        }
        if self.growth == Growth::LeafWise && self.num_leaves.is_none_or(|l| l < 2) {
            return Err(Error::Config("leaf-wise growth needs num_leaves >= 2".into()));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::Config("min_samples_leaf must be at least 1".into()));
        }
        Ok(())
    }
}

pub trait Predictor {
    fn feature_names(&self) -> &[String];

    /// Scores for `d`: probabilities for classifiers, values for regressors.
    fn predict(&self, d: &Dataset) -> Result<Vec<f64>>;
}

fn columns_for<'a>(names: &[String], d: &'a Dataset) -> Result<Vec<&'a [f64]>> {
    names
        .iter()
        .map(|n| {
            d.column(n)
                .ok_or_else(|| Error::Schema(format!("missing column `{n}`")))
        })
        .collect()
}

fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub base_score: f64,
    pub trees: Vec<Tree>,
    pub config: GbtConfig,
    pub feature_names: Vec<String>,
    /// Set when the target had a single class and only the base score was fit.
    pub degenerate: bool,
    /// Training loss before the first round and after each round
    /// (sum of squared errors or logistic deviance).
    pub training_loss: Vec<f64>,
}

impl GbtModel {
    /// Raw additive score `base + η Σ tree(x)`.
    pub fn raw_scores(&self, d: &Dataset) -> Result<Vec<f64>> {
        let cols = columns_for(&self.feature_names, d)?;
        let mut out = vec![self.base_score; d.n_rows()];
        for t in &self.trees {
            t.predict_columns(&cols, &mut out, self.config.learning_rate);
        }
        Ok(out)
    }
}

impl Predictor for GbtModel {
    fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    fn predict(&self, d: &Dataset) -> Result<Vec<f64>> {
        let raw = self.raw_scores(d)?;
        Ok(match self.config.loss {
            Loss::Squared => raw,
            Loss::Logistic => raw.into_iter().map(sigmoid).collect(),
        })
    }
}

fn training_loss(loss: Loss, y: &[f64], f: &[f64]) -> f64 {
    match loss {
        Loss::Squared => y.iter().zip(f).map(|(a, b)| (a - b) * (a - b)).sum(),
        Loss::Logistic => {
            2.0 * y
                .iter()
                .zip(f)
                .map(|(&yi, &fi)| {
                    let softplus = if fi > 0.0 { fi + (-fi).exp().ln_1p() } else { fi.exp().ln_1p() };
                    softplus - yi * fi
                })
                .sum::<f64>()
        }
    }
}

fn check_training(train: &Dataset) -> Result<&[f64]> {
    let y = train.require_target()?;
    if train.n_rows() == 0 {
        return Err(Error::Input("cannot fit a model on zero rows".into()));
    }
    if train.n_features() == 0 {
        return Err(Error::Input("cannot fit a model without features".into()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("target contains non-finite values".into()));
    }
    Ok(y)
}

/// Boosted trees; rounds are sequential and fully deterministic.
pub fn fit_gbdt(train: &Dataset, c: &GbtConfig) -> Result<GbtModel> {
    c.validate()?;
    let y = check_training(train)?;
    if c.loss == Loss::Logistic && !train.is_binary_target() {
        return Err(Error::Input("logistic loss needs a 0/1 target".into()));
    }
    let n = y.len();
    let mean = y.iter().sum::<f64>() / n as f64;
    let (base_score, degenerate) = match c.loss {
        Loss::Squared => {
            // Exact for constant targets, where the mean can round.
            let constant = y.iter().all(|&v| v == y[0]);
            (if constant { y[0] } else { mean }, false)
        }
        Loss::Logistic if mean == 0.0 || mean == 1.0 => {
            log::warn!("single-class target: boosting fits the base score only");
            let p = mean.clamp(1e-5, 1.0 - 1e-5);
            ((p / (1.0 - p)).ln(), true)
        }
        Loss::Logistic => ((mean / (1.0 - mean)).ln(), false),
    };
    let names = train.feature_names();
    let mut model = GbtModel {
        base_score,
        trees: Vec::new(),
        config: c.clone(),
        feature_names: names,
        degenerate,
        training_loss: Vec::new(),
    };
    let mut f = vec![base_score; n];
    model.training_loss.push(training_loss(c.loss, y, &f));
    if degenerate {
        return Ok(model);
    }

    let x = train.feature_slices();
    let pre = Presorted::new(&x);
    let count = vec![1u32; n];
    let params = GrowParams {
        policy: match c.growth {
            Growth::DepthWise => Policy::DepthWise,
            Growth::LeafWise => Policy::LeafWise,
            Growth::Symmetric => Policy::Symmetric,
        },
        max_depth: Some(c.max_depth),
        max_leaves: if c.growth == Growth::LeafWise { c.num_leaves } else { None },
        min_samples_leaf: c.min_samples_leaf,
        l2: c.l2_leaf_reg,
        mtry: None,
    };
    let mut g = vec![0.0; n];
    let mut h = vec![1.0; n];
    for _ in 0..c.n_trees {
        for i in 0..n {
            match c.loss {
                Loss::Squared => g[i] = f[i] - y[i],
                Loss::Logistic => {
                    let p = sigmoid(f[i]);
                    g[i] = p - y[i];
                    if c.hessian == HessianMode::Newton {
                        h[i] = (p * (1.0 - p)).max(HESSIAN_FLOOR);
                    }
                }
            }
        }
        let tree = grow_tree(
            &GrowInput {
                x: &x,
                pre: &pre,
                g: &g,
                h: &h,
                count: &count,
            },
            &params,
            None,
        );
        tree.predict_columns(&x, &mut f, c.learning_rate);
        model.training_loss.push(training_loss(c.loss, y, &f));
        model.trees.push(tree);
    }
    Ok(model)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Classification,
    Regression,
}

impl Task {
    pub fn loss(self) -> Loss {
        match self {
            Task::Classification => Loss::Logistic,
            Task::Regression => Loss::Squared,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub mtry: usize,
    pub min_samples_leaf: usize,
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
    pub task: Task,
    pub seed: u64,
}

impl ForestConfig {
    pub fn validate(&self, p: usize) -> Result<()> {
        if self.mtry == 0 || self.mtry > p {
            return Err(Error::Config(format!("mtry must lie in [1, {p}], got {}", self.mtry)));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::Config("min_samples_leaf must be at least 1".into()));
        }
        if self.max_depth == Some(0) {
            return Err(Error::Config("max_depth must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
    pub config: ForestConfig,
    pub feature_names: Vec<String>,
    /// Per-tree bootstrap multiplicity of every training row.
    #[serde(skip)]
    pub bootstrap_counts: Vec<Vec<u32>>,
}

impl Predictor for ForestModel {
    fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Mean over trees of the leaf value: the positive-class share of the
    /// leaf for classification, the mean target for regression.
    fn predict(&self, d: &Dataset) -> Result<Vec<f64>> {
        let cols = columns_for(&self.feature_names, d)?;
        let mut out = vec![0.0; d.n_rows()];
        if self.trees.is_empty() {
            return Ok(out);
        }
        let scale = 1.0 / self.trees.len() as f64;
        for t in &self.trees {
            t.predict_columns(&cols, &mut out, 1.0);
        }
        out.iter_mut().for_each(|v| *v *= scale);
        Ok(out)
    }
}

/// Bagged CART trees with per-node feature sampling. Trees are grown in
/// parallel; each draws from its own seed substream.
pub fn fit_random_forest(train: &Dataset, c: &ForestConfig) -> Result<ForestModel> {
    let y = check_training(train)?;
    c.validate(train.n_features())?;
    if c.task == Task::Classification && !train.is_binary_target() {
        return Err(Error::Input("forest classification needs a 0/1 target".into()));
    }
    let n = y.len();
    let x = train.feature_slices();
    let pre = Presorted::new(&x);
    let params = GrowParams {
        policy: Policy::DepthWise,
        max_depth: c.max_depth,
        max_leaves: None,
        min_samples_leaf: c.min_samples_leaf,
        l2: 0.0,
        mtry: Some(c.mtry),
    };
    let grown: Vec<(Tree, Vec<u32>)> = (0..c.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_from(substream(c.seed, &[t as u64]));
            let mut count = vec![0u32; n];
            if c.bootstrap {
                for _ in 0..n {
                    count[rng.random_range(0..n)] += 1;
                }
            } else {
                count.fill(1);
            }
            // g = −y·count and h = count make each leaf the weighted mean of y.
            let g: Vec<f64> = y.iter().zip(&count).map(|(v, &k)| -v * f64::from(k)).collect();
            let h: Vec<f64> = count.iter().map(|&k| f64::from(k)).collect();
            let tree = grow_tree(
                &GrowInput {
                    x: &x,
                    pre: &pre,
                    g: &g,
                    h: &h,
                    count: &count,
                },
                &params,
                Some(&mut rng),
            );
            (tree, count)
        })
        .collect();
    let (trees, bootstrap_counts) = grown.into_iter().unzip();
    Ok(ForestModel {
        trees,
        config: c.clone(),
        feature_names: train.feature_names(),
        bootstrap_counts,
    })
}
