//! The five learners: parameter spaces and hyperparameter-to-config mapping.

use serde::{Deserialize, Serialize};

use super::{
    fit_gbdt, fit_random_forest, ForestConfig, ForestModel, GbtConfig, GbtModel, Growth,
    HessianMode, Predictor, Task, Tree,
};
use crate::dataframe::Dataset;
use crate::error::{Error, Result};
use crate::tuner::{Hyperparams, ParamDist, ParamValue, SearchSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Learner {
    #[serde(rename = "rf")]
    Rf,
    #[serde(rename = "xgb-like")]
    XgbLike,
    #[serde(rename = "lgbm-like")]
    LgbmLike,
    #[serde(rename = "cat-like")]
    CatLike,
    #[serde(rename = "gbm-like")]
    GbmLike,
}

impl Learner {
    pub const ALL: [Learner; 5] = [
        Learner::Rf,
        Learner::XgbLike,
        Learner::LgbmLike,
        Learner::CatLike,
        Learner::GbmLike,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Learner::Rf => "rf",
            Learner::XgbLike => "xgb-like",
            Learner::LgbmLike => "lgbm-like",
            Learner::CatLike => "cat-like",
            Learner::GbmLike => "gbm-like",
        }
    }

    pub fn parse(s: &str) -> Option<Learner> {
        Learner::ALL.into_iter().find(|l| l.name() == s)
    }

    pub fn is_boosted(self) -> bool {
        self != Learner::Rf
    }

    /// Default random-search space for `p` input features.
    pub fn default_space(self, p: usize) -> SearchSpace {
        let trees = ParamDist::IntUniform { lo: 100, hi: 1000 };
        let boosted = SearchSpace::default()
            .with("n_trees", trees)
            .with("max_depth", ParamDist::IntUniform { lo: 3, hi: 15 })
            .with("learning_rate", ParamDist::LogUniform { lo: 0.001, hi: 0.2 });
        match self {
            Learner::Rf => SearchSpace::default()
                .with("n_trees", trees)
                .with("mtry", ParamDist::IntUniform { lo: 1, hi: p.max(1) as i64 }),
            Learner::XgbLike => boosted.with("l2_leaf_reg", ParamDist::Fixed { value: ParamValue::Real(1.0) }),
            Learner::LgbmLike => boosted.with("num_leaves", ParamDist::Pow2IntUniform { lo: 2, hi: 7 }),
            Learner::CatLike => boosted.with("l2_leaf_reg", ParamDist::Uniform { lo: 1.0, hi: 10.0 }),
            Learner::GbmLike => boosted,
        }
    }

    /// Map sampled hyperparameters onto an engine configuration. Parameters
    /// absent from `h` take the preset's defaults; unknown names are errors.
    pub fn config(self, h: &Hyperparams, task: Task, p: usize, seed: u64) -> Result<LearnerConfig> {
        let allowed: &[&str] = match self {
            Learner::Rf => &["n_trees", "mtry", "min_samples_leaf", "max_depth"],
            _ => &[
                "n_trees",
                "max_depth",
                "learning_rate",
                "l2_leaf_reg",
                "num_leaves",
                "min_samples_leaf",
            ],
        };
        if let Some(k) = h.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::Config(format!("{} has no hyperparameter `{k}`", self.name())));
        }
        let int = |k: &str, default: usize| -> Result<usize> {
            match h.get(k) {
                None => Ok(default),
                Some(v) if v.as_i64() >= 0 => Ok(v.as_i64() as usize),
                Some(v) => Err(Error::Config(format!("{k} = {v} must be non-negative"))),
            }
        };
        let real = |k: &str, default: f64| h.get(k).map_or(default, |v| v.as_f64());

        if self == Learner::Rf {
            let min_leaf_default = match task {
                Task::Classification => 1,
                Task::Regression => 5,
            };
            let max_depth = match h.get("max_depth") {
                None => None,
                Some(_) => Some(int("max_depth", 0)?),
            };
            return Ok(LearnerConfig::Forest(ForestConfig {
                n_trees: int("n_trees", 500)?,
                mtry: int("mtry", ((p as f64).sqrt().floor() as usize).max(1))?,
                min_samples_leaf: int("min_samples_leaf", min_leaf_default)?,
                max_depth,
                bootstrap: true,
                task,
                seed,
            }));
        }
        let base = GbtConfig {
            n_trees: int("n_trees", 100)?,
            max_depth: int("max_depth", 6)?,
            learning_rate: real("learning_rate", 0.1),
            loss: task.loss(),
            seed,
            ..GbtConfig::default()
        };
        let c = match self {
            Learner::XgbLike => GbtConfig {
                growth: Growth::DepthWise,
                l2_leaf_reg: real("l2_leaf_reg", 1.0),
                min_samples_leaf: int("min_samples_leaf", 1)?,
                ..base
            },
            Learner::LgbmLike => GbtConfig {
                growth: Growth::LeafWise,
                num_leaves: Some(int("num_leaves", 31)?),
                l2_leaf_reg: real("l2_leaf_reg", 0.0),
                min_samples_leaf: int("min_samples_leaf", 20)?,
                ..base
            },
            Learner::CatLike => GbtConfig {
                growth: Growth::Symmetric,
                l2_leaf_reg: real("l2_leaf_reg", 3.0),
                min_samples_leaf: int("min_samples_leaf", 1)?,
                ..base
            },
            Learner::GbmLike => GbtConfig {
                growth: Growth::DepthWise,
                hessian: HessianMode::Unit,
                l2_leaf_reg: real("l2_leaf_reg", 0.0),
                min_samples_leaf: int("min_samples_leaf", 10)?,
                ..base
            },
            Learner::Rf => unreachable!(),
        };
        Ok(LearnerConfig::Gbt(c))
    }

    pub fn fit(self, h: &Hyperparams, train: &Dataset, task: Task, seed: u64) -> Result<FittedModel> {
        match self.config(h, task, train.n_features(), seed)? {
            LearnerConfig::Gbt(c) => Ok(FittedModel::Gbt(fit_gbdt(train, &c)?)),
            LearnerConfig::Forest(c) => Ok(FittedModel::Forest(fit_random_forest(train, &c)?)),
        }
    }
}

impl std::fmt::Display for Learner {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerConfig {
    Gbt(GbtConfig),
    Forest(ForestConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FittedModel {
    Gbt(GbtModel),
    Forest(ForestModel),
}

impl FittedModel {
    pub fn trees(&self) -> &[Tree] {
        match self {
            FittedModel::Gbt(m) => &m.trees,
            FittedModel::Forest(m) => &m.trees,
        }
    }
}

impl Predictor for FittedModel {
    fn feature_names(&self) -> &[String] {
        match self {
            FittedModel::Gbt(m) => &m.feature_names,
            FittedModel::Forest(m) => &m.feature_names,
        }
    }

    fn predict(&self, d: &Dataset) -> Result<Vec<f64>> {
        match self {
            FittedModel::Gbt(m) => m.predict(d),
            FittedModel::Forest(m) => m.predict(d),
        }
    }
}
