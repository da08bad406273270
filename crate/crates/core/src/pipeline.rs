//! End-to-end runs: penalized baselines, full-variable learners, and hybrids
//! that train a learner only on the features a penalized fit kept.
//!
//! Every stochastic step takes its seed from a substream keyed by what it is
//! for (folds, a learner's tuning), never by which selection fed it. A hybrid
//! whose selection keeps every feature therefore reproduces the full-variable
//! run exactly.

use std::collections::{BTreeSet, HashMap};
use std::time::Instant;

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataframe::{kfold_stratified, Dataset, FoldAssignment};
use crate::error::{Error, Result};
use crate::gbt::{FittedModel, Learner, Predictor, Task};
use crate::metrics::{self, ConfusionMatrix, MetricBlock};
use crate::regpath::{
    cv_fit, predict_glm, select_features, CvOptions, CvResult, FeatureSelection, Measure,
    RegularizedFit, SelectionMethod,
};
use crate::rng::{label_key, substream};
use crate::tuner::{random_search, Hyperparams, ParamValue, SearchResult, SearchSpace, TuneMetric};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SelectionLabel {
    #[serde(rename = "none")]
    None,
    #[serde(rename = "ridge")]
    Ridge,
    #[serde(rename = "lasso")]
    Lasso,
    #[serde(rename = "elasticnet")]
    ElasticNet,
    #[serde(rename = "pure-regularized")]
    PureRegularized,
}

impl SelectionLabel {
    pub fn name(self) -> &'static str {
        match self {
            SelectionLabel::None => "none",
            SelectionLabel::Ridge => "ridge",
            SelectionLabel::Lasso => "lasso",
            SelectionLabel::ElasticNet => "elasticnet",
            SelectionLabel::PureRegularized => "pure-regularized",
        }
    }
}

impl From<SelectionMethod> for SelectionLabel {
    fn from(m: SelectionMethod) -> Self {
        match m {
            SelectionMethod::Ridge => SelectionLabel::Ridge,
            SelectionMethod::Lasso => SelectionLabel::Lasso,
            SelectionMethod::ElasticNet => SelectionLabel::ElasticNet,
        }
    }
}

/// Test-split evaluation: a classification block or an RMSE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evaluation {
    Classification {
        metrics: MetricBlock,
        confusion: ConfusionMatrix,
    },
    Regression {
        rmse: f64,
    },
}

impl Evaluation {
    /// AUC for classification, RMSE for regression.
    pub fn headline(&self) -> Option<f64> {
        match self {
            Evaluation::Classification { metrics, .. } => metrics.auc,
            Evaluation::Regression { rmse } => Some(*rmse),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageAudit {
    /// No row id is in both the training and the test split.
    pub disjoint_split: bool,
    /// Every row touched during selection and tuning belongs to the training split.
    pub fitted_on_train_only: bool,
}

impl LeakageAudit {
    pub fn passed(&self) -> bool {
        self.disjoint_split && self.fitted_on_train_only
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub model_id: String,
    /// Learner name, or `glm` for a pure penalized model.
    pub learner: String,
    pub selection: SelectionLabel,
    pub n_selected: usize,
    pub selected: Vec<String>,
    pub hyperparams: Hyperparams,
    /// Best cross-validated mean (AUC or RMSE for learners, AUC or MSE for GLMs).
    pub cv_metric: Option<f64>,
    pub evaluation: Option<Evaluation>,
    pub leakage_audit: LeakageAudit,
    pub seed: u64,
    pub error: Option<String>,
    /// Kept out of serialized records so reruns are byte-identical.
    #[serde(skip)]
    pub wall_seconds: f64,
}

impl EvaluationRecord {
    pub fn is_ok(&self) -> bool {
        self.error.is_none() && self.evaluation.is_some()
    }
}

pub fn model_id(learner: Option<Learner>, selection: SelectionLabel, method: Option<SelectionMethod>) -> String {
    match (learner, selection) {
        (None, _) => method.map_or("glm", SelectionMethod::name).to_string(),
        (Some(l), SelectionLabel::None) => format!("{}/full", l.name()),
        (Some(l), s) => format!("{}/{}", l.name(), s.name()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// `None` infers classification from a 0/1 target.
    pub task: Option<Task>,
    pub seed: u64,
    pub k: usize,
    pub n_trials: usize,
    pub threshold: f64,
    pub elasticnet_alpha: f64,
    /// Features kept by ridge selection; `None` keeps 10.
    pub ridge_top_m: Option<usize>,
    pub learners: Vec<Learner>,
    pub selections: Vec<SelectionMethod>,
    pub include_pure: bool,
    pub include_full: bool,
    /// Per-learner replacements for entries of the default search space.
    pub space_overrides: IndexMap<Learner, SearchSpace>,
    pub cv: CvOptions,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            task: None,
            seed: 2024,
            k: 5,
            n_trials: 5,
            threshold: 0.5,
            elasticnet_alpha: 0.5,
            ridge_top_m: None,
            learners: Learner::ALL.to_vec(),
            selections: SelectionMethod::ALL.to_vec(),
            include_pure: true,
            include_full: true,
            space_overrides: IndexMap::new(),
            cv: CvOptions::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::Config("k must be at least 2".into()));
        }
        if self.n_trials == 0 {
            return Err(Error::Config("n_trials must be at least 1".into()));
        }
        if !(self.elasticnet_alpha > 0.0 && self.elasticnet_alpha < 1.0) {
            return Err(Error::Config("elasticnet_alpha must lie strictly between 0 and 1".into()));
        }
        for s in self.space_overrides.values() {
            s.validate()?;
        }
        Ok(())
    }

    pub fn alpha(&self, m: SelectionMethod) -> f64 {
        match m {
            SelectionMethod::Ridge => 0.0,
            SelectionMethod::Lasso => 1.0,
            SelectionMethod::ElasticNet => self.elasticnet_alpha,
        }
    }

    pub fn space(&self, learner: Learner, p: usize) -> SearchSpace {
        let base = learner.default_space(p);
        match self.space_overrides.get(&learner) {
            Some(o) => base.merged(o),
            None => base,
        }
    }

    pub fn task_for(&self, d: &Dataset) -> Task {
        self.task.unwrap_or(if d.is_binary_target() {
            Task::Classification
        } else {
            Task::Regression
        })
    }

    pub fn fold_seed(&self) -> u64 {
        substream(self.seed, &[label_key("folds")])
    }

    pub fn tuning_seed(&self, learner: Learner) -> u64 {
        substream(self.seed, &[label_key("tune"), label_key(learner.name())])
    }
}

/// Stratified folds for 0/1 targets, shuffled plain folds otherwise.
pub fn make_folds(train: &Dataset, k: usize, seed: u64) -> Result<FoldAssignment> {
    kfold_stratified(train, k, seed)
}

fn audit(train: &Dataset, test: &Dataset, touched: &BTreeSet<usize>) -> LeakageAudit {
    let train_ids: BTreeSet<usize> = train.row_ids().iter().copied().collect();
    LeakageAudit {
        disjoint_split: test.row_ids().iter().all(|r| !train_ids.contains(r)),
        fitted_on_train_only: touched.iter().all(|r| train_ids.contains(r)),
    }
}

fn evaluate(task: Task, test: &Dataset, scores: &[f64], threshold: f64) -> Result<Evaluation> {
    let y = test.require_target()?;
    Ok(match task {
        Task::Classification => Evaluation::Classification {
            metrics: metrics::evaluate_scores(y, scores, threshold)?,
            confusion: metrics::confusion_at(y, scores, threshold)?,
        },
        Task::Regression => Evaluation::Regression {
            rmse: metrics::rmse(y, scores)?,
        },
    })
}

/// Columns of `d` named in `names`, in `d`'s own column order.
pub fn project(d: &Dataset, names: &[String]) -> Result<Dataset> {
    let wanted: BTreeSet<&str> = names.iter().map(String::as_str).collect();
    for n in &wanted {
        if d.column(n).is_none() {
            return Err(Error::Schema(format!("missing column `{n}`")));
        }
    }
    let keep: Vec<String> = d
        .feature_names()
        .into_iter()
        .filter(|n| wanted.contains(n.as_str()))
        .collect();
    d.select_features(&keep)
}

/// A fitted penalized baseline together with its CV curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlmRun {
    pub method: SelectionMethod,
    pub cv: CvResult,
    pub fit: RegularizedFit,
    pub record: EvaluationRecord,
    pub test_scores: Vec<f64>,
}

/// Cross-validate lambda on `train`, refit there, score the test split.
pub fn run_regularized_baseline(
    train: &Dataset,
    test: &Dataset,
    alpha: f64,
    folds: &FoldAssignment,
    cfg: &PipelineConfig,
) -> Result<GlmRun> {
    let started = Instant::now();
    let task = cfg.task_for(train);
    let measure = match task {
        Task::Classification => Measure::Auc,
        Task::Regression => Measure::Mse,
    };
    let (cv, fit) = cv_fit(train, alpha, folds, measure, &cfg.cv)?;
    let scores = predict_glm(&fit, test)?;
    let method = SelectionMethod::from_alpha(alpha);
    let selected: Vec<String> = fit
        .beta
        .iter()
        .zip(&fit.beta_std)
        .filter(|(_, b)| **b != 0.0)
        .map(|((n, _), _)| n.clone())
        .collect();
    let mut hyperparams = Hyperparams::new();
    hyperparams.insert("alpha".into(), ParamValue::Real(alpha));
    hyperparams.insert("lambda".into(), ParamValue::Real(fit.penalty.lambda));
    let touched: BTreeSet<usize> = train.row_ids().iter().copied().collect();
    let record = EvaluationRecord {
        model_id: model_id(None, SelectionLabel::PureRegularized, Some(method)),
        learner: "glm".into(),
        selection: SelectionLabel::PureRegularized,
        n_selected: selected.len(),
        selected,
        hyperparams,
        cv_metric: Some(cv.best_metric()),
        evaluation: Some(evaluate(task, test, &scores, cfg.threshold)?),
        leakage_audit: audit(train, test, &touched),
        seed: cfg.fold_seed(),
        error: None,
        wall_seconds: started.elapsed().as_secs_f64(),
    };
    Ok(GlmRun {
        method,
        cv,
        fit,
        record,
        test_scores: scores,
    })
}

/// A tuned learner on one feature set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerRun {
    pub learner: Learner,
    pub features: Vec<String>,
    pub search: SearchResult,
    pub model: FittedModel,
    pub evaluation: Evaluation,
    pub test_scores: Vec<f64>,
    pub leakage_audit: LeakageAudit,
    pub wall_seconds: f64,
}

/// Tune `learner` on `features` inside `train`, refit with the winning
/// configuration on all of `train`, and score `test`.
pub fn run_learner(
    train: &Dataset,
    test: &Dataset,
    features: &[String],
    learner: Learner,
    folds: &FoldAssignment,
    cfg: &PipelineConfig,
) -> Result<LearnerRun> {
    let started = Instant::now();
    let task = cfg.task_for(train);
    let tr = project(train, features)?;
    let te = project(test, features)?;
    let metric = match task {
        Task::Classification => TuneMetric::Auc,
        Task::Regression => TuneMetric::Rmse,
    };
    let space = cfg.space(learner, tr.n_features());
    let search = random_search(&tr, &space, cfg.n_trials, folds, metric, cfg.tuning_seed(learner), |h, d, seed| {
        learner.fit(h, d, task, seed)
    })?;
    let model = learner.fit(&search.best_config, &tr, task, search.best_seed)?;
    let test_scores = model.predict(&te)?;
    let mut touched = search.rows_seen.clone();
    touched.extend(tr.row_ids().iter().copied());
    Ok(LearnerRun {
        learner,
        features: tr.feature_names(),
        evaluation: evaluate(task, &te, &test_scores, cfg.threshold)?,
        leakage_audit: audit(&tr, &te, &touched),
        search,
        model,
        test_scores,
        wall_seconds: started.elapsed().as_secs_f64(),
    })
}

fn learner_record(run: &LearnerRun, selection: SelectionLabel) -> EvaluationRecord {
    EvaluationRecord {
        model_id: model_id(Some(run.learner), selection, None),
        learner: run.learner.name().into(),
        selection,
        n_selected: run.features.len(),
        selected: run.features.clone(),
        hyperparams: run.search.best_config.clone(),
        cv_metric: Some(run.search.best().mean_metric),
        evaluation: Some(run.evaluation.clone()),
        leakage_audit: run.leakage_audit.clone(),
        seed: run.search.best_seed,
        error: None,
        wall_seconds: run.wall_seconds,
    }
}

fn failed_record(
    learner: Option<Learner>,
    selection: SelectionLabel,
    method: Option<SelectionMethod>,
    error: String,
) -> EvaluationRecord {
    EvaluationRecord {
        model_id: model_id(learner, selection, method),
        learner: learner.map_or("glm", Learner::name).into(),
        selection,
        n_selected: 0,
        selected: Vec::new(),
        hyperparams: Hyperparams::new(),
        cv_metric: None,
        evaluation: None,
        leakage_audit: LeakageAudit {
            disjoint_split: true,
            fitted_on_train_only: true,
        },
        seed: 0,
        error: Some(error),
        wall_seconds: 0.0,
    }
}

/// Full-variable run: the learner sees every feature.
pub fn run_fullvar_blackbox(
    train: &Dataset,
    test: &Dataset,
    learner: Learner,
    folds: &FoldAssignment,
    cfg: &PipelineConfig,
) -> Result<(EvaluationRecord, LearnerRun)> {
    let run = run_learner(train, test, &train.feature_names(), learner, folds, cfg)?;
    Ok((learner_record(&run, SelectionLabel::None), run))
}

/// Hybrid run: the learner sees only the selected features.
pub fn run_hybrid(
    train: &Dataset,
    test: &Dataset,
    selection: &FeatureSelection,
    learner: Learner,
    folds: &FoldAssignment,
    cfg: &PipelineConfig,
) -> Result<(EvaluationRecord, LearnerRun)> {
    if selection.is_empty() {
        return Err(Error::EmptySelection {
            method: selection.method.name().into(),
        });
    }
    let run = run_learner(train, test, &selection.names(), learner, folds, cfg)?;
    Ok((learner_record(&run, selection.method.into()), run))
}

/// Everything a matrix run produced.
#[derive(Debug, Clone)]
pub struct MatrixOutput {
    /// Pure models first, then per learner: full, then each selection.
    pub records: Vec<EvaluationRecord>,
    pub glm_runs: Vec<GlmRun>,
    pub selections: Vec<FeatureSelection>,
    /// Keyed by model id.
    pub learner_runs: IndexMap<String, LearnerRun>,
    pub folds: FoldAssignment,
}

impl MatrixOutput {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| !r.is_ok()).count()
    }
}

/// The comparison matrix: pure penalized models, every learner on all
/// features, and every (learner, selection) hybrid. Learner runs on identical
/// feature sets are computed once.
pub fn run_matrix(train: &Dataset, test: &Dataset, cfg: &PipelineConfig) -> Result<MatrixOutput> {
    cfg.validate()?;
    let folds = make_folds(train, cfg.k, cfg.fold_seed())?;

    let methods: Vec<SelectionMethod> = {
        let mut m: Vec<SelectionMethod> = cfg.selections.clone();
        if cfg.include_pure {
            m = SelectionMethod::ALL.to_vec();
        }
        m
    };
    let glm: Vec<(SelectionMethod, Result<GlmRun>)> = methods
        .par_iter()
        .map(|&m| (m, run_regularized_baseline(train, test, cfg.alpha(m), &folds, cfg)))
        .collect();

    let mut records = Vec::new();
    let mut glm_runs = Vec::new();
    let mut selections: Vec<(SelectionMethod, Result<FeatureSelection>)> = Vec::new();
    for (m, run) in glm {
        match run {
            Ok(run) => {
                if cfg.selections.contains(&m) {
                    let top_m = if m == SelectionMethod::Ridge { cfg.ridge_top_m } else { None };
                    selections.push((m, select_features(&run.fit, top_m)));
                }
                if cfg.include_pure {
                    records.push(run.record.clone());
                }
                glm_runs.push(run);
            }
            Err(e) => {
                log::error!("{} baseline failed: {e}", m.name());
                if cfg.include_pure {
                    records.push(failed_record(None, SelectionLabel::PureRegularized, Some(m), e.to_string()));
                }
                if cfg.selections.contains(&m) {
                    selections.push((m, Err(e)));
                }
            }
        }
    }

    // (learner, label) slots in output order, each pointing at a feature set.
    let all = train.feature_names();
    let mut slots: Vec<(Learner, SelectionLabel, std::result::Result<Vec<String>, String>)> = Vec::new();
    for &l in &cfg.learners {
        if cfg.include_full {
            slots.push((l, SelectionLabel::None, Ok(all.clone())));
        }
        for (m, s) in &selections {
            let features = match s {
                Ok(s) => Ok(project(train, &s.names())?.feature_names()),
                Err(e) => Err(e.to_string()),
            };
            slots.push((l, (*m).into(), features));
        }
    }
    let mut jobs: Vec<(Learner, Vec<String>)> = Vec::new();
    for (l, _, f) in &slots {
        if let Ok(f) = f {
            if !jobs.iter().any(|(jl, jf)| jl == l && jf == f) {
                jobs.push((*l, f.clone()));
            }
        }
    }
    let results: Vec<Result<LearnerRun>> = jobs
        .par_iter()
        .map(|(l, f)| run_learner(train, test, f, *l, &folds, cfg))
        .collect();
    let done: HashMap<(Learner, Vec<String>), &Result<LearnerRun>> = jobs
        .iter()
        .cloned()
        .zip(results.iter())
        .collect();

    let mut learner_runs = IndexMap::new();
    for (l, label, features) in slots {
        let id = model_id(Some(l), label, None);
        let record = match features {
            Err(msg) => failed_record(Some(l), label, None, msg),
            Ok(f) => match done[&(l, f)] {
                Ok(run) => {
                    learner_runs.insert(id, run.clone());
                    learner_record(run, label)
                }
                Err(e) => failed_record(Some(l), label, None, e.to_string()),
            },
        };
        records.push(record);
    }
    Ok(MatrixOutput {
        records,
        glm_runs,
        selections: selections.into_iter().filter_map(|(_, s)| s.ok()).collect(),
        learner_runs,
        folds,
    })
}

/// Model refit for each prefix of a feature ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveModel {
    /// Penalized logistic regression with lambda re-chosen by CV at each size.
    Glm { alpha: f64 },
    /// A learner refit with fixed hyperparameters at each size.
    Learner { learner: Learner, hyperparams: Hyperparams },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n_vars: usize,
    pub auc: f64,
}

/// Test AUC of `model` refit on the top-m ranked features, m = 1..=|ranking|.
pub fn auc_by_nvars(
    train: &Dataset,
    test: &Dataset,
    ranking: &FeatureSelection,
    model: &CurveModel,
    folds: &FoldAssignment,
    cfg: &PipelineConfig,
) -> Result<Vec<CurvePoint>> {
    if ranking.is_empty() {
        return Err(Error::EmptySelection {
            method: ranking.method.name().into(),
        });
    }
    let names = ranking.names();
    (1..=names.len())
        .into_par_iter()
        .map(|m| {
            let top = &names[..m];
            let tr = project(train, top)?;
            let te = project(test, top)?;
            let scores = match model {
                CurveModel::Glm { alpha } => {
                    let (_, fit) = cv_fit(&tr, *alpha, folds, Measure::Auc, &cfg.cv)?;
                    predict_glm(&fit, &te)?
                }
                CurveModel::Learner { learner, hyperparams } => learner
                    .fit(hyperparams, &tr, Task::Classification, cfg.tuning_seed(*learner))?
                    .predict(&te)?,
            };
            Ok(CurvePoint {
                n_vars: m,
                auc: metrics::auc(te.require_target()?, &scores)?,
            })
        })
        .collect()
}
