//! Cross-validated choice of lambda along a warm-started path.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    default_lambda_ratio, fit_path, lambda_path, predict_glm, Family, RegularizedFit,
    SolverOptions,
};
use crate::dataframe::{Dataset, FoldAssignment};
use crate::error::{Error, Result};
use crate::metrics;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Auc,
    Mse,
}

impl Measure {
    pub fn family(self) -> Family {
        match self {
            Measure::Auc => Family::Binomial,
            Measure::Mse => Family::Gaussian,
        }
    }

    /// True when larger values are better.
    pub fn maximize(self) -> bool {
        matches!(self, Measure::Auc)
    }

    pub fn for_family(family: Family) -> Measure {
        match family {
            Family::Binomial => Measure::Auc,
            Family::Gaussian => Measure::Mse,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvOptions {
    pub n_lambda: usize,
    /// `lambda_min / lambda_max`; `None` picks 1e-4 when n > p, else 1e-2.
    pub lambda_ratio: Option<f64>,
    pub solver: SolverOptions,
}

impl Default for CvOptions {
    fn default() -> Self {
        CvOptions {
            n_lambda: 100,
            lambda_ratio: None,
            solver: SolverOptions::default(),
        }
    }
}

/// The CV curve as parallel arrays over the lambda grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub alpha: f64,
    pub measure: Measure,
    pub lambda_grid: Vec<f64>,
    pub mean_metric: Vec<f64>,
    pub se_metric: Vec<f64>,
    /// `per_fold_metrics[fold][lambda]`; `None` where the metric is undefined.
    pub per_fold_metrics: Vec<Vec<Option<f64>>>,
    pub best_index: usize,
    pub best_lambda: f64,
}

impl CvResult {
    pub fn best_metric(&self) -> f64 {
        self.mean_metric[self.best_index]
    }
}

fn fold_metric(measure: Measure, labels: &[f64], scores: &[f64]) -> Result<Option<f64>> {
    match measure {
        Measure::Auc => match metrics::auc(labels, scores) {
            Ok(a) => Ok(Some(a)),
            Err(Error::UndefinedMetric(_)) => Ok(None),
            Err(e) => Err(e),
        },
        Measure::Mse => Ok(Some(metrics::rmse(labels, scores)?.powi(2))),
    }
}

/// Index of the best mean metric; ties go to the earlier (larger) lambda.
fn best_index(measure: Measure, means: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &m) in means.iter().enumerate() {
        if m.is_nan() {
            continue;
        }
        let better = match best {
            None => true,
            Some(b) if measure.maximize() => m > means[b],
            Some(b) => m < means[b],
        };
        if better {
            best = Some(i);
        }
    }
    best
}

/// Score every lambda of the path by k-fold cross-validation.
///
/// The grid is built once from the full data; each fold fits the whole path
/// with warm starts. Folds whose validation rows hold a single class have an
/// undefined AUC and are left out of that lambda's mean.
pub fn cv_glmnet(
    d: &Dataset,
    alpha: f64,
    folds: &FoldAssignment,
    measure: Measure,
    opts: &CvOptions,
) -> Result<CvResult> {
    if folds.fold_of_row.len() != d.n_rows() {
        return Err(Error::Input(format!(
            "fold assignment covers {} rows, dataset has {}",
            folds.fold_of_row.len(),
            d.n_rows()
        )));
    }
    let ratio = opts
        .lambda_ratio
        .unwrap_or_else(|| default_lambda_ratio(d.n_rows(), d.n_features()));
    let grid = lambda_path(d, alpha, opts.n_lambda, ratio)?;
    let family = measure.family();

    let per_fold: Vec<Vec<Option<f64>>> = (0..folds.k)
        .into_par_iter()
        .map(|f| -> Result<Vec<Option<f64>>> {
            let train = d.select_rows(&folds.training_rows(f));
            let valid = d.select_rows(&folds.validation_rows(f));
            let labels = valid.require_target()?;
            let fits = fit_path(&train, family, alpha, &grid, &opts.solver)?;
            fits.iter()
                .map(|fit| fold_metric(measure, labels, &predict_glm(fit, &valid)?))
                .collect()
        })
        .collect::<Result<_>>()?;

    for (f, row) in per_fold.iter().enumerate() {
        if row.iter().any(Option::is_none) {
            log::warn!("fold {f} has a single class in validation; excluded from the CV mean");
        }
    }

    let mut mean_metric = Vec::with_capacity(grid.len());
    let mut se_metric = Vec::with_capacity(grid.len());
    for l in 0..grid.len() {
        let vals: Vec<f64> = per_fold.iter().filter_map(|row| row[l]).collect();
        let n = vals.len() as f64;
        if vals.is_empty() {
            mean_metric.push(f64::NAN);
            se_metric.push(f64::NAN);
            continue;
        }
        let mean = vals.iter().sum::<f64>() / n;
        let se = if vals.len() > 1 {
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        mean_metric.push(mean);
        se_metric.push(se);
    }
    let best = best_index(measure, &mean_metric)
        .ok_or_else(|| Error::UndefinedMetric("no fold produced a defined CV metric".into()))?;
    Ok(CvResult {
        alpha,
        measure,
        best_lambda: grid[best],
        best_index: best,
        lambda_grid: grid,
        mean_metric,
        se_metric,
        per_fold_metrics: per_fold,
    })
}

/// Cross-validate, then refit on all of `d` at the chosen lambda, walking the
/// grid down to it with warm starts.
pub fn cv_fit(
    d: &Dataset,
    alpha: f64,
    folds: &FoldAssignment,
    measure: Measure,
    opts: &CvOptions,
) -> Result<(CvResult, RegularizedFit)> {
    let cv = cv_glmnet(d, alpha, folds, measure, opts)?;
    let mut fits = fit_path(
        d,
        measure.family(),
        alpha,
        &cv.lambda_grid[..=cv.best_index],
        &opts.solver,
    )?;
    let fit = fits.pop().expect("grid prefix is non-empty");
    Ok((cv, fit))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn best_index_prefers_larger_lambda_on_ties() {
        assert_eq!(best_index(Measure::Auc, &[0.6, 0.8, 0.8, 0.7]), Some(1));
        assert_eq!(best_index(Measure::Mse, &[3.0, 1.0, 1.0, 2.0]), Some(1));
        assert_eq!(best_index(Measure::Auc, &[f64::NAN, 0.5]), Some(1));
        assert_eq!(best_index(Measure::Auc, &[f64::NAN]), None);
    }
}
