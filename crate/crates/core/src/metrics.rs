//! Classification and regression evaluation.
//!
//! Ratios whose denominator is zero are reported as `None` rather than 0, so a
//! degenerate confusion matrix can never masquerade as a poor-but-valid model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub fp: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn new(tp: usize, fn_: usize, fp: usize, tn: usize) -> Self {
        ConfusionMatrix { tp, fn_, fp, tn }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fn_ + self.fp + self.tn
    }
}

/// Threshold metrics plus AUC. `None` marks an undefined value.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricBlock {
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub specificity: Option<f64>,
    pub f1: Option<f64>,
    pub balanced_accuracy: Option<f64>,
    pub auc: Option<f64>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Predicted positive iff `score >= threshold`.
pub fn confusion_at(labels: &[f64], scores: &[f64], threshold: f64) -> Result<ConfusionMatrix> {
    if labels.len() != scores.len() {
        return Err(Error::Input(format!(
            "{} labels but {} scores",
            labels.len(),
            scores.len()
        )));
    }
    let mut cm = ConfusionMatrix::default();
    for (&y, &s) in labels.iter().zip(scores) {
        let predicted = s >= threshold;
        match (y == 1.0, predicted) {
            (true, true) => cm.tp += 1,
            (true, false) => cm.fn_ += 1,
            (false, true) => cm.fp += 1,
            (false, false) => cm.tn += 1,
        }
    }
    Ok(cm)
}

/// Threshold metrics from a confusion matrix; `auc` is left unset.
pub fn classification_metrics(cm: &ConfusionMatrix) -> Result<MetricBlock> {
    if cm.total() == 0 {
        return Err(Error::UndefinedMetric("empty confusion matrix".into()));
    }
    let precision = ratio(cm.tp, cm.tp + cm.fp);
    let recall = ratio(cm.tp, cm.tp + cm.fn_);
    let specificity = ratio(cm.tn, cm.tn + cm.fp);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    let balanced_accuracy = match (recall, specificity) {
        (Some(r), Some(s)) => Some((r + s) / 2.0),
        _ => None,
    };
    Ok(MetricBlock {
        accuracy: ratio(cm.tp + cm.tn, cm.total()),
        precision,
        recall,
        specificity,
        f1,
        balanced_accuracy,
        auc: None,
    })
}

/// Area under the ROC curve by the trapezoid rule over distinct thresholds.
///
/// Scores are visited in decreasing order; a block of tied scores moves the
/// curve diagonally, which is what makes the area equal the concordance
/// statistic with ties counted one half.
pub fn auc(labels: &[f64], scores: &[f64]) -> Result<f64> {
    if labels.len() != scores.len() {
        return Err(Error::Input(format!(
            "{} labels but {} scores",
            labels.len(),
            scores.len()
        )));
    }
    let n_pos = labels.iter().filter(|&&y| y == 1.0).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedMetric(
            "AUC needs both classes present".into(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    // Integer counts keep the area exact until the final division.
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut twice_area: u64 = 0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let (mut dtp, mut dfp) = (0u64, 0u64);
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] == 1.0 {
                dtp += 1;
            } else {
                dfp += 1;
            }
            i += 1;
        }
        // trapezoid: dfp * (tp + tp + dtp) / 2
        twice_area += dfp * (2 * tp + dtp);
        tp += dtp;
        fp += dfp;
    }
    debug_assert_eq!(fp as usize, n_neg);
    Ok(twice_area as f64 / (2.0 * n_pos as f64 * n_neg as f64))
}

/// ROC curve points `(fpr, tpr)` from the origin to `(1, 1)`, one per
/// distinct threshold.
pub fn roc_points(labels: &[f64], scores: &[f64]) -> Result<Vec<(f64, f64)>> {
    let n_pos = labels.iter().filter(|&&y| y == 1.0).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 || labels.len() != scores.len() {
        return Err(Error::UndefinedMetric("ROC needs both classes present".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] == 1.0 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / n_neg as f64, tp as f64 / n_pos as f64));
    }
    Ok(points)
}

pub fn rmse(y: &[f64], yhat: &[f64]) -> Result<f64> {
    if y.len() != yhat.len() || y.is_empty() {
        return Err(Error::Input(format!(
            "rmse needs equal non-empty lengths, got {} and {}",
            y.len(),
            yhat.len()
        )));
    }
    let sse: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b).powi(2)).sum();
    Ok((sse / y.len() as f64).sqrt())
}

/// Threshold metrics at `threshold` plus AUC (left `None` for single-class
/// labels).
pub fn evaluate_scores(labels: &[f64], scores: &[f64], threshold: f64) -> Result<MetricBlock> {
    let cm = confusion_at(labels, scores, threshold)?;
    let mut block = classification_metrics(&cm)?;
    block.auc = match auc(labels, scores) {
        Ok(a) => Some(a),
        Err(Error::UndefinedMetric(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(block)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn perfect_scores_have_no_errors() {
        let cm = confusion_at(&[1.0, 0.0, 1.0, 0.0], &[0.9, 0.2, 0.7, 0.4], 0.5).unwrap();
        assert_eq!((cm.fp, cm.fn_), (0, 0));
    }

    #[test]
    fn threshold_above_all_scores_predicts_negative() {
        let cm = confusion_at(&[1.0, 0.0, 1.0], &[0.3, 0.2, 0.9], 0.95).unwrap();
        assert_eq!((cm.tp, cm.fp), (0, 0));
        assert_eq!(cm.total(), 3);
    }

    #[test]
    fn length_mismatch_is_error() {
        assert!(confusion_at(&[1.0], &[0.1, 0.2], 0.5).is_err());
        assert!(auc(&[1.0], &[0.1, 0.2]).is_err());
    }

    #[test]
    fn ridge_row_from_confusion_cells() {
        let m = classification_metrics(&ConfusionMatrix::new(187, 97, 39, 216)).unwrap();
        assert_abs_diff_eq!(m.accuracy.unwrap(), 0.7477, epsilon = 5e-5);
        assert_abs_diff_eq!(m.precision.unwrap(), 0.8274, epsilon = 5e-5);
        assert_abs_diff_eq!(m.recall.unwrap(), 0.6585, epsilon = 5e-5);
        assert_abs_diff_eq!(m.specificity.unwrap(), 0.8471, epsilon = 5e-5);
        assert_abs_diff_eq!(m.balanced_accuracy.unwrap(), 0.7528, epsilon = 5e-5);
        // 2TP / (2TP + FP + FN) computed from the cells.
        assert_abs_diff_eq!(m.f1.unwrap(), 374.0 / 510.0, epsilon = 1e-12);
    }

    #[test]
    fn lasso_and_elastic_net_rows() {
        let lasso = classification_metrics(&ConfusionMatrix::new(187, 97, 34, 221)).unwrap();
        assert_abs_diff_eq!(lasso.accuracy.unwrap(), 0.7570, epsilon = 5e-5);
        assert_abs_diff_eq!(lasso.precision.unwrap(), 0.8462, epsilon = 5e-5);
        assert_abs_diff_eq!(lasso.specificity.unwrap(), 0.8667, epsilon = 5e-5);
        assert_abs_diff_eq!(lasso.balanced_accuracy.unwrap(), 0.7626, epsilon = 5e-5);
        assert_abs_diff_eq!(lasso.f1.unwrap(), 374.0 / 505.0, epsilon = 1e-12);

        let enet = classification_metrics(&ConfusionMatrix::new(187, 97, 37, 218)).unwrap();
        assert_abs_diff_eq!(enet.accuracy.unwrap(), 0.7514, epsilon = 5e-5);
        assert_abs_diff_eq!(enet.precision.unwrap(), 0.8348, epsilon = 5e-5);
        assert_abs_diff_eq!(enet.specificity.unwrap(), 0.8549, epsilon = 5e-5);
        assert_abs_diff_eq!(enet.f1.unwrap(), 0.7362, epsilon = 5e-5);
        assert_abs_diff_eq!(enet.balanced_accuracy.unwrap(), 0.7567, epsilon = 5e-5);
    }

    #[test]
    fn zero_denominators_are_undefined() {
        let m = classification_metrics(&ConfusionMatrix::new(0, 0, 0, 5)).unwrap();
        assert_eq!(m.precision, None);
        assert_eq!(m.recall, None);
        assert_eq!(m.f1, None);
        assert_eq!(m.specificity, Some(1.0));
        assert!(classification_metrics(&ConfusionMatrix::default()).is_err());
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc(&[1.0, 0.0], &[0.9, 0.1]).unwrap(), 1.0);
        assert_eq!(auc(&[1.0, 0.0, 1.0, 0.0], &[0.5; 4]).unwrap(), 0.5);
        assert_eq!(auc(&[1.0, 1.0, 0.0, 0.0], &[0.8, 0.4, 0.6, 0.2]).unwrap(), 0.75);
        assert!(matches!(auc(&[1.0, 1.0], &[0.1, 0.2]), Err(Error::UndefinedMetric(_))));
    }

    #[test]
    fn roc_ends_at_corners() {
        let pts = roc_points(&[1.0, 1.0, 0.0, 0.0], &[0.8, 0.4, 0.6, 0.2]).unwrap();
        assert_eq!(pts.first(), Some(&(0.0, 0.0)));
        assert_eq!(pts.last(), Some(&(1.0, 1.0)));
    }

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(rmse(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(rmse(&[0.0, 2.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert!(rmse(&[], &[]).is_err());
    }
}
