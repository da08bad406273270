//! Turning a penalized fit into an ordered feature subset.

use serde::{Deserialize, Serialize};

use super::RegularizedFit;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMethod {
    Ridge,
    Lasso,
    #[serde(rename = "elasticnet")]
    ElasticNet,
}

impl SelectionMethod {
    pub const ALL: [SelectionMethod; 3] =
        [SelectionMethod::Ridge, SelectionMethod::Lasso, SelectionMethod::ElasticNet];

    pub fn from_alpha(alpha: f64) -> SelectionMethod {
        if alpha == 0.0 {
            SelectionMethod::Ridge
        } else if alpha == 1.0 {
            SelectionMethod::Lasso
        } else {
            SelectionMethod::ElasticNet
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SelectionMethod::Ridge => "ridge",
            SelectionMethod::Lasso => "lasso",
            SelectionMethod::ElasticNet => "elasticnet",
        }
    }

    pub fn parse(s: &str) -> Option<SelectionMethod> {
        SelectionMethod::ALL.into_iter().find(|m| m.name() == s)
    }
}

impl std::fmt::Display for SelectionMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedFeature {
    pub name: String,
    /// |coefficient| on the standardized scale, the ranking key.
    pub magnitude: f64,
    /// Coefficient on the original feature scale.
    pub coefficient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSelection {
    pub method: SelectionMethod,
    pub selected: Vec<SelectedFeature>,
}

impl FeatureSelection {
    pub fn names(&self) -> Vec<String> {
        self.selected.iter().map(|s| s.name.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    /// The `m` highest-ranked features.
    pub fn top(&self, m: usize) -> FeatureSelection {
        FeatureSelection {
            method: self.method,
            selected: self.selected.iter().take(m).cloned().collect(),
        }
    }
}

/// Default ridge cut: the ten largest standardized coefficients.
pub const RIDGE_TOP_M: usize = 10;

/// Non-zero coefficients for lasso and elastic net; the `top_m` (default 10)
/// largest standardized magnitudes for ridge. Ordered by decreasing magnitude,
/// ties by feature position.
pub fn select_features(fit: &RegularizedFit, top_m: Option<usize>) -> Result<FeatureSelection> {
    let method = fit.penalty.method();
    let mut ranked: Vec<(usize, f64)> = fit
        .beta_std
        .iter()
        .enumerate()
        .filter(|(_, b)| **b != 0.0)
        .map(|(j, b)| (j, b.abs()))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    if method == SelectionMethod::Ridge {
        ranked.truncate(top_m.unwrap_or(RIDGE_TOP_M));
    }
    if ranked.is_empty() {
        return Err(Error::EmptySelection {
            method: method.name().to_string(),
        });
    }
    let coefs: Vec<(&String, &f64)> = fit.beta.iter().collect();
    let selected = ranked
        .into_iter()
        .map(|(j, magnitude)| SelectedFeature {
            name: coefs[j].0.clone(),
            magnitude,
            coefficient: *coefs[j].1,
        })
        .collect();
    Ok(FeatureSelection { method, selected })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regpath::{Family, PenaltySpec};
    use indexmap::IndexMap;

    fn fit_with(alpha: f64, beta: &[f64]) -> RegularizedFit {
        let names: IndexMap<String, f64> = beta
            .iter()
            .enumerate()
            .map(|(j, b)| (format!("feature{}", j + 1), *b))
            .collect();
        RegularizedFit {
            family: Family::Binomial,
            intercept: 0.0,
            beta: names,
            penalty: PenaltySpec { alpha, lambda: 0.1 },
            n_iterations: 1,
            converged: true,
            intercept_std: 0.0,
            beta_std: beta.to_vec(),
        }
    }

    #[test]
    fn lasso_keeps_nonzero_in_magnitude_order() {
        let s = select_features(&fit_with(1.0, &[0.0, 1.2, 0.0, -0.3]), None).unwrap();
        assert_eq!(s.method, SelectionMethod::Lasso);
        assert_eq!(s.names(), vec!["feature2", "feature4"]);
        assert_eq!(s.selected[1].magnitude, 0.3);
    }

    #[test]
    fn ridge_takes_top_m() {
        let beta: Vec<f64> = (0..35).map(|j| (j as f64 - 17.0) / 10.0).collect();
        let s = select_features(&fit_with(0.0, &beta), Some(10)).unwrap();
        assert_eq!(s.len(), 10);
        assert_eq!(s.names()[0], "feature1");
        let default = select_features(&fit_with(0.0, &beta), None).unwrap();
        assert_eq!(default.len(), RIDGE_TOP_M);
    }

    #[test]
    fn all_zero_is_empty_selection() {
        let err = select_features(&fit_with(0.5, &[0.0, 0.0]), None).unwrap_err();
        assert!(matches!(err, Error::EmptySelection { ref method } if method == "elasticnet"));
    }

    #[test]
    fn ties_keep_feature_order() {
        let s = select_features(&fit_with(1.0, &[0.5, -0.5, 0.5]), None).unwrap();
        assert_eq!(s.names(), vec!["feature1", "feature2", "feature3"]);
    }
}
