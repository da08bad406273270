//! Elastic-net penalized linear and logistic regression.
//!
//! Minimizes, over an intercept and coefficient vector on internally
//! standardized features,
//!
//! ```text
//! gaussian: (1/2n) ||y - b0 - X b||^2          + lambda * (alpha |b|_1 + (1 - alpha) |b|_2^2 / 2)
//! binomial: -(1/n) loglik(y; b0 + X b)         + lambda * (alpha |b|_1 + (1 - alpha) |b|_2^2 / 2)
//! ```
//!
//! by cyclic coordinate descent. The logistic case wraps the weighted
//! least-squares solver in an IRLS loop. Coefficients are reported on the
//! original feature scale; the intercept is never penalized.

mod cv;
mod select;
pub(crate) mod solver;

pub use cv::{cv_fit, cv_glmnet, CvOptions, CvResult, Measure};
pub use select::{select_features, FeatureSelection, SelectedFeature, SelectionMethod, RIDGE_TOP_M};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::dataframe::Dataset;
use crate::error::{Error, Result};
use solver::{cd_gaussian, cd_weighted, Design};

/// Probability clip used for IRLS weights and working responses.
pub const PROB_CLIP: f64 = 1e-5;
/// Standardized-scale coefficient cap applied under perfect separation.
pub const COEF_CAP: f64 = 100.0;
/// Mixing value substituted into the lambda_max formula when alpha = 0.
pub const RIDGE_ALPHA_FLOOR: f64 = 0.001;

/// `sign(z) * max(|z| - gamma, 0)`.
#[inline]
pub fn soft_threshold(z: f64, gamma: f64) -> f64 {
    debug_assert!(gamma >= 0.0);
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gaussian,
    Binomial,
}

/// Mixing parameter and penalty strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltySpec {
    pub alpha: f64,
    pub lambda: f64,
}

impl PenaltySpec {
    pub fn new(alpha: f64, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Config(format!("alpha must lie in [0, 1], got {alpha}")));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::Config(format!("lambda must be finite and >= 0, got {lambda}")));
        }
        Ok(PenaltySpec { alpha, lambda })
    }

    pub fn method(&self) -> SelectionMethod {
        SelectionMethod::from_alpha(self.alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Convergence threshold on the largest coefficient change in a sweep.
    pub tol: f64,
    /// Relative deviance change that ends the IRLS loop.
    pub deviance_tol: f64,
    /// Budget of coordinate-descent sweeps per fit.
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-7,
            deviance_tol: 1e-8,
            max_iter: 100_000,
        }
    }
}

/// A fitted penalized GLM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularizedFit {
    pub family: Family,
    /// Intercept on the original feature scale.
    pub intercept: f64,
    /// Coefficients on the original feature scale, keyed by feature name.
    pub beta: IndexMap<String, f64>,
    pub penalty: PenaltySpec,
    pub n_iterations: usize,
    pub converged: bool,
    /// Intercept on the standardized scale.
    pub intercept_std: f64,
    /// Coefficients on the standardized scale, in feature order.
    pub beta_std: Vec<f64>,
}

impl RegularizedFit {
    pub fn feature_names(&self) -> Vec<String> {
        self.beta.keys().cloned().collect()
    }

    pub fn n_nonzero(&self) -> usize {
        self.beta_std.iter().filter(|&&b| b != 0.0).count()
    }

    #[allow(clippy::too_many_arguments)]
    fn from_standardized(
        family: Family,
        names: &[String],
        design: &Design,
        intercept_std: f64,
        beta_std: Vec<f64>,
        penalty: PenaltySpec,
        n_iterations: usize,
        converged: bool,
    ) -> RegularizedFit {
        let mut beta = IndexMap::with_capacity(names.len());
        let mut intercept = intercept_std;
        for (j, name) in names.iter().enumerate() {
            let b = beta_std[j] / design.scales[j];
            intercept -= b * design.means[j];
            beta.insert(name.clone(), b);
        }
        RegularizedFit {
            family,
            intercept,
            beta,
            penalty,
            n_iterations,
            converged,
            intercept_std,
            beta_std,
        }
    }
}

fn logistic(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn clip_prob(p: f64) -> f64 {
    p.clamp(PROB_CLIP, 1.0 - PROB_CLIP)
}

struct Problem {
    names: Vec<String>,
    design: Design,
    y: Vec<f64>,
    mean_y: f64,
}

impl Problem {
    fn new(d: &Dataset, family: Family) -> Result<Problem> {
        let y = d.require_target()?.to_vec();
        if d.n_rows() == 0 {
            return Err(Error::Input("cannot fit on an empty dataset".into()));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("target contains non-finite values".into()));
        }
        if family == Family::Binomial && !d.is_binary_target() {
            return Err(Error::Input("binomial family needs a 0/1 target".into()));
        }
        let design = Design::new(&d.feature_slices(), d.n_rows());
        let mean_y = y.iter().sum::<f64>() / y.len() as f64;
        Ok(Problem {
            names: d.feature_names(),
            design,
            y,
            mean_y,
        })
    }

    fn centered(&self) -> Vec<f64> {
        self.y.iter().map(|v| v - self.mean_y).collect()
    }

    /// Smallest lambda at which every penalized coefficient is zero.
    fn lambda_max(&self, alpha: f64) -> f64 {
        let alpha = if alpha == 0.0 { RIDGE_ALPHA_FLOOR } else { alpha };
        self.design.max_abs_corr(&self.centered()) / alpha
    }

    fn null_intercept(&self, family: Family) -> f64 {
        match family {
            Family::Gaussian => self.mean_y,
            Family::Binomial => logit(clip_prob(self.mean_y)),
        }
    }
}

/// Geometric lambda grid from `lambda_max` down to `lambda_max * ratio`.
/// With `alpha = 0` the maximum is computed as if `alpha` were 0.001.
pub fn lambda_path(d: &Dataset, alpha: f64, n_lambda: usize, ratio: f64) -> Result<Vec<f64>> {
    if n_lambda == 0 {
        return Err(Error::Config("n_lambda must be positive".into()));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Config(format!("lambda ratio must lie in (0, 1), got {ratio}")));
    }
    PenaltySpec::new(alpha, 0.0)?;
    let problem = Problem::new(d, Family::Gaussian)?;
    let lmax = problem.lambda_max(alpha);
    if n_lambda == 1 {
        return Ok(vec![lmax]);
    }
    let step = ratio.ln() / (n_lambda - 1) as f64;
    Ok((0..n_lambda)
        .map(|i| if i == 0 { lmax } else { lmax * (step * i as f64).exp() })
        .collect())
}

/// Default `lambda_min / lambda_max`: 1e-4 when n > p, else 1e-2.
pub fn default_lambda_ratio(n: usize, p: usize) -> f64 {
    if n > p {
        1e-4
    } else {
        1e-2
    }
}

/// Largest lambda of the grid `lambda_path` would build.
pub fn lambda_max(d: &Dataset, alpha: f64) -> Result<f64> {
    Ok(Problem::new(d, Family::Gaussian)?.lambda_max(alpha))
}

pub fn fit_enet_gaussian(d: &Dataset, p: PenaltySpec, opts: &SolverOptions) -> Result<RegularizedFit> {
    fit_enet(d, Family::Gaussian, p, opts)
}

pub fn fit_enet_binomial(d: &Dataset, p: PenaltySpec, opts: &SolverOptions) -> Result<RegularizedFit> {
    fit_enet(d, Family::Binomial, p, opts)
}

pub fn fit_enet(
    d: &Dataset,
    family: Family,
    p: PenaltySpec,
    opts: &SolverOptions,
) -> Result<RegularizedFit> {
    let mut fits = fit_path(d, family, p.alpha, &[p.lambda], opts)?;
    Ok(fits.pop().expect("one lambda in, one fit out"))
}

/// Fit every lambda in order, warm-starting each fit from the previous one.
pub fn fit_path(
    d: &Dataset,
    family: Family,
    alpha: f64,
    lambdas: &[f64],
    opts: &SolverOptions,
) -> Result<Vec<RegularizedFit>> {
    for &l in lambdas {
        PenaltySpec::new(alpha, l)?;
    }
    let problem = Problem::new(d, family)?;
    let p = problem.design.p();
    let lmax = (alpha > 0.0).then(|| problem.lambda_max(alpha));
    let degenerate = family == Family::Binomial && (problem.mean_y == 0.0 || problem.mean_y == 1.0);
    let yc = problem.centered();

    let mut beta = vec![0.0; p];
    let mut intercept = problem.null_intercept(family);
    let mut out = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let penalty = PenaltySpec { alpha, lambda };
        let null = degenerate || lmax.is_some_and(|m| lambda >= m);
        let (b0, iters, converged) = if null {
            beta.iter_mut().for_each(|b| *b = 0.0);
            intercept = problem.null_intercept(family);
            (intercept, 0, true)
        } else {
            match family {
                Family::Gaussian => {
                    let o = cd_gaussian(
                        &problem.design,
                        &yc,
                        lambda,
                        alpha,
                        &mut beta,
                        opts.tol,
                        opts.max_iter,
                        None,
                    );
                    (problem.mean_y, o.sweeps, o.converged)
                }
                Family::Binomial => {
                    let (iters, converged) =
                        irls(&problem, lambda, alpha, &mut intercept, &mut beta, opts);
                    (intercept, iters, converged)
                }
            }
        };
        if !converged {
            log::warn!("elastic net did not converge at lambda = {lambda:.4e}");
        }
        out.push(RegularizedFit::from_standardized(
            family,
            &problem.names,
            &problem.design,
            b0,
            beta.clone(),
            penalty,
            iters,
            converged,
        ));
    }
    Ok(out)
}

fn binomial_deviance(y: &[f64], eta: &[f64]) -> f64 {
    -2.0 * y
        .iter()
        .zip(eta)
        .map(|(&yi, &e)| {
            // log(1 + exp(e)) computed stably
            let softplus = if e > 0.0 { e + (-e).exp().ln_1p() } else { e.exp().ln_1p() };
            yi * e - softplus
        })
        .sum::<f64>()
}

/// IRLS outer loop. Returns total inner sweeps and whether both the deviance
/// and the coefficients settled.
fn irls(
    problem: &Problem,
    lambda: f64,
    alpha: f64,
    intercept: &mut f64,
    beta: &mut [f64],
    opts: &SolverOptions,
) -> (usize, bool) {
    let design = &problem.design;
    let y = &problem.y;
    let n = design.n;
    let mut eta: Vec<f64> = design.linear(beta).iter().map(|e| e + *intercept).collect();
    let mut dev_old = binomial_deviance(y, &eta);
    let mut sweeps = 0;
    let mut weights = vec![0.0; n];
    let mut resid = vec![0.0; n];
    while sweeps < opts.max_iter {
        for i in 0..n {
            let p = clip_prob(logistic(eta[i]));
            let w = p * (1.0 - p);
            weights[i] = w;
            resid[i] = (y[i] - p) / w;
        }
        let prev_beta = beta.to_vec();
        let prev_intercept = *intercept;
        let o = cd_weighted(
            design,
            &weights,
            &mut resid,
            intercept,
            beta,
            lambda,
            alpha,
            opts.tol,
            opts.max_iter - sweeps,
        );
        sweeps += o.sweeps;

        if beta.iter().any(|b| b.abs() > COEF_CAP) {
            for b in beta.iter_mut() {
                *b = b.clamp(-COEF_CAP, COEF_CAP);
            }
            log::warn!("coefficients capped at |b| = {COEF_CAP}: data look separable");
            return (sweeps, false);
        }

        let lin = design.linear(beta);
        for i in 0..n {
            eta[i] = lin[i] + *intercept;
        }
        let dev = binomial_deviance(y, &eta);
        let moved = beta
            .iter()
            .zip(&prev_beta)
            .map(|(a, b)| (a - b).abs())
            .fold((*intercept - prev_intercept).abs(), f64::max);
        let settled = (dev - dev_old).abs() / (dev.abs() + 0.1) < opts.deviance_tol;
        dev_old = dev;
        if o.converged && settled && moved < opts.tol {
            return (sweeps, true);
        }
    }
    (sweeps, false)
}

/// Scores for `d`: the linear predictor (gaussian) or the fitted probability
/// (binomial).
pub fn predict_glm(fit: &RegularizedFit, d: &Dataset) -> Result<Vec<f64>> {
    let mut eta = vec![fit.intercept; d.n_rows()];
    for (name, &b) in &fit.beta {
        let col = d
            .column(name)
            .ok_or_else(|| Error::Schema(format!("missing column `{name}`")))?;
        if b != 0.0 {
            for (e, &x) in eta.iter_mut().zip(col) {
                *e += b * x;
            }
        }
    }
    Ok(match fit.family {
        Family::Gaussian => eta,
        Family::Binomial => eta.into_iter().map(logistic).collect(),
    })
}

/// Largest violation of the elastic-net optimality conditions of `fit` on its
/// training data, measured on the standardized scale. For the binomial family
/// the unclipped logistic gradient is used, and the intercept condition
/// `sum(y - p) = 0` is included.
pub fn kkt_residual(fit: &RegularizedFit, d: &Dataset) -> Result<f64> {
    let problem = Problem::new(d, fit.family)?;
    if problem.names != fit.feature_names() {
        return Err(Error::Schema("dataset features differ from the fit".into()));
    }
    let design = &problem.design;
    let n = design.n as f64;
    let lin = design.linear(&fit.beta_std);
    let resid: Vec<f64> = match fit.family {
        Family::Gaussian => problem
            .y
            .iter()
            .zip(&lin)
            .map(|(y, l)| y - problem.mean_y - l)
            .collect(),
        Family::Binomial => problem
            .y
            .iter()
            .zip(&lin)
            .map(|(y, l)| y - logistic(l + fit.intercept_std))
            .collect(),
    };
    let PenaltySpec { alpha, lambda } = fit.penalty;
    let mut worst: f64 = match fit.family {
        Family::Gaussian => 0.0,
        Family::Binomial => (resid.iter().sum::<f64>() / n).abs(),
    };
    for j in 0..design.p() {
        if design.constant[j] {
            continue;
        }
        let g = solver::dot(&design.cols[j], &resid) / n;
        let b = fit.beta_std[j];
        let v = if b == 0.0 {
            (g.abs() - lambda * alpha).max(0.0)
        } else {
            (g - lambda * alpha * b.signum() - lambda * (1.0 - alpha) * b).abs()
        };
        worst = worst.max(v);
    }
    Ok(worst)
}
