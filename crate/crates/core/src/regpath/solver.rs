//! Coordinate-descent kernels on an internally standardized design.
//!
//! Columns are centered and scaled so that `(1/n) * sum(x^2) = 1`. Under that
//! scaling the unweighted coordinate update has the closed form
//! `soft_threshold(<x_j, r>/n + beta_j, lambda*alpha) / (1 + lambda*(1-alpha))`.

use super::soft_threshold;

/// Columns standardized with the 1/n variance convention.
#[derive(Debug, Clone)]
pub(crate) struct Design {
    pub cols: Vec<Vec<f64>>,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    /// Columns with no spread: zeroed and excluded from updates.
    pub constant: Vec<bool>,
    pub n: usize,
}

impl Design {
    pub fn new(columns: &[&[f64]], n: usize) -> Design {
        let mut cols = Vec::with_capacity(columns.len());
        let mut means = Vec::with_capacity(columns.len());
        let mut scales = Vec::with_capacity(columns.len());
        let mut constant = Vec::with_capacity(columns.len());
        for &c in columns {
            let mean = if n == 0 { 0.0 } else { c.iter().sum::<f64>() / n as f64 };
            let has_spread = c.iter().any(|&v| v != c[0]);
            let ss: f64 = c.iter().map(|v| (v - mean) * (v - mean)).sum();
            let scale = (ss / n as f64).sqrt();
            if !has_spread || scale == 0.0 || !scale.is_finite() {
                cols.push(vec![0.0; n]);
                means.push(mean);
                scales.push(1.0);
                constant.push(true);
            } else {
                cols.push(c.iter().map(|v| (v - mean) / scale).collect());
                means.push(mean);
                scales.push(scale);
                constant.push(false);
            }
        }
        Design {
            cols,
            means,
            scales,
            constant,
            n,
        }
    }

    pub fn p(&self) -> usize {
        self.cols.len()
    }

    /// Largest `|<x_j, v>| / n` over columns.
    pub fn max_abs_corr(&self, v: &[f64]) -> f64 {
        self.cols
            .iter()
            .map(|c| (dot(c, v) / self.n as f64).abs())
            .fold(0.0, f64::max)
    }

    /// Standardized linear predictor without intercept.
    pub fn linear(&self, beta: &[f64]) -> Vec<f64> {
        let mut eta = vec![0.0; self.n];
        for (c, &b) in self.cols.iter().zip(beta) {
            if b != 0.0 {
                for (e, &x) in eta.iter_mut().zip(c) {
                    *e += b * x;
                }
            }
        }
        eta
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn penalty(beta: &[f64], lambda: f64, alpha: f64) -> f64 {
    let l1: f64 = beta.iter().map(|b| b.abs()).sum();
    let l2: f64 = beta.iter().map(|b| b * b).sum();
    lambda * (alpha * l1 + (1.0 - alpha) * l2 / 2.0)
}

pub(crate) struct CdOutcome {
    pub sweeps: usize,
    pub converged: bool,
}

/// One pass over `coords`; returns the largest absolute coefficient change.
fn gaussian_sweep(
    design: &Design,
    resid: &mut [f64],
    beta: &mut [f64],
    coords: impl Iterator<Item = usize>,
    lambda: f64,
    alpha: f64,
) -> f64 {
    let n = design.n as f64;
    let l1 = lambda * alpha;
    let denom = 1.0 + lambda * (1.0 - alpha);
    let mut max_change: f64 = 0.0;
    for j in coords {
        if design.constant[j] {
            continue;
        }
        let x = &design.cols[j];
        let old = beta[j];
        let z = dot(x, resid) / n + old;
        let new = soft_threshold(z, l1) / denom;
        if new != old {
            let delta = new - old;
            for (r, &xi) in resid.iter_mut().zip(x) {
                *r -= delta * xi;
            }
            beta[j] = new;
            max_change = max_change.max(delta.abs());
        }
    }
    max_change
}

/// Gaussian elastic net on centered response `yc`; `beta` is the warm start
/// and receives the solution. Full sweeps alternate with sweeps over the
/// active set until a full sweep moves no coefficient by `tol` or more.
#[allow(clippy::too_many_arguments)]
pub(crate) fn cd_gaussian(
    design: &Design,
    yc: &[f64],
    lambda: f64,
    alpha: f64,
    beta: &mut [f64],
    tol: f64,
    max_sweeps: usize,
    mut trace: Option<&mut Vec<f64>>,
) -> CdOutcome {
    let mut resid: Vec<f64> = yc.to_vec();
    let fitted = design.linear(beta);
    for (r, f) in resid.iter_mut().zip(&fitted) {
        *r -= f;
    }
    let p = design.p();
    let mut sweeps = 0;
    let mut record = |resid: &[f64], beta: &[f64]| {
        if let Some(t) = trace.as_deref_mut() {
            let rss: f64 = resid.iter().map(|r| r * r).sum();
            t.push(rss / (2.0 * design.n as f64) + penalty(beta, lambda, alpha));
        }
    };
    record(&resid, beta);
    while sweeps < max_sweeps {
        let change = gaussian_sweep(design, &mut resid, beta, 0..p, lambda, alpha);
        sweeps += 1;
        record(&resid, beta);
        if change < tol {
            return CdOutcome {
                sweeps,
                converged: true,
            };
        }
        loop {
            if sweeps >= max_sweeps {
                break;
            }
            let active: Vec<usize> = (0..p).filter(|&j| beta[j] != 0.0).collect();
            let change =
                gaussian_sweep(design, &mut resid, beta, active.into_iter(), lambda, alpha);
            sweeps += 1;
            if change < tol {
                break;
            }
        }
    }
    CdOutcome {
        sweeps,
        converged: false,
    }
}

/// Weighted coordinate descent for the IRLS inner problem
/// `(1/2n) sum w (z - b0 - X beta)^2 + penalty`. `resid` holds `z - eta` and is
/// kept in sync with `intercept` and `beta`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn cd_weighted(
    design: &Design,
    weights: &[f64],
    resid: &mut [f64],
    intercept: &mut f64,
    beta: &mut [f64],
    lambda: f64,
    alpha: f64,
    tol: f64,
    max_sweeps: usize,
) -> CdOutcome {
    let n = design.n as f64;
    let l1 = lambda * alpha;
    let l2 = lambda * (1.0 - alpha);
    let w_sum: f64 = weights.iter().sum();
    let curvature: Vec<f64> = design
        .cols
        .iter()
        .map(|c| c.iter().zip(weights).map(|(x, w)| w * x * x).sum::<f64>() / n)
        .collect();
    let p = design.p();

    let sweep = |resid: &mut [f64], intercept: &mut f64, beta: &mut [f64], active_only: bool| {
        let mut max_change: f64 = 0.0;
        let shift = dot(weights, resid) / w_sum;
        if shift != 0.0 {
            *intercept += shift;
            for r in resid.iter_mut() {
                *r -= shift;
            }
            max_change = max_change.max(shift.abs());
        }
        for j in 0..p {
            if design.constant[j] || (active_only && beta[j] == 0.0) {
                continue;
            }
            let x = &design.cols[j];
            let old = beta[j];
            let grad: f64 = x
                .iter()
                .zip(weights.iter().zip(resid.iter()))
                .map(|(xi, (w, r))| xi * w * r)
                .sum::<f64>()
                / n;
            let new = soft_threshold(grad + curvature[j] * old, l1) / (curvature[j] + l2);
            if new != old {
                let delta = new - old;
                for (r, &xi) in resid.iter_mut().zip(x) {
                    *r -= delta * xi;
                }
                beta[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        max_change
    };

    let mut sweeps = 0;
    while sweeps < max_sweeps {
        let change = sweep(resid, intercept, beta, false);
        sweeps += 1;
        if change < tol {
            return CdOutcome {
                sweeps,
                converged: true,
            };
        }
        while sweeps < max_sweeps {
            let change = sweep(resid, intercept, beta, true);
            sweeps += 1;
            if change < tol {
                break;
            }
        }
    }
    CdOutcome {
        sweeps,
        converged: false,
    }
}
