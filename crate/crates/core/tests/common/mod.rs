//! Independent reference implementations and random instance generators
//! shared by the integration tests and the acceptance suite.

#![allow(dead_code)]

use hybrid_select::dataframe::Dataset;
use hybrid_select::rng::rng_from;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Probability that a random positive outscores a random negative, ties
/// counting one half, by enumerating every pair.
pub fn brute_force_auc(labels: &[f64], scores: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &yi) in labels.iter().enumerate() {
        if yi != 1.0 {
            continue;
        }
        for (j, &yj) in labels.iter().enumerate() {
            if yj != 0.0 {
                continue;
            }
            den += 1.0;
            if scores[i] > scores[j] {
                num += 1.0;
            } else if scores[i] == scores[j] {
                num += 0.5;
            }
        }
    }
    num / den
}

/// Columns standardized with the 1/n variance, the solver's internal scale.
pub fn standardize_1n(cols: &[Vec<f64>]) -> Vec<Vec<f64>> {
    cols.iter()
        .map(|c| {
            let n = c.len() as f64;
            let m = c.iter().sum::<f64>() / n;
            let s = (c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt();
            c.iter().map(|v| (v - m) / s).collect()
        })
        .collect()
}

fn soft(z: f64, g: f64) -> f64 {
    z.signum() * (z.abs() - g).max(0.0)
}

/// Accelerated proximal gradient (FISTA) for the elastic net on already
/// standardized columns `x` and a centered response `y`:
/// minimize 1/(2n)‖y − Xb‖² + λ(α‖b‖₁ + (1−α)/2 ‖b‖²).
pub fn fista_gaussian(x: &[Vec<f64>], y: &[f64], alpha: f64, lambda: f64, iters: usize) -> Vec<f64> {
    let n = y.len() as f64;
    let p = x.len();
    // Lipschitz bound of the smooth part: trace of X'X/n plus the ridge term.
    let lip = x.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>() / n).sum::<f64>() + lambda * (1.0 - alpha);
    let step = 1.0 / lip;
    let mut b = vec![0.0; p];
    let mut z = b.clone();
    let mut t = 1.0f64;
    for _ in 0..iters {
        let r: Vec<f64> = (0..y.len())
            .map(|i| y[i] - (0..p).map(|j| x[j][i] * z[j]).sum::<f64>())
            .collect();
        let mut next = vec![0.0; p];
        for j in 0..p {
            let grad = -x[j].iter().zip(&r).map(|(a, b)| a * b).sum::<f64>() / n + lambda * (1.0 - alpha) * z[j];
            next[j] = soft(z[j] - step * grad, step * lambda * alpha);
        }
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        for j in 0..p {
            z[j] = next[j] + (t - 1.0) / t_next * (next[j] - b[j]);
        }
        b = next;
        t = t_next;
    }
    b
}

/// Proximal gradient for penalized logistic regression on standardized
/// columns with an unpenalized intercept. Returns (intercept, coefficients).
pub fn prox_logistic(x: &[Vec<f64>], y: &[f64], alpha: f64, lambda: f64, iters: usize) -> (f64, Vec<f64>) {
    let n = y.len() as f64;
    let p = x.len();
    let lip = 0.25 * (1.0 + x.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>() / n).sum::<f64>())
        + lambda * (1.0 - alpha);
    let step = 1.0 / lip;
    let mut b0 = 0.0;
    let mut b = vec![0.0; p];
    for _ in 0..iters {
        let r: Vec<f64> = (0..y.len())
            .map(|i| {
                let eta = b0 + (0..p).map(|j| x[j][i] * b[j]).sum::<f64>();
                1.0 / (1.0 + (-eta).exp()) - y[i]
            })
            .collect();
        b0 -= step * r.iter().sum::<f64>() / n;
        for j in 0..p {
            let grad = x[j].iter().zip(&r).map(|(a, b)| a * b).sum::<f64>() / n + lambda * (1.0 - alpha) * b[j];
            b[j] = soft(b[j] - step * grad, step * lambda * alpha);
        }
    }
    (b0, b)
}

pub fn normal_columns(n: usize, p: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng_from(seed);
    (0..p)
        .map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect()
}

/// Gaussian instance y = Xβ + noise with a few nonzero β.
pub fn gaussian_instance(n: usize, p: usize, seed: u64) -> Dataset {
    let cols = normal_columns(n, p, seed);
    let mut rng = rng_from(seed ^ 0x5eed);
    let beta: Vec<f64> = (0..p)
        .map(|j| if j < 3 { rng.random_range(-2.0..2.0) } else { 0.0 })
        .collect();
    let y: Vec<f64> = (0..n)
        .map(|i| {
            let e: f64 = StandardNormal.sample(&mut rng);
            (0..p).map(|j| cols[j][i] * beta[j]).sum::<f64>() + e
        })
        .collect();
    with_names(cols, y)
}

/// Logistic instance with both classes present and no perfect separation
/// in practice (moderate signal).
pub fn binomial_instance(n: usize, p: usize, seed: u64) -> Dataset {
    let cols = normal_columns(n, p, seed);
    let mut rng = rng_from(seed ^ 0xb10b);
    let beta: Vec<f64> = (0..p)
        .map(|j| if j < 2 { rng.random_range(-1.0..1.0) } else { 0.0 })
        .collect();
    let mut y: Vec<f64> = (0..n)
        .map(|i| {
            let eta: f64 = (0..p).map(|j| cols[j][i] * beta[j]).sum();
            f64::from(u8::from(rng.random::<f64>() < 1.0 / (1.0 + (-eta).exp())))
        })
        .collect();
    y[0] = 0.0;
    y[1] = 1.0;
    with_names(cols, y)
}

pub fn with_names(cols: Vec<Vec<f64>>, y: Vec<f64>) -> Dataset {
    Dataset::from_columns(
        cols.into_iter().enumerate().map(|(j, c)| (format!("x{}", j + 1), c)).collect(),
        Some(("y".to_string(), y)),
    )
    .unwrap()
}

pub fn columns_of(d: &Dataset) -> Vec<Vec<f64>> {
    d.columns().iter().map(|c| c.values.clone()).collect()
}

/// Synthetic raw travel-insurance rows with the column names and encodings
/// of the real table.
pub fn raw_insurance_csv(n: usize, seed: u64) -> String {
    let mut rng = rng_from(seed);
    let mut s = String::from(
        "Age,Employment.Type,GraduateOrNot,AnnualIncome,FamilyMembers,ChronicDiseases,FrequentFlyer,EverTravelledAbroad,TravelInsurance\n",
    );
    for _ in 0..n {
        let age = rng.random_range(25..=35);
        let private = rng.random_bool(0.7);
        let grad = rng.random_bool(0.85);
        let income = rng.random_range(3..=18) * 100_000;
        let family = rng.random_range(2..=9);
        let chronic = u8::from(rng.random_bool(0.28));
        let flyer = rng.random_bool(0.2);
        let abroad = rng.random_bool(0.2);
        let logit = -1.5 + 1.5 * f64::from(u8::from(abroad)) + (income as f64 - 900_000.0) / 400_000.0
            + 0.5 * f64::from(u8::from(flyer));
        let bought = u8::from(rng.random::<f64>() < 1.0 / (1.0 + (-logit).exp()));
        let yn = |b: bool| if b { "Yes" } else { "No" };
        s.push_str(&format!(
            "{age},{},{},{income},{family},{chronic},{},{},{bought}\n",
            if private { "Private Sector/Self Employed" } else { "Government Sector" },
            yn(grad),
            yn(flyer),
            yn(abroad),
        ));
    }
    s
}
