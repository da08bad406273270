//! Friedman #1 benchmark data and the simulation grid.
//!
//! `y = 10 sin(π x1 x2) + 20 (x3 − 0.5)² + 10 x4 + 5 x5 + ε` with every
//! predictor uniform on [0, 1]; predictors after the fifth are pure noise.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataframe::{Column, Dataset};
use crate::error::{Error, Result};
use crate::featgen::quantile;
use crate::gbt::{Learner, Task};
use crate::pipeline::{model_id, run_matrix, Evaluation, PipelineConfig, SelectionLabel};
use crate::regpath::SelectionMethod;
use crate::rng::{rng_from, substream};
use crate::tuner::{ParamDist, SearchSpace};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FriedmanSpec {
    pub n: usize,
    pub p: usize,
    pub noise_sd: f64,
    pub seed: u64,
}

impl FriedmanSpec {
    pub fn new(n: usize, p: usize, seed: u64) -> Self {
        FriedmanSpec {
            n,
            p,
            noise_sd: 1.0,
            seed,
        }
    }
}

/// Noise-free response of one row; only the first five entries are read.
pub fn friedman1_response(x: &[f64]) -> f64 {
    10.0 * (PI * x[0] * x[1]).sin() + 20.0 * (x[2] - 0.5).powi(2) + 10.0 * x[3] + 5.0 * x[4]
}

pub fn predictor_names(p: usize) -> Vec<String> {
    (1..=p).map(|j| format!("x{j}")).collect()
}

/// Draw `n` rows. Predictors are drawn row by row before the noise, so a
/// dataset with more noise predictors shares nothing with one with fewer
/// beyond the seed.
pub fn friedman1(spec: &FriedmanSpec) -> Result<Dataset> {
    if spec.p < 5 {
        return Err(Error::Config(format!("Friedman #1 needs p >= 5, got {}", spec.p)));
    }
    if !(spec.noise_sd >= 0.0 && spec.noise_sd.is_finite()) {
        return Err(Error::Config("noise_sd must be finite and >= 0".into()));
    }
    let mut rng = rng_from(spec.seed);
    let mut cols = vec![Vec::with_capacity(spec.n); spec.p];
    let mut y = Vec::with_capacity(spec.n);
    let mut row = vec![0.0; spec.p];
    for _ in 0..spec.n {
        for (j, v) in row.iter_mut().enumerate() {
            *v = rng.random::<f64>();
            cols[j].push(*v);
        }
        y.push(friedman1_response(&row));
    }
    if spec.noise_sd > 0.0 {
        let noise = Normal::new(0.0, spec.noise_sd).expect("valid normal");
        for v in y.iter_mut() {
            *v += noise.sample(&mut rng);
        }
    }
    let columns = predictor_names(spec.p)
        .into_iter()
        .zip(cols)
        .map(|(n, v)| Column::new(n, v))
        .collect();
    Dataset::new(columns, Some(Column::new("y", y)))
}

/// Binary variant: 1 where the response exceeds its sample median.
pub fn friedman1_classification(spec: &FriedmanSpec) -> Result<Dataset> {
    let d = friedman1(spec)?;
    let y = d.require_target()?;
    let median = quantile(y, 0.5);
    let labels = y.iter().map(|&v| f64::from(u8::from(v > median))).collect();
    d.with_target(Some(Column::new("y", labels)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRecord {
    pub model_id: String,
    pub n: usize,
    pub p: usize,
    pub replicate: usize,
    pub rmse: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub ns: Vec<usize>,
    pub ps: Vec<usize>,
    pub replicates: usize,
    pub seed: u64,
    pub noise_sd: f64,
    pub test_size: usize,
    /// Tuning and selection settings shared by every cell. The task is
    /// forced to regression and ridge keeps `min(p, 10)` features.
    pub pipeline: PipelineConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            ns: vec![200, 500, 1000],
            ps: vec![5, 10, 50],
            replicates: 30,
            seed: 1,
            noise_sd: 1.0,
            test_size: 1000,
            pipeline: desk_budget(),
        }
    }
}

/// Tuning budget for the grid on a single core: five random-search trials
/// over 3 folds, with ensembles capped at 250 trees of depth at most 6.
pub fn desk_budget() -> PipelineConfig {
    let trees = ParamDist::IntUniform { lo: 50, hi: 250 };
    let mut pc = PipelineConfig {
        k: 3,
        n_trials: 5,
        ..PipelineConfig::default()
    };
    for l in Learner::ALL {
        let mut space = SearchSpace::default().with("n_trees", trees);
        if l.is_boosted() {
            space = space.with("max_depth", ParamDist::IntUniform { lo: 2, hi: 6 });
        }
        pc.space_overrides.insert(l, space);
    }
    pc
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ns.is_empty() || self.ps.is_empty() || self.replicates == 0 {
            return Err(Error::Config("simulation grid is empty".into()));
        }
        if let Some(p) = self.ps.iter().find(|&&p| p < 5) {
            return Err(Error::Config(format!("Friedman #1 needs p >= 5, got {p}")));
        }
        if self.test_size == 0 {
            return Err(Error::Config("test_size must be positive".into()));
        }
        self.pipeline.validate()
    }

    /// Model ids one cell produces, in output order.
    pub fn model_ids(&self) -> Vec<String> {
        let pc = &self.pipeline;
        let mut ids = Vec::new();
        if pc.include_pure {
            ids.extend(
                SelectionMethod::ALL
                    .iter()
                    .map(|m| model_id(None, SelectionLabel::PureRegularized, Some(*m))),
            );
        }
        for &l in &pc.learners {
            if pc.include_full {
                ids.push(model_id(Some(l), SelectionLabel::None, None));
            }
            for &m in &pc.selections {
                ids.push(model_id(Some(l), m.into(), None));
            }
        }
        ids
    }
}

/// Train/test data and pipeline settings of one grid cell.
pub fn cell_inputs(cfg: &SimConfig, n: usize, p: usize, replicate: usize) -> Result<(Dataset, Dataset, PipelineConfig)> {
    let cell = substream(cfg.seed, &[n as u64, p as u64, replicate as u64]);
    let train = friedman1(&FriedmanSpec {
        n,
        p,
        noise_sd: cfg.noise_sd,
        seed: substream(cell, &[0]),
    })?;
    let test = friedman1(&FriedmanSpec {
        n: cfg.test_size,
        p,
        noise_sd: cfg.noise_sd,
        seed: substream(cell, &[1]),
    })?
    .with_row_ids((n..n + cfg.test_size).collect())?;
    let pipeline = PipelineConfig {
        task: Some(Task::Regression),
        seed: substream(cell, &[2]),
        ridge_top_m: Some(p.min(10)),
        ..cfg.pipeline.clone()
    };
    Ok((train, test, pipeline))
}

fn run_cell(cfg: &SimConfig, n: usize, p: usize, replicate: usize) -> Vec<SimRecord> {
    let outcome = cell_inputs(cfg, n, p, replicate).and_then(|(train, test, pc)| run_matrix(&train, &test, &pc));
    match outcome {
        Ok(out) => out
            .records
            .into_iter()
            .map(|r| SimRecord {
                rmse: match r.evaluation {
                    Some(Evaluation::Regression { rmse }) => Some(rmse),
                    _ => None,
                },
                model_id: r.model_id,
                n,
                p,
                replicate,
                error: r.error,
            })
            .collect(),
        Err(e) => {
            log::error!("simulation cell n={n} p={p} replicate={replicate} failed: {e}");
            cfg.model_ids()
                .into_iter()
                .map(|model_id| SimRecord {
                    model_id,
                    n,
                    p,
                    replicate,
                    rmse: None,
                    error: Some(e.to_string()),
                })
                .collect()
        }
    }
}

/// Every (n, p, replicate) cell, each with fresh training data, an
/// independent test set and its own seed substream. Output order is fixed:
/// n, then p, then replicate, then model.
pub fn run_simulation_grid(cfg: &SimConfig) -> Result<Vec<SimRecord>> {
    cfg.validate()?;
    let cells: Vec<(usize, usize, usize)> = cfg
        .ns
        .iter()
        .flat_map(|&n| {
            cfg.ps
                .iter()
                .flat_map(move |&p| (0..cfg.replicates).map(move |r| (n, p, r)))
        })
        .collect();
    let per_cell: Vec<Vec<SimRecord>> = cells
        .par_iter()
        .map(|&(n, p, r)| run_cell(cfg, n, p, r))
        .collect();
    Ok(per_cell.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmseSummary {
    pub model_id: String,
    pub mean: f64,
    /// Sample standard deviation (n − 1); 0 for a single record.
    pub std: f64,
    pub count: usize,
    pub failed: usize,
}

/// Per-model RMSE statistics, ascending by mean (ties by id). Failed records
/// are counted but excluded from the statistics.
pub fn summarize_rmse(records: &[SimRecord]) -> Result<Vec<RmseSummary>> {
    if records.is_empty() {
        return Err(Error::Input("no simulation records to summarize".into()));
    }
    let mut groups: BTreeMap<&str, (Vec<f64>, usize)> = BTreeMap::new();
    for r in records {
        let e = groups.entry(&r.model_id).or_default();
        match r.rmse {
            Some(v) if r.error.is_none() => e.0.push(v),
            _ => e.1 += 1,
        }
    }
    let mut out: Vec<RmseSummary> = groups
        .into_iter()
        .map(|(id, (vals, failed))| {
            let count = vals.len();
            let mean = if count == 0 { f64::NAN } else { vals.iter().sum::<f64>() / count as f64 };
            let std = if count > 1 {
                (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
            } else {
                0.0
            };
            RmseSummary {
                model_id: id.to_string(),
                mean,
                std,
                count,
                failed,
            }
        })
        .collect();
    out.sort_by(|a, b| a.mean.total_cmp(&b.mean).then_with(|| a.model_id.cmp(&b.model_id)));
    Ok(out)
}

/// Whether a model id names a boosted-tree learner (full or hybrid).
pub fn is_boosted_id(id: &str) -> bool {
    id.split('/')
        .next()
        .and_then(Learner::parse)
        .is_some_and(Learner::is_boosted)
}

/// Whether a model id names a pure penalized linear model.
pub fn is_pure_linear_id(id: &str) -> bool {
    SelectionMethod::parse(id).is_some()
}
