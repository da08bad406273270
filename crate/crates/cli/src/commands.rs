//! The four batch commands.

use std::collections::BTreeSet;
use std::fs;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use hybrid_select::dataframe::{
    load_csv_with_report, split_random, split_stratified, ColumnType, Dataset, IngestPolicy, IngestReport, Schema,
};
use hybrid_select::featgen::{insurance_schema, FeatureEngineer, FittedFeatures};
use hybrid_select::gbt::importance_gain;
use hybrid_select::pipeline::{auc_by_nvars, run_matrix, CurveModel, EvaluationRecord, MatrixOutput};
use hybrid_select::simgen::{run_simulation_grid, summarize_rmse, SimRecord};
use hybrid_select::{Error, Result};
use indexmap::IndexMap;
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::*;

/// What a command reports back to `main`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub out_dir: PathBuf,
    /// Records that carry an error marker.
    pub failures: usize,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.failures > 0 {
            3
        } else {
            0
        }
    }
}

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)
        .map_err(|e| Error::Config(format!("cannot create output directory {}: {e}", dir.display())))
}

/// Every header column typed numeric.
fn numeric_schema(path: &Path) -> Result<Schema> {
    let file = fs::File::open(path).map_err(|e| Error::Input(format!("cannot open {}: {e}", path.display())))?;
    let mut header = String::new();
    std::io::BufReader::new(file).read_line(&mut header)?;
    let names = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(header.as_bytes())
        .records()
        .next()
        .transpose()?
        .ok_or_else(|| Error::Input(format!("{} has no header", path.display())))?;
    Ok(names
        .iter()
        .fold(Schema::default(), |s, n| s.with(n.trim(), ColumnType::Numeric)))
}

fn schema_for(cfg: &RunConfig, input: &Path) -> Result<Schema> {
    match (&cfg.schema, cfg.raw) {
        (Some(p), _) => Schema::from_json_file(p),
        (None, true) => Ok(insurance_schema()),
        (None, false) => numeric_schema(input),
    }
}

#[derive(Serialize)]
struct EngineerReport<'a> {
    input: String,
    #[serde(flatten)]
    ingest: &'a IngestReport,
    n_columns: usize,
    fitted: &'a FittedFeatures,
}

/// Raw CSV to the engineered table. Statistics are fitted on the rows of
/// this file, so it should be a training file; `matrix --raw` fits inside
/// the training split instead.
pub fn cmd_engineer(cfg: &RunConfig, out_flag: Option<&Path>) -> Result<Outcome> {
    let input = cfg.validate_input()?;
    cfg.recipe.validate()?;
    let schema = match &cfg.schema {
        Some(p) => Schema::from_json_file(p)?,
        None => insurance_schema(),
    };
    let (raw, ingest) = load_csv_with_report(input, &schema, Some(cfg.target()), IngestPolicy::Lenient)?;
    if ingest.rows_rejected > 0 {
        log::warn!("{} of {} rows rejected", ingest.rows_rejected, ingest.rows_read);
    }
    let fitted = FeatureEngineer::fit(&raw, &cfg.recipe)?;
    let engineered = fitted.transform(&raw)?;
    let dir = cfg.output_dir(out_flag);
    prepare_dir(&dir)?;
    engineered.save_csv(dir.join(ENGINEERED_CSV))?;
    write_json(
        &dir.join(ENGINEER_REPORT_JSON),
        &EngineerReport {
            input: input.display().to_string(),
            ingest: &ingest,
            n_columns: engineered.n_features() + 1,
            fitted: &fitted,
        },
    )?;
    Ok(Outcome {
        out_dir: dir,
        failures: 0,
    })
}

/// Train/test splits ready for modeling, plus the fitted engineering when
/// the input was raw.
pub struct PreparedData {
    pub train: Dataset,
    pub test: Dataset,
    pub engineering: Option<FittedFeatures>,
}

pub fn prepare_matrix_data(cfg: &RunConfig) -> Result<PreparedData> {
    cfg.validate_matrix()?;
    let input = cfg.validate_input()?;
    let schema = schema_for(cfg, input)?;
    let (data, _) = load_csv_with_report(input, &schema, Some(cfg.target()), IngestPolicy::Strict)?;
    let (train, test) = if data.is_binary_target() {
        split_stratified(&data, cfg.test_fraction, cfg.split_seed()?)?
    } else {
        split_random(&data, cfg.test_fraction, cfg.split_seed()?)?
    };
    if !cfg.raw {
        return Ok(PreparedData {
            train,
            test,
            engineering: None,
        });
    }
    let fitted = FeatureEngineer::fit(&train, &cfg.recipe)?;
    Ok(PreparedData {
        train: fitted.transform(&train)?,
        test: fitted.transform(&test)?,
        engineering: Some(fitted),
    })
}

#[derive(Serialize)]
struct RunManifest<'a> {
    input: String,
    seed: u64,
    split_seed: u64,
    n_train: usize,
    n_test: usize,
    n_features: usize,
    n_records: usize,
    failures: usize,
    config: &'a RunConfig,
}

/// Scores of every successful model on the test split, in record order.
fn collect_scores(out: &MatrixOutput) -> IndexMap<String, Vec<f64>> {
    let mut scores = IndexMap::new();
    for g in &out.glm_runs {
        scores.insert(g.record.model_id.clone(), g.test_scores.clone());
    }
    for (id, run) in &out.learner_runs {
        scores.insert(id.clone(), run.test_scores.clone());
    }
    let order: Vec<&str> = out.records.iter().map(|r| r.model_id.as_str()).collect();
    scores.sort_by(|a, _, b, _| {
        let pos = |k: &str| order.iter().position(|o| *o == k).unwrap_or(usize::MAX);
        pos(a).cmp(&pos(b))
    });
    scores
}

pub fn cmd_matrix(cfg: &RunConfig, out_flag: Option<&Path>) -> Result<Outcome> {
    let data = prepare_matrix_data(cfg)?;
    let seed = cfg.seed()?;
    let pc = hybrid_select::pipeline::PipelineConfig {
        seed,
        ..cfg.matrix.clone()
    };
    let dir = cfg.output_dir(out_flag);
    prepare_dir(&dir)?;
    let mut out = run_matrix(&data.train, &data.test, &pc)?;

    if let Some(f) = &data.engineering {
        // Engineering saw exactly the training rows.
        let ok = f.n_train_rows == data.train.n_rows();
        for r in out.records.iter_mut() {
            r.leakage_audit.fitted_on_train_only &= ok;
        }
        write_json(&dir.join(ENGINEERING_JSON), f)?;
    }

    let failures = out.failures();
    write_records_jsonl(&dir.join(RECORDS_JSONL), &out.records)?;
    write_records_csv(&dir.join(RECORDS_CSV), &out.records)?;
    write_json(&dir.join(SELECTIONS_JSON), &out.selections)?;
    let cv: Vec<_> = out.glm_runs.iter().map(|g| (g.method, &g.cv)).collect();
    write_json(&dir.join(CV_CURVES_JSON), &cv)?;

    let y = data.test.require_target()?;
    let scores = collect_scores(&out);
    write_test_scores(&dir.join(TEST_SCORES_CSV), data.test.row_ids(), y, &scores)?;
    let classification = pc.task_for(&data.train) == hybrid_select::gbt::Task::Classification;
    if classification {
        write_roc(&dir.join(ROC_CSV), y, &scores)?;
    }

    let importance: Vec<(String, IndexMap<String, f64>)> = out
        .learner_runs
        .iter()
        .map(|(id, run)| (id.clone(), importance_gain(&run.model)))
        .collect();
    write_importance(&dir.join(IMPORTANCE_CSV), &importance)?;

    if classification && cfg.curves {
        let mut curves = Vec::new();
        for s in &out.selections {
            let alpha = pc.alpha(s.method);
            match auc_by_nvars(&data.train, &data.test, s, &CurveModel::Glm { alpha }, &out.folds, &pc) {
                Ok(c) => curves.push((s.method.name().to_string(), c)),
                Err(e) => log::warn!("{} curve skipped: {e}", s.method.name()),
            }
        }
        write_curves(&dir.join(AUC_BY_NVARS_CSV), &curves)?;
    }

    let timings: IndexMap<&str, f64> = out
        .records
        .iter()
        .map(|r| (r.model_id.as_str(), r.wall_seconds))
        .collect();
    write_json(&dir.join(TIMINGS_JSON), &timings)?;
    write_json(
        &dir.join(RUN_JSON),
        &RunManifest {
            input: cfg.input.as_deref().map(|p| p.display().to_string()).unwrap_or_default(),
            seed,
            split_seed: cfg.split_seed()?,
            n_train: data.train.n_rows(),
            n_test: data.test.n_rows(),
            n_features: data.train.n_features(),
            n_records: out.records.len(),
            failures,
            config: cfg,
        },
    )?;
    if failures > 0 {
        log::error!("{failures} of {} records failed", out.records.len());
    }
    Ok(Outcome { out_dir: dir, failures })
}

pub fn sim_summary(records: &[SimRecord]) -> Result<SimSummary> {
    let cells: BTreeSet<(usize, usize)> = records.iter().map(|r| (r.n, r.p)).collect();
    let cells = cells
        .into_iter()
        .map(|(n, p)| {
            let subset: Vec<SimRecord> = records.iter().filter(|r| r.n == n && r.p == p).cloned().collect();
            Ok(CellSummary {
                n,
                p,
                models: summarize_rmse(&subset)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SimSummary {
        overall: summarize_rmse(records)?,
        cells,
    })
}

pub fn cmd_simulate(cfg: &RunConfig, out_flag: Option<&Path>) -> Result<Outcome> {
    let sim = hybrid_select::simgen::SimConfig {
        seed: cfg.seed()?,
        ..cfg.simulation.clone()
    };
    sim.validate()?;
    let dir = cfg.output_dir(out_flag);
    prepare_dir(&dir)?;
    let records = run_simulation_grid(&sim)?;
    write_sim_records(&dir.join(SIM_RECORDS_CSV), &records)?;
    write_json(&dir.join(SIM_SUMMARY_JSON), &sim_summary(&records)?)?;
    let failures = records.iter().filter(|r| r.error.is_some() || r.rmse.is_none()).count();
    if failures > 0 {
        log::error!("{failures} of {} simulation records failed", records.len());
    }
    Ok(Outcome { out_dir: dir, failures })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"))
}

fn matrix_table(records: &[EvaluationRecord]) -> String {
    use hybrid_select::pipeline::Evaluation;
    let mut s = format!(
        "{:<24} {:>5} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}  {}\n",
        "model", "vars", "auc", "acc", "prec", "recall", "f1", "rmse", "hyperparameters"
    );
    for r in records {
        let (auc, acc, prec, rec, f1, rmse) = match &r.evaluation {
            Some(Evaluation::Classification { metrics: m, .. }) => {
                (m.auc, m.accuracy, m.precision, m.recall, m.f1, None)
            }
            Some(Evaluation::Regression { rmse }) => (None, None, None, None, None, Some(*rmse)),
            None => (None, None, None, None, None, None),
        };
        let tail = match &r.error {
            Some(e) => format!("FAILED: {e}"),
            None => hybrid_select::tuner::format_hyperparams(&r.hyperparams),
        };
        s.push_str(&format!(
            "{:<24} {:>5} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}  {}\n",
            r.model_id,
            r.n_selected,
            fmt_opt(auc),
            fmt_opt(acc),
            fmt_opt(prec),
            fmt_opt(rec),
            fmt_opt(f1),
            fmt_opt(rmse),
            tail
        ));
    }
    s
}

fn sim_table(summary: &SimSummary) -> String {
    let mut s = String::new();
    let block = |title: String, rows: &[hybrid_select::simgen::RmseSummary], s: &mut String| {
        s.push_str(&format!("{title}\n{:<4} {:<24} {:>8} {:>8} {:>6} {:>6}\n", "rank", "model", "mean", "std", "count", "failed"));
        for (i, r) in rows.iter().enumerate() {
            s.push_str(&format!(
                "{:<4} {:<24} {:>8.4} {:>8.4} {:>6} {:>6}\n",
                i + 1,
                r.model_id,
                r.mean,
                r.std,
                r.count,
                r.failed
            ));
        }
        s.push('\n');
    };
    for c in &summary.cells {
        block(format!("Test RMSE, n = {}, p = {}", c.n, c.p), &c.models, &mut s);
    }
    block("Test RMSE, all cells".to_string(), &summary.overall, &mut s);
    s
}

/// Text summary of whatever a run directory holds; writes `report.txt`
/// there and returns its contents.
pub fn cmd_report(dir: &Path) -> Result<String> {
    let records = dir.join(RECORDS_JSONL);
    let sims = dir.join(SIM_RECORDS_CSV);
    if !records.is_file() && !sims.is_file() {
        return Err(Error::Input(format!(
            "nothing to report in {}: missing {} and {}",
            dir.display(),
            RECORDS_JSONL,
            SIM_RECORDS_CSV
        )));
    }
    let mut text = String::new();
    if records.is_file() {
        let recs = read_records_jsonl(&records)?;
        let failed = recs.iter().filter(|r| !r.is_ok()).count();
        let leaks = recs.iter().filter(|r| !r.leakage_audit.passed()).count();
        text.push_str(&format!(
            "Comparison matrix: {} records, {failed} failed, {leaks} failing the leakage audit\n\n",
            recs.len()
        ));
        text.push_str(&matrix_table(&recs));
        text.push('\n');
    }
    if sims.is_file() {
        let recs = read_sim_records(&sims)?;
        text.push_str(&format!("Simulation: {} records\n\n", recs.len()));
        text.push_str(&sim_table(&sim_summary(&recs)?));
    }
    fs::write(dir.join(REPORT_TXT), &text)?;
    Ok(text)
}
