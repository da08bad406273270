//! Writers for the files a run leaves behind.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use hybrid_select::metrics::roc_points;
use hybrid_select::pipeline::{CurvePoint, EvaluationRecord, Evaluation};
use hybrid_select::simgen::{RmseSummary, SimRecord};
use hybrid_select::tuner::format_hyperparams;
use hybrid_select::Result;
use indexmap::IndexMap;
use serde::Serialize;

pub const RECORDS_JSONL: &str = "records.jsonl";
pub const RECORDS_CSV: &str = "records.csv";
pub const TEST_SCORES_CSV: &str = "test_scores.csv";
pub const ROC_CSV: &str = "roc.csv";
pub const SELECTIONS_JSON: &str = "selections.json";
pub const CV_CURVES_JSON: &str = "cv_curves.json";
pub const IMPORTANCE_CSV: &str = "importance.csv";
pub const AUC_BY_NVARS_CSV: &str = "auc_by_nvars.csv";
pub const ENGINEERING_JSON: &str = "engineering.json";
pub const RUN_JSON: &str = "run.json";
/// Wall-clock times; the only output that differs between reruns.
pub const TIMINGS_JSON: &str = "timings.json";
pub const SIM_RECORDS_CSV: &str = "sim_records.csv";
pub const SIM_SUMMARY_JSON: &str = "sim_summary.json";
pub const ENGINEERED_CSV: &str = "engineered.csv";
pub const ENGINEER_REPORT_JSON: &str = "engineer_report.json";
pub const REPORT_TXT: &str = "report.txt";

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_records_jsonl(path: &Path, records: &[EvaluationRecord]) -> Result<()> {
    let mut w = create(path)?;
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub const RECORD_COLUMNS: [&str; 22] = [
    "model_id",
    "learner",
    "selection",
    "n_selected",
    "auc",
    "accuracy",
    "precision",
    "recall",
    "specificity",
    "f1",
    "balanced_accuracy",
    "tp",
    "fn",
    "fp",
    "tn",
    "rmse",
    "cv_metric",
    "hyperparams",
    "selected",
    "leakage_ok",
    "seed",
    "error",
];

/// One flat row per record, classification and regression columns side by
/// side; cells that do not apply stay empty.
pub fn write_records_csv(path: &Path, records: &[EvaluationRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(RECORD_COLUMNS)?;
    for r in records {
        let mut metrics = vec![String::new(); 12];
        match &r.evaluation {
            Some(Evaluation::Classification { metrics: m, confusion: c }) => {
                metrics = vec![
                    opt(m.auc),
                    opt(m.accuracy),
                    opt(m.precision),
                    opt(m.recall),
                    opt(m.specificity),
                    opt(m.f1),
                    opt(m.balanced_accuracy),
                    c.tp.to_string(),
                    c.fn_.to_string(),
                    c.fp.to_string(),
                    c.tn.to_string(),
                    String::new(),
                ];
            }
            Some(Evaluation::Regression { rmse }) => metrics[11] = rmse.to_string(),
            None => {}
        }
        let mut row = vec![
            r.model_id.clone(),
            r.learner.clone(),
            r.selection.name().to_string(),
            r.n_selected.to_string(),
        ];
        row.extend(metrics);
        row.extend([
            opt(r.cv_metric),
            format_hyperparams(&r.hyperparams),
            r.selected.join(";"),
            r.leakage_audit.passed().to_string(),
            r.seed.to_string(),
            r.error.clone().unwrap_or_default(),
        ]);
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Test-split scores, one column per model, for external ROC plotting.
pub fn write_test_scores(
    path: &Path,
    row_ids: &[usize],
    y: &[f64],
    scores: &IndexMap<String, Vec<f64>>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let mut header = vec!["row_id".to_string(), "y".to_string()];
    header.extend(scores.keys().cloned());
    w.write_record(&header)?;
    for (i, (id, yi)) in row_ids.iter().zip(y).enumerate() {
        let mut row = vec![id.to_string(), yi.to_string()];
        row.extend(scores.values().map(|s| s[i].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_roc(path: &Path, y: &[f64], scores: &IndexMap<String, Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["model_id", "fpr", "tpr"])?;
    for (id, s) in scores {
        for (fpr, tpr) in roc_points(y, s)? {
            w.write_record([id.clone(), fpr.to_string(), tpr.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_importance(path: &Path, rows: &[(String, IndexMap<String, f64>)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["model_id", "feature", "gain"])?;
    for (id, imp) in rows {
        for (feature, gain) in imp {
            w.write_record([id.as_str(), feature.as_str(), &gain.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_curves(path: &Path, curves: &[(String, Vec<CurvePoint>)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["model_id", "n_vars", "auc"])?;
    for (id, points) in curves {
        for p in points {
            w.write_record([id.clone(), p.n_vars.to_string(), p.auc.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_sim_records(path: &Path, records: &[SimRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["model_id", "n", "p", "replicate", "rmse", "error"])?;
    for r in records {
        w.write_record([
            r.model_id.clone(),
            r.n.to_string(),
            r.p.to_string(),
            r.replicate.to_string(),
            opt(r.rmse),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sim_records(path: &Path) -> Result<Vec<SimRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in r.records() {
        let row = row?;
        let field = |k: usize| row.get(k).unwrap_or("");
        let num = |k: usize| -> Result<usize> {
            field(k)
                .parse()
                .map_err(|_| hybrid_select::Error::Input(format!("bad integer `{}` in {}", field(k), path.display())))
        };
        out.push(SimRecord {
            model_id: field(0).to_string(),
            n: num(1)?,
            p: num(2)?,
            replicate: num(3)?,
            rmse: field(4).parse().ok(),
            error: Some(field(5)).filter(|e| !e.is_empty()).map(str::to_string),
        });
    }
    Ok(out)
}

pub fn read_records_jsonl(path: &Path) -> Result<Vec<EvaluationRecord>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Into::into))
        .collect()
}

/// Summary rows for one grid cell.
#[derive(Debug, Clone, Serialize)]
pub struct CellSummary {
    pub n: usize,
    pub p: usize,
    pub models: Vec<RmseSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimSummary {
    pub overall: Vec<RmseSummary>,
    pub cells: Vec<CellSummary>,
}
