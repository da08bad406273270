//! Tabular data container, CSV ingestion, z-score standardization and
//! stratified partitioning.
//!
//! A [`Dataset`] is immutable: every transform returns a new container. Rows
//! carry stable ids (their position in the source file) so that train/test
//! separation can be audited after any number of transforms.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from;

/// A named numeric column.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

impl Column {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Column {
            name: name.into(),
            values,
        }
    }
}

/// Numeric feature matrix stored by column, with an optional target.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Column>,
    target: Option<Column>,
    row_ids: Vec<usize>,
    n_rows: usize,
}

impl Dataset {
    /// Build a dataset; row ids default to `0..n_rows`.
    pub fn new(columns: Vec<Column>, target: Option<Column>) -> Result<Self> {
        let n_rows = columns
            .first()
            .map(|c| c.values.len())
            .or_else(|| target.as_ref().map(|t| t.values.len()))
            .unwrap_or(0);
        let mut seen = HashSet::new();
        for c in columns.iter().chain(target.iter()) {
            if c.values.len() != n_rows {
                return Err(Error::Schema(format!(
                    "column `{}` has {} rows, expected {}",
                    c.name,
                    c.values.len(),
                    n_rows
                )));
            }
            if !seen.insert(c.name.as_str()) {
                return Err(Error::Schema(format!("duplicate column name `{}`", c.name)));
            }
        }
        Ok(Dataset {
            columns,
            target,
            row_ids: (0..n_rows).collect(),
            n_rows,
        })
    }

    /// Convenience constructor from `(name, values)` pairs.
    pub fn from_columns<S: Into<String>>(
        columns: Vec<(S, Vec<f64>)>,
        target: Option<(S, Vec<f64>)>,
    ) -> Result<Self> {
        Dataset::new(
            columns
                .into_iter()
                .map(|(n, v)| Column::new(n, v))
                .collect(),
            target.map(|(n, v)| Column::new(n, v)),
        )
    }

    /// Replace the row ids. Ids must be unique.
    pub fn with_row_ids(mut self, ids: Vec<usize>) -> Result<Self> {
        if ids.len() != self.n_rows {
            return Err(Error::Schema(format!(
                "{} row ids for {} rows",
                ids.len(),
                self.n_rows
            )));
        }
        let unique: HashSet<_> = ids.iter().collect();
        if unique.len() != ids.len() {
            return Err(Error::Schema("row ids are not unique".into()));
        }
        self.row_ids = ids;
        Ok(self)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.values.as_slice())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn feature_slices(&self) -> Vec<&[f64]> {
        self.columns.iter().map(|c| c.values.as_slice()).collect()
    }

    pub fn target(&self) -> Option<&[f64]> {
        self.target.as_ref().map(|t| t.values.as_slice())
    }

    pub fn target_name(&self) -> Option<&str> {
        self.target.as_ref().map(|t| t.name.as_str())
    }

    /// Target values, or an input error when the dataset has none.
    pub fn require_target(&self) -> Result<&[f64]> {
        self.target()
            .ok_or_else(|| Error::Input("dataset has no target column".into()))
    }

    pub fn row_ids(&self) -> &[usize] {
        &self.row_ids
    }

    /// True when a target exists and every value is exactly 0 or 1.
    pub fn is_binary_target(&self) -> bool {
        self.target()
            .map(|t| t.iter().all(|&v| v == 0.0 || v == 1.0))
            .unwrap_or(false)
    }

    /// Row positions of the negative and positive class.
    pub fn class_positions(&self) -> Result<(Vec<usize>, Vec<usize>)> {
        let y = self.require_target()?;
        if !self.is_binary_target() {
            return Err(Error::Stratification(
                "stratification needs a 0/1 target".into(),
            ));
        }
        let (mut neg, mut pos) = (Vec::new(), Vec::new());
        for (i, &v) in y.iter().enumerate() {
            if v == 1.0 {
                pos.push(i);
            } else {
                neg.push(i);
            }
        }
        Ok((neg, pos))
    }

    /// New dataset holding the given row positions, in the given order.
    pub fn select_rows(&self, positions: &[usize]) -> Dataset {
        let pick = |v: &[f64]| positions.iter().map(|&i| v[i]).collect::<Vec<_>>();
        Dataset {
            columns: self
                .columns
                .iter()
                .map(|c| Column::new(c.name.clone(), pick(&c.values)))
                .collect(),
            target: self
                .target
                .as_ref()
                .map(|t| Column::new(t.name.clone(), pick(&t.values))),
            row_ids: positions.iter().map(|&i| self.row_ids[i]).collect(),
            n_rows: positions.len(),
        }
    }

    /// New dataset restricted to the named features, in the given order.
    pub fn select_features<S: AsRef<str>>(&self, names: &[S]) -> Result<Dataset> {
        let columns = names
            .iter()
            .map(|n| {
                let n = n.as_ref();
                self.column(n)
                    .map(|v| Column::new(n, v.to_vec()))
                    .ok_or_else(|| Error::Schema(format!("missing column `{n}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            columns,
            target: self.target.clone(),
            row_ids: self.row_ids.clone(),
            n_rows: self.n_rows,
        })
    }

    /// New dataset with one feature appended or replaced.
    pub fn with_feature(&self, name: &str, values: Vec<f64>) -> Result<Dataset> {
        if values.len() != self.n_rows {
            return Err(Error::Schema(format!(
                "column `{name}` has {} rows, expected {}",
                values.len(),
                self.n_rows
            )));
        }
        if self.target_name() == Some(name) {
            return Err(Error::Schema(format!("`{name}` is the target column")));
        }
        let mut out = self.clone();
        match out.columns.iter_mut().find(|c| c.name == name) {
            Some(c) => c.values = values,
            None => out.columns.push(Column::new(name, values)),
        }
        Ok(out)
    }

    /// New dataset with the target replaced (or removed).
    pub fn with_target(&self, target: Option<Column>) -> Result<Dataset> {
        if let Some(t) = &target {
            if t.values.len() != self.n_rows {
                return Err(Error::Schema("target length mismatch".into()));
            }
            if self.column_index(&t.name).is_some() {
                return Err(Error::Schema(format!("duplicate column name `{}`", t.name)));
            }
        }
        let mut out = self.clone();
        out.target = target;
        Ok(out)
    }

    /// Write features followed by the target as CSV.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        if let Some(t) = &self.target {
            header.push(&t.name);
        }
        w.write_record(&header)?;
        let mut record = Vec::with_capacity(header.len());
        for i in 0..self.n_rows {
            record.clear();
            record.extend(self.columns.iter().map(|c| c.values[i].to_string()));
            if let Some(t) = &self.target {
                record.push(t.values[i].to_string());
            }
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

/// Declared type of a CSV column.
///
/// JSON form: `"numeric"`, `{"binary": ["Yes", "No"]}` (yes token first),
/// `{"categorical": ["a", "b", "c"]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnType {
    Numeric,
    Binary(String, String),
    Categorical(Vec<String>),
}

/// Map from column name to declared type. Columns of the file that are not
/// listed are ignored.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Schema {
    pub columns: IndexMap<String, ColumnType>,
}

impl Schema {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Schema> {
        let file = File::open(path.as_ref()).map_err(|e| {
            Error::Config(format!("cannot open schema {}: {e}", path.as_ref().display()))
        })?;
        let schema: Schema = serde_json::from_reader(BufReader::new(file))
            .map_err(|e| Error::Config(format!("invalid schema: {e}")))?;
        for (name, ty) in &schema.columns {
            if let ColumnType::Categorical(levels) = ty {
                if levels.is_empty() {
                    return Err(Error::Config(format!("categorical `{name}` has no levels")));
                }
            }
        }
        Ok(schema)
    }

    pub fn with(mut self, name: &str, ty: ColumnType) -> Self {
        self.columns.insert(name.to_string(), ty);
        self
    }
}

/// How rows that cannot be parsed are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IngestPolicy {
    /// Unparseable cells abort the load with a row-indexed error.
    Strict,
    /// Unparseable or ragged rows are skipped and counted.
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedRow {
    /// 1-based data row number (the header is not counted).
    pub row: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows_read: usize,
    pub rows_accepted: usize,
    pub rows_rejected: usize,
    pub rejected: Vec<RejectedRow>,
}

/// Load a CSV under a schema, aborting on any unparseable cell. Rows with
/// missing cells are skipped.
pub fn load_csv(path: impl AsRef<Path>, schema: &Schema, target: Option<&str>) -> Result<Dataset> {
    load_csv_with_report(path, schema, target, IngestPolicy::Strict).map(|(d, _)| d)
}

pub fn load_csv_with_report(
    path: impl AsRef<Path>,
    schema: &Schema,
    target: Option<&str>,
    policy: IngestPolicy,
) -> Result<(Dataset, IngestReport)> {
    let path = path.as_ref();
    let file = File::open(path)
        .map_err(|e| Error::Input(format!("cannot open {}: {e}", path.display())))?;
    read_csv(BufReader::new(file), schema, target, policy)
}

/// Output columns produced for one schema column.
fn encoded_names(name: &str, ty: &ColumnType) -> Vec<String> {
    match ty {
        ColumnType::Numeric | ColumnType::Binary(..) => vec![name.to_string()],
        ColumnType::Categorical(levels) => {
            let mut sorted = levels.clone();
            sorted.sort();
            sorted.dedup();
            sorted
                .iter()
                .skip(1)
                .map(|l| format!("{name}={l}"))
                .collect()
        }
    }
}

fn encode_cell(name: &str, ty: &ColumnType, raw: &str) -> std::result::Result<Vec<f64>, String> {
    let cell = raw.trim();
    match ty {
        ColumnType::Numeric => match cell.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(vec![v]),
            _ => Err(format!("`{cell}` is not a finite number")),
        },
        ColumnType::Binary(yes, no) => {
            if cell == yes {
                Ok(vec![1.0])
            } else if cell == no {
                Ok(vec![0.0])
            } else {
                Err(format!("`{cell}` is neither `{yes}` nor `{no}`"))
            }
        }
        ColumnType::Categorical(levels) => {
            let mut sorted = levels.clone();
            sorted.sort();
            sorted.dedup();
            let Some(pos) = sorted.iter().position(|l| l == cell) else {
                return Err(format!("`{cell}` is not a declared level of `{name}`"));
            };
            Ok((1..sorted.len()).map(|j| if j == pos { 1.0 } else { 0.0 }).collect())
        }
    }
}

pub fn read_csv<R: std::io::Read>(
    reader: R,
    schema: &Schema,
    target: Option<&str>,
    policy: IngestPolicy,
) -> Result<(Dataset, IngestReport)> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .has_headers(true)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].trim().is_empty()) {
        return Err(Error::Input("empty file: no header row".into()));
    }
    let header_names: Vec<&str> = header.iter().map(str::trim).collect();

    let mut plan = Vec::new();
    for (name, ty) in &schema.columns {
        let Some(pos) = header_names.iter().position(|h| h == name) else {
            return Err(Error::Schema(format!("column `{name}` declared in schema is missing from header")));
        };
        plan.push((name.as_str(), ty, pos));
    }
    if let Some(t) = target {
        match schema.columns.get(t) {
            None => return Err(Error::Schema(format!("target `{t}` is not declared in schema"))),
            Some(ColumnType::Categorical(_)) => {
                return Err(Error::Schema(format!("target `{t}` cannot be categorical")))
            }
            Some(_) => {}
        }
    }

    let mut feature_names = Vec::new();
    for &(name, ty, _) in &plan {
        if Some(name) != target {
            feature_names.extend(encoded_names(name, ty));
        }
    }
    let mut features: Vec<Vec<f64>> = vec![Vec::new(); feature_names.len()];
    let mut target_values = Vec::new();
    let mut row_ids = Vec::new();
    let mut report = IngestReport::default();

    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        report.rows_read += 1;
        let record = match record {
            Ok(r) => r,
            Err(e) => match policy {
                IngestPolicy::Strict => {
                    return Err(Error::Parse {
                        row,
                        column: String::new(),
                        message: e.to_string(),
                    })
                }
                IngestPolicy::Lenient => {
                    report.rejected.push(RejectedRow {
                        row,
                        reason: e.to_string(),
                    });
                    continue;
                }
            },
        };
        if record.len() != header.len() {
            let reason = format!("{} fields, header has {}", record.len(), header.len());
            match policy {
                IngestPolicy::Strict => {
                    return Err(Error::Parse {
                        row,
                        column: String::new(),
                        message: reason,
                    })
                }
                IngestPolicy::Lenient => {
                    report.rejected.push(RejectedRow { row, reason });
                    continue;
                }
            }
        }
        if let Some(&(name, _, _)) = plan.iter().find(|(_, _, p)| record[*p].trim().is_empty()) {
            report.rejected.push(RejectedRow {
                row,
                reason: format!("missing value in `{name}`"),
            });
            continue;
        }
        let mut encoded = Vec::with_capacity(feature_names.len());
        let mut y = None;
        let mut failure = None;
        for &(name, ty, pos) in &plan {
            match encode_cell(name, ty, &record[pos]) {
                Ok(vals) if Some(name) == target => y = Some(vals[0]),
                Ok(vals) => encoded.extend(vals),
                Err(message) => {
                    failure = Some((name, message));
                    break;
                }
            }
        }
        if let Some((name, message)) = failure {
            match policy {
                IngestPolicy::Strict => {
                    return Err(Error::Parse {
                        row,
                        column: name.to_string(),
                        message,
                    })
                }
                IngestPolicy::Lenient => {
                    report.rejected.push(RejectedRow {
                        row,
                        reason: format!("`{name}`: {message}"),
                    });
                    continue;
                }
            }
        }
        for (col, v) in features.iter_mut().zip(encoded) {
            col.push(v);
        }
        if let Some(v) = y {
            target_values.push(v);
        }
        row_ids.push(i);
    }
    report.rows_rejected = report.rejected.len();
    report.rows_accepted = row_ids.len();

    let columns = feature_names
        .into_iter()
        .zip(features)
        .map(|(n, v)| Column::new(n, v))
        .collect();
    let target_col = target.map(|t| Column::new(t, target_values));
    let data = Dataset::new(columns, target_col)?.with_row_ids(row_ids)?;
    Ok((data, report))
}

// ---------------------------------------------------------------------------
// Standardization
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnScaling {
    pub name: String,
    pub mean: f64,
    pub std: f64,
    /// Set when the fitted column had no spread; `std` is then 1.
    pub constant: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StandardizationParams {
    pub columns: Vec<ColumnScaling>,
}

impl StandardizationParams {
    pub fn get(&self, name: &str) -> Option<&ColumnScaling> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn constant_columns(&self) -> Vec<&str> {
        self.columns
            .iter()
            .filter(|c| c.constant)
            .map(|c| c.name.as_str())
            .collect()
    }
}

/// Sample mean and standard deviation (n - 1 denominator). Columns with no
/// spread, or fewer than two values, are flagged constant with std 1.
pub fn column_scaling(name: &str, values: &[f64]) -> ColumnScaling {
    let n = values.len();
    let mean = if n == 0 {
        0.0
    } else {
        values.iter().sum::<f64>() / n as f64
    };
    let spread = values
        .iter()
        .any(|&v| v != values[0]);
    if n < 2 || !spread {
        return ColumnScaling {
            name: name.to_string(),
            mean,
            std: 1.0,
            constant: true,
        };
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    ColumnScaling {
        name: name.to_string(),
        mean,
        std: var.sqrt(),
        constant: false,
    }
}

/// Z-score the listed columns. Returns the transformed copy and the fitted
/// parameters for replay on other splits.
pub fn standardize<S: AsRef<str>>(
    d: &Dataset,
    cols: &[S],
) -> Result<(Dataset, StandardizationParams)> {
    let mut params = StandardizationParams::default();
    for name in cols {
        let name = name.as_ref();
        let values = d
            .column(name)
            .ok_or_else(|| Error::Schema(format!("missing column `{name}`")))?;
        let scaling = column_scaling(name, values);
        if scaling.constant {
            log::warn!("column `{name}` is constant; centered only");
        }
        params.columns.push(scaling);
    }
    let out = apply_standardization(&params, d)?;
    Ok((out, params))
}

/// Replay fitted parameters: `(x - mean) / std` for every parameter column.
pub fn apply_standardization(p: &StandardizationParams, d: &Dataset) -> Result<Dataset> {
    let mut out = d.clone();
    for s in &p.columns {
        let idx = out
            .column_index(&s.name)
            .ok_or_else(|| Error::Schema(format!("missing column `{}`", s.name)))?;
        for v in out.columns[idx].values.iter_mut() {
            *v = (*v - s.mean) / s.std;
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Splitting
// ---------------------------------------------------------------------------

/// Stratified train/test split. The test split holds `floor(n * fraction)`
/// rows; each class contributes the floor of its proportional share, and the
/// leftover rows go to classes picked by a seeded shuffle.
pub fn split_stratified(d: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let (neg, pos) = d.class_positions()?;
    for (label, rows) in [("0", &neg), ("1", &pos)] {
        if rows.len() < 2 {
            return Err(Error::Stratification(format!(
                "class {label} has {} rows; at least 2 are needed",
                rows.len()
            )));
        }
    }
    let n_test = (d.n_rows() as f64 * test_fraction).floor() as usize;
    let shares = [neg.len() as f64 * test_fraction, pos.len() as f64 * test_fraction];
    let mut counts = [shares[0].floor() as usize, shares[1].floor() as usize];
    let mut rng = rng_from(seed);
    let mut leftover = n_test.saturating_sub(counts[0] + counts[1]);
    let mut order = [0usize, 1];
    order.shuffle(&mut rng);
    for &c in &order {
        if leftover > 0 && shares[c] > counts[c] as f64 {
            counts[c] += 1;
            leftover -= 1;
        }
    }

    let mut test_mask = vec![false; d.n_rows()];
    for (class_rows, &count) in [&neg, &pos].into_iter().zip(&counts) {
        let mut rows = class_rows.clone();
        rows.shuffle(&mut rng);
        for &r in &rows[..count] {
            test_mask[r] = true;
        }
    }
    Ok(partition_by_mask(d, &test_mask))
}

/// Unstratified train/test split for continuous targets.
pub fn split_random(d: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let n_test = (d.n_rows() as f64 * test_fraction).floor() as usize;
    let mut rows: Vec<usize> = (0..d.n_rows()).collect();
    rows.shuffle(&mut rng_from(seed));
    let mut test_mask = vec![false; d.n_rows()];
    for &r in &rows[..n_test] {
        test_mask[r] = true;
    }
    Ok(partition_by_mask(d, &test_mask))
}

fn partition_by_mask(d: &Dataset, test_mask: &[bool]) -> (Dataset, Dataset) {
    let train: Vec<usize> = (0..d.n_rows()).filter(|&i| !test_mask[i]).collect();
    let test: Vec<usize> = (0..d.n_rows()).filter(|&i| test_mask[i]).collect();
    (d.select_rows(&train), d.select_rows(&test))
}

/// Fold index of every row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub fold_of_row: Vec<usize>,
}

impl FoldAssignment {
    /// Positions of rows in fold `f`.
    pub fn validation_rows(&self, f: usize) -> Vec<usize> {
        (0..self.fold_of_row.len())
            .filter(|&i| self.fold_of_row[i] == f)
            .collect()
    }

    /// Positions of rows outside fold `f`.
    pub fn training_rows(&self, f: usize) -> Vec<usize> {
        (0..self.fold_of_row.len())
            .filter(|&i| self.fold_of_row[i] != f)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.fold_of_row {
            sizes[f] += 1;
        }
        sizes
    }
}

/// K-fold assignment. Binary targets are stratified: each class is shuffled
/// and dealt round-robin, continuing the deal across classes, so every fold
/// holds the floor or ceiling of each class's proportional share. Other
/// targets get a shuffled round-robin deal.
///
/// Leave-one-out (`k == n`) skips the per-class size check, since each fold
/// trivially holds a single row.
pub fn kfold_stratified(d: &Dataset, k: usize, seed: u64) -> Result<FoldAssignment> {
    let n = d.n_rows();
    if k < 2 {
        return Err(Error::Config(format!("k must be at least 2, got {k}")));
    }
    if k > n {
        return Err(Error::Stratification(format!("{k} folds requested for {n} rows")));
    }
    let mut rng = rng_from(seed);
    let groups: Vec<Vec<usize>> = if d.is_binary_target() {
        let (neg, pos) = d.class_positions()?;
        if k < n {
            for (label, rows) in [("0", &neg), ("1", &pos)] {
                if !rows.is_empty() && rows.len() < k {
                    return Err(Error::Stratification(format!(
                        "class {label} has {} rows, fewer than k = {k}",
                        rows.len()
                    )));
                }
            }
        }
        vec![neg, pos]
    } else {
        vec![(0..n).collect()]
    };
    let mut fold_of_row = vec![0usize; n];
    let mut next: usize = rng.random_range(0..k);
    for mut rows in groups {
        rows.shuffle(&mut rng);
        for r in rows {
            fold_of_row[r] = next;
            next = (next + 1) % k;
        }
    }
    Ok(FoldAssignment { k, fold_of_row })
}
