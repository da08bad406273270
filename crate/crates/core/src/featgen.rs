//! Engineered features for the travel-insurance table.
//!
//! Eight raw predictors are expanded to 34 features (35 columns with the
//! target). Every statistic a derived column depends on (quantiles, z-score
//! moments, k-means centroids, group means of the target) is fitted once by
//! [`FeatureEngineer::fit`] and then replayed unchanged by
//! [`FittedFeatures::transform`], so test rows never influence their own
//! encoding.

use std::collections::BTreeMap;

use indexmap::IndexMap;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataframe::{column_scaling, Column, ColumnScaling, ColumnType, Dataset, Schema};
use crate::error::{Error, Result};
use crate::rng::rng_from;

pub const AGE: &str = "Age";
pub const ANNUAL_INCOME: &str = "AnnualIncome";
pub const FAMILY_MEMBERS: &str = "FamilyMembers";
pub const GRADUATE: &str = "GraduateOrNot";
pub const EMPLOYMENT: &str = "Employment.Type";
pub const CHRONIC: &str = "ChronicDiseases";
pub const FREQUENT_FLYER: &str = "FrequentFlyer";
pub const TRAVELLED_ABROAD: &str = "EverTravelledAbroad";
pub const TARGET: &str = "TravelInsurance";

pub const RAW_PREDICTORS: [&str; 8] = [
    AGE,
    ANNUAL_INCOME,
    FAMILY_MEMBERS,
    GRADUATE,
    EMPLOYMENT,
    CHRONIC,
    FREQUENT_FLYER,
    TRAVELLED_ABROAD,
];

pub const DERIVED: [&str; 26] = [
    "IncomePerCapita",
    "HighIncome",
    "AgeNormalized",
    "HighChronicDiseases",
    "TravelFrequency",
    "PrivateEmployment",
    "LowDependence",
    "IncomeByAge",
    "AgeGroup",
    "HighIncomeTraveler",
    "HighIncome90",
    "IncomePerCapitaNorm",
    "ExperiencedTraveler",
    "LargeFamily",
    "ChronicByAge",
    "InsuranceScore",
    "FinancialDependence",
    "TravelScore",
    "WorkExperience",
    "StableJob",
    "AdjustedTravelIncome",
    "RiskScore",
    "RiskScoreNorm",
    "ClusterScore",
    "ClusterInsuranceRate",
    "MovingAvgInsurance",
];

/// Names of the 34 engineered features in output order.
pub fn engineered_feature_names() -> Vec<&'static str> {
    RAW_PREDICTORS.iter().chain(DERIVED.iter()).copied().collect()
}

/// Schema for the raw insurance CSV. `Employment.Type` is encoded 1 for the
/// private sector / self-employed level and 0 for government.
pub fn insurance_schema() -> Schema {
    let yes_no = || ColumnType::Binary("Yes".into(), "No".into());
    Schema::default()
        .with(AGE, ColumnType::Numeric)
        .with(EMPLOYMENT, ColumnType::Binary("Private Sector/Self Employed".into(), "Government Sector".into()))
        .with(GRADUATE, yes_no())
        .with(ANNUAL_INCOME, ColumnType::Numeric)
        .with(FAMILY_MEMBERS, ColumnType::Numeric)
        .with(CHRONIC, ColumnType::Numeric)
        .with(FREQUENT_FLYER, yes_no())
        .with(TRAVELLED_ABROAD, yes_no())
        .with(TARGET, ColumnType::Numeric)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PercentileThresholds {
    pub high_income: f64,
    pub high_income90: f64,
    pub large_family: f64,
}

impl Default for PercentileThresholds {
    fn default() -> Self {
        PercentileThresholds {
            high_income: 0.75,
            high_income90: 0.90,
            large_family: 0.75,
        }
    }
}

/// Tunable constants of the derived features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureRecipe {
    /// Weights over `income`, `chronic`, `travel_frequency`, `experience`.
    pub insurance_score_weights: IndexMap<String, f64>,
    /// Weights over `chronic`, `age`, `travel_frequency`.
    pub risk_score_weights: IndexMap<String, f64>,
    /// Age cut points; `None` uses the quartiles of the training ages.
    pub age_group_bounds: Option<Vec<f64>>,
    pub kmeans_k: usize,
    pub kmeans_seed: u64,
    pub percentile_thresholds: PercentileThresholds,
    pub travel_score_frequent_flyer: f64,
    pub travel_score_abroad: f64,
    pub graduate_start_age: f64,
    pub non_graduate_start_age: f64,
    pub low_dependence_max_family: f64,
}

fn equal_weights(keys: &[&str]) -> IndexMap<String, f64> {
    keys.iter().map(|k| (k.to_string(), 1.0)).collect()
}

const INSURANCE_KEYS: [&str; 4] = ["income", "chronic", "travel_frequency", "experience"];
const RISK_KEYS: [&str; 3] = ["chronic", "age", "travel_frequency"];

impl Default for FeatureRecipe {
    fn default() -> Self {
        FeatureRecipe {
            insurance_score_weights: equal_weights(&INSURANCE_KEYS),
            risk_score_weights: equal_weights(&RISK_KEYS),
            age_group_bounds: None,
            kmeans_k: 4,
            kmeans_seed: 7,
            percentile_thresholds: PercentileThresholds::default(),
            travel_score_frequent_flyer: 1.0,
            travel_score_abroad: 2.0,
            graduate_start_age: 22.0,
            non_graduate_start_age: 18.0,
            low_dependence_max_family: 3.0,
        }
    }
}

impl FeatureRecipe {
    pub fn validate(&self) -> Result<()> {
        check_weights("insurance_score_weights", &self.insurance_score_weights, &INSURANCE_KEYS)?;
        check_weights("risk_score_weights", &self.risk_score_weights, &RISK_KEYS)?;
        if let Some(b) = &self.age_group_bounds {
            if b.iter().any(|v| !v.is_finite()) || b.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Config("age_group_bounds must be finite and strictly increasing".into()));
            }
        }
        if self.kmeans_k == 0 {
            return Err(Error::Config("kmeans_k must be at least 1".into()));
        }
        let t = &self.percentile_thresholds;
        for q in [t.high_income, t.high_income90, t.large_family] {
            if !(q > 0.0 && q < 1.0) {
                return Err(Error::Config(format!("percentile threshold {q} outside (0, 1)")));
            }
        }
        Ok(())
    }

    fn normalized(weights: &IndexMap<String, f64>, keys: &[&str]) -> Vec<f64> {
        let w: Vec<f64> = keys.iter().map(|k| weights[*k]).collect();
        let total: f64 = w.iter().sum();
        w.iter().map(|v| v / total).collect()
    }
}

fn check_weights(label: &str, w: &IndexMap<String, f64>, keys: &[&str]) -> Result<()> {
    for k in keys {
        match w.get(*k) {
            Some(v) if v.is_finite() => {}
            Some(_) => return Err(Error::Config(format!("{label}.{k} is not finite"))),
            None => return Err(Error::Config(format!("{label} is missing `{k}`"))),
        }
    }
    if let Some(extra) = w.keys().find(|k| !keys.contains(&k.as_str())) {
        return Err(Error::Config(format!("{label} has unknown key `{extra}`")));
    }
    if w.values().sum::<f64>() == 0.0 {
        return Err(Error::Config(format!("{label} sums to zero")));
    }
    Ok(())
}

/// Empirical quantile with linear interpolation between order statistics.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of an empty column");
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    let h = (s.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(s.len() - 1);
    s[lo] + (h - lo as f64) * (s[hi] - s[lo])
}

/// 1 where the value exceeds the `q`-quantile of `col`, else 0.
pub fn percentile_flag(col: &[f64], q: f64) -> Vec<f64> {
    let t = quantile(col, q);
    flag_above(col, t)
}

fn flag_above(col: &[f64], threshold: f64) -> Vec<f64> {
    col.iter().map(|&v| f64::from(u8::from(v > threshold))).collect()
}

/// Per-group means of a value column, with the overall mean as fallback for
/// groups never seen during fitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupMeans<K: Ord> {
    pub means: BTreeMap<K, f64>,
    pub global: f64,
}

impl<K: Ord + Clone> GroupMeans<K> {
    pub fn fit(groups: &[K], values: &[f64]) -> GroupMeans<K> {
        let mut acc: BTreeMap<K, (f64, usize)> = BTreeMap::new();
        for (g, &v) in groups.iter().zip(values) {
            let e = acc.entry(g.clone()).or_insert((0.0, 0));
            e.0 += v;
            e.1 += 1;
        }
        let global = if values.is_empty() {
            0.0
        } else {
            values.iter().sum::<f64>() / values.len() as f64
        };
        GroupMeans {
            means: acc.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect(),
            global,
        }
    }

    pub fn apply(&self, groups: &[K]) -> Vec<f64> {
        groups
            .iter()
            .map(|g| self.means.get(g).copied().unwrap_or(self.global))
            .collect()
    }
}

/// Group-mean column of `value` keyed by `group`, fitted on the same rows.
pub fn moving_avg_by_group(d: &Dataset, group: &str, value: &str) -> Result<Vec<f64>> {
    let g = lookup(d, group)?;
    let v = if d.target_name() == Some(value) {
        d.require_target()?
    } else {
        lookup(d, value)?
    };
    let keys: Vec<i64> = g.iter().map(|x| x.round() as i64).collect();
    Ok(GroupMeans::fit(&keys, v).apply(&keys))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansModel {
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    /// Within-cluster sum of squares after each assignment step.
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
}

impl KMeansModel {
    pub fn inertia(&self) -> f64 {
        *self.inertia_history.last().unwrap_or(&0.0)
    }

    /// Index of the nearest centroid; ties go to the lower index.
    pub fn predict_one(&self, x: &[f64]) -> usize {
        nearest(&self.centroids, x).0
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(centroids: &[Vec<f64>], x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, mu) in centroids.iter().enumerate() {
        let d = sq_dist(mu, x);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

pub const KMEANS_MAX_ITER: usize = 100;

/// Lloyd's algorithm from a k-means++ start. Clusters are relabeled so that
/// centroids are in ascending lexicographic order, which makes labels
/// independent of the initialization path.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> Result<KMeansModel> {
    let n = points.len();
    if k == 0 || n < k {
        return Err(Error::Input(format!("k-means needs 1 <= k <= n, got k = {k}, n = {n}")));
    }
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Input("k-means points must be finite".into()));
    }
    let mut rng = rng_from(seed);

    // k-means++ seeding
    let mut centroids = vec![points[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut idx = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if u < w {
                    idx = i;
                    break;
                }
                u -= w;
            }
            idx
        } else {
            rng.random_range(0..n)
        };
        centroids.push(points[pick].clone());
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, &centroids[centroids.len() - 1]));
        }
    }

    let dim = points[0].len();
    let mut assignments = vec![usize::MAX; n];
    let mut history = Vec::new();
    let mut iterations = 0;
    while iterations < KMEANS_MAX_ITER {
        iterations += 1;
        let mut changed = false;
        let mut inertia = 0.0;
        for (i, p) in points.iter().enumerate() {
            let (c, d) = nearest(&centroids, p);
            inertia += d;
            if assignments[i] != c {
                assignments[i] = c;
                changed = true;
            }
        }
        history.push(inertia);
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &c) in points.iter().zip(&assignments) {
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            } else {
                // Reseed an empty cluster at the point farthest from where it was.
                let far = (0..n)
                    .max_by(|&a, &b| {
                        sq_dist(&points[a], &centroids[c])
                            .total_cmp(&sq_dist(&points[b], &centroids[c]))
                            .then(b.cmp(&a))
                    })
                    .expect("n >= k >= 1");
                centroids[c] = points[far].clone();
            }
        }
    }

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        centroids[a]
            .iter()
            .zip(&centroids[b])
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut relabel = vec![0; k];
    for (new, &old) in order.iter().enumerate() {
        relabel[old] = new;
    }
    Ok(KMeansModel {
        centroids: order.iter().map(|&c| centroids[c].clone()).collect(),
        assignments: assignments.iter().map(|&c| relabel[c]).collect(),
        inertia_history: history,
        iterations,
    })
}

/// Raw predictors pulled out of a dataset, with division guards applied
/// where a derived feature divides by them.
struct Raw<'a> {
    age: &'a [f64],
    income: &'a [f64],
    family: &'a [f64],
    graduate: &'a [f64],
    employment: &'a [f64],
    chronic: &'a [f64],
    flyer: &'a [f64],
    abroad: &'a [f64],
}

fn lookup<'a>(d: &'a Dataset, name: &str) -> Result<&'a [f64]> {
    d.column(name)
        .ok_or_else(|| Error::Schema(format!("missing column `{name}`")))
}

impl<'a> Raw<'a> {
    fn from(d: &'a Dataset) -> Result<Raw<'a>> {
        Ok(Raw {
            age: lookup(d, AGE)?,
            income: lookup(d, ANNUAL_INCOME)?,
            family: lookup(d, FAMILY_MEMBERS)?,
            graduate: lookup(d, GRADUATE)?,
            employment: lookup(d, EMPLOYMENT)?,
            chronic: lookup(d, CHRONIC)?,
            flyer: lookup(d, FREQUENT_FLYER)?,
            abroad: lookup(d, TRAVELLED_ABROAD)?,
        })
    }

    fn n(&self) -> usize {
        self.age.len()
    }

    fn travel_frequency(&self) -> Vec<f64> {
        self.flyer
            .iter()
            .zip(self.abroad)
            .map(|(&f, &a)| f64::from(u8::from(f > 0.0 || a > 0.0)))
            .collect()
    }

    fn income_per_capita(&self) -> Vec<f64> {
        self.income
            .iter()
            .zip(self.family)
            .map(|(i, f)| i / f.max(1.0))
            .collect()
    }

    fn adjusted_income(&self) -> Vec<f64> {
        self.income
            .iter()
            .zip(self.travel_frequency())
            .map(|(i, t)| i * (1.0 + t))
            .collect()
    }

    fn cluster_points(&self, s: &ClusterScaling) -> Vec<Vec<f64>> {
        (0..self.n())
            .map(|i| {
                vec![
                    s.income.apply(self.income[i]),
                    s.age.apply(self.age[i]),
                    s.employment.apply(self.employment[i]),
                ]
            })
            .collect()
    }
}

/// z-score moments fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZScore {
    pub mean: f64,
    pub std: f64,
}

impl ZScore {
    fn fit(values: &[f64]) -> ZScore {
        let ColumnScaling { mean, std, .. } = column_scaling("", values);
        ZScore { mean, std }
    }

    fn apply(&self, v: f64) -> f64 {
        (v - self.mean) / self.std
    }

    fn apply_all(&self, vs: &[f64]) -> Vec<f64> {
        vs.iter().map(|&v| self.apply(v)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterScaling {
    pub income: ZScore,
    pub age: ZScore,
    pub employment: ZScore,
}

/// Every training-split statistic the derived features depend on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedFeatures {
    pub recipe: FeatureRecipe,
    pub n_train_rows: usize,
    pub high_income_threshold: f64,
    pub high_income90_threshold: f64,
    pub large_family_threshold: f64,
    pub chronic_median: f64,
    pub age_z: ZScore,
    pub income_per_capita_z: ZScore,
    pub income_z: ZScore,
    pub chronic_z: ZScore,
    pub travel_frequency_z: ZScore,
    pub experience_z: ZScore,
    pub adjusted_income_z: ZScore,
    pub risk_min: f64,
    pub risk_max: f64,
    pub age_group_bounds: Vec<f64>,
    pub cluster_scaling: ClusterScaling,
    pub kmeans_centroids: Vec<Vec<f64>>,
    pub cluster_rate: GroupMeans<i64>,
    pub age_group_rate: GroupMeans<i64>,
}

/// Fits the feature statistics on a training split.
pub struct FeatureEngineer;

impl FeatureEngineer {
    /// `train` must contain the raw predictors and a 0/1 target.
    pub fn fit(train: &Dataset, recipe: &FeatureRecipe) -> Result<FittedFeatures> {
        recipe.validate()?;
        let raw = Raw::from(train)?;
        let y = train.require_target()?;
        let n = raw.n();
        if n < recipe.kmeans_k.max(2) {
            return Err(Error::Input(format!(
                "feature engineering needs at least {} training rows, got {n}",
                recipe.kmeans_k.max(2)
            )));
        }
        let t = &recipe.percentile_thresholds;
        let tf = raw.travel_frequency();

        let age_group_bounds = match &recipe.age_group_bounds {
            Some(b) => b.clone(),
            None => {
                let mut b: Vec<f64> = [0.25, 0.5, 0.75].iter().map(|&q| quantile(raw.age, q)).collect();
                b.dedup();
                b
            }
        };

        let cluster_scaling = ClusterScaling {
            income: ZScore::fit(raw.income),
            age: ZScore::fit(raw.age),
            employment: ZScore::fit(raw.employment),
        };
        let km = kmeans(&raw.cluster_points(&cluster_scaling), recipe.kmeans_k, recipe.kmeans_seed)?;
        let clusters: Vec<i64> = km.assignments.iter().map(|&c| c as i64).collect();
        let groups: Vec<i64> = raw.age.iter().map(|&a| age_group(&age_group_bounds, a)).collect();

        let mut fitted = FittedFeatures {
            recipe: recipe.clone(),
            n_train_rows: n,
            high_income_threshold: quantile(raw.income, t.high_income),
            high_income90_threshold: quantile(raw.income, t.high_income90),
            large_family_threshold: quantile(raw.family, t.large_family),
            chronic_median: quantile(raw.chronic, 0.5),
            age_z: ZScore::fit(raw.age),
            income_per_capita_z: ZScore::fit(&raw.income_per_capita()),
            income_z: ZScore::fit(raw.income),
            chronic_z: ZScore::fit(raw.chronic),
            travel_frequency_z: ZScore::fit(&tf),
            experience_z: ZScore::fit(raw.abroad),
            adjusted_income_z: ZScore::fit(&raw.adjusted_income()),
            risk_min: 0.0,
            risk_max: 0.0,
            age_group_bounds,
            cluster_scaling,
            kmeans_centroids: km.centroids,
            cluster_rate: GroupMeans::fit(&clusters, y),
            age_group_rate: GroupMeans::fit(&groups, y),
        };
        let risk = fitted.risk_score(&raw);
        fitted.risk_min = risk.iter().copied().fold(f64::INFINITY, f64::min);
        fitted.risk_max = risk.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(fitted)
    }
}

fn age_group(bounds: &[f64], age: f64) -> i64 {
    bounds.iter().filter(|&&b| age > b).count() as i64
}

impl FittedFeatures {
    fn risk_score(&self, raw: &Raw) -> Vec<f64> {
        let w = FeatureRecipe::normalized(&self.recipe.risk_score_weights, &RISK_KEYS);
        let tf = raw.travel_frequency();
        (0..raw.n())
            .map(|i| {
                w[0] * self.chronic_z.apply(raw.chronic[i])
                    + w[1] * self.age_z.apply(raw.age[i])
                    + w[2] * self.travel_frequency_z.apply(tf[i])
            })
            .collect()
    }

    fn insurance_score(&self, raw: &Raw) -> Vec<f64> {
        let w = FeatureRecipe::normalized(&self.recipe.insurance_score_weights, &INSURANCE_KEYS);
        let tf = raw.travel_frequency();
        (0..raw.n())
            .map(|i| {
                w[0] * self.income_z.apply(raw.income[i])
                    + w[1] * self.chronic_z.apply(raw.chronic[i])
                    + w[2] * self.travel_frequency_z.apply(tf[i])
                    + w[3] * self.experience_z.apply(raw.abroad[i])
            })
            .collect()
    }

    /// Derived columns for `d` using only the fitted statistics. The target,
    /// if present, is carried through but never read.
    pub fn transform(&self, d: &Dataset) -> Result<Dataset> {
        let raw = Raw::from(d)?;
        let r = &self.recipe;
        let n = raw.n();
        let map2 = |a: &[f64], b: &[f64], f: &dyn Fn(f64, f64) -> f64| -> Vec<f64> {
            a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()
        };
        let bit = |b: bool| f64::from(u8::from(b));

        let tf = raw.travel_frequency();
        let ipc = raw.income_per_capita();
        let high_income = flag_above(raw.income, self.high_income_threshold);
        let groups: Vec<i64> = raw.age.iter().map(|&a| age_group(&self.age_group_bounds, a)).collect();
        let risk = self.risk_score(&raw);
        let span = self.risk_max - self.risk_min;
        let km = KMeansModel {
            centroids: self.kmeans_centroids.clone(),
            assignments: Vec::new(),
            inertia_history: Vec::new(),
            iterations: 0,
        };
        let clusters: Vec<i64> = raw
            .cluster_points(&self.cluster_scaling)
            .iter()
            .map(|p| km.predict_one(p) as i64)
            .collect();

        let derived: Vec<Vec<f64>> = vec![
            ipc.clone(),
            high_income.clone(),
            self.age_z.apply_all(raw.age),
            flag_above(raw.chronic, self.chronic_median),
            tf.clone(),
            raw.employment.iter().map(|&e| bit(e > 0.0)).collect(),
            raw.family.iter().map(|&f| bit(f <= r.low_dependence_max_family)).collect(),
            map2(raw.income, raw.age, &|i, a| i / a.max(1.0)),
            groups.iter().map(|&g| g as f64).collect(),
            map2(&high_income, raw.abroad, &|h, a| bit(h > 0.0 && a > 0.0)),
            flag_above(raw.income, self.high_income90_threshold),
            self.income_per_capita_z.apply_all(&ipc),
            raw.abroad.iter().map(|&a| bit(a > 0.0)).collect(),
            flag_above(raw.family, self.large_family_threshold),
            map2(raw.chronic, raw.age, &|c, a| c / a.max(1.0)),
            self.insurance_score(&raw),
            map2(raw.family, raw.income, &|f, i| (f.max(1.0) / i.max(1.0)).ln()),
            map2(raw.flyer, raw.abroad, &|f, a| {
                r.travel_score_frequent_flyer * bit(f > 0.0) + r.travel_score_abroad * bit(a > 0.0)
            }),
            map2(raw.age, raw.graduate, &|a, g| {
                let start = if g > 0.0 { r.graduate_start_age } else { r.non_graduate_start_age };
                (a - start).max(0.0)
            }),
            raw.employment.iter().map(|&e| bit(e <= 0.0)).collect(),
            self.adjusted_income_z.apply_all(&raw.adjusted_income()),
            risk.clone(),
            risk.iter()
                .map(|&v| if span > 0.0 { (v - self.risk_min) / span } else { 0.0 })
                .collect(),
            clusters.iter().map(|&c| c as f64).collect(),
            self.cluster_rate.apply(&clusters),
            self.age_group_rate.apply(&groups),
        ];
        debug_assert_eq!(derived.len(), DERIVED.len());

        let mut columns = Vec::with_capacity(RAW_PREDICTORS.len() + DERIVED.len());
        for name in RAW_PREDICTORS {
            columns.push(Column::new(name, lookup(d, name)?.to_vec()));
        }
        for (name, values) in DERIVED.iter().zip(derived) {
            debug_assert_eq!(values.len(), n);
            columns.push(Column::new(*name, values));
        }
        let target = d
            .target_name()
            .map(|t| Column::new(t, d.target().expect("named target has values").to_vec()));
        Dataset::new(columns, target)?.with_row_ids(d.row_ids().to_vec())
    }
}

/// Fit on `raw` and transform it in one step.
pub fn engineer_features(raw: &Dataset, recipe: &FeatureRecipe) -> Result<Dataset> {
    FeatureEngineer::fit(raw, recipe)?.transform(raw)
}
