//! Tabular ingestion, preprocessing and cross-validation splits.
//!
//! Preprocessing follows the usual benchmark recipe for additive models:
//! declared id columns are removed, categorical columns with more than
//! [`DEFAULT_MAX_LEVELS`] distinct values are removed, the remaining
//! categoricals are one-hot encoded with one dummy per level, and numeric
//! columns are median-imputed then standardized (population standard
//! deviation, as `StandardScaler` does). Regression targets are
//! standardized; classification targets are mapped onto `{0, 1}`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{rng_for, roles};
use crate::scalar::Float;

/// Categorical columns with more distinct values than this are dropped.
pub const DEFAULT_MAX_LEVELS: usize = 25;

const MISSING_LEVEL: &str = "<missing>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Classification,
    Regression,
}

impl Task {
    pub fn metric_name(self) -> &'static str {
        match self {
            Task::Classification => "AUROC",
            Task::Regression => "RMSE",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Classification => "classification",
            Task::Regression => "regression",
        })
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "classification" | "cls" => Ok(Task::Classification),
            "regression" | "reg" => Ok(Task::Regression),
            other => Err(Error::InvalidConfig(format!(
                "unknown task `{other}` (expected classification or regression)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Categorical,
    Target,
    Id,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawColumn {
    pub name: String,
    pub kind: ColumnKind,
    /// Cell text, trimmed. Missing cells are empty strings.
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    pub columns: Vec<RawColumn>,
    n_rows: usize,
}

impl RawDataset {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn column(&self, name: &str) -> Option<&RawColumn> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn target(&self) -> &RawColumn {
        self.columns
            .iter()
            .find(|c| c.kind == ColumnKind::Target)
            .expect("raw dataset always carries a target column")
    }

    pub fn count_kind(&self, kind: ColumnKind) -> usize {
        self.columns.iter().filter(|c| c.kind == kind).count()
    }
}

/// How to interpret the columns of a CSV file.
#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    pub target: String,
    /// Explicit column kinds; anything not listed is inferred.
    pub overrides: BTreeMap<String, ColumnKind>,
}

impl LoadOptions {
    pub fn new(target: impl Into<String>) -> Self {
        Self {
            target: target.into(),
            overrides: BTreeMap::new(),
        }
    }

    pub fn with_kind(mut self, column: impl Into<String>, kind: ColumnKind) -> Self {
        self.overrides.insert(column.into(), kind);
        self
    }
}

pub fn load_csv(path: impl AsRef<Path>, options: &LoadOptions) -> Result<RawDataset> {
    let path = path.as_ref();
    if !path.is_file() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    read_csv(File::open(path)?, options)
}

/// Parses comma-delimited CSV with a header row.
pub fn read_csv<R: Read>(reader: R, options: &LoadOptions) -> Result<RawDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(Error::Csv("empty header".into()));
    }
    let width = header.len();
    let mut cells: Vec<Vec<String>> = vec![Vec::new(); width];
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() != width {
            return Err(Error::RaggedRow {
                line: i + 2,
                expected: width,
                found: record.len(),
            });
        }
        for (col, field) in cells.iter_mut().zip(record.iter()) {
            col.push(field.to_string());
        }
    }
    let n_rows = cells[0].len();
    if n_rows == 0 {
        return Err(Error::ZeroDataRows);
    }

    let target_from_hints = options
        .overrides
        .iter()
        .find(|(_, k)| **k == ColumnKind::Target)
        .map(|(name, _)| name.as_str());
    let target_name = if options.target.is_empty() {
        target_from_hints.unwrap_or_default()
    } else {
        options.target.as_str()
    };
    if !header.iter().any(|h| h == target_name) {
        return Err(Error::NoTargetColumn(target_name.to_string()));
    }

    let columns = header
        .into_iter()
        .zip(cells)
        .map(|(name, values)| {
            let kind = if name == target_name {
                ColumnKind::Target
            } else if let Some(kind) = options.overrides.get(&name) {
                *kind
            } else {
                infer_kind(&values)
            };
            RawColumn { name, kind, values }
        })
        .collect();
    Ok(RawDataset { columns, n_rows })
}

fn infer_kind(values: &[String]) -> ColumnKind {
    let mut any = false;
    for v in values.iter().filter(|v| !v.is_empty()) {
        any = true;
        match v.parse::<f64>() {
            Ok(x) if x.is_finite() => {}
            _ => return ColumnKind::Categorical,
        }
    }
    if any {
        ColumnKind::Numeric
    } else {
        ColumnKind::Categorical
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub task: Task,
    /// Columns removed before encoding. Entries are exact names or simple
    /// `*` wildcard patterns such as `*_id`.
    #[serde(default)]
    pub id_columns: Vec<String>,
    #[serde(default = "default_max_levels")]
    pub max_levels: usize,
}

fn default_max_levels() -> usize {
    DEFAULT_MAX_LEVELS
}

impl PreprocessConfig {
    pub fn new(task: Task) -> Self {
        Self {
            task,
            id_columns: Vec::new(),
            max_levels: DEFAULT_MAX_LEVELS,
        }
    }

    pub fn with_id_columns<I, S>(mut self, ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.id_columns = ids.into_iter().map(Into::into).collect();
        self
    }

    fn is_id(&self, name: &str) -> bool {
        self.id_columns.iter().any(|p| wildcard_match(p, name))
    }
}

fn wildcard_match(pattern: &str, name: &str) -> bool {
    let parts: Vec<&str> = pattern.split('*').collect();
    if parts.len() == 1 {
        return pattern == name;
    }
    let mut rest = name;
    for (i, part) in parts.iter().enumerate() {
        if i == 0 {
            match rest.strip_prefix(part) {
                Some(r) => rest = r,
                None => return false,
            }
        } else if i == parts.len() - 1 {
            return rest.ends_with(part);
        } else if let Some(pos) = rest.find(part) {
            rest = &rest[pos + part.len()..];
        } else {
            return false;
        }
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Numeric,
    Categorical,
}

/// An original input feature and the contiguous columns of `X` it owns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureGroup {
    pub name: String,
    pub kind: FeatureKind,
    pub start: usize,
    pub len: usize,
    /// Category levels in dummy-column order; empty for numeric features.
    #[serde(default)]
    pub levels: Vec<String>,
}

impl FeatureGroup {
    pub fn columns(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnScaler<F> {
    pub mean: F,
    /// Zero for constant columns, which map to all-zero.
    pub std: F,
    /// Imputation value for missing cells (numeric columns only).
    pub median: Option<F>,
}

impl<F: Float> ColumnScaler<F> {
    pub fn identity() -> Self {
        Self {
            mean: F::zero(),
            std: F::one(),
            median: None,
        }
    }

    pub fn transform(&self, v: F) -> F {
        if self.std > F::zero() {
            (v - self.mean) / self.std
        } else {
            F::zero()
        }
    }

    pub fn inverse(&self, z: F) -> F {
        z * self.std + self.mean
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetScaler<F> {
    pub mean: F,
    pub std: F,
}

impl<F: Float> TargetScaler<F> {
    pub fn identity() -> Self {
        Self {
            mean: F::zero(),
            std: F::one(),
        }
    }

    pub fn transform(&self, v: F) -> F {
        (v - self.mean) / self.std
    }

    pub fn inverse(&self, z: F) -> F {
        z * self.std + self.mean
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroppedColumn {
    pub name: String,
    pub reason: String,
}

/// Model-ready design matrix with the metadata needed to map columns back to
/// the original features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparedDataset<F> {
    pub x: Array2<F>,
    pub y: Array1<F>,
    pub task: Task,
    pub column_names: Vec<String>,
    pub groups: Vec<FeatureGroup>,
    pub scaler: Vec<ColumnScaler<F>>,
    /// Present for regression.
    pub target_scaler: Option<TargetScaler<F>>,
    /// Raw labels mapped to 0 and 1, for classification.
    pub class_labels: Option<[String; 2]>,
    #[serde(default)]
    pub dropped: Vec<DroppedColumn>,
}

impl<F: Float> PreparedDataset<F> {
    /// Wraps an already numeric design. Every column becomes its own numeric
    /// group and no scaling is recorded.
    pub fn from_arrays(x: Array2<F>, y: Array1<F>, task: Task) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::LengthMismatch {
                left: x.nrows(),
                right: y.len(),
            });
        }
        if task == Task::Classification
            && y.iter().any(|v| *v != F::zero() && *v != F::one())
        {
            return Err(Error::InvalidTarget(
                "classification targets must be 0 or 1".into(),
            ));
        }
        let m = x.ncols();
        let column_names: Vec<String> = (0..m).map(|j| format!("x{}", j + 1)).collect();
        let groups = column_names
            .iter()
            .enumerate()
            .map(|(j, name)| FeatureGroup {
                name: name.clone(),
                kind: FeatureKind::Numeric,
                start: j,
                len: 1,
                levels: Vec::new(),
            })
            .collect();
        Ok(Self {
            x,
            y,
            task,
            column_names,
            groups,
            scaler: vec![ColumnScaler::identity(); m],
            target_scaler: (task == Task::Regression).then(TargetScaler::identity),
            class_labels: (task == Task::Classification).then(|| ["0".into(), "1".into()]),
            dropped: Vec::new(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.x.ncols()
    }

    /// Group index owning each column of `X`.
    pub fn column_groups(&self) -> Vec<usize> {
        let mut out = vec![0; self.n_cols()];
        for (g, group) in self.groups.iter().enumerate() {
            for c in group.columns() {
                out[c] = g;
            }
        }
        out
    }

    pub fn count_groups(&self, kind: FeatureKind) -> usize {
        self.groups.iter().filter(|g| g.kind == kind).count()
    }

    /// Copy restricted to the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            x: self.x.select(Axis(0), rows),
            y: self.y.select(Axis(0), rows),
            ..self.clone()
        }
    }

    pub fn inverse_target(&self, z: F) -> F {
        match &self.target_scaler {
            Some(s) => s.inverse(z),
            None => z,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Applies the preprocessing recipe to a raw table.
pub fn preprocess<F: Float>(raw: &RawDataset, config: &PreprocessConfig) -> Result<PreparedDataset<F>> {
    let n = raw.n_rows();
    let (y, target_scaler, class_labels) = encode_target::<F>(raw.target(), config.task)?;

    let mut dropped = Vec::new();
    let mut columns: Vec<Vec<F>> = Vec::new();
    let mut column_names = Vec::new();
    let mut groups = Vec::new();
    let mut scaler = Vec::new();

    for col in &raw.columns {
        match col.kind {
            ColumnKind::Target => continue,
            ColumnKind::Id => {
                dropped.push(DroppedColumn {
                    name: col.name.clone(),
                    reason: "id column".into(),
                });
                continue;
            }
            _ if config.is_id(&col.name) => {
                dropped.push(DroppedColumn {
                    name: col.name.clone(),
                    reason: "id column".into(),
                });
                continue;
            }
            ColumnKind::Numeric => {
                let (values, params) = standardize_numeric::<F>(col)?;
                groups.push(FeatureGroup {
                    name: col.name.clone(),
                    kind: FeatureKind::Numeric,
                    start: columns.len(),
                    len: 1,
                    levels: Vec::new(),
                });
                column_names.push(col.name.clone());
                columns.push(values);
                scaler.push(params);
            }
            ColumnKind::Categorical => {
                let distinct: BTreeSet<&str> = col
                    .values
                    .iter()
                    .filter(|v| !v.is_empty())
                    .map(String::as_str)
                    .collect();
                if distinct.len() > config.max_levels {
                    dropped.push(DroppedColumn {
                        name: col.name.clone(),
                        reason: format!(
                            "{} distinct values (> {})",
                            distinct.len(),
                            config.max_levels
                        ),
                    });
                    continue;
                }
                let has_missing = col.values.iter().any(String::is_empty);
                let mut levels: Vec<String> = distinct.iter().map(|s| s.to_string()).collect();
                if has_missing {
                    levels.push(MISSING_LEVEL.to_string());
                }
                let start = columns.len();
                for level in &levels {
                    let dummy: Vec<F> = col
                        .values
                        .iter()
                        .map(|v| {
                            let hit = if v.is_empty() {
                                level == MISSING_LEVEL
                            } else {
                                v == level
                            };
                            if hit {
                                F::one()
                            } else {
                                F::zero()
                            }
                        })
                        .collect();
                    column_names.push(format!("{}={}", col.name, level));
                    columns.push(dummy);
                    scaler.push(ColumnScaler::identity());
                }
                groups.push(FeatureGroup {
                    name: col.name.clone(),
                    kind: FeatureKind::Categorical,
                    start,
                    len: levels.len(),
                    levels,
                });
            }
        }
    }

    if columns.is_empty() {
        return Err(Error::AllFeaturesDropped);
    }
    let m = columns.len();
    let x = Array2::from_shape_fn((n, m), |(r, c)| columns[c][r]);
    Ok(PreparedDataset {
        x,
        y,
        task: config.task,
        column_names,
        groups,
        scaler,
        target_scaler,
        class_labels,
        dropped,
    })
}

fn parse_numeric<F: Float>(col: &RawColumn) -> Result<Vec<Option<F>>> {
    col.values
        .iter()
        .map(|v| {
            if v.is_empty() {
                Ok(None)
            } else {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .map(|x| Some(F::lit(x)))
                    .ok_or_else(|| {
                        Error::Csv(format!("column `{}`: `{v}` is not numeric", col.name))
                    })
            }
        })
        .collect()
}

fn median<F: Float>(values: &mut [F]) -> F {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = values.len();
    if n == 0 {
        F::zero()
    } else if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / F::lit(2.0)
    }
}

fn mean_and_std<F: Float>(values: &[F]) -> (F, F) {
    let n = F::from_usize_lossy(values.len());
    let mean = values.iter().copied().sum::<F>() / n;
    let var = values.iter().map(|v| (*v - mean) * (*v - mean)).sum::<F>() / n;
    (mean, var.sqrt())
}

fn standardize_numeric<F: Float>(col: &RawColumn) -> Result<(Vec<F>, ColumnScaler<F>)> {
    let parsed = parse_numeric::<F>(col)?;
    let mut present: Vec<F> = parsed.iter().flatten().copied().collect();
    let med = median(&mut present);
    let filled: Vec<F> = parsed.iter().map(|v| v.unwrap_or(med)).collect();
    let (mean, std) = mean_and_std(&filled);
    // Treat columns whose spread is pure rounding noise as constant.
    let scale = mean.abs().max(F::one());
    let std = if std <= F::lit(1e3) * F::epsilon() * scale {
        F::zero()
    } else {
        std
    };
    let params = ColumnScaler {
        mean,
        std,
        median: Some(med),
    };
    let values = filled.iter().map(|v| params.transform(*v)).collect();
    Ok((values, params))
}

type EncodedTarget<F> = (Array1<F>, Option<TargetScaler<F>>, Option<[String; 2]>);

fn encode_target<F: Float>(col: &RawColumn, task: Task) -> Result<EncodedTarget<F>> {
    if let Some(row) = col.values.iter().position(String::is_empty) {
        return Err(Error::InvalidTarget(format!(
            "missing target value in data row {}",
            row + 1
        )));
    }
    let distinct: BTreeSet<&str> = col.values.iter().map(String::as_str).collect();
    if distinct.len() < 2 {
        return Err(Error::InvalidTarget(
            "target has fewer than 2 distinct values".into(),
        ));
    }
    match task {
        Task::Classification => {
            if distinct.len() > 2 {
                return Err(Error::InvalidTarget(format!(
                    "classification target has {} distinct values",
                    distinct.len()
                )));
            }
            let mut labels: Vec<&str> = distinct.into_iter().collect();
            let numeric: Option<Vec<f64>> = labels.iter().map(|l| l.parse().ok()).collect();
            if let Some(nums) = numeric {
                if nums[1] < nums[0] {
                    labels.swap(0, 1);
                }
            }
            let y = col
                .values
                .iter()
                .map(|v| if v == labels[1] { F::one() } else { F::zero() })
                .collect();
            Ok((
                y,
                None,
                Some([labels[0].to_string(), labels[1].to_string()]),
            ))
        }
        Task::Regression => {
            let raw: Vec<F> = parse_numeric::<F>(col)?.into_iter().flatten().collect();
            let (mean, std) = mean_and_std(&raw);
            if !(std > F::zero()) {
                return Err(Error::InvalidTarget(
                    "target has fewer than 2 distinct values".into(),
                ));
            }
            let params = TargetScaler { mean, std };
            let y = raw.iter().map(|v| params.transform(*v)).collect();
            Ok((y, Some(params), None))
        }
    }
}

/// Shuffled assignment of rows to `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub seed: u64,
    pub k: usize,
    pub assignments: Vec<usize>,
}

impl FoldPlan {
    pub fn n_rows(&self) -> usize {
        self.assignments.len()
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.n_rows())
            .filter(|&r| self.assignments[r] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.n_rows())
            .filter(|&r| self.assignments[r] != fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Randomly partitions `0..n` into `k` folds whose sizes differ by at most
/// one; the first `n % k` folds receive the extra rows.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 || k > n {
        return Err(Error::InvalidFoldCount { k, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_for(seed, roles::FOLDS, 0));
    let mut assignments = vec![0; n];
    for (pos, row) in order.into_iter().enumerate() {
        assignments[row] = pos % k;
    }
    Ok(FoldPlan { seed, k, assignments })
}

/// One dataset in a benchmark manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub name: String,
    pub path: PathBuf,
    pub target: String,
    pub task: Task,
    #[serde(default)]
    pub id_columns: Vec<String>,
    /// Columns forced to categorical even if they parse as numbers.
    #[serde(default)]
    pub categorical: Vec<String>,
}

impl DatasetEntry {
    pub fn load_raw(&self, base_dir: &Path) -> Result<RawDataset> {
        let path = if self.path.is_absolute() {
            self.path.clone()
        } else {
            base_dir.join(&self.path)
        };
        let mut options = LoadOptions::new(self.target.clone());
        for c in &self.categorical {
            options = options.with_kind(c.clone(), ColumnKind::Categorical);
        }
        for c in &self.id_columns {
            if !c.contains('*') {
                options = options.with_kind(c.clone(), ColumnKind::Id);
            }
        }
        load_csv(path, &options)
    }

    pub fn preprocess_config(&self) -> PreprocessConfig {
        PreprocessConfig::new(self.task).with_id_columns(self.id_columns.iter().cloned())
    }

    pub fn load<F: Float>(&self, base_dir: &Path) -> Result<PreparedDataset<F>> {
        preprocess(&self.load_raw(base_dir)?, &self.preprocess_config())
    }
}

/// Benchmark dataset manifest, stored as TOML with one `[[dataset]]` table
/// per entry. Relative paths resolve against the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Registry {
    #[serde(rename = "dataset", default)]
    pub datasets: Vec<DatasetEntry>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Registry {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.is_file() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml_str(&text, base)
    }

    pub fn from_toml_str(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut reg: Registry = toml::from_str(text)?;
        reg.base_dir = base_dir.into();
        let mut seen = BTreeSet::new();
        for d in &reg.datasets {
            if !seen.insert(d.name.as_str()) {
                return Err(Error::Registry(format!("duplicate dataset `{}`", d.name)));
            }
        }
        Ok(reg)
    }

    pub fn get(&self, name: &str) -> Option<&DatasetEntry> {
        self.datasets.iter().find(|d| d.name == name)
    }
}
