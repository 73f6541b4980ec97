//! Resolution of command settings from a TOML file and command-line flags.

use std::path::{Path, PathBuf};

use anyhow::Context;
use igann_sparse::elm::Activation;
use igann_sparse::eval::ModelKind;
use igann_sparse::gam::SelectionLevel;
use igann_sparse::subset::Complexity;
use igann_sparse::{IgannConfig, Task};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Resolved settings plus tool version, embedded in every artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub settings: Value,
}

impl RunConfig {
    pub fn new<T: Serialize>(command: &str, settings: &T) -> anyhow::Result<Self> {
        Ok(Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            settings: serde_json::to_value(settings)?,
        })
    }
}

/// Failure to resolve settings; reported as a usage error.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Reads the `[command]` table of a config file, or an empty table.
pub fn file_section(path: Option<&Path>, command: &str) -> anyhow::Result<Value> {
    let Some(path) = path else {
        return Ok(Value::Object(Default::default()));
    };
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let table: toml::Table = toml::from_str(&text)
        .map_err(|e| UsageError(format!("invalid config {}: {e}", path.display())))?;
    let section = table.get(command).cloned().unwrap_or(toml::Value::Table(Default::default()));
    Ok(serde_json::to_value(section)?)
}

/// Overlays the flags that were given on the file section and deserializes
/// the result.
pub fn resolve<A: Serialize, R: DeserializeOwned>(flags: &A, file: Value) -> anyhow::Result<R> {
    let mut merged = match file {
        Value::Object(map) => map,
        _ => Default::default(),
    };
    if let Value::Object(given) = serde_json::to_value(flags)? {
        for (k, v) in given {
            if !v.is_null() {
                merged.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| UsageError(e.to_string()).into())
}

fn default_k() -> usize {
    10
}
fn default_rounds() -> usize {
    100
}
fn default_lr() -> f64 {
    0.1
}
fn default_lambda() -> f64 {
    1e-3
}
fn default_patience() -> usize {
    5
}
fn default_val_fraction() -> f64 {
    0.15
}
fn default_folds() -> usize {
    5
}
fn default_repeats() -> usize {
    20
}
fn default_grid() -> usize {
    100
}
fn default_max_levels() -> usize {
    25
}
fn default_models() -> Vec<ModelKind> {
    ModelKind::ALL.to_vec()
}
fn default_one() -> usize {
    1
}

/// Boosting hyperparameters shared by every command that fits a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IgannParams {
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_rounds")]
    pub rounds: usize,
    #[serde(default = "default_lr")]
    pub lr: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default)]
    pub smax: Option<usize>,
    #[serde(default = "default_patience")]
    pub patience: usize,
    #[serde(default = "default_val_fraction")]
    pub val_fraction: f64,
    #[serde(default)]
    pub activation: Activation,
    #[serde(default)]
    pub complexity: Complexity,
}

impl IgannParams {
    pub fn to_config(&self, task: Task, sparse: bool, seed: u64) -> IgannConfig<f64> {
        let mut c = IgannConfig::new(task).sparse(sparse).seed(seed);
        c.hidden_units = self.k;
        c.n_rounds = self.rounds;
        c.learning_rate = self.lr;
        c.lambda = self.lambda;
        c.s_max = self.smax;
        c.early_stop_patience = self.patience;
        c.val_fraction = self.val_fraction;
        c.activation = self.activation;
        c.complexity = self.complexity;
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrepSettings {
    pub data: PathBuf,
    pub target: String,
    pub task: Task,
    #[serde(default)]
    pub id_columns: Vec<String>,
    #[serde(default)]
    pub categorical: Vec<String>,
    #[serde(default = "default_max_levels")]
    pub max_levels: usize,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSettings {
    pub data: PathBuf,
    #[serde(default)]
    pub sparse: bool,
    #[serde(default)]
    pub seed: u64,
    pub out: PathBuf,
    #[serde(flatten)]
    pub igann: IgannParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Igann,
    Lasso,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectSettings {
    pub data: PathBuf,
    pub method: Method,
    #[serde(default)]
    pub seed: u64,
    /// Cross-validation folds for the lasso penalty.
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_grid")]
    pub lasso_grid: usize,
    pub out: PathBuf,
    #[serde(flatten)]
    pub igann: IgannParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSettings {
    pub registry: PathBuf,
    #[serde(default = "default_models")]
    pub models: Vec<ModelKind>,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_grid")]
    pub lasso_grid: usize,
    #[serde(default)]
    pub level: SelectionLevel,
    pub out: PathBuf,
    #[serde(flatten)]
    pub igann: IgannParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub data: PathBuf,
    pub counts: Vec<usize>,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_one")]
    pub repeats: usize,
    pub out: PathBuf,
    #[serde(flatten)]
    pub igann: IgannParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapesSettings {
    pub model: PathBuf,
    #[serde(default = "default_grid")]
    pub grid: usize,
    pub out: PathBuf,
}
