use std::fmt;
use std::str::FromStr;

use ndarray::Axis;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::score;
use super::wilcoxon::{wilcoxon_signed_rank, WilcoxonResult};
use super::mean_sd;
use crate::baselines::{lambda_grid, lasso_select};
use crate::data::{kfold_split, FoldPlan, PreparedDataset, Registry, Task};
use crate::error::{Error, Result};
use crate::gam::{fit, IgannConfig, SelectionLevel};
use crate::rng::{derive_seed, roles};
use crate::scalar::Float;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    IgannFull,
    IgannSparse,
    Lasso,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::IgannFull, ModelKind::IgannSparse, ModelKind::Lasso];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::IgannFull => "igann_full",
            ModelKind::IgannSparse => "igann_sparse",
            ModelKind::Lasso => "lasso",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "igann_full" | "full" => Ok(ModelKind::IgannFull),
            "igann_sparse" | "sparse" => Ok(ModelKind::IgannSparse),
            "lasso" => Ok(ModelKind::Lasso),
            other => Err(Error::InvalidConfig(format!(
                "unknown model '{other}' (expected igann_full, igann_sparse or lasso)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSample {
    pub dataset: String,
    pub model: ModelKind,
    pub seed: u64,
    pub fold: usize,
    /// AUROC or RMSE (standardized target units).
    pub value: f64,
    pub n_selected: usize,
    pub pct_selected: f64,
    /// Largest round-to-round training loss increase; boosted models only.
    pub max_train_loss_increase: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkOptions<F> {
    pub repeats: usize,
    pub folds: usize,
    /// Template for both boosted models; task, sparsity and seed are set per cell.
    pub igann: IgannConfig<F>,
    pub lasso_grid_size: usize,
    pub lasso_grid_ratio: F,
    /// Folds of the inner cross-validation that picks the lasso λ.
    pub lasso_inner_folds: usize,
    pub selection_level: SelectionLevel,
}

impl<F: Float> Default for BenchmarkOptions<F> {
    fn default() -> Self {
        Self {
            repeats: 20,
            folds: 5,
            igann: IgannConfig::new(Task::Regression),
            lasso_grid_size: 100,
            lasso_grid_ratio: F::lit(1e-3),
            lasso_inner_folds: 5,
            selection_level: SelectionLevel::Columns,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub model: ModelKind,
    pub mean: f64,
    pub sd: f64,
    pub pct_selected: f64,
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub a: ModelKind,
    pub b: ModelKind,
    pub result: WilcoxonResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetReport {
    pub dataset: String,
    pub task: Task,
    pub metric: String,
    pub n_rows: usize,
    pub n_cols: usize,
    pub models: Vec<ModelSummary>,
    pub comparisons: Vec<Comparison>,
    pub samples: Vec<MetricSample>,
}

impl DatasetReport {
    pub fn summary(&self, model: ModelKind) -> Option<&ModelSummary> {
        self.models.iter().find(|m| m.model == model)
    }

    pub fn values(&self, model: ModelKind) -> Vec<f64> {
        self.samples
            .iter()
            .filter(|s| s.model == model)
            .map(|s| s.value)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFailure {
    pub dataset: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub repeats: usize,
    pub folds: usize,
    pub models: Vec<ModelKind>,
    pub datasets: Vec<DatasetReport>,
    pub failures: Vec<DatasetFailure>,
}

impl BenchmarkReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn dataset(&self, name: &str) -> Option<&DatasetReport> {
        self.datasets.iter().find(|d| d.dataset == name)
    }
}

/// Every registry dataset under `repeats` seeds of `folds`-fold CV. A dataset
/// that fails to load or fit is reported in `failures` and skipped.
pub fn run_benchmark<F: Float>(
    registry: &Registry,
    models: &[ModelKind],
    options: &BenchmarkOptions<F>,
) -> Result<BenchmarkReport> {
    check_options(models, options)?;
    let mut datasets = Vec::new();
    let mut failures = Vec::new();
    for entry in &registry.datasets {
        let outcome = entry
            .load::<F>(&registry.base_dir)
            .and_then(|data| benchmark_dataset(&entry.name, &data, models, options));
        match outcome {
            Ok(report) => datasets.push(report),
            Err(e) => {
                log::warn!("dataset {} failed: {e}", entry.name);
                failures.push(DatasetFailure {
                    dataset: entry.name.clone(),
                    error: e.to_string(),
                });
            }
        }
    }
    Ok(BenchmarkReport {
        repeats: options.repeats,
        folds: options.folds,
        models: models.to_vec(),
        datasets,
        failures,
    })
}

fn check_options<F: Float>(models: &[ModelKind], options: &BenchmarkOptions<F>) -> Result<()> {
    if models.is_empty() {
        return Err(Error::InvalidConfig("no models to benchmark".into()));
    }
    if options.repeats == 0 {
        return Err(Error::InvalidConfig("repeats must be >= 1".into()));
    }
    if options.lasso_grid_size == 0 {
        return Err(Error::EmptyGrid);
    }
    options.igann.validate()
}

/// Benchmark of one prepared dataset; cells run in parallel and are
/// reassembled in (model, seed, fold) order.
pub fn benchmark_dataset<F: Float>(
    name: &str,
    data: &PreparedDataset<F>,
    models: &[ModelKind],
    options: &BenchmarkOptions<F>,
) -> Result<DatasetReport> {
    check_options(models, options)?;
    let plans: Vec<FoldPlan> = (0..options.repeats as u64)
        .map(|seed| kfold_split(data.n_rows(), options.folds, seed))
        .collect::<Result<_>>()?;
    let cells: Vec<(usize, usize)> = (0..options.repeats)
        .flat_map(|r| (0..options.folds).map(move |f| (r, f)))
        .collect();
    let results: Vec<Vec<MetricSample>> = cells
        .par_iter()
        .map(|&(r, f)| {
            models
                .iter()
                .map(|&model| evaluate_cell(name, data, model, &plans[r], f, options))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut samples = Vec::with_capacity(results.len() * models.len());
    for (i, _) in models.iter().enumerate() {
        samples.extend(results.iter().map(|cell| cell[i].clone()));
    }

    let summaries = models
        .iter()
        .map(|&model| {
            let own: Vec<&MetricSample> = samples.iter().filter(|s| s.model == model).collect();
            let values: Vec<f64> = own.iter().map(|s| s.value).collect();
            let pct: Vec<f64> = own.iter().map(|s| s.pct_selected).collect();
            let (mean, sd) = mean_sd(&values);
            ModelSummary {
                model,
                mean,
                sd,
                pct_selected: mean_sd(&pct).0,
                n_samples: values.len(),
            }
        })
        .collect::<Vec<_>>();

    let mut report = DatasetReport {
        dataset: name.to_string(),
        task: data.task,
        metric: data.task.metric_name().to_string(),
        n_rows: data.n_rows(),
        n_cols: data.n_cols(),
        models: summaries,
        comparisons: Vec::new(),
        samples,
    };
    let has = |m| models.contains(&m);
    if has(ModelKind::IgannFull) && has(ModelKind::IgannSparse) {
        let tol = report.summary(ModelKind::IgannFull).map_or(0.0, |s| s.sd);
        report.comparisons.push(compare(&report, ModelKind::IgannSparse, ModelKind::IgannFull, tol)?);
    }
    if has(ModelKind::IgannSparse) && has(ModelKind::Lasso) {
        report.comparisons.push(compare(&report, ModelKind::IgannSparse, ModelKind::Lasso, 0.0)?);
    }
    Ok(report)
}

/// Paired test of `a` against `b`, with RMSE negated so larger is better.
fn compare(report: &DatasetReport, a: ModelKind, b: ModelKind, tolerance: f64) -> Result<Comparison> {
    let sign = match report.task {
        Task::Classification => 1.0,
        Task::Regression => -1.0,
    };
    let orient = |v: Vec<f64>| v.into_iter().map(|x| sign * x).collect::<Vec<_>>();
    let result = wilcoxon_signed_rank(&orient(report.values(a)), &orient(report.values(b)), tolerance)?;
    Ok(Comparison { a, b, result })
}

fn evaluate_cell<F: Float>(
    name: &str,
    data: &PreparedDataset<F>,
    model: ModelKind,
    plan: &FoldPlan,
    fold: usize,
    options: &BenchmarkOptions<F>,
) -> Result<MetricSample> {
    let train = data.select_rows(&plan.train_indices(fold));
    let test_rows = plan.test_indices(fold);
    let x_test = data.x.select(Axis(0), &test_rows);
    let y_test = data.y.select(Axis(0), &test_rows);
    let cell_seed = derive_seed(plan.seed, roles::TRAINING, fold as u64);
    let (value, n_selected, pct, increase) = match model {
        ModelKind::IgannFull | ModelKind::IgannSparse => {
            let mut config = options.igann.clone();
            config.task = data.task;
            config.sparse = model == ModelKind::IgannSparse;
            config.seed = cell_seed;
            let fitted = fit(&train, &config)?;
            let pred = fitted.predict_raw(x_test.view())?;
            let pct = fitted.pct_selected(options.selection_level);
            let n_selected = match options.selection_level {
                SelectionLevel::Columns => fitted.selected_columns().len(),
                SelectionLevel::Features => fitted.selected_features().len(),
            };
            (
                score(data.task, y_test.view(), pred.view())?,
                n_selected,
                pct,
                Some(fitted.max_train_loss_increase().as_f64()),
            )
        }
        ModelKind::Lasso => {
            let grid = lambda_grid(
                train.x.view(),
                train.y.view(),
                options.lasso_grid_size,
                options.lasso_grid_ratio,
            );
            let inner = kfold_split(
                train.n_rows(),
                options.lasso_inner_folds,
                derive_seed(plan.seed, roles::FOLDS, fold as u64),
            )?;
            let sel = lasso_select(&train, &inner, &grid)?;
            let pred = sel.model.decision(x_test.view());
            let (n_selected, pct) = match options.selection_level {
                SelectionLevel::Columns => (sel.selected_columns.len(), sel.pct_selected),
                SelectionLevel::Features => (
                    sel.features.len(),
                    sel.features.len() as f64 / data.groups.len() as f64,
                ),
            };
            (score(data.task, y_test.view(), pred.view())?, n_selected, pct, None)
        }
    };
    Ok(MetricSample {
        dataset: name.to_string(),
        model,
        seed: plan.seed,
        fold,
        value,
        n_selected,
        pct_selected: pct,
        max_train_loss_increase: increase,
    })
}

fn stars(p: f64) -> &'static str {
    if p <= 0.01 {
        "**"
    } else if p <= 0.05 {
        "*"
    } else {
        ""
    }
}

/// Aligned text table: per model `mean ± SD` and mean selected percentage,
/// then one column per paired test (`**` p ≤ 0.01, `*` p ≤ 0.05).
pub fn render_table(report: &BenchmarkReport) -> String {
    let mut header = vec!["Dataset".to_string(), "Task".into(), "Metric".into()];
    for m in &report.models {
        header.push(m.name().into());
        header.push("% feat".into());
    }
    let mut pairs: Vec<(ModelKind, ModelKind)> = Vec::new();
    for d in &report.datasets {
        for c in &d.comparisons {
            if !pairs.contains(&(c.a, c.b)) {
                pairs.push((c.a, c.b));
            }
        }
    }
    for (a, b) in &pairs {
        header.push(format!("{a} vs {b}"));
    }
    let mut rows = vec![header];
    for d in &report.datasets {
        let mut row = vec![d.dataset.clone(), d.task.to_string(), d.metric.clone()];
        for m in &report.models {
            match d.summary(*m) {
                Some(s) => {
                    row.push(format!("{:.3} ± {:.3}", s.mean, s.sd));
                    row.push(format!("{:.1}", 100.0 * s.pct_selected));
                }
                None => row.extend(["-".to_string(), "-".to_string()]),
            }
        }
        for (a, b) in &pairs {
            let cell = d
                .comparisons
                .iter()
                .find(|c| c.a == *a && c.b == *b)
                .map(|c| {
                    let winner = match c.result.better {
                        super::Better::A => c.a.name(),
                        super::Better::B => c.b.name(),
                        super::Better::Tie => "tie",
                    };
                    format!("p={:.4}{} {}", c.result.p_value, stars(c.result.p_value), winner)
                })
                .unwrap_or_else(|| "-".into());
            row.push(cell);
        }
        rows.push(row);
    }
    let cols = rows[0].len();
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (i, row) in rows.iter().enumerate() {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:<w$}", w = *w))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
        if i == 0 {
            out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (cols - 1)));
            out.push('\n');
        }
    }
    for f in &report.failures {
        out.push_str(&format!("failed: {} ({})\n", f.dataset, f.error));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{Array1, Array2};

    fn small() -> PreparedDataset<f64> {
        let x = Array2::from_shape_fn((60, 3), |(i, j)| (((i * 13 + j * 7) % 23) as f64 - 11.0) / 6.0);
        let y = Array1::from_shape_fn(60, |i| x[[i, 0]] * x[[i, 0]] + 0.3 * x[[i, 1]]);
        PreparedDataset::from_arrays(x, y, Task::Regression).unwrap()
    }

    fn quick() -> BenchmarkOptions<f64> {
        let mut o = BenchmarkOptions::default();
        o.repeats = 2;
        o.igann.n_rounds = 5;
        o.lasso_grid_size = 10;
        o
    }

    #[test]
    fn sample_counts_follow_repeats_and_folds() {
        let models = [ModelKind::IgannFull, ModelKind::Lasso];
        let r = benchmark_dataset("toy", &small(), &models, &quick()).unwrap();
        assert_eq!(r.samples.len(), 20);
        assert_eq!(r.summary(ModelKind::IgannFull).unwrap().n_samples, 10);
        assert!(r.comparisons.is_empty());
    }

    #[test]
    fn model_names_parse() {
        for m in ModelKind::ALL {
            assert_eq!(m.name().parse::<ModelKind>().unwrap(), m);
        }
        assert!("ridge".parse::<ModelKind>().is_err());
    }
}
