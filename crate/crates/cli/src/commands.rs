use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use igann_sparse::baselines::{lambda_grid, lasso_select};
use igann_sparse::data::{kfold_split, load_csv, preprocess, ColumnKind, LoadOptions, PreprocessConfig};
use igann_sparse::data::{DroppedColumn, FeatureKind};
use igann_sparse::eval::{render_table, run_benchmark, sweep_features, sweep_to_csv, BenchmarkOptions, SweepOptions};
use igann_sparse::gam::{fit, SelectionLevel};
use igann_sparse::{IgannModel, PreparedDataset, Registry, Task};
use serde::{Deserialize, Serialize};

use crate::config::{
    BenchmarkSettings, Method, PrepSettings, RunConfig, SelectSettings, ShapesSettings, SweepSettings,
    TrainSettings,
};

#[derive(Debug, Serialize, Deserialize)]
pub struct GroupSummary {
    pub name: String,
    pub kind: FeatureKind,
    pub columns: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PrepSummary {
    pub rows: usize,
    pub columns: usize,
    pub numeric_features: usize,
    pub categorical_features: usize,
    pub groups: Vec<GroupSummary>,
    pub dropped: Vec<DroppedColumn>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PreparedArtifact {
    pub run_config: RunConfig,
    pub summary: PrepSummary,
    pub dataset: PreparedDataset<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub run_config: RunConfig,
    pub model: IgannModel<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FeatureEntry {
    pub name: String,
    pub magnitude: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SelectionArtifact {
    pub run_config: RunConfig,
    pub method: Method,
    pub features: Vec<FeatureEntry>,
    pub n_selected: usize,
    pub n_features: usize,
    /// Share of design columns in use.
    pub pct_selected: f64,
    /// Share of original features in use.
    pub pct_features: f64,
    /// Penalty picked by cross-validation (lasso only).
    pub lambda: Option<f64>,
    /// Criterion of the chosen support (sparse model only).
    pub bic: Option<f64>,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {what} {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {what} {}", path.display()))
}

fn load_prepared(path: &Path) -> anyhow::Result<PreparedDataset<f64>> {
    Ok(read_json::<PreparedArtifact>(path, "prepared dataset")?.dataset)
}

/// Sidecar path `<stem>.run_config.json` next to `path`.
fn sidecar(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.run_config.json"))
}

pub fn prep(s: PrepSettings) -> anyhow::Result<()> {
    let run_config = RunConfig::new("prep", &s)?;
    let mut options = LoadOptions::new(s.target.clone());
    for c in &s.categorical {
        options = options.with_kind(c.clone(), ColumnKind::Categorical);
    }
    let raw = load_csv(&s.data, &options)?;
    let mut config = PreprocessConfig::new(s.task).with_id_columns(&s.id_columns);
    config.max_levels = s.max_levels;
    let dataset = preprocess::<f64>(&raw, &config)?;
    let summary = PrepSummary {
        rows: dataset.n_rows(),
        columns: dataset.n_cols(),
        numeric_features: dataset.count_groups(FeatureKind::Numeric),
        categorical_features: dataset.count_groups(FeatureKind::Categorical),
        groups: dataset
            .groups
            .iter()
            .map(|g| GroupSummary {
                name: g.name.clone(),
                kind: g.kind,
                columns: g.len,
            })
            .collect(),
        dropped: dataset.dropped.clone(),
    };
    println!(
        "{} rows, {} columns: {} numeric, {} categorical features",
        summary.rows, summary.columns, summary.numeric_features, summary.categorical_features
    );
    for d in &summary.dropped {
        println!("dropped {} ({})", d.name, d.reason);
    }
    write_json(
        &s.out,
        &PreparedArtifact {
            run_config,
            summary,
            dataset,
        },
    )
}

pub fn train(s: TrainSettings) -> anyhow::Result<()> {
    let run_config = RunConfig::new("train", &s)?;
    let data = load_prepared(&s.data)?;
    let config = s.igann.to_config(data.task, s.sparse, s.seed);
    let model = fit(&data, &config)?;
    if let Some(last) = model.training_log.last() {
        println!("rounds: {}, train loss: {:.6}", model.stages.len(), last.train_loss);
    } else {
        println!("rounds: 0 (intercept only)");
    }
    if model.config.sparse {
        let names: Vec<String> = model.selected_features().into_iter().map(|f| f.name).collect();
        println!("selected: {{{}}}", names.join(", "));
    }
    write_json(&s.out, &ModelArtifact { run_config, model })
}

/// Standard deviation over the training rows of a feature's summed column
/// contributions.
fn contribution_sd(model: &IgannModel<f64>, data: &PreparedDataset<f64>, columns: &[usize]) -> f64 {
    let mut total = vec![0.0; data.n_rows()];
    for &c in columns {
        for (t, v) in total.iter_mut().zip(model.column_contribution(c, data.x.column(c))) {
            *t += v;
        }
    }
    let mean = total.iter().sum::<f64>() / total.len().max(1) as f64;
    (total.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / total.len().max(1) as f64).sqrt()
}

pub fn select(s: SelectSettings) -> anyhow::Result<()> {
    let run_config = RunConfig::new("select", &s)?;
    let data = load_prepared(&s.data)?;
    let n_features = data.groups.len();
    let artifact = match s.method {
        Method::Igann => {
            let model = fit(&data, &s.igann.to_config(data.task, true, s.seed))?;
            let features: Vec<FeatureEntry> = model
                .selected_features()
                .into_iter()
                .map(|f| FeatureEntry {
                    magnitude: contribution_sd(&model, &data, &f.columns),
                    name: f.name,
                })
                .collect();
            SelectionArtifact {
                run_config,
                method: s.method,
                n_selected: features.len(),
                n_features,
                pct_selected: model.pct_selected(SelectionLevel::Columns),
                pct_features: model.pct_selected(SelectionLevel::Features),
                features,
                lambda: None,
                bic: model.selection.as_ref().map(|sel| sel.bic),
            }
        }
        Method::Lasso => {
            let grid = lambda_grid(data.x.view(), data.y.view(), s.lasso_grid, 1e-3);
            let folds = kfold_split(data.n_rows(), s.folds, s.seed)?;
            let sel = lasso_select(&data, &folds, &grid)?;
            let features: Vec<FeatureEntry> = sel
                .features
                .iter()
                .map(|f| FeatureEntry {
                    name: f.name.clone(),
                    magnitude: f.magnitude,
                })
                .collect();
            SelectionArtifact {
                run_config,
                method: s.method,
                n_selected: features.len(),
                n_features,
                pct_selected: sel.pct_selected,
                pct_features: features.len() as f64 / n_features as f64,
                features,
                lambda: Some(sel.lambda),
                bic: None,
            }
        }
    };
    for f in &artifact.features {
        println!("{}\t{:.6}", f.name, f.magnitude);
    }
    println!("pct_selected: {:.4}", artifact.pct_selected);
    write_json(&s.out, &artifact)
}

#[derive(Debug, Serialize)]
struct ReportArtifact<'a> {
    run_config: &'a RunConfig,
    report: &'a igann_sparse::eval::BenchmarkReport,
}

pub fn benchmark(s: BenchmarkSettings) -> anyhow::Result<()> {
    let run_config = RunConfig::new("benchmark", &s)?;
    let registry = Registry::load(&s.registry)?;
    let options = BenchmarkOptions {
        repeats: s.repeats,
        folds: s.folds,
        igann: s.igann.to_config(Task::Regression, false, 0),
        lasso_grid_size: s.lasso_grid,
        lasso_grid_ratio: 1e-3,
        lasso_inner_folds: 5,
        selection_level: s.level,
    };
    let report = run_benchmark(&registry, &s.models, &options)?;
    let table = render_table(&report);
    print!("{table}");
    write_json(
        &s.out.join("report.json"),
        &ReportArtifact {
            run_config: &run_config,
            report: &report,
        },
    )?;
    write_text(&s.out.join("report.txt"), &table)?;
    write_json(&s.out.join("run_config.json"), &run_config)
}

pub fn sweep(s: SweepSettings) -> anyhow::Result<()> {
    let run_config = RunConfig::new("sweep", &s)?;
    let data = load_prepared(&s.data)?;
    let options = SweepOptions {
        igann: s.igann.to_config(data.task, true, 0),
        folds: s.folds,
        repeats: s.repeats,
    };
    let points = sweep_features(&data, &s.counts, &options)?;
    let csv = sweep_to_csv(&points);
    print!("{csv}");
    write_text(&s.out, &csv)?;
    write_json(&sidecar(&s.out), &run_config)
}

fn file_name_for(feature: &str) -> String {
    let clean: String = feature
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' })
        .collect();
    format!("{clean}.csv")
}

pub fn shapes(s: ShapesSettings) -> anyhow::Result<()> {
    let run_config = RunConfig::new("shapes", &s)?;
    let artifact: ModelArtifact = read_json(&s.model, "model")?;
    let model = artifact.model;
    let mut index = Vec::new();
    for shape in model.shape_functions(s.grid)? {
        let scaler = &model.scaler[shape.column];
        let mut csv = String::from("x,x_original,value\n");
        for (x, v) in shape.grid.iter().zip(&shape.values) {
            csv.push_str(&format!("{x},{},{v}\n", scaler.inverse(*x)));
        }
        let name = file_name_for(&shape.feature);
        write_text(&s.out.join(&name), &csv)?;
        println!("{} -> {}", shape.feature, name);
        index.push(serde_json::json!({
            "feature": shape.feature,
            "group": shape.group,
            "file": name,
        }));
    }
    write_json(
        &s.out.join("run_config.json"),
        &serde_json::json!({
            "run_config": run_config,
            "model_run_config": artifact.run_config,
            "intercept": model.shape_intercept(),
            "shapes": index,
        }),
    )
}
