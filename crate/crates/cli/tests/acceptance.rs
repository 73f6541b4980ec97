//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`). Failing criteria are reported
//! but only fail the process when `IGANN_ACCEPTANCE_STRICT=1`, so the suite
//! can record honest misses on machines without the public datasets.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use common::*;
use igann_sparse::baselines::{lambda_grid, lasso_select, lasso_select_with, LassoOptions};
use igann_sparse::data::{kfold_split, Registry};
use igann_sparse::elm::{init_layer, ridge_fit_with, Activation, RidgeOptions};
use igann_sparse::eval::{
    auroc, benchmark_dataset, run_benchmark, sweep_features, wilcoxon_signed_rank, BenchmarkOptions,
    BenchmarkReport, ModelKind, SweepOptions,
};
use igann_sparse::gam::{fit, IgannConfig};
use igann_sparse::subset::{best_subset, LossSpec, SubsetConfig};
use igann_sparse::{IgannModel, PreparedDataset, Task};
use ndarray::{Array1, Array2, Axis};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

// 1. Block best-subset search against exhaustive enumeration.

const K: usize = 5;
const SUBSET_LAMBDA: f64 = 1e-3;

fn subset_instance(seed: u64, m: usize, n: usize) -> (Array2<f64>, Array1<f64>) {
    let mut r = rng(seed);
    let x = normal_matrix(&mut r, n, m);
    let h = init_layer::<f64>(m, K, Activation::Elu, seed).unwrap().activations(x.view()).unwrap();
    let mut y = normal_vector(&mut r, n);
    for j in 0..m {
        if r.random_bool(0.5) {
            let amp: f64 = r.random_range(0.05..1.0);
            let kind = r.random_range(0..3);
            for i in 0..n {
                let v = x[[i, j]];
                y[i] += amp * match kind {
                    0 => v,
                    1 => v * v - 1.0,
                    _ => v.sin(),
                };
            }
        }
    }
    (h, y)
}

fn exhaustive_minimum(h: &Array2<f64>, y: &Array1<f64>, m: usize) -> (Vec<usize>, f64) {
    let n = y.len();
    let scored: Vec<(Vec<usize>, f64)> = all_subsets(m)
        .into_iter()
        .map(|s| {
            let pred = if s.is_empty() {
                Array1::from_elem(n, y.mean().unwrap())
            } else {
                let hs = h.select(Axis(1), &block_cols(&s, K));
                let (beta, b0) = ridge_with_intercept(&hs, y, SUBSET_LAMBDA).unwrap();
                hs.dot(&beta) + b0
            };
            let score = s.len() as f64 * (n as f64).ln() - 2.0 * gaussian_lnl(y, &pred);
            (s, score)
        })
        .collect();
    let min = scored.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let tol = 1e-9 * min.abs().max(1.0);
    scored
        .into_iter()
        .filter(|(_, b)| *b <= min + tol)
        .min_by(|a, b| (a.0.len(), &a.0).cmp(&(b.0.len(), &b.0)))
        .unwrap()
}

fn subset_oracle() -> Outcome {
    let start = Instant::now();
    let spec = LossSpec::new(Task::Regression);
    let mut hits = 0;
    let mut misses = Vec::new();
    for seed in 0..200u64 {
        let m = 4 + (seed % 7) as usize;
        let (h, y) = subset_instance(10_000 + seed, m, 200);
        let mut cfg = SubsetConfig::new(m);
        cfg.lambda = SUBSET_LAMBDA;
        let sel = best_subset(h.view(), K, y.view(), &spec, &cfg).unwrap();
        let (blocks, score) = exhaustive_minimum(&h, &y, m);
        if sel.blocks == blocks && (sel.bic - score).abs() <= 1e-9 * score.abs().max(1.0) {
            hits += 1;
        } else {
            misses.push(seed);
        }
    }
    let elapsed = start.elapsed();
    Outcome::new(
        hits == 200 && elapsed < Duration::from_secs(120),
        format!("{hits}/200 instances match, {:.1}s (limit 120s), misses {misses:?}", elapsed.as_secs_f64()),
    )
}

// 2. Ridge read-out against the normal equations.

fn ridge_oracle() -> Outcome {
    let mut r = rng(2);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let n = r.random_range(5..80);
        let p = r.random_range(1..30);
        let lambda = 10f64.powf(r.random_range(-4.0..2.0));
        let h = normal_matrix(&mut r, n, p);
        let y = normal_vector(&mut r, n);
        let fit = ridge_fit_with(h.view(), y.view(), RidgeOptions::new(lambda).without_intercept()).unwrap();
        let oracle = ridge_normal_equations(&h, &y, lambda).unwrap();
        let err = (&fit.beta - &oracle).mapv(|v| v * v).sum().sqrt() / oracle.mapv(|v| v * v).sum().sqrt().max(1e-300);
        worst = worst.max(err);
    }
    Outcome::new(worst <= 1e-8, format!("500 problems, worst relative error {worst:.2e} (limit 1e-8)"))
}

// 3. Shapes plus intercept reproduce the raw prediction.

fn synthetic(task: Task, seed: u64, n: usize, m: usize) -> PreparedDataset<f64> {
    let mut r = rng(seed);
    let x = normal_matrix(&mut r, n, m);
    let eps = normal_vector(&mut r, n);
    let y = match task {
        Task::Regression => Array1::from_shape_fn(n, |i| x[[i, 0]] * x[[i, 0]] + x[[i, 1]].sin() + 0.3 * eps[i]),
        Task::Classification => Array1::from_shape_fn(n, |i| {
            let eta = 2.0 * x[[i, 0]] - x[[i, 1]] * x[[i, 1]] + 1.0;
            (r.random::<f64>() < 1.0 / (1.0 + (-eta).exp())) as u8 as f64
        }),
    };
    PreparedDataset::from_arrays(x, y, task).unwrap()
}

fn additivity_error(model: &IgannModel<f64>, x: &Array2<f64>) -> f64 {
    let raw = model.predict_raw(x.view()).unwrap();
    let mut sum = Array1::from_elem(x.nrows(), model.shape_intercept());
    for c in 0..model.n_inputs {
        sum += &model.shape_values(c, x.column(c));
    }
    (&sum - &raw).iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn additivity() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for task in [Task::Regression, Task::Classification] {
        for sparse in [false, true] {
            for seed in 0..5u64 {
                let data = synthetic(task, 300 + seed, 300, 6);
                let model = fit(&data, &IgannConfig::new(task).sparse(sparse).seed(seed)).unwrap();
                let probe = normal_matrix(&mut rng(900 + seed), 100, 6);
                worst = worst.max(additivity_error(&model, &probe));
                count += 1;
            }
        }
    }
    Outcome::new(worst <= 1e-10, format!("{count} models x 100 points, worst |error| {worst:.2e} (limit 1e-10)"))
}

// 4. Training loss never increases across boosting rounds.

fn monotonicity(reports: &[&BenchmarkReport]) -> Outcome {
    let mut fits = 0;
    let mut worst = f64::NEG_INFINITY;
    for report in reports {
        for sample in report.datasets.iter().flat_map(|d| &d.samples) {
            if let Some(inc) = sample.max_train_loss_increase {
                fits += 1;
                worst = worst.max(inc);
            }
        }
    }
    Outcome::new(
        fits > 0 && worst <= 1e-9,
        format!("{fits} boosted benchmark fits, largest round-to-round increase {worst:.2e} (slack 1e-9)"),
    )
}

// 5. A quadratic signal is found by the sparse model and missed by the lasso.

fn nonlinear_selection() -> Outcome {
    let one_se = LassoOptions {
        one_standard_error: true,
        ..LassoOptions::default()
    };
    let (mut igann_hits, mut lasso_hits, mut noise_hits, mut one_se_hits) = (0, 0, 0, 0);
    for seed in 0..20u64 {
        let mut r = rng(5_000 + seed);
        let x = normal_matrix(&mut r, 1000, 10);
        let y = x.column(0).mapv(|v| v * v) + normal_vector(&mut r, 1000);
        let data = PreparedDataset::from_arrays(x, y, Task::Regression).unwrap();
        let model = fit(&data, &IgannConfig::new(Task::Regression).sparse(true).seed(seed)).unwrap();
        igann_hits += model.selected[0] as usize;
        let folds = kfold_split(1000, 5, seed).unwrap();
        let grid = lambda_grid(data.x.view(), data.y.view(), 100, 1e-3);
        let sel = lasso_select(&data, &folds, &grid).unwrap();
        lasso_hits += sel.selected_columns.contains(&0) as usize;
        noise_hits += sel.selected_columns.iter().filter(|&&c| c != 0).count();
        let sel = lasso_select_with(&data, &folds, &grid, &one_se).unwrap();
        one_se_hits += sel.selected_columns.contains(&0) as usize;
    }
    Outcome::new(
        igann_hits >= 19 && lasso_hits <= 4,
        format!(
            "x1 selected by sparse model {igann_hits}/20 (need >= 19), by min-CV lasso {lasso_hits}/20 (need <= 4); \
             min-CV lasso keeps noise columns {:.0}% of the time; one-SE lasso keeps x1 {one_se_hits}/20",
            100.0 * noise_hits as f64 / 180.0
        ),
    )
}

// 6. Exact Wilcoxon p-values.

fn wilcoxon_exactness() -> Outcome {
    let mut checked = 0;
    let mut mismatches = 0;
    // Every sign pattern of distinct magnitudes 1..n.
    for n in 5..=12usize {
        for mask in 0u32..1 << n {
            let d: Vec<f64> = (0..n).map(|i| if mask >> i & 1 == 1 { (i + 1) as f64 } else { -((i + 1) as f64) }).collect();
            checked += 1;
            mismatches += !wilcoxon_matches(&d) as usize;
        }
    }
    // Tied magnitudes and zero differences.
    let mut r = rng(6);
    for _ in 0..5000 {
        let n = r.random_range(1..=12);
        let d: Vec<f64> = (0..n).map(|_| r.random_range(-4i32..=4) as f64).collect();
        checked += 1;
        mismatches += !wilcoxon_matches(&d) as usize;
    }
    let spot = wilcoxon_signed_rank(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], &[0.0; 6], 0.0).unwrap().p_value;
    Outcome::new(
        mismatches == 0 && spot == 0.03125,
        format!("{checked} difference vectors, {mismatches} mismatches; n=6 all positive p = {spot}"),
    )
}

fn wilcoxon_matches(d: &[f64]) -> bool {
    let res = wilcoxon_signed_rank(d, &vec![0.0; d.len()], 0.0).unwrap();
    let nz: Vec<f64> = d.iter().copied().filter(|v| *v != 0.0).collect();
    if nz.len() < 5 {
        return res.degenerate && res.p_value == 1.0;
    }
    let ranks = abs_ranks(&nz);
    let w_plus: f64 = nz.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).map(|(_, r)| *r).sum();
    res.p_value == enumerate_signed_rank_p(&ranks, w_plus)
}

// 7. AUROC against pairwise enumeration.

fn auroc_oracle() -> Outcome {
    let mut r = rng(7);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let n = r.random_range(2..30);
        let mut y: Vec<f64> = (0..n).map(|_| r.random_range(0..2) as f64).collect();
        y[0] = 0.0;
        y[1] = 1.0;
        let s: Vec<f64> = (0..n).map(|_| r.random_range(0..6) as f64).collect();
        let got = auroc(Array1::from(y.clone()).view(), Array1::from(s.clone()).view()).unwrap();
        mismatches += (got != pairwise_auroc(&y, &s)) as usize;
    }
    Outcome::new(mismatches == 0, format!("1000 tied-score instances, {mismatches} mismatches"))
}

// 8. Desk-scale reproduction on wine and house.

const PUBLISHED_PCT: [(&str, f64); 2] = [("wine", 0.348), ("house", 0.786)];

fn reproduction(registry: &Registry, reports: &mut Vec<BenchmarkReport>) -> Outcome {
    let start = Instant::now();
    let options = BenchmarkOptions::<f64>::default();
    let models = [ModelKind::IgannFull, ModelKind::IgannSparse];
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, target_pct) in PUBLISHED_PCT {
        let Some(entry) = registry.get(name) else {
            pass = false;
            parts.push(format!("{name}: not in registry"));
            continue;
        };
        let data = match entry.load::<f64>(&registry.base_dir) {
            Ok(d) => d,
            Err(e) => {
                pass = false;
                parts.push(format!("{name}: dataset not found ({e}); run scripts/fetch_datasets.sh"));
                continue;
            }
        };
        let report = benchmark_dataset(name, &data, &models, &options).unwrap();
        let full = report.summary(ModelKind::IgannFull).unwrap();
        let sparse = report.summary(ModelKind::IgannSparse).unwrap();
        // Summaries hold raw metrics: AUROC grows with quality, RMSE shrinks.
        let within_sd = match data.task {
            Task::Classification => sparse.mean >= full.mean - full.sd,
            Task::Regression => sparse.mean <= full.mean + full.sd,
        };
        let within_pct = (sparse.pct_selected - target_pct).abs() <= 0.15;
        pass &= within_sd && within_pct;
        parts.push(format!(
            "{name}: sparse {:.4} vs full {:.4} +/- {:.4} [{}], selected {:.1}% vs {:.1}% [{}]",
            sparse.mean,
            full.mean,
            full.sd,
            if within_sd { "ok" } else { "miss" },
            100.0 * sparse.pct_selected,
            100.0 * target_pct,
            if within_pct { "ok" } else { "miss" },
        ));
        reports.push(BenchmarkReport {
            repeats: options.repeats,
            folds: options.folds,
            models: models.to_vec(),
            datasets: vec![report],
            failures: Vec::new(),
        });
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(30 * 60);
    parts.push(format!("{:.0}s (limit 1800s)", elapsed.as_secs_f64()));
    Outcome::new(pass, parts.join("; "))
}

/// Same protocol on the shipped red-wine data. Informational only.
fn red_wine_note(registry: &Registry) -> Option<(String, BenchmarkReport)> {
    let entry = registry.get("wine_red")?;
    let data = entry.load::<f64>(&registry.base_dir).ok()?;
    let options = BenchmarkOptions::<f64>::default();
    let models = [ModelKind::IgannFull, ModelKind::IgannSparse];
    let report = benchmark_dataset("wine_red", &data, &models, &options).ok()?;
    let full = report.summary(ModelKind::IgannFull)?;
    let sparse = report.summary(ModelKind::IgannSparse)?;
    let line = format!(
        "wine_red 20x5: sparse {:.4} vs full {:.4} +/- {:.4}, selected {:.1}%",
        sparse.mean,
        full.mean,
        full.sd,
        100.0 * sparse.pct_selected
    );
    let wrapped = BenchmarkReport {
        repeats: options.repeats,
        folds: options.folds,
        models: models.to_vec(),
        datasets: vec![report],
        failures: Vec::new(),
    };
    Some((line, wrapped))
}

// 9. Four features come close to the full feature set.

fn sweep_plateau(registry: &Registry) -> Outcome {
    let Some(data) = registry.get("breast_cancer").and_then(|e| e.load::<f64>(&registry.base_dir).ok()) else {
        return Outcome::new(false, "breast_cancer: dataset not found");
    };
    let m = data.n_cols();
    let options = SweepOptions {
        igann: IgannConfig::new(Task::Classification),
        folds: 5,
        repeats: 1,
    };
    let points = sweep_features(&data, &[4, m], &options).unwrap();
    let gap = points[1].metric_mean - points[0].metric_mean;
    Outcome::new(
        gap <= 0.03,
        format!(
            "breast_cancer AUROC at 4 features {:.4}, at {m} features {:.4}, gap {gap:.4} (limit 0.03)",
            points[0].metric_mean, points[1].metric_mean
        ),
    )
}

// 10. Two CLI benchmark runs write identical bytes.

fn determinism(scratch: &Path) -> Outcome {
    let data = data_dir().canonicalize().unwrap();
    let registry = scratch.join("registry.toml");
    let body: String = ["breast_cancer.csv|benign|classification", "winequality-red.csv|quality|regression"]
        .iter()
        .map(|spec| {
            let f: Vec<&str> = spec.split('|').collect();
            format!(
                "[[dataset]]\nname = {:?}\npath = {:?}\ntarget = {:?}\ntask = {:?}\n\n",
                f[0].trim_end_matches(".csv"),
                data.join(f[0]).to_str().unwrap(),
                f[1],
                f[2]
            )
        })
        .collect();
    fs::write(&registry, body).unwrap();
    let out = scratch.join("bench");
    let mut runs = Vec::new();
    for _ in 0..2 {
        let status = Command::new(env!("CARGO_BIN_EXE_igann"))
            .args(["benchmark", "--registry", registry.to_str().unwrap(), "--repeats", "2", "--folds", "3"])
            .args(["--rounds", "20", "--lasso-grid", "20", "--out", out.to_str().unwrap()])
            .stdout(std::process::Stdio::null())
            .status()
            .expect("spawn igann");
        if !status.success() {
            return Outcome::new(false, format!("igann benchmark exited with {status}"));
        }
        let read = |f: &str| fs::read(out.join(f)).unwrap_or_default();
        runs.push((read("report.json"), read("report.txt"), read("run_config.json")));
    }
    let same = runs[0] == runs[1];
    Outcome::new(
        same && !runs[0].0.is_empty(),
        format!("two runs over 2 datasets: report.json {} bytes, identical: {same}", runs[0].0.len()),
    )
}

fn main() -> ExitCode {
    let strict = std::env::var("IGANN_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let registry = Registry::load(data_dir().join("registry.toml")).expect("data/registry.toml");
    let scratch = tempfile::tempdir().unwrap();
    let mut results: Vec<(usize, &str, Outcome, f64)> = Vec::new();
    let mut run = |id: usize, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let outcome = f();
        let secs = t.elapsed().as_secs_f64();
        println!("{} {id:>2} {name}: {} ({secs:.1}s)", if outcome.pass { "PASS" } else { "FAIL" }, outcome.detail);
        results.push((id, name, outcome, secs));
    };

    let mut reports = Vec::new();
    run(1, "subset search equals exhaustive BIC minimum", &mut subset_oracle);
    run(2, "ridge read-out equals normal equations", &mut ridge_oracle);
    run(3, "shapes plus intercept equal raw prediction", &mut additivity);
    run(5, "quadratic signal: sparse model vs lasso", &mut nonlinear_selection);
    run(6, "Wilcoxon p-values equal sign enumeration", &mut wilcoxon_exactness);
    run(7, "AUROC equals pairwise enumeration", &mut auroc_oracle);
    run(8, "wine and house reproduction", &mut || reproduction(&registry, &mut reports));
    if let Some((line, report)) = red_wine_note(&registry) {
        println!("NOTE    {line}");
        reports.push(report);
    }
    run(9, "sweep plateau at four features", &mut || sweep_plateau(&registry));
    let local = run_benchmark(&registry, &[ModelKind::IgannFull, ModelKind::IgannSparse], &{
        let mut o = BenchmarkOptions::<f64>::default();
        o.repeats = 2;
        o
    })
    .unwrap();
    let mut all: Vec<&BenchmarkReport> = reports.iter().collect();
    all.push(&local);
    run(4, "training loss non-increasing on benchmark fits", &mut || monotonicity(&all));
    run(10, "CLI benchmark reruns are byte-identical", &mut || determinism(scratch.path()));

    results.sort_by_key(|r| r.0);
    let passed = results.iter().filter(|r| r.2.pass).count();
    println!("{passed}/{} criteria passed", results.len());
    for (id, name, outcome, _) in &results {
        if !outcome.pass {
            println!("  failed {id}: {name}");
        }
    }
    if strict && passed < results.len() {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
