mod common;

use common::*;
use igann_sparse::baselines::{
    lambda_grid, lambda_max, lasso_fit, lasso_fit_with, lasso_path, lasso_select, lasso_select_with, LassoOptions,
};
use igann_sparse::data::{kfold_split, PreparedDataset, Task};
use ndarray::{Array1, Array2};
use proptest::prelude::*;
use rand::Rng;

fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

/// Largest KKT violation of a lasso solution given the score residual
/// `r = y − fitted` (regression) or `y − p` (classification).
fn kkt_violation(x: &Array2<f64>, r: &Array1<f64>, beta: &Array1<f64>, lambda: f64) -> f64 {
    let n = x.nrows() as f64;
    (0..x.ncols())
        .map(|j| {
            let g = x.column(j).dot(r) / n;
            if beta[j] == 0.0 {
                (g.abs() - lambda).max(0.0)
            } else {
                (g - lambda * beta[j].signum()).abs()
            }
        })
        .fold(0.0, f64::max)
}

fn tight() -> LassoOptions<f64> {
    LassoOptions {
        tol: 1e-10,
        max_iter: 200_000,
        ..LassoOptions::default()
    }
}

#[test]
fn zero_penalty_matches_least_squares() {
    let mut r = rng(3);
    let x = normal_matrix(&mut r, 50, 3);
    let y = x.column(0).mapv(|v| 2.0 * v) - x.column(2).mapv(|v| v) + normal_vector(&mut r, 50);
    let fit = lasso_fit_with(x.view(), y.view(), 0.0, Task::Regression, &tight()).unwrap();
    let (beta, b0) = ridge_with_intercept(&x, &y, 0.0).unwrap();
    for (a, b) in fit.coefficients.iter().zip(beta.iter()) {
        assert!((a - b).abs() < 1e-6);
    }
    assert!((fit.intercept - b0).abs() < 1e-6);
}

#[test]
fn logistic_solution_satisfies_kkt() {
    let mut r = rng(4);
    let x = normal_matrix(&mut r, 200, 6);
    let y = Array1::from_shape_fn(200, |i| {
        if r.random::<f64>() < sigmoid(1.5 * x[[i, 0]] - x[[i, 3]]) { 1.0 } else { 0.0 }
    });
    let lmax = lambda_max(x.view(), y.view());
    for frac in [0.5, 0.1, 0.01] {
        let fit = lasso_fit_with(x.view(), y.view(), frac * lmax, Task::Classification, &tight()).unwrap();
        let p = fit.decision(x.view()).mapv(sigmoid);
        let resid = &y - &p;
        assert!(resid.sum().abs() / 200.0 < 1e-6, "intercept stationarity");
        assert!(kkt_violation(&x, &resid, &fit.coefficients, frac * lmax) < 1e-6);
    }
    let null = lasso_fit(x.view(), y.view(), lmax * (1.0 + 1e-9), Task::Classification).unwrap();
    assert!(null.coefficients.iter().all(|c| *c == 0.0));
}

#[test]
fn nonlinear_signal_is_missed_but_linear_is_found() {
    let (mut quad_hits, mut lin_hits) = (0, 0);
    for seed in 0..20u64 {
        let mut r = rng(1000 + seed);
        let x = normal_matrix(&mut r, 1000, 10);
        let eps = normal_vector(&mut r, 1000);
        let folds = kfold_split(1000, 5, seed).unwrap();
        let lin = &x.column(0).mapv(|v| 3.0 * v) + &eps;
        let data = PreparedDataset::from_arrays(x.clone(), lin, Task::Regression).unwrap();
        let grid = lambda_grid(data.x.view(), data.y.view(), 100, 1e-3);
        let sel = lasso_select(&data, &folds, &grid).unwrap();
        lin_hits += sel.selected_columns.contains(&0) as usize;
        let quad = &x.column(0).mapv(|v| v * v) + &eps;
        let data = PreparedDataset::from_arrays(x, quad, Task::Regression).unwrap();
        let grid = lambda_grid(data.x.view(), data.y.view(), 100, 1e-3);
        let sel = lasso_select(&data, &folds, &grid).unwrap();
        quad_hits += sel.selected_columns.contains(&0) as usize;
    }
    eprintln!("linear x1 hits {lin_hits}/20, quadratic x1 hits {quad_hits}/20");
    assert!(lin_hits >= 19);
}

#[test]
fn pure_noise_selects_few_features() {
    // "Near zero" read as at most two of ten columns.
    let mut sparse_runs = 0;
    let mut counts = Vec::new();
    for seed in 0..20u64 {
        let mut r = rng(2000 + seed);
        let x = normal_matrix(&mut r, 500, 10);
        let y = normal_vector(&mut r, 500);
        let data = PreparedDataset::from_arrays(x, y, Task::Regression).unwrap();
        let grid = lambda_grid(data.x.view(), data.y.view(), 100, 1e-3);
        let sel = lasso_select(&data, &kfold_split(500, 5, seed).unwrap(), &grid).unwrap();
        counts.push(sel.selected_columns.len());
        sparse_runs += (sel.selected_columns.len() <= 2) as usize;
    }
    eprintln!("pure noise support sizes {counts:?}");
    assert!(sparse_runs >= 18, "{counts:?}");
}

#[test]
fn one_standard_error_rule_never_picks_a_smaller_penalty() {
    let opts = LassoOptions {
        one_standard_error: true,
        ..LassoOptions::default()
    };
    let (mut min_hits, mut se_hits) = (0, 0);
    for seed in 0..10u64 {
        let mut r = rng(3000 + seed);
        let x = normal_matrix(&mut r, 400, 6);
        let y = x.column(0).mapv(|v| v * v) + normal_vector(&mut r, 400);
        let data = PreparedDataset::from_arrays(x, y, Task::Regression).unwrap();
        let grid = lambda_grid(data.x.view(), data.y.view(), 50, 1e-3);
        let folds = kfold_split(400, 5, seed).unwrap();
        let min = lasso_select(&data, &folds, &grid).unwrap();
        let se = lasso_select_with(&data, &folds, &grid, &opts).unwrap();
        assert!(se.lambda >= min.lambda);
        assert!(se.selected_columns.len() <= min.selected_columns.len());
        assert_eq!(se.cv_loss, min.cv_loss);
        min_hits += min.selected_columns.contains(&0) as usize;
        se_hits += se.selected_columns.contains(&0) as usize;
    }
    eprintln!("quadratic x1 hits: min-CV {min_hits}/10, one-SE {se_hits}/10");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn regression_solution_satisfies_kkt(seed in any::<u64>(), frac in 0.001f64..1.2) {
        let mut r = rng(seed);
        let x = normal_matrix(&mut r, 80, 7);
        let y = x.column(1).mapv(|v| 1.5 * v) + normal_vector(&mut r, 80);
        let lambda = frac * lambda_max(x.view(), y.view());
        let fit = lasso_fit_with(x.view(), y.view(), lambda, Task::Regression, &tight()).unwrap();
        let resid = &y - &fit.decision(x.view());
        prop_assert!(resid.sum().abs() / 80.0 < 1e-8);
        prop_assert!(kkt_violation(&x, &resid, &fit.coefficients, lambda) < 1e-6);
        if frac >= 1.0 {
            prop_assert!(fit.coefficients.iter().all(|c| *c == 0.0));
        }
    }

    #[test]
    fn warm_path_matches_cold_fits(seed in any::<u64>()) {
        let mut r = rng(seed);
        let x = normal_matrix(&mut r, 60, 5);
        let y = x.column(0) .mapv(|v| v) - x.column(4).mapv(|v| 0.5 * v) + normal_vector(&mut r, 60);
        let grid = lambda_grid(x.view(), y.view(), 15, 1e-2);
        let path = lasso_path(x.view(), y.view(), &grid, Task::Regression, &tight()).unwrap();
        for (model, &l) in path.iter().zip(&grid) {
            let cold = lasso_fit_with(x.view(), y.view(), l, Task::Regression, &tight()).unwrap();
            for (a, b) in model.coefficients.iter().zip(cold.coefficients.iter()) {
                prop_assert!((a - b).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn scaling_the_target_scales_the_path(seed in any::<u64>(), c in 0.1f64..10.0) {
        let mut r = rng(seed);
        let x = normal_matrix(&mut r, 60, 5);
        let y = x.column(2).mapv(|v| 2.0 * v) + normal_vector(&mut r, 60);
        let ys = y.mapv(|v| c * v);
        prop_assert!((lambda_max(x.view(), ys.view()) - c * lambda_max(x.view(), y.view())).abs() < 1e-9 * c);
        for frac in [0.5, 0.2, 0.05] {
            let l = frac * lambda_max(x.view(), y.view());
            let a = lasso_fit_with(x.view(), y.view(), l, Task::Regression, &tight()).unwrap();
            let b = lasso_fit_with(x.view(), ys.view(), c * l, Task::Regression, &tight()).unwrap();
            prop_assert_eq!(a.support(), b.support());
            for (u, v) in a.coefficients.iter().zip(b.coefficients.iter()) {
                prop_assert!((c * u - v).abs() < 1e-6 * c.max(1.0));
            }
        }
    }
}
