//! L1-penalized linear and logistic regression used as a baseline feature
//! selector.

use ndarray::{Array1, ArrayView1, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{FoldPlan, PreparedDataset, Task};
use crate::error::{Error, Result};
use crate::linalg::{column_means, mean};
use crate::scalar::{all_finite, sigmoid, Float};
use crate::subset::clamp_prob;

/// `S(z, t) = sign(z)·max(|z| − t, 0)`.
#[inline]
pub fn soft_threshold<F: Float>(z: F, t: F) -> F {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        F::zero()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoModel<F> {
    pub coefficients: Array1<F>,
    pub intercept: F,
    pub lambda: F,
    pub task: Task,
    pub iterations: usize,
}

impl<F: Float> LassoModel<F> {
    pub fn decision(&self, x: ArrayView2<F>) -> Array1<F> {
        x.dot(&self.coefficients) + self.intercept
    }

    /// Regression values or class-1 probabilities.
    pub fn predict(&self, x: ArrayView2<F>) -> Array1<F> {
        let raw = self.decision(x);
        match self.task {
            Task::Regression => raw,
            Task::Classification => raw.mapv(|v| clamp_prob(sigmoid(v))),
        }
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.coefficients.len())
            .filter(|&j| self.coefficients[j] != F::zero())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LassoOptions<F> {
    /// Stop once no coefficient moves by more than this in a full sweep.
    pub tol: F,
    pub max_iter: usize,
    /// In `lasso_select`, take the largest λ whose CV loss is within one
    /// standard error of the minimum instead of the minimum itself.
    pub one_standard_error: bool,
}

impl<F: Float> Default for LassoOptions<F> {
    fn default() -> Self {
        Self {
            tol: F::lit(1e-7),
            max_iter: 100_000,
            one_standard_error: false,
        }
    }
}

fn check_inputs<F: Float>(x: ArrayView2<F>, y: ArrayView1<F>, lambda: F) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.nrows(),
            right: y.len(),
        });
    }
    if !all_finite(x.iter()) {
        return Err(Error::NonFinite("lasso design"));
    }
    if !all_finite(y.iter()) {
        return Err(Error::NonFinite("lasso target"));
    }
    if !(lambda >= F::zero()) || !lambda.is_finite() {
        return Err(Error::InvalidConfig("lasso lambda must be finite and >= 0".into()));
    }
    Ok(())
}

/// Smallest λ at which every coefficient is zero: `max_j |x_jᵀ(y − ȳ)|/n`.
/// The same expression bounds the logistic case at the intercept-only fit.
pub fn lambda_max<F: Float>(x: ArrayView2<F>, y: ArrayView1<F>) -> F {
    let ym = mean(y);
    let yc = y.mapv(|v| v - ym);
    let n = F::from_usize_lossy(y.len().max(1));
    x.t().dot(&yc)
        .iter()
        .fold(F::zero(), |m, v| m.max(v.abs()))
        / n
}

/// `count` log-spaced values from `λ_max` down to `ratio·λ_max`.
pub fn lambda_grid<F: Float>(x: ArrayView2<F>, y: ArrayView1<F>, count: usize, ratio: F) -> Vec<F> {
    let top = lambda_max(x, y);
    if count == 0 {
        return Vec::new();
    }
    if count == 1 || top <= F::zero() {
        return vec![top];
    }
    let lo = (top * ratio).ln();
    let hi = top.ln();
    (0..count)
        .map(|i| {
            let t = F::from_usize_lossy(i) / F::from_usize_lossy(count - 1);
            (hi + (lo - hi) * t).exp()
        })
        .collect()
}

struct Columns<F> {
    cols: Vec<Vec<F>>,
    means: Array1<F>,
}

impl<F: Float> Columns<F> {
    fn centered(x: ArrayView2<F>) -> Self {
        let means = column_means(x);
        let cols = x
            .columns()
            .into_iter()
            .zip(means.iter())
            .map(|(c, m)| c.iter().map(|v| *v - *m).collect())
            .collect();
        Self { cols, means }
    }
}

fn dot<F: Float>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

fn cd_regression<F: Float>(
    cols: &Columns<F>,
    y: ArrayView1<F>,
    lambda: F,
    warm: Option<&Array1<F>>,
    opts: &LassoOptions<F>,
) -> Result<LassoModel<F>> {
    let n = y.len();
    let nf = F::from_usize_lossy(n);
    let m = cols.cols.len();
    let ym = mean(y);
    let mut beta = warm.cloned().unwrap_or_else(|| Array1::zeros(m));
    let scale: Vec<F> = cols.cols.iter().map(|c| dot(c, c) / nf).collect();
    let mut resid: Vec<F> = y.iter().map(|v| *v - ym).collect();
    for (j, c) in cols.cols.iter().enumerate() {
        if beta[j] != F::zero() {
            for (r, v) in resid.iter_mut().zip(c) {
                *r -= beta[j] * *v;
            }
        }
    }
    for iter in 1..=opts.max_iter {
        let mut max_change = F::zero();
        for j in 0..m {
            if scale[j] <= F::zero() {
                beta[j] = F::zero();
                continue;
            }
            let c = &cols.cols[j];
            let z = dot(c, &resid) / nf + scale[j] * beta[j];
            let next = soft_threshold(z, lambda) / scale[j];
            let delta = next - beta[j];
            if delta != F::zero() {
                for (r, v) in resid.iter_mut().zip(c) {
                    *r -= delta * *v;
                }
                beta[j] = next;
                max_change = max_change.max(delta.abs());
            }
        }
        if max_change < opts.tol {
            let intercept = ym - cols.means.dot(&beta);
            return Ok(LassoModel {
                coefficients: beta,
                intercept,
                lambda,
                task: Task::Regression,
                iterations: iter,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
    })
}

fn logistic_objective<F: Float>(eta: &[F], y: ArrayView1<F>) -> F {
    let n = F::from_usize_lossy(y.len());
    eta.iter()
        .zip(y.iter())
        .map(|(f, t)| {
            let f = *f;
            let sp = if f > F::zero() {
                f + (-f).exp().ln_1p()
            } else {
                f.exp().ln_1p()
            };
            sp - *t * f
        })
        .sum::<F>()
        / n
}

/// Proximal Newton: each outer step replaces the logistic loss by its
/// weighted least-squares expansion and solves that lasso problem by
/// coordinate descent, then backtracks on the true objective.
fn newton_logistic<F: Float>(
    cols: &Columns<F>,
    y: ArrayView1<F>,
    lambda: F,
    warm: Option<&(Array1<F>, F)>,
    opts: &LassoOptions<F>,
) -> Result<LassoModel<F>> {
    let n = y.len();
    let nf = F::from_usize_lossy(n);
    let m = cols.cols.len();
    // Intercept is relative to the centered columns until the end.
    let (mut beta, mut b0) = match warm {
        Some((w, b)) => (w.to_vec(), *b + cols.means.dot(w)),
        None => {
            let p = clamp_prob(mean(y));
            (vec![F::zero(); m], (p / (F::one() - p)).ln())
        }
    };
    let eta_of = |beta: &[F], b0: F| -> Vec<F> {
        let mut eta = vec![b0; n];
        for (j, c) in cols.cols.iter().enumerate() {
            if beta[j] != F::zero() {
                for (e, x) in eta.iter_mut().zip(c) {
                    *e += beta[j] * *x;
                }
            }
        }
        eta
    };
    let objective = |beta: &[F], b0: F| {
        logistic_objective(&eta_of(beta, b0), y) + lambda * beta.iter().map(|b| b.abs()).sum::<F>()
    };
    let w_floor = F::lit(1e-5);
    let mut obj = objective(&beta, b0);
    let mut sweeps = 0usize;
    while sweeps < opts.max_iter {
        let eta = eta_of(&beta, b0);
        let w: Vec<F> = eta
            .iter()
            .map(|e| {
                let p = sigmoid(*e);
                (p * (F::one() - p)).max(w_floor)
            })
            .collect();
        // Working residual z − η = (y − p)/w.
        let mut rr: Vec<F> = eta
            .iter()
            .zip(y.iter())
            .zip(&w)
            .map(|((e, t), wi)| (*t - sigmoid(*e)) / *wi)
            .collect();
        let w_sum: F = w.iter().copied().sum();
        let scale: Vec<F> = cols
            .cols
            .iter()
            .map(|c| c.iter().zip(&w).map(|(x, wi)| *wi * *x * *x).sum::<F>() / nf)
            .collect();
        let mut nb = beta.clone();
        let mut nb0 = b0;
        loop {
            sweeps += 1;
            let mut max_change = F::zero();
            let shift = rr.iter().zip(&w).map(|(r, wi)| *r * *wi).sum::<F>() / w_sum;
            if shift != F::zero() {
                nb0 += shift;
                rr.iter_mut().for_each(|r| *r -= shift);
                max_change = max_change.max(shift.abs());
            }
            for j in 0..m {
                if scale[j] <= F::zero() {
                    continue;
                }
                let c = &cols.cols[j];
                let g = c.iter().zip(&rr).zip(&w).map(|((x, r), wi)| *wi * *x * *r).sum::<F>() / nf
                    + scale[j] * nb[j];
                let next = soft_threshold(g, lambda) / scale[j];
                let delta = next - nb[j];
                if delta != F::zero() {
                    for (r, x) in rr.iter_mut().zip(c) {
                        *r -= delta * *x;
                    }
                    nb[j] = next;
                    max_change = max_change.max(delta.abs());
                }
            }
            if max_change < opts.tol || sweeps >= opts.max_iter {
                break;
            }
        }
        // Backtracking along the Newton direction.
        let mut t = F::one();
        let (mut cand, mut cand0, mut cand_obj);
        loop {
            cand = beta
                .iter()
                .zip(&nb)
                .map(|(a, b)| *a + t * (*b - *a))
                .collect::<Vec<F>>();
            cand0 = b0 + t * (nb0 - b0);
            cand_obj = objective(&cand, cand0);
            if cand_obj <= obj + F::lit(1e-12) * obj.abs().max(F::one()) || t < F::lit(1e-10) {
                break;
            }
            t = t / F::lit(2.0);
        }
        let change = cand
            .iter()
            .zip(&beta)
            .map(|(a, b)| (*a - *b).abs())
            .fold((cand0 - b0).abs(), F::max);
        beta = cand;
        b0 = cand0;
        obj = cand_obj;
        if change < opts.tol {
            let coefficients = Array1::from(beta);
            let intercept = b0 - cols.means.dot(&coefficients);
            return Ok(LassoModel {
                coefficients,
                intercept,
                lambda,
                task: Task::Classification,
                iterations: sweeps,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
    })
}

/// Lasso fit: cyclic coordinate descent on
/// `(1/2n)‖y − Xβ − b‖² + λ‖β‖₁` for regression, proximal Newton on the mean logistic
/// loss plus `λ‖β‖₁` for classification. The intercept is unpenalized.
pub fn lasso_fit<F: Float>(x: ArrayView2<F>, y: ArrayView1<F>, lambda: F, task: Task) -> Result<LassoModel<F>> {
    lasso_fit_with(x, y, lambda, task, &LassoOptions::default())
}

pub fn lasso_fit_with<F: Float>(
    x: ArrayView2<F>,
    y: ArrayView1<F>,
    lambda: F,
    task: Task,
    opts: &LassoOptions<F>,
) -> Result<LassoModel<F>> {
    check_inputs(x, y, lambda)?;
    let cols = Columns::centered(x);
    match task {
        Task::Regression => cd_regression(&cols, y, lambda, None, opts),
        Task::Classification => newton_logistic(&cols, y, lambda, None, opts),
    }
}

/// Warm-started fits along a descending λ sequence.
pub fn lasso_path<F: Float>(
    x: ArrayView2<F>,
    y: ArrayView1<F>,
    lambdas: &[F],
    task: Task,
    opts: &LassoOptions<F>,
) -> Result<Vec<LassoModel<F>>> {
    if lambdas.is_empty() {
        return Err(Error::EmptyGrid);
    }
    for &l in lambdas {
        check_inputs(x, y, l)?;
    }
    let cols = Columns::centered(x);
    let mut out: Vec<LassoModel<F>> = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        let model = match task {
            Task::Regression => {
                cd_regression(&cols, y, l, out.last().map(|m| &m.coefficients), opts)?
            }
            Task::Classification => {
                let warm = out.last().map(|m| (m.coefficients.clone(), m.intercept));
                newton_logistic(&cols, y, l, warm.as_ref(), opts)?
            }
        };
        out.push(model);
    }
    Ok(out)
}

fn holdout_loss<F: Float>(task: Task, y: ArrayView1<F>, pred: ArrayView1<F>) -> F {
    let n = F::from_usize_lossy(y.len().max(1));
    match task {
        Task::Regression => {
            y.iter()
                .zip(pred.iter())
                .map(|(a, b)| (*a - *b) * (*a - *b))
                .sum::<F>()
                / n
        }
        Task::Classification => {
            -y.iter()
                .zip(pred.iter())
                .map(|(t, p)| *t * p.ln() + (F::one() - *t) * (F::one() - *p).ln())
                .sum::<F>()
                / n
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoFeature {
    pub name: String,
    /// Euclidean norm of the feature's coefficients.
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoSelection<F> {
    pub lambda: F,
    pub lambda_grid: Vec<F>,
    /// Mean held-out loss per grid value.
    pub cv_loss: Vec<F>,
    pub model: LassoModel<F>,
    pub features: Vec<LassoFeature>,
    pub selected_columns: Vec<usize>,
    /// Share of design columns with a nonzero coefficient.
    pub pct_selected: f64,
}

/// Picks λ by minimum cross-validated loss over `lambda_grid` and reports the
/// original features with any nonzero coefficient in the full-data refit.
pub fn lasso_select<F: Float>(
    data: &PreparedDataset<F>,
    folds: &FoldPlan,
    lambda_grid: &[F],
) -> Result<LassoSelection<F>> {
    lasso_select_with(data, folds, lambda_grid, &LassoOptions::default())
}

pub fn lasso_select_with<F: Float>(
    data: &PreparedDataset<F>,
    folds: &FoldPlan,
    lambda_grid: &[F],
    opts: &LassoOptions<F>,
) -> Result<LassoSelection<F>> {
    if lambda_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if folds.n_rows() != data.n_rows() {
        return Err(Error::LengthMismatch {
            left: folds.n_rows(),
            right: data.n_rows(),
        });
    }
    let task = data.task;
    let per_fold: Vec<Vec<F>> = (0..folds.k)
        .into_par_iter()
        .map(|f| {
            let train = folds.train_indices(f);
            let test = folds.test_indices(f);
            let xt = data.x.select(Axis(0), &train);
            let yt = data.y.select(Axis(0), &train);
            let xv = data.x.select(Axis(0), &test);
            let yv = data.y.select(Axis(0), &test);
            let path = lasso_path(xt.view(), yt.view(), lambda_grid, task, opts)?;
            Ok(path
                .iter()
                .map(|m| {
                    let pred = m.predict(xv.view());
                    holdout_loss(task, yv.view(), pred.view()) * F::from_usize_lossy(test.len())
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let n = F::from_usize_lossy(data.n_rows());
    let cv_loss: Vec<F> = (0..lambda_grid.len())
        .map(|i| per_fold.iter().map(|f| f[i]).sum::<F>() / n)
        .collect();
    let mut best = (0..cv_loss.len())
        .fold(0, |b, i| if cv_loss[i] < cv_loss[b] { i } else { b });
    if opts.one_standard_error && folds.k > 1 {
        let k = F::from_usize_lossy(folds.k);
        let fold_means: Vec<F> = (0..folds.k)
            .map(|f| per_fold[f][best] / F::from_usize_lossy(folds.test_indices(f).len()))
            .collect();
        let mean = fold_means.iter().copied().sum::<F>() / k;
        let var = fold_means.iter().map(|v| (*v - mean) * (*v - mean)).sum::<F>() / (k - F::one());
        let bound = cv_loss[best] + (var / k).sqrt();
        best = (0..=best).find(|&i| cv_loss[i] <= bound).unwrap_or(best);
    }
    let path = lasso_path(data.x.view(), data.y.view(), &lambda_grid[..=best], task, opts)?;
    let model = path.into_iter().last().expect("non-empty path");

    let selected_columns = model.support();
    let features = data
        .groups
        .iter()
        .filter_map(|g| {
            let norm = g
                .columns()
                .map(|c| model.coefficients[c].as_f64().powi(2))
                .sum::<f64>()
                .sqrt();
            (norm > 0.0).then(|| LassoFeature {
                name: g.name.clone(),
                magnitude: norm,
            })
        })
        .collect();
    Ok(LassoSelection {
        lambda: lambda_grid[best],
        lambda_grid: lambda_grid.to_vec(),
        cv_loss,
        pct_selected: selected_columns.len() as f64 / data.n_cols() as f64,
        selected_columns,
        features,
        model,
    })
}
