//! Boosted ELM additive model and its sparse variant.
//!
//! Training starts from a constant (mean target, or log-odds of the base rate)
//! and adds one freshly drawn per-feature ELM per round, fitted by ridge
//! regression to the current pseudo-residuals and shrunk by the learning rate.
//! In the sparse variant the first ELM is drawn over every input column, a
//! BIC best-subset search picks the blocks to keep, and all rounds are then
//! restricted to the selected columns.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::{ColumnScaler, FeatureGroup, FeatureKind, PreparedDataset, TargetScaler, Task};
use crate::elm::{init_layer, ridge_fit, Activation, ElmLayer, OutputCoefficients};
use crate::error::{Error, Result};
use crate::linalg::mean;
use crate::rng::{derive_seed, rng_for, roles};
use crate::scalar::{sigmoid, Float};
use crate::subset::{best_subset, clamp_prob, Complexity, LossSpec, SizeTrace, SubsetConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IgannConfig<F> {
    pub task: Task,
    /// Hidden units per feature block (`k`).
    pub hidden_units: usize,
    pub n_rounds: usize,
    pub learning_rate: F,
    /// Ridge strength for every output layer.
    pub lambda: F,
    pub activation: Activation,
    pub sparse: bool,
    /// Largest support searched; `None` means `min(m, 50)`.
    pub s_max: Option<usize>,
    /// Smallest support searched.
    pub s_min: usize,
    pub complexity: Complexity,
    /// Rounds without validation improvement before stopping; 0 disables.
    pub early_stop_patience: usize,
    /// Share of training rows held out for early stopping.
    pub val_fraction: F,
    pub seed: u64,
}

impl<F: Float> IgannConfig<F> {
    pub fn new(task: Task) -> Self {
        Self {
            task,
            hidden_units: 10,
            n_rounds: 100,
            learning_rate: F::lit(0.1),
            lambda: F::lit(1e-3),
            activation: Activation::Elu,
            sparse: false,
            s_max: None,
            s_min: 0,
            complexity: Complexity::Blocks,
            early_stop_patience: 5,
            val_fraction: F::lit(0.15),
            seed: 0,
        }
    }

    pub fn sparse(mut self, sparse: bool) -> Self {
        self.sparse = sparse;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Sparse model whose support has exactly `count` blocks.
    pub fn with_support_size(mut self, count: usize) -> Self {
        self.sparse = true;
        self.s_min = count;
        self.s_max = Some(count);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.hidden_units == 0 {
            return bad("hidden_units must be >= 1".into());
        }
        if !(self.learning_rate > F::zero() && self.learning_rate <= F::one()) {
            return bad(format!("learning_rate {} not in (0, 1]", self.learning_rate));
        }
        if !(self.lambda >= F::zero()) || !self.lambda.is_finite() {
            return bad(format!("lambda {} must be finite and >= 0", self.lambda));
        }
        if !(self.val_fraction >= F::zero() && self.val_fraction <= F::lit(0.5)) {
            return bad(format!("val_fraction {} not in [0, 0.5]", self.val_fraction));
        }
        if let Some(s_max) = self.s_max {
            if self.s_min > s_max {
                return bad(format!("s_min {} exceeds s_max {s_max}", self.s_min));
            }
        }
        Ok(())
    }
}

/// Seed of the ELM drawn in boosting round `round` (0-based).
pub fn layer_seed(master: u64, round: usize) -> u64 {
    derive_seed(master, roles::LAYER, round as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage<F> {
    pub layer: ElmLayer<F>,
    pub coefficients: OutputCoefficients<F>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundLog<F> {
    /// Number of stages after this round; 0 is the intercept-only start.
    pub round: usize,
    pub train_loss: F,
    pub val_loss: Option<F>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionSummary<F> {
    /// Selected columns of `X`.
    pub columns: Vec<usize>,
    pub bic: F,
    pub log_likelihood: F,
    pub trace: Vec<SizeTrace<F>>,
}

/// Fitted additive model. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IgannModel<F> {
    pub config: IgannConfig<F>,
    pub n_inputs: usize,
    pub column_names: Vec<String>,
    pub groups: Vec<FeatureGroup>,
    pub intercept: F,
    pub stages: Vec<Stage<F>>,
    /// Columns of `X` the model may read.
    pub selected: Vec<bool>,
    pub selection: Option<SelectionSummary<F>>,
    /// Set when the sparsity layer kept no block at all.
    pub empty_selection: bool,
    pub scaler: Vec<ColumnScaler<F>>,
    pub target_scaler: Option<TargetScaler<F>>,
    /// Training range of each column, used for shape grids.
    pub feature_ranges: Vec<(F, F)>,
    /// Mean training contribution of each column, moved into the intercept
    /// of the shape-function decomposition.
    pub feature_offsets: Vec<F>,
    pub training_log: Vec<RoundLog<F>>,
}

/// Contribution of one input column, evaluated on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeFunction<F> {
    /// Column name in the prepared design.
    pub feature: String,
    pub column: usize,
    /// Original feature owning the column.
    pub group: String,
    /// Standardized input values.
    pub grid: Vec<F>,
    /// Link-scale contribution, centered over the training data.
    pub values: Vec<F>,
}

impl<F: Float> ShapeFunction<F> {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,value\n");
        for (x, v) in self.grid.iter().zip(&self.values) {
            out.push_str(&format!("{x},{v}\n"));
        }
        out
    }
}

/// Whether percentages count design columns or original features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionLevel {
    #[default]
    Columns,
    Features,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectedFeature {
    pub name: String,
    pub kind: FeatureKind,
    pub columns: Vec<usize>,
}

fn training_loss<F: Float>(task: Task, y: ArrayView1<F>, raw: ArrayView1<F>) -> F {
    if y.is_empty() {
        return F::zero();
    }
    let n = F::from_usize_lossy(y.len());
    match task {
        Task::Regression => {
            y.iter()
                .zip(raw.iter())
                .map(|(a, b)| (*a - *b) * (*a - *b))
                .sum::<F>()
                / n
        }
        Task::Classification => {
            // log(1 + e^f) − y·f, stable for both signs of f
            y.iter()
                .zip(raw.iter())
                .map(|(t, f)| {
                    let f = *f;
                    let softplus = if f > F::zero() {
                        f + (-f).exp().ln_1p()
                    } else {
                        f.exp().ln_1p()
                    };
                    softplus - *t * f
                })
                .sum::<F>()
                / n
        }
    }
}

fn pseudo_residuals<F: Float>(task: Task, y: ArrayView1<F>, raw: ArrayView1<F>) -> Array1<F> {
    match task {
        Task::Regression => &y - &raw,
        Task::Classification => y
            .iter()
            .zip(raw.iter())
            .map(|(t, f)| *t - sigmoid(*f))
            .collect(),
    }
}

fn split_validation<F: Float>(n: usize, config: &IgannConfig<F>) -> (Vec<usize>, Vec<usize>) {
    let n_val = (config.val_fraction * F::from_usize_lossy(n))
        .floor()
        .to_usize()
        .unwrap_or(0);
    if config.early_stop_patience == 0 || n_val == 0 || n - n_val < 2 {
        return ((0..n).collect(), Vec::new());
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_for(config.seed, roles::VALIDATION, 0));
    let mut val = order[..n_val].to_vec();
    let mut fit = order[n_val..].to_vec();
    val.sort_unstable();
    fit.sort_unstable();
    (fit, val)
}

/// Trains the additive model.
pub fn fit<F: Float>(data: &PreparedDataset<F>, config: &IgannConfig<F>) -> Result<IgannModel<F>> {
    config.validate()?;
    if config.task != data.task {
        return Err(Error::InvalidConfig(format!(
            "config task {} does not match dataset task {}",
            config.task, data.task
        )));
    }
    let (n, m) = data.x.dim();
    if n == 0 || m == 0 {
        return Err(Error::InvalidConfig("empty design matrix".into()));
    }
    let task = config.task;
    let k = config.hidden_units;
    let (fit_rows, val_rows) = split_validation(n, config);
    let x_fit = data.x.select(Axis(0), &fit_rows);
    let y_fit = data.y.select(Axis(0), &fit_rows);
    let x_val = data.x.select(Axis(0), &val_rows);
    let y_val = data.y.select(Axis(0), &val_rows);

    let intercept = match task {
        Task::Regression => mean(y_fit.view()),
        Task::Classification => {
            let p = clamp_prob(mean(y_fit.view()));
            (p / (F::one() - p)).ln()
        }
    };

    let mut model = IgannModel {
        config: config.clone(),
        n_inputs: m,
        column_names: data.column_names.clone(),
        groups: data.groups.clone(),
        intercept,
        stages: Vec::new(),
        selected: vec![true; m],
        selection: None,
        empty_selection: false,
        scaler: data.scaler.clone(),
        target_scaler: data.target_scaler.clone(),
        feature_ranges: column_ranges(data.x.view()),
        feature_offsets: vec![F::zero(); m],
        training_log: Vec::new(),
    };

    let mut first_layer = None;
    if config.sparse {
        let layer0 = init_layer::<F>(m, k, config.activation, layer_seed(config.seed, 0))?;
        let h0 = layer0.activations(x_fit.view())?;
        let mut sub = SubsetConfig::new(m);
        sub.s_max = config.s_max.unwrap_or(sub.s_max);
        sub.s_min = config.s_min;
        sub.lambda = config.lambda;
        sub.complexity = config.complexity;
        let selection = best_subset(h0.view(), k, y_fit.view(), &LossSpec::new(task), &sub)?;
        model.selected = (0..m).map(|c| selection.blocks.contains(&c)).collect();
        model.selection = Some(SelectionSummary {
            columns: selection.blocks.clone(),
            bic: selection.bic,
            log_likelihood: selection.log_likelihood,
            trace: selection.trace,
        });
        if selection.blocks.is_empty() {
            log::warn!("sparsity layer selected no features; returning intercept-only model");
            model.empty_selection = true;
        } else {
            first_layer = Some(layer0.restrict(&selection.blocks));
        }
    }
    let active: Vec<usize> = (0..m).filter(|&c| model.selected[c]).collect();

    let mut raw_fit = Array1::from_elem(fit_rows.len(), intercept);
    let mut raw_val = Array1::from_elem(val_rows.len(), intercept);
    let use_val = !val_rows.is_empty();
    let loss_of = |y: &Array1<F>, raw: &Array1<F>| training_loss(task, y.view(), raw.view());
    model.training_log.push(RoundLog {
        round: 0,
        train_loss: loss_of(&y_fit, &raw_fit),
        val_loss: use_val.then(|| loss_of(&y_val, &raw_val)),
    });

    let rounds = if model.empty_selection { 0 } else { config.n_rounds };
    let mut best_val = model.training_log[0].val_loss;
    let mut best_round = 0;
    for t in 0..rounds {
        let layer = match (t, first_layer.take()) {
            (0, Some(l)) => l,
            _ => init_layer::<F>(m, k, config.activation, layer_seed(config.seed, t))?
                .restrict_to_features(&active),
        };
        let residual = pseudo_residuals(task, y_fit.view(), raw_fit.view());
        let h = layer.activations(x_fit.view())?;
        let coef = ridge_fit(h.view(), residual.view(), config.lambda)?;
        let lr = config.learning_rate;
        raw_fit = raw_fit + coef.predict(h.view()) * lr;
        if use_val {
            let hv = layer.activations(x_val.view())?;
            raw_val = raw_val + coef.predict(hv.view()) * lr;
        }
        let train_loss = loss_of(&y_fit, &raw_fit);
        if !train_loss.is_finite() {
            return Err(Error::NonFinite("training loss"));
        }
        let val_loss = use_val.then(|| loss_of(&y_val, &raw_val));
        model.stages.push(Stage {
            layer,
            coefficients: coef,
        });
        model.training_log.push(RoundLog {
            round: t + 1,
            train_loss,
            val_loss,
        });
        if let (Some(v), Some(b)) = (val_loss, best_val) {
            if v < b {
                best_val = Some(v);
                best_round = t + 1;
            } else if t + 1 - best_round >= config.early_stop_patience {
                break;
            }
        } else {
            best_round = t + 1;
        }
    }
    model.stages.truncate(best_round);
    model.training_log.truncate(best_round + 1);

    model.feature_offsets = (0..m)
        .map(|c| {
            let contrib = model.column_contribution(c, data.x.column(c));
            mean(contrib.view())
        })
        .collect();
    Ok(model)
}

fn column_ranges<F: Float>(x: ArrayView2<F>) -> Vec<(F, F)> {
    x.columns()
        .into_iter()
        .map(|col| {
            col.iter().fold((F::infinity(), F::neg_infinity()), |(lo, hi), v| {
                (lo.min(*v), hi.max(*v))
            })
        })
        .collect()
}

impl<F: Float> IgannModel<F> {
    pub fn task(&self) -> Task {
        self.config.task
    }

    fn check_layout(&self, x: ArrayView2<F>) -> Result<()> {
        if x.ncols() != self.n_inputs {
            return Err(Error::DimensionMismatch {
                what: "prediction input columns",
                expected: self.n_inputs,
                found: x.ncols(),
            });
        }
        Ok(())
    }

    /// Link-scale output `c + Σ_t ν·(c_t + H_t β_t)`.
    pub fn predict_raw(&self, x: ArrayView2<F>) -> Result<Array1<F>> {
        self.check_layout(x)?;
        let mut out = Array1::from_elem(x.nrows(), self.intercept);
        let lr = self.config.learning_rate;
        for stage in &self.stages {
            let h = stage.layer.activations(x)?;
            out = out + stage.coefficients.predict(h.view()) * lr;
        }
        Ok(out)
    }

    /// Target-scale output: de-standardized values for regression,
    /// probabilities in (0, 1) for classification.
    pub fn predict(&self, x: ArrayView2<F>) -> Result<Array1<F>> {
        let raw = self.predict_raw(x)?;
        Ok(match self.task() {
            Task::Regression => match &self.target_scaler {
                Some(s) => raw.mapv(|v| s.inverse(v)),
                None => raw,
            },
            Task::Classification => raw.mapv(|v| clamp_prob(sigmoid(v))),
        })
    }

    /// Uncentered contribution of column `column` at the given input values.
    pub fn column_contribution(&self, column: usize, values: ArrayView1<F>) -> Array1<F> {
        let lr = self.config.learning_rate;
        let mut out = Array1::<F>::zeros(values.len());
        for stage in &self.stages {
            let Some(b) = stage.layer.block_of(column) else {
                continue;
            };
            let k = stage.layer.hidden;
            let beta = stage.coefficients.beta.slice(ndarray::s![b * k..(b + 1) * k]);
            for (o, v) in out.iter_mut().zip(values.iter()) {
                let s: F = stage
                    .layer
                    .block_activation(b, *v)
                    .zip(beta.iter())
                    .map(|(a, w)| a * *w)
                    .sum();
                *o += lr * s;
            }
        }
        out
    }

    /// Constant term of the centered decomposition
    /// `predict_raw(x) = shape_intercept + Σ_i shape_i(x_i)`.
    pub fn shape_intercept(&self) -> F {
        let lr = self.config.learning_rate;
        self.intercept
            + self
                .stages
                .iter()
                .map(|s| lr * s.coefficients.intercept)
                .sum::<F>()
            + self.feature_offsets.iter().copied().sum::<F>()
    }

    /// Centered shape value of column `column` at the given inputs.
    pub fn shape_values(&self, column: usize, values: ArrayView1<F>) -> Array1<F> {
        self.column_contribution(column, values) - self.feature_offsets[column]
    }

    pub fn column_index(&self, feature: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == feature).or_else(|| {
            self.groups
                .iter()
                .find(|g| g.name == feature && g.len == 1)
                .map(|g| g.start)
        })
    }

    /// Shape function of one selected column on an even grid spanning its
    /// training range.
    pub fn shape_function(&self, feature: &str, grid_size: usize) -> Result<ShapeFunction<F>> {
        let column = self
            .column_index(feature)
            .filter(|&c| self.selected[c])
            .ok_or_else(|| Error::FeatureNotInModel(feature.to_string()))?;
        let (lo, hi) = self.feature_ranges[column];
        let grid: Vec<F> = match grid_size {
            0 => Vec::new(),
            1 => vec![lo],
            g => {
                let step = (hi - lo) / F::from_usize_lossy(g - 1);
                (0..g)
                    .map(|i| if i == g - 1 { hi } else { lo + step * F::from_usize_lossy(i) })
                    .collect()
            }
        };
        let values = self.shape_values(column, Array1::from(grid.clone()).view()).to_vec();
        let group = self
            .groups
            .iter()
            .find(|g| g.columns().contains(&column))
            .map(|g| g.name.clone())
            .unwrap_or_else(|| feature.to_string());
        Ok(ShapeFunction {
            feature: self.column_names[column].clone(),
            column,
            group,
            grid,
            values,
        })
    }

    /// Shape functions for every selected column.
    pub fn shape_functions(&self, grid_size: usize) -> Result<Vec<ShapeFunction<F>>> {
        (0..self.n_inputs)
            .filter(|&c| self.selected[c])
            .map(|c| self.shape_function(&self.column_names[c].clone(), grid_size))
            .collect()
    }

    /// Original features with at least one selected column.
    pub fn selected_features(&self) -> Vec<SelectedFeature> {
        self.groups
            .iter()
            .filter_map(|g| {
                let cols: Vec<usize> = g.columns().filter(|&c| self.selected[c]).collect();
                (!cols.is_empty()).then(|| SelectedFeature {
                    name: g.name.clone(),
                    kind: g.kind,
                    columns: cols,
                })
            })
            .collect()
    }

    pub fn selected_columns(&self) -> Vec<usize> {
        (0..self.n_inputs).filter(|&c| self.selected[c]).collect()
    }

    /// Fraction of inputs the model uses.
    pub fn pct_selected(&self, level: SelectionLevel) -> f64 {
        match level {
            SelectionLevel::Columns => {
                self.selected.iter().filter(|s| **s).count() as f64 / self.n_inputs as f64
            }
            SelectionLevel::Features => {
                self.selected_features().len() as f64 / self.groups.len() as f64
            }
        }
    }

    /// Largest increase of the training loss between consecutive rounds.
    pub fn max_train_loss_increase(&self) -> F {
        self.training_log
            .windows(2)
            .map(|w| w[1].train_loss - w[0].train_loss)
            .fold(F::neg_infinity(), F::max)
            .max(F::zero())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// All-zero input with the model's column layout.
    pub fn zeros_input(&self, rows: usize) -> Array2<F> {
        Array2::zeros((rows, self.n_inputs))
    }
}
