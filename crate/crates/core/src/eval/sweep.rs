use ndarray::Axis;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mean_sd;
use super::metrics::score;
use crate::data::{kfold_split, PreparedDataset};
use crate::error::{Error, Result};
use crate::gam::{fit, IgannConfig};
use crate::rng::{derive_seed, roles};
use crate::scalar::Float;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions<F> {
    /// Template; the support size, task and seed are set per fit.
    pub igann: IgannConfig<F>,
    pub folds: usize,
    pub repeats: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub n_features: usize,
    pub metric_mean: f64,
    pub metric_sd: f64,
}

/// Cross-validated metric of sparse models whose support is forced to each
/// of `counts` blocks.
pub fn sweep_features<F: Float>(
    data: &PreparedDataset<F>,
    counts: &[usize],
    options: &SweepOptions<F>,
) -> Result<Vec<SweepPoint>> {
    let m = data.n_cols();
    if let Some(&c) = counts.iter().find(|&&c| c > m) {
        return Err(Error::SupportTooLarge { s_max: c, m });
    }
    if options.repeats == 0 {
        return Err(Error::InvalidConfig("repeats must be >= 1".into()));
    }
    let plans = (0..options.repeats as u64)
        .map(|seed| kfold_split(data.n_rows(), options.folds, seed))
        .collect::<Result<Vec<_>>>()?;
    counts
        .iter()
        .map(|&count| {
            let cells: Vec<(usize, usize)> = (0..options.repeats)
                .flat_map(|r| (0..options.folds).map(move |f| (r, f)))
                .collect();
            let values = cells
                .par_iter()
                .map(|&(r, f)| {
                    let plan = &plans[r];
                    let mut config = options.igann.clone().with_support_size(count);
                    config.task = data.task;
                    config.seed = derive_seed(plan.seed, roles::TRAINING, f as u64);
                    let model = fit(&data.select_rows(&plan.train_indices(f)), &config)?;
                    let test = plan.test_indices(f);
                    let pred = model.predict_raw(data.x.select(Axis(0), &test).view())?;
                    score(data.task, data.y.select(Axis(0), &test).view(), pred.view())
                })
                .collect::<Result<Vec<f64>>>()?;
            let (metric_mean, metric_sd) = mean_sd(&values);
            Ok(SweepPoint {
                n_features: count,
                metric_mean,
                metric_sd,
            })
        })
        .collect()
}

pub fn sweep_to_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from("n_features,metric_mean,metric_sd\n");
    for p in points {
        out.push_str(&format!("{},{},{}\n", p.n_features, p.metric_mean, p.metric_sd));
    }
    out
}
