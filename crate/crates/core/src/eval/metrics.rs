use ndarray::ArrayView1;

use crate::data::Task;
use crate::error::{Error, Result};
use crate::scalar::Float;

/// Area under the ROC curve as the Mann–Whitney statistic: the share of
/// (positive, negative) pairs where the positive scores higher, ties counting
/// one half. Labels are 0/1.
pub fn auroc<F: Float>(y: ArrayView1<F>, scores: ArrayView1<F>) -> Result<f64> {
    if y.len() != scores.len() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: scores.len(),
        });
    }
    let mut order: Vec<(f64, bool)> = y
        .iter()
        .zip(scores.iter())
        .map(|(t, s)| (s.as_f64(), *t > F::lit(0.5)))
        .collect();
    if order.iter().any(|(s, _)| s.is_nan()) {
        return Err(Error::NonFinite("auroc scores"));
    }
    let n_pos = order.iter().filter(|(_, p)| *p).count();
    let n_neg = order.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Sum of (1-based, tie-averaged) ranks of the positives, kept doubled so
    // it stays an exact integer.
    let mut rank_sum2: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && order[j].0 == order[i].0 {
            j += 1;
        }
        let doubled_rank = (i + 1 + j) as u128;
        let pos = order[i..j].iter().filter(|(_, p)| *p).count() as u128;
        rank_sum2 += doubled_rank * pos;
        i = j;
    }
    let (np, nn) = (n_pos as u128, n_neg as u128);
    // 2·U = rank_sum2 − n_pos·(n_pos + 1)
    let u2 = rank_sum2 - np * (np + 1);
    Ok(u2 as f64 / (2 * np * nn) as f64)
}

pub fn rmse<F: Float>(y: ArrayView1<F>, pred: ArrayView1<F>) -> Result<f64> {
    if y.len() != pred.len() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: pred.len(),
        });
    }
    if y.is_empty() {
        return Err(Error::LengthMismatch { left: 0, right: 0 });
    }
    let ss: f64 = y
        .iter()
        .zip(pred.iter())
        .map(|(a, b)| (a.as_f64() - b.as_f64()).powi(2))
        .sum();
    Ok((ss / y.len() as f64).sqrt())
}

/// AUROC for classification, RMSE for regression.
pub fn score<F: Float>(task: Task, y: ArrayView1<F>, pred: ArrayView1<F>) -> Result<f64> {
    match task {
        Task::Classification => auroc(y, pred),
        Task::Regression => rmse(y, pred),
    }
}
