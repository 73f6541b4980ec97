#![allow(dead_code)]

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_matrix(r: &mut ChaCha8Rng, n: usize, m: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((n, m), || r.sample(StandardNormal))
}

pub fn normal_vector(r: &mut ChaCha8Rng, n: usize) -> Array1<f64> {
    Array1::from_shape_simple_fn(n, || r.sample(StandardNormal))
}

/// Gaussian elimination with partial pivoting on a copy of `a`.
pub fn gauss_solve(a: &Array2<f64>, b: &Array1<f64>) -> Option<Array1<f64>> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = b.clone();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[[i, col]].abs().total_cmp(&m[[j, col]].abs()))?;
        if m[[piv, col]].abs() < 1e-300 {
            return None;
        }
        if piv != col {
            for j in 0..n {
                m.swap([piv, j], [col, j]);
            }
            v.swap(piv, col);
        }
        for i in col + 1..n {
            let f = m[[i, col]] / m[[col, col]];
            if f != 0.0 {
                for j in col..n {
                    m[[i, j]] -= f * m[[col, j]];
                }
                v[i] -= f * v[col];
            }
        }
    }
    let mut x = Array1::zeros(n);
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[[i, j]] * x[j]).sum();
        x[i] = (v[i] - s) / m[[i, i]];
    }
    Some(x)
}

/// `(HᵀH + λI)⁻¹ Hᵀ r` with no intercept.
pub fn ridge_normal_equations(h: &Array2<f64>, r: &Array1<f64>, lambda: f64) -> Option<Array1<f64>> {
    let mut a = h.t().dot(h);
    for i in 0..a.nrows() {
        a[[i, i]] += lambda;
    }
    gauss_solve(&a, &h.t().dot(r))
}

/// Ridge with an unpenalized intercept: centered normal equations.
pub fn ridge_with_intercept(h: &Array2<f64>, r: &Array1<f64>, lambda: f64) -> Option<(Array1<f64>, f64)> {
    let n = h.nrows() as f64;
    let hm = h.sum_axis(ndarray::Axis(0)) / n;
    let rm = r.sum() / n;
    let hc = h - &hm;
    let rc = r.mapv(|v| v - rm);
    let beta = ridge_normal_equations(&hc, &rc, lambda)?;
    let b0 = rm - hm.dot(&beta);
    Some((beta, b0))
}

/// Gaussian log-likelihood at the MLE variance.
pub fn gaussian_lnl(y: &Array1<f64>, pred: &Array1<f64>) -> f64 {
    let n = y.len() as f64;
    let mse = (y - pred).mapv(|d| d * d).sum() / n;
    -0.5 * n * ((2.0 * std::f64::consts::PI * mse.max(1e-12)).ln() + 1.0)
}

/// All subsets of `0..m` as ascending index lists.
pub fn all_subsets(m: usize) -> Vec<Vec<usize>> {
    (0u32..1 << m)
        .map(|mask| (0..m).filter(|i| mask >> i & 1 == 1).collect())
        .collect()
}

pub fn block_cols(blocks: &[usize], k: usize) -> Vec<usize> {
    blocks.iter().flat_map(|&b| b * k..(b + 1) * k).collect()
}

/// Exact binomial-sign-pattern p-value by enumerating all `2ⁿ` sign flips of
/// the given (already tie-averaged) ranks.
pub fn enumerate_signed_rank_p(ranks: &[f64], w_plus: f64) -> f64 {
    let n = ranks.len();
    let (mut le, mut ge) = (0u64, 0u64);
    for mask in 0u64..1 << n {
        let w: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if w <= w_plus + 1e-9 {
            le += 1;
        }
        if w >= w_plus - 1e-9 {
            ge += 1;
        }
    }
    (2.0 * le.min(ge) as f64 / (1u64 << n) as f64).min(1.0)
}

/// Tie-averaged 1-based ranks of |d|.
pub fn abs_ranks(d: &[f64]) -> Vec<f64> {
    d.iter()
        .map(|x| {
            let less = d.iter().filter(|y| y.abs() < x.abs()).count() as f64;
            let equal = d.iter().filter(|y| y.abs() == x.abs()).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Pairwise AUROC: concordant pairs plus half the ties.
pub fn pairwise_auroc(y: &[f64], s: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..y.len() {
        for j in 0..y.len() {
            if y[i] == 1.0 && y[j] == 0.0 {
                den += 1.0;
                if s[i] > s[j] {
                    num += 1.0;
                } else if s[i] == s[j] {
                    num += 0.5;
                }
            }
        }
    }
    num / den
}
