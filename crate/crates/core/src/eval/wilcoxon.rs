use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest effective sample size that uses the exact null distribution.
pub const EXACT_LIMIT: usize = 25;
/// Fewer nonzero differences than this make the test degenerate.
pub const MIN_EFFECTIVE: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Better {
    A,
    B,
    Tie,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// `min(W+, W−)`.
    pub statistic: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    pub p_value: f64,
    pub n_effective: usize,
    pub degenerate: bool,
    pub exact: bool,
    pub tolerance: f64,
    pub better: Better,
}

/// Two-sided Wilcoxon signed-rank test on `d_i = a_i − b_i + tolerance`.
///
/// Both inputs are oriented so that larger is better; a positive tolerance
/// shifts every difference in favour of `a`. Zero differences are dropped and
/// tied magnitudes share their average rank.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64], tolerance: f64) -> Result<WilcoxonResult> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if !(tolerance >= 0.0) || !tolerance.is_finite() {
        return Err(Error::InvalidConfig(format!("tolerance {tolerance} must be finite and >= 0")));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("wilcoxon samples"));
    }
    let mut diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y + tolerance)
        .filter(|d| *d != 0.0)
        .collect();
    diffs.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    let n = diffs.len();

    // Doubled average ranks are integers.
    let mut ranks2 = vec![0u64; n];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && diffs[j].abs() == diffs[i].abs() {
            j += 1;
        }
        let r2 = (i + 1 + j) as u64;
        ranks2[i..j].iter_mut().for_each(|r| *r = r2);
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let w_plus2: u64 = diffs
        .iter()
        .zip(&ranks2)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| *r)
        .sum();
    let total2: u64 = ranks2.iter().sum();
    let w_minus2 = total2 - w_plus2;
    let w_plus = w_plus2 as f64 / 2.0;
    let w_minus = w_minus2 as f64 / 2.0;
    let better = match w_plus2.cmp(&w_minus2) {
        std::cmp::Ordering::Greater => Better::A,
        std::cmp::Ordering::Less => Better::B,
        std::cmp::Ordering::Equal => Better::Tie,
    };
    let mut result = WilcoxonResult {
        statistic: w_plus.min(w_minus),
        w_plus,
        w_minus,
        p_value: 1.0,
        n_effective: n,
        degenerate: false,
        exact: n <= EXACT_LIMIT,
        tolerance,
        better,
    };
    if n < MIN_EFFECTIVE {
        result.degenerate = true;
        return Ok(result);
    }
    result.p_value = if result.exact {
        exact_p(&ranks2, w_plus2)
    } else {
        normal_p(n, w_plus, tie_term)
    };
    Ok(result)
}

/// Two-sided exact p-value: the null counts every sign pattern equally, so
/// `p = 2·min(#{W+ ≤ w}, #{W+ ≥ w}) / 2ⁿ`.
fn exact_p(ranks2: &[u64], w_plus2: u64) -> f64 {
    let total: usize = ranks2.iter().sum::<u64>() as usize;
    let mut counts = vec![0u64; total + 1];
    counts[0] = 1;
    let mut reach = 0usize;
    for &r in ranks2 {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if counts[s] > 0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let w = w_plus2 as usize;
    let le: u64 = counts[..=w].iter().sum();
    let ge: u64 = counts[w..].iter().sum();
    let patterns = (1u64 << ranks2.len()) as f64;
    (2.0 * le.min(ge) as f64 / patterns).min(1.0)
}

fn normal_p(n: usize, w_plus: f64, tie_term: f64) -> f64 {
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((w_plus - mean).abs() - 0.5).max(0.0) / var.sqrt();
    libm::erfc(z / std::f64::consts::SQRT_2).min(1.0)
}
