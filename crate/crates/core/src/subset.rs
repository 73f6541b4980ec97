//! Block-wise best-subset selection scored by BIC.
//!
//! The hidden activations of an ELM split into `m` blocks of `k` columns, one
//! block per input feature. A candidate support `S` is scored by fitting ridge
//! coefficients on the retained blocks and evaluating
//! `BIC = df(S)·ln(n) − 2·ln L̂`, where `df(S) = |S|` counts blocks.
//!
//! The search sweeps support sizes. At each size the previous support is grown
//! by the block with the largest forward sacrifice, then improved by splicing
//! (swap the `c` least useful active blocks for the `c` most promising
//! inactive ones) and, when the neighbourhood is small enough, by full
//! single-block exchange passes until no candidate lowers BIC.
//!
//! For classification the candidates are scored on a single Newton step from
//! the intercept-only logistic model (a least-squares fit on the working
//! response); the chosen support is then refit to convergence.

use std::cmp::Ordering;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::data::Task;
use crate::elm::{ridge_fit, OutputCoefficients};
use crate::error::{Error, Result};
use crate::linalg::{center_columns, mean, Cholesky};
use crate::scalar::{all_finite, sigmoid, Float};

/// Probabilities are clamped to `[PROB_CLAMP, 1 − PROB_CLAMP]`.
pub const PROB_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSpec<F> {
    pub task: Task,
    /// Floor for the Gaussian variance estimate.
    pub epsilon: F,
}

impl<F: Float> LossSpec<F> {
    pub fn new(task: Task) -> Self {
        Self {
            task,
            epsilon: F::lit(1e-12),
        }
    }
}

pub(crate) fn clamp_prob<F: Float>(p: F) -> F {
    let lo = F::lit(PROB_CLAMP);
    p.max(lo).min(F::one() - lo)
}

/// Maximized log-likelihood of the loss: Gaussian with `σ̂² = max(MSE, ε)` for
/// regression, Bernoulli on clamped probabilities for classification.
pub fn log_likelihood<F: Float>(spec: &LossSpec<F>, y: ArrayView1<F>, pred: ArrayView1<F>) -> Result<F> {
    if y.len() != pred.len() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: pred.len(),
        });
    }
    if y.is_empty() {
        return Ok(F::zero());
    }
    match spec.task {
        Task::Regression => {
            let n = F::from_usize_lossy(y.len());
            let mse = y
                .iter()
                .zip(pred.iter())
                .map(|(a, b)| (*a - *b) * (*a - *b))
                .sum::<F>()
                / n;
            Ok(gaussian_log_likelihood(y.len(), mse, spec.epsilon))
        }
        Task::Classification => Ok(y
            .iter()
            .zip(pred.iter())
            .map(|(t, p)| bernoulli_term(*t, clamp_prob(*p)))
            .sum()),
    }
}

fn gaussian_log_likelihood<F: Float>(n: usize, mse: F, epsilon: F) -> F {
    let var = mse.max(epsilon);
    let two_pi = F::lit(std::f64::consts::TAU);
    -F::from_usize_lossy(n) / F::lit(2.0) * ((two_pi * var).ln() + F::one())
}

fn bernoulli_term<F: Float>(y: F, p: F) -> F {
    y * p.ln() + (F::one() - y) * (F::one() - p).ln()
}

/// `s·ln(n) − 2·lnL`.
pub fn bic<F: Float>(s: usize, n: usize, log_likelihood: F) -> F {
    F::from_usize_lossy(s) * F::from_usize_lossy(n).ln() - F::lit(2.0) * log_likelihood
}

/// What `|S|` counts in the BIC penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Complexity {
    /// One degree of freedom per selected block.
    #[default]
    Blocks,
    /// `k` degrees of freedom per selected block.
    Coefficients,
}

impl Complexity {
    pub fn degrees_of_freedom(self, blocks: usize, k: usize) -> usize {
        match self {
            Complexity::Blocks => blocks,
            Complexity::Coefficients => blocks * k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetConfig<F> {
    /// Smallest support size considered.
    pub s_min: usize,
    /// Largest support size considered.
    pub s_max: usize,
    pub lambda: F,
    pub complexity: Complexity,
    /// Most blocks swapped in one splicing move.
    pub max_splice: usize,
    /// Full single-block exchange passes run when `s·(m − s)` is at most this.
    pub exchange_budget: usize,
    /// Stop the size sweep after this many sizes without a new best BIC.
    pub size_patience: Option<usize>,
}

impl<F: Float> SubsetConfig<F> {
    /// Defaults for `m` blocks: sizes `0..=min(m, 50)`.
    pub fn new(m: usize) -> Self {
        Self {
            s_min: 0,
            s_max: m.min(50),
            lambda: F::lit(1e-3),
            complexity: Complexity::Blocks,
            max_splice: 5,
            exchange_budget: 256,
            size_patience: None,
        }
    }

    /// Forces the support to exactly `size` blocks.
    pub fn exact_size(mut self, size: usize) -> Self {
        self.s_min = size;
        self.s_max = size;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeTrace<F> {
    pub size: usize,
    pub blocks: Vec<usize>,
    pub bic: F,
}

/// Outcome of the block search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetSelection<F> {
    /// Selected block indices, ascending.
    pub blocks: Vec<usize>,
    /// Refit read-out on the selected blocks (`|S|·k` coefficients).
    pub coefficients: OutputCoefficients<F>,
    pub log_likelihood: F,
    pub bic: F,
    pub n: usize,
    pub block_size: usize,
    pub complexity: Complexity,
    /// Best search criterion per support size.
    pub trace: Vec<SizeTrace<F>>,
}

impl<F: Float> SubsetSelection<F> {
    pub fn degrees_of_freedom(&self) -> usize {
        self.complexity
            .degrees_of_freedom(self.blocks.len(), self.block_size)
    }
}

fn block_columns(blocks: &[usize], k: usize) -> Vec<usize> {
    blocks.iter().flat_map(|&b| b * k..(b + 1) * k).collect()
}

/// Precomputed sufficient statistics for scoring block supports.
///
/// Scores are BIC values of ridge fits on the centered design, so the
/// intercept stays unpenalized.
#[derive(Debug, Clone)]
pub struct BlockScorer<F> {
    n: usize,
    k: usize,
    m: usize,
    task: Task,
    epsilon: F,
    complexity: Complexity,
    lambda: F,
    gram: Array2<F>,
    rhs: Array1<F>,
    target_ss: F,
    // Classification only: the centered design, one activation per row.
    centered_t: Option<Array2<F>>,
    base_logit: F,
    y: Array1<F>,
    block_chol: Vec<Option<Cholesky<F>>>,
}

impl<F: Float> BlockScorer<F> {
    pub fn new(
        h: ArrayView2<F>,
        k: usize,
        y: ArrayView1<F>,
        spec: &LossSpec<F>,
        lambda: F,
        complexity: Complexity,
    ) -> Result<Self> {
        if k == 0 || h.ncols() % k != 0 {
            return Err(Error::DimensionMismatch {
                what: "activation columns (multiple of block size)",
                expected: k.max(1) * (h.ncols() / k.max(1)),
                found: h.ncols(),
            });
        }
        if h.nrows() != y.len() {
            return Err(Error::LengthMismatch {
                left: h.nrows(),
                right: y.len(),
            });
        }
        if !all_finite(h.iter()) {
            return Err(Error::NonFinite("activations"));
        }
        if !all_finite(y.iter()) {
            return Err(Error::NonFinite("target"));
        }
        if !(lambda >= F::zero()) {
            return Err(Error::InvalidConfig("ridge lambda must be >= 0".into()));
        }
        let n = h.nrows();
        let m = h.ncols() / k;
        let (hc, _) = center_columns(h);
        let gram = hc.t().dot(&hc);
        let scale = (0..gram.nrows())
            .map(|i| gram[[i, i]])
            .fold(F::zero(), F::max);
        let tiny = F::epsilon() * F::from_usize_lossy(n.max(1));
        if !(scale > tiny) {
            return Err(Error::DegenerateActivations);
        }

        let (target, lambda_eff, base_logit, centered_t) = match spec.task {
            Task::Regression => {
                let ym = mean(y);
                (y.mapv(|v| v - ym), lambda, F::zero(), None)
            }
            Task::Classification => {
                let p0 = clamp_prob(mean(y));
                let w = p0 * (F::one() - p0);
                let logit = (p0 / (F::one() - p0)).ln();
                // Centered working response of one Newton step from the intercept.
                let ht = hc.t().as_standard_layout().into_owned();
                (y.mapv(|v| (v - p0) / w), lambda / w, logit, Some(ht))
            }
        };
        let target = {
            let tm = mean(target.view());
            target.mapv(|v| v - tm)
        };
        let rhs = hc.t().dot(&target);
        let target_ss = target.dot(&target);

        let block_chol = (0..m)
            .map(|b| {
                let mut g = Array2::<F>::zeros((k, k));
                for i in 0..k {
                    for j in 0..k {
                        g[[i, j]] = gram[[b * k + i, b * k + j]];
                    }
                    g[[i, i]] += lambda_eff;
                }
                Cholesky::new(g.view()).ok()
            })
            .collect();

        Ok(Self {
            n,
            k,
            m,
            task: spec.task,
            epsilon: spec.epsilon,
            complexity,
            lambda: lambda_eff,
            gram,
            rhs,
            target_ss,
            centered_t,
            base_logit,
            y: y.to_owned(),
            block_chol,
        })
    }

    pub fn n_blocks(&self) -> usize {
        self.m
    }

    pub fn block_size(&self) -> usize {
        self.k
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    fn solve(&self, blocks: &[usize]) -> Option<(Vec<usize>, Array1<F>)> {
        let cols = block_columns(blocks, self.k);
        if cols.is_empty() {
            return Some((cols, Array1::zeros(0)));
        }
        let mut a = self.gram.select(Axis(0), &cols).select(Axis(1), &cols);
        for i in 0..cols.len() {
            a[[i, i]] += self.lambda;
        }
        let chol = Cholesky::new(a.view()).ok()?;
        let b = self.rhs.select(Axis(0), &cols);
        let beta = chol.solve(b.view());
        all_finite(beta.iter()).then_some((cols, beta))
    }

    fn log_likelihood_of(&self, cols: &[usize], beta: &Array1<F>) -> F {
        match self.task {
            Task::Regression => {
                let gs = self.gram.select(Axis(0), cols).select(Axis(1), cols);
                let b = self.rhs.select(Axis(0), cols);
                let rss = self.target_ss - F::lit(2.0) * beta.dot(&b) + beta.dot(&gs.dot(beta));
                let mse = rss.max(F::zero()) / F::from_usize_lossy(self.n);
                gaussian_log_likelihood(self.n, mse, self.epsilon)
            }
            Task::Classification => {
                let ht = self.centered_t.as_ref().expect("classification keeps the design");
                let mut eta = Array1::from_elem(self.n, self.base_logit);
                for (c, b) in cols.iter().zip(beta.iter()) {
                    eta.scaled_add(*b, &ht.row(*c));
                }
                self.y
                    .iter()
                    .zip(eta.iter())
                    .map(|(t, e)| bernoulli_term(*t, clamp_prob(sigmoid(*e))))
                    .sum()
            }
        }
    }

    /// Search criterion of a support; `+∞` when the ridge system is singular.
    pub fn score(&self, blocks: &[usize]) -> F {
        match self.solve(blocks) {
            Some((cols, beta)) => {
                let lnl = self.log_likelihood_of(&cols, &beta);
                let df = self.complexity.degrees_of_freedom(blocks.len(), self.k);
                bic(df, self.n, lnl)
            }
            None => F::infinity(),
        }
    }

    /// Scores of `base ∪ {a}` for each `a` in `adds`, sharing one
    /// factorization of the base system.
    fn score_extensions(&self, base: &[usize], adds: &[usize]) -> Vec<F> {
        let base_cols = block_columns(base, self.k);
        let mut a = self.gram.select(Axis(0), &base_cols).select(Axis(1), &base_cols);
        for i in 0..base_cols.len() {
            a[[i, i]] += self.lambda;
        }
        let Ok(chol) = Cholesky::new(a.view()) else {
            return adds
                .iter()
                .map(|&b| {
                    let mut blocks = base.to_vec();
                    blocks.push(b);
                    self.score(&sorted(blocks))
                })
                .collect();
        };
        let df = self.complexity.degrees_of_freedom(base.len() + 1, self.k);
        adds.iter()
            .map(|&b| {
                let add_cols: Vec<usize> = (b * self.k..(b + 1) * self.k).collect();
                let cross = self.gram.select(Axis(0), &base_cols).select(Axis(1), &add_cols);
                let mut corner = self.gram.select(Axis(0), &add_cols).select(Axis(1), &add_cols);
                for i in 0..self.k {
                    corner[[i, i]] += self.lambda;
                }
                let Ok(grown) = chol.extend(cross.view(), corner.view()) else {
                    return F::infinity();
                };
                let cols: Vec<usize> = base_cols.iter().copied().chain(add_cols).collect();
                let beta = grown.solve(self.rhs.select(Axis(0), &cols).view());
                if !all_finite(beta.iter()) {
                    return F::infinity();
                }
                bic(df, self.n, self.log_likelihood_of(&cols, &beta))
            })
            .collect()
    }

    /// Loss decrease estimates for adding each inactive block, with the
    /// active coefficients held fixed.
    fn forward_sacrifices(&self, active: &[usize], beta: &Array1<F>, cols: &[usize]) -> Vec<(usize, F)> {
        let fitted = if cols.is_empty() {
            Array1::zeros(self.gram.nrows())
        } else {
            self.gram.select(Axis(1), cols).dot(beta)
        };
        (0..self.m)
            .filter(|b| !active.contains(b))
            .map(|b| {
                let gain = match &self.block_chol[b] {
                    Some(chol) => {
                        let d: Array1<F> = (b * self.k..(b + 1) * self.k)
                            .map(|c| self.rhs[c] - fitted[c])
                            .collect();
                        d.dot(&chol.solve(d.view()))
                    }
                    None => F::zero(),
                };
                (b, gain)
            })
            .collect()
    }

    /// Loss increase estimates for dropping each active block.
    fn backward_sacrifices(&self, active: &[usize], beta: &Array1<F>) -> Vec<(usize, F)> {
        active
            .iter()
            .enumerate()
            .map(|(pos, &b)| {
                let bj = beta.slice(ndarray::s![pos * self.k..(pos + 1) * self.k]);
                let mut g = Array2::<F>::zeros((self.k, self.k));
                for i in 0..self.k {
                    for j in 0..self.k {
                        g[[i, j]] = self.gram[[b * self.k + i, b * self.k + j]];
                    }
                    g[[i, i]] += self.lambda;
                }
                (b, bj.dot(&g.dot(&bj)))
            })
            .collect()
    }
}

/// Strict total order on (criterion, size, lexicographic support).
fn better<F: Float>(a: F, sa: &[usize], b: F, sb: &[usize]) -> bool {
    match a.partial_cmp(&b) {
        Some(Ordering::Less) => true,
        Some(Ordering::Greater) => false,
        _ => {
            if a.is_nan() && !b.is_nan() {
                return false;
            }
            if b.is_nan() && !a.is_nan() {
                return true;
            }
            (sa.len(), sa) < (sb.len(), sb)
        }
    }
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

struct Candidate<F> {
    blocks: Vec<usize>,
    score: F,
}

fn local_search<F: Float>(scorer: &BlockScorer<F>, cfg: &SubsetConfig<F>, start: Vec<usize>) -> Candidate<F> {
    let m = scorer.n_blocks();
    let mut current = Candidate {
        score: scorer.score(&start),
        blocks: start,
    };
    let s = current.blocks.len();
    if s == 0 || s == m {
        return current;
    }
    loop {
        let mut best: Option<Candidate<F>> = None;
        let consider = |blocks: Vec<usize>, best: &mut Option<Candidate<F>>| {
            let score = scorer.score(&blocks);
            let wins = match best {
                Some(b) => better(score, &blocks, b.score, &b.blocks),
                None => true,
            };
            if wins {
                *best = Some(Candidate { blocks, score });
            }
        };

        // Splicing moves ranked by sacrifices.
        if let Some((cols, beta)) = scorer.solve(&current.blocks) {
            let mut backward = scorer.backward_sacrifices(&current.blocks, &beta);
            backward.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0)));
            let mut forward = scorer.forward_sacrifices(&current.blocks, &beta, &cols);
            forward.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0)));
            let c_max = cfg.max_splice.min(s).min(m - s);
            for c in 1..=c_max {
                let drop: Vec<usize> = backward[..c].iter().map(|x| x.0).collect();
                let mut cand: Vec<usize> = current
                    .blocks
                    .iter()
                    .copied()
                    .filter(|b| !drop.contains(b))
                    .collect();
                cand.extend(forward[..c].iter().map(|x| x.0));
                consider(sorted(cand), &mut best);
            }
        }
        if let Some(b) = best.take() {
            if better(b.score, &b.blocks, current.score, &current.blocks) {
                current = b;
                continue;
            }
        }

        // Full single-block exchange pass. Candidates dropping the same block
        // share a factorization; the winner is rescored from scratch so that
        // acceptance always compares like with like.
        if s * (m - s) <= cfg.exchange_budget {
            let adds: Vec<usize> = (0..m).filter(|b| !current.blocks.contains(b)).collect();
            for pos in 0..s {
                let rest: Vec<usize> = current
                    .blocks
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != pos)
                    .map(|(_, b)| *b)
                    .collect();
                for (&add, score) in adds.iter().zip(scorer.score_extensions(&rest, &adds)) {
                    let mut blocks = rest.clone();
                    blocks.push(add);
                    let blocks = sorted(blocks);
                    let wins = match &best {
                        Some(b) => better(score, &blocks, b.score, &b.blocks),
                        None => true,
                    };
                    if wins {
                        best = Some(Candidate { blocks, score });
                    }
                }
            }
            if let Some(mut b) = best.take() {
                b.score = scorer.score(&b.blocks);
                if better(b.score, &b.blocks, current.score, &current.blocks) {
                    current = b;
                    continue;
                }
            }
        }
        return current;
    }
}

/// Best support found at each size `0..=s_max` (stopping early only if
/// `size_patience` is set).
pub fn search_path<F: Float>(scorer: &BlockScorer<F>, cfg: &SubsetConfig<F>) -> Vec<SizeTrace<F>> {
    let m = scorer.n_blocks();
    let mut trace = Vec::new();
    let mut prev: Vec<usize> = Vec::new();
    let mut best: Option<(F, Vec<usize>)> = None;
    let mut best_size = 0;
    for s in 0..=cfg.s_max.min(m) {
        let start = if s == 0 {
            Vec::new()
        } else {
            let mut grown = prev.clone();
            let add = match scorer.solve(&prev) {
                Some((cols, beta)) => scorer
                    .forward_sacrifices(&prev, &beta, &cols)
                    .into_iter()
                    .fold(None::<(usize, F)>, |acc, (b, g)| match acc {
                        Some((_, bg)) if !(g > bg) => acc,
                        _ => Some((b, g)),
                    })
                    .map(|x| x.0),
                None => (0..m).find(|b| !prev.contains(b)),
            };
            grown.push(add.expect("an inactive block exists while s <= m"));
            sorted(grown)
        };
        let found = local_search(scorer, cfg, start);
        prev = found.blocks.clone();
        if s >= cfg.s_min {
            let improves = match &best {
                Some((score, blocks)) => better(found.score, &found.blocks, *score, blocks),
                None => true,
            };
            if improves {
                best = Some((found.score, found.blocks.clone()));
                best_size = s;
            }
            trace.push(SizeTrace {
                size: s,
                blocks: found.blocks,
                bic: found.score,
            });
            if let Some(p) = cfg.size_patience {
                if s - best_size >= p {
                    break;
                }
            }
        }
    }
    trace
}

/// Refits the read-out on the given blocks with the exact loss and returns
/// the coefficients and maximized log-likelihood.
pub fn refit_blocks<F: Float>(
    h: ArrayView2<F>,
    k: usize,
    y: ArrayView1<F>,
    spec: &LossSpec<F>,
    lambda: F,
    blocks: &[usize],
) -> Result<(OutputCoefficients<F>, F)> {
    let cols = block_columns(blocks, k);
    let hs = h.select(Axis(1), &cols);
    match spec.task {
        Task::Regression => {
            let coef = ridge_fit(hs.view(), y, lambda)?;
            let pred = coef.predict(hs.view());
            let lnl = log_likelihood(spec, y, pred.view())?;
            Ok((coef, lnl))
        }
        Task::Classification => {
            let coef = penalized_logistic(hs.view(), y, lambda)?;
            let pred = coef.predict(hs.view()).mapv(sigmoid);
            let lnl = log_likelihood(spec, y, pred.view())?;
            Ok((coef, lnl))
        }
    }
}

/// Ridge-penalized logistic regression by iteratively reweighted least
/// squares; the intercept is unpenalized.
pub fn penalized_logistic<F: Float>(h: ArrayView2<F>, y: ArrayView1<F>, lambda: F) -> Result<OutputCoefficients<F>> {
    const MAX_ITER: usize = 100;
    let (n, p) = h.dim();
    let p0 = clamp_prob(mean(y));
    let mut coef = OutputCoefficients {
        beta: Array1::<F>::zeros(p),
        intercept: (p0 / (F::one() - p0)).ln(),
    };
    if p == 0 {
        return Ok(coef);
    }
    let tol = F::lit(1e-10).max(F::epsilon() * F::lit(100.0));
    let w_floor = F::lit(1e-10);
    for _ in 0..MAX_ITER {
        let eta = coef.predict(h);
        let mut w = Array1::<F>::zeros(n);
        let mut z = Array1::<F>::zeros(n);
        for i in 0..n {
            let pi = clamp_prob(sigmoid(eta[i]));
            let wi = (pi * (F::one() - pi)).max(w_floor);
            w[i] = wi;
            z[i] = eta[i] + (y[i] - pi) / wi;
        }
        let wsum = w.sum();
        let hbar = h.t().dot(&w) / wsum;
        let zbar = w.dot(&z) / wsum;
        let sw = w.mapv(|v| v.sqrt());
        let mut d = &h - &hbar.view().insert_axis(Axis(0));
        for (mut row, s) in d.rows_mut().into_iter().zip(sw.iter()) {
            row.mapv_inplace(|v| v * *s);
        }
        let t: Array1<F> = z
            .iter()
            .zip(sw.iter())
            .map(|(zi, s)| (*zi - zbar) * *s)
            .collect();
        let mut gram = d.t().dot(&d);
        for i in 0..p {
            gram[[i, i]] += lambda;
        }
        let beta = match Cholesky::new(gram.view()) {
            Ok(c) => c.solve(d.t().dot(&t).view()),
            Err(_) => {
                let mut g2 = gram.clone();
                let bump = F::lit(1e-8) * (0..p).map(|i| gram[[i, i]]).fold(F::zero(), F::max).max(F::one());
                for i in 0..p {
                    g2[[i, i]] += bump;
                }
                Cholesky::new(g2.view())?.solve(d.t().dot(&t).view())
            }
        };
        let next = OutputCoefficients {
            intercept: zbar - hbar.dot(&beta),
            beta,
        };
        if !all_finite(next.beta.iter()) || !next.intercept.is_finite() {
            return Err(Error::NonFinite("logistic refit"));
        }
        let change = (&next.predict(h) - &eta)
            .iter()
            .fold(F::zero(), |m, v| m.max(v.abs()));
        coef = next;
        if change < tol {
            break;
        }
    }
    Ok(coef)
}

/// Selects the BIC-minimal set of blocks.
///
/// `h` holds `m` blocks of `k` columns. Ties are broken by smaller support,
/// then by the lexicographically smallest block list.
pub fn best_subset<F: Float>(
    h: ArrayView2<F>,
    k: usize,
    y: ArrayView1<F>,
    spec: &LossSpec<F>,
    cfg: &SubsetConfig<F>,
) -> Result<SubsetSelection<F>> {
    if k == 0 || h.ncols() % k != 0 {
        return Err(Error::DimensionMismatch {
            what: "activation columns (multiple of block size)",
            expected: k.max(1) * (h.ncols() / k.max(1)),
            found: h.ncols(),
        });
    }
    let m = h.ncols() / k;
    if cfg.s_max > m {
        return Err(Error::SupportTooLarge { s_max: cfg.s_max, m });
    }
    if cfg.s_min > cfg.s_max {
        return Err(Error::InvalidConfig(format!(
            "s_min={} exceeds s_max={}",
            cfg.s_min, cfg.s_max
        )));
    }
    let scorer = BlockScorer::new(h, k, y, spec, cfg.lambda, cfg.complexity)?;
    let trace = search_path(&scorer, cfg);
    let chosen = trace
        .iter()
        .fold(None::<&SizeTrace<F>>, |acc, t| match acc {
            Some(a) if !better(t.bic, &t.blocks, a.bic, &a.blocks) => Some(a),
            _ => Some(t),
        })
        .map(|t| t.blocks.clone())
        .unwrap_or_default();

    let (coefficients, lnl) = refit_blocks(h, k, y, spec, cfg.lambda, &chosen)?;
    let df = cfg.complexity.degrees_of_freedom(chosen.len(), k);
    Ok(SubsetSelection {
        bic: bic(df, y.len(), lnl),
        blocks: chosen,
        coefficients,
        log_likelihood: lnl,
        n: y.len(),
        block_size: k,
        complexity: cfg.complexity,
        trace,
    })
}
