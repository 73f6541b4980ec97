//! Extreme learning machines with one sub-network per input feature.
//!
//! Each selected input column `i` is mapped onto `k` hidden units
//! `σ(w_ij · x_i + b_ij)`. Hidden weights are random and never trained; only
//! the linear output layer is fitted, by ridge regression.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use rand_distr::{StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{center_columns, mean, qr_least_squares, Cholesky};
use crate::rng::rng_for;
use crate::rng::roles;
use crate::scalar::{all_finite, Float};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    /// Exponential linear unit with unit scale.
    #[default]
    Elu,
    Tanh,
    Relu,
    Sigmoid,
}

impl Activation {
    #[inline]
    pub fn apply<F: Float>(self, z: F) -> F {
        match self {
            Activation::Elu => {
                if z > F::zero() {
                    z
                } else {
                    z.exp_m1()
                }
            }
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(F::zero()),
            Activation::Sigmoid => crate::scalar::sigmoid(z),
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "elu" => Ok(Activation::Elu),
            "tanh" => Ok(Activation::Tanh),
            "relu" => Ok(Activation::Relu),
            "sigmoid" => Ok(Activation::Sigmoid),
            other => Err(Error::InvalidConfig(format!("unknown activation `{other}`"))),
        }
    }
}

/// Random hidden layer made of independent per-feature blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElmLayer<F> {
    /// Width of the input matrix this layer reads from.
    pub n_inputs: usize,
    /// Input column read by each block, in block order.
    pub features: Vec<usize>,
    pub hidden: usize,
    /// `features.len() × hidden`
    pub weights: Array2<F>,
    /// `features.len() × hidden`
    pub biases: Array2<F>,
    pub activation: Activation,
    pub seed: u64,
}

/// Draws a layer over all `m` inputs. Weights are standard normal and biases
/// uniform on `[-1, 1]`; the layer is a pure function of its arguments.
pub fn init_layer<F: Float>(m: usize, k: usize, activation: Activation, seed: u64) -> Result<ElmLayer<F>> {
    if m == 0 || k == 0 {
        return Err(Error::InvalidConfig(format!(
            "layer needs m >= 1 and k >= 1 (got m={m}, k={k})"
        )));
    }
    let mut rng = rng_for(seed, roles::LAYER, 0);
    let weights = Array2::from_shape_simple_fn((m, k), || {
        F::lit(rng.sample::<f64, _>(StandardNormal))
    });
    let unit = Uniform::new_inclusive(-1.0f64, 1.0).expect("valid bounds");
    let biases = Array2::from_shape_simple_fn((m, k), || F::lit(rng.sample(unit)));
    Ok(ElmLayer {
        n_inputs: m,
        features: (0..m).collect(),
        hidden: k,
        weights,
        biases,
        activation,
        seed,
    })
}

impl<F: Float> ElmLayer<F> {
    pub fn n_blocks(&self) -> usize {
        self.features.len()
    }

    pub fn width(&self) -> usize {
        self.n_blocks() * self.hidden
    }

    /// Block index reading input column `feature`, if any.
    pub fn block_of(&self, feature: usize) -> Option<usize> {
        self.features.iter().position(|&f| f == feature)
    }

    /// Keeps only the given blocks, preserving their weights.
    pub fn restrict(&self, blocks: &[usize]) -> Self {
        Self {
            n_inputs: self.n_inputs,
            features: blocks.iter().map(|&b| self.features[b]).collect(),
            hidden: self.hidden,
            weights: self.weights.select(Axis(0), blocks),
            biases: self.biases.select(Axis(0), blocks),
            activation: self.activation,
            seed: self.seed,
        }
    }

    /// Keeps the blocks reading any of the given input columns.
    pub fn restrict_to_features(&self, features: &[usize]) -> Self {
        let blocks: Vec<usize> = (0..self.n_blocks())
            .filter(|&b| features.contains(&self.features[b]))
            .collect();
        self.restrict(&blocks)
    }

    /// Hidden activations `n × (blocks·k)`; columns `b·k .. (b+1)·k` belong
    /// to block `b` and read only input column `features[b]`.
    pub fn activations(&self, x: ArrayView2<F>) -> Result<Array2<F>> {
        if x.ncols() != self.n_inputs {
            return Err(Error::DimensionMismatch {
                what: "activation input columns",
                expected: self.n_inputs,
                found: x.ncols(),
            });
        }
        let k = self.hidden;
        let mut h = Array2::<F>::zeros((x.nrows(), self.width()));
        for (b, &feat) in self.features.iter().enumerate() {
            let col = x.column(feat);
            let mut block = h.slice_mut(s![.., b * k..(b + 1) * k]);
            for (r, mut row) in block.rows_mut().into_iter().enumerate() {
                let v = col[r];
                for j in 0..k {
                    row[j] = self
                        .activation
                        .apply(self.weights[[b, j]] * v + self.biases[[b, j]]);
                }
            }
        }
        Ok(h)
    }

    /// `k` hidden activations of block `b` at a single input value.
    pub fn block_activation(&self, b: usize, v: F) -> impl Iterator<Item = F> + '_ {
        (0..self.hidden).map(move |j| {
            self.activation
                .apply(self.weights[[b, j]] * v + self.biases[[b, j]])
        })
    }
}

/// Fitted linear read-out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputCoefficients<F> {
    pub beta: Array1<F>,
    pub intercept: F,
}

impl<F: Float> OutputCoefficients<F> {
    pub fn predict(&self, h: ArrayView2<F>) -> Array1<F> {
        h.dot(&self.beta) + self.intercept
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RidgeOptions<F> {
    pub lambda: F,
    /// Fit an unpenalized intercept by centering.
    pub fit_intercept: bool,
}

impl<F: Float> RidgeOptions<F> {
    pub fn new(lambda: F) -> Self {
        Self {
            lambda,
            fit_intercept: true,
        }
    }

    pub fn without_intercept(mut self) -> Self {
        self.fit_intercept = false;
        self
    }
}

/// `argmin ‖r − c − Hβ‖² + λ‖β‖²` with an unpenalized intercept `c`.
pub fn ridge_fit<F: Float>(h: ArrayView2<F>, r: ArrayView1<F>, lambda: F) -> Result<OutputCoefficients<F>> {
    ridge_fit_with(h, r, RidgeOptions::new(lambda))
}

/// Ridge solve via Cholesky on the regularized normal equations, falling back
/// to Householder QR on the augmented system when Cholesky breaks down.
pub fn ridge_fit_with<F: Float>(
    h: ArrayView2<F>,
    r: ArrayView1<F>,
    opts: RidgeOptions<F>,
) -> Result<OutputCoefficients<F>> {
    if h.nrows() != r.len() {
        return Err(Error::LengthMismatch {
            left: h.nrows(),
            right: r.len(),
        });
    }
    if !(opts.lambda >= F::zero()) || !opts.lambda.is_finite() {
        return Err(Error::InvalidConfig("ridge lambda must be finite and >= 0".into()));
    }
    if !all_finite(h.iter()) {
        return Err(Error::NonFinite("ridge design"));
    }
    if !all_finite(r.iter()) {
        return Err(Error::NonFinite("ridge target"));
    }
    let p = h.ncols();
    if p == 0 {
        let intercept = if opts.fit_intercept { mean(r) } else { F::zero() };
        return Ok(OutputCoefficients {
            beta: Array1::zeros(0),
            intercept,
        });
    }

    let (design, means, target, r_mean) = if opts.fit_intercept {
        let (hc, means) = center_columns(h);
        let rm = mean(r);
        let rc = r.mapv(|v| v - rm);
        (hc, Some(means), rc, rm)
    } else {
        (h.to_owned(), None, r.to_owned(), F::zero())
    };

    let mut gram = design.t().dot(&design);
    for i in 0..p {
        gram[[i, i]] += opts.lambda;
    }
    let rhs = design.t().dot(&target);
    let beta = match Cholesky::new(gram.view()) {
        Ok(chol) => chol.solve(rhs.view()),
        Err(_) => {
            let n = design.nrows();
            let mut aug = Array2::<F>::zeros((n + p, p));
            aug.slice_mut(s![..n, ..]).assign(&design);
            let root = opts.lambda.sqrt();
            for i in 0..p {
                aug[[n + i, i]] = root;
            }
            let mut b = Array1::<F>::zeros(n + p);
            b.slice_mut(s![..n]).assign(&target);
            qr_least_squares(aug.view(), b.view())?
        }
    };
    if !all_finite(beta.iter()) {
        return Err(Error::NonFinite("ridge coefficients"));
    }
    let intercept = match means {
        Some(m) => r_mean - m.dot(&beta),
        None => F::zero(),
    };
    Ok(OutputCoefficients { beta, intercept })
}
