//! Sparse interpretable additive models built from boosted extreme learning
//! machines.
//!
//! The model is a generalized additive model `F(x) = c + Σ_i f_i(x_i)` whose
//! shape functions are sums of per-feature random-feature networks, fitted
//! one boosting round at a time. The sparse variant runs a block-wise
//! best-subset search, scored by BIC, on the first network and keeps only the
//! selected features for every later round.
//!
//! Numerical code is generic over [`Float`] (`f32` or `f64`); the `*64`
//! aliases below fix the common double-precision case.

pub mod baselines;
pub mod data;
pub mod elm;
pub mod error;
pub mod eval;
pub mod gam;
pub mod linalg;
pub mod rng;
pub mod scalar;
pub mod subset;

pub use data::{FoldPlan, PreparedDataset, Registry, Task};
pub use elm::{Activation, ElmLayer, OutputCoefficients};
pub use error::{Error, Result};
pub use gam::{IgannConfig, IgannModel, ShapeFunction};
pub use scalar::Float;
pub use subset::{LossSpec, SubsetSelection};

pub type PreparedDataset64 = PreparedDataset<f64>;
pub type PreparedDataset32 = PreparedDataset<f32>;
pub type IgannModel64 = IgannModel<f64>;
pub type IgannModel32 = IgannModel<f32>;
pub type IgannConfig64 = IgannConfig<f64>;
pub type IgannConfig32 = IgannConfig<f32>;
pub type ElmLayer64 = ElmLayer<f64>;
pub type SubsetSelection64 = SubsetSelection<f64>;
pub type LassoModel64 = baselines::LassoModel<f64>;
