//! Boosting with decision stumps.
//!
//! * [`booster`]: AdaBoost and logistic boosting over threshold stumps, with
//!   per-round statistics, the training-error bound chain and margins.
//! * [`losses`]: probability links and the exponential/logistic loss relations.
//! * [`cde`]: conditional density estimation from a cascade of boosted
//!   exceedance classifiers.
//! * [`prior`]: boosting regularized toward a hand-built probability rule.
//! * [`active`]: uncertainty-sampling active learning and its simulator.
//! * [`persist`], [`config`]: text model files and experiment configuration.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! and `*32` aliases below name the concrete instantiations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod active;
pub mod booster;
pub mod cde;
pub mod config;
pub mod data;
pub mod error;
pub mod losses;
pub mod persist;
pub mod prior;
pub mod rng;
pub mod scalar;
pub mod stump;

pub use error::{Error, Result};
pub use rng::RngState;
pub use scalar::Scalar;

pub type Dataset64 = data::Dataset<f64>;
pub type Dataset32 = data::Dataset<f32>;
pub type WeightDistribution64 = data::WeightDistribution<f64>;
pub type WeightDistribution32 = data::WeightDistribution<f32>;
pub type Stump64 = stump::Stump<f64>;
pub type Stump32 = stump::Stump<f32>;
pub type AdditiveModel64 = booster::AdditiveModel<f64>;
pub type AdditiveModel32 = booster::AdditiveModel<f32>;
pub type BoostConfig64 = booster::BoostConfig<f64>;
pub type BoostConfig32 = booster::BoostConfig<f32>;
pub type RoundStats64 = booster::RoundStats<f64>;
pub type RoundStats32 = booster::RoundStats<f32>;
pub type ConditionalDensityModel64 = cde::ConditionalDensityModel<f64>;
pub type ConditionalDensityModel32 = cde::ConditionalDensityModel<f32>;
pub type ModelFile64 = persist::ModelFile<f64>;
pub type ModelFile32 = persist::ModelFile<f32>;
