//! Forecasting the popularity of scientific topics from publication counts,
//! review composition and patent activity.
//!
//! The numeric core (regressors, metrics, correlation) is generic over
//! [`scalar::Scalar`]; the aliases below fix it to `f64`.

pub mod corpus;
pub mod evaluation;
pub mod features;
pub mod matrix;
pub mod models;
pub mod scalar;
pub mod synthetic;

pub type RidgeModel = models::RidgeModel<f64>;
pub type GbdtModel = models::GbdtModel<f64>;
pub type Booster = models::Booster<f64>;
pub type TrainedModel = models::TrainedModel<f64>;
pub type Regressor = models::Regressor<f64>;
pub type Matrix = matrix::Matrix<f64>;

pub use corpus::{CorpusBuilder, CorpusError, CorpusStore};
pub use evaluation::EvalError;
pub use features::{FeatureError, FeatureSchema, FeatureTable, TargetKind};
pub use models::{FitConfig, ModelError, ModelKind, TrainParams};
