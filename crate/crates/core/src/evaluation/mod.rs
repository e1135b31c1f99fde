//! Split plans, metrics, correlation analysis, permutation importance,
//! movers reports and the cross-validation driver.

pub mod correlation;
pub mod experiment;
pub mod importance;
pub mod metrics;
pub mod movers;
pub mod splits;

use thiserror::Error;

pub use correlation::{pearson, pearson_lagged, Correlation, CorrelationProfile, Indicator};
pub use experiment::{run_experiment, ExperimentConfig, ExperimentReport};
pub use importance::{permutation_importance, ImportanceMetric, ImportanceReport};
pub use metrics::{binary_trend_accuracy, regression_metrics, MetricsReport, RegressionMetrics};
pub use movers::{rank_movers, MoverInput, MoversReport};
pub use splits::{temporal_splits, topic_splits, Fold, SplitKind, SplitPlan};

use crate::features::FeatureError;
use crate::models::ModelError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("need at least {needed} {what}, got {got}")]
    TooFewGroups {
        what: &'static str,
        needed: usize,
        got: usize,
    },
    #[error("no values to score")]
    Empty,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("values must be finite")]
    NonFinite,
    #[error("R² is undefined for a constant target")]
    UndefinedR2,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
}
