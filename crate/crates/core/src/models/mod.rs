//! Regressors: standardized ridge, boosted trees and the lag baseline.

pub mod baseline;
pub mod encoding;
pub mod gbdt;
pub mod persist;
pub mod ridge;
mod standardize;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use baseline::fit_lag_baseline;
pub use encoding::{ordered_target_encode, TargetEncoding};
pub use gbdt::{Booster, GbdtModel, TrainParams};
pub use ridge::{fit_ridge, fit_ridge_cv, MissingFill, RidgeConfig, RidgeModel};
pub use standardize::{standardize_fit_apply, Standardizer};

use crate::features::{FeatureSchema, FeatureTable, TargetKind, EMBEDDING_PREFIX};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("empty training table")]
    EmptyTable,
    #[error("{rows} rows but {targets} targets")]
    LengthMismatch { rows: usize, targets: usize },
    #[error("targets must be finite")]
    NonFiniteTarget,
    #[error("penalty must be positive and finite, got {0}")]
    InvalidAlpha(f64),
    #[error("normal equations are singular")]
    Singular,
    #[error("need at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("invalid training parameters: {0}")]
    InvalidParams(String),
    #[error("training loss increased in round {round}: {before} -> {after}")]
    LossIncreased { round: usize, before: f64, after: f64 },
    #[error("input is missing feature `{0}`")]
    MissingFeature(String),
    #[error("input has unexpected feature `{0}`")]
    ExtraFeature(String),
    #[error("row has {got} values, schema has {expected}")]
    RowWidth { expected: usize, got: usize },
    #[error("unsupported model document version {0}")]
    UnsupportedSchemaVersion(u64),
    #[error("model document was written for {found}, loading as {expected}")]
    ScalarMismatch { expected: String, found: String },
    #[error("malformed model document: {0}")]
    Document(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Baseline,
    Ridge,
    Gbdt,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Baseline, ModelKind::Ridge, ModelKind::Gbdt];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Baseline => "baseline",
            ModelKind::Ridge => "ridge",
            ModelKind::Gbdt => "gbdt",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(ModelKind::Baseline),
            "ridge" | "linear" => Ok(ModelKind::Ridge),
            "gbdt" | "boosting" => Ok(ModelKind::Gbdt),
            other => Err(format!("unknown model `{other}` (expected baseline, ridge or gbdt)")),
        }
    }
}

/// Everything needed to fit any of the model kinds.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FitConfig {
    pub ridge: RidgeConfig,
    pub gbdt: TrainParams,
}

/// A fitted regressor of any kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regressor<T> {
    Ridge(RidgeModel<T>),
    Gbdt(GbdtModel<T>),
}

impl<T: Scalar> Regressor<T> {
    pub fn schema(&self) -> &FeatureSchema {
        match self {
            Regressor::Ridge(m) => &m.schema,
            Regressor::Gbdt(m) => &m.schema,
        }
    }

    /// Prediction for one row given in the model's schema order.
    pub fn predict_features(&self, features: &[Option<f64>], topic: &str) -> Result<T, ModelError> {
        let expected = self.schema().len();
        if features.len() != expected {
            return Err(ModelError::RowWidth {
                expected,
                got: features.len(),
            });
        }
        Ok(match self {
            Regressor::Ridge(m) => {
                let row: Vec<T> = features.iter().map(|v| v.map_or_else(T::nan, T::of)).collect();
                m.predict_matrix(&Matrix::from_rows(&[row]))[0]
            }
            Regressor::Gbdt(m) => m.booster.predict_row(&m.input_row(features, topic)),
        })
    }
}

/// A fitted model plus what it was trained to predict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel<T> {
    pub kind: ModelKind,
    pub target: TargetKind,
    pub horizon: u32,
    pub embeddings: bool,
    pub regressor: Regressor<T>,
}

impl<T: Scalar> TrainedModel<T> {
    /// Fits `kind` on the rows of `table` whose target is defined.
    ///
    /// The table's embedding columns are used only when `embeddings` is set.
    pub fn fit(
        kind: ModelKind,
        target: TargetKind,
        embeddings: bool,
        table: &FeatureTable,
        config: &FitConfig,
    ) -> Result<Self, ModelError> {
        let table = table.with_defined_target(target);
        let table = if embeddings { table } else { table.without_embeddings() };
        let y: Vec<T> = table
            .targets(target)
            .into_iter()
            .map(|v| T::of(v.expect("filtered to defined targets")))
            .collect();
        let regressor = match kind {
            ModelKind::Baseline => Regressor::Ridge(fit_lag_baseline(&table, &y, target, &config.ridge)?),
            ModelKind::Ridge => {
                Regressor::Ridge(fit_ridge_cv(table.schema.clone(), &table.to_matrix(), &y, &config.ridge)?)
            }
            ModelKind::Gbdt => Regressor::Gbdt(GbdtModel::fit(&table, &y, &config.gbdt)?),
        };
        Ok(Self {
            kind,
            target,
            horizon: table.horizon,
            embeddings: embeddings && table.schema.embedding_dim() > 0,
            regressor,
        })
    }

    pub fn schema(&self) -> &FeatureSchema {
        self.regressor.schema()
    }

    /// Column positions of the model's features inside `table`.
    ///
    /// Ridge and boosted models need exactly their schema's features, except
    /// that embedding columns are ignored by models trained without them. The
    /// baseline reads its single feature out of any wider table.
    pub fn align(&self, table: &FeatureSchema) -> Result<Vec<usize>, ModelError> {
        let schema = self.schema();
        let positions = schema
            .names()
            .iter()
            .map(|name| {
                table
                    .index_of(name)
                    .ok_or_else(|| ModelError::MissingFeature(name.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if self.kind != ModelKind::Baseline {
            let ignored = |n: &str| !self.embeddings && n.starts_with(EMBEDDING_PREFIX);
            if let Some(extra) = table
                .names()
                .iter()
                .find(|n| schema.index_of(n).is_none() && !ignored(n))
            {
                return Err(ModelError::ExtraFeature(extra.clone()));
            }
        }
        Ok(positions)
    }

    /// Predictions for every row of `table`.
    pub fn predict_table(&self, table: &FeatureTable) -> Result<Vec<T>, ModelError> {
        let positions = self.align(&table.schema)?;
        table
            .rows
            .iter()
            .map(|r| {
                let features: Vec<Option<f64>> = positions.iter().map(|&j| r.features[j]).collect();
                self.regressor.predict_features(&features, &r.topic_id)
            })
            .collect()
    }

    /// Table with the embedding columns removed when the model does not use them.
    pub fn input_table(&self, table: &FeatureTable) -> FeatureTable {
        if self.embeddings {
            table.clone()
        } else {
            table.without_embeddings()
        }
    }
}
