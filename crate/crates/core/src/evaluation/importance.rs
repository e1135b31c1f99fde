//! Permutation feature importance.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::regression_metrics;
use super::EvalError;
use crate::features::{FeatureTable, EMBEDDING_PREFIX};
use crate::models::TrainedModel;
use crate::scalar::Scalar;

pub const DEFAULT_REPEATS: usize = 5;
/// Name of the summed embedding-component entry.
pub const EMBEDDING_GROUP: &str = "embedding";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImportanceMetric {
    /// Drop in R².
    R2,
    /// Rise in mean squared error.
    Mse,
    /// Rise in mean absolute error.
    Mae,
}

impl ImportanceMetric {
    /// Error-like score: larger is worse.
    fn loss<T: Scalar>(self, y: &[T], p: &[T]) -> Result<f64, EvalError> {
        let m = regression_metrics(y, p)?;
        Ok(match self {
            ImportanceMetric::R2 => -m.r2.ok_or(EvalError::UndefinedR2)?,
            ImportanceMetric::Mse => m.rmse * m.rmse,
            ImportanceMetric::Mae => m.mae,
        })
    }
}

impl FromStr for ImportanceMetric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "r2" => Ok(ImportanceMetric::R2),
            "mse" => Ok(ImportanceMetric::Mse),
            "mae" => Ok(ImportanceMetric::Mae),
            other => Err(format!("unknown metric `{other}` (expected r2, mse or mae)")),
        }
    }
}

impl fmt::Display for ImportanceMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ImportanceMetric::R2 => "r2",
            ImportanceMetric::Mse => "mse",
            ImportanceMetric::Mae => "mae",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub metric: ImportanceMetric,
    pub repeats: usize,
    /// Unshuffled loss.
    pub reference: f64,
    /// Mean degradation per model feature, in schema order.
    pub features: Vec<(String, f64)>,
    /// Sum over embedding components, when the model has any.
    pub embedding_group: Option<f64>,
}

impl ImportanceReport {
    /// Entries sorted by degradation, largest first, with the embedding
    /// components replaced by their group.
    pub fn ranked(&self) -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64)> = self
            .features
            .iter()
            .filter(|(n, _)| !n.starts_with(EMBEDDING_PREFIX))
            .cloned()
            .collect();
        if let Some(g) = self.embedding_group {
            out.push((EMBEDDING_GROUP.to_string(), g));
        }
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        out
    }
}

/// Shuffles each model feature in turn and reports the mean rise in loss.
///
/// Rows of `table` with undefined target are skipped. Each feature draws its
/// permutations from its own seeded stream, so the report does not depend on
/// thread scheduling.
pub fn permutation_importance<T: Scalar>(
    model: &TrainedModel<T>,
    table: &FeatureTable,
    metric: ImportanceMetric,
    repeats: usize,
    seed: u64,
) -> Result<ImportanceReport, EvalError> {
    let table = table.with_defined_target(model.target);
    let positions = model.align(&table.schema)?;
    let y: Vec<T> = table
        .targets(model.target)
        .into_iter()
        .map(|v| T::of(v.expect("defined target")))
        .collect();
    let inputs: Vec<Vec<Option<f64>>> = table
        .rows
        .iter()
        .map(|r| positions.iter().map(|&j| r.features[j]).collect())
        .collect();
    let topics = table.topic_ids();
    let predict = |rows: &[Vec<Option<f64>>]| -> Result<Vec<T>, EvalError> {
        rows.iter()
            .zip(&topics)
            .map(|(r, t)| Ok(model.regressor.predict_features(r, t)?))
            .collect()
    };
    let reference = metric.loss(&y, &predict(&inputs)?)?;
    let names = model.schema().names().to_vec();

    let scores: Vec<f64> = (0..names.len())
        .into_par_iter()
        .map(|k| -> Result<f64, EvalError> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let mut column: Vec<Option<f64>> = inputs.iter().map(|r| r[k]).collect();
            let mut total = 0.0;
            for _ in 0..repeats {
                column.shuffle(&mut rng);
                let shuffled: Vec<Vec<Option<f64>>> = inputs
                    .iter()
                    .zip(&column)
                    .map(|(r, &v)| {
                        let mut r = r.clone();
                        r[k] = v;
                        r
                    })
                    .collect();
                total += metric.loss(&y, &predict(&shuffled)?)? - reference;
            }
            Ok(total / repeats.max(1) as f64)
        })
        .collect::<Result<_, _>>()?;

    let embedding: Vec<f64> = names
        .iter()
        .zip(&scores)
        .filter(|(n, _)| n.starts_with(EMBEDDING_PREFIX))
        .map(|(_, &s)| s)
        .collect();
    Ok(ImportanceReport {
        metric,
        repeats,
        reference,
        embedding_group: (!embedding.is_empty()).then(|| embedding.iter().sum()),
        features: names.into_iter().zip(scores).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{FeatureRow, FeatureSchema, TargetKind};
    use crate::models::{FitConfig, ModelKind, TrainParams};

    fn table() -> FeatureTable {
        let schema = FeatureSchema::custom(vec!["pop_lag0".into(), "noise".into(), "embed_0".into(), "embed_1".into()]);
        FeatureTable {
            horizon: 5,
            rows: (0..200)
                .map(|i| {
                    let lag = ((i * 37) % 101) as f64;
                    FeatureRow {
                        topic_id: format!("t{}", i % 10),
                        base_year: 1980 + i / 10,
                        horizon: 5,
                        features: vec![Some(lag), Some(((i * 13) % 7) as f64), Some(0.1), Some((i % 10) as f64)],
                        target_pop: lag,
                        target_pct: Some(lag - 50.0),
                    }
                })
                .collect(),
            schema,
        }
    }

    #[test]
    fn unused_feature_has_zero_importance() {
        let config = FitConfig {
            gbdt: TrainParams {
                rounds: 20,
                max_depth: 1,
                min_samples_leaf: 5,
                ..TrainParams::default()
            },
            ..FitConfig::default()
        };
        let model = TrainedModel::<f64>::fit(ModelKind::Gbdt, TargetKind::Pop, true, &table(), &config).unwrap();
        let crate::models::Regressor::Gbdt(g) = &model.regressor else { panic!() };
        let used: Vec<usize> = g.booster.trees.iter().flat_map(|t| t.split_features()).collect();
        let report = permutation_importance(&model, &table(), ImportanceMetric::Mse, 5, 42).unwrap();
        for (j, (name, score)) in report.features.iter().enumerate() {
            if !used.contains(&j) {
                assert!(score.abs() < 1e-9, "{name} = {score}");
            }
        }
        // constant embed_0 is never split on
        assert!(report.features[2].1.abs() < 1e-9);
        assert!(report.features[0].1 > 1.0);
        assert!(report.embedding_group.is_some());
        assert_eq!(report.ranked()[0].0, "pop_lag0");
    }

    #[test]
    fn single_feature_baseline_loses_its_fit() {
        let model = TrainedModel::<f64>::fit(ModelKind::Baseline, TargetKind::Pop, false, &table(), &FitConfig::default()).unwrap();
        let report = permutation_importance(&model, &table(), ImportanceMetric::R2, 5, 1).unwrap();
        assert!((report.reference + 1.0).abs() < 1e-6);
        // A shuffled identity predictor keeps its variance: R² = 1 - 2 = -1.
        let shuffled_r2 = -(report.reference + report.features[0].1);
        assert!((shuffled_r2 + 1.0).abs() < 0.15, "{:?}", report.features);
    }

    #[test]
    fn same_seed_same_report() {
        let model = TrainedModel::<f64>::fit(ModelKind::Ridge, TargetKind::Pct, false, &table(), &FitConfig::default()).unwrap();
        let t = table();
        let a = permutation_importance(&model, &t, ImportanceMetric::Mae, 3, 9).unwrap();
        let b = permutation_importance(&model, &t, ImportanceMetric::Mae, 3, 9).unwrap();
        assert_eq!(a, b);
    }
}
