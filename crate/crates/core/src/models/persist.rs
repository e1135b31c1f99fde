//! Self-describing JSON model documents.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "model_kind": "gbdt",
//!   "scalar": "f64",
//!   "target": "pct",
//!   "horizon": 5,
//!   "embeddings": false,
//!   "schema": ["pop_lag0", "..."],
//!   "parameters": { "rounds": 500, "...": "..." },
//!   "payload": { "kind": "gbdt", "...": "..." }
//! }
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{FitConfig, ModelError, ModelKind, Regressor, TrainedModel};
use crate::features::TargetKind;
use crate::scalar::Scalar;

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
struct Document<T> {
    schema_version: u64,
    model_kind: ModelKind,
    scalar: String,
    target: TargetKind,
    horizon: u32,
    embeddings: bool,
    schema: Vec<String>,
    parameters: Value,
    payload: Regressor<T>,
}

fn scalar_name<T: 'static>() -> String {
    std::any::type_name::<T>().to_string()
}

fn parameters(model_kind: ModelKind, config: &FitConfig) -> Result<Value, ModelError> {
    Ok(match model_kind {
        ModelKind::Gbdt => serde_json::to_value(&config.gbdt)?,
        ModelKind::Ridge | ModelKind::Baseline => serde_json::to_value(&config.ridge)?,
    })
}

/// Serializes `model`; `config` is recorded as the training parameters.
pub fn to_json<T: Scalar>(model: &TrainedModel<T>, config: &FitConfig) -> Result<String, ModelError> {
    let doc = Document {
        schema_version: SCHEMA_VERSION,
        model_kind: model.kind,
        scalar: scalar_name::<T>(),
        target: model.target,
        horizon: model.horizon,
        embeddings: model.embeddings,
        schema: model.schema().names().to_vec(),
        parameters: parameters(model.kind, config)?,
        payload: model.regressor.clone(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn from_json<T: Scalar>(text: &str) -> Result<TrainedModel<T>, ModelError> {
    let value: Value = serde_json::from_str(text)?;
    let version = value
        .get("schema_version")
        .and_then(Value::as_u64)
        .ok_or_else(|| ModelError::Document("missing schema_version".into()))?;
    if version != SCHEMA_VERSION {
        return Err(ModelError::UnsupportedSchemaVersion(version));
    }
    let found = value.get("scalar").and_then(Value::as_str).unwrap_or_default();
    if found != scalar_name::<T>() {
        return Err(ModelError::ScalarMismatch {
            expected: scalar_name::<T>(),
            found: found.to_string(),
        });
    }
    let doc: Document<T> = serde_json::from_value(value)?;
    if doc.schema != doc.payload.schema().names() {
        return Err(ModelError::Document(
            "schema does not match the payload".into(),
        ));
    }
    let payload_is_gbdt = matches!(doc.payload, Regressor::Gbdt(_));
    if payload_is_gbdt != (doc.model_kind == ModelKind::Gbdt) {
        return Err(ModelError::Document(format!(
            "model_kind {} does not match the payload",
            doc.model_kind
        )));
    }
    Ok(TrainedModel {
        kind: doc.model_kind,
        target: doc.target,
        horizon: doc.horizon,
        embeddings: doc.embeddings,
        regressor: doc.payload,
    })
}

pub fn save<T: Scalar>(model: &TrainedModel<T>, config: &FitConfig, path: &Path) -> Result<(), ModelError> {
    let text = to_json(model, config)?;
    let mut file = fs::File::create(path)?;
    file.write_all(text.as_bytes())?;
    file.write_all(b"\n")?;
    Ok(())
}

pub fn load<T: Scalar>(path: &Path) -> Result<TrainedModel<T>, ModelError> {
    from_json(&fs::read_to_string(path)?)
}

/// File name used for a model inside a registry directory.
pub fn registry_file_name(kind: ModelKind, target: TargetKind, horizon: u32) -> String {
    format!("{kind}_{target}_h{horizon}.json")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{FeatureRow, FeatureSchema, FeatureTable};
    use crate::models::TrainParams;

    fn table() -> FeatureTable {
        let schema = FeatureSchema::custom(vec!["pop_lag0".into(), "lag5_pct_new".into(), "x".into()]);
        FeatureTable {
            horizon: 3,
            rows: (0..60)
                .map(|i| FeatureRow {
                    topic_id: format!("t{}", i % 5),
                    base_year: 1990 + i / 5,
                    horizon: 3,
                    features: vec![
                        Some(i as f64 * 0.7),
                        Some(((i * 7) % 13) as f64 - 6.0),
                        if i % 9 == 0 { None } else { Some((i % 11) as f64) },
                    ],
                    target_pop: i as f64 * 0.7 + (i % 3) as f64 * 1e-3,
                    target_pct: Some((i % 11) as f64 - 5.0 + 1.0 / 3.0),
                })
                .collect(),
            schema,
        }
    }

    fn config() -> FitConfig {
        FitConfig {
            gbdt: TrainParams {
                rounds: 25,
                max_depth: 3,
                min_samples_leaf: 4,
                ..TrainParams::default()
            },
            ..FitConfig::default()
        }
    }

    #[test]
    fn round_trip_is_exact_for_every_kind() {
        let t = table();
        for kind in ModelKind::ALL {
            for target in [TargetKind::Pop, TargetKind::Pct] {
                let model = TrainedModel::<f64>::fit(kind, target, false, &t, &config()).unwrap();
                let back: TrainedModel<f64> = from_json(&to_json(&model, &config()).unwrap()).unwrap();
                assert_eq!(back, model, "{kind} {target}");
                assert_eq!(back.predict_table(&t).unwrap(), model.predict_table(&t).unwrap());
            }
        }
    }

    #[test]
    fn single_precision_round_trip() {
        let model = TrainedModel::<f32>::fit(ModelKind::Gbdt, TargetKind::Pct, false, &table(), &config()).unwrap();
        let back: TrainedModel<f32> = from_json(&to_json(&model, &config()).unwrap()).unwrap();
        assert_eq!(back, model);
        assert!(matches!(
            from_json::<f64>(&to_json(&model, &config()).unwrap()),
            Err(ModelError::ScalarMismatch { .. })
        ));
    }

    #[test]
    fn unknown_version_is_rejected() {
        let model = TrainedModel::<f64>::fit(ModelKind::Ridge, TargetKind::Pop, false, &table(), &config()).unwrap();
        let mut value: Value = serde_json::from_str(&to_json(&model, &config()).unwrap()).unwrap();
        value["schema_version"] = Value::from(2);
        assert!(matches!(
            from_json::<f64>(&value.to_string()),
            Err(ModelError::UnsupportedSchemaVersion(2))
        ));
    }

    #[test]
    fn document_is_self_describing() {
        let model = TrainedModel::<f64>::fit(ModelKind::Gbdt, TargetKind::Pct, false, &table(), &config()).unwrap();
        let value: Value = serde_json::from_str(&to_json(&model, &config()).unwrap()).unwrap();
        assert_eq!(value["schema_version"], 1);
        assert_eq!(value["model_kind"], "gbdt");
        assert_eq!(value["target"], "pct");
        assert_eq!(value["horizon"], 3);
        assert_eq!(value["parameters"]["rounds"], 25);
        assert_eq!(value["schema"][2], "x");
        assert!(value["payload"]["booster"]["trees"].as_array().unwrap().len() == 25);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let model = TrainedModel::<f64>::fit(ModelKind::Baseline, TargetKind::Pop, false, &table(), &config()).unwrap();
        let path = dir.path().join(registry_file_name(model.kind, model.target, model.horizon));
        save(&model, &config(), &path).unwrap();
        assert!(path.ends_with("baseline_pop_h3.json"));
        assert_eq!(load::<f64>(&path).unwrap(), model);
    }
}
