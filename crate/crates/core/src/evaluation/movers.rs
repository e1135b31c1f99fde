//! Ranked lists of topics predicted to rise, fall or reverse.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::corpus::CorpusStore;
use crate::features::{feature_vector, pct_change, FeatureError, TargetKind};
use crate::models::TrainedModel;
use crate::scalar::Scalar;

/// One topic's forecast from a common base year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoverInput {
    pub topic_id: String,
    pub popularity: f64,
    /// Change from the year before the base year, in percent.
    pub trailing_pct: Option<f64>,
    /// Predicted change from the base year to `base_year + h`, in percent.
    pub predicted_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoversReport {
    pub base_year: i32,
    /// Predicted pct > 0, largest change first.
    pub up: Vec<MoverInput>,
    /// Predicted pct ≤ 0, largest magnitude first.
    pub down: Vec<MoverInput>,
    /// Current and predicted trends point in different directions.
    pub reversals: Vec<MoverInput>,
}

fn by_magnitude(a: &MoverInput, b: &MoverInput) -> Ordering {
    b.predicted_pct
        .abs()
        .total_cmp(&a.predicted_pct.abs())
        .then_with(|| a.topic_id.cmp(&b.topic_id))
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

pub fn rank_movers(forecasts: &[MoverInput], base_year: i32) -> MoversReport {
    let (mut up, mut down): (Vec<MoverInput>, Vec<MoverInput>) =
        forecasts.iter().cloned().partition(|f| f.predicted_pct > 0.0);
    up.sort_by(by_magnitude);
    down.sort_by(by_magnitude);
    let mut reversals: Vec<MoverInput> = forecasts
        .iter()
        .filter(|f| f.trailing_pct.is_some_and(|t| sign(t) != sign(f.predicted_pct)))
        .cloned()
        .collect();
    reversals.sort_by(by_magnitude);
    MoversReport {
        base_year,
        up,
        down,
        reversals,
    }
}

/// Forecasts every topic with enough history at `base_year`.
///
/// Topics without history, or with zero popularity at the base year, are
/// left out.
pub fn forecast_movers<T: Scalar>(
    store: &CorpusStore,
    model: &TrainedModel<T>,
    base_year: i32,
) -> Result<Vec<MoverInput>, EvalError> {
    let mut out = Vec::new();
    for topic in store.topic_ids() {
        let features = match feature_vector(store, topic, base_year, model.schema()) {
            Ok(f) => f,
            Err(FeatureError::InsufficientHistory { .. }) => continue,
            Err(e) => return Err(e.into()),
        };
        let pred = model.regressor.predict_features(&features, topic)?.as_f64();
        let now = store.popularity(topic, base_year);
        let predicted_pct = match model.target {
            TargetKind::Pct => Some(pred),
            TargetKind::Pop => pct_change(pred, now),
        };
        let Some(predicted_pct) = predicted_pct.filter(|_| now != 0.0) else {
            continue;
        };
        out.push(MoverInput {
            topic_id: topic.to_string(),
            popularity: now,
            trailing_pct: pct_change(now, store.popularity(topic, base_year - 1)),
            predicted_pct,
        });
    }
    Ok(out)
}
