//! Request and response bodies, and the forecasting logic behind them.
//!
//! These functions are shared with the command line so both produce the
//! same bytes for the same registry.

use serde::{Deserialize, Serialize};
use thiserror::Error;
use trendcast::features::{feature_vector, FeatureError, MAX_HORIZON, MIN_HORIZON};
use trendcast::scalar::Scalar;
use trendcast::{CorpusStore, TargetKind};

use crate::registry::Registry;

/// Largest batch accepted by [`forecast_batch`].
pub const MAX_TOPICS: usize = 10;
/// Number of observed years returned with each forecast.
pub const HISTORY_TAIL: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryPoint {
    pub year: i32,
    pub popularity: f64,
    pub review_popularity: f64,
    pub research_popularity: f64,
    pub patent_count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    /// Zero counts as down.
    pub fn of(pct: f64) -> Self {
        if pct > 0.0 {
            Direction::Up
        } else {
            Direction::Down
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonForecast {
    pub horizon: u32,
    pub year: i32,
    /// Predicted popularity, clamped at zero.
    pub popularity: f64,
    /// Unclamped model output.
    pub raw: f64,
    pub pct_change: f64,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub topic: String,
    pub topic_id: String,
    pub display_name: String,
    /// Last year with observed data for this topic.
    pub base_year: i32,
    pub history: Vec<HistoryPoint>,
    pub forecast: Vec<HorizonForecast>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicFailure {
    pub topic: String,
    pub error: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TopicResult {
    Forecast(Forecast),
    Failure(TopicFailure),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForecastRequest {
    pub topics: Vec<String>,
    /// Defaults to the largest horizon the registry serves.
    #[serde(default)]
    pub max_horizon: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastResponse {
    pub max_horizon: u32,
    pub results: Vec<TopicResult>,
}

/// Batch-level rejection.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RequestError {
    #[error("at most {MAX_TOPICS} topics per request, got {0}")]
    TooManyTopics(usize),
    #[error("max_horizon must be in [{MIN_HORIZON},{MAX_HORIZON}], got {0}")]
    Horizon(u32),
    #[error("max_horizon {requested} requested but models only cover horizons up to {available}")]
    HorizonUnavailable { requested: u32, available: u32 },
}

impl RequestError {
    pub fn code(&self) -> &'static str {
        match self {
            RequestError::TooManyTopics(_) => "too_many_topics",
            RequestError::Horizon(_) => "invalid_horizon",
            RequestError::HorizonUnavailable { .. } => "horizon_unavailable",
        }
    }
}

/// The full observed series of a topic, or `None` if the topic is unknown.
pub fn history(store: &CorpusStore, topic: &str) -> Option<Vec<HistoryPoint>> {
    let record = store.resolve(topic)?;
    Some(
        record
            .points
            .values()
            .map(|p| HistoryPoint {
                year: p.year,
                popularity: p.popularity,
                review_popularity: p.review_popularity,
                research_popularity: p.research_popularity,
                patent_count: store.patents(&p.topic_id, p.year),
            })
            .collect(),
    )
}

fn failure(topic: &str, error: &str, message: String) -> TopicResult {
    TopicResult::Failure(TopicFailure {
        topic: topic.to_string(),
        error: error.to_string(),
        message,
    })
}

/// Forecast for one topic over horizons `1..=max_horizon`. The caller has
/// checked that the registry covers those horizons.
pub fn forecast_topic(registry: &Registry, topic: &str, max_horizon: u32) -> TopicResult {
    let store = registry.store();
    let Some(record) = store.resolve(topic) else {
        return failure(topic, "unknown_topic", format!("unknown topic `{topic}`"));
    };
    let id = record.meta.topic_id.as_str();
    let Some(base_year) = record.last_observed_year() else {
        return failure(topic, "insufficient_history", format!("topic `{id}` has no observations"));
    };

    let mut horizons = Vec::with_capacity(max_horizon as usize);
    for horizon in 1..=max_horizon {
        let predict = |target| -> Result<f64, TopicResult> {
            let model = registry.model(horizon, target).expect("registry covers the horizon");
            let features = feature_vector(store, id, base_year, model.schema()).map_err(|e| match e {
                FeatureError::InsufficientHistory { .. } => failure(topic, "insufficient_history", e.to_string()),
                other => failure(topic, "feature_error", other.to_string()),
            })?;
            model
                .regressor
                .predict_features(&features, id)
                .map(Scalar::as_f64)
                .map_err(|e| failure(topic, "prediction_failed", e.to_string()))
        };
        let raw = match predict(TargetKind::Pop) {
            Ok(v) => v,
            Err(f) => return f,
        };
        let pct_change = match predict(TargetKind::Pct) {
            Ok(v) => v,
            Err(f) => return f,
        };
        horizons.push(HorizonForecast {
            horizon,
            year: base_year + horizon as i32,
            popularity: raw.max(0.0),
            raw,
            pct_change,
            direction: Direction::of(pct_change),
        });
    }

    let full = history(store, id).unwrap_or_default();
    let tail = full[full.len().saturating_sub(HISTORY_TAIL)..].to_vec();
    TopicResult::Forecast(Forecast {
        topic: topic.to_string(),
        topic_id: id.to_string(),
        display_name: record.meta.display_name.clone(),
        base_year,
        history: tail,
        forecast: horizons,
    })
}

/// Validates the batch, then forecasts each topic independently. Per-topic
/// failures are reported inline.
pub fn forecast_batch(registry: &Registry, request: &ForecastRequest) -> Result<ForecastResponse, RequestError> {
    if request.topics.len() > MAX_TOPICS {
        return Err(RequestError::TooManyTopics(request.topics.len()));
    }
    let max_horizon = request.max_horizon.unwrap_or(registry.max_horizon().max(MIN_HORIZON));
    if !(MIN_HORIZON..=MAX_HORIZON).contains(&max_horizon) {
        return Err(RequestError::Horizon(max_horizon));
    }
    if max_horizon > registry.max_horizon() {
        return Err(RequestError::HorizonUnavailable {
            requested: max_horizon,
            available: registry.max_horizon(),
        });
    }
    Ok(ForecastResponse {
        max_horizon,
        results: request
            .topics
            .iter()
            .map(|t| forecast_topic(registry, t, max_horizon))
            .collect(),
    })
}
