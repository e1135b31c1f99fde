//! HTTP JSON API over a loaded model registry.
//!
//! Endpoints:
//!
//! - `GET /health`
//! - `GET /topics`
//! - `GET /topics/{id}/history`
//! - `POST /forecast` with `{"topics": [...], "max_horizon": h}`
//! - static files under `/app` when a directory is configured

pub mod forecast;
pub mod registry;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::json;
use thiserror::Error;
use tower_http::services::ServeDir;
use trendcast::corpus::TopicMeta;

pub use forecast::{forecast_batch, forecast_topic, ForecastRequest, ForecastResponse, TopicResult};
pub use registry::{Registry, RegistryError};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error("binding {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        #[source]
        source: std::io::Error,
    },
    #[error("server: {0}")]
    Serve(#[source] std::io::Error),
}

/// Startup configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServeConfig {
    pub addr: SocketAddr,
    pub models_dir: PathBuf,
    pub corpus_dir: PathBuf,
    pub static_dir: Option<PathBuf>,
}

/// Shared handle to the current registry. Handlers take a snapshot per
/// request; [`AppState::reload`] swaps in a whole new registry.
#[derive(Debug, Clone)]
pub struct AppState {
    current: Arc<RwLock<Arc<Registry>>>,
    source: Option<(PathBuf, PathBuf)>,
}

impl AppState {
    pub fn new(registry: Registry) -> Self {
        Self {
            current: Arc::new(RwLock::new(Arc::new(registry))),
            source: None,
        }
    }

    pub fn load(models_dir: PathBuf, corpus_dir: PathBuf) -> Result<Self, RegistryError> {
        let registry = Registry::load(&models_dir, &corpus_dir)?;
        Ok(Self {
            source: Some((models_dir, corpus_dir)),
            ..Self::new(registry)
        })
    }

    pub fn snapshot(&self) -> Arc<Registry> {
        self.current.read().expect("registry lock").clone()
    }

    /// Re-reads the directories given to [`AppState::load`]. On failure the
    /// old registry stays in place.
    pub fn reload(&self) -> Result<(), RegistryError> {
        let Some((models, corpus)) = &self.source else {
            return Ok(());
        };
        let fresh = Arc::new(Registry::load(models, corpus)?);
        *self.current.write().expect("registry lock") = fresh;
        Ok(())
    }
}

fn error_body(status: StatusCode, code: &str, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": code, "message": message.into() }))).into_response()
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok" }))
}

async fn topics(State(state): State<AppState>) -> Json<Vec<TopicMeta>> {
    let registry = state.snapshot();
    let mut metas: Vec<TopicMeta> = registry.store().topics().map(|t| t.meta.clone()).collect();
    metas.sort_by(|a, b| a.display_name.cmp(&b.display_name).then_with(|| a.topic_id.cmp(&b.topic_id)));
    Json(metas)
}

async fn topic_history(State(state): State<AppState>, Path(id): Path<String>) -> Response {
    let registry = state.snapshot();
    match forecast::history(registry.store(), &id) {
        Some(points) => Json(points).into_response(),
        None => (
            StatusCode::NOT_FOUND,
            Json(json!({ "error": "unknown_topic", "topic": id })),
        )
            .into_response(),
    }
}

async fn forecast_handler(
    State(state): State<AppState>,
    body: Result<Json<ForecastRequest>, JsonRejection>,
) -> Response {
    let request = match body {
        Ok(Json(r)) => r,
        Err(rejection) => return error_body(StatusCode::BAD_REQUEST, "malformed_request", rejection.body_text()),
    };
    let registry = state.snapshot();
    match forecast_batch(&registry, &request) {
        Ok(response) => Json(response).into_response(),
        Err(e) => error_body(StatusCode::BAD_REQUEST, e.code(), e.to_string()),
    }
}

pub fn router(state: AppState, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/health", get(health))
        .route("/topics", get(topics))
        .route("/topics/{id}/history", get(topic_history))
        .route("/forecast", post(forecast_handler))
        .with_state(state);
    match static_dir {
        Some(dir) => api.nest_service("/app", ServeDir::new(dir).append_index_html_on_directories(true)),
        None => api,
    }
}

/// Loads the registry and serves until the process is stopped. On Unix a
/// SIGHUP reloads models and corpus.
pub async fn serve(config: ServeConfig) -> Result<(), ServiceError> {
    let state = AppState::load(config.models_dir.clone(), config.corpus_dir.clone())?;
    let app = router(state.clone(), config.static_dir.clone());
    let listener = tokio::net::TcpListener::bind(config.addr)
        .await
        .map_err(|source| ServiceError::Bind {
            addr: config.addr,
            source,
        })?;
    #[cfg(unix)]
    tokio::spawn(reload_on_hangup(state));
    log::info!("listening on {}", config.addr);
    axum::serve(listener, app).await.map_err(ServiceError::Serve)
}

#[cfg(unix)]
async fn reload_on_hangup(state: AppState) {
    use tokio::signal::unix::{signal, SignalKind};
    let Ok(mut hangups) = signal(SignalKind::hangup()) else {
        return;
    };
    while hangups.recv().await.is_some() {
        match tokio::task::spawn_blocking({
            let state = state.clone();
            move || state.reload()
        })
        .await
        {
            Ok(Ok(())) => log::info!("registry reloaded"),
            Ok(Err(e)) => log::error!("reload failed, keeping the old registry: {e}"),
            Err(e) => log::error!("reload task failed: {e}"),
        }
    }
}
