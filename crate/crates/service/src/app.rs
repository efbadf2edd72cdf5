//! Shared state and request handlers.
//!
//! Each app has one writer lock that serializes event submission and an
//! immutable ledger snapshot behind an `Arc`. Readers clone the `Arc` and
//! never wait on a writer for longer than the pointer swap.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::rejection::BytesRejection;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use gemtrail_core::catalog::Catalog;
use gemtrail_core::ingest::{ingest_log_detailed, Rejection};
use gemtrail_core::trace::build_trace;
use gemtrail_core::{Execution, Ledger, LedgerSet, ReportDocument, ReportQuery, TraceDocument};
use serde::Serialize;
use serde_json::Value;
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::config::{AppConfig, ServiceConfig};
use crate::error::ApiError;
use crate::store::Store;
use crate::ServiceError;

pub struct AppState {
    pub config: AppConfig,
    catalog: Option<Catalog>,
    writer: tokio::sync::Mutex<()>,
    snapshot: RwLock<Arc<Ledger>>,
}

impl AppState {
    pub fn snapshot(&self) -> Arc<Ledger> {
        self.snapshot.read().unwrap_or_else(|p| p.into_inner()).clone()
    }

    fn publish(&self, ledger: Ledger) {
        *self.snapshot.write().unwrap_or_else(|p| p.into_inner()) = Arc::new(ledger);
    }
}

pub struct ServiceState {
    apps: BTreeMap<String, AppState>,
    store: Arc<Store>,
    max_body_bytes: usize,
    cors_origins: Vec<String>,
}

impl ServiceState {
    /// Opens the data directory, replays its log and loads catalogs.
    pub fn open(config: &ServiceConfig) -> Result<Arc<Self>, ServiceError> {
        let store = Store::open(&config.data_dir)?;
        let lines = store.read_lines()?;
        let mut set = LedgerSet::new(Default::default());
        for (app, c) in &config.apps {
            set.configure(app.clone(), c.ledger_config());
        }
        let (report, _) = set.ingest(&lines, Execution::default());
        if !report.rejected.is_empty() {
            eprintln!(
                "warning: {} line(s) of {} could not be replayed: {}",
                report.rejected.len(),
                store.log_path().display(),
                report.summary()
            );
        }
        let mut apps = BTreeMap::new();
        for (app, c) in &config.apps {
            let catalog = match &c.catalog_path {
                Some(path) => {
                    let catalog = Catalog::load(path)
                        .map_err(|e| ServiceError::Catalog(app.clone(), e.to_string()))?;
                    if catalog.app_id != *app {
                        return Err(ServiceError::Catalog(
                            app.clone(),
                            format!("catalog is for app {}", catalog.app_id),
                        ));
                    }
                    Some(catalog)
                }
                None => None,
            };
            let ledger = set
                .get(app)
                .cloned()
                .unwrap_or_else(|| Ledger::new(app.clone(), c.ledger_config()));
            apps.insert(
                app.clone(),
                AppState {
                    config: c.clone(),
                    catalog,
                    writer: tokio::sync::Mutex::new(()),
                    snapshot: RwLock::new(Arc::new(ledger)),
                },
            );
        }
        Ok(Arc::new(ServiceState {
            apps,
            store: Arc::new(store),
            max_body_bytes: config.max_body_bytes,
            cors_origins: config.cors_origins(),
        }))
    }

    pub fn app(&self, app: &str) -> Result<&AppState, ApiError> {
        self.apps.get(app).ok_or_else(|| ApiError::unknown_app(app))
    }
}

pub fn router(state: Arc<ServiceState>) -> Router {
    let origins: Vec<HeaderValue> = state
        .cors_origins
        .iter()
        .filter_map(|o| HeaderValue::from_str(o).ok())
        .collect();
    let cors = CorsLayer::new()
        .allow_origin(AllowOrigin::list(origins))
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);
    Router::new()
        .route("/v1/apps/{app}/events", axum::routing::post(post_events))
        .route("/v1/apps/{app}/report", get(get_report))
        .route("/v1/apps/{app}/attributions/{id}/trace", get(get_trace))
        .route("/v1/apps/{app}/catalog", get(get_catalog))
        .fallback(not_found)
        .layer(DefaultBodyLimit::max(state.max_body_bytes))
        .layer(cors)
        .with_state(state)
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint")
}

fn json_text(text: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], text).into_response()
}

#[derive(Debug, Serialize)]
pub struct PostResponse {
    pub app_id: String,
    pub accepted: usize,
    pub rejected: Vec<Rejection>,
    pub summary: String,
}

/// Splits a body into event lines. A body starting with `[` is a JSON
/// array; anything else is JSON Lines.
fn body_lines(body: &[u8]) -> Result<Vec<String>, ApiError> {
    let text = std::str::from_utf8(body).map_err(|e| ApiError::malformed_body(e.to_string()))?;
    if text.trim_start().starts_with('[') {
        let values: Vec<Value> =
            serde_json::from_str(text).map_err(|e| ApiError::malformed_body(e.to_string()))?;
        return Ok(values.iter().map(Value::to_string).collect());
    }
    let lines: Vec<String> = text.lines().map(str::to_string).collect();
    let mut nonblank = lines.iter().filter(|l| !l.trim().is_empty()).peekable();
    if nonblank.peek().is_some()
        && nonblank.all(|l| serde_json::from_str::<Value>(l).is_err())
    {
        return Err(ApiError::malformed_body("no line is valid JSON"));
    }
    Ok(lines)
}

async fn post_events(
    State(state): State<Arc<ServiceState>>,
    Path(app): Path<String>,
    body: Result<Bytes, BytesRejection>,
) -> Result<Json<PostResponse>, ApiError> {
    let app_state = state.app(&app)?;
    let body = body.map_err(|e| match e.status() {
        StatusCode::PAYLOAD_TOO_LARGE => ApiError::payload_too_large(state.max_body_bytes),
        _ => ApiError::malformed_body(e.body_text()),
    })?;
    let lines = body_lines(&body)?;

    let _writer = app_state.writer.lock().await;
    let mut next = (*app_state.snapshot()).clone();
    let (report, applied) = ingest_log_detailed(&lines, &mut next);
    if !applied.is_empty() {
        let store = state.store.clone();
        tokio::task::spawn_blocking(move || store.append(&applied))
            .await
            .map_err(|e| ApiError::internal(&e))?
            .map_err(|e| ApiError::internal(&e))?;
        app_state.publish(next);
    }
    Ok(Json(PostResponse {
        app_id: app,
        accepted: report.accepted,
        summary: report.summary(),
        rejected: report.rejected,
    }))
}

async fn get_report(
    State(state): State<Arc<ServiceState>>,
    Path(app): Path<String>,
    Query(params): Query<HashMap<String, String>>,
) -> Result<Response, ApiError> {
    let ledger = state.app(&app)?.snapshot();
    let param = |k: &str| params.get(k).map(String::as_str).filter(|v| !v.is_empty());
    let query = ReportQuery::parse(param("from"), param("to"), param("group"), param("tz"))?;
    Ok(json_text(ReportDocument::build(&ledger, &query).to_json()))
}

async fn get_trace(
    State(state): State<Arc<ServiceState>>,
    Path((app, id)): Path<(String, String)>,
) -> Result<Response, ApiError> {
    let ledger = state.app(&app)?.snapshot();
    let trace = build_trace(&ledger, &id)?;
    Ok(json_text(TraceDocument::build(&ledger, &trace).to_json()))
}

async fn get_catalog(
    State(state): State<Arc<ServiceState>>,
    Path(app): Path<String>,
) -> Result<Response, ApiError> {
    let catalog = state
        .app(&app)?
        .catalog
        .as_ref()
        .ok_or_else(|| ApiError::no_catalog(&app))?;
    Ok(json_text(catalog.to_canonical_json()))
}
