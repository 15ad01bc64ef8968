//! HTTP API over a [`SessionStore`].
//!
//! | method | path | response |
//! |---|---|---|
//! | POST | `/api/v1/datasets` (CSV body) | dataset descriptor |
//! | GET | `/api/v1/datasets/{id}` | schema and per-attribute stats |
//! | GET | `/api/v1/datasets/{id}/histogram?attribute=A&bins=N` | histogram |
//! | POST | `/api/v1/datasets/{id}/rankings` (JSON request) | ranking id and top-k preview |
//! | GET | `/api/v1/rankings/{id}/label` | label JSON |
//! | GET | `/api/v1/rankings/{id}/label.html` | label HTML |
//!
//! Errors are `{"error": code, "message": text}` objects.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::{to_bytes, Body, Bytes};
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::services::ServeDir;

use crate::dataset::{ColumnKind, ColumnStats, Dataset};
use crate::error::Error;
use crate::label::render_html;
use crate::request::RankingRequest;
use crate::store::SessionStore;

pub const DEFAULT_PORT: u16 = 8080;
pub const DEFAULT_MAX_UPLOAD: usize = 50 * 1024 * 1024;
pub const DEFAULT_BINS: usize = 10;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub port: u16,
    pub data_dir: PathBuf,
    pub ui_dir: Option<PathBuf>,
    pub max_upload_bytes: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            port: DEFAULT_PORT,
            data_dir: PathBuf::from("ranklabel-data"),
            ui_dir: None,
            max_upload_bytes: DEFAULT_MAX_UPLOAD,
        }
    }
}

#[derive(Clone)]
struct AppState {
    store: Arc<SessionStore>,
    max_upload_bytes: usize,
}

pub struct ApiError {
    status: StatusCode,
    code: String,
    message: String,
    fields: Option<BTreeMap<String, String>>,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code: code.to_string(),
            message: message.into(),
            fields: None,
        }
    }
}

impl From<Error> for ApiError {
    fn from(err: Error) -> Self {
        let status = match err.root() {
            Error::NotFound(_) => StatusCode::NOT_FOUND,
            Error::InvalidDataset(_) | Error::MalformedRow { .. } | Error::Json(_) => {
                StatusCode::BAD_REQUEST
            }
            Error::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        ApiError::new(status, err.code(), err.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.code, "message": self.message });
        if let Some(fields) = self.fields {
            body["fields"] = json!(fields);
        }
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Serialize)]
struct AttributeSchema {
    name: String,
    kind: ColumnKind,
    missing: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    categories: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    binary: Option<bool>,
}

fn schema_of(ds: &Dataset) -> Vec<AttributeSchema> {
    ds.columns()
        .iter()
        .map(|c| {
            let cats = (c.kind() == ColumnKind::Categorical).then(|| c.categories());
            AttributeSchema {
                name: c.name().to_string(),
                kind: c.kind(),
                missing: c.missing_count(),
                binary: cats.as_ref().map(|v| v.len() == 2),
                categories: cats,
            }
        })
        .collect()
}

async fn blocking<T, F>(f: F) -> ApiResult<T>
where
    F: FnOnce() -> Result<T, Error> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
        .map_err(ApiError::from)
}

async fn upload_dataset(State(state): State<AppState>, body: Body) -> ApiResult<Json<Value>> {
    let bytes = to_bytes(body, state.max_upload_bytes).await.map_err(|_| {
        ApiError::new(
            StatusCode::PAYLOAD_TOO_LARGE,
            "payload_too_large",
            format!("upload exceeds {} bytes", state.max_upload_bytes),
        )
    })?;
    let store = state.store.clone();
    let (id, ds) = blocking(move || store.put_dataset(&bytes)).await?;
    Ok(Json(json!({
        "dataset_id": id,
        "row_count": ds.row_count(),
        "schema": schema_of(&ds),
    })))
}

async fn describe_dataset(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let store = state.store.clone();
    let ds_id = id.clone();
    let ds = blocking(move || store.dataset(&ds_id)).await?;
    let mut stats: BTreeMap<&str, Option<ColumnStats>> = BTreeMap::new();
    for name in ds.numeric_attributes() {
        stats.insert(name, ds.column_stats(name, None).ok());
    }
    Ok(Json(json!({
        "dataset_id": id,
        "row_count": ds.row_count(),
        "schema": schema_of(&ds),
        "stats": stats,
    })))
}

#[derive(Deserialize)]
struct HistogramQuery {
    attribute: Option<String>,
    bins: Option<usize>,
}

async fn dataset_histogram(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<HistogramQuery>,
) -> ApiResult<Json<Value>> {
    let attribute = q.attribute.ok_or_else(|| {
        ApiError::new(StatusCode::BAD_REQUEST, "invalid_request", "missing 'attribute' parameter")
    })?;
    let bins = q.bins.unwrap_or(DEFAULT_BINS);
    let store = state.store.clone();
    let hist = blocking(move || store.dataset(&id)?.histogram(&attribute, bins)).await?;
    Ok(Json(serde_json::to_value(hist).map_err(Error::from)?))
}

async fn create_ranking(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<Value>> {
    let request: RankingRequest = serde_json::from_slice(&body)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_request", e.to_string()))?;

    let store = state.store.clone();
    let ds_id = id.clone();
    let ds = blocking(move || store.dataset(&ds_id)).await?;

    let errors = request.validate(&ds);
    if !errors.is_empty() {
        let fields = errors
            .iter()
            .map(|e| (e.field.clone(), e.error.to_string()))
            .collect();
        let mut err = ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "invalid_request",
            format!("{} invalid field(s)", errors.len()),
        );
        err.fields = Some(fields);
        return Err(err);
    }

    let store = state.store.clone();
    let stored = blocking(move || store.create_ranking(&id, &request)).await?;
    let r = &stored.ranking;
    let preview: Vec<Value> = r
        .top_k()
        .iter()
        .zip(r.top_k_scores())
        .enumerate()
        .map(|(i, (&row, &score))| {
            let values: BTreeMap<&str, Value> = ds
                .columns()
                .iter()
                .map(|c| {
                    let v = match (c.as_numeric(), c.as_categorical()) {
                        (Some(v), _) => json!(v[row]),
                        (_, Some(v)) => json!(v[row]),
                        _ => Value::Null,
                    };
                    (c.name(), v)
                })
                .collect();
            json!({ "rank": i + 1, "row": row, "score": score, "values": values })
        })
        .collect();
    Ok(Json(json!({
        "ranking_id": stored.ranking_id,
        "dataset_id": stored.dataset_id,
        "k": r.k,
        "retained_rows": r.len(),
        "dropped_rows": r.dropped_rows,
        "preview": preview,
    })))
}

async fn label_json(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let store = state.store.clone();
    let stored = blocking(move || store.ranking(&id)).await?;
    Ok((
        [(header::CONTENT_TYPE, "application/json")],
        stored.label_json.clone(),
    )
        .into_response())
}

async fn label_html(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let store = state.store.clone();
    let stored = blocking(move || store.ranking(&id)).await?;
    let html = String::from_utf8(render_html(&stored.label)).expect("renderer emits UTF-8");
    Ok(Html(html).into_response())
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint")
}

const INDEX_HTML: &str = "<!DOCTYPE html>
<html lang=\"en\"><head><meta charset=\"utf-8\"/><title>ranklabel</title></head>
<body><h1>ranklabel</h1>
<p>The designer UI is not installed. Start the service with <code>--ui-dir</code> pointing at built UI assets, or use the API under <code>/api/v1</code>.</p>
</body></html>
";

pub fn router(store: Arc<SessionStore>, config: &ServiceConfig) -> Router {
    let state = AppState {
        store,
        max_upload_bytes: config.max_upload_bytes,
    };
    let api = Router::new()
        .route(
            "/api/v1/datasets",
            post(upload_dataset).layer(DefaultBodyLimit::disable()),
        )
        .route("/api/v1/datasets/{id}", get(describe_dataset))
        .route("/api/v1/datasets/{id}/histogram", get(dataset_histogram))
        .route("/api/v1/datasets/{id}/rankings", post(create_ranking))
        .route("/api/v1/rankings/{id}/label", get(label_json))
        .route("/api/v1/rankings/{id}/label.html", get(label_html))
        .route("/api/{*rest}", get(not_found).post(not_found))
        .with_state(state);
    match &config.ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(|| async { Html(INDEX_HTML) })),
    }
}

/// Binds the configured port and serves until interrupted.
pub async fn serve(config: ServiceConfig) -> Result<(), Error> {
    let store = Arc::new(SessionStore::open(&config.data_dir)?);
    let app = router(store, &config);
    let addr = SocketAddr::from(([0, 0, 0, 0], config.port));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
