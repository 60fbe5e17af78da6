//! JSON-over-HTTP API. Writes serialize through the desk mutex; every read
//! first catches up with records appended by other processes.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use super::{ArticleFilter, Desk, ServiceError};
use crate::ingest::{IngestError, Source};
use crate::translator::JobStatus;

pub const DEFAULT_PAGE: usize = 50;

#[derive(Clone)]
pub struct AppState {
    desk: Arc<Mutex<Desk>>,
}

impl AppState {
    pub fn new(desk: Desk) -> Self {
        Self {
            desk: Arc::new(Mutex::new(desk)),
        }
    }

    pub fn desk(&self) -> Arc<Mutex<Desk>> {
        Arc::clone(&self.desk)
    }
}

/// Error payload: `{error: code, message}` plus the job id for failed translations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub job_id: Option<String>,
}

struct ApiError(ServiceError);

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        Self(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.0.http_status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        let job_id = match &self.0 {
            ServiceError::JobFailed { job_id, .. } => Some(job_id.clone()),
            _ => None,
        };
        let message = match &self.0 {
            ServiceError::JobFailed { message, .. } => message.clone(),
            e => e.to_string(),
        };
        let body = ErrorBody {
            error: self.0.code().to_owned(),
            message,
            job_id,
        };
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

async fn with_desk<R, F>(state: &AppState, f: F) -> ApiResult<R>
where
    R: Send + 'static,
    F: FnOnce(&mut Desk) -> Result<R, ServiceError> + Send + 'static,
{
    let desk = state.desk();
    tokio::task::spawn_blocking(move || {
        let mut guard = desk.lock().unwrap_or_else(|p| p.into_inner());
        f(&mut guard)
    })
    .await
    .map_err(|e| ServiceError::Store(format!("handler panicked: {e}")))?
    .map_err(ApiError)
}

fn parse_body<T: DeserializeOwned>(body: &[u8]) -> Result<T, ServiceError> {
    serde_json::from_slice(body).map_err(|e| ServiceError::InvalidRequest(e.to_string()))
}

/// Builds the article filter from `class`, `source`, `q`, `topic`, `min_score`, `limit` and `offset`.
pub fn filter_from_params(params: &HashMap<String, String>) -> Result<ArticleFilter, ServiceError> {
    let mut filter = ArticleFilter::page(DEFAULT_PAGE, 0);
    let num = |k: &str, v: &str| -> Result<usize, ServiceError> {
        v.parse()
            .map_err(|_| ServiceError::MalformedFilter(format!("`{k}` must be a non-negative integer, got `{v}`")))
    };
    let non_empty = |v: &String| (!v.is_empty()).then(|| v.clone());
    for (k, v) in params {
        match k.as_str() {
            "class" => filter.class_label = non_empty(v),
            "source" => filter.source_id = non_empty(v),
            "q" => filter.text_query = non_empty(v),
            "limit" => filter.limit = num(k, v)?,
            "offset" => filter.offset = num(k, v)?,
            "topic" | "min_score" => {}
            other => return Err(ServiceError::MalformedFilter(format!("unknown parameter `{other}`"))),
        }
    }
    match (params.get("topic").filter(|t| !t.is_empty()), params.get("min_score")) {
        (None, None) => {}
        (Some(t), score) => {
            let score = match score {
                Some(s) => s
                    .parse::<f64>()
                    .map_err(|_| ServiceError::MalformedFilter(format!("`min_score` must be a number, got `{s}`")))?,
                None => 0.0,
            };
            filter.topic_min_score = Some((t.clone(), score));
        }
        (None, Some(_)) => return Err(ServiceError::MalformedFilter("`min_score` requires `topic`".into())),
    }
    Ok(filter)
}

async fn list_articles(State(state): State<AppState>, Query(params): Query<HashMap<String, String>>) -> ApiResult<Response> {
    let filter = filter_from_params(&params)?;
    let page = with_desk(&state, move |d| {
        d.store.refresh()?;
        d.store.query(&filter)
    })
    .await?;
    Ok(Json(page).into_response())
}

async fn get_article(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let article = with_desk(&state, move |d| {
        d.store.refresh()?;
        d.store.get(&id).cloned().ok_or(ServiceError::UnknownArticle(id))
    })
    .await?;
    Ok(Json(article).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TranslateBody {
    #[serde(default)]
    backend_id: Option<String>,
}

async fn translate(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let req: TranslateBody = if body.iter().all(u8::is_ascii_whitespace) {
        TranslateBody { backend_id: None }
    } else {
        parse_body(&body)?
    };
    let job = with_desk(&state, move |d| d.translate_article(&id, req.backend_id.as_deref())).await?;
    if job.status == JobStatus::Failed {
        let err = job.error.clone().unwrap_or_else(|| crate::translator::JobError {
            code: "TranslationFailed".into(),
            message: "translation failed".into(),
        });
        return Err(ServiceError::JobFailed {
            job_id: job.id,
            code: err.code,
            message: err.message,
        }
        .into());
    }
    Ok((StatusCode::CREATED, Json(job)).into_response())
}

async fn get_job(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let job = with_desk(&state, move |d| {
        d.store.refresh()?;
        d.store.job(&id).cloned().ok_or(ServiceError::UnknownJob(id))
    })
    .await?;
    Ok(Json(job).into_response())
}

async fn list_sources(State(state): State<AppState>) -> ApiResult<Response> {
    let sources = with_desk(&state, |d| Ok(d.registry.sources().to_vec())).await?;
    Ok(Json(sources).into_response())
}

async fn add_source(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let source: Source = serde_json::from_slice(&body)
        .map_err(|e| ServiceError::Ingest(IngestError::InvalidRegistry(e.to_string())))?;
    let created = with_desk(&state, move |d| {
        d.registry.add(source.clone())?;
        d.save_registry()?;
        Ok(source)
    })
    .await?;
    Ok((StatusCode::CREATED, Json(created)).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SourcePatch {
    enabled: Option<bool>,
    republish_permitted: Option<bool>,
}

async fn patch_source(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let patch: SourcePatch = parse_body(&body)?;
    if patch.enabled.is_none() && patch.republish_permitted.is_none() {
        return Err(ServiceError::InvalidRequest("patch must set `enabled` or `republish_permitted`".into()).into());
    }
    let updated = with_desk(&state, move |d| {
        let source = d
            .registry
            .get_mut(&id)
            .ok_or_else(|| ServiceError::Ingest(IngestError::UnknownSource(id.clone())))?;
        if let Some(e) = patch.enabled {
            source.enabled = e;
        }
        if let Some(p) = patch.republish_permitted {
            source.republish_permitted = p;
        }
        let updated = source.clone();
        d.save_registry()?;
        Ok(updated)
    })
    .await?;
    Ok(Json(updated).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LabelBody {
    article_id: String,
    class_label: String,
}

async fn add_label(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let req: LabelBody = parse_body(&body)?;
    let record = with_desk(&state, move |d| d.annotate(&req.article_id, &req.class_label)).await?;
    Ok((StatusCode::CREATED, Json(record)).into_response())
}

async fn latest_run(State(state): State<AppState>) -> ApiResult<Response> {
    let run = with_desk(&state, |d| {
        d.store.refresh()?;
        d.store.latest_run().cloned().ok_or(ServiceError::NoRuns)
    })
    .await?;
    Ok(Json(run).into_response())
}

async fn list_backends(State(state): State<AppState>) -> ApiResult<Response> {
    let ids = with_desk(&state, |d| Ok(d.backends.ids().map(str::to_owned).collect::<Vec<_>>())).await?;
    Ok(Json(ids).into_response())
}

async fn not_found() -> Response {
    let body = ErrorBody {
        error: "NotFound".into(),
        message: "no such endpoint".into(),
        job_id: None,
    };
    (StatusCode::NOT_FOUND, Json(body)).into_response()
}

/// The API router; serves the dashboard bundle under `/` when configured.
pub fn router(state: AppState) -> Router {
    let dashboard = state
        .desk
        .lock()
        .unwrap_or_else(|p| p.into_inner())
        .config
        .dashboard_dir
        .clone();
    let api = Router::new()
        .route("/api/articles", get(list_articles))
        .route("/api/articles/:id", get(get_article))
        .route("/api/articles/:id/translate", post(translate))
        .route("/api/jobs/:id", get(get_job))
        .route("/api/sources", get(list_sources).post(add_source))
        .route("/api/sources/:id", axum::routing::patch(patch_source))
        .route("/api/labels", post(add_label))
        .route("/api/runs/latest", get(latest_run))
        .route("/api/backends", get(list_backends))
        .route("/api/*rest", axum::routing::any(not_found))
        .with_state(state);
    match dashboard {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Serves `app` on `listener` until the process is stopped.
pub async fn serve(listener: tokio::net::TcpListener, app: Router) -> std::io::Result<()> {
    axum::serve(listener, app).await
}
