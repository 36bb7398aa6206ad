//! HTTP front end for an [`AnnotationService`].

use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use claimforge::service::{AnnotationService, HighlightPolicy, JudgmentSubmission, ServiceError};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

pub type Shared = Arc<Mutex<AnnotationService>>;

pub struct ApiError(ServiceError);

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        ApiError(e)
    }
}

#[derive(Serialize)]
struct ErrorBody {
    error: &'static str,
    message: String,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, kind) = match &self.0 {
            ServiceError::UnknownSession(_) => (StatusCode::NOT_FOUND, "unknown_session"),
            ServiceError::UnknownExample(_) => (StatusCode::NOT_FOUND, "unknown_example"),
            ServiceError::Duplicate { .. } => (StatusCode::CONFLICT, "duplicate"),
            ServiceError::ItemFull(_) => (StatusCode::CONFLICT, "item_full"),
            ServiceError::Validation(_) => (StatusCode::UNPROCESSABLE_ENTITY, "validation"),
            _ => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        };
        let body = ErrorBody {
            error: kind,
            message: self.0.to_string(),
        };
        (status, Json(body)).into_response()
    }
}

fn lock(state: &Shared) -> std::sync::MutexGuard<'_, AnnotationService> {
    // A panic mid-request leaves the log consistent, so keep serving.
    state.lock().unwrap_or_else(|e| e.into_inner())
}

#[derive(Deserialize)]
struct NextQuery {
    worker: String,
    session: Option<String>,
}

#[derive(Deserialize)]
struct SessionQuery {
    session: Option<String>,
}

#[derive(Serialize)]
struct SessionInfo {
    session: String,
    policy: HighlightPolicy,
    n_judgments: usize,
    item_count: usize,
    judgment_count: usize,
}

async fn next_task(State(state): State<Shared>, Query(q): Query<NextQuery>) -> Result<impl IntoResponse, ApiError> {
    let mut svc = lock(&state);
    let session = q.session.unwrap_or_else(|| svc.session_id().to_string());
    Ok(Json(svc.next_task(&session, &q.worker)?))
}

async fn submit(State(state): State<Shared>, Json(j): Json<JudgmentSubmission>) -> Result<impl IntoResponse, ApiError> {
    // The fsync happens under the lock, which is what serializes appends.
    let ack = tokio::task::spawn_blocking(move || lock(&state).submit(j))
        .await
        .map_err(|e| ServiceError::Io(std::io::Error::other(e)))??;
    Ok((StatusCode::CREATED, Json(ack)))
}

async fn report(State(state): State<Shared>, Query(q): Query<SessionQuery>) -> Result<impl IntoResponse, ApiError> {
    let svc = lock(&state);
    let session = q.session.unwrap_or_else(|| svc.session_id().to_string());
    Ok(Json(svc.report(&session)?))
}

async fn example(State(state): State<Shared>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(lock(&state).example(&id)?))
}

async fn session(State(state): State<Shared>) -> Json<SessionInfo> {
    let svc = lock(&state);
    let h = svc.header();
    Json(SessionInfo {
        session: h.session.clone(),
        policy: h.policy,
        n_judgments: h.n_judgments,
        item_count: h.items.len(),
        judgment_count: svc.judgments().len(),
    })
}

const PLACEHOLDER: &str = "<!doctype html>\n<title>claimforge annotation</title>\n\
<p>The annotation API is running. Start the server with <code>--static DIR</code> to serve the UI here.</p>\n";

async fn placeholder() -> Html<&'static str> {
    Html(PLACEHOLDER)
}

/// API routes, with UI assets from `static_dir` at `/` when given.
pub fn router(state: Shared, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/session", get(session))
        .route("/api/tasks/next", get(next_task))
        .route("/api/judgments", post(submit))
        .route("/api/report", get(report))
        .route("/api/examples/{id}", get(example))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(placeholder)),
    }
}
