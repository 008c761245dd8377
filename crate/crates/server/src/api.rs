use std::collections::HashMap;
use std::path::Path as FsPath;
use std::sync::Arc;

use arbor_core::alignment::Verdict;
use axum::extract::rejection::JsonRejection;
use axum::extract::{DefaultBodyLimit, FromRequest, Multipart, Path, Query, Request, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::ServiceError;
use crate::session::{ExportFormat, Session, TreeEdit};
use crate::store::SessionStore;

const MAX_UPLOAD_BYTES: usize = 1 << 30;

#[derive(Debug, Clone)]
pub struct AppState {
    pub store: Arc<SessionStore>,
}

/// JSON body extractor whose failures use the error envelope.
pub struct ApiJson<T>(pub T);

impl<S, T> FromRequest<S> for ApiJson<T>
where
    Json<T>: FromRequest<S, Rejection = JsonRejection>,
    S: Send + Sync,
{
    type Rejection = ServiceError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(value)) => Ok(ApiJson(value)),
            Err(rejection) => Err(ServiceError::BadRequest(rejection.body_text())),
        }
    }
}

#[derive(Debug, Deserialize)]
pub struct Selection {
    pub variant_ids: Vec<usize>,
}

type ApiResult = Result<Json<Value>, ServiceError>;

async fn blocking<T, F>(f: F) -> Result<T, ServiceError>
where
    T: Send + 'static,
    F: FnOnce() -> Result<T, ServiceError> + Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))?
}

fn share(numerator: usize, denominator: usize) -> String {
    if denominator == 0 {
        "0".into()
    } else {
        format!("{:.6}", numerator as f64 / denominator as f64)
    }
}

fn variants_view(session: &Session) -> Value {
    let total = session.log.as_ref().map_or(0, |log| log.traces.len());
    let rows: Vec<Value> = session
        .variants
        .iter()
        .map(|v| {
            json!({
                "variant_id": v.variant_id,
                "activities": v.activities,
                "case_count": v.case_count,
                "share": share(v.case_count, total),
                "added": session.added_variant_ids.contains(&v.variant_id),
                "conformance": session.accepted_flags.get(&v.variant_id).copied().unwrap_or(Verdict::Unknown),
            })
        })
        .collect();
    json!({ "total_cases": total, "variants": rows })
}

fn tree_view(session: &Session) -> Value {
    let violations = session.tree.as_ref().map(|t| t.validate()).unwrap_or_default();
    json!({
        "tree": session.tree,
        "violations": violations,
        "added_variant_ids": session.added_variant_ids,
        "can_undo": session.can_undo(),
        "can_redo": session.can_redo(),
    })
}

fn conformance_view(session: &Session) -> Value {
    let mut accepted_cases = 0;
    let flags: Vec<Value> = session
        .variants
        .iter()
        .map(|v| {
            let verdict = session.accepted_flags.get(&v.variant_id).copied().unwrap_or(Verdict::Unknown);
            if verdict == Verdict::Accepted {
                accepted_cases += v.case_count;
            }
            json!({ "variant_id": v.variant_id, "conformance": verdict })
        })
        .collect();
    let total = session.log.as_ref().map_or(0, |log| log.traces.len());
    json!({
        "flags": flags,
        "accepted_cases": accepted_cases,
        "total_cases": total,
        "accepted_share": share(accepted_cases, total),
    })
}

async fn health() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

async fn create_session(State(app): State<AppState>) -> (StatusCode, Json<Value>) {
    let id = app.store.create();
    tracing::info!(session = %id, "session created");
    (StatusCode::CREATED, Json(json!({ "session_id": id })))
}

async fn upload_log(State(app): State<AppState>, Path(id): Path<String>, request: Request) -> ApiResult {
    let is_multipart = request
        .headers()
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("multipart/form-data"));
    let (name, bytes) = if is_multipart {
        let mut multipart = Multipart::from_request(request, &())
            .await
            .map_err(|e| ServiceError::BadRequest(e.body_text()))?;
        let field = multipart
            .next_field()
            .await
            .map_err(|e| ServiceError::BadRequest(e.body_text()))?
            .ok_or_else(|| ServiceError::BadRequest("multipart body has no file field".into()))?;
        let name = field.file_name().unwrap_or("upload.xes").to_string();
        let bytes = field.bytes().await.map_err(|e| ServiceError::BadRequest(e.body_text()))?;
        (name, bytes)
    } else {
        let bytes = axum::body::to_bytes(request.into_body(), MAX_UPLOAD_BYTES)
            .await
            .map_err(|e| ServiceError::BadRequest(e.to_string()))?;
        ("upload.xes".to_string(), bytes)
    };
    blocking(move || {
        app.store.update(&id, "upload_log", |s| {
            s.upload_log(&bytes, &name)?;
            Ok(variants_view(s))
        })
    })
    .await
    .map(Json)
}

async fn variants(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult {
    app.store.read(&id, |s| Ok(Json(variants_view(s))))
}

async fn tree(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult {
    app.store.read(&id, |s| Ok(Json(tree_view(s))))
}

async fn discover(State(app): State<AppState>, Path(id): Path<String>, ApiJson(body): ApiJson<Selection>) -> ApiResult {
    blocking(move || {
        app.store.update(&id, "discover", |s| {
            s.discover(&body.variant_ids)?;
            Ok(tree_view(s))
        })
    })
    .await
    .map(Json)
}

async fn extend(State(app): State<AppState>, Path(id): Path<String>, ApiJson(body): ApiJson<Selection>) -> ApiResult {
    blocking(move || {
        app.store.update(&id, "extend", |s| {
            s.extend(&body.variant_ids)?;
            Ok(tree_view(s))
        })
    })
    .await
    .map(Json)
}

async fn edit(State(app): State<AppState>, Path(id): Path<String>, ApiJson(body): ApiJson<TreeEdit>) -> ApiResult {
    app.store
        .update(&id, "edit", |s| {
            s.edit(&body)?;
            Ok(tree_view(s))
        })
        .map(Json)
}

async fn conformance(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult {
    blocking(move || {
        app.store.update(&id, "conformance", |s| {
            s.conformance()?;
            Ok(conformance_view(s))
        })
    })
    .await
    .map(Json)
}

async fn undo(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult {
    app.store
        .update(&id, "undo", |s| {
            s.undo()?;
            Ok(tree_view(s))
        })
        .map(Json)
}

async fn redo(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult {
    app.store
        .update(&id, "redo", |s| {
            s.redo()?;
            Ok(tree_view(s))
        })
        .map(Json)
}

async fn import_tree(State(app): State<AppState>, Path(id): Path<String>, body: axum::body::Bytes) -> ApiResult {
    app.store
        .update(&id, "import_tree", |s| {
            s.import_tree(&body)?;
            Ok(tree_view(s))
        })
        .map(Json)
}

async fn export(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Query(query): Query<HashMap<String, String>>,
) -> Result<Response, ServiceError> {
    let format = match query.get("format").map(String::as_str) {
        Some("ptml") => ExportFormat::Ptml,
        Some("pnml") => ExportFormat::Pnml,
        Some(other) => return Err(ServiceError::BadRequest(format!("unsupported export format `{other}`"))),
        None => return Err(ServiceError::BadRequest("missing `format` query parameter".into())),
    };
    let bytes = app.store.read(&id, |s| s.export(format))?;
    let filename = match format {
        ExportFormat::Ptml => "model.ptml",
        ExportFormat::Pnml => "model.pnml",
    };
    let mut headers = HeaderMap::new();
    headers.insert(header::CONTENT_TYPE, "application/xml".parse().expect("static header"));
    headers.insert(
        header::CONTENT_DISPOSITION,
        format!("attachment; filename=\"{filename}\"").parse().expect("ascii header"),
    );
    Ok((headers, bytes).into_response())
}

async fn activities(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult {
    app.store.read(&id, |s| Ok(Json(json!({ "activities": s.activities()? }))))
}

async fn not_found() -> ServiceError {
    ServiceError::NotFound
}

/// The HTTP API. With `static_dir`, unmatched paths are served from that
/// directory (the built UI bundle).
pub fn routes(state: AppState, static_dir: Option<&FsPath>) -> Router {
    let api = Router::new()
        .route("/health", get(health))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/log", post(upload_log))
        .route("/sessions/{id}/variants", get(variants))
        .route("/sessions/{id}/tree", get(tree))
        .route("/sessions/{id}/discover", post(discover))
        .route("/sessions/{id}/extend", post(extend))
        .route("/sessions/{id}/tree/edit", post(edit))
        .route("/sessions/{id}/tree/import", post(import_tree))
        .route("/sessions/{id}/conformance", post(conformance))
        .route("/sessions/{id}/undo", post(undo))
        .route("/sessions/{id}/redo", post(redo))
        .route("/sessions/{id}/export", get(export))
        .route("/sessions/{id}/activities", get(activities))
        .layer(DefaultBodyLimit::max(MAX_UPLOAD_BYTES))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => api.fallback(not_found),
    }
}
