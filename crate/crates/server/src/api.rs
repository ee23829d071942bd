//! HTTP routes under `/api/v1`.

use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};

use coexplore_core::scholar::LinkDirection;
use coexplore_core::session::CollectionEdit;

use crate::error::AppError;
use crate::export::ExportFormat;
use crate::services::{AppResult, GenerateRequest, NewEq, PatchEq, Services};

type AppState = State<Arc<Services>>;

pub fn router(services: Arc<Services>) -> Router {
    let api = Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/eqs/generate", post(generate_eqs))
        .route("/sessions/{id}/eqs/{eq_id}", patch(patch_eq))
        .route("/sessions/{id}/eqs", post(add_eq))
        .route("/sessions/{id}/eqs/{eq_id}/explore", post(explore))
        .route("/sessions/{id}/jobs/{job_id}", get(job))
        .route("/sessions/{id}/themes/{eq_id}", get(themes))
        .route("/papers/{paper_id}/links", get(links))
        .route("/sessions/{id}/collections/edits", post(edit_collections))
        .route("/sessions/{id}/export", get(export));
    Router::new().nest("/api/v1", api).with_state(services)
}

/// Parses a JSON body, reporting malformed input in the API error shape.
fn body<T: serde::de::DeserializeOwned>(raw: &[u8]) -> AppResult<T> {
    serde_json::from_slice(raw).map_err(|e| AppError::BadRequest(format!("invalid request body: {e}")))
}

#[derive(Deserialize)]
struct CreateSession {
    topic: String,
}

async fn create_session(State(s): AppState, raw: axum::body::Bytes) -> AppResult<(StatusCode, Json<Value>)> {
    let req: CreateSession = body(&raw)?;
    let state = s.create_session(&req.topic)?;
    Ok((StatusCode::CREATED, Json(json!({ "session_id": state.session_id }))))
}

async fn generate_eqs(State(s): AppState, Path(id): Path<String>, raw: axum::body::Bytes) -> AppResult<Json<Value>> {
    let req: GenerateRequest = body(&raw)?;
    let eqs = s.generate_eqs(&id, &req).await?;
    Ok(Json(json!({ "eqs": eqs })))
}

async fn patch_eq(
    State(s): AppState,
    Path((id, eq_id)): Path<(String, String)>,
    raw: axum::body::Bytes,
) -> AppResult<Json<Value>> {
    let req: PatchEq = body(&raw)?;
    if req.text.is_none() && req.selected.is_none() {
        return Err(AppError::BadRequest("expected `text` or `selected`".into()));
    }
    let eq = s.patch_eq(&id, &eq_id, &req).await?;
    Ok(Json(json!({ "eq": eq })))
}

async fn add_eq(State(s): AppState, Path(id): Path<String>, raw: axum::body::Bytes) -> AppResult<(StatusCode, Json<Value>)> {
    let req: NewEq = body(&raw)?;
    let eq = s.add_user_eq(&id, &req).await?;
    Ok((StatusCode::CREATED, Json(json!({ "eq": eq }))))
}

async fn explore(State(s): AppState, Path((id, eq_id)): Path<(String, String)>) -> AppResult<(StatusCode, Json<Value>)> {
    let job = s.start_explore(&id, &eq_id).await?;
    Ok((StatusCode::ACCEPTED, Json(json!({ "job_id": job.job_id }))))
}

async fn job(State(s): AppState, Path((id, job_id)): Path<(String, String)>) -> AppResult<impl IntoResponse> {
    Ok(Json(s.job(&id, &job_id).await?))
}

async fn themes(State(s): AppState, Path((id, eq_id)): Path<(String, String)>) -> AppResult<impl IntoResponse> {
    Ok(Json(s.themes(&id, &eq_id).await?))
}

#[derive(Deserialize)]
struct LinksQuery {
    direction: Option<String>,
    session: Option<String>,
}

async fn links(
    State(s): AppState,
    Path(paper_id): Path<String>,
    Query(q): Query<LinksQuery>,
) -> AppResult<impl IntoResponse> {
    let direction: LinkDirection = q
        .direction
        .as_deref()
        .unwrap_or("citations")
        .parse()
        .map_err(|_| AppError::BadRequest("direction must be citations or references".into()))?;
    let session = q
        .session
        .ok_or_else(|| AppError::BadRequest("missing `session` query parameter".into()))?;
    Ok(Json(s.links(&paper_id, direction, &session).await?))
}

async fn edit_collections(
    State(s): AppState,
    Path(id): Path<String>,
    raw: axum::body::Bytes,
) -> AppResult<impl IntoResponse> {
    let edit: CollectionEdit = body(&raw)?;
    Ok(Json(s.edit_collections(&id, edit).await?))
}

#[derive(Deserialize)]
struct ExportQuery {
    format: Option<String>,
}

async fn export(State(s): AppState, Path(id): Path<String>, Query(q): Query<ExportQuery>) -> AppResult<Response> {
    let format: ExportFormat = q
        .format
        .as_deref()
        .unwrap_or("json")
        .parse()
        .map_err(AppError::BadRequest)?;
    let doc = s.export(&id, format).await?;
    let content_type = match format {
        ExportFormat::Json => "application/json",
        ExportFormat::Markdown => "text/markdown; charset=utf-8",
    };
    Ok(([(header::CONTENT_TYPE, content_type)], doc).into_response())
}
