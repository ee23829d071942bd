use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::json;
use thiserror::Error;

use coexplore_core::eq::EqError;
use coexplore_core::llm::LlmError;
use coexplore_core::model::ModelError;
use coexplore_core::query::QueryError;
use coexplore_core::rank::RankError;
use coexplore_core::relevance::RelevanceError;
use coexplore_core::scholar::ScholarError;
use coexplore_core::session::SessionError;
use coexplore_core::theming::ThemingError;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    BadRequest(String),
    #[error("{0}")]
    Conflict(String),
    #[error("{0}")]
    Upstream(String),
    #[error("{0}")]
    Internal(String),
}

impl AppError {
    pub fn status(&self) -> StatusCode {
        match self {
            AppError::NotFound(_) => StatusCode::NOT_FOUND,
            AppError::BadRequest(_) => StatusCode::BAD_REQUEST,
            AppError::Conflict(_) => StatusCode::CONFLICT,
            AppError::Upstream(_) => StatusCode::BAD_GATEWAY,
            AppError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    fn code(&self) -> &'static str {
        match self {
            AppError::NotFound(_) => "not_found",
            AppError::BadRequest(_) => "bad_request",
            AppError::Conflict(_) => "conflict",
            AppError::Upstream(_) => "upstream_error",
            AppError::Internal(_) => "internal_error",
        }
    }
}

impl IntoResponse for AppError {
    fn into_response(self) -> Response {
        let body = json!({ "error": { "code": self.code(), "message": self.to_string() } });
        (self.status(), Json(body)).into_response()
    }
}

impl From<SessionError> for AppError {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::NotFound(_) | SessionError::UnknownEntity { .. } => {
                AppError::NotFound(e.to_string())
            }
            SessionError::InvalidEdit(_) | SessionError::Model(_) => AppError::BadRequest(e.to_string()),
            SessionError::CorruptState(_) | SessionError::Invariant(_) | SessionError::Io(_) => {
                AppError::Internal(e.to_string())
            }
        }
    }
}

impl From<ModelError> for AppError {
    fn from(e: ModelError) -> Self {
        AppError::BadRequest(e.to_string())
    }
}

impl From<LlmError> for AppError {
    fn from(e: LlmError) -> Self {
        match e {
            LlmError::UnboundPlaceholder(_) | LlmError::InvalidTemperature(_) => {
                AppError::Internal(e.to_string())
            }
            LlmError::EmptyInput => AppError::BadRequest(e.to_string()),
            _ => AppError::Upstream(e.to_string()),
        }
    }
}

impl From<ScholarError> for AppError {
    fn from(e: ScholarError) -> Self {
        match e {
            ScholarError::NotFound(_) => AppError::NotFound(e.to_string()),
            ScholarError::InvalidQuery(_) | ScholarError::InvalidLimit(_) => {
                AppError::BadRequest(e.to_string())
            }
            _ => AppError::Upstream(e.to_string()),
        }
    }
}

impl From<EqError> for AppError {
    fn from(e: EqError) -> Self {
        match e {
            EqError::Llm(l) => l.into(),
            EqError::InvalidArgument(_) => AppError::BadRequest(e.to_string()),
            EqError::UnparseableCompletion { .. } => AppError::Upstream(e.to_string()),
        }
    }
}

impl From<QueryError> for AppError {
    fn from(e: QueryError) -> Self {
        match e {
            QueryError::Llm(l) => l.into(),
            QueryError::UnparseableCompletion { .. } => AppError::Upstream(e.to_string()),
            QueryError::EmptyQuestion | QueryError::EmptyInput | QueryError::NoCoveredWords => {
                AppError::BadRequest(e.to_string())
            }
            _ => AppError::Internal(e.to_string()),
        }
    }
}

impl From<RelevanceError> for AppError {
    fn from(e: RelevanceError) -> Self {
        match e {
            RelevanceError::Llm(l) => l.into(),
            _ => AppError::Internal(e.to_string()),
        }
    }
}

impl From<ThemingError> for AppError {
    fn from(e: ThemingError) -> Self {
        match e {
            ThemingError::Llm(l) => l.into(),
            ThemingError::Relevance(r) => r.into(),
            _ => AppError::Internal(e.to_string()),
        }
    }
}

impl From<RankError> for AppError {
    fn from(e: RankError) -> Self {
        AppError::Internal(e.to_string())
    }
}
